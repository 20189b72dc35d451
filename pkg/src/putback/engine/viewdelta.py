"""Folding a sequence of view update statements into one view delta."""

from __future__ import annotations

import operator
from dataclasses import dataclass

from ..datalog.syntax import Relation
from .database import Database, DeltaSet

_OPS = {"=": operator.eq, "<": operator.lt, ">": operator.gt}


@dataclass(frozen=True)
class Condition:
    attr: str
    op: str  # '=', '<' or '>'
    value: object


@dataclass(frozen=True)
class InsertRow:
    row: tuple


@dataclass(frozen=True)
class DeleteWhere:
    where: tuple = ()  # conjunction of Condition


@dataclass(frozen=True)
class UpdateWhere:
    assignments: tuple  # (attr, value) pairs
    where: tuple = ()


def _matcher(view: Relation, where):
    names = view.attr_names
    checks = []
    for c in where:
        if c.attr not in names:
            raise ValueError(f"unknown attribute {c.attr} of {view.name}")
        if c.op not in _OPS:
            raise ValueError(f"unsupported operator {c.op}")
        checks.append((names.index(c.attr), _OPS[c.op], c.value))
    return lambda t: all(type(t[i]) is type(v) and op(t[i], v) for i, op, v in checks)


def _fold(plus, minus, d_plus, d_minus):
    return (plus - d_minus) | d_plus, (minus - d_plus) | d_minus


def derive_view_delta(stmts, v: Database, view: Relation) -> DeltaSet:
    """Fold statements into (Δ+V, Δ−V); later statements win."""
    base = v[view.name]
    plus, minus = frozenset(), frozenset()
    for stmt in stmts:
        current = (base - minus) | plus
        if isinstance(stmt, InsertRow):
            if len(stmt.row) != view.arity:
                raise ValueError(f"row {stmt.row} does not match {view}")
            plus, minus = _fold(plus, minus, frozenset({tuple(stmt.row)}), frozenset())
        elif isinstance(stmt, DeleteWhere):
            match = _matcher(view, stmt.where)
            plus, minus = _fold(plus, minus, frozenset(), frozenset(t for t in current if match(t)))
        elif isinstance(stmt, UpdateWhere):
            match = _matcher(view, stmt.where)
            names = view.attr_names
            for a, _ in stmt.assignments:
                if a not in names:
                    raise ValueError(f"unknown attribute {a} of {view.name}")
            old = frozenset(t for t in current if match(t))
            new = set()
            for t in old:
                row = list(t)
                for a, value in stmt.assignments:
                    row[names.index(a)] = value
                new.add(tuple(row))
            # delete-then-insert
            plus, minus = _fold(plus, minus, frozenset(), old)
            plus, minus = _fold(plus, minus, frozenset(new), frozenset())
        else:
            raise TypeError(f"not an update statement: {stmt!r}")
    return DeltaSet({view.name: plus}, {view.name: minus})


def replay(stmts, v: Database, view: Relation) -> Database:
    """Apply statements one by one (the reference the fold must match)."""
    rows = set(v[view.name])
    for stmt in stmts:
        if isinstance(stmt, InsertRow):
            rows.add(tuple(stmt.row))
        elif isinstance(stmt, DeleteWhere):
            match = _matcher(view, stmt.where)
            rows = {t for t in rows if not match(t)}
        else:
            match = _matcher(view, stmt.where)
            names = view.attr_names
            hit = {t for t in rows if match(t)}
            rows -= hit
            for t in hit:
                row = list(t)
                for a, value in stmt.assignments:
                    row[names.index(a)] = value
                rows.add(tuple(row))
    return v.replace(view.name, rows)

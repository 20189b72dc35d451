"""Translate a RANF formula into a nonrecursive Datalog query."""

from __future__ import annotations

from ..datalog.syntax import ANON, Atom, Cmp, Eq, Neg, Pos, Program, Rule, Schema, Var
from .formula import (And, Comparison, Equality, Exists, Not, Or, RelAtom, alpha_rename,
                      ordered_free, show)
from .normal import NormalizationError, is_ranf


class _Dead(Exception):
    """The conjunction contains an empty disjunction, so the rule never fires."""


class _Builder:
    def __init__(self, goal):
        self.goal = goal
        self.rules = []
        self.count = 0

    def aux(self):
        self.count += 1
        return f"{self.goal}_g{self.count}"

    def define(self, pred, head_vars, f):
        head = Atom(pred, tuple(Var(v) for v in head_vars))
        disjuncts = f.parts if isinstance(f, Or) else (f,)
        for d in disjuncts:
            try:
                body = self.body(d)
            except _Dead:
                continue
            self.rules.append(Rule(head, tuple(body)))

    def body(self, f) -> list:
        if isinstance(f, RelAtom):
            return [Pos(Atom(f.pred, f.terms))]
        if isinstance(f, Equality):
            return [Eq(f.left, f.right)]
        if isinstance(f, Comparison):
            return [Cmp(f.op, f.left, f.right)]
        if isinstance(f, And):
            out = []
            for p in f.parts:
                out.extend(self.body(p))
            return out
        if isinstance(f, Exists):
            return self.body(f.body)
        if isinstance(f, Or):
            if not f.parts:
                raise _Dead()
            name = self.aux()
            vs = ordered_free(f)
            self.define(name, vs, f)
            return [Pos(Atom(name, tuple(Var(v) for v in vs)))]
        if isinstance(f, Not):
            g = f.body
            if isinstance(g, RelAtom):
                return [Neg(Atom(g.pred, g.terms))]
            if isinstance(g, Equality):
                return [Eq(g.left, g.right, negated=True)]
            if isinstance(g, Comparison):
                return [Cmp(g.op, g.left, g.right, negated=True)]
            if isinstance(g, Or) and not g.parts:
                return []
            if isinstance(g, Exists) and isinstance(g.body, RelAtom):
                names = [t.name for t in g.body.terms if isinstance(t, Var)]
                if all(names.count(x) == 1 for x in g.vars):
                    args = tuple(ANON if isinstance(t, Var) and t.name in g.vars else t
                                 for t in g.body.terms)
                    return [Neg(Atom(g.body.pred, args))]
            name = self.aux()
            vs = ordered_free(g)
            self.define(name, vs, g.body if isinstance(g, Exists) else g)
            return [Neg(Atom(name, tuple(Var(v) for v in vs)))]
        raise NormalizationError(f"cannot translate {show(f)}")


def ranf_to_datalog(f, goal="G", head=None, schema=None, check=True):
    """Datalog program and goal predicate computing the answers of `f`.

    `head` fixes the order of the goal's arguments (default: order of first
    occurrence of the free variables). Auxiliary predicates are named
    goal_g1, goal_g2, ..."""
    if check and not is_ranf(f):
        raise NormalizationError(f"not in RANF: {show(f)}")
    head = list(head) if head is not None else ordered_free(f)
    missing = set(f.free) - set(head)
    if missing:
        raise ValueError(f"free variables {sorted(missing)} missing from the head")
    b = _Builder(goal)
    b.define(goal, head, alpha_rename(f, avoid=head))
    for r in b.rules:
        bound = set()
        for lit in r.body:
            bound.update(v.name for v in _vars(lit))
        unbound = [v for v in head if v not in bound] if r.head.pred == goal else []
        if unbound:
            raise NormalizationError(f"head variables {unbound} are not bound in {r}")
    return Program(schema or Schema(), tuple(b.rules)), goal


def _vars(lit):
    if isinstance(lit, (Pos, Neg)):
        return [t for t in lit.atom.args if isinstance(t, Var)]
    return [t for t in (lit.left, lit.right) if isinstance(t, Var)]

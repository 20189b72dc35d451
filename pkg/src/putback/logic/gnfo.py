"""Guarded-negation membership test and the axiomatization of comparisons
against constants."""

from __future__ import annotations

import datetime

from ..datalog.syntax import Const, Var, type_of
from .formula import (TRUE, And, Comparison, Equality, Exists, Forall, Implies, Not, Or,
                      RelAtom, conj, disj)


def _is_atomic(f):
    return isinstance(f, (RelAtom, Equality, Comparison))


def is_gnfo(f) -> bool:
    """Membership in: atom | t1=t2 | and | or | exists | alpha and not phi,
    where the guard alpha is an atom (comparisons count as abstracted unary
    atoms) covering the free variables of phi. Negated sentences need no guard."""
    if _is_atomic(f):
        return True
    if isinstance(f, (Forall, Implies)):
        return False
    if isinstance(f, Not):
        return not f.body.free and is_gnfo(f.body)
    if isinstance(f, Exists):
        return is_gnfo(f.body)
    if isinstance(f, Or):
        return all(is_gnfo(p) for p in f.parts)
    if isinstance(f, And):
        guards = [p.free for p in f.parts if _is_atomic(p)]
        for p in f.parts:
            if isinstance(p, Not):
                if not is_gnfo(p.body):
                    return False
                if p.body.free and not any(p.body.free <= g for g in guards):
                    return False
            elif not is_gnfo(p):
                return False
        return True
    raise TypeError(f)


# ------------------------------------------------------------ comparisons

def lt_pred(sort, j):
    return f"lt_{sort}_{j}"


def gt_pred(sort, j):
    return f"gt_{sort}_{j}"


def _gap_nonempty(lo, hi, sort) -> bool:
    """Is there a value of `sort` strictly between lo and hi (None = unbounded)?"""
    if sort == "int":
        return lo is None or hi is None or hi - lo > 1
    if sort == "date":
        if lo is None:
            return hi > datetime.date.min
        if hi is None:
            return lo < datetime.date.max
        return (hi - lo).days > 1
    # strings: nothing below "", and nothing between s and s + "\0"
    if lo is None:
        return hi != ""
    if hi is None:
        return True
    return hi != lo + "\x00"


def axiomatize_comparisons(constants, domain=None, var="X"):
    """forall X. one region formula per interval cut out by the sorted
    constants c1 < ... < cn; a region that holds no value of the domain
    contributes false. Each region pins X's relation to every cj through
    the predicates lt_<sort>_j (X < cj) and gt_<sort>_j (X > cj)."""
    cs = list(constants)
    if not cs:
        return TRUE
    sort = domain or type_of(cs[0])
    x = Var(var)
    n = len(cs)

    def region(pos):
        # pos = 2*i   : strictly between c_i and c_{i+1} (1-based, c_0=-inf)
        # pos = 2*i-1 : equal to c_i
        parts = []
        for j in range(1, n + 1):
            lt = RelAtom(lt_pred(sort, j), (x,))
            gt = RelAtom(gt_pred(sort, j), (x,))
            eq = Equality(x, Const(cs[j - 1]))
            here = 2 * j - 1
            if pos < here:
                parts += [lt, Not(gt), Not(eq)]
            elif pos == here:
                parts += [eq, Not(lt), Not(gt)]
            else:
                parts += [gt, Not(lt), Not(eq)]
        return conj(*parts)

    disjuncts = []
    for pos in range(0, 2 * n + 1):
        if pos % 2 == 0:
            i = pos // 2
            lo = cs[i - 1] if i >= 1 else None
            hi = cs[i] if i < n else None
            if not _gap_nonempty(lo, hi, sort):
                continue
        disjuncts.append(region(pos))
    return Forall((var,), disj(*disjuncts))


def abstract_comparisons(f, constants_by_sort, sorts):
    """Replace X < c / X > c (and the mirrored c < X, c > X) by the
    abstract unary predicates. Variable-to-variable comparisons are kept."""
    def index(c):
        return constants_by_sort[type_of(c.value)].index(c.value) + 1

    def go(g):
        if isinstance(g, Comparison):
            l, r, op = g.left, g.right, g.op
            if isinstance(l, Const) and isinstance(r, Var):
                l, r, op = r, l, {"<": ">", ">": "<"}[op]
            if isinstance(l, Var) and isinstance(r, Const):
                sort = type_of(r.value)
                name = lt_pred(sort, index(r)) if op == "<" else gt_pred(sort, index(r))
                return RelAtom(name, (l,))
            return g
        if isinstance(g, (RelAtom, Equality)):
            return g
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p) for p in g.parts))
        if isinstance(g, (Exists, Forall)):
            return type(g)(g.vars, go(g.body))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        raise TypeError(g)

    return go(f)

"""Brute-force formula evaluator over the active domain.

Independent of the Datalog engine: it is the reference every rewrite and
every satisfiability witness is checked against."""

from __future__ import annotations

import itertools
import operator

from ..datalog.syntax import Const, Var, type_of
from .formula import (And, Comparison, Equality, Exists, Forall, Implies, Not, Or,
                      RelAtom, constants)

_OPS = {"<": operator.lt, ">": operator.gt}


def active_domain(f, database) -> list:
    values = database.values() | constants(f)
    return sorted(values, key=lambda v: (type_of(v), v))


def _val(t, env):
    return t.value if isinstance(t, Const) else env[t.name]


def _same(a, b):
    return type(a) is type(b) and a == b


def holds(f, database, env=None, domain=None, sorts=None) -> bool:
    """Truth of `f` under `env`; quantifiers range over `domain` (default:
    active domain of the database plus the constants of `f`). `sorts`
    optionally restricts a variable to values of one type."""
    env = dict(env or {})
    if domain is None:
        domain = active_domain(f, database)
    by_type = {}
    for v in domain:
        by_type.setdefault(type_of(v), []).append(v)

    def candidates(name):
        if sorts and sorts.get(name) is not None:
            return by_type.get(sorts[name], [])
        return domain

    def ev(g):
        if isinstance(g, RelAtom):
            return tuple(_val(t, env) for t in g.terms) in database[g.pred]
        if isinstance(g, Equality):
            return _same(_val(g.left, env), _val(g.right, env))
        if isinstance(g, Comparison):
            a, b = _val(g.left, env), _val(g.right, env)
            return type(a) is type(b) and _OPS[g.op](a, b)
        if isinstance(g, Not):
            return not ev(g.body)
        if isinstance(g, And):
            return all(ev(p) for p in g.parts)
        if isinstance(g, Or):
            return any(ev(p) for p in g.parts)
        if isinstance(g, Implies):
            return (not ev(g.left)) or ev(g.right)
        if isinstance(g, (Exists, Forall)):
            saved = {v: env[v] for v in g.vars if v in env}
            want = isinstance(g, Exists)
            result = not want
            for combo in itertools.product(*(candidates(v) for v in g.vars)):
                env.update(zip(g.vars, combo))
                if ev(g.body) == want:
                    result = want
                    break
            for v in g.vars:
                env.pop(v, None)
            env.update(saved)
            return result
        raise TypeError(g)

    return ev(f)


def answers(f, database, order, domain=None, sorts=None) -> frozenset:
    """Tuples over `order` (free variables) that satisfy `f`."""
    if domain is None:
        domain = active_domain(f, database)
    missing = set(f.free) - set(order)
    if missing:
        raise ValueError(f"free variables {sorted(missing)} not in answer order")
    by_type = {}
    for v in domain:
        by_type.setdefault(type_of(v), []).append(v)
    pools = [by_type.get(sorts[n], []) if sorts and sorts.get(n) else domain for n in order]
    out = set()
    for combo in itertools.product(*pools):
        if holds(f, database, dict(zip(order, combo)), domain, sorts):
            out.add(combo)
    return frozenset(out)


def infer_sorts(f, signature) -> dict:
    """Variable -> type from atom positions (`signature(pred)` gives column
    types or None) and equalities/comparisons with constants."""
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    typ = {}

    def assign(name, t):
        r = find(name)
        if t is not None and typ.get(r) is None:
            typ[r] = t

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            if typ.get(rb) is None and typ.get(ra) is not None:
                typ[rb] = typ[ra]

    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, RelAtom):
            sig = signature(g.pred)
            for i, t in enumerate(g.terms):
                if isinstance(t, Var):
                    find(t.name)
                    if sig is not None and i < len(sig):
                        assign(t.name, sig[i])
        elif isinstance(g, (Equality, Comparison)):
            l, r = g.left, g.right
            if isinstance(l, Var) and isinstance(r, Var):
                union(l.name, r.name)
            for a, b in ((l, r), (r, l)):
                if isinstance(a, Var) and isinstance(b, Const):
                    assign(a.name, type_of(b.value))
        elif isinstance(g, (Exists, Forall)):
            for v in g.vars:
                find(v)
            stack.append(g.body)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend(g.parts)
        elif isinstance(g, Implies):
            stack.extend((g.left, g.right))
    return {v: typ.get(find(v)) for v in parent}

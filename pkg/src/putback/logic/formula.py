"""First-order formulas over relational atoms, equality and comparisons."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from ..datalog.syntax import Const, Var


def _hash(self):
    h = self.__dict__.get("_h")
    if h is None:
        h = hash((type(self).__name__,) + self._key())
        self.__dict__["_h"] = h
    return h


class Formula:
    """Base class. Subclasses are frozen dataclasses; free variables are cached."""

    @cached_property
    def free(self) -> frozenset:
        return frozenset(self._free())

    def __str__(self):
        return show(self)


@dataclass(frozen=True, eq=True)
class RelAtom(Formula):
    pred: str
    terms: tuple

    __hash__ = _hash

    def _key(self):
        return (self.pred, self.terms)

    def _free(self):
        return {t.name for t in self.terms if isinstance(t, Var)}


@dataclass(frozen=True, eq=True)
class Equality(Formula):
    left: object
    right: object

    __hash__ = _hash

    def _key(self):
        return (self.left, self.right)

    def _free(self):
        return {t.name for t in (self.left, self.right) if isinstance(t, Var)}


@dataclass(frozen=True, eq=True)
class Comparison(Formula):
    op: str
    left: object
    right: object

    __hash__ = _hash

    def _key(self):
        return (self.op, self.left, self.right)

    def _free(self):
        return {t.name for t in (self.left, self.right) if isinstance(t, Var)}


@dataclass(frozen=True, eq=True)
class Not(Formula):
    body: Formula

    __hash__ = _hash

    def _key(self):
        return (self.body,)

    def _free(self):
        return self.body.free


@dataclass(frozen=True, eq=True)
class And(Formula):
    parts: tuple

    __hash__ = _hash

    def _key(self):
        return self.parts

    def _free(self):
        out = set()
        for p in self.parts:
            out |= p.free
        return out


@dataclass(frozen=True, eq=True)
class Or(Formula):
    parts: tuple

    __hash__ = _hash

    def _key(self):
        return self.parts

    def _free(self):
        out = set()
        for p in self.parts:
            out |= p.free
        return out


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    vars: tuple  # variable names
    body: Formula

    __hash__ = _hash

    def _key(self):
        return (self.vars, self.body)

    def _free(self):
        return self.body.free - set(self.vars)


@dataclass(frozen=True, eq=True)
class Forall(Formula):
    vars: tuple
    body: Formula

    __hash__ = _hash

    def _key(self):
        return (self.vars, self.body)

    def _free(self):
        return self.body.free - set(self.vars)


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula

    __hash__ = _hash

    def _key(self):
        return (self.left, self.right)

    def _free(self):
        return self.left.free | self.right.free


TRUE = And(())
BOTTOM = Or(())


# ------------------------------------------------------------ constructors

def conj(*parts) -> Formula:
    """Flattening, deduplicating conjunction; absorbs TRUE, short-circuits BOTTOM."""
    out = []
    for p in parts:
        items = p.parts if isinstance(p, And) else (p,)
        for q in items:
            if q == BOTTOM:
                return BOTTOM
            if q not in out:
                out.append(q)
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*parts) -> Formula:
    out = []
    for p in parts:
        items = p.parts if isinstance(p, Or) else (p,)
        for q in items:
            if q == TRUE:
                return TRUE
            if q not in out:
                out.append(q)
    return out[0] if len(out) == 1 else Or(tuple(out))


def exists(names, body) -> Formula:
    names = tuple(n for n in dict.fromkeys(names) if n in body.free)
    if not names:
        return body
    if isinstance(body, Exists):
        return Exists(names + body.vars, body.body)
    return Exists(names, body)


def neg(f) -> Formula:
    return f.body if isinstance(f, Not) else Not(f)


# ------------------------------------------------------------ traversal

def constants(f) -> set:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, RelAtom):
            out.update(t.value for t in g.terms if isinstance(t, Const))
        elif isinstance(g, (Equality, Comparison)):
            out.update(t.value for t in (g.left, g.right) if isinstance(t, Const))
        else:
            stack.extend(children(g))
    return out


def children(f) -> tuple:
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Not, Exists, Forall)):
        return (f.body,)
    if isinstance(f, Implies):
        return (f.left, f.right)
    return ()


def subformulas(f):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def predicates(f) -> set:
    return {g.pred for g in subformulas(f) if isinstance(g, RelAtom)}


def ordered_free(f) -> list:
    """Free variables in order of first occurrence."""
    seen = []
    bound_stack = []

    def walk(g, bound):
        if isinstance(g, RelAtom):
            ts = g.terms
        elif isinstance(g, (Equality, Comparison)):
            ts = (g.left, g.right)
        else:
            if isinstance(g, (Exists, Forall)):
                bound = bound | set(g.vars)
            for c in children(g):
                walk(c, bound)
            return
        for t in ts:
            if isinstance(t, Var) and t.name not in bound and t.name not in seen:
                seen.append(t.name)

    walk(f, frozenset())
    del bound_stack
    return seen


class Fresh:
    """Fresh variable names: base + '_' + counter, avoiding `used`."""

    def __init__(self, used=()):
        self.used = set(used)
        self.counter = 0

    def __call__(self, base="X") -> str:
        base = base.split("_")[0] or "X"
        while True:
            self.counter += 1
            name = f"{base}_{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name

    def reserve(self, names):
        self.used.update(names)


def all_var_names(f) -> set:
    out = set()
    for g in subformulas(f):
        if isinstance(g, RelAtom):
            out.update(t.name for t in g.terms if isinstance(t, Var))
        elif isinstance(g, (Equality, Comparison)):
            out.update(t.name for t in (g.left, g.right) if isinstance(t, Var))
        elif isinstance(g, (Exists, Forall)):
            out.update(g.vars)
    return out


def _sub_term(t, mapping):
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    return t


def substitute(f, mapping: dict, fresh: Fresh | None = None) -> Formula:
    """Replace free variables by terms; bound variables that would capture
    a substituted variable are renamed."""
    if not mapping:
        return f
    if fresh is None:
        fresh = Fresh(all_var_names(f) | {t.name for t in mapping.values() if isinstance(t, Var)} | set(mapping))
    incoming = {t.name for t in mapping.values() if isinstance(t, Var)}

    def go(g, m):
        if not m or not (g.free & m.keys()):
            return g
        if isinstance(g, RelAtom):
            return RelAtom(g.pred, tuple(_sub_term(t, m) for t in g.terms))
        if isinstance(g, Equality):
            return Equality(_sub_term(g.left, m), _sub_term(g.right, m))
        if isinstance(g, Comparison):
            return Comparison(g.op, _sub_term(g.left, m), _sub_term(g.right, m))
        if isinstance(g, Not):
            return Not(go(g.body, m))
        if isinstance(g, And):
            return And(tuple(go(p, m) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(go(p, m) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(go(g.left, m), go(g.right, m))
        if isinstance(g, (Exists, Forall)):
            inner = {k: v for k, v in m.items() if k not in g.vars}
            names = []
            for v in g.vars:
                if v in incoming:
                    nv = fresh(v)
                    inner[v] = Var(nv)
                    names.append(nv)
                else:
                    names.append(v)
            return type(g)(tuple(names), go(g.body, inner) if inner else g.body)
        raise TypeError(g)

    return go(f, dict(mapping))


def rename_preds(f, mapping: dict) -> Formula:
    if isinstance(f, RelAtom):
        return RelAtom(mapping.get(f.pred, f.pred), f.terms)
    if isinstance(f, (Equality, Comparison)):
        return f
    if isinstance(f, Not):
        return Not(rename_preds(f.body, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(rename_preds(p, mapping) for p in f.parts))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.vars, rename_preds(f.body, mapping))
    if isinstance(f, Implies):
        return Implies(rename_preds(f.left, mapping), rename_preds(f.right, mapping))
    raise TypeError(f)


def alpha_rename(f, fresh: Fresh | None = None, avoid=()) -> Formula:
    """Rename bound variables so that every quantifier binds names distinct
    from the free variables and from each other."""
    fresh = fresh or Fresh(all_var_names(f) | set(avoid))
    taken = set(f.free) | set(avoid)

    def go(g, m):
        if isinstance(g, RelAtom):
            return RelAtom(g.pred, tuple(_sub_term(t, m) for t in g.terms))
        if isinstance(g, Equality):
            return Equality(_sub_term(g.left, m), _sub_term(g.right, m))
        if isinstance(g, Comparison):
            return Comparison(g.op, _sub_term(g.left, m), _sub_term(g.right, m))
        if isinstance(g, Not):
            return Not(go(g.body, m))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p, m) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(go(g.left, m), go(g.right, m))
        if isinstance(g, (Exists, Forall)):
            inner = dict(m)
            names = []
            for v in g.vars:
                if v in taken:
                    nv = fresh(v)
                    inner[v] = Var(nv)
                else:
                    nv = v
                    inner.pop(v, None)
                taken.add(nv)
                names.append(nv)
            return type(g)(tuple(names), go(g.body, inner))
        raise TypeError(g)

    return go(f, {})


# ------------------------------------------------------------ printing

def _term(t):
    return str(t)


def show(f) -> str:
    """Fully parenthesized text rendering."""
    if isinstance(f, RelAtom):
        return f"{f.pred}({', '.join(map(_term, f.terms))})"
    if isinstance(f, Equality):
        return f"({_term(f.left)} = {_term(f.right)})"
    if isinstance(f, Comparison):
        return f"({_term(f.left)} {f.op} {_term(f.right)})"
    if isinstance(f, Not):
        return f"(not {show(f.body)})"
    if isinstance(f, And):
        return "true" if not f.parts else "(" + " and ".join(map(show, f.parts)) + ")"
    if isinstance(f, Or):
        return "false" if not f.parts else "(" + " or ".join(map(show, f.parts)) + ")"
    if isinstance(f, Exists):
        return f"(exists {', '.join(f.vars)}. {show(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {', '.join(f.vars)}. {show(f.body)})"
    if isinstance(f, Implies):
        return f"({show(f.left)} -> {show(f.right)})"
    raise TypeError(f)


def atom(pred, *names) -> RelAtom:
    """Shorthand: atom('r', 'X', 1) builds r(X, 1)."""
    return RelAtom(pred, tuple(Var(n) if isinstance(n, str) and n[:1].isupper() else
                               n if isinstance(n, (Var, Const)) else Const(n) for n in names))

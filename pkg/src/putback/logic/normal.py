"""Safe-range normal form, range-restricted variables, and RANF."""

from __future__ import annotations

from ..datalog.syntax import Const, Var
from .formula import (And, Comparison, Equality, Exists, Forall, Implies, Not, Or, RelAtom,
                      alpha_rename, conj, show)


class NormalizationError(Exception):
    pass


# ------------------------------------------------------------------ SRNF

def _srnf(f):
    if isinstance(f, (RelAtom, Equality, Comparison)):
        return f
    if isinstance(f, Forall):
        return _srnf(Not(Exists(f.vars, Not(f.body))))
    if isinstance(f, Implies):
        return _srnf(Or((Not(f.left), f.right)))
    if isinstance(f, Exists):
        return Exists(f.vars, _srnf(f.body))
    if isinstance(f, And):
        return _flat(And, [_srnf(p) for p in f.parts])
    if isinstance(f, Or):
        return _flat(Or, [_srnf(p) for p in f.parts])
    if isinstance(f, Not):
        g = f.body
        if isinstance(g, Not):
            return _srnf(g.body)
        if isinstance(g, And):
            return _srnf(Or(tuple(Not(p) for p in g.parts)))
        if isinstance(g, Or):
            return _srnf(And(tuple(Not(p) for p in g.parts)))
        if isinstance(g, Forall):
            return _srnf(Exists(g.vars, Not(g.body)))
        if isinstance(g, Implies):
            return _srnf(And((g.left, Not(g.right))))
        return Not(_srnf(g))
    raise TypeError(f)


def _flat(cls, parts):
    out = []
    for p in parts:
        out.extend(p.parts if isinstance(p, cls) and p.parts else (p,))
    return cls(tuple(out)) if len(out) != 1 else out[0]


def to_srnf(f):
    """No ∀, no →, no ¬¬, no ∧/∨ directly under ¬; bound variables renamed
    apart from free variables and from each other."""
    return alpha_rename(_srnf(f))


def is_srnf(f) -> bool:
    if isinstance(f, (Forall, Implies)):
        return False
    if isinstance(f, Not) and isinstance(f.body, (Not, And, Or, Forall, Implies)):
        return False
    if isinstance(f, (And, Or)):
        return all(is_srnf(p) for p in f.parts)
    if isinstance(f, (Not, Exists)):
        return is_srnf(f.body)
    return True


# ------------------------------------------------------------------ rr

BOT = None  # marker: some quantified variable is not range restricted


def rr(f):
    """Range-restricted variables of an SRNF formula, or BOT."""
    if isinstance(f, RelAtom):
        return frozenset(t.name for t in f.terms if isinstance(t, Var))
    if isinstance(f, Equality):
        l, r = f.left, f.right
        if isinstance(l, Var) and isinstance(r, Const):
            return frozenset({l.name})
        if isinstance(r, Var) and isinstance(l, Const):
            return frozenset({r.name})
        return frozenset()
    if isinstance(f, Comparison):
        return frozenset()
    if isinstance(f, Not):
        return BOT if rr(f.body) is BOT else frozenset()
    if isinstance(f, And):
        acc = set()
        var_eqs = []
        for p in f.parts:
            if isinstance(p, Equality) and isinstance(p.left, Var) and isinstance(p.right, Var):
                var_eqs.append((p.left.name, p.right.name))
                continue
            r = rr(p)
            if r is BOT:
                return BOT
            acc |= r
        changed = True
        while changed:
            changed = False
            for x, y in var_eqs:
                if (x in acc) != (y in acc):
                    acc |= {x, y}
                    changed = True
        return frozenset(acc)
    if isinstance(f, Or):
        acc = None
        for p in f.parts:
            r = rr(p)
            if r is BOT:
                return BOT
            acc = r if acc is None else acc & r
        return acc if acc is not None else frozenset()
    if isinstance(f, Exists):
        r = rr(f.body)
        if r is BOT or not set(f.vars) <= r:
            return BOT
        return r - set(f.vars)
    raise NormalizationError(f"rr requires SRNF input, got {show(f)}")


range_restricted_vars = rr


def is_safe_range(f) -> bool:
    g = to_srnf(f)
    r = rr(g)
    return r is not BOT and r == g.free


# ------------------------------------------------------------------ RANF

def _self_contained(f) -> bool:
    if isinstance(f, Or):
        r = rr(f)
        return r is not BOT and r == f.free and all(rr(p) == f.free for p in f.parts)
    if isinstance(f, Exists):
        return rr(f.body) == f.body.free
    if isinstance(f, Not) and isinstance(f.body, Exists):
        return rr(f.body.body) == f.body.body.free
    return True


def _ranf(f):
    if isinstance(f, (RelAtom, Equality, Comparison)):
        return f
    if isinstance(f, Or):
        if not _self_contained(f):
            raise NormalizationError(f"stuck at {show(f)}")
        return Or(tuple(_ranf(p) for p in f.parts))
    if isinstance(f, Exists):
        if not _self_contained(f):
            raise NormalizationError(f"stuck at {show(f)}")
        return Exists(f.vars, _ranf(f.body))
    if isinstance(f, Not):
        if isinstance(f.body, Exists) and not _self_contained(f):
            raise NormalizationError(f"stuck at {show(f)}")
        return Not(_ranf(f.body))
    if isinstance(f, And):
        return _ranf_and(list(f.parts))
    raise NormalizationError(f"not SRNF: {show(f)}")


def _pushed(xi, chosen):
    if isinstance(xi, Or):
        return Or(tuple(conj(d, *chosen) for d in xi.parts))
    if isinstance(xi, Exists):
        return Exists(xi.vars, conj(*chosen, xi.body))
    # ¬∃: copy the chosen conjuncts inside, keep them outside too
    inner = xi.body
    return Not(Exists(inner.vars, conj(*chosen, inner.body)))


def _ranf_and(parts):
    parts = list(_flat(And, parts).parts) if len(parts) > 1 else list(parts)
    progress = True
    while progress:
        progress = False
        for idx, xi in enumerate(parts):
            if _self_contained(xi):
                continue
            others = parts[:idx] + parts[idx + 1:]
            for k in range(1, len(others) + 1):
                new = _pushed(xi, others[:k])
                if _self_contained(new):
                    break
            else:
                raise NormalizationError(f"stuck at {show(xi)}")
            if isinstance(xi, Not):
                # the pushed conjuncts are copied, so they stay outside too
                parts = parts[:idx] + [new] + parts[idx + 1:]
            else:
                parts = [new] + others[k:]
            progress = True
            break
    out = [_ranf(p) for p in parts]
    return out[0] if len(out) == 1 else And(tuple(out))


def to_ranf(f):
    """Relational-algebra normal form of a safe-range formula."""
    g = to_srnf(f)
    r = rr(g)
    if r is BOT or r != g.free:
        raise NormalizationError(f"not safe-range: {show(f)}")
    return _ranf(g)


def is_ranf(f) -> bool:
    if isinstance(f, (RelAtom, Equality, Comparison)):
        return True
    if not _self_contained(f):
        return False
    if isinstance(f, (And, Or)):
        return all(is_ranf(p) for p in f.parts)
    if isinstance(f, (Not, Exists)):
        return is_ranf(f.body)
    return False

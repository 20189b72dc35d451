"""Datalog to first-order logic, and constant elimination in atoms."""

from __future__ import annotations

from ..datalog.syntax import Anon, Atom, Const, Eq, Kind, Neg, Pos, Program, Rule, Var
from .formula import (BOTTOM, Comparison, Equality, Fresh, Not, RelAtom, conj, disj, exists)

_DELTAS = (Kind.DELTA_INSERT, Kind.DELTA_DELETE)


def program_var_names(p: Program) -> set:
    names = set()
    for r in p.rules:
        names.update(r.variables())
    return names


def _literal_formula(p, lit, sub, fresh, existentials, seen):
    def term(t):
        if isinstance(t, Var):
            return sub[t.name]
        return t

    if isinstance(lit, (Pos, Neg)):
        args = []
        inner = []
        for t in lit.atom.args:
            if isinstance(t, Anon):
                v = fresh("A")
                args.append(Var(v))
                inner.append(v)
            else:
                args.append(term(t))
        body = _phi(p, lit.atom.pred, tuple(args), fresh, seen)
        if isinstance(lit, Pos):
            existentials.extend(inner)
            return body
        return Not(exists(inner, body))
    left, right = term(lit.left), term(lit.right)
    if isinstance(lit, Eq):
        f = Equality(left, right)
    else:
        f = Comparison(lit.op, left, right)
    return Not(f) if lit.negated else f


def _phi(p, pred, terms, fresh, seen):
    rules = p.rules_for(pred)
    if not rules:
        if p.kind(pred) in _DELTAS:
            return BOTTOM
        return RelAtom(pred, tuple(terms))
    if pred in seen:
        raise ValueError(f"recursive predicate {pred}")
    seen = seen | {pred}
    out = []
    for rule in rules:
        out.append(rule_formula(p, rule, terms, fresh, seen))
    return disj(*out)


def rule_formula(p, rule: Rule, terms=(), fresh=None, seen=frozenset()):
    """Formula for one rule with its head applied to `terms` (for a
    constraint, the existential closure of its body)."""
    fresh = fresh or Fresh(program_var_names(p))
    sub = {}
    eqs = []
    head_args = rule.head.args if rule.head is not None else ()
    for h, t in zip(head_args, terms):
        if isinstance(h, Const):
            eqs.append(Equality(t, h))
        elif h.name in sub:
            eqs.append(Equality(t, sub[h.name]))
        else:
            sub[h.name] = t
    existentials = []
    for v in rule.variables():
        if v not in sub:
            nv = fresh(v)
            sub[v] = Var(nv)
            existentials.append(nv)
    parts = [_literal_formula(p, lit, sub, fresh, existentials, seen) for lit in rule.body]
    return exists(existentials, conj(*eqs, *parts))


def datalog_to_fo(p: Program, pred: str, fresh: Fresh | None = None, names=None):
    """φ_pred with free variables X1..Xk (or `names`)."""
    if pred not in p.predicates() and p.declared(pred) is None:
        raise KeyError(f"predicate {pred} not in program")
    k = p.arity(pred)
    names = list(names) if names is not None else [f"X{i + 1}" for i in range(k)]
    fresh = fresh or Fresh(program_var_names(p) | set(names))
    fresh.reserve(names)
    return _phi(p, pred, tuple(Var(n) for n in names), fresh, frozenset())


def eliminate_atom_constants(rule: Rule) -> Rule:
    """Replace every constant in an atom by a fresh variable plus X=c."""
    used = set(rule.variables())
    counter = [0]
    eqs = []

    def fresh():
        while True:
            counter[0] += 1
            name = f"X{counter[0]}"
            if name not in used:
                used.add(name)
                return name

    def fix(atom):
        args = []
        for t in atom.args:
            if isinstance(t, Const):
                v = Var(fresh())
                eqs.append(Eq(v, t))
                args.append(v)
            else:
                args.append(t)
        return Atom(atom.pred, tuple(args))

    head = fix(rule.head) if rule.head is not None else None
    body = [type(l)(fix(l.atom)) if isinstance(l, (Pos, Neg)) else l for l in rule.body]
    return Rule(head, tuple(body) + tuple(eqs), rule.line)

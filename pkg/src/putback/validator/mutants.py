"""Systematic mutations of a putback program, for checking that the
validator rejects broken strategies."""

from __future__ import annotations

from dataclasses import replace

from ..datalog.syntax import Cmp, Eq, Kind, Neg, Pos, Rule


def _drop_first(p, kind):
    for i, r in enumerate(p.rules):
        if r.head is not None and p.kind(r.head.pred) == kind:
            return p.with_rules(p.rules[:i] + p.rules[i + 1:])
    return None


def _flip_first_negation(p):
    for i, r in enumerate(p.rules):
        if r.head is None:
            continue
        for j, lit in enumerate(r.body):
            if isinstance(lit, Neg):
                new = Pos(lit.atom)
            elif isinstance(lit, (Eq, Cmp)) and lit.negated:
                new = replace(lit, negated=False)
            else:
                continue
            body = r.body[:j] + (new,) + r.body[j + 1:]
            return p.with_rules(p.rules[:i] + (Rule(r.head, body, r.line),) + p.rules[i + 1:])
    return None


def mutants(p):
    """[(label, program)] for: drop the first insertion rule, drop the
    first deletion rule, flip the first negated body literal. Mutations
    that do not apply are left out."""
    out = []
    for label, m in (("drop-insertion", _drop_first(p, Kind.DELTA_INSERT)),
                     ("drop-deletion", _drop_first(p, Kind.DELTA_DELETE)),
                     ("flip-negation", _flip_first_negation(p))):
        if m is not None:
            out.append((label, m))
    return out

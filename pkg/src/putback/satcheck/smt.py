"""SMT-LIB 2 export of a satisfiability problem.

Integers use the native Int sort and order. Strings and dates become
uninterpreted sorts; their constants are pairwise distinct, and comparisons
against constants go through the abstract lt_/gt_ predicates tied down by
the comparison axiomatization. The encoded problem uses the solver's
natural semantics, which agrees with active-domain evaluation for the
domain-independent sentences produced by the validator."""

from __future__ import annotations

import re

from ..datalog.syntax import Const, Schema, Var, type_of
from ..logic.formula import (And, Comparison, Equality, Exists, Forall, Implies, Not, Or,
                             RelAtom, alpha_rename, constants, predicates, subformulas)
from ..logic.gnfo import abstract_comparisons, axiomatize_comparisons, gt_pred, lt_pred
from ..logic.oracle import infer_sorts


class UnsupportedConstruct(ValueError):
    pass


SORT_NAMES = {"int": "Int", "string": "Str", "date": "Date"}
_SIMPLE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def _sym(name):
    return name if _SIMPLE.match(name) else "|" + name.replace("|", "_") + "|"


class _Printer:
    def __init__(self, const_names, sorts):
        self.const_names = const_names
        self.sorts = sorts

    def term(self, t):
        if isinstance(t, Var):
            return _sym(t.name)
        v = t.value
        if type_of(v) == "int":
            return str(v) if v >= 0 else f"(- {-v})"
        return self.const_names[(type_of(v), v)]

    def sort_of(self, name):
        t = self.sorts.get(name)
        if t is None:
            raise UnsupportedConstruct(f"cannot determine the type of variable {name}")
        return SORT_NAMES[t]

    def show(self, f):
        if isinstance(f, RelAtom):
            if not f.terms:
                return _sym(f.pred)
            return f"({_sym(f.pred)} {' '.join(self.term(t) for t in f.terms)})"
        if isinstance(f, Equality):
            return f"(= {self.term(f.left)} {self.term(f.right)})"
        if isinstance(f, Comparison):
            return f"({f.op} {self.term(f.left)} {self.term(f.right)})"
        if isinstance(f, Not):
            return f"(not {self.show(f.body)})"
        if isinstance(f, And):
            if not f.parts:
                return "true"
            if len(f.parts) == 1:
                return self.show(f.parts[0])
            return "(and " + " ".join(self.show(p) for p in f.parts) + ")"
        if isinstance(f, Or):
            if not f.parts:
                return "false"
            if len(f.parts) == 1:
                return self.show(f.parts[0])
            return "(or " + " ".join(self.show(p) for p in f.parts) + ")"
        if isinstance(f, Implies):
            return f"(=> {self.show(f.left)} {self.show(f.right)})"
        if isinstance(f, (Exists, Forall)):
            q = "exists" if isinstance(f, Exists) else "forall"
            bound = " ".join(f"({_sym(v)} {self.sort_of(v)})" for v in f.vars)
            return f"({q} ({bound}) {self.show(f.body)})"
        raise TypeError(f)


def export_solver(sentence, constraints, schema: Schema, check_name=None) -> str:
    """SMT-LIB 2 script asserting `sentence` and the negation of every
    constraint sentence. Output is deterministic."""
    constraints = list(constraints or ())
    if sentence.free:
        raise ValueError("sentence must be closed")
    rels = list(schema.sources) + ([schema.view] if schema.view is not None else [])
    signature = {r.name: r.types for r in rels}
    # sorts are inferred per variable name, so bound names must be distinct
    formulas = [alpha_rename(f) for f in [sentence] + constraints]
    for f in formulas:
        for p in predicates(f):
            if p not in signature:
                raise UnsupportedConstruct(f"predicate {p} is not in the schema")
    sort_maps = [infer_sorts(f, signature.get) for f in formulas]

    values = set()
    for f in formulas:
        values |= constants(f)
    by_sort = {}
    for v in values:
        by_sort.setdefault(type_of(v), []).append(v)
    for t in by_sort:
        by_sort[t].sort()
    abstract = [t for t in ("string", "date") if t in by_sort or
                any(t in types for types in signature.values())]

    # comparisons on abstract sorts go through the abstract predicates
    compared = set()
    rewritten = []
    for f, sorts in zip(formulas, sort_maps):
        for g in subformulas(f):
            if isinstance(g, Comparison):
                sides = [g.left, g.right]
                vals = [s for s in sides if isinstance(s, Const)]
                typ = type_of(vals[0].value) if vals else sorts.get(
                    next(s.name for s in sides if isinstance(s, Var)))
                if typ in ("string", "date"):
                    if len(vals) != 1:
                        raise UnsupportedConstruct(
                            f"comparison between two {typ} variables has no abstraction")
                    compared.add(typ)
        rewritten.append(abstract_comparisons(f, {t: by_sort.get(t, []) for t in compared},
                                              sorts) if compared else f)

    const_names = {}
    lines = []
    if check_name:
        lines.append(f"; check: {check_name}")
    lines.append("(set-logic ALL)")
    for t in abstract:
        lines.append(f"(declare-sort {SORT_NAMES[t]} 0)")
    for t in abstract:
        for i, v in enumerate(by_sort.get(t, []), 1):
            name = f"{t[:3]}_{i}"
            const_names[(t, v)] = name
            shown = v.isoformat() if t == "date" else v
            lines.append(f"(declare-const {name} {SORT_NAMES[t]}) ; {shown!r}")
        names = [const_names[(t, v)] for v in by_sort.get(t, [])]
        if len(names) > 1:
            lines.append(f"(assert (distinct {' '.join(names)}))")
    for name in sorted(signature):
        args = " ".join(SORT_NAMES[t] for t in signature[name])
        lines.append(f"(declare-fun {_sym(name)} ({args}) Bool)")
    for t in sorted(compared):
        for j in range(1, len(by_sort[t]) + 1):
            for pred in (lt_pred(t, j), gt_pred(t, j)):
                lines.append(f"(declare-fun {pred} ({SORT_NAMES[t]}) Bool)")
    for t in sorted(compared):
        ax = axiomatize_comparisons(by_sort[t], t)
        pr = _Printer(const_names, {"X": t})
        lines.append(f"; order of {t} values relative to the constants")
        lines.append(f"(assert {pr.show(ax)})")
    lines.append("; sentence")
    lines.append(f"(assert {_Printer(const_names, sort_maps[0]).show(rewritten[0])})")
    for i, (c, sorts) in enumerate(zip(rewritten[1:], sort_maps[1:]), 1):
        lines.append(f"; constraint {i}")
        lines.append(f"(assert (not {_Printer(const_names, sorts).show(c)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"

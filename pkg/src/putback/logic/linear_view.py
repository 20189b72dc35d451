"""Linear-view form of delta formulas, and the GetPut / PutGet sentences."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..datalog.syntax import Const, Program, Var
from .formula import (BOTTOM, And, Equality, Exists, Fresh, Not, Or, RelAtom, all_var_names,
                      alpha_rename, conj, disj, exists, predicates, show, substitute)
from .normal import to_srnf
from .translate import datalog_to_fo, program_var_names, rule_formula


class LinearViewError(ValueError):
    pass


@dataclass(frozen=True)
class ViewGroup:
    """exists `exvars`. (v(V1..Vk) or not v(V1..Vk)) and body."""
    exvars: tuple
    body: object

    def __str__(self):
        return f"[{', '.join(self.exvars)}] {show(self.body)}"


@dataclass
class LinearViewForm:
    view: str
    vars: tuple  # V1..Vk
    positive: list = field(default_factory=list)
    negative: list = field(default_factory=list)
    residual: list = field(default_factory=list)

    def group_formula(self, group, positive):
        vs = tuple(Var(v) for v in self.vars)
        a = RelAtom(self.view, vs)
        return exists(self.vars, conj(a if positive else Not(a), group.body))

    def reassemble(self):
        """The (closed) formula this form stands for."""
        parts = [self.group_formula(g, True) for g in self.positive]
        parts += [self.group_formula(g, False) for g in self.negative]
        return disj(*parts, *self.residual)


def _mentions(f, view):
    return view in predicates(f)


def _dnf(f, view):
    """List of (existential vars, conjunct list); Or/Exists/And are
    distributed only where the view occurs."""
    if not _mentions(f, view):
        return [((), [f])]
    if isinstance(f, RelAtom):
        return [((), [f])]
    if isinstance(f, Not):
        if isinstance(f.body, RelAtom):
            return [((), [f])]
        raise LinearViewError(f"view {view} occurs under a complex negation (projection): {show(f)}")
    if isinstance(f, Exists):
        return [(f.vars + ex, lits) for ex, lits in _dnf(f.body, view)]
    if isinstance(f, Or):
        out = []
        for p in f.parts:
            out.extend(_dnf(p, view))
        return out
    if isinstance(f, And):
        options = [_dnf(p, view) for p in f.parts]
        out = []
        for combo in itertools.product(*options):
            ex = tuple(v for e, _ in combo for v in e)
            lits = [l for _, ls in combo for l in ls]
            out.append((ex, lits))
        return out
    raise LinearViewError(f"unexpected connective over the view: {show(f)}")


def to_linear_view_form(f, view: str, arity: int, fresh: Fresh | None = None) -> LinearViewForm:
    """Regroup the existential closure of `f` into
    OR exists V (v(V) and pos(V)) OR exists V (not v(V) and neg(V)) OR residual."""
    vnames = tuple(f"V{i + 1}" for i in range(arity))
    g = to_srnf(exists(sorted(f.free), f))
    g = alpha_rename(g, avoid=vnames)
    form = LinearViewForm(view, vnames)
    for ex, lits in _dnf(g, view):
        occ = [l for l in lits if (isinstance(l, RelAtom) and l.pred == view) or
               (isinstance(l, Not) and isinstance(l.body, RelAtom) and l.body.pred == view)]
        if not occ:
            form.residual.append(exists(ex, conj(*lits)))
            continue
        if len(occ) > 1:
            raise LinearViewError(f"view {view} occurs more than once (self-join): "
                                  + " and ".join(show(o) for o in occ))
        lit = occ[0]
        vatom = lit if isinstance(lit, RelAtom) else lit.body
        others = [l for l in lits if l is not lit]
        mapping, eqs = {}, []
        for vi, t in zip(vnames, vatom.terms):
            if isinstance(t, Const):
                eqs.append(Equality(Var(vi), t))
            elif t.name in mapping:
                eqs.append(Equality(Var(vi), mapping[t.name]))
            elif t.name in ex:
                mapping[t.name] = Var(vi)
            else:
                raise LinearViewError(f"free variable {t.name} in view atom")
        rest = tuple(v for v in ex if v not in mapping)
        body = substitute(conj(*others), mapping) if others else conj()
        group = ViewGroup(rest, exists(rest, conj(*eqs, body)))
        (form.positive if isinstance(lit, RelAtom) else form.negative).append(group)
    return form


# ------------------------------------------------------------ decomposition

@dataclass
class GetPutDecomposition:
    view: str
    vars: tuple
    phi1: object  # upper bound: v and phi1 must be empty
    phi2: object  # lower bound: the derived get
    phi3: object  # view-independent residual; must be unsatisfiable
    forms: dict = field(default_factory=dict)  # name -> LinearViewForm

    def coexist_sentence(self, guard: str):
        """exists V. guard(V) and phi1(V) and phi2(V)."""
        vs = tuple(Var(v) for v in self.vars)
        return exists(self.vars, conj(RelAtom(guard, vs), self.phi1, self.phi2))


def delta_sentences(putdelta: Program, fresh=None) -> dict:
    """name -> closed formula for each source: exists X. phi-r(X) and r(X),
    exists X. phi+r(X) and not r(X)."""
    fresh = fresh or Fresh(program_var_names(putdelta))
    out = {}
    for rel in putdelta.schema.sources:
        xs = [f"X{i + 1}" for i in range(rel.arity)]
        fresh.reserve(xs)
        a = RelAtom(rel.name, tuple(Var(x) for x in xs))
        for sign, guard in (("-", a), ("+", Not(a))):
            name = sign + rel.name
            if not putdelta.defines(name):
                continue
            phi = datalog_to_fo(putdelta, name, fresh, xs)
            out[name] = exists(xs, conj(phi, guard))
    return out


def constraint_sentences(p: Program, fresh=None) -> list:
    fresh = fresh or Fresh(program_var_names(p))
    return [rule_formula(p, r, (), fresh) for r in p.constraints]


def build_getput_decomposition(putdelta: Program, constraints=None) -> GetPutDecomposition:
    """Regroup every delta sentence (and every constraint body that mentions
    the view) into linear-view form and collect the bounds on the view."""
    view = putdelta.view.name
    k = putdelta.view.arity
    fresh = Fresh(program_var_names(putdelta))
    sentences = delta_sentences(putdelta, fresh)
    if constraints is None:
        constraints = constraint_sentences(putdelta, fresh)
    for i, c in enumerate(constraints):
        if _mentions(c, view):
            sentences[f"constraint{i + 1}"] = c
    pos, negs, res = [], [], []
    forms = {}
    for name, s in sentences.items():
        form = to_linear_view_form(s, view, k)
        forms[name] = form
        pos += [g.body for g in form.positive]
        negs += [g.body for g in form.negative]
        res += form.residual
    vnames = tuple(f"V{i + 1}" for i in range(k))
    return GetPutDecomposition(view, vnames, disj(*pos) if pos else BOTTOM,
                               disj(*negs) if negs else BOTTOM,
                               disj(*res) if res else BOTTOM, forms)


def build_putget_sentences(putget: Program, view_new: str, view: str):
    """(Phi1, Phi2): get(put(S,V)) has a tuple outside V / misses a tuple of V."""
    k = putget.arity(view_new) if putget.defines(view_new) else putget.declared(view).arity
    vnames = [f"V{i + 1}" for i in range(k)]
    vs = tuple(Var(v) for v in vnames)
    if putget.defines(view_new):
        phi = datalog_to_fo(putget, view_new, names=vnames)
    else:
        phi = BOTTOM
    a = RelAtom(view, vs)
    return exists(vnames, conj(phi, Not(a))), exists(vnames, conj(a, Not(phi) if phi != BOTTOM else conj()))


def view_free(f, view) -> bool:
    return not _mentions(f, view)


def inline_view(f, view: str, definition, names):
    """Replace every atom view(t1..tk) by `definition` with names[i] := ti."""
    fresh = Fresh(set(names) | all_var_names(f) | all_var_names(definition))

    def go(g):
        if isinstance(g, RelAtom):
            if g.pred != view:
                return g
            return substitute(definition, dict(zip(names, g.terms)), fresh)
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p) for p in g.parts))
        if isinstance(g, Exists):
            return Exists(g.vars, go(g.body))
        return g

    return go(alpha_rename(f, fresh, avoid=names))

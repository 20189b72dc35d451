"""Static analyses: safety, stratification, linear view, guarded negation."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .syntax import (Anon, Cmp, Const, Eq, Kind, Neg, Pos, Program, ProgramError,
                     Var, is_builtin, literal_vars)


@dataclass(frozen=True)
class Violation:
    rule_index: int
    message: str
    line: int | None = None

    def __str__(self):
        where = f"line {self.line}: " if self.line is not None else f"rule {self.rule_index + 1}: "
        return where + self.message


def bound_vars(body) -> set:
    """Variables limited by the body: positive atoms, X=c, and X=Y chains."""
    bound = set()
    for lit in body:
        if isinstance(lit, Pos):
            bound.update(lit.atom.vars)
    changed = True
    while changed:
        changed = False
        for lit in body:
            if isinstance(lit, Eq) and not lit.negated:
                for a, b in ((lit.left, lit.right), (lit.right, lit.left)):
                    if isinstance(a, Var) and a.name not in bound and (
                            isinstance(b, Const) or (isinstance(b, Var) and b.name in bound)):
                        bound.add(a.name)
                        changed = True
    return bound


def check_safety(p: Program) -> list:
    out = []
    for i, rule in enumerate(p.rules):
        bound = bound_vars(rule.body)
        if rule.head is not None:
            for v in dict.fromkeys(rule.head.vars):
                if v not in bound:
                    out.append(Violation(i, f"{v} unbound in head", rule.line))
        for lit in rule.body:
            if isinstance(lit, Pos):
                continue
            for v in dict.fromkeys(literal_vars(lit)):
                if v not in bound:
                    where = "only under negation" if isinstance(lit, Neg) else f"unbound in built-in {lit}"
                    out.append(Violation(i, f"{v} {where}", rule.line))
    return out


def dependencies(p: Program) -> dict:
    """IDB predicate -> {body predicate: negated?} over IDB body predicates."""
    idb = set(p.idb())
    deps = {name: {} for name in idb}
    for rule in p.proper_rules:
        d = deps[rule.head.pred]
        for lit in rule.body:
            if isinstance(lit, (Pos, Neg)) and lit.atom.pred in idb:
                d[lit.atom.pred] = d.get(lit.atom.pred, False) or isinstance(lit, Neg)
    return deps


def _find_cycle(deps):
    state = {}
    stack = []

    def visit(n):
        state[n] = 1
        stack.append(n)
        for m in sorted(deps[n]):
            if state.get(m) == 1:
                return stack[stack.index(m):] + [m]
            if m not in state:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        state[n] = 2
        return None

    for n in sorted(deps):
        if n not in state:
            found = visit(n)
            if found:
                return found
    return None


def stratify(p: Program) -> list:
    """Ordered predicate groups; EDB predicates sit below stratum 0."""
    deps = dependencies(p)
    cycle = _find_cycle(deps)
    if cycle:
        raise ProgramError("recursion detected: " + " -> ".join(cycle))
    level = {}

    def stratum(n):
        if n not in level:
            s = 0
            for m, negated in deps[n].items():
                s = max(s, stratum(m) + (1 if negated else 0))
            for rule in p.rules_for(n):
                for lit in rule.body:
                    if isinstance(lit, Neg) and lit.atom.pred not in deps:
                        s = max(s, 1)
            level[n] = s
        return level[n]

    for n in deps:
        stratum(n)
    groups = {}
    for n, s in level.items():
        groups.setdefault(s, []).append(n)
    return [sorted(groups[s]) for s in sorted(groups)]


def evaluation_order(p: Program) -> list:
    """Topological order of IDB predicates (stratum, then name tie-break)."""
    deps = dependencies(p)
    strata = {n: i for i, group in enumerate(stratify(p)) for n in group}
    users = {n: [] for n in deps}
    missing = {n: len(deps[n]) for n in deps}
    for n, d in deps.items():
        for m in d:
            users[m].append(n)
    heap = [(strata[n], n) for n in deps if missing[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, n = heapq.heappop(heap)
        order.append(n)
        for u in users[n]:
            missing[u] -= 1
            if missing[u] == 0:
                heapq.heappush(heap, (strata[u], u))
    return order


def check_stratification(p: Program, groups: list) -> bool:
    """Direct scan of the stratification invariant."""
    where = {n: i for i, g in enumerate(groups) for n in g}
    if set(where) != set(p.idb()):
        return False
    for rule in p.proper_rules:
        s = where[rule.head.pred]
        for lit in rule.body:
            if isinstance(lit, (Pos, Neg)) and lit.atom.pred in where:
                t = where[lit.atom.pred]
                if t > s or (isinstance(lit, Neg) and t == s):
                    return False
    return True


def _is_delta_head(p: Program, rule) -> bool:
    return rule.head is not None and p.kind(rule.head.pred) in (Kind.DELTA_INSERT, Kind.DELTA_DELETE)


def check_linear_view(p: Program) -> list:
    out = []
    view = p.view.name if p.view is not None else None
    if view is None:
        return out
    for i, rule in enumerate(p.rules):
        occurrences = [lit for lit in rule.body
                       if isinstance(lit, (Pos, Neg)) and lit.atom.pred == view]
        if not occurrences:
            continue
        if not (rule.head is None or _is_delta_head(p, rule)):
            out.append(Violation(i, f"view {view} used outside delta or constraint rules", rule.line))
        if len(occurrences) > 1:
            out.append(Violation(i, f"view {view} occurs {len(occurrences)} times (self-join)", rule.line))
        for lit in occurrences:
            if any(isinstance(t, Anon) for t in lit.atom.args):
                out.append(Violation(i, f"anonymous variable in view atom {lit.atom} (projection)", rule.line))
    return out


def check_guarded_negation(p: Program) -> list:
    out = []
    for i, rule in enumerate(p.rules):
        atoms = [set(lit.atom.vars) for lit in rule.body if isinstance(lit, Pos)]
        consts = {lit.left.name for lit in rule.body
                  if isinstance(lit, Eq) and not lit.negated and isinstance(lit.left, Var) and isinstance(lit.right, Const)}
        consts |= {lit.right.name for lit in rule.body
                   if isinstance(lit, Eq) and not lit.negated and isinstance(lit.right, Var) and isinstance(lit.left, Const)}

        def guarded(vs):
            need = set(vs) - consts
            return not need or any(need <= a for a in atoms)

        if rule.head is not None and not guarded(rule.head.vars):
            out.append(Violation(i, f"head {rule.head} has no guard", rule.line))
        for lit in rule.body:
            negated = isinstance(lit, Neg) or (is_builtin(lit) and lit.negated)
            if negated and not guarded(literal_vars(lit)):
                out.append(Violation(i, f"negated literal {lit} has no guard", rule.line))
    return out


def check_comparisons(p: Program) -> list:
    out = []
    for i, rule in enumerate(p.rules):
        for lit in rule.body:
            if isinstance(lit, Cmp):
                kinds = {type(lit.left), type(lit.right)}
                if kinds != {Var, Const}:
                    out.append(Violation(i, f"comparison {lit} is not of the form X<c or X>c", rule.line))
    return out


def check_putback_program(p: Program) -> list:
    """Shape of a putback program: sources and the view are never derived,
    rules are safe and there is no recursion."""
    out = []
    if p.view is None:
        out.append(Violation(0, "no view declared"))
    for i, rule in enumerate(p.rules):
        if rule.head is None:
            continue
        kind = p.kind(rule.head.pred)
        if kind in (Kind.SOURCE, Kind.VIEW):
            out.append(Violation(i, f"{rule.head.pred} is a {kind.value} and cannot head a rule", rule.line))
    if out:
        return out
    out.extend(check_safety(p))
    try:
        stratify(p)
    except ProgramError as e:
        out.append(Violation(0, str(e)))
    return out


@dataclass(frozen=True)
class LvgnVerdict:
    ok: bool
    reasons: tuple

    def __bool__(self):
        return self.ok


def is_lvgn(p: Program) -> LvgnVerdict:
    reasons = []
    try:
        stratify(p)
    except ProgramError as e:
        reasons.append(e.message)
    for check in (check_safety, check_guarded_negation, check_linear_view, check_comparisons):
        reasons.extend(str(v) for v in check(p))
    return LvgnVerdict(not reasons, tuple(reasons))

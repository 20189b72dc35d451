"""Random databases and view updates, and randomized round-trip testing."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ..datalog.syntax import Cmp, Const, Eq, Pos, Neg, type_of
from ..satcheck.bounded import fresh_values
from .database import ContradictoryDelta, Database, DeltaSet, apply_delta
from .put import ConstraintViolation, get, put


def program_constants(*programs) -> dict:
    """Constants of the programs, grouped by type."""
    out = {}
    for p in programs:
        for r in p.rules:
            terms = list(r.head.args) if r.head is not None else []
            for lit in r.body:
                if isinstance(lit, (Pos, Neg)):
                    terms.extend(lit.atom.args)
                elif isinstance(lit, (Eq, Cmp)):
                    terms.extend((lit.left, lit.right))
            for t in terms:
                if isinstance(t, Const):
                    out.setdefault(type_of(t.value), set()).add(t.value)
    return {k: sorted(v) for k, v in out.items()}


def value_pools(programs, size=3, types=("int", "string", "date")) -> dict:
    """Per type: the program constants followed by `size` fresh values."""
    consts = program_constants(*programs)
    return {t: consts.get(t, []) + fresh_values(t, consts.get(t, []), size) for t in types}


def all_tuples(rel, pools):
    return list(itertools.product(*(pools[t] for t in rel.types)))


def random_relation(rel, rng: random.Random, pools, max_tuples=4):
    universe = all_tuples(rel, pools)
    k = rng.randint(0, min(max_tuples, len(universe)))
    return rng.sample(universe, k)


def random_database(relations, rng: random.Random, pools, max_tuples=4) -> Database:
    return Database({r.name: random_relation(r, rng, pools, max_tuples) for r in relations})


def random_view_update(v: Database, view, rng: random.Random, pools, max_changes=3) -> DeltaSet:
    """Non-contradictory delta on the view: inserts of absent tuples and
    deletes of present ones."""
    present = sorted(v[view.name], key=repr)
    absent = [t for t in all_tuples(view, pools) if t not in v[view.name]]
    n_del = rng.randint(0, min(max_changes, len(present)))
    n_ins = rng.randint(0, min(max_changes, len(absent)))
    return DeltaSet({view.name: rng.sample(absent, n_ins)},
                    {view.name: rng.sample(present, n_del)})


@dataclass
class Failure:
    law: str
    source: Database
    view: Database
    detail: str


@dataclass
class RoundTrip:
    trials: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def getput_violation(p, get_program, s):
    """Why put(S, get(S)) != S, or None. Raises ConstraintViolation when
    the constraints reject (S, get(S))."""
    v = get(get_program, s)
    try:
        back = put(p, s, v)
    except ContradictoryDelta as e:
        return str(e)
    if back != s:
        return f"put(S, get(S)) = {back!r}"
    return None


def putget_violation(p, get_program, s, v2):
    """Why get(put(S, V')) != V', or None. Raises ConstraintViolation when
    the constraints reject (S, V')."""
    try:
        s2 = put(p, s, v2)
    except ContradictoryDelta as e:
        return str(e)
    got = get(get_program, s2)
    if got != v2:
        return f"get(put(S, V')) = {got!r}"
    return None


def _facts(d: Database):
    return [(n, t) for n, ts in d.items() for t in ts]


def _drop(d: Database, fact):
    n, t = fact
    return d.replace(n, d[n] - {t})


def minimize(failure: Failure, p, get_program) -> Failure:
    """Greedily remove source and view tuples while the law still fails."""
    def check(s, v):
        try:
            if failure.law == "GetPut":
                return getput_violation(p, get_program, s)
            return putget_violation(p, get_program, s, v)
        except ConstraintViolation:
            return None

    s, v, detail = failure.source, failure.view, failure.detail
    shrinking = True
    while shrinking:
        shrinking = False
        candidates = [("s", f) for f in _facts(s)]
        if failure.law == "PutGet":
            candidates += [("v", f) for f in _facts(v)]
        for where, fact in candidates:
            s2, v2 = (_drop(s, fact), v) if where == "s" else (s, _drop(v, fact))
            why = check(s2, v2)
            if why is not None:
                s, v, detail = s2, v2, why
                shrinking = True
                break
    if failure.law == "GetPut":
        v = get(get_program, s)
    return Failure(failure.law, s, v, detail)


def roundtrip(p, get_program, trials=500, seed=0, size=3, max_tuples=4, retries=20) -> RoundTrip:
    """Check put(S, get(S)) = S and get(put(S, V')) = V' on random sources
    and view updates. A trial whose view updates keep being rejected by the
    constraints is skipped."""
    rng = random.Random(seed)
    pools = value_pools([p, get_program], size)
    view = p.schema.view
    out = RoundTrip()
    for _ in range(trials):
        out.trials += 1
        s = random_database(p.schema.sources, rng, pools, max_tuples)
        v = get(get_program, s)
        try:
            why = getput_violation(p, get_program, s)
        except ConstraintViolation:
            out.skipped += 1
            continue
        if why is not None:
            out.failures.append(Failure("GetPut", s, v, why))
            continue
        for _ in range(retries):
            v2 = apply_delta(v, random_view_update(v, view, rng, pools))
            try:
                why = putget_violation(p, get_program, s, v2)
                break
            except ConstraintViolation:
                continue
        else:
            out.skipped += 1
            continue
        if why is not None:
            out.failures.append(Failure("PutGet", s, v2, why))
    return out

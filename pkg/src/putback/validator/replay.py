"""Turn a satisfiability witness back into a concrete law violation."""

from __future__ import annotations

from dataclasses import dataclass

from ..engine.database import ContradictoryDelta, Database
from ..engine.put import ConstraintViolation, get, put, putdelta


@dataclass
class Replay:
    law: str
    violated: bool
    detail: str

    def __bool__(self):
        return self.violated


def _split(p, witness: Database):
    view = p.view.name
    s = witness.restrict(p.schema.source_names)
    v = witness.restrict([view])
    return s, v


def _put_differs(p, s, v):
    """put(S, V) != S, or put refuses (S, V)."""
    try:
        out = put(p, s, v)
    except (ConstraintViolation, ContradictoryDelta) as e:
        return True, f"put raises: {e}"
    if out != s:
        return True, f"put(S, V) = {out!r} differs from S = {s!r}"
    return False, "put(S, V) = S"


def _guard_tuples(p, witness):
    names = [n for n in witness.names() if n not in p.schema.source_names and n != p.view.name]
    return [t for n in names for t in witness[n]]


def replay_counterexample(check_name: str, witness: Database, p, get_program=None) -> Replay:
    """Replay the witness of a failed check with the engine."""
    s, v = _split(p, witness)
    view = p.view.name
    if check_name.startswith("well-defined"):
        try:
            delta = putdelta(p, s, v)
        except ConstraintViolation as e:
            return Replay("well-definedness", False, f"constraints reject the witness: {e}")
        clashes = delta.clashes()
        return Replay("well-definedness", bool(clashes),
                      f"contradictory delta on {clashes}" if clashes else "delta is consistent")
    if check_name.startswith("putget"):
        try:
            s2 = put(p, s, v)
        except (ConstraintViolation, ContradictoryDelta) as e:
            return Replay("PutGet", False, f"put raises: {e}")
        v2 = get(get_program, s2)
        return Replay("PutGet", v2 != v, f"S={s!r} V={v!r}: get(put(S,V)) = {v2!r}")
    if check_name.startswith("getput-expected"):
        v0 = get(get_program, s)
        bad, why = _put_differs(p, s, v0)
        return Replay("GetPut", bad, f"S={s!r} get(S)={v0!r}: {why}")
    if check_name == "getput:no-steady-state":
        bad, why = _put_differs(p, s, v)
        return Replay("GetPut", bad, f"S={s!r} V={v!r}: {why}")
    if check_name == "getput:no-view-exists":
        results = []
        for y in _guard_tuples(p, witness):
            with_y = v.replace(view, v[view] | {y})
            without_y = v.replace(view, v[view] - {y})
            a, why_a = _put_differs(p, s, with_y)
            b, why_b = _put_differs(p, s, without_y)
            results.append((a and b, f"tuple {y}: with it {why_a}; without it {why_b}"))
        ok = bool(results) and all(r for r, _ in results)
        return Replay("GetPut", ok, "; ".join(d for _, d in results) or "no guard tuple")
    raise ValueError(f"unknown check {check_name}")

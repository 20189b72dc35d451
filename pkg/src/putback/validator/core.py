"""Validation of a putback program: well-definedness, existence of a get
satisfying GetPut (checked for an expected get or derived), and PutGet."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

from ..datalog.printer import format_program
from ..datalog.syntax import Program, Relation
from ..engine.put import build_putget_program
from ..logic.formula import Fresh, conj, exists, predicates, show
from ..logic.linear_view import (build_getput_decomposition, build_putget_sentences,
                                 constraint_sentences, delta_sentences, inline_view)
from ..logic.normal import to_ranf
from ..logic.ranf_datalog import ranf_to_datalog
from ..logic.translate import datalog_to_fo, program_var_names
from ..satcheck import (BoundParams, Satisfiable, Timeout, bounded_sat_under_constraints)

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"


@dataclass
class Check:
    """One discharged satisfiability question. The check passes when the
    sentence is unsatisfiable under the assumed constraints."""
    name: str
    sentence: object
    assumptions: tuple
    schema: object
    verdict: object = None

    @property
    def status(self):
        if isinstance(self.verdict, Satisfiable):
            return FAILS
        if isinstance(self.verdict, Timeout) or self.verdict is None:
            return UNKNOWN
        return HOLDS

    @property
    def witness(self):
        return self.verdict.witness if isinstance(self.verdict, Satisfiable) else None

    def to_json_obj(self):
        out = {"check": self.name, "status": self.status, "sentence": show(self.sentence)}
        if self.witness is not None:
            out["witness"] = self.witness.to_json_obj()
        if isinstance(self.verdict, Timeout):
            out["elapsed"] = round(self.verdict.elapsed, 3)
        return out


def _combine(checks):
    statuses = [c.status for c in checks]
    if FAILS in statuses:
        return FAILS
    if UNKNOWN in statuses:
        return UNKNOWN
    return HOLDS


class _Budget:
    def __init__(self, b: BoundParams):
        self.b = b
        self.deadline = time.monotonic() + b.time_budget if b.time_budget is not None else None

    def params(self):
        if self.deadline is None:
            return self.b
        return replace(self.b, time_budget=max(0.0, self.deadline - time.monotonic()))


def _run(check: Check, budget: _Budget) -> Check:
    check.verdict = bounded_sat_under_constraints(check.sentence, check.assumptions,
                                                  check.schema, budget.params())
    return check


def _sigma(p: Program, constraints):
    return list(constraints) if constraints is not None else constraint_sentences(p)


def _source_only(p: Program, sigma):
    view = p.view.name
    return tuple(c for c in sigma if view not in predicates(c))


def _as_budget(b):
    if isinstance(b, _Budget):
        return b
    return _Budget(b or BoundParams())


# ------------------------------------------------------------ passes

@dataclass
class PassResult:
    status: str
    checks: list = field(default_factory=list)
    get: Program = None
    detail: str = ""


def check_well_defined(putdelta: Program, constraints=None, b=None) -> PassResult:
    """For each source r, d_r(X) <- +r(X), -r(X) must be unsatisfiable."""
    budget = _as_budget(b)
    sigma = tuple(_sigma(putdelta, constraints))
    fresh = Fresh(program_var_names(putdelta))
    checks = []
    for rel in putdelta.schema.sources:
        ins, dels = "+" + rel.name, "-" + rel.name
        if not (putdelta.defines(ins) and putdelta.defines(dels)):
            continue
        xs = [f"X{i + 1}" for i in range(rel.arity)]
        fresh.reserve(xs)
        s = exists(xs, conj(datalog_to_fo(putdelta, ins, fresh, xs),
                            datalog_to_fo(putdelta, dels, fresh, xs)))
        checks.append(_run(Check(f"well-defined:{rel.name}", s, sigma, putdelta.schema), budget))
    return PassResult(_combine(checks), checks)


def view_definition(get_program: Program, names):
    return datalog_to_fo(get_program, get_program.view.name, names=names)


def check_getput_with_expected(putdelta: Program, expected_get: Program, constraints=None,
                               b=None) -> PassResult:
    """With the view replaced by the expected get, no delta may take effect
    and no constraint on the view may fire."""
    budget = _as_budget(b)
    view = putdelta.view.name
    sigma = _sigma(putdelta, constraints)
    assumptions = _source_only(putdelta, sigma)
    names = [f"V{i + 1}" for i in range(putdelta.view.arity)]
    definition = view_definition(expected_get, names)
    checks = []
    for name, s in delta_sentences(putdelta).items():
        checks.append(_run(Check(f"getput-expected:{name}", inline_view(s, view, definition, names),
                                 assumptions, putdelta.schema), budget))
    for i, c in enumerate(sigma):
        if view in predicates(c):
            checks.append(_run(Check(f"getput-expected:constraint{i + 1}",
                                     inline_view(c, view, definition, names),
                                     assumptions, putdelta.schema), budget))
    return PassResult(_combine(checks), checks, expected_get if _combine(checks) == HOLDS else None)


def _guard_name(p: Program):
    used = set(p.predicates()) | set(p.schema.source_names) | {p.view.name}
    name, k = "guard", 1
    while name in used:
        name, k = f"guard{k}", k + 1
    return name


def derive_get(putdelta: Program, constraints=None, b=None) -> PassResult:
    """Construct the only get that can satisfy GetPut, or explain why none can."""
    budget = _as_budget(b)
    sigma = _sigma(putdelta, constraints)
    assumptions = _source_only(putdelta, sigma)
    view_sigma = [c for c in sigma if c not in assumptions]
    d = build_getput_decomposition(putdelta, view_sigma)
    schema = putdelta.schema
    c3 = _run(Check("getput:no-steady-state", d.phi3, assumptions, schema), budget)
    guard = _guard_name(putdelta)
    gschema = schema.with_relations([Relation(guard, schema.view.attrs)])
    c12 = _run(Check("getput:no-view-exists", d.coexist_sentence(guard), assumptions, gschema),
               budget)
    checks = [c3, c12]
    status = _combine(checks)
    if status != HOLDS:
        detail = {FAILS: "", UNKNOWN: "search did not finish"}[status]
        if c3.status == FAILS:
            detail = "no-steady-state"
        elif c12.status == FAILS:
            detail = "no-view-exists"
        return PassResult(status, checks, None, detail)
    return PassResult(HOLDS, checks, get_from_formula(putdelta, d.phi2, d.vars), "get-derived")


def get_from_formula(putdelta: Program, phi, names) -> Program:
    view = putdelta.view.name
    if phi.free:
        ranf = to_ranf(phi)
        q, _ = ranf_to_datalog(ranf, view, names, putdelta.schema)
        return q
    return Program(putdelta.schema, ())


def check_putget(putdelta: Program, get_program: Program, constraints=None, b=None) -> PassResult:
    """get(put(S, V)) = V for every (S, V) satisfying the constraints."""
    budget = _as_budget(b)
    sigma = tuple(_sigma(putdelta, constraints))
    pg, view_new, _ = build_putget_program(putdelta, get_program)
    f1, f2 = build_putget_sentences(pg, view_new, putdelta.view.name)
    checks = [_run(Check("putget:extra-tuple", f1, sigma, putdelta.schema), budget),
              _run(Check("putget:missing-tuple", f2, sigma, putdelta.schema), budget)]
    return PassResult(_combine(checks), checks, get_program)


# ------------------------------------------------------------ report

VALID, INVALID, UNKNOWN_OVERALL = "ValidUpToBound", "Invalid", "Unknown"


@dataclass
class ValidationReport:
    well_defined: str
    getput_status: str  # expected-get-accepted | get-derived | no-steady-state | no-view-exists | unknown | skipped
    derived_get: Program | None
    putget_status: str
    checks: list
    bound: int
    overall: str
    expected_get_status: str | None = None

    @property
    def counterexamples(self):
        return [(c.name, c.witness) for c in self.checks if c.witness is not None]

    def to_json_obj(self):
        return {
            "overall": self.overall,
            "bound": self.bound,
            "wellDefined": self.well_defined,
            "expectedGet": self.expected_get_status,
            "getputStatus": self.getput_status,
            "putgetStatus": self.putget_status,
            "derivedGet": format_program(self.derived_get, headers=False)
            if self.derived_get is not None else None,
            "counterexamples": [{"check": n, "witness": w.to_json_obj()}
                                for n, w in self.counterexamples],
            "checks": [c.to_json_obj() for c in self.checks],
        }

    def to_json(self):
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=False)

    def to_text(self):
        lines = [f"overall: {self.overall} (bound {self.bound})",
                 f"well-defined: {self.well_defined}"]
        if self.expected_get_status is not None:
            lines.append(f"expected get: {self.expected_get_status}")
        lines.append(f"getput: {self.getput_status}")
        lines.append(f"putget: {self.putget_status}")
        for c in self.checks:
            lines.append(f"  {c.name}: {c.status}")
        for name, w in self.counterexamples:
            lines.append(f"counterexample for {name}: {w!r}")
        if self.derived_get is not None:
            lines.append("get:")
            text = format_program(self.derived_get, headers=False).strip()
            lines.extend("  " + l for l in text.splitlines()) if text else lines.append("  (empty)")
        return "\n".join(lines) + "\n"


def validate(putdelta: Program, expected_get: Program | None = None, constraints=None,
             b: BoundParams | None = None) -> ValidationReport:
    b = b or BoundParams()
    budget = _Budget(b)
    checks = []
    wd = check_well_defined(putdelta, constraints, budget)
    checks += wd.checks
    get_program, getput_status, expected_status = None, "skipped", None
    putget_status = "skipped"
    if wd.status != FAILS:
        if expected_get is not None:
            ex = check_getput_with_expected(putdelta, expected_get, constraints, budget)
            checks += ex.checks
            expected_status = {HOLDS: "accepted", FAILS: "rejected", UNKNOWN: "unknown"}[ex.status]
            if ex.status == HOLDS:
                get_program, getput_status = expected_get, "expected-get-accepted"
        if get_program is None:
            dg = derive_get(putdelta, constraints, budget)
            checks += dg.checks
            getput_status = dg.detail if dg.status == FAILS else (
                "get-derived" if dg.status == HOLDS else "unknown")
            get_program = dg.get
        if get_program is not None:
            pg = check_putget(putdelta, get_program, constraints, budget)
            checks += pg.checks
            putget_status = pg.status
    # a rejected expected get is reported, but the verdict is about the strategy
    statuses = [c.status for c in checks if not c.name.startswith("getput-expected")]
    if FAILS in statuses:
        overall = INVALID
    elif UNKNOWN in statuses or get_program is None:
        overall = UNKNOWN_OVERALL
    else:
        overall = VALID
    return ValidationReport(wd.status, getput_status, get_program, putget_status, checks,
                            b.bound, overall, expected_status)

import json
import random

import pytest

from putback import corpus
from putback.datalog import parse_program
from putback.engine import get
from putback.engine.sampling import random_database, roundtrip, value_pools
from putback.satcheck import BoundParams
from putback.validator import (INVALID, VALID, check_well_defined, derive_get,
                               replay_counterexample, validate)
from putback.validator.mutants import mutants

B = BoundParams.uniform(3)


def same_view(g1, g2, sources, trials=300, seed=0):
    rng = random.Random(seed)
    pools = value_pools([g1, g2])
    for _ in range(trials):
        s = random_database(sources, rng, pools)
        if get(g1, s) != get(g2, s):
            return False
    return True


def test_example1_derives_union():
    p, g = corpus.load("example1")
    report = validate(p, b=B)
    assert report.overall == VALID
    assert report.getput_status == "get-derived"
    assert same_view(report.derived_get, g, p.schema.sources)


@pytest.mark.parametrize("name", corpus.EXAMPLES)
def test_expected_get_accepted(name):
    p, g = corpus.load(name)
    report = validate(p, g, b=B)
    assert report.overall == VALID
    assert report.expected_get_status == "accepted"
    assert report.derived_get is g


def test_wrong_expected_get_is_rejected_but_strategy_still_valid():
    p, _ = corpus.load("example1")
    only_r1 = parse_program("v(X) :- r1(X).", p.schema)
    report = validate(p, only_r1, b=B)
    assert report.expected_get_status == "rejected"
    assert report.getput_status == "get-derived"
    assert report.overall == VALID


def test_contradictory_strategy_is_ill_defined():
    p = parse_program("source r(a:int).\nview v(a:int).\n"
                      "+r(X) :- v(X), not r(X).\n-r(X) :- v(X).")
    wd = check_well_defined(p, b=B)
    assert wd.status == "fails"
    c = wd.checks[0]
    replay = replay_counterexample(c.name, c.witness, p)
    assert replay.violated
    report = validate(p, b=B)
    assert report.overall == INVALID
    assert report.counterexamples


def test_view_independent_deletion_has_no_steady_state():
    # deletes every r tuple whatever the view is
    p = parse_program("source r(a:int).\nview v(a:int).\n"
                      "+r(X) :- v(X), not r(X).\n-r(X) :- r(X).")
    result = derive_get(p, b=B)
    assert result.status == "fails"
    assert result.detail in ("no-steady-state", "no-view-exists")


def test_no_view_satisfies_both_rules():
    # a tuple in r must be in v and also must not be
    p = parse_program("source r(a:int).\nview v(a:int).\n"
                      "-r(X) :- r(X), v(X).\n-r(X) :- r(X), not v(X).")
    result = derive_get(p, b=B)
    assert result.status == "fails"
    name, witness = [(c.name, c.witness) for c in result.checks if c.witness is not None][0]
    assert replay_counterexample(name, witness, p).violated


@pytest.mark.parametrize("label", ["drop-insertion", "drop-deletion", "flip-negation"])
def test_example1_mutants_rejected(label):
    p, _ = corpus.load("example1")
    m = dict(mutants(p))[label]
    report = validate(m, b=B)
    assert report.overall == INVALID
    name, witness = report.counterexamples[0]
    assert replay_counterexample(name, witness, m, report.derived_get).violated


def test_mutants_are_distinct_programs():
    p, _ = corpus.load("residents")
    ms = mutants(p)
    assert [label for label, _ in ms] == ["drop-insertion", "drop-deletion", "flip-negation"]
    assert len({m.rules for _, m in ms} | {p.rules}) == 4


def test_report_serialization():
    p, _ = corpus.load("ced")
    report = validate(p, b=B)
    obj = json.loads(report.to_json())
    assert obj["overall"] == VALID
    assert obj["derivedGet"]
    assert {c["check"] for c in obj["checks"]} >= {"putget:extra-tuple", "putget:missing-tuple"}
    assert "overall: ValidUpToBound" in report.to_text()


def test_derived_get_passes_roundtrip():
    p, _ = corpus.load("example5")
    report = validate(p, b=B)
    assert roundtrip(p, report.derived_get, trials=100).ok

import pytest

from incremental_checks import SCHEMAS, canonical, incremental_mismatches, schema_check
from putback import corpus
from putback.datalog import Neg, Pos, format_program, parse_program
from putback.engine import DeltaSet, apply_delta, db, get, put
from putback.incremental import (IncrementalizationError, changed_predicates, eval_incremental,
                                 incrementalize_lvgn, incrementalize_put, to_two_predicate_form)

def test_selection_view_delta_program():
    p, _ = corpus.load("example5")
    got = incrementalize_put(p)
    rules = {canonical(r) for r in got.proper_rules}
    text = format_program(got, headers=False)
    assert len(rules) == 3
    assert "m(X, Y) :- r(X, Y), Y > 2." in text
    assert "+r(X, Y) :- +v(X, Y), not r(X, Y)." in text
    assert "-r(X, Y) :- m(X, Y), -v(X, Y)." in text
    assert got.constraints == p.constraints


def test_fast_path_matches_general_rewrite_on_selection():
    p, _ = corpus.load("example5")
    a = {canonical(r) for r in incrementalize_put(p).rules}
    b = {canonical(r) for r in incrementalize_lvgn(p).rules}
    assert a == b


def test_fast_path_requires_lvgn():
    p = parse_program("source r(a:int).\nview v(a:int).\n"
                      "q(X) :- v(X).\n+r(X) :- q(X), not r(X).")
    with pytest.raises(IncrementalizationError):
        incrementalize_lvgn(p)
    dput = incrementalize_put(p)
    s, v = db(r=[(1,)]), db(v=[(1,)])
    dv = DeltaSet({"v": [(2,)]}, {})
    assert eval_incremental(dput, s, v, dv) == put(p, s, apply_delta(v, dv))


def test_changed_predicates():
    p, _ = corpus.load("example5")
    assert changed_predicates(p, "v") == {"v", "+r", "-r"}


def test_two_predicate_form_bodies():
    p, _ = corpus.load("residents")
    tpf = to_two_predicate_form(p)
    for r in tpf.proper_rules:
        assert sum(isinstance(l, (Pos, Neg)) for l in r.body) <= 2


@pytest.mark.parametrize("name", sorted(SCHEMAS))
def test_rule_schema_deltas_sampled(name):
    assert schema_check(name, samples=3000, seed=1)[1] == 0


def test_projection_schema_exhaustive():
    assert schema_check("projection") == (256, 0)


@pytest.mark.parametrize("name", corpus.EXAMPLES)
def test_incremental_matches_put(name):
    p, g = corpus.load(name)
    for dput in (incrementalize_put(p), incrementalize_lvgn(p)):
        assert incremental_mismatches(p, g, dput, trials=150, seed=7) == (150, 0)


def test_union_view_incremental():
    p, g = corpus.load("example1")
    s = db(r1=[(1,)], r2=[(2,), (4,)])
    v = get(g, s)
    dv = DeltaSet({"v": [(3,)]}, {"v": [(2,)]})
    assert eval_incremental(incrementalize_put(p), s, v, dv) == db(r1=[(1,), (3,)], r2=[(4,)])


def test_second_order_delta():
    # applying only the insertions of the delta of the source delta
    s = db(r1=[(1,)], r2=[(2,), (4,)])
    d2_plus = DeltaSet({"r1": [(3,)]}, {"r2": [(4,)]})
    assert apply_delta(s, d2_plus) == db(r1=[(1,), (3,)], r2=[(2,)])

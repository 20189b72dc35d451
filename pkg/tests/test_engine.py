import datetime

import pytest
from hypothesis import given, strategies as st

from putback import corpus
from putback.datalog import parse_program
from putback.engine import (Condition, ConstraintViolation, ContradictoryDelta, Database,
                            DeleteWhere, DeltaSet, InsertRow, UpdateWhere, apply_delta, db,
                            derive_view_delta, evaluate, get, put, putdelta, read_database,
                            replay, write_database)
from putback.engine.sampling import Failure, minimize, roundtrip


def example1():
    return corpus.load("example1")


def test_put_union_view():
    p, _ = example1()
    s = db(r1=[(1,)], r2=[(2,), (4,)])
    v = db(v=[(1,), (3,), (4,)])
    assert putdelta(p, s, v) == DeltaSet({"r1": [(3,)]}, {"r2": [(2,)]})
    assert put(p, s, v) == db(r1=[(1,)], r2=[(4,)]) | db(r1=[(3,)])


def test_get_union_view():
    _, g = example1()
    assert get(g, db(r1=[(1,)], r2=[(2,), (4,)])) == db(v=[(1,), (2,), (4,)])


def test_constraint_rejects_update():
    p, _ = corpus.load("example5")
    with pytest.raises(ConstraintViolation, match="constraint violated"):
        put(p, db(r=[(1, 3)]), db(v=[(1, 3), (2, 1)]))


def test_contradictory_delta():
    p = parse_program("source r(a:int).\nview v(a:int).\n"
                      "+r(X) :- v(X).\n-r(X) :- v(X).")
    with pytest.raises(ContradictoryDelta):
        put(p, db(), db(v=[(1,)]))


def test_apply_delta_rejects_clash():
    with pytest.raises(ContradictoryDelta):
        apply_delta(db(), DeltaSet({"r": [(1,)]}, {"r": [(1,)]}))


def test_stratified_negation():
    p = parse_program("source r(a:int).\nsource s(a:int).\nview v(a:int).\n"
                      "q(X) :- r(X), not s(X).\nw(X) :- r(X), not q(X).\n"
                      "+r(X) :- v(X), not r(X).")
    out = evaluate(p, db(r=[(1,), (2,)], s=[(2,)]))
    assert out["q"] == {(1,)}
    assert out["w"] == {(2,)}


def test_database_equality_ignores_empty_relations():
    assert db(r=[]) == db()
    assert hash(db(r=[(1,)], s=[])) == hash(db(r=[(1,)]))


@pytest.mark.parametrize("suffix", ["", ".json"])
def test_database_io_roundtrip(tmp_path, suffix):
    p, _ = corpus.load("residents")
    s = Database({"male": [("bob", datetime.date(1970, 5, 1))],
                  "female": [("ann", datetime.date(1962, 1, 2))],
                  "others": [("kim", datetime.date(1999, 12, 31), "x")]})
    path = tmp_path / f"src{suffix}"
    write_database(s, path, p.schema.sources)
    assert read_database(path, p.schema.sources) == s


def test_csv_header_mismatch(tmp_path):
    p, _ = example1()
    (tmp_path / "r1.csv").write_text("b\n1\n")
    with pytest.raises(ValueError, match="header"):
        read_database(tmp_path, p.schema.sources)


def test_json_bad_value(tmp_path):
    p, _ = example1()
    f = tmp_path / "s.json"
    f.write_text('{"r1": [["x"]]}')
    with pytest.raises(ValueError):
        read_database(f, p.schema.sources)


# ------------------------------------------------------------ view delta fold

VIEW = parse_program("source r(a:int, b:int).\nview v(a:int, b:int).\n").schema.view


def test_insert_then_delete_is_a_deletion():
    v = db(v=[(1, 1)])
    t = (5, 5)
    delta = derive_view_delta([InsertRow(t), DeleteWhere((Condition("a", "=", 5),))], v, VIEW)
    assert t in delta.dels["v"]
    assert t not in delta.ins["v"]


def test_delete_then_insert_is_an_insertion():
    v = db(v=[(1, 1)])
    delta = derive_view_delta([DeleteWhere(), InsertRow((1, 1))], v, VIEW)
    assert (1, 1) in delta.ins["v"]
    assert (1, 1) not in delta.dels["v"]


def test_update_is_delete_then_insert():
    v = db(v=[(1, 1), (2, 1)])
    stmts = [UpdateWhere((("b", 7),), (Condition("a", ">", 1),))]
    delta = derive_view_delta(stmts, v, VIEW)
    assert apply_delta(v, delta) == db(v=[(1, 1), (2, 7)])


def test_unknown_attribute():
    with pytest.raises(ValueError, match="unknown attribute"):
        derive_view_delta([DeleteWhere((Condition("z", "=", 1),))], db(), VIEW)


values = st.integers(0, 2)
conditions = st.lists(st.builds(Condition, st.sampled_from("ab"), st.sampled_from("=<>"), values),
                      max_size=2).map(tuple)
statements = st.one_of(
    st.builds(InsertRow, st.tuples(values, values)),
    st.builds(DeleteWhere, conditions),
    st.builds(UpdateWhere, st.lists(st.tuples(st.sampled_from("ab"), values), min_size=1,
                                    max_size=2).map(tuple), conditions))


@given(st.sets(st.tuples(values, values)), st.lists(statements, max_size=6))
def test_fold_matches_replay(rows, stmts):
    v = db(v=rows)
    delta = derive_view_delta(stmts, v, VIEW)
    assert not delta.is_contradictory()
    assert apply_delta(v, delta) == replay(stmts, v, VIEW)


# ------------------------------------------------------------ round trips

def test_roundtrip_finds_nothing_for_example1():
    p, g = example1()
    result = roundtrip(p, g, trials=100, seed=3)
    assert result.ok
    assert result.trials == 100


def test_roundtrip_catches_broken_strategy():
    p, g = example1()
    broken = p.with_rules(p.rules[1:])  # never inserts into r1
    result = roundtrip(broken, g, trials=100, seed=0)
    assert not result.ok
    f = minimize(result.failures[0], broken, g)
    assert isinstance(f, Failure)
    assert f.law == "PutGet"
    assert len(f.source) + len(f.view) <= len(result.failures[0].source) + len(
        result.failures[0].view)

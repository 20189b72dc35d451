import datetime
from pathlib import Path

import pytest

from pg_harness import connect, run_trials
from putback import corpus
from putback.cli import incrementalize
from putback.datalog import parse_program
from putback.sqlgen import (compile_sql, gen_constraint_checks, gen_trigger_sql, gen_view_sql,
                            ident, literal, syntax_check)

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("name", ["example1", "ced"])
def test_golden_scripts(name):
    p, g = corpus.load(name)
    assert compile_sql(p, g) == (GOLDEN / f"{name}.sql").read_text()


@pytest.mark.parametrize("name", corpus.EXAMPLES)
@pytest.mark.parametrize("incremental", [False, True])
def test_scripts_pass_syntax_gate(name, incremental):
    p, g = corpus.load(name)
    strategy = incrementalize(p) if incremental else p
    script = compile_sql(strategy, g)
    syntax_check(script)
    assert ("CREATE TEMP TABLE _ins_" in script) == incremental


def test_syntax_gate_rejects_broken_sql():
    with pytest.raises(Exception):
        syntax_check("CREATE TABLE (;")


def test_syntax_gate_checks_function_bodies():
    bad = ("CREATE FUNCTION f() RETURNS trigger LANGUAGE plpgsql AS $$\n"
           "BEGIN\n    IF TRUE THEN RETURN NULL;\nEND;\n$$;")
    with pytest.raises(Exception):
        syntax_check(bad)


def test_one_raise_per_constraint():
    p, g = corpus.load("residents1962")
    assert compile_sql(p, g).count("RAISE EXCEPTION 'Invalid view updates'") == 2


def test_negated_anonymous_atom_becomes_not_exists():
    p, _ = corpus.load("employees")
    [check] = gen_constraint_checks(p.constraints, p.schema)
    assert "NOT EXISTS (SELECT 1 FROM ced" in check
    assert "_new_employees" in check


def test_date_literals():
    assert literal(datetime.date(1962, 12, 31)) == "DATE '1962-12-31'"
    assert literal("O'Brien") == "'O''Brien'"
    assert literal(3) == "3"


def test_identifiers_are_quoted_when_needed():
    assert ident("ced") == "ced"
    assert ident("user") == '"user"'
    assert ident("Mixed") == '"Mixed"'


def test_view_uses_every_rule():
    p, g = corpus.load("example1")
    sql = gen_view_sql(g)
    assert "FROM r1" in sql and "FROM r2" in sql and "UNION" in sql


def test_empty_strategy_warns():
    p = parse_program("source r(a:int).\nview v(a:int).\n")
    with pytest.warns(UserWarning, match="no delta rules"):
        script = gen_trigger_sql(p)
    assert "is not updatable" in script


_conn = None


def _live():
    global _conn
    if _conn is None:
        _conn = connect() or False
    return _conn


@pytest.mark.parametrize("name", corpus.EXAMPLES)
@pytest.mark.parametrize("incremental", [False, True])
def test_live_database_matches_engine(name, incremental):
    conn = _live()
    if not conn:
        pytest.skip("set PUTBACK_PG_DSN to run against PostgreSQL")
    p, g = corpus.load(name)
    strategy = incrementalize(p) if incremental else p
    assert run_trials(conn, name, p, g, strategy, trials=30, seed=5) == []

"""Randomized DML against a generated script on a live PostgreSQL server,
compared statement by statement with the engine."""

import os
import random

from putback.engine import (Condition, ConstraintViolation, ContradictoryDelta, Database,
                            DeleteWhere, InsertRow, UpdateWhere, apply_delta, derive_view_delta,
                            get, put)
from putback.engine.sampling import all_tuples, random_database, value_pools
from putback.sqlgen import compile_sql, ident, literal

DSN_VAR = "PUTBACK_PG_DSN"


def connect():
    """Connection from $PUTBACK_PG_DSN, or None."""
    dsn = os.environ.get(DSN_VAR)
    if not dsn:
        return None
    try:
        import psycopg2
    except ImportError:
        return None
    conn = psycopg2.connect(dsn)
    conn.autocommit = True
    return conn


def _condition(rel, rng, pools):
    i = rng.randrange(rel.arity)
    name, typ = rel.attrs[i]
    ops = "=" if typ == "string" else "=<>"
    return Condition(name, rng.choice(ops), rng.choice(pools[typ]))


def random_statement(rel, v, rng, pools):
    kind = rng.random()
    if kind < 0.4:
        rows = rng.sample(all_tuples(rel, pools), rng.randint(1, 2))
        return [InsertRow(t) for t in rows]
    where = tuple(_condition(rel, rng, pools) for _ in range(rng.randint(0, 1)))
    if kind < 0.75:
        return [DeleteWhere(where)]
    name, typ = rel.attrs[rng.randrange(rel.arity)]
    return [UpdateWhere(((name, rng.choice(pools[typ])),), where)]


def to_sql(rel, stmts):
    v = ident(rel.name)

    def where(conds):
        if not conds:
            return ""
        return " WHERE " + " AND ".join(f"{ident(c.attr)} {c.op} {literal(c.value)}"
                                        for c in conds)

    first = stmts[0]
    if isinstance(first, InsertRow):
        rows = ", ".join("(" + ", ".join(literal(x) for x in s.row) + ")" for s in stmts)
        return f"INSERT INTO {v} VALUES {rows}"
    if isinstance(first, DeleteWhere):
        return f"DELETE FROM {v}{where(first.where)}"
    sets = ", ".join(f"{ident(a)} = {literal(x)}" for a, x in first.assignments)
    return f"UPDATE {v} SET {sets}{where(first.where)}"


def _read(cur, relations):
    rels = {}
    for rel in relations:
        cur.execute(f"SELECT * FROM {ident(rel.name)}")
        rels[rel.name] = [tuple(r) for r in cur.fetchall()]
    return Database(rels)


def _load(cur, relations, s):
    for rel in relations:
        cur.execute(f"DELETE FROM {ident(rel.name)}")
        for t in s[rel.name]:
            cur.execute(f"INSERT INTO {ident(rel.name)} VALUES "
                        f"({', '.join(literal(x) for x in t)})")


def _engine(p, s, v2):
    try:
        return put(p, s, v2)
    except (ConstraintViolation, ContradictoryDelta):
        return None


def run_trials(conn, label, p, g, strategy, trials=100, seed=0, statements=2):
    """Divergences (list of strings) between the database and the engine."""
    import psycopg2

    schema = "t_" + label
    sources = p.schema.sources
    view = p.schema.view
    cur = conn.cursor()
    cur.execute(f"DROP SCHEMA IF EXISTS {schema} CASCADE")
    cur.execute(f"CREATE SCHEMA {schema}")
    cur.execute(f"SET search_path TO {schema}, pg_temp")
    cur.execute(compile_sql(strategy, g))
    rng = random.Random(seed)
    pools = value_pools([p, g], size=2)
    out = []
    for trial in range(trials):
        s = random_database(sources, rng, pools, max_tuples=3)
        _load(cur, sources, s)
        for _ in range(statements):
            v = get(g, s)
            if _read(cur, [view]) != v:
                out.append(f"trial {trial}: view differs before statement")
                break
            stmts = random_statement(view, v, rng, pools)
            sql = to_sql(view, stmts)
            expected = _engine(p, s, apply_delta(v, derive_view_delta(stmts, v, view)))
            try:
                cur.execute(sql)
                failed = False
            except psycopg2.Error as e:
                failed = str(e).strip().splitlines()[0]
            got = _read(cur, sources)
            if expected is None:
                if not failed or got != s:
                    out.append(f"trial {trial}: {sql} should be rejected on {s!r}")
                    break
            elif failed or got != expected:
                out.append(f"trial {trial}: {sql} on {s!r} gave "
                           f"{failed if failed else repr(got)}, engine {expected!r}")
                break
            else:
                s = expected
    cur.execute(f"DROP SCHEMA {schema} CASCADE")
    cur.execute("SET search_path TO public")
    return out

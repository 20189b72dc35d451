"""PostgreSQL generation: source tables, the view, and triggers that run a
putback strategy when the view is updated.

Updates on the view are handled in two steps. A row-level INSTEAD OF
trigger records the old row of every affected row in _delta_del_<v> and
the new row in _delta_ins_<v>. A statement-level AFTER trigger then builds
the updated view (old rows out, new rows in, so an UPDATE acts as a
deletion of all matched rows followed by the insertion of their images), checks the constraints, computes every source delta into
_delta_ins_<r> / _delta_del_<r>, and only then applies them."""

from __future__ import annotations

import re
import warnings

from pglast.keywords import RESERVED_KEYWORDS, TYPE_FUNC_NAME_KEYWORDS

from ..datalog.analysis import evaluation_order
from ..datalog.syntax import ANON, Cmp, Const, Eq, Neg, Pos, Program, Var, type_of

SQL_TYPES = {"int": "INTEGER", "string": "TEXT", "date": "DATE"}
_PLAIN = re.compile(r"^[a-z_][a-z0-9_]*$")
_RESERVED = set(RESERVED_KEYWORDS) | set(TYPE_FUNC_NAME_KEYWORDS)


class SQLGenerationError(ValueError):
    pass


def ident(name: str) -> str:
    if _PLAIN.match(name) and name not in _RESERVED:
        return name
    return '"' + name.replace('"', '""') + '"'


def literal(value) -> str:
    t = type_of(value)
    if t == "int":
        return str(value)
    if t == "date":
        return f"DATE '{value.isoformat()}'"
    return "'" + value.replace("'", "''") + "'"


def _typed_literal(value) -> str:
    # bare string literals in a select list would have type unknown
    if type_of(value) == "string":
        return f"CAST({literal(value)} AS TEXT)"
    return literal(value)


def _indent(text, n):
    pad = " " * n
    return "\n".join(pad + line if line else line for line in text.splitlines())


class _Tables:
    """Where each predicate's tuples live: a table name plus column names."""

    def __init__(self, p: Program, overrides=None):
        self.p = p
        self.overrides = dict(overrides or {})
        self.cte = {}

    def lookup(self, pred):
        if pred in self.overrides:
            return self.overrides[pred]
        if pred in self.cte:
            return self.cte[pred]
        rel = self.p.schema.relation(pred)
        if rel is not None:
            return ident(rel.name), [ident(a) for a in rel.attr_names]
        raise SQLGenerationError(f"no table for predicate {pred}")


def _cte_name(pred, taken):
    base = pred.replace("+", "ins_").replace("-", "del_")
    base = re.sub(r"[^a-z0-9_]", "_", base.lower())
    name, k = "_" + base, 1
    while name in taken:
        name, k = f"_{base}_{k}", k + 1
    taken.add(name)
    return name


def _term(t, env):
    if isinstance(t, Const):
        return literal(t.value)
    return env.get(t.name)


def rule_sql(rule, tables: _Tables, out_cols=None) -> str:
    """SELECT statement for one rule body. With out_cols the head terms are
    selected under those names; a constraint body selects 1."""
    froms, conds, env = [], [], {}
    k = 0
    for lit in rule.body:
        if not isinstance(lit, Pos):
            continue
        table, cols = tables.lookup(lit.atom.pred)
        alias = f"t{k}"
        k += 1
        froms.append(f"{table} AS {alias}")
        for arg, col in zip(lit.atom.args, cols):
            ref = f"{alias}.{col}"
            if isinstance(arg, Const):
                conds.append(f"{ref} = {literal(arg.value)}")
            elif isinstance(arg, Var):
                if arg.name in env:
                    conds.append(f"{ref} = {env[arg.name]}")
                else:
                    env[arg.name] = ref
    builtins = [l for l in rule.body if isinstance(l, (Eq, Cmp))]
    used = set()
    progress = True
    while progress:  # variables limited by equalities
        progress = False
        for i, b in enumerate(builtins):
            if i in used or not isinstance(b, Eq) or b.negated:
                continue
            for a, c in ((b.left, b.right), (b.right, b.left)):
                if isinstance(a, Var) and a.name not in env and _term(c, env) is not None:
                    env[a.name] = _term(c, env)
                    used.add(i)
                    progress = True
                    break
    for i, b in enumerate(builtins):
        if i in used:
            continue
        left, right = _term(b.left, env), _term(b.right, env)
        if left is None or right is None:
            raise SQLGenerationError(f"unsafe rule {rule}")
        op = "=" if isinstance(b, Eq) else b.op
        cond = f"{left} {op} {right}"
        conds.append(f"NOT ({cond})" if b.negated else cond)
    n = 0
    for lit in rule.body:
        if not isinstance(lit, Neg):
            continue
        table, cols = tables.lookup(lit.atom.pred)
        alias = f"n{n}"
        n += 1
        inner = []
        for arg, col in zip(lit.atom.args, cols):
            if arg == ANON:
                continue
            value = _term(arg, env)
            if value is None:
                raise SQLGenerationError(f"unsafe rule {rule}")
            inner.append(f"{alias}.{col} = {value}")
        sub = f"SELECT 1 FROM {table} AS {alias}"
        if inner:
            sub += " WHERE " + " AND ".join(inner)
        conds.append(f"NOT EXISTS ({sub})")
    if out_cols is None:
        select = "SELECT 1"
    else:
        items = []
        for t, col in zip(rule.head.args, out_cols):
            expr = _typed_literal(t.value) if isinstance(t, Const) else env.get(t.name)
            if expr is None:
                raise SQLGenerationError(f"unsafe rule {rule}")
            if not isinstance(t, Const) and expr.startswith("'"):
                expr = f"CAST({expr} AS TEXT)"
            items.append(f"{expr} AS {col}")
        select = "SELECT DISTINCT " + ", ".join(items)
    lines = [select]
    if froms:
        lines.append("FROM " + ", ".join(froms))
    if conds:
        lines.append("WHERE " + "\n  AND ".join(conds))
    return "\n".join(lines)


def _empty_select(types, cols):
    items = [f"CAST(NULL AS {SQL_TYPES.get(t, 'TEXT')}) AS {c}" for t, c in zip(types, cols)]
    return "SELECT " + ", ".join(items) + " WHERE FALSE"


def _needed(p: Program, roots):
    """IDB predicates reachable from the rules in `roots`, in evaluation order."""
    seen, todo = set(), []
    for r in roots:
        todo.extend(l.atom.pred for l in r.body if isinstance(l, (Pos, Neg)))
    while todo:
        pred = todo.pop()
        if pred in seen or not p.defines(pred):
            continue
        seen.add(pred)
        for r in p.rules_for(pred):
            todo.extend(l.atom.pred for l in r.body if isinstance(l, (Pos, Neg)))
    return [q for q in evaluation_order(p) if q in seen]


def _union(rules, tables, cols, types):
    if not rules:
        return _empty_select(types, cols)
    return "\nUNION\n".join(rule_sql(r, tables, cols) for r in rules)


def query_sql(p: Program, roots, tables: _Tables, cols=None, types=None) -> str:
    """Query over the union of `roots`, with the IDB predicates they use
    as common table expressions."""
    taken = set()
    ctes = []
    local = _Tables(p, tables.overrides)
    for pred in _needed(p, roots):
        if pred in tables.overrides:
            continue
        name = _cte_name(pred, taken)
        ccols = [f"c{i + 1}" for i in range(p.arity(pred))]
        body = _union(p.rules_for(pred), local, ccols, p.signature(pred))
        ctes.append(f"{name}({', '.join(ccols)}) AS (\n{_indent(body, 2)}\n)")
        local.cte[pred] = (name, ccols)
    if cols is None:
        main = "\nUNION\n".join(rule_sql(r, local) for r in roots)
    else:
        main = _union(list(roots), local, cols, types)
    if ctes:
        return "WITH " + ",\n".join(ctes) + "\n" + main
    return main


# ------------------------------------------------------------------ statements

def gen_table_sql(schema) -> str:
    out = []
    for rel in schema.sources:
        cols = ",\n".join(f"    {ident(a)} {SQL_TYPES[t]}" for a, t in rel.attrs)
        out.append(f"CREATE TABLE {ident(rel.name)} (\n{cols}\n);")
    return "\n\n".join(out) + "\n"


def gen_view_sql(get: Program, schema=None) -> str:
    """CREATE VIEW statement for the view defined by a get program."""
    schema = schema or get.schema
    view = schema.view
    tables = _Tables(Program(schema, get.proper_rules))
    roots = tables.p.rules_for(view.name)
    cols = [ident(a) for a in view.attr_names]
    body = query_sql(tables.p, roots, tables, cols, view.types)
    return f"CREATE VIEW {ident(view.name)} AS\n{body};\n"


def _view_tables(p: Program, incremental: bool):
    view = p.schema.view
    cols = [ident(a) for a in view.attr_names]
    over = {view.name: (f"_new_{view.name}", cols)}
    if incremental:
        over = {view.name: (ident(view.name), cols),
                "+" + view.name: (f"_ins_{view.name}", cols),
                "-" + view.name: (f"_del_{view.name}", cols)}
    return over


def gen_constraint_checks(constraints, schema) -> list:
    """One EXISTS condition per constraint, evaluated over the updated view
    (table _new_<view>)."""
    rules = [c for c in constraints if c.head is None]
    p = Program(schema, tuple(rules))
    view = schema.view
    tables = _Tables(p, {view.name: (f"_new_{view.name}", [ident(a) for a in view.attr_names])})
    return [f"EXISTS (\n{_indent(query_sql(p, [c], tables), 2)}\n)" for c in rules]


def _uses_view_deltas(p: Program):
    view = p.schema.view.name
    return any(isinstance(l, (Pos, Neg)) and l.atom.pred in ("+" + view, "-" + view)
               for r in p.rules for l in r.body)


def _function(name, body):
    return (f"CREATE FUNCTION {name}() RETURNS trigger LANGUAGE plpgsql AS $$\n"
            f"BEGIN\n{_indent(body, 4)}\nEND;\n$$;")


def _staging(view, cols_typed):
    v = view.name
    return [f"CREATE TEMP TABLE IF NOT EXISTS _delta_ins_{v} ({cols_typed});",
            f"CREATE TEMP TABLE IF NOT EXISTS _delta_del_{v} ({cols_typed});"]


def gen_trigger_sql(strategy: Program, constraints=None, schema=None, incremental=None) -> str:
    """Trigger functions and triggers running the strategy on view updates.
    `strategy` is a putback program, or an incremental one whose rules read
    +<view> and -<view>; the kind is detected unless `incremental` is given."""
    schema = schema or strategy.schema
    view = schema.view
    v = view.name
    vt = ident(v)
    if constraints is None:
        constraints = strategy.constraints
    if incremental is None:
        incremental = _uses_view_deltas(strategy)
    names = [ident(a) for a in view.attr_names]
    typed = ", ".join(f"{ident(a)} {SQL_TYPES[t]}" for a, t in view.attrs)
    old_vals = ", ".join(f"OLD.{c}" for c in names)
    new_vals = ", ".join(f"NEW.{c}" for c in names)

    stage = _staging(view, typed) + [
        "IF TG_OP IN ('DELETE', 'UPDATE') THEN",
        f"    INSERT INTO _delta_del_{v} VALUES ({old_vals});",
        "END IF;",
        "IF TG_OP IN ('INSERT', 'UPDATE') THEN",
        f"    INSERT INTO _delta_ins_{v} VALUES ({new_vals});",
        "    RETURN NEW;",
        "END IF;",
        "RETURN OLD;",
    ]

    p = Program(schema, strategy.proper_rules)
    body = _staging(view, typed)
    deltas = []
    for rel in schema.sources:
        for sign, tag in (("+", "ins"), ("-", "del")):
            if p.defines(sign + rel.name):
                deltas.append((rel, sign, tag))
    if not deltas:
        warnings.warn(f"strategy has no delta rules: every update on {v} is rejected")
        body += [f"IF EXISTS (SELECT 1 FROM _delta_ins_{v}) OR EXISTS (SELECT 1 FROM _delta_del_{v}) THEN",
                 f"    RAISE EXCEPTION 'view {v} is not updatable';",
                 "END IF;",
                 f"DROP TABLE _delta_ins_{v};",
                 f"DROP TABLE _delta_del_{v};",
                 "RETURN NULL;"]
    else:
        body += ["-- derive the changes on the view",
                 f"DROP TABLE IF EXISTS _new_{v};",
                 f"CREATE TEMP TABLE _new_{v} AS",
                 f"    (SELECT * FROM {vt} EXCEPT SELECT * FROM _delta_del_{v})",
                 f"    UNION SELECT * FROM _delta_ins_{v};"]
        if incremental:
            body += [f"DROP TABLE IF EXISTS _ins_{v};",
                     f"CREATE TEMP TABLE _ins_{v} AS SELECT * FROM _delta_ins_{v} EXCEPT SELECT * FROM {vt};",
                     f"DROP TABLE IF EXISTS _del_{v};",
                     f"CREATE TEMP TABLE _del_{v} AS (SELECT * FROM _delta_del_{v} "
                     f"EXCEPT SELECT * FROM _delta_ins_{v}) INTERSECT SELECT * FROM {vt};"]
        # temp tables live for one statement only: scripts for other schemas
        # share the session's temp namespace
        body += [f"DROP TABLE _delta_ins_{v};", f"DROP TABLE _delta_del_{v};"]
        checks = gen_constraint_checks(constraints, schema)
        if checks:
            body.append("-- check the constraints")
        for c in checks:
            body += [f"IF {c} THEN", "    RAISE EXCEPTION 'Invalid view updates';", "END IF;"]
        body.append("-- compute every delta relation before changing any source")
        tables = _Tables(p, _view_tables(p, incremental))
        for rel, sign, tag in deltas:
            t = f"_delta_{tag}_{rel.name}"
            q = query_sql(p, p.rules_for(sign + rel.name), tables,
                          [ident(a) for a in rel.attr_names], rel.types)
            body += [f"DROP TABLE IF EXISTS {t};", f"CREATE TEMP TABLE {t} AS", _indent(q, 4) + ";"]
        for rel in schema.sources:
            if p.defines("+" + rel.name) and p.defines("-" + rel.name):
                body += [f"IF EXISTS (SELECT * FROM _delta_ins_{rel.name} "
                         f"INTERSECT SELECT * FROM _delta_del_{rel.name}) THEN",
                         f"    RAISE EXCEPTION 'contradictory delta on {rel.name}';",
                         "END IF;"]
        body.append("-- apply the deltas")
        for rel, sign, tag in deltas:
            r = ident(rel.name)
            if sign == "-":
                body.append(f"DELETE FROM {r} WHERE ROW({r}.*) IN (SELECT * FROM _delta_del_{rel.name});")
        for rel, sign, tag in deltas:
            r = ident(rel.name)
            if sign == "+":
                body.append(f"INSERT INTO {r} SELECT * FROM _delta_ins_{rel.name} EXCEPT SELECT * FROM {r};")
        temps = [f"_new_{v}"] + ([f"_ins_{v}", f"_del_{v}"] if incremental else [])
        temps += [f"_delta_{tag}_{rel.name}" for rel, _, tag in deltas]
        body.append(f"DROP TABLE {', '.join(temps)};")
        body.append("RETURN NULL;")

    out = [_function(f"{v}_stage_delta", "\n".join(stage)),
           _function(f"{v}_apply_strategy", "\n".join(body)),
           f"CREATE TRIGGER {v}_stage_delta\n    INSTEAD OF INSERT OR UPDATE OR DELETE ON {vt}\n"
           f"    FOR EACH ROW EXECUTE FUNCTION {v}_stage_delta();",
           f"CREATE TRIGGER {v}_apply_strategy\n    AFTER INSERT OR UPDATE OR DELETE ON {vt}\n"
           f"    FOR EACH STATEMENT EXECUTE FUNCTION {v}_apply_strategy();"]
    return "\n\n".join(out) + "\n"


def compile_sql(strategy: Program, get: Program, incremental=None) -> str:
    """Complete script: source tables, the view and its update triggers."""
    schema = strategy.schema
    parts = [gen_table_sql(schema), gen_view_sql(get, schema),
             gen_trigger_sql(strategy, strategy.constraints, schema, incremental)]
    return "\n".join(parts)


def syntax_check(script: str) -> None:
    """Raise pglast's ParseError if the script or any function body is not
    valid PostgreSQL."""
    import pglast
    from pglast import ast

    stmts = pglast.parse_sql(script)
    for raw in stmts:
        if isinstance(raw.stmt, ast.CreateFunctionStmt):
            start = raw.stmt_location or 0
            text = script[start:start + raw.stmt_len] if raw.stmt_len else script[start:]
            pglast.parse_plpgsql(text)

"""Bounded finite-model search.

A closed sentence (plus constraint sentences that must be false) is grounded
over a finite domain per type and handed to a SAT solver. Quantifiers range
over the active domain: the constants of the problem plus every fresh value
that occurs in some stored tuple. The number of fresh values per type is
deepened one step at a time, so the first model found uses as few fresh
values as possible; the model is then shrunk tuple by tuple and checked
against the brute-force evaluator before it is reported."""

from __future__ import annotations

import datetime
import itertools
import threading
import time
from dataclasses import dataclass

from pysat.card import CardEnc, EncType
from pysat.solvers import Solver

from ..datalog.syntax import Const, Schema, type_of
from ..engine.database import Database, tuple_key
from ..logic.formula import (And, Comparison, Equality, Exists, Forall, Implies, Not, Or,
                             RelAtom, alpha_rename, constants, predicates, show)
from ..logic.oracle import holds, infer_sorts

TYPES = ("int", "string", "date")


@dataclass(frozen=True)
class BoundParams:
    """Fresh values per type on top of the problem's constants."""
    int_pool: int = 3
    string_pool: int = 3
    date_pool: int = 3
    max_tuples: int | None = None  # per relation; None = limited by the domain only
    time_budget: float | None = 60.0

    def __post_init__(self):
        for n in (self.int_pool, self.string_pool, self.date_pool):
            if n < 1:
                raise ValueError("bounds must be at least 1")
        if self.max_tuples is not None and self.max_tuples < 1:
            raise ValueError("bounds must be at least 1")

    @classmethod
    def uniform(cls, b, time_budget=60.0, max_tuples=None):
        return cls(b, b, b, max_tuples, time_budget)

    def pool(self, typ) -> int:
        return {"int": self.int_pool, "string": self.string_pool, "date": self.date_pool}[typ]

    @property
    def bound(self) -> int:
        return max(self.int_pool, self.string_pool, self.date_pool)


# ------------------------------------------------------------ verdicts

@dataclass(frozen=True)
class Satisfiable:
    witness: Database
    fresh: int = 0  # fresh values per type needed

    sat = True


@dataclass(frozen=True)
class UnsatisfiableUpTo:
    bound: int

    sat = False


@dataclass(frozen=True)
class ExternallyProvedUnsat:
    evidence: str

    sat = False


@dataclass(frozen=True)
class Timeout:
    elapsed: float
    completed: int = -1  # largest fresh count fully searched

    sat = None


class _Expired(Exception):
    pass


# ------------------------------------------------------------ domains

def fresh_values(typ, consts, n) -> list:
    """First `n` fresh values of a type. For ordered types they are spread
    round-robin over the gaps cut out by the constants (below the smallest,
    between neighbours, above the largest), so comparisons against
    constants can be satisfied on either side. Prefix-stable in `n`."""
    consts = sorted(set(consts))
    taken = set(consts)
    if typ == "string":
        out, i = [], 0
        while len(out) < n:
            s = f"c{i}"
            i += 1
            if s not in taken:
                out.append(s)
        return out
    one = 1 if typ == "int" else datetime.timedelta(days=1)
    if not consts:
        base = 0 if typ == "int" else datetime.date(2000, 1, 1)
        return [base + one * i for i in range(n)]
    gaps = []  # generators of candidate values per gap
    gaps.append(("down", consts[0]))
    for lo, hi in zip(consts, consts[1:]):
        gaps.append(("between", lo, hi))
    gaps.append(("up", consts[-1]))
    cursors = {}
    out = []
    exhausted = set()
    while len(out) < n and len(exhausted) < len(gaps):
        for gi, g in enumerate(gaps):
            if len(out) >= n:
                break
            if gi in exhausted:
                continue
            k = cursors.get(gi, 0) + 1
            cursors[gi] = k
            try:
                if g[0] == "down":
                    v = g[1] - one * k
                elif g[0] == "up":
                    v = g[1] + one * k
                else:
                    v = g[1] + one * k
                    if v >= g[2]:
                        exhausted.add(gi)
                        continue
            except OverflowError:
                exhausted.add(gi)
                continue
            out.append(v)
    return out


def _key(v):
    return (type_of(v), v)


class Problem:
    """A satisfiability question: `sentence` true, every constraint false."""

    def __init__(self, sentence, schema: Schema, constraints=(), max_tuples=None):
        self.max_tuples = max_tuples
        if sentence.free:
            raise ValueError(f"sentence has free variables {sorted(sentence.free)}")
        # sorts are inferred per variable name, so bound names must be distinct
        self.sentence = alpha_rename(sentence)
        self.constraints = tuple(alpha_rename(c) for c in constraints)
        for c in self.constraints:
            if c.free:
                raise ValueError(f"constraint has free variables {sorted(c.free)}")
        self.schema = schema
        rels = list(schema.sources) + ([schema.view] if schema.view is not None else [])
        self.relations = {r.name: r.types for r in rels}
        for f in (self.sentence,) + self.constraints:
            for p in predicates(f):
                if p not in self.relations:
                    raise ValueError(f"predicate {p} is not in the schema")
        self.sorts = [infer_sorts(f, self.relations.get) for f in (self.sentence,) + self.constraints]
        cs = set(constants(sentence))
        for c in self.constraints:
            cs |= constants(c)
        self.consts = {t: sorted(v for v in cs if type_of(v) == t) for t in TYPES}
        used = {t for types in self.relations.values() for t in types}
        used |= {type_of(v) for v in cs}
        self.types = [t for t in TYPES if t in used]

    def pools(self, fresh: dict) -> dict:
        return {t: self.consts[t] + fresh_values(t, self.consts[t], fresh.get(t, 0))
                for t in self.types}

    def domain(self, db: Database) -> list:
        vals = set(db.values())
        for t in self.types:
            vals |= set(self.consts[t])
        return sorted(vals, key=_key)

    def check(self, db: Database) -> bool:
        """Independent check of a candidate model with the brute-force evaluator."""
        dom = self.domain(db)
        if not holds(self.sentence, db, domain=dom, sorts=self.sorts[0]):
            return False
        return not any(holds(c, db, domain=dom, sorts=s)
                       for c, s in zip(self.constraints, self.sorts[1:]))


# ------------------------------------------------------------ grounding

class _Encoder:
    def __init__(self, problem: Problem, pools: dict, deadline=None):
        self.problem = problem
        self.pools = pools
        self.deadline = deadline
        self.nvars = 0
        self.clauses = []
        self.atoms = {}  # (pred, tuple) -> var
        self.memo = {}
        self.gate_memo = {}
        self.const_set = {v for t in problem.types for v in problem.consts[t]}
        self.all_values = sorted({v for vs in pools.values() for v in vs}, key=_key)
        for name in sorted(problem.relations):
            cols = [pools.get(t, []) for t in problem.relations[name]]
            for tup in itertools.product(*cols):
                self.atoms[(name, tup)] = self._new()
        self.adom = {}
        containing = {}
        for (name, tup), var in self.atoms.items():
            for v in set(tup):
                containing.setdefault((type_of(v), v), []).append(var)
        for v in self.all_values:
            if v in self.const_set:
                self.adom[_key(v)] = True
            else:
                self.adom[_key(v)] = self.or_(containing.get(_key(v), []))
        self.cand = {t: pools.get(t, []) for t in problem.types}

    def _new(self):
        self.nvars += 1
        return self.nvars

    def _tick(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Expired()

    def and_(self, lits):
        out = []
        for l in lits:
            if l is False:
                return False
            if l is True:
                continue
            out.append(l)
        out = sorted(set(out))
        if not out:
            return True
        if len(out) == 1:
            return out[0]
        if any(-l in out for l in out):
            return False
        key = ("and", tuple(out))
        if key in self.gate_memo:
            return self.gate_memo[key]
        y = self._new()
        for l in out:
            self.clauses.append([-y, l])
        self.clauses.append([y] + [-l for l in out])
        self.gate_memo[key] = y
        return y

    def or_(self, lits):
        out = []
        for l in lits:
            if l is True:
                return True
            if l is False:
                continue
            out.append(l)
        out = sorted(set(out))
        if not out:
            return False
        if len(out) == 1:
            return out[0]
        key = ("or", tuple(out))
        if key in self.gate_memo:
            return self.gate_memo[key]
        y = self._new()
        for l in out:
            self.clauses.append([y, -l])
        self.clauses.append([-y] + out)
        self.gate_memo[key] = y
        return y

    @staticmethod
    def not_(l):
        if l is True:
            return False
        if l is False:
            return True
        return -l

    def ground(self, f, sorts, env=None):
        return self._g(f, sorts, env or {})

    def _g(self, f, sorts, env):
        key = (id(f), tuple(sorted((v, _key(env[v])) for v in f.free)))
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        self._tick()
        r = self._compute(f, sorts, env)
        self.memo[key] = (f, r)  # keep f alive so its id stays unique
        return r

    def _val(self, t, env):
        return t.value if isinstance(t, Const) else env[t.name]

    def _compute(self, f, sorts, env):
        if isinstance(f, RelAtom):
            tup = tuple(self._val(t, env) for t in f.terms)
            return self.atoms.get((f.pred, tup), False)
        if isinstance(f, Equality):
            a, b = self._val(f.left, env), self._val(f.right, env)
            return type(a) is type(b) and a == b
        if isinstance(f, Comparison):
            a, b = self._val(f.left, env), self._val(f.right, env)
            if type(a) is not type(b):
                return False
            return a < b if f.op == "<" else a > b
        if isinstance(f, Not):
            return self.not_(self._g(f.body, sorts, env))
        if isinstance(f, And):
            out = []
            for p in f.parts:
                l = self._g(p, sorts, env)
                if l is False:
                    return False
                out.append(l)
            return self.and_(out)
        if isinstance(f, Or):
            out = []
            for p in f.parts:
                l = self._g(p, sorts, env)
                if l is True:
                    return True
                out.append(l)
            return self.or_(out)
        if isinstance(f, Implies):
            return self.or_([self.not_(self._g(f.left, sorts, env)), self._g(f.right, sorts, env)])
        if isinstance(f, (Exists, Forall)):
            pools = []
            for v in f.vars:
                t = sorts.get(v)
                pools.append(self.cand[t] if t is not None and t in self.cand else self.all_values)
            out = []
            inner = dict(env)
            for combo in itertools.product(*pools):
                inner.update(zip(f.vars, combo))
                guard = self.and_([self.adom[_key(c)] for c in combo])
                body = self._g(f.body, sorts, inner)
                if isinstance(f, Exists):
                    l = self.and_([guard, body])
                    if l is True:
                        return True
                else:
                    l = self.or_([self.not_(guard), body])
                    if l is False:
                        return False
                out.append(l)
            return self.or_(out) if isinstance(f, Exists) else self.and_(out)
        raise TypeError(f)

    def decode(self, model) -> Database:
        true = {v for v in model if v > 0}
        rels = {}
        for (name, tup), var in self.atoms.items():
            if var in true:
                rels.setdefault(name, set()).add(tup)
        return Database(rels)


# ------------------------------------------------------------ search

def _solve(problem: Problem, fresh: dict, deadline):
    enc = _Encoder(problem, problem.pools(fresh), deadline)
    top = enc.ground(problem.sentence, problem.sorts[0])
    units = [top]
    for c, s in zip(problem.constraints, problem.sorts[1:]):
        units.append(enc.not_(enc.ground(c, s)))
    if any(u is False for u in units):
        return None, enc, None
    clauses = list(enc.clauses) + [[u] for u in units if u is not True]
    max_tuples = problem.max_tuples
    if max_tuples is not None:
        for name in sorted(problem.relations):
            lits = [v for (n, _), v in enc.atoms.items() if n == name]
            if len(lits) > max_tuples:
                card = CardEnc.atmost(lits, bound=max_tuples, top_id=enc.nvars,
                                      encoding=EncType.seqcounter)
                enc.nvars = max(enc.nvars, card.nv)
                clauses.extend(card.clauses)
    solver = Solver(name="m22", bootstrap_with=clauses)
    timer = None
    if deadline is not None:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            solver.delete()
            raise _Expired()
        timer = threading.Timer(remaining, solver.interrupt)
        timer.start()
    try:
        ok = solver.solve_limited(expect_interrupt=deadline is not None)
        if ok is None:
            raise _Expired()
        if not ok:
            return None, enc, None
        model = solver.get_model()
        model = _minimize(solver, enc, model, deadline)
        return model, enc, solver
    finally:
        if timer is not None:
            timer.cancel()
        solver.delete()


def _minimize(solver, enc, model, deadline):
    """Greedily turn stored tuples off while the problem stays satisfiable."""
    order = sorted(enc.atoms.items(), key=lambda kv: (kv[0][0], tuple_key(kv[0][1])))
    off = []
    current = set(v for v in model if v > 0)
    for (_, _), var in order:
        if var not in current:
            off.append(-var)
            continue
        if deadline is not None and time.monotonic() > deadline:
            break
        ok = solver.solve_limited(assumptions=off + [-var], expect_interrupt=deadline is not None)
        if ok:
            model = solver.get_model()
            current = set(v for v in model if v > 0)
            off.append(-var)
        elif ok is None:
            break
    return model


def bounded_sat_under_constraints(sentence, constraints, schema: Schema, b: BoundParams = None):
    """Search for a finite database in which `sentence` holds and every
    constraint sentence is false."""
    b = b or BoundParams()
    problem = Problem(sentence, schema, constraints, b.max_tuples)
    start = time.monotonic()
    deadline = start + b.time_budget if b.time_budget is not None else None
    completed = -1
    try:
        for n in range(0, b.bound + 1):
            fresh = {t: min(n, b.pool(t)) for t in problem.types}
            model, enc, _ = _solve(problem, fresh, deadline)
            if model is not None:
                witness = enc.decode(model)
                if not problem.check(witness):
                    raise AssertionError(
                        f"bounded search produced a witness the evaluator rejects: {show(sentence)}")
                return Satisfiable(witness, n)
            completed = n
    except _Expired:
        return Timeout(time.monotonic() - start, completed)
    return UnsatisfiableUpTo(b.bound)


def bounded_sat(sentence, schema: Schema, b: BoundParams = None):
    return bounded_sat_under_constraints(sentence, (), schema, b)

"""Per-seed equivalence checks of the logic kernel against the brute-force
evaluator. Each returns the names of the transforms that disagreed."""

import random

from generators import SCHEMA, random_db, random_formula, random_program
from putback.engine import evaluate
from putback.logic import (answers, datalog_to_fo, eliminate_atom_constants, is_ranf, is_srnf,
                           ranf_to_datalog, to_ranf, to_srnf)


def program_seed(seed):
    rng = random.Random(seed)
    p = random_program(rng)
    d = random_db(rng)
    idb = evaluate(p, d)
    bad = []
    for pred in p.idb():
        f = datalog_to_fo(p, pred)
        order = [f"X{i + 1}" for i in range(p.arity(pred))]
        if answers(f, d, order) != idb[pred]:
            bad.append("datalog_to_fo")
    p2 = p.with_rules([eliminate_atom_constants(r) for r in p.rules])
    if evaluate(p2, d) != idb:
        bad.append("eliminate_atom_constants")
    return bad


def formula_seed(seed, depth=4):
    rng = random.Random(seed)
    free = ["x", "y"][:rng.randint(0, 2)]
    f = random_formula(rng, free, depth)
    d = random_db(rng)
    order = sorted(f.free)
    ref = answers(f, d, order)
    bad = []
    s = to_srnf(f)
    if not is_srnf(s) or answers(s, d, order) != ref:
        bad.append("to_srnf")
    r = to_ranf(s)
    if not is_ranf(r) or answers(r, d, order) != ref:
        bad.append("to_ranf")
    q, goal = ranf_to_datalog(r, "G", order, SCHEMA)
    rel = evaluate(q, d)[goal]
    got = rel if order else (frozenset({()}) if rel else frozenset())
    if got != ref:
        bad.append("ranf_to_datalog")
    return bad

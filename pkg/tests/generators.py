"""Random programs, formulas and databases for the equivalence suites."""

import itertools

from putback.datalog import (ANON, Atom, Cmp, Const, Eq, Neg, Pos, Program, Relation, Rule,
                             Schema, Var)
from putback.engine import Database
from putback.logic.formula import (And, Comparison, Equality, Exists, Forall, Implies, Not, Or,
                                   RelAtom)

SOURCES = (Relation("r", (("a", "int"),)),
           Relation("s", (("a", "int"), ("b", "int"))),
           Relation("t", (("a", "int"), ("b", "int"))))
SCHEMA = Schema(SOURCES, None)
ARITY = {r.name: r.arity for r in SOURCES}
VALUES = (0, 1, 2)


def random_db(rng, values=VALUES, density=0.4, relations=SOURCES):
    rels = {}
    for rel in relations:
        tuples = itertools.product(values, repeat=rel.arity)
        rels[rel.name] = [t for t in tuples if rng.random() < density]
    return Database(rels)


# ------------------------------------------------------------ programs

def _atom(rng, pred, arity, names, bound, const_p=0.15, anon_p=0.0):
    args = []
    for _ in range(arity):
        x = rng.random()
        if x < const_p:
            args.append(Const(rng.choice(VALUES)))
        elif x < const_p + anon_p:
            args.append(ANON)
        else:
            pool = sorted(bound) if bound is not None else names
            args.append(Var(rng.choice(pool)))
    return Atom(pred, tuple(args))


def random_rule(rng, head_pred, head_arity, preds):
    names = ["X", "Y", "Z", "W"]
    body, bound = [], set()
    for _ in range(rng.randint(1, 2)):
        pred = rng.choice(sorted(preds))
        a = _atom(rng, pred, preds[pred], names, None)
        body.append(Pos(a))
        bound |= set(a.vars)
    if not bound:
        a = Atom("r", (Var("X"),))
        body.append(Pos(a))
        bound.add("X")
    if rng.random() < 0.5:
        pred = rng.choice(sorted(preds))
        body.append(Neg(_atom(rng, pred, preds[pred], names, bound, anon_p=0.2)))
    x = rng.random()
    bl = sorted(bound)
    if x < 0.15:
        body.append(Cmp(rng.choice("<>"), Var(rng.choice(bl)), Const(rng.choice(VALUES)),
                        rng.random() < 0.3))
    elif x < 0.3:
        body.append(Eq(Var(rng.choice(bl)), Var(rng.choice(bl)), rng.random() < 0.5))
    elif x < 0.45:
        fresh = next(n for n in ["U", "V", "Q"] if n not in bound)
        body.append(Eq(Var(fresh), Const(rng.choice(VALUES))))
        bound.add(fresh)
        bl = sorted(bound)
    head = []
    for _ in range(head_arity):
        if rng.random() < 0.1:
            head.append(Const(rng.choice(VALUES)))
        else:
            head.append(Var(rng.choice(bl)))
    return Rule(Atom(head_pred, tuple(head)), tuple(body))


def random_program(rng, n_preds=3):
    """Nonrecursive safe program over r/s/t with IDB predicates p1..pn."""
    preds = dict(ARITY)
    rules = []
    for i in range(1, n_preds + 1):
        name = f"p{i}"
        arity = rng.randint(1, 2)
        for _ in range(rng.randint(1, 2)):
            rules.append(random_rule(rng, name, arity, preds))
        preds[name] = arity
    return Program(SCHEMA, tuple(rules))


# ------------------------------------------------------------ formulas

def _cover_atom(rng, want):
    """Atom (under ∃ for extra positions) whose free variables are `want`."""
    want = list(want)
    fitting = [p for p, k in ARITY.items() if k >= len(want)]
    pred = rng.choice(fitting)
    k = ARITY[pred]
    slots = list(want) + [None] * (k - len(want))
    rng.shuffle(slots)
    terms, extra = [], []
    for i, s in enumerate(slots):
        if s is not None:
            terms.append(Var(s))
        elif rng.random() < 0.3:
            terms.append(Const(rng.choice(VALUES)))
        elif want and rng.random() < 0.3:
            terms.append(Var(rng.choice(want)))
        else:
            name = f"e{rng.randint(0, 99)}"
            while name in want or name in extra:
                name = f"e{rng.randint(0, 99)}"
            extra.append(name)
            terms.append(Var(name))
    atom = RelAtom(pred, tuple(terms))
    return Exists(tuple(extra), atom) if extra else atom


def random_formula(rng, free=("x",), depth=2):
    """Safe-range formula whose free variables are exactly `free` (at most 2)."""
    free = list(free)
    if depth <= 0 or rng.random() < 0.1:
        return _cover_atom(rng, free)
    choice = rng.randrange(8)
    if choice == 0:
        return And((random_formula(rng, free, depth - 1),
                    Not(random_formula(rng, rng.sample(free, rng.randint(0, len(free))),
                                       depth - 1))))
    if choice == 1:
        return Or((random_formula(rng, free, depth - 1), random_formula(rng, free, depth - 1)))
    if choice == 2 and len(free) == 2:
        a, b = free
        return And((random_formula(rng, [a], depth - 1), random_formula(rng, [b], depth - 1)))
    if choice == 3 and free:
        x = rng.choice(free)
        cond = (Comparison(rng.choice("<>"), Var(x), Const(rng.choice(VALUES)))
                if rng.random() < 0.6 else Equality(Var(x), Const(rng.choice(VALUES))))
        if rng.random() < 0.3:
            cond = Not(cond)
        return And((random_formula(rng, free, depth - 1), cond))
    if choice == 4 and len(free) < 2:
        y = "y" if "y" not in free else "z"
        inner = random_formula(rng, free + [y], depth - 1)
        return Exists((y,), inner)
    if choice == 5 and len(free) == 2:
        a, b = free
        eq = Equality(Var(b), Var(a))
        if rng.random() < 0.3:
            return And((random_formula(rng, free, depth - 1), Not(eq)))
        return And((random_formula(rng, [a], depth - 1), eq))
    if choice == 6 and len(free) <= 1:
        y = "w"
        ante = random_formula(rng, free + [y], depth - 1)
        cons = random_formula(rng, [y], depth - 1)
        base = random_formula(rng, free, depth - 1) if free else _cover_atom(rng, [])
        return And((base, Forall((y,), Implies(ante, cons))))
    if choice == 7:
        return Not(Not(random_formula(rng, free, depth - 1)))
    return _cover_atom(rng, free)


def random_sentence(rng, depth=2):
    """Closed formula, not necessarily safe-range."""
    f = random_formula(rng, ["x"], depth)
    return Exists(("x",), f) if rng.random() < 0.7 else Forall(("x",), Implies(
        _cover_atom(rng, ["x"]), f))

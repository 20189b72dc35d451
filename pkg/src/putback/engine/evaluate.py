"""Stratified bottom-up evaluation of nonrecursive Datalog with negation."""

from __future__ import annotations

import operator

from ..datalog.analysis import evaluation_order
from ..datalog.syntax import Anon, Const, Eq, Neg, Pos, Program, ProgramError, Var
from .database import Database

BOTTOM = "_|_"

_OPS = {"<": operator.lt, ">": operator.gt}


def _value(term, binding):
    return term.value if isinstance(term, Const) else binding[term.name]


def _ready(term, binding):
    return isinstance(term, Const) or term.name in binding


def _builtin_holds(lit, binding):
    a, b = _value(lit.left, binding), _value(lit.right, binding)
    if isinstance(lit, Eq):
        ok = a == b and type(a) is type(b)
    else:
        if type(a) is not type(b):
            raise ProgramError(f"cannot compare {a!r} and {b!r} in {lit}")
        ok = _OPS[lit.op](a, b)
    return ok != lit.negated


def _join(bindings, atom, tuples):
    """Extend each binding with every matching tuple of the relation."""
    if not bindings:
        return []
    sample = bindings[0]
    key_pos, new_pos, const_checks, repeat_checks = [], [], [], []
    first_new = {}
    for i, t in enumerate(atom.args):
        if isinstance(t, Const):
            const_checks.append((i, t.value))
        elif isinstance(t, Var):
            if t.name in sample:
                key_pos.append((i, t.name))
            elif t.name in first_new:
                repeat_checks.append((i, first_new[t.name]))
            else:
                first_new[t.name] = i
                new_pos.append((i, t.name))
    index = {}
    for tup in tuples:
        if any(tup[i] != c or type(tup[i]) is not type(c) for i, c in const_checks):
            continue
        if any(tup[i] != tup[j] for i, j in repeat_checks):
            continue
        index.setdefault(tuple(tup[i] for i, _ in key_pos), []).append(tup)
    out = []
    for b in bindings:
        for tup in index.get(tuple(b[n] for _, n in key_pos), ()):
            nb = dict(b)
            for i, n in new_pos:
                nb[n] = tup[i]
            out.append(nb)
    return out


def _negation_holds(atom, binding, tuples, cache):
    """True when no tuple matches the atom under the binding (`_` matches anything)."""
    positions = tuple(i for i, t in enumerate(atom.args) if not isinstance(t, Anon))
    key = (atom.pred, positions)
    proj = cache.get(key)
    if proj is None:
        proj = cache[key] = {tuple(t[i] for i in positions) for t in tuples}
    probe = tuple(_value(atom.args[i], binding) for i in positions)
    return probe not in proj


def eval_rule(rule, lookup, cache=None):
    """All bindings satisfying the rule body. `lookup(pred)` gives a tuple set."""
    cache = {} if cache is None else cache
    pending = list(rule.body)
    bindings = [{}]
    progress = True
    while pending and bindings and progress:
        progress = False
        # filters and binding equalities first, then the next positive atom
        for lit in list(pending):
            if isinstance(lit, Pos):
                continue
            if isinstance(lit, Neg):
                if all(_ready(t, bindings[0]) for t in lit.atom.args if not isinstance(t, Anon)):
                    rel = lookup(lit.atom.pred)
                    bindings = [b for b in bindings if _negation_holds(lit.atom, b, rel, cache)]
                    pending.remove(lit)
                    progress = True
            elif _ready(lit.left, bindings[0]) and _ready(lit.right, bindings[0]):
                bindings = [b for b in bindings if _builtin_holds(lit, b)]
                pending.remove(lit)
                progress = True
            elif isinstance(lit, Eq) and not lit.negated:
                known, unknown = (lit.left, lit.right) if _ready(lit.left, bindings[0]) else (lit.right, lit.left)
                if _ready(known, bindings[0]):
                    bindings = [dict(b, **{unknown.name: _value(known, b)}) for b in bindings]
                    pending.remove(lit)
                    progress = True
            if not bindings:
                return []
        if progress:
            continue
        for lit in pending:
            if isinstance(lit, Pos):
                bindings = _join(bindings, lit.atom, lookup(lit.atom.pred))
                pending.remove(lit)
                progress = True
                break
    if pending and bindings:
        raise ProgramError(f"unsafe rule: cannot evaluate {', '.join(map(str, pending))}", rule.line)
    return bindings


def head_tuple(head, binding):
    return tuple(_value(t, binding) for t in head.args)


def evaluate(p: Program, edb: Database) -> Database:
    """All IDB relations of `p` over `edb`; fired constraints yield `_|_`."""
    results = {}

    def lookup(pred):
        if pred in results:
            return results[pred]
        return edb[pred]

    for pred in evaluation_order(p):
        out = set()
        cache = {}
        for rule in p.rules_for(pred):
            for b in eval_rule(rule, lookup, cache):
                out.add(head_tuple(rule.head, b))
        results[pred] = frozenset(out)
    for rule in p.constraints:
        if eval_rule(rule, lookup):
            results[BOTTOM] = frozenset({()})
            break
    return Database(results)


def constraint_violations(p: Program, edb: Database, idb: Database | None = None) -> list:
    """(rule, binding) pairs for every constraint body satisfied over edb+idb."""
    idb = evaluate(p.with_rules(p.proper_rules), edb) if idb is None else idb

    def lookup(pred):
        return idb[pred] if pred in idb else edb[pred]

    out = []
    for rule in p.constraints:
        bindings = eval_rule(rule, lookup)
        if bindings:
            out.append((rule, sorted(bindings, key=lambda b: sorted(b.items(), key=str))))
    return out

"""Incremental putback programs driven by view deltas (+v, -v)."""

from __future__ import annotations

from ..datalog.analysis import evaluation_order, is_lvgn
from ..datalog.syntax import (ANON, Anon, Atom, Const, Eq, Kind, Neg, Pos, Program, Rule,
                              Var, is_builtin)
from ..engine.database import ContradictoryDelta, Database, DeltaSet, apply_delta
from ..engine.evaluate import constraint_violations, evaluate
from ..engine.put import ConstraintViolation, source_delta


class IncrementalizationError(ValueError):
    pass


# ------------------------------------------------------------ helpers

def _atom_vars(atom):
    return [t.name for t in atom.args if isinstance(t, Var)]


def _lit_vars(lit):
    if isinstance(lit, (Pos, Neg)):
        return _atom_vars(lit.atom)
    return [t.name for t in (lit.left, lit.right) if isinstance(t, Var)]


def _relational(body):
    return [l for l in body if isinstance(l, (Pos, Neg))]


def _builtins(body):
    return [l for l in body if is_builtin(l)]


class _Names:
    def __init__(self, used):
        self.used = set(used)

    def pred(self, base):
        base = base.replace("+", "ins_").replace("-", "del_")
        k = 1
        while f"{base}_t{k}" in self.used:
            k += 1
        name = f"{base}_t{k}"
        self.used.add(name)
        return name

    def var(self, base="Y"):
        k = 1
        while f"{base}{k}" in self.used:
            k += 1
        name = f"{base}{k}"
        self.used.add(name)
        return name

    def exact(self, name):
        base, k = name, 1
        while name in self.used:
            name = f"{base}_{k}"
            k += 1
        self.used.add(name)
        return name


def _binding_closure(avail, builtins):
    """Variables made available by binding equalities."""
    avail = set(avail)
    changed = True
    while changed:
        changed = False
        for b in builtins:
            if isinstance(b, Eq) and not b.negated:
                l, r = b.left, b.right
                for a, c in ((l, r), (r, l)):
                    if isinstance(a, Var) and a.name not in avail and (
                            isinstance(c, Const) or (isinstance(c, Var) and c.name in avail)):
                        avail.add(a.name)
                        changed = True
    return avail


# ------------------------------------------------------------ two-predicate form

def _chain(head: Atom, body, names: _Names):
    """Rules computing `head` from `body`, each with at most two relations:
    positive atoms are joined left to right, negated atoms are then
    subtracted one at a time, and the head variables are projected last."""
    pos = [l for l in body if isinstance(l, Pos)]
    negs = [l for l in body if isinstance(l, Neg)]
    pending = _builtins(body)
    if not pos:
        return [Rule(head, tuple(body))]
    out = []
    # anonymous variables: in positive atoms they are projected away at the
    # end; a negated atom with anonymous positions gets its own projection
    literals = []
    for l in pos:
        args = tuple(Var(names.var("A")) if isinstance(t, Anon) else t for t in l.atom.args)
        literals.append(Pos(Atom(l.atom.pred, args)))
    for l in negs:
        if any(isinstance(t, Anon) for t in l.atom.args):
            full = tuple(Var(names.var("A")) if isinstance(t, Anon) else t for t in l.atom.args)
            kept = tuple(dict.fromkeys(t for t in l.atom.args if isinstance(t, Var)))
            q = names.pred(l.atom.pred)
            out.append(Rule(Atom(q, kept), (Pos(Atom(l.atom.pred, full)),)))
            literals.append(Neg(Atom(q, kept)))
        else:
            literals.append(l)
    head_vars = set(_atom_vars(head))

    def attach(avail):
        got = []
        progress = True
        while progress:
            progress = False
            for b in list(pending):
                closed = _binding_closure(avail, [b])
                if set(_lit_vars(b)) <= closed:
                    got.append(b)
                    pending.remove(b)
                    avail = closed
                    progress = True
        return got, avail

    def result_vars(body, avail):
        vs = []
        for l in body:
            if isinstance(l, Pos):
                vs += _atom_vars(l.atom)
        vs += sorted(avail - set(vs))
        return list(dict.fromkeys(vs))

    cur = literals[0]
    avail = set(_atom_vars(cur.atom))
    steps = literals[1:]
    if not steps:
        got, avail = attach(avail)
        got += pending
        if avail == head_vars:
            return out + [Rule(head, (cur,) + tuple(got))]
        if got or not _plain_head(cur.atom):
            vs = result_vars([cur], avail)
            t = Atom(names.pred(head.pred), tuple(Var(v) for v in vs))
            out.append(Rule(t, (cur,) + tuple(got)))
            cur = Pos(t)
        return out + [Rule(head, (cur,))]
    for i, lit in enumerate(steps):
        if isinstance(lit, Pos):
            avail |= set(_atom_vars(lit.atom))
        got, avail = attach(avail)
        last = i == len(steps) - 1
        if last:
            got += pending
        body = (cur, lit) + tuple(got)
        if last and avail == head_vars:
            return out + [Rule(head, body)]
        vs = result_vars([cur, lit], avail)
        t = Atom(names.pred(head.pred), tuple(Var(v) for v in vs))
        out.append(Rule(t, body))
        cur = Pos(t)
    return out + [Rule(head, (cur,))]


def _normalize_head(rule: Rule, names: _Names):
    """Heads with constants or repeated variables get fresh variables and equalities."""
    args, extra, seen = [], [], set()
    for t in rule.head.args:
        if isinstance(t, Const) or (isinstance(t, Var) and t.name in seen):
            v = Var(names.var("H"))
            extra.append(Eq(v, t))
            args.append(v)
        else:
            seen.add(t.name)
            args.append(t)
    return Rule(Atom(rule.head.pred, tuple(args)), tuple(rule.body) + tuple(extra), rule.line)


def _rename_rule(rule: Rule, mapping):
    def t(x):
        return Var(mapping[x.name]) if isinstance(x, Var) and x.name in mapping else x

    def lit(l):
        if isinstance(l, (Pos, Neg)):
            return type(l)(Atom(l.atom.pred, tuple(t(a) for a in l.atom.args)))
        return type(l)(**{**l.__dict__, "left": t(l.left), "right": t(l.right)})

    head = Atom(rule.head.pred, tuple(t(a) for a in rule.head.args)) if rule.head else None
    return Rule(head, tuple(lit(l) for l in rule.body), rule.line)


def _is_schema_rule(rule: Rule):
    rel = _relational(rule.body)
    return len(rel) <= 2


def to_two_predicate_form(p: Program, only=None) -> Program:
    """Equivalent program whose rule bodies mention at most two relations and
    whose predicates each match one incrementalization schema (join and
    selection, negation, projection, or a union of two predicates).
    `only` limits the rewrite to the given predicates."""
    used = set(p.predicates())
    for r in p.rules:
        used |= set(r.variables())
    names = _Names(used)
    out = []
    for pred in p.idb():
        rules = p.rules_for(pred)
        if only is not None and pred not in only:
            out += rules
            continue
        if len(rules) == 1:
            out += _single(rules[0], names)
            continue
        k = len(rules[0].head.args)
        hv = [names.var("X") for _ in range(k)]
        head = Atom(pred, tuple(Var(v) for v in hv))
        parts = []
        for r in rules:
            sub = names.pred(pred)
            renamed = _fresh_vars(r, names)
            out += _single(Rule(Atom(sub, renamed.head.args), renamed.body, r.line), names)
            parts.append(sub)
        out += _union(head, parts, names)
    out += list(p.constraints)
    return p.with_rules(out)


def _fresh_vars(rule, names):
    mapping = {v: names.var("Z") for v in rule.variables()}
    return _rename_rule(rule, mapping)


def _union(head, parts, names):
    """Binary union tree over the part predicates."""
    if len(parts) <= 2:
        return [Rule(head, (Pos(Atom(q, head.args)),)) for q in parts]
    rest = names.pred(head.pred)
    rest_head = Atom(rest, head.args)
    return [Rule(head, (Pos(Atom(parts[0], head.args)),)),
            Rule(head, (Pos(rest_head),))] + _union(rest_head, parts[1:], names)


def _single(rule, names):
    if rule.head is None:
        return [rule]
    if classify([rule]) is not None:
        return [rule]
    rule = _normalize_head(rule, names)
    return _chain(rule.head, rule.body, names)


# ------------------------------------------------------------ schemas

def classify(rules):
    """Which incrementalization schema a predicate's rules match, or None."""
    if len(rules) == 2:
        if all(_union_part(r) for r in rules):
            return "union"
        return None
    if len(rules) != 1:
        return None
    r = rules[0]
    if not _plain_head(r.head):
        return None
    pos = [l for l in r.body if isinstance(l, Pos)]
    negs = [l for l in r.body if isinstance(l, Neg)]
    bis = _builtins(r.body)
    if any(isinstance(t, Anon) for l in pos + negs for t in l.atom.args):
        return None
    head = set(_atom_vars(r.head))
    pos_vars = {v for l in pos for v in _atom_vars(l.atom)}
    avail = _binding_closure(pos_vars, bis)
    if any(not set(_lit_vars(b)) <= avail for b in bis):
        return None
    if not pos:
        return None
    if len(pos) == 1 and not negs and not bis and head < pos_vars:
        other = [t.name for t in pos[0].atom.args if isinstance(t, Var) and t.name not in head]
        if all(other.count(x) == 1 for x in other):
            return "projection"
        return None
    if head != avail:
        return None
    if len(pos) in (1, 2) and not negs:
        return "join"
    if len(pos) == 1 and len(negs) == 1 and set(_atom_vars(negs[0].atom)) <= avail:
        return "negation"
    return None


def _plain_head(head):
    names = [t.name for t in head.args if isinstance(t, Var)]
    return len(names) == len(head.args) and len(set(names)) == len(names)


def _union_part(rule):
    if not _plain_head(rule.head) or len(rule.body) != 1 or not isinstance(rule.body[0], Pos):
        return False
    a = rule.body[0].atom
    return (_plain_head(a) if a.args else True) and set(_atom_vars(a)) == set(_atom_vars(rule.head)) \
        and len(a.args) == len(rule.head.args)


_DELTAS = (Kind.DELTA_INSERT, Kind.DELTA_DELETE)


class _Inc:
    """Fig. 9 rule generation with old relations, new versions (suffix
    _new) and deltas (+h, -h). Relations that do not depend on the view
    keep their value: their deltas are empty and their new version is the
    relation itself."""

    def __init__(self, p: Program, view: str, changed: set, names: _Names, steady=True):
        self.p = p
        self.steady = steady
        self.view = view
        self.changed = changed
        self.names = names
        self.new = {}
        self.rules = {}

    def ins(self, pred):
        if pred == self.view:
            return "+" + pred
        if self.p.kind(pred) in (Kind.DELTA_INSERT, Kind.DELTA_DELETE):
            return f"+({pred})"
        return "+" + pred

    def dels(self, pred):
        if pred == self.view:
            return "-" + pred
        if self.p.kind(pred) in (Kind.DELTA_INSERT, Kind.DELTA_DELETE):
            return f"-({pred})"
        return "-" + pred

    def nu(self, pred):
        if pred not in self.changed:
            return pred
        if pred not in self.new:
            self.new[pred] = self.names.exact(pred.replace("+", "ins_").replace("-", "del_") + "_new")
        return self.new[pred]

    def _lit(self, lit, version):
        """Literal over the old relation, its new version, or a delta."""
        pred = lit.atom.pred
        if version == "old":
            return lit
        if version == "new":
            return type(lit)(Atom(self.nu(pred), lit.atom.args))
        if pred not in self.changed:
            return None  # empty delta
        name = self.ins(pred) if version == "+" else self.dels(pred)
        return Pos(Atom(name, lit.atom.args))

    def _emit(self, head_pred, head, parts):
        if any(x is None for x in parts):
            return
        # in a steady state the source deltas are empty
        kept = []
        for l in parts:
            if self.steady and isinstance(l, (Pos, Neg)) and self.p.kind(l.atom.pred) in _DELTAS:
                if isinstance(l, Pos):
                    return
                continue
            kept.append(l)
        parts = kept
        self.rules.setdefault(head_pred, []).append(Rule(Atom(head_pred, head.args), tuple(parts)))

    def input_rules(self, v):
        """New version of a changing input relation: (v minus -v) union +v."""
        k = self.p.arity(v)
        xs = tuple(Var(f"X{i + 1}") for i in range(k))
        new = self.nu(v)
        self.rules[new] = [Rule(Atom(new, xs), (Pos(Atom(v, xs)), Neg(Atom("-" + v, xs)))),
                           Rule(Atom(new, xs), (Pos(Atom("+" + v, xs)),))]

    def view_rules(self):
        self.input_rules(self.view)

    def derive(self, pred, only_insert=False):
        rules = self.p.rules_for(pred)
        shape = classify(rules)
        if shape is None:
            raise IncrementalizationError(f"rules for {pred} match no incrementalization schema")
        plus, minus, new = self.ins(pred), self.dels(pred), self.nu(pred)
        L = self._lit
        if shape == "union":
            (r1, r2) = rules
            r2 = _rename_rule(r2, dict(zip(_atom_vars(r2.head), _atom_vars(r1.head))))
            b1, b2 = r1.body[0], r2.body[0]
            head = r1.head
            self._emit(plus, head, [L(b1, "+")])
            self._emit(plus, head, [L(b2, "+")])
            if not only_insert:
                self._emit(minus, head, [L(b1, "-"), Neg(Atom(self.nu(b2.atom.pred), b2.atom.args))])
                self._emit(minus, head, [L(b2, "-"), Neg(Atom(self.nu(b1.atom.pred), b1.atom.args))])
                self._emit(new, head, [L(b1, "new")])
                self._emit(new, head, [L(b2, "new")])
            return
        r = rules[0]
        head = r.head
        pos = [l for l in r.body if isinstance(l, Pos)]
        negs = [l for l in r.body if isinstance(l, Neg)]
        bis = _builtins(r.body)
        if shape == "projection":
            a = pos[0]
            self._emit(plus, head, [L(a, "+"), Neg(head)])
            if not only_insert:
                hv = set(_atom_vars(head))
                pattern = tuple(t if not isinstance(t, Var) or t.name in hv else ANON
                                for t in a.atom.args)
                self._emit(minus, head, [L(a, "-"), Neg(Atom(self.nu(a.atom.pred), pattern))])
                self._emit(new, head, [L(a, "new")])
            return
        if shape == "join":
            if len(pos) == 1:
                (a,) = pos
                self._emit(plus, head, [L(a, "+")] + bis)
                if not only_insert:
                    self._emit(minus, head, [L(a, "-")] + bis)
                    self._emit(new, head, [L(a, "new")] + bis)
                return
            a, b = pos
            self._emit(plus, head, [L(a, "+"), L(b, "new")] + bis)
            self._emit(plus, head, [L(a, "new"), L(b, "+")] + bis)
            if not only_insert:
                self._emit(minus, head, [L(a, "-"), L(b, "old")] + bis)
                self._emit(minus, head, [L(a, "old"), L(b, "-")] + bis)
                self._emit(new, head, [L(a, "new"), L(b, "new")] + bis)
            return
        if shape == "negation":
            (a,), (n,) = pos, negs
            npos = Pos(n.atom)
            self._emit(plus, head, [L(a, "+"), Neg(Atom(self.nu(n.atom.pred), n.atom.args))] + bis)
            self._emit(plus, head, [L(a, "new"), L(npos, "-")] + bis)
            if not only_insert:
                self._emit(minus, head, [L(a, "-"), n] + bis)
                self._emit(minus, head, [L(a, "old"), L(npos, "+")] + bis)
                self._emit(new, head, [L(a, "new"), Neg(Atom(self.nu(n.atom.pred), n.atom.args))] + bis)
            return
        raise AssertionError(shape)


def schema_delta_rules(p: Program, pred: str, inputs) -> tuple:
    """Delta rules of one predicate whose rules match a schema, when the
    input relations `inputs` change by +a / -a. Returns (program, names)
    where names maps "+", "-" and "new" to the generated predicates."""
    inputs = list(inputs)
    used = set(p.predicates()) | {s + a for a in inputs for s in "+-"}
    inc = _Inc(p, None, set(inputs) | {pred}, _Names(used), steady=False)
    for a in inputs:
        inc.input_rules(a)
    inc.derive(pred)
    rules = [r for rs in inc.rules.values() for r in rs]
    return p.with_rules(rules), {"+": inc.ins(pred), "-": inc.dels(pred), "new": inc.nu(pred)}


def changed_predicates(p: Program, view: str) -> set:
    changed = {view}
    for pred in evaluation_order(p):
        if any(l.atom.pred in changed for r in p.rules_for(pred) for l in _relational(r.body)):
            changed.add(pred)
    return changed


def incrementalize_rules(p: Program, view: str | None = None) -> Program:
    """Delta rules for every predicate that depends on the view. Delta
    relations of the sources get only their insertion rule +(±r)."""
    view = view or p.view.name
    changed = changed_predicates(p, view)
    used = set(p.predicates()) | {"+" + view, "-" + view}
    names = _Names(used)
    inc = _Inc(p, view, changed, names)
    inc.view_rules()
    for pred in evaluation_order(p):
        if pred not in changed or pred == view:
            continue
        delta = p.kind(pred) in (Kind.DELTA_INSERT, Kind.DELTA_DELETE)
        inc.derive(pred, only_insert=delta)
    goals = [inc.ins(d) for d in p.idb() if d in changed and
             p.kind(d) in (Kind.DELTA_INSERT, Kind.DELTA_DELETE)]
    generated = [r for rs in inc.rules.values() for r in rs]
    originals = [r for r in p.proper_rules if p.kind(r.head.pred) not in _DELTAS]
    program = _prune(p, generated + originals, goals)
    return p.with_rules(program + list(p.constraints))


def _prune(p, rules, goals):
    by_head = {}
    for r in rules:
        by_head.setdefault(r.head.pred, []).append(r)
    keep, todo, seen = [], list(goals), set()
    while todo:
        pred = todo.pop()
        if pred in seen:
            continue
        seen.add(pred)
        for r in by_head.get(pred, []):
            keep.append(r)
            for l in _relational(r.body):
                todo.append(l.atom.pred)
    order = {id(r): i for i, r in enumerate(rules)}
    # generated rules come before the original ones in `rules`; present
    # originals first so that the output reads bottom-up
    kept_ids = {id(r) for r in keep}
    gen = [r for r in rules if id(r) in kept_ids]
    del order
    originals = [r for r in gen if r in p.proper_rules]
    others = [r for r in gen if r not in p.proper_rules]
    return originals + others


def _rename_heads(p: Program, mapping) -> Program:
    out = []
    for r in p.rules:
        head = Atom(mapping.get(r.head.pred, r.head.pred), r.head.args) if r.head else None
        body = tuple(type(l)(Atom(mapping.get(l.atom.pred, l.atom.pred), l.atom.args))
                     if isinstance(l, (Pos, Neg)) else l for l in r.body)
        out.append(Rule(head, body, r.line))
    return p.with_rules(out)


def incrementalize_put(putdelta: Program) -> Program:
    """Stratify, rewrite into two-predicate form, derive delta rules, then
    use the insertions into each source delta as the source delta itself."""
    view = putdelta.view.name
    changed = changed_predicates(putdelta, view)
    tpf = to_two_predicate_form(putdelta, only=changed)
    inc = incrementalize_rules(tpf, view)
    mapping = {}
    for d in putdelta.idb():
        if putdelta.kind(d) in (Kind.DELTA_INSERT, Kind.DELTA_DELETE):
            mapping[f"+({d})"] = d
    # rules of unchanged source deltas are dropped: their delta of delta is empty
    out = _rename_heads(inc, mapping)
    return out


def incrementalize_lvgn(putdelta: Program) -> Program:
    """Fast path for LVGN programs: in delta rules the view atom v(Y) becomes
    +v(Y) and the negated view atom becomes the positive atom -v(Y)."""
    verdict = is_lvgn(putdelta)
    if not verdict.ok:
        raise IncrementalizationError("not an LVGN program: " + "; ".join(verdict.reasons))
    view = putdelta.view.name
    out = []
    for r in putdelta.rules:
        if r.head is None or putdelta.kind(r.head.pred) not in (Kind.DELTA_INSERT, Kind.DELTA_DELETE):
            out.append(r)
            continue
        body = []
        for l in r.body:
            if isinstance(l, Pos) and l.atom.pred == view:
                body.append(Pos(Atom("+" + view, l.atom.args)))
            elif isinstance(l, Neg) and l.atom.pred == view:
                body.append(Pos(Atom("-" + view, l.atom.args)))
            else:
                body.append(l)
        out.append(Rule(r.head, tuple(body), r.line))
    # delta rules without a view atom cannot change under a view update
    mentioned = [r for r in out if r.head is None or
                 putdelta.kind(r.head.pred) not in (Kind.DELTA_INSERT, Kind.DELTA_DELETE) or
                 any(isinstance(l, (Pos, Neg)) and l.atom.pred in ("+" + view, "-" + view)
                     for l in r.body)]
    return putdelta.with_rules(mentioned)


def eval_incremental(dput: Program, s: Database, v: Database, dv: DeltaSet) -> Database:
    """Apply the incremental program to the steady state (S, V) and the view
    delta; constraints are checked on the updated view."""
    view = dput.view.name
    if dv.is_contradictory():
        raise ContradictoryDelta(dv.clashes())
    v = v.restrict([view])
    s = s.without([view])
    v_new = apply_delta(v, dv)
    edb_new = s | v_new
    violations = constraint_violations(dput.with_rules(dput.constraints), edb_new)
    if violations:
        raise ConstraintViolation(violations)
    edb = s | v | Database({"+" + view: dv.ins[view], "-" + view: dv.dels[view]})
    idb = evaluate(dput.with_rules(dput.proper_rules), edb)
    delta = source_delta(dput, idb)
    if delta.is_contradictory():
        raise ContradictoryDelta(delta.clashes())
    return apply_delta(s, delta)

"""The put semantics, the PutGet program construction and get evaluation."""

from __future__ import annotations

from ..datalog.syntax import Atom, Neg, Pos, Program, Rule, Schema, Var
from .database import ContradictoryDelta, Database, DeltaSet, apply_delta
from .evaluate import constraint_violations, evaluate


class ConstraintViolation(Exception):
    def __init__(self, violations):
        self.violations = violations
        lines = []
        for rule, bindings in violations:
            shown = "; ".join(", ".join(f"{k}={v!r}" for k, v in sorted(b.items())) for b in bindings[:3])
            lines.append(f"{rule}  [{shown}]")
        super().__init__("constraint violated: " + " | ".join(lines))


def source_delta(p: Program, idb: Database) -> DeltaSet:
    ins, dels = {}, {}
    for name in p.schema.source_names:
        ins[name] = idb["+" + name]
        dels[name] = idb["-" + name]
    return DeltaSet(ins, dels)


def putdelta(p: Program, s: Database, v: Database) -> DeltaSet:
    """Evaluate the strategy on (S, V) after checking every constraint."""
    edb = s | v
    idb = evaluate(p.with_rules(p.proper_rules), edb)
    violations = constraint_violations(p, edb, idb)
    if violations:
        raise ConstraintViolation(violations)
    return source_delta(p, idb)


def put(p: Program, s: Database, v: Database) -> Database:
    """S ⊕ putdelta(S, V). `v` holds the view relation under the view's name."""
    view = p.view.name
    v = v.restrict([view])
    s = s.without([view])
    delta = putdelta(p, s, v)
    if delta.is_contradictory():
        raise ContradictoryDelta(delta.clashes())
    return apply_delta(s, delta)


def get(get_program: Program, s: Database) -> Database:
    """View relation computed by a get program."""
    view = get_program.view.name
    return evaluate(get_program, s).restrict([view])


def _fresh_pred(base: str, used: set) -> str:
    name, k = base, 1
    while name in used:
        name = f"{base}_{k}"
        k += 1
    used.add(name)
    return name


def _rename_atom(atom, mapping):
    return Atom(mapping.get(atom.pred, atom.pred), atom.args)


def rename_predicates(rules, mapping) -> list:
    out = []
    for r in rules:
        head = _rename_atom(r.head, mapping) if r.head is not None else None
        body = tuple(type(l)(_rename_atom(l.atom, mapping)) if isinstance(l, (Pos, Neg)) else l
                     for l in r.body)
        out.append(Rule(head, body, r.line))
    return out


def build_putget_program(putdelta_program: Program, get_program: Program):
    """Program whose `new view` predicate computes get(put(S, V)).

    Returns (program, new view predicate name, renamings made to avoid
    collisions between the two programs' intermediate predicates)."""
    schema = putdelta_program.schema
    view = schema.view.name
    used = set(putdelta_program.predicates()) | set(schema.source_names) | {view}
    used |= {"+" + n for n in schema.source_names} | {"-" + n for n in schema.source_names}
    renamed = {}
    new_names = {}
    for rel in schema.sources:
        new_names[rel.name] = _fresh_pred(rel.name + "_new", used)
    view_new = _fresh_pred(view + "_new", used)
    rules = list(putdelta_program.proper_rules)
    for rel in schema.sources:
        xs = tuple(Var(f"X{i + 1}") for i in range(rel.arity))
        new_atom = Atom(new_names[rel.name], xs)
        if putdelta_program.defines("-" + rel.name):
            rules.append(Rule(new_atom, (Pos(Atom(rel.name, xs)), Neg(Atom("-" + rel.name, xs)))))
        else:
            rules.append(Rule(new_atom, (Pos(Atom(rel.name, xs)),)))
        if putdelta_program.defines("+" + rel.name):
            rules.append(Rule(new_atom, (Pos(Atom("+" + rel.name, xs)),)))
    mapping = dict(new_names)
    mapping[view] = view_new
    for pred in get_program.idb():
        if pred == view:
            continue
        if pred in used:
            fresh = _fresh_pred(pred, used)
            mapping[pred] = fresh
            renamed[pred] = fresh
        else:
            used.add(pred)
    rules.extend(rename_predicates(get_program.proper_rules, mapping))
    program = Program(Schema(schema.sources, schema.view), tuple(rules))
    return program, view_new, renamed

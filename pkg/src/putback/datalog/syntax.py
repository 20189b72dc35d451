"""Datalog AST: terms, atoms, literals, rules, schemas and programs."""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

TYPES = ("int", "string", "date")


class ProgramError(Exception):
    """Static error in a program (syntax, typing, arity, recursion...)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
        self.message = message


def type_of(value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not domain values")
    if isinstance(value, int):
        return "int"
    if isinstance(value, datetime.date):
        return "date"
    if isinstance(value, str):
        return "string"
    raise TypeError(f"unsupported value {value!r}")


def format_value(value) -> str:
    if isinstance(value, int):
        return str(value)
    if isinstance(value, datetime.date):
        return "'" + value.isoformat() + "'"
    return "'" + str(value).replace("'", "''") + "'"


def coerce_value(value, typ):
    """Convert a raw value (e.g. from CSV/JSON) to the given column type."""
    if typ == "int":
        if isinstance(value, bool):
            raise ValueError(f"not an int: {value!r}")
        return int(value)
    if typ == "date":
        if isinstance(value, datetime.date):
            return value
        return datetime.date.fromisoformat(str(value))
    if typ == "string":
        if not isinstance(value, str):
            raise ValueError(f"not a string: {value!r}")
        return value
    raise ValueError(f"unknown type {typ}")


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty variable name")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Anon:
    def __str__(self):
        return "_"


@dataclass(frozen=True)
class Const:
    value: object

    @property
    def type(self):
        return type_of(self.value)

    def __str__(self):
        return format_value(self.value)


ANON = Anon()


def term_vars(terms) -> list:
    return [t.name for t in terms if isinstance(t, Var)]


# ---------------------------------------------------------------- literals

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    def __str__(self):
        return f"{self.pred}({', '.join(map(str, self.args))})"

    @property
    def vars(self):
        return term_vars(self.args)


@dataclass(frozen=True)
class Pos:
    atom: Atom

    def __str__(self):
        return str(self.atom)


@dataclass(frozen=True)
class Neg:
    atom: Atom

    def __str__(self):
        return f"not {self.atom}"


@dataclass(frozen=True)
class Eq:
    left: object
    right: object
    negated: bool = False

    def __str__(self):
        s = f"{self.left} = {self.right}"
        return "not " + s if self.negated else s


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object
    negated: bool = False

    def __post_init__(self):
        if self.op not in ("<", ">"):
            raise ValueError(f"bad comparison operator {self.op}")

    def __str__(self):
        s = f"{self.left} {self.op} {self.right}"
        return "not " + s if self.negated else s


def literal_vars(lit) -> list:
    if isinstance(lit, (Pos, Neg)):
        return lit.atom.vars
    return term_vars((lit.left, lit.right))


def is_builtin(lit) -> bool:
    return isinstance(lit, (Eq, Cmp))


@dataclass(frozen=True)
class Rule:
    head: Optional[Atom]  # None is the constraint head (bottom)
    body: tuple
    line: Optional[int] = field(default=None, compare=False)

    @property
    def is_constraint(self):
        return self.head is None

    def __str__(self):
        head = "_|_" if self.head is None else str(self.head)
        return f"{head} :- {', '.join(map(str, self.body))}."

    def variables(self) -> list:
        seen = []
        if self.head is not None:
            seen.extend(self.head.vars)
        for lit in self.body:
            seen.extend(literal_vars(lit))
        return list(dict.fromkeys(seen))


# ---------------------------------------------------------------- schema

@dataclass(frozen=True)
class Relation:
    name: str
    attrs: tuple  # of (attr name, type)

    @property
    def arity(self):
        return len(self.attrs)

    @property
    def types(self):
        return tuple(t for _, t in self.attrs)

    @property
    def attr_names(self):
        return tuple(a for a, _ in self.attrs)

    def __str__(self):
        return f"{self.name}({', '.join(f'{a}:{t}' for a, t in self.attrs)})"


@dataclass(frozen=True)
class Schema:
    sources: tuple = ()
    view: Optional[Relation] = None

    def relation(self, name) -> Optional[Relation]:
        for r in self.sources:
            if r.name == name:
                return r
        if self.view is not None and self.view.name == name:
            return self.view
        return None

    @property
    def source_names(self):
        return tuple(r.name for r in self.sources)

    def with_relations(self, extra: Iterable[Relation]) -> "Schema":
        return Schema(self.sources + tuple(extra), self.view)


class Kind(Enum):
    SOURCE = "source"
    VIEW = "view"
    DELTA_INSERT = "delta-insert"
    DELTA_DELETE = "delta-delete"
    VIEW_INSERT = "view-insert"
    VIEW_DELETE = "view-delete"
    INTERMEDIATE = "intermediate"
    EXTERNAL = "external"
    BOTTOM = "bottom"


def ins(name):
    return "+" + name


def dels(name):
    return "-" + name


@dataclass(frozen=True)
class Program:
    schema: Schema
    rules: tuple

    @property
    def constraints(self):
        return tuple(r for r in self.rules if r.head is None)

    @property
    def proper_rules(self):
        return tuple(r for r in self.rules if r.head is not None)

    @property
    def view(self):
        return self.schema.view

    def idb(self) -> list:
        return list(dict.fromkeys(r.head.pred for r in self.proper_rules))

    def rules_for(self, pred) -> tuple:
        return tuple(r for r in self.proper_rules if r.head.pred == pred)

    def defines(self, pred) -> bool:
        return any(r.head.pred == pred for r in self.proper_rules)

    def kind(self, pred) -> Kind:
        schema = self.schema
        if pred in schema.source_names:
            return Kind.SOURCE
        if schema.view is not None and pred == schema.view.name:
            return Kind.VIEW
        if pred[:1] in "+-" and len(pred) > 1:
            base = pred[1:]
            if base in schema.source_names:
                return Kind.DELTA_INSERT if pred[0] == "+" else Kind.DELTA_DELETE
            if schema.view is not None and base == schema.view.name:
                return Kind.VIEW_INSERT if pred[0] == "+" else Kind.VIEW_DELETE
        if self.defines(pred):
            return Kind.INTERMEDIATE
        return Kind.EXTERNAL

    def predicates(self) -> list:
        names = []
        for r in self.rules:
            if r.head is not None:
                names.append(r.head.pred)
            for lit in r.body:
                if isinstance(lit, (Pos, Neg)):
                    names.append(lit.atom.pred)
        return list(dict.fromkeys(names))

    def arity(self, pred) -> int:
        rel = self.declared(pred)
        if rel is not None:
            return rel.arity
        for r in self.rules:
            if r.head is not None and r.head.pred == pred:
                return len(r.head.args)
            for lit in r.body:
                if isinstance(lit, (Pos, Neg)) and lit.atom.pred == pred:
                    return len(lit.atom.args)
        raise KeyError(pred)

    def declared(self, pred) -> Optional[Relation]:
        """Relation declaration for a declared predicate or a delta of one."""
        rel = self.schema.relation(pred)
        if rel is None and pred[:1] in "+-":
            rel = self.schema.relation(pred[1:])
        return rel

    def signature(self, pred) -> tuple:
        """Column types of a predicate; IDB types are inferred from rules."""
        return _signatures(self).get(pred) or (None,) * self.arity(pred)

    def with_rules(self, rules) -> "Program":
        return Program(self.schema, tuple(rules))

    def __str__(self):
        from .printer import format_program
        return format_program(self)


def _signatures(program: Program) -> dict:
    cache = program.__dict__.get("_sigs")
    if cache is not None:
        return cache
    sigs = {}
    for name in program.predicates():
        rel = program.declared(name)
        if rel is not None:
            sigs[name] = rel.types
    # nonrecursive: a bounded number of sweeps settles every IDB signature
    for _ in range(len(program.rules) + 1):
        changed = False
        for rule in program.proper_rules:
            types = rule_var_types(rule, sigs)
            head = []
            for t in rule.head.args:
                if isinstance(t, Const):
                    head.append(t.type)
                elif isinstance(t, Var):
                    head.append(types.get(t.name))
                else:
                    head.append(None)
            old = sigs.get(rule.head.pred)
            if old is None:
                new = tuple(head)
            else:
                new = tuple(o if o is not None else h for o, h in zip(old, head))
            if new != old:
                sigs[rule.head.pred] = new
                changed = True
        if not changed:
            break
    object.__setattr__(program, "_sigs", sigs)
    return sigs


def rule_var_types(rule: Rule, sigs: dict) -> dict:
    """Infer variable types of a rule from atom positions and built-ins."""
    types = {}
    atoms = [lit.atom for lit in rule.body if isinstance(lit, (Pos, Neg))]
    for atom in atoms:
        sig = sigs.get(atom.pred)
        if sig is None:
            continue
        for t, typ in zip(atom.args, sig):
            if isinstance(t, Var) and typ is not None:
                types.setdefault(t.name, typ)
    if rule.head is not None:
        sig = sigs.get(rule.head.pred)
        if sig is not None:
            for t, typ in zip(rule.head.args, sig):
                if isinstance(t, Var) and typ is not None:
                    types.setdefault(t.name, typ)
    changed = True
    while changed:
        changed = False
        for lit in rule.body:
            if not is_builtin(lit):
                continue
            l, r = lit.left, lit.right
            for a, b in ((l, r), (r, l)):
                if isinstance(a, Var) and a.name not in types:
                    if isinstance(b, Const) and not (isinstance(b.value, str) and _maybe_date(b.value)):
                        types[a.name] = b.type
                        changed = True
                    elif isinstance(b, Var) and b.name in types:
                        types[a.name] = types[b.name]
                        changed = True
    return types


def _maybe_date(text: str) -> bool:
    try:
        datetime.date.fromisoformat(text)
        return True
    except ValueError:
        return False

"""Databases (sets of ground atoms) and delta sets, with CSV/JSON I/O."""

from __future__ import annotations

import csv
import datetime
import json
from pathlib import Path

from ..datalog.syntax import Relation, coerce_value, type_of


def _sort_key(value):
    # int < date < string, then native order: a total order over mixed tuples
    rank = {"int": 0, "date": 1, "string": 2}[type_of(value)]
    return (rank, value)


def tuple_key(t):
    return tuple(_sort_key(v) for v in t)


class Database:
    """Immutable map from relation name to a frozenset of tuples.

    Missing relations read as empty; empty relations are dropped so that
    equality is extensional."""

    __slots__ = ("_rels", "_hash")

    def __init__(self, relations=None):
        rels = {}
        for name, tuples in (relations or {}).items():
            fs = frozenset(tuple(t) for t in tuples)
            if fs:
                rels[name] = fs
        self._rels = rels
        self._hash = None

    def __getitem__(self, name) -> frozenset:
        return self._rels.get(name, frozenset())

    def __contains__(self, name):
        return name in self._rels

    def names(self):
        return sorted(self._rels)

    def items(self):
        return ((n, self._rels[n]) for n in self.names())

    def as_dict(self) -> dict:
        return dict(self._rels)

    def __eq__(self, other):
        return isinstance(other, Database) and self._rels == other._rels

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._rels.items()))
        return self._hash

    def __len__(self):
        return sum(len(v) for v in self._rels.values())

    def __or__(self, other: "Database") -> "Database":
        merged = dict(self._rels)
        for n, ts in other._rels.items():
            merged[n] = merged.get(n, frozenset()) | ts
        return Database(merged)

    def restrict(self, names) -> "Database":
        names = set(names)
        return Database({n: ts for n, ts in self._rels.items() if n in names})

    def without(self, names) -> "Database":
        names = set(names)
        return Database({n: ts for n, ts in self._rels.items() if n not in names})

    def rename(self, mapping) -> "Database":
        return Database({mapping.get(n, n): ts for n, ts in self._rels.items()})

    def replace(self, name, tuples) -> "Database":
        rels = dict(self._rels)
        rels[name] = frozenset(tuples)
        return Database(rels)

    def values(self) -> set:
        return {v for ts in self._rels.values() for t in ts for v in t}

    def facts(self) -> list:
        return [(n, t) for n in self.names() for t in sorted(self._rels[n], key=tuple_key)]

    def to_json_obj(self) -> dict:
        return {n: [[_json_value(v) for v in t] for t in sorted(ts, key=tuple_key)]
                for n, ts in self.items()}

    def __repr__(self):
        parts = [f"{n}({', '.join(map(_show, t))})" for n, t in self.facts()]
        return "{" + ", ".join(parts) + "}"


def _show(v):
    if isinstance(v, datetime.date):
        return v.isoformat()
    return str(v) if isinstance(v, int) else repr(v)


def _json_value(v):
    return v.isoformat() if isinstance(v, datetime.date) else v


def db(**relations) -> Database:
    """Literal helper: db(r1=[(1,)], v=[(1,), (3,)])."""
    return Database(relations)


class ContradictoryDelta(Exception):
    def __init__(self, clashes):
        self.clashes = clashes
        shown = ", ".join(f"{n}{t}" for n, t in clashes[:5])
        super().__init__(f"contradictory delta: insertion and deletion of {shown}")


class DeltaSet:
    """Per-relation insertion and deletion sets."""

    __slots__ = ("ins", "dels")

    def __init__(self, ins=None, dels=None):
        self.ins = Database(ins.as_dict() if isinstance(ins, Database) else ins)
        self.dels = Database(dels.as_dict() if isinstance(dels, Database) else dels)

    def clashes(self) -> list:
        out = []
        for n in self.ins.names():
            for t in sorted(self.ins[n] & self.dels[n], key=tuple_key):
                out.append((n, t))
        return out

    def is_contradictory(self):
        return bool(self.clashes())

    def is_empty(self):
        return len(self.ins) == 0 and len(self.dels) == 0

    def __eq__(self, other):
        return isinstance(other, DeltaSet) and self.ins == other.ins and self.dels == other.dels

    def __hash__(self):
        return hash((self.ins, self.dels))

    def facts(self) -> list:
        out = [("+" + n, t) for n, t in self.ins.facts()]
        out += [("-" + n, t) for n, t in self.dels.facts()]
        return out

    def to_json_obj(self):
        return {"insert": self.ins.to_json_obj(), "delete": self.dels.to_json_obj()}

    def __repr__(self):
        return "{" + ", ".join(f"{n}{t}" for n, t in self.facts()) + "}"


def apply_delta(database: Database, delta: DeltaSet) -> Database:
    clashes = delta.clashes()
    if clashes:
        raise ContradictoryDelta(clashes)
    rels = database.as_dict()
    for n in set(delta.ins.names()) | set(delta.dels.names()):
        rels[n] = (rels.get(n, frozenset()) - delta.dels[n]) | delta.ins[n]
    return Database(rels)


# ------------------------------------------------------------------ I/O

def _coerce_row(rel: Relation, row, where):
    if len(row) != rel.arity:
        raise ValueError(f"{where}: expected {rel.arity} values for {rel.name}, got {len(row)}")
    try:
        return tuple(coerce_value(v, t) for v, t in zip(row, rel.types))
    except ValueError as e:
        raise ValueError(f"{where}: {e}") from None


def check_conforms(database: Database, relations) -> None:
    """Raise ValueError if a tuple does not match its relation's types."""
    by_name = {r.name: r for r in relations}
    for name, tuples in database.items():
        rel = by_name.get(name)
        if rel is None:
            continue
        for t in tuples:
            if len(t) != rel.arity or any(type_of(v) != typ for v, typ in zip(t, rel.types)):
                raise ValueError(f"tuple {t} does not match {rel}")


def read_json(path, relations) -> Database:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return from_json_obj(obj, relations, str(path))


def from_json_obj(obj, relations, where="json") -> Database:
    by_name = {r.name: r for r in relations}
    rels = {}
    for name, rows in obj.items():
        rel = by_name.get(name)
        if rel is None:
            raise ValueError(f"{where}: unknown relation {name}")
        rels[name] = {_coerce_row(rel, row, where) for row in rows}
    return Database(rels)


def write_json(database: Database, path) -> None:
    Path(path).write_text(json.dumps(database.to_json_obj(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def read_csv_dir(directory, relations) -> Database:
    rels = {}
    for rel in relations:
        f = Path(directory) / f"{rel.name}.csv"
        if not f.exists():
            continue
        with f.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            continue
        header, body = rows[0], rows[1:]
        if tuple(header) != rel.attr_names:
            raise ValueError(f"{f}: header {header} does not match {rel}")
        rels[rel.name] = {_coerce_row(rel, row, str(f)) for row in body}
    return Database(rels)


def write_csv_dir(database: Database, directory, relations) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for rel in relations:
        with (d / f"{rel.name}.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(rel.attr_names)
            for t in sorted(database[rel.name], key=tuple_key):
                w.writerow([_json_value(v) for v in t])


def read_database(path, relations) -> Database:
    p = Path(path)
    return read_csv_dir(p, relations) if p.is_dir() else read_json(p, relations)


def write_database(database: Database, path, relations) -> None:
    p = Path(path)
    if p.suffix == ".json":
        write_json(database, p)
    else:
        write_csv_dir(database, p, relations)

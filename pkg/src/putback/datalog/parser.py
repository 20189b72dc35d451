"""Tokenizer and recursive-descent parser for the program file format.

    source r1(a:int).            % schema headers
    view v(a:int).
    +r1(X) :- v(X), not r1(X), not r2(X).
    _|_ :- v(X), X > 10.        % constraint
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass

from .syntax import (ANON, TYPES, Anon, Atom, Cmp, Const, Eq, Neg, Pos, Program,
                     ProgramError, Relation, Rule, Schema, Var, is_builtin,
                     rule_var_types, _signatures)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<bottom>_\|_|⊥)
  | (?P<implies>:-|⟵)
  | (?P<neq>!=|<>|≠)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>\d+)
  | (?P<var>[A-Z][A-Za-z0-9_]*|_[A-Za-z0-9_]+)
  | (?P<anon>_)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<neg>¬)
  | (?P<punct>[(),.=<>:+\-])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ProgramError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "ident" and m.group() == "not":
                kind = "neg"
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ProgramError(message, tok.line, tok.col)

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, text=None, kind=None):
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text if text is not None else kind
            got = t.text or "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("punct", "implies", "neq")

    # -- top level

    def parse(self):
        sources, views, rules = [], [], []
        if self.tok.kind == "eof":
            raise self.error("empty program")
        while self.tok.kind != "eof":
            if self.tok.kind == "ident" and self.tok.text in ("source", "view") \
                    and self.peek().kind == "ident":
                kw = self.advance()
                rel = self.relation_decl()
                (sources if kw.text == "source" else views).append((rel, kw))
            else:
                rules.append(self.rule())
        return sources, views, rules

    def relation_decl(self):
        name = self.expect(kind="ident").text
        self.expect("(")
        attrs = []
        if not self.at(")"):
            while True:
                attr = self.advance()
                if attr.kind not in ("ident", "var"):
                    raise self.error("expected attribute name", attr)
                self.expect(":")
                typ = self.expect(kind="ident")
                if typ.text not in TYPES:
                    raise self.error(f"unknown type {typ.text!r}", typ)
                attrs.append((attr.text, typ.text))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        self.expect(".")
        return Relation(name, tuple(attrs))

    def rule(self):
        line = self.tok.line
        if self.tok.kind == "bottom":
            self.advance()
            head = None
        else:
            head = self.atom()
        self.expect(kind="implies")
        body = [self.literal()]
        while self.at(","):
            self.advance()
            body.append(self.literal())
        self.expect(".")
        return Rule(head, tuple(body), line), line

    def pred_name(self):
        sign = ""
        if self.tok.kind == "punct" and self.tok.text in "+-":
            sign = self.advance().text
        return sign + self.expect(kind="ident").text

    def atom(self):
        tok = self.tok
        name = self.pred_name()
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.term())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return _Located(Atom(name, tuple(args)), tok)

    def term(self):
        t = self.tok
        if t.kind == "var":
            self.advance()
            return Var(t.text)
        if t.kind == "anon":
            self.advance()
            return ANON
        if t.kind == "number":
            self.advance()
            return Const(int(t.text))
        if t.kind == "punct" and t.text == "-" and self.peek().kind == "number":
            self.advance()
            return Const(-int(self.advance().text))
        if t.kind == "string":
            self.advance()
            return Const(t.text[1:-1].replace("''", "'"))
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def literal(self):
        negated = False
        if self.tok.kind == "neg":
            self.advance()
            negated = True
        t = self.tok
        is_atom = t.kind == "ident" or (
            t.kind == "punct" and t.text in "+-" and self.peek().kind == "ident")
        if is_atom:
            atom = self.atom()
            return (Neg if negated else Pos)(atom)
        left = self.term()
        op = self.tok
        if op.text in ("=", "<", ">") and op.kind == "punct":
            self.advance()
            right = self.term()
            if op.text == "=":
                return Eq(left, right, negated)
            return Cmp(op.text, left, right, negated)
        if op.kind == "neq":
            self.advance()
            return Eq(left, self.term(), not negated)
        raise self.error(f"expected a comparison operator, found {op.text or 'end of input'!r}")


@dataclass(frozen=True)
class _Located:
    """Atom plus the token where it starts (stripped after resolution)."""
    atom: Atom
    tok: Token


def parse_program(text: str, schema: Schema | None = None) -> Program:
    """Parse a program file. `schema` supplies declarations the text lacks
    (e.g. a get file parsed against its putback program's schema)."""
    sources, views, raw_rules = _Parser(text).parse()
    if len(views) > 1:
        raise ProgramError("multiple view declarations", views[1][1].line, views[1][1].col)
    src = list(schema.sources) if schema is not None else []
    for rel, kw in sources:
        if any(r.name == rel.name for r in src):
            if schema is not None and rel in schema.sources:
                continue
            raise ProgramError(f"duplicate declaration of {rel.name}", kw.line, kw.col)
        src.append(rel)
    view = views[0][0] if views else (schema.view if schema is not None else None)
    if view is not None and any(r.name == view.name for r in src):
        raise ProgramError(f"{view.name} declared both as source and view")
    full = Schema(tuple(src), view)
    locs = {}
    rules = []
    for rule, line in raw_rules:
        head = None
        if rule.head is not None:
            head = rule.head.atom
            locs[id(head)] = rule.head.tok
        body = []
        for lit in rule.body:
            if isinstance(lit, (Pos, Neg)):
                locs[id(lit.atom.atom)] = lit.atom.tok
                body.append(type(lit)(lit.atom.atom))
            else:
                body.append(lit)
        for t in (head.args if head is not None else ()):
            if isinstance(t, Anon):
                raise ProgramError("anonymous variable in rule head", line)
        rules.append(Rule(head, tuple(body), line))
    program = Program(full, tuple(rules))
    _resolve(program, locs)
    return _type_program(program)


def _resolve(program: Program, locs):
    heads = set(program.idb())
    arities = {}
    for rel in program.schema.sources + ((program.schema.view,) if program.schema.view else ()):
        arities[rel.name] = rel.arity

    def arity_of(name):
        if name in arities:
            return arities[name]
        if name[:1] in "+-" and name[1:] in arities:
            return arities[name[1:]]
        return None

    for rule in program.rules:
        atoms = ([rule.head] if rule.head is not None else []) + [
            lit.atom for lit in rule.body if isinstance(lit, (Pos, Neg))]
        for atom in atoms:
            tok = locs.get(id(atom))
            line, col = (tok.line, tok.col) if tok else (rule.line, None)
            name = atom.pred
            known = arity_of(name)
            if known is None and name not in heads:
                if name[:1] in "+-" and name[1:] in heads:
                    pass
                else:
                    raise ProgramError(f"unknown predicate {name}", line, col)
            if known is None:
                known = arities.setdefault(name, len(atom.args))
            if len(atom.args) != known:
                raise ProgramError(
                    f"arity mismatch for {name}: expected {known}, got {len(atom.args)}", line, col)


def _type_program(program: Program) -> Program:
    """Coerce date literals by context and check constant/column types."""
    sigs = _signatures(program)
    new_rules = []
    for rule in program.rules:
        types = rule_var_types(rule, sigs)
        new_rules.append(_type_rule(rule, sigs, types))
    typed = Program(program.schema, tuple(new_rules))
    # second pass: signatures may sharpen once dates are coerced
    sigs = _signatures(typed)
    for rule in typed.rules:
        types = rule_var_types(rule, sigs)
        _check_rule_types(rule, sigs, types)
    return typed


def _coerce(term, typ, line):
    if not isinstance(term, Const) or typ is None:
        return term
    value = term.value
    if typ == "date" and isinstance(value, str):
        try:
            return Const(datetime.date.fromisoformat(value))
        except ValueError:
            raise ProgramError(f"invalid date literal {value!r}", line) from None
    return term


def _type_rule(rule, sigs, types):
    def atom_fix(atom):
        sig = sigs.get(atom.pred) or (None,) * len(atom.args)
        return Atom(atom.pred, tuple(_coerce(t, typ, rule.line) for t, typ in zip(atom.args, sig)))

    def term_type(t):
        if isinstance(t, Var):
            return types.get(t.name)
        return None

    head = atom_fix(rule.head) if rule.head is not None else None
    body = []
    for lit in rule.body:
        if isinstance(lit, (Pos, Neg)):
            body.append(type(lit)(atom_fix(lit.atom)))
        else:
            left = _coerce(lit.left, term_type(lit.right), rule.line)
            right = _coerce(lit.right, term_type(lit.left), rule.line)
            if isinstance(lit, Eq):
                body.append(Eq(left, right, lit.negated))
            else:
                body.append(Cmp(lit.op, left, right, lit.negated))
    return Rule(head, tuple(body), rule.line)


def _check_rule_types(rule, sigs, types):
    def check_atom(atom):
        sig = sigs.get(atom.pred)
        if sig is None:
            return
        for t, typ in zip(atom.args, sig):
            if isinstance(t, Const) and typ is not None and t.type != typ:
                raise ProgramError(
                    f"constant {t} does not match column type {typ} of {atom.pred}", rule.line)
            if isinstance(t, Var) and typ is not None and types.get(t.name) not in (None, typ):
                raise ProgramError(f"variable {t} used with conflicting types", rule.line)

    if rule.head is not None:
        check_atom(rule.head)
    for lit in rule.body:
        if isinstance(lit, (Pos, Neg)):
            check_atom(lit.atom)
        elif is_builtin(lit):
            kinds = []
            for t in (lit.left, lit.right):
                kinds.append(t.type if isinstance(t, Const) else types.get(t.name) if isinstance(t, Var) else None)
            known = [k for k in kinds if k is not None]
            if len(known) == 2 and known[0] != known[1]:
                raise ProgramError(f"type mismatch in {lit}", rule.line)
            if isinstance(lit, Cmp) and any(k not in ("int", "date") for k in known):
                raise ProgramError(f"comparison requires int or date operands: {lit}", rule.line)
            if any(isinstance(t, Anon) for t in (lit.left, lit.right)):
                raise ProgramError("anonymous variable in built-in", rule.line)

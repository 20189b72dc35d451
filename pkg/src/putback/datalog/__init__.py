from .syntax import (ANON, Anon, Atom, Cmp, Const, Eq, Kind, Neg, Pos, Program,
                     ProgramError, Relation, Rule, Schema, Var, coerce_value,
                     format_value, type_of)
from .parser import parse_program
from .printer import format_program
from .analysis import (LvgnVerdict, Violation, check_guarded_negation,
                       check_linear_view, check_putback_program, check_safety,
                       evaluation_order, is_lvgn, stratify)

__all__ = [
    "ANON", "Anon", "Atom", "Cmp", "Const", "Eq", "Kind", "Neg", "Pos", "Program",
    "ProgramError", "Relation", "Rule", "Schema", "Var", "coerce_value", "format_value",
    "type_of", "parse_program", "format_program", "LvgnVerdict", "Violation",
    "check_guarded_negation", "check_linear_view", "check_putback_program",
    "check_safety", "evaluation_order", "is_lvgn", "stratify",
]

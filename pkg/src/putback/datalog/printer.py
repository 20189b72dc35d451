"""Concrete-syntax printer; `parse_program(format_program(p))` gives back `p`."""

from .syntax import Program, Relation


def format_relation(keyword: str, rel: Relation) -> str:
    return f"{keyword} {rel}."


def format_rules(rules) -> str:
    return "".join(f"{r}\n" for r in rules)


def format_program(p: Program, headers=True) -> str:
    lines = []
    if headers:
        for rel in p.schema.sources:
            lines.append(format_relation("source", rel))
        if p.schema.view is not None:
            lines.append(format_relation("view", p.schema.view))
    lines.extend(str(r) for r in p.rules)
    return "\n".join(lines) + ("\n" if lines else "")

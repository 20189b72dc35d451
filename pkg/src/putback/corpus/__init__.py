"""Bundled example programs: strategies plus their intended view definitions."""

from importlib import resources

from ..datalog import parse_program

CASE_STUDY = ("ced", "residents", "residents1962", "employees", "retired")
EXAMPLES = ("example1", "example5") + CASE_STUDY


def text(name: str, get=False) -> str:
    fname = f"{name}.get.dl" if get else f"{name}.dl"
    return resources.files(__package__).joinpath(fname).read_text(encoding="utf-8")


def load(name: str):
    """Return (putback program, expected get program)."""
    program = parse_program(text(name))
    return program, parse_program(text(name, get=True), program.schema)

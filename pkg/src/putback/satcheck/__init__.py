from .bounded import (BoundParams, ExternallyProvedUnsat, Problem, Satisfiable, Timeout,
                      UnsatisfiableUpTo, bounded_sat, bounded_sat_under_constraints,
                      fresh_values)

__all__ = ["BoundParams", "ExternallyProvedUnsat", "Problem", "Satisfiable", "Timeout",
           "UnsatisfiableUpTo", "bounded_sat", "bounded_sat_under_constraints", "fresh_values"]
from .smt import UnsupportedConstruct, export_solver

__all__ += ["UnsupportedConstruct", "export_solver"]

"""Validation, derivation, incrementalization and SQL compilation of
Datalog view-update (putback) strategies."""

__version__ = "0.1.0"

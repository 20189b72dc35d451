from .core import (IncrementalizationError, changed_predicates, classify, eval_incremental,
                   incrementalize_lvgn, incrementalize_put, incrementalize_rules,
                   schema_delta_rules, to_two_predicate_form)

__all__ = ["IncrementalizationError", "changed_predicates", "classify", "eval_incremental",
           "incrementalize_lvgn", "incrementalize_put", "incrementalize_rules",
           "schema_delta_rules", "to_two_predicate_form"]

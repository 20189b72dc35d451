from .core import (FAILS, HOLDS, INVALID, UNKNOWN, UNKNOWN_OVERALL, VALID, Check, PassResult,
                   ValidationReport, check_getput_with_expected, check_putget, check_well_defined,
                   derive_get, get_from_formula, validate)
from .replay import replay_counterexample

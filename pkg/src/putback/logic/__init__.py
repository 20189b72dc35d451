from .formula import (BOTTOM, TRUE, And, Comparison, Equality, Exists, Forall, Formula, Fresh,
                      Implies, Not, Or, RelAtom, atom, conj, disj, exists, show, substitute)
from .gnfo import abstract_comparisons, axiomatize_comparisons, is_gnfo
from .linear_view import (GetPutDecomposition, LinearViewError, LinearViewForm, ViewGroup,
                          build_getput_decomposition, build_putget_sentences,
                          constraint_sentences, delta_sentences, inline_view,
                          to_linear_view_form)
from .normal import (NormalizationError, is_ranf, is_safe_range, is_srnf, range_restricted_vars,
                     to_ranf, to_srnf)
from .oracle import active_domain, answers, holds, infer_sorts
from .ranf_datalog import ranf_to_datalog
from .translate import datalog_to_fo, eliminate_atom_constants, rule_formula

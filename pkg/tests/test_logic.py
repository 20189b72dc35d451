import pytest
from hypothesis import given, settings, strategies as st

from oracle_checks import formula_seed, program_seed
from putback.datalog import Const, Var
from putback.engine import db
from putback.logic import (And, Comparison, Equality, Exists, Not, Or, RelAtom, holds,
                           is_gnfo, is_safe_range, range_restricted_vars, to_ranf, to_srnf)
from putback.logic.normal import NormalizationError

X, Y = Var("x"), Var("y")


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_program_translations_agree_with_engine(seed):
    assert program_seed(seed) == []


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_normal_forms_and_datalog_agree_with_oracle(seed):
    assert formula_seed(seed) == []


def test_safe_range_detection():
    r = RelAtom("r", (X,))
    assert is_safe_range(And((r, Not(RelAtom("s", (X, X))))))
    assert not is_safe_range(Not(r))
    assert not is_safe_range(Or((r, RelAtom("r", (Y,)))))
    assert range_restricted_vars(And((r, Equality(Y, X)))) == {"x", "y"}


def test_unsafe_formula_cannot_be_put_in_ranf():
    with pytest.raises(NormalizationError):
        to_ranf(to_srnf(Not(RelAtom("r", (X,)))))


def test_srnf_pushes_negation():
    f = Not(Or((RelAtom("r", (X,)), Not(RelAtom("s", (X, X))))))
    g = to_srnf(f)
    assert isinstance(g, And)


def test_guarded_negation():
    guard = RelAtom("s", (X, Y))
    assert is_gnfo(Exists(("x", "y"), And((guard, Not(RelAtom("t", (Y, X)))))))
    assert not is_gnfo(Exists(("x", "y"), And((RelAtom("r", (X,)), RelAtom("r", (Y,)),
                                                Not(RelAtom("t", (X, Y)))))))


def test_oracle_comparisons_respect_types():
    f = Exists(("x",), And((RelAtom("r", (X,)), Comparison(">", X, Const(1)))))
    assert holds(f, db(r=[(2,)]))
    assert not holds(f, db(r=[(1,)]))

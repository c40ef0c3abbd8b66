from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from revreact.bootstrap import FIXED_POINT, bootstrap_exponents, bootstrap_feasible


def closed_form_steps(p0: Fraction, cap: int):
    """r_n - 2/5 = 2^n (r_0 - 2/5); first n with r_n <= 0."""
    d = 1 / p0 - Fraction(2, 5)
    for n in range(1, cap + 1):
        if Fraction(2, 5) + 2**n * d <= 0:
            return n
    return None


def test_reference_traces():
    t = bootstrap_exponents(3)
    assert t.exponents == (Fraction(3), Fraction(15, 4), Fraction(15, 2))
    assert t.terminated and t.steps == 3
    t5 = bootstrap_exponents(5)
    assert t5.exponents == (Fraction(5),) and t5.terminated and t5.steps == 1
    assert str(t) == "[3, 15/4, 15/2] (then every finite q; 3 steps)"


def test_fixed_point_never_terminates():
    t = bootstrap_exponents("5/2", max_steps=10)
    assert not t.terminated and set(t.exponents) == {FIXED_POINT}
    assert "..." in str(t)


def test_rejects_small_exponent():
    with pytest.raises(ValueError):
        bootstrap_exponents(Fraction(1, 2))
    with pytest.raises(ValueError):
        bootstrap_feasible(0)


rationals = st.builds(Fraction, st.integers(1, 4000), st.integers(1, 1000)).filter(lambda p: p >= 1)


@given(rationals)
def test_dense_sweep_matches_closed_form(p0):
    trace = bootstrap_exponents(p0, max_steps=40)
    expect = closed_form_steps(p0, 40)
    assert trace.terminated == (expect is not None)
    if expect is not None:
        assert trace.steps == expect
    assert bootstrap_feasible(p0) == (p0 > FIXED_POINT)
    if p0 > FIXED_POINT:
        assert trace.terminated
        assert all(b > a for a, b in zip(trace.exponents, trace.exponents[1:]))
    else:
        assert not trace.terminated
        assert all(b <= a for a, b in zip(trace.exponents, trace.exponents[1:]))


@given(st.integers(1, 30))
def test_termination_just_above_fixed_point(k):
    p0 = FIXED_POINT + Fraction(1, 2**k)
    assert bootstrap_exponents(p0, max_steps=200).terminated

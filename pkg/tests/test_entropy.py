import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from revreact.entropy import (
    constants,
    constants_from,
    entropy_density,
    eta,
    f,
    f_prime,
    fisher_terms,
    reaction_production,
    snapshot,
)
from revreact.grid import Grid, gradient_sq, integrate
from revreact.system import SpeciesState, default_config, equilibrium_config

E = math.e


def test_scalar_examples():
    assert eta(1.0) == 0.0 and eta(0.0) == 1.0
    assert f(1.0) == 1.75 and f_prime(1.0) == 2.0
    assert f(0.0) == 0.0 and f_prime(0.0) == 0.0
    assert f(E) == pytest.approx(0.75 * E**2, rel=1e-15)
    assert f_prime(E) == pytest.approx(E, rel=1e-15)
    assert isinstance(eta(2.0), float)
    assert f(np.array([1.0, 2.0])).shape == (2,)


@pytest.mark.parametrize("fn", [eta, f, f_prime])
def test_negative_input_rejected(fn):
    with pytest.raises(ValueError):
        fn(-1e-9)
    with pytest.raises(ValueError):
        fn(np.array([1.0, -2.0]))


def test_tiny_inputs_use_continuous_extension():
    assert eta(1e-320) == pytest.approx(1.0)
    assert f(1e-320) == 0.0 and f_prime(1e-320) == 0.0


def test_f_derivatives_symbolic():
    x = sp.symbols("x", positive=True)
    L = sp.log(x)
    fs = x**2 * (L**2 / 2 - sp.Rational(3, 2) * L + sp.Rational(7, 4))
    assert sp.simplify(sp.diff(fs, x, 2) - L**2) == 0
    fp = sp.lambdify(x, sp.diff(fs, x))
    for v in (0.01, 0.5, 3.0, 1e4):
        assert f_prime(v) == pytest.approx(fp(v), rel=1e-12)
        assert f(v) == pytest.approx(float(fs.subs(x, v)), rel=1e-12)


@given(st.floats(0.0, 1e12))
def test_elementary_bounds(x):
    L = math.log(x) if x > 0 else 0.0
    assert f(x) >= x * x * L * L / 8 * (1 - 1e-12)
    assert eta(x) >= 0
    if x >= E**2:
        assert eta(x) >= 0.5 * x * L * (1 - 1e-12)


def test_reaction_production_nonnegative_and_degenerate():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 5, size=(4, 1000))
    assert np.all(reaction_production(a) >= 0)
    assert np.all(reaction_production(a, 0.3) >= 0)
    assert reaction_production(np.array([1.0, 0.0, 1.0, 1.0])) == np.inf
    assert reaction_production(np.array([0.0, 2.0, 1.0, 0.0])) == 0.0


def test_fisher_terms_zero_gradient_at_zero_concentration():
    g = Grid((1.0,), (9,))
    a = np.zeros((4, 9))
    assert np.all(fisher_terms(g, a, (1, 1, 1, 1)) == 0)


def test_snapshot_fields():
    cfg = default_config().with_(nodes=(17, 17))
    g = cfg.grid
    s = cfg.initial_state()
    snap = snapshot(g, s, cfg.diff)
    assert np.all(snap.E >= 0) and np.all(snap.p >= 0) and snap.int_p >= 0
    assert snap.int_E == pytest.approx(integrate(g, entropy_density(s.a)))
    assert snap.grad_E_sq == pytest.approx(integrate(g, gradient_sq(g, snap.E)))
    big = default_config().with_(nodes=(17, 17)).initial_state()
    a = big.a * 5.0  # pushes some nodes past e^2
    s2 = snapshot(g, SpeciesState.initial(a), cfg.diff)
    mask = a >= E**2
    expect = integrate(g, np.sum(np.where(mask, (a * np.log(a)) ** 3, 0.0), axis=0))
    assert mask.any() and s2.lhs_cubed == pytest.approx(expect, rel=1e-12)


def test_equilibrium_snapshot_is_zero():
    cfg = equilibrium_config(nodes=(9, 9))
    snap = snapshot(cfg.grid, cfg.initial_state(), cfg.diff)
    assert snap.int_E == 0 and snap.int_p == 0 and snap.dissipation == 0 and snap.f_reaction == 0


def test_constants_reference_values():
    b = constants_from(max_d=1.0, min_d=1.0, e_inf=1.0, horizon=1.0, measure=2.0, f_in=0.0)
    assert (b.K1, b.K2, b.K4, b.log_M) == (20.0, 18.0, 320.0, 5120.0)


def direct_constants(max_d, min_d, e_inf, T, measure, f_in):
    mp = mpmath.mp
    mp.dps = 50
    K1 = 20 * mp.mpf(max_d) * e_inf * T
    K2 = 9 * mp.mpf(e_inf) ** 3 * measure
    K4 = 16 * K1 / min_d
    K3 = 4 * K1 / min_d * f_in + K2 * T
    M = max(mp.e ** (16 * K4), mp.e**2)
    Cn = 16 * K3 + 128 * mp.e**6 * K4 * measure * T + 8 * K4 * measure * T * M**3 * mp.log(M) ** 2
    Cm = f_in + 32 * mp.e**6 + 16 * Cn
    return float(mp.log(M)), float(mp.log(Cn)), float(mp.log(Cm))


@pytest.mark.parametrize("args", [(1, 1, 0.01, 1, 1, 3.0), (2, 0.5, 0.3, 0.5, 2, 10.0), (1, 0.2, 1.0, 1, 1, 7.0)])
def test_log_constants_against_direct_high_precision(args):
    b = constants_from(*args)
    logM, logCn, logCm = direct_constants(*args)
    assert b.log_M == pytest.approx(logM, rel=1e-12)
    assert b.log_Cn == pytest.approx(logCn, rel=1e-12)
    assert b.log_Cm == pytest.approx(logCm, rel=1e-12)


pos = st.floats(1e-3, 1e3)


@given(pos, pos, pos, pos, pos, st.floats(0, 1e3), st.floats(1.0, 4.0))
def test_constants_monotone_and_finite(max_d, min_d, e_inf, T, measure, f_in, k):
    b = constants_from(max_d, min_d, e_inf, T, measure, f_in)
    assert b.K1 >= 0 and b.K2 >= 0 and b.K4 >= 0 and b.log_M >= 2
    assert all(math.isfinite(v) for v in (b.K1, b.K2, b.K3, b.K4, b.log_M, b.log_Cn, b.log_Cm))
    bigger = constants_from(max_d * k, min_d, e_inf * k, T * k, measure * k, f_in * k)
    assert bigger.log_Cm >= b.log_Cm * (1 - 1e-12)
    assert bigger.K4 >= b.K4


def test_constants_at_equilibrium_degenerate():
    cfg = equilibrium_config(nodes=(9, 9))
    b = constants(cfg.grid, cfg.diff, cfg.horizon, cfg.initial_state())
    assert b.Einf == 0 and b.K1 == 0 and b.log_M == 2
    assert b.log_Cn == -math.inf and math.isfinite(b.log_Cm)

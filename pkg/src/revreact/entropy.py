"""Entropy structure of the system and the explicit a priori constants.

The constants that contain ``exp(16 K4)`` or ``exp(48 K4)`` are kept in
natural-log scale throughout; for realistic data they overflow float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, gradient_sq, integrate, sup_norm
from .system import SIGNS, SpeciesState, reaction_rate_regularized

# below this x*ln(x) is taken as 0
X_FLOOR = 1e-300
E2 = math.exp(2.0)


def _as_nonneg(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("entropy functions are defined for x >= 0 only")
    return x


def _log_safe(x: np.ndarray) -> np.ndarray:
    return np.log(np.where(x < X_FLOOR, 1.0, x))


def eta(x):
    """x ln x - x + 1, with eta(0) = 1."""
    x = _as_nonneg(x)
    out = x * _log_safe(x) - x + 1.0
    return out if out.ndim else float(out)


def f(x):
    """Energy weight 1/2 x^2 ln^2 x - 3/2 x^2 ln x + 7/4 x^2, with f(0) = 0; f'' = ln^2 x."""
    x = _as_nonneg(x)
    L = _log_safe(x)
    out = np.where(x < X_FLOOR, 0.0, x * x * (0.5 * L * L - 1.5 * L + 1.75))
    return out if out.ndim else float(out)


def f_prime(x):
    x = _as_nonneg(x)
    L = _log_safe(x)
    out = np.where(x < X_FLOOR, 0.0, x * (L * L - 2.0 * L + 2.0))
    return out if out.ndim else float(out)


def entropy_density(a: np.ndarray) -> np.ndarray:
    return np.sum(eta(a), axis=0)


def reaction_production(a: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """(rate) * (ln(a1 a3) - ln(a2 a4)); nonnegative since both factors share a sign."""
    fwd = a[0] * a[2]
    bwd = a[1] * a[3]
    r = reaction_rate_regularized(a, eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = r * (np.log(fwd) - np.log(bwd))
    # rate zero means the two products match (or the log factor is irrelevant)
    return np.where(r == 0, 0.0, np.where(np.isnan(out), np.inf, out))


def fisher_terms(grid: Grid, a: np.ndarray, diff) -> np.ndarray:
    """sum_i d_i |grad a_i|^2 / a_i, with 0/0 taken as 0."""
    g2 = gradient_sq(grid, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(g2 == 0, 0.0, g2 / a)
    return np.tensordot(np.asarray(diff, dtype=float), q, axes=1)


def entropy_production(grid: Grid, a: np.ndarray, diff, eps: float = 0.0) -> np.ndarray:
    return reaction_production(a, eps) + fisher_terms(grid, a, diff)


def entropy_flux(a: np.ndarray, diff) -> np.ndarray:
    """sum_i d_i eta(a_i), the time derivative of w."""
    return np.tensordot(np.asarray(diff, dtype=float), eta(a), axes=1)


@dataclass(frozen=True)
class EntropySnapshot:
    t: float
    E: np.ndarray
    p: np.ndarray
    w: np.ndarray
    int_E: float
    int_p: float
    grad_E_sq: float
    beta_grad: tuple[float, float, float, float]
    lhs_cubed: float
    sup_weighted: float
    # energy-identity terms
    f_total: float
    dissipation: float
    f_reaction: float
    f_reaction_bound: float


def snapshot(grid: Grid, s: SpeciesState, diff, eps: float = 0.0) -> EntropySnapshot:
    """All entropy and energy quantities for one state.

    ``grad(a ln a - a + 1)`` is differenced from the composed nodal field,
    which stays finite where ``a`` vanishes.
    """
    a = s.a
    etas = eta(a)
    E = np.sum(etas, axis=0)
    p = entropy_production(grid, a, diff, eps)
    beta = tuple(integrate(grid, g) for g in gradient_sq(grid, etas))
    L = np.abs(_log_safe(a))
    cubed = np.where(a >= E2, (a * L) ** 3, 0.0)
    r = reaction_rate_regularized(a, eps)
    fp = f_prime(a)
    return EntropySnapshot(
        t=s.t,
        E=E,
        p=p,
        w=s.w,
        int_E=integrate(grid, E),
        int_p=integrate(grid, p),
        grad_E_sq=integrate(grid, gradient_sq(grid, E)),
        beta_grad=beta,
        lhs_cubed=integrate(grid, np.sum(cubed, axis=0)),
        sup_weighted=integrate(grid, np.sum((a * L) ** 2, axis=0)),
        f_total=integrate(grid, np.sum(f(a), axis=0)),
        dissipation=float(np.dot(diff, beta)),
        f_reaction=integrate(grid, np.tensordot(SIGNS, fp, axes=1) * r),
        f_reaction_bound=4.0 * integrate(grid, np.sum(fp * a * a, axis=0)),
    )


@dataclass(frozen=True)
class ConstantsBundle:
    K1: float
    K2: float
    K3: float
    K4: float
    log_M: float
    log_Cn: float
    log_Cm: float
    Einf: float
    f_in: float


def _logsumexp(logs) -> float:
    logs = [v for v in logs if v != -math.inf]
    if not logs:
        return -math.inf
    top = max(logs)
    return top + math.log(sum(math.exp(v - top) for v in logs))


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def constants_from(
    max_d: float, min_d: float, e_inf: float, horizon: float, measure: float, f_in: float
) -> ConstantsBundle:
    K1 = 20.0 * max_d * e_inf * horizon
    K2 = 9.0 * e_inf**3 * measure
    K4 = 16.0 * K1 / min_d
    K3 = 4.0 * K1 / min_d * f_in + K2 * horizon
    log_M = max(16.0 * K4, 2.0)
    mt = measure * horizon
    log_Cn = _logsumexp(
        [
            _log(16.0 * K3),
            _log(128.0 * K4 * mt) + 6.0,
            _log(8.0 * K4 * mt) + 2.0 * math.log(max(16.0 * K4, 2.0)) + max(48.0 * K4, 6.0),
        ]
    )
    log_Cm = _logsumexp([_log(f_in), math.log(32.0) + 6.0, math.log(16.0) + log_Cn])
    return ConstantsBundle(K1, K2, K3, K4, log_M, log_Cn, log_Cm, e_inf, f_in)


def constants(grid: Grid, diff, horizon: float, initial: SpeciesState) -> ConstantsBundle:
    e_in = entropy_density(initial.a)
    f_in = integrate(grid, np.sum(f(initial.a), axis=0))
    return constants_from(max(diff), min(diff), sup_norm(e_in), horizon, grid.measure, f_in)


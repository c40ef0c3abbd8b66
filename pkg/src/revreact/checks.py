"""Numerical audits of the entropy inequalities, interpolation bound and a priori estimate.

Every checker returns a small verdict object carrying the two sides it
compared and a margin, so reports can show how close a bound came.
Tolerances are artifact decisions: the underlying inequalities are exact
statements about smooth solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import E2, ConstantsBundle, eta, f, f_prime
from .grid import Grid, gradient_sq, integrate, laplacian_neumann, sup_norm

INTERP_TOL = 1e-6
HYPO_TOL = 1e-8
W_BOUND_TOL = 1e-4


@dataclass(frozen=True)
class Verdict:
    name: str
    lhs: float
    rhs: float
    passed: bool
    status: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def __bool__(self) -> bool:
        return self.passed


def _leq(name: str, lhs: float, rhs: float, tol: float = INTERP_TOL, **detail) -> Verdict:
    # relative slack on the bound, plus a roundoff floor when both sides are ~0
    ok = lhs <= rhs * (1.0 + tol) + 1e-13 * max(1.0, abs(lhs))
    return Verdict(name, lhs, rhs, ok, "pass" if ok else "fail", detail)


def check_hypotheses(grid: Grid, E: np.ndarray, w: np.ndarray, C: float) -> tuple[bool, float]:
    """Nodewise ``0 <= E <= Lap_h w + C``; returns (ok, worst margin)."""
    upper = laplacian_neumann(grid, w) + C - E
    margin = float(min(np.min(E), np.min(upper)))
    return margin >= -HYPO_TOL, margin


def check_interpolation(grid: Grid, E: np.ndarray, w: np.ndarray, C: float, strict_hypotheses: bool = True) -> Verdict:
    """int E^3 <= 20 |w|_inf int |grad E|^2 + 9 C^3 |Omega|."""
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    lhs = integrate(grid, E**3)
    rhs = 20.0 * sup_norm(w) * integrate(grid, gradient_sq(grid, E)) + 9.0 * C**3 * grid.measure
    ok_h, hmargin = check_hypotheses(grid, E, w, C)
    if strict_hypotheses and not ok_h:
        return Verdict("interpolation", lhs, rhs, False, "hypotheses-not-met", {"hypothesis_margin": hmargin})
    return _leq("interpolation", lhs, rhs, hypothesis_margin=hmargin)


def check_interpolation_chain(grid: Grid, E: np.ndarray, w: np.ndarray, C: float) -> list[Verdict]:
    """Re-derive each intermediate inequality of the interpolation proof on (E, w, C).

    ``wb = w - min w``; the chain goes e3 -> partial integration -> B bound
    -> combined -> Young -> final.
    """
    ok_h, hmargin = check_hypotheses(grid, E, w, C)
    if not ok_h:
        return [Verdict("hypotheses", hmargin, 0.0, False, "hypotheses-not-met")]
    wb = w - np.min(w)
    wn = sup_norm(wb)
    lap = laplacian_neumann(grid, wb)
    E2i = integrate(grid, E**2)
    E3i = integrate(grid, E**3)
    G = integrate(grid, gradient_sq(grid, E))
    lapterm = integrate(grid, E**2 * lap)
    B = integrate(grid, E**2 * gradient_sq(grid, wb))
    young = B / wn + wn * G if wn > 0 else 0.0
    return [
        _leq("e3", E3i, lapterm + C * E2i),
        _leq("e2lw", lapterm, young),
        _leq("B_bound", B, 2.0 * wn * (C * E2i + 2.0 * wn * G)),
        _leq("lap_combined", lapterm, 2.0 * C * E2i + 5.0 * wn * G),
        _leq("cubic_3C", E3i, 3.0 * C * E2i + 5.0 * wn * G),
        _leq("young_9C2", E3i, 9.0 * C**2 * integrate(grid, E) + 10.0 * wn * G),
        _leq("mass", integrate(grid, E), C * grid.measure),
        _leq("wbar_sup", wn, 2.0 * sup_norm(w)),
        _leq("final", E3i, 20.0 * sup_norm(w) * G + 9.0 * C**3 * grid.measure),
    ]


def random_interpolation_draw(grid: Grid, rng: np.random.Generator, modes: int = 4):
    """Random (E, w, C) satisfying the hypotheses exactly on the grid.

    ``w`` is a random cosine series (Neumann by construction), rescaled so
    ``Lap_h w + C >= 0``, and ``E = theta * max(0, Lap_h w + C)`` with a
    smooth ``theta`` in [0, 1].
    """
    x = grid.coords()

    def series(scale):
        out = np.zeros(grid.shape)
        for _ in range(modes):
            m = rng.integers(0, 4, size=grid.dim)
            term = np.full(grid.shape, rng.normal(scale=scale))
            for xk, mk, L in zip(x, m, grid.extent):
                term = term * np.cos(mk * np.pi * xk / L)
            out = out + term
        return out

    C = float(rng.uniform(0.2, 3.0))
    w = series(1.0)
    # scale w so that min(Lap_h w) >= -C; otherwise no E >= 0 fits under Lap_h w + C
    dip = float(np.max(-laplacian_neumann(grid, w)))
    if dip > 0:
        w = w * (C * rng.uniform(0.2, 1.0) / dip)
    g = series(1.0)
    theta = 0.5 * (1.0 + g / max(sup_norm(g), 1e-300))
    E = theta * np.maximum(0.0, laplacian_neumann(grid, w) + C)
    return E, w, C


def _trapz(t: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(0.5 * np.diff(t) * (y[1:] + y[:-1]))) if len(t) > 1 else 0.0


def check_apriori(traj, bundle: ConstantsBundle) -> Verdict:
    """log(sup_t int sum a^2 ln^2 a + int_0^T lhs_cubed + int_0^T sum beta_grad) <= log C_m."""
    t = traj.series("t")
    lhs = (
        float(np.max(traj.series("sup_weighted")))
        + _trapz(t, traj.series("lhs_cubed"))
        + _trapz(t, np.array([sum(r.beta_grad) for r in traj.records]))
    )
    log_lhs = math.log(lhs) if lhs > 0 else -math.inf
    ok = log_lhs <= bundle.log_Cm
    return Verdict("apriori", log_lhs, bundle.log_Cm, ok, "pass" if ok else "fail", {"lhs": lhs})


def check_w_bound(traj, tol: float = W_BOUND_TOL) -> Verdict:
    """0 <= w(t, x) <= max(d) * |E_in|_inf * t * (1 + tol) over every recorded step.

    The reported pair is the record with the largest w / bound ratio.
    """
    w_max = traj.series("w_max")
    bound = traj.series("w_bound")
    ok = bool(np.all(w_max <= bound * (1.0 + tol)) and np.min(traj.series("w_min")) >= 0)
    pos = bound > 0
    ratio = np.where(pos, w_max / np.where(pos, bound, 1.0), np.where(w_max > 0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    return Verdict(
        "w_bound",
        float(w_max[worst]),
        float(bound[worst] * (1.0 + tol)),
        ok,
        "pass" if ok else "fail",
        {"t": float(traj.records[worst].t), "min_w": float(np.min(traj.series("w_min"))),
         "max_ratio": float(ratio[worst])},
    )


def energy_balance_residual(traj) -> float:
    """|LHS - RHS| of the time-integrated energy identity for the weight ``f``.

    LHS = sum int f(a_i)(T) + int_0^T sum d_i int |grad(a_i ln a_i - a_i + 1)|^2
    RHS = sum int f(a_i)(0) + int_0^T sum (-1)^i int f'(a_i) R
    Time integrals sample the rates at the end of each accepted step, the
    quadrature matching backward Euler; the trapezoid rule leaves an O(dt)
    term of opposite sign to the O(h^2) term and the two cancel erratically.
    """
    t = traj.series("t")
    ft = traj.series("f_total")
    dt = np.diff(t)
    lhs = ft[-1] + float(np.sum(dt * traj.series("dissipation")[1:]))
    rhs = ft[0] + float(np.sum(dt * traj.series("f_reaction")[1:]))
    return abs(lhs - rhs)


def check_reaction_energy_bound(traj) -> Verdict:
    """int_0^T sum (-1)^i int f'(a_i) R <= 4 sum int_0^T int f'(a_i) a_i^2."""
    t = traj.series("t")
    lhs = _trapz(t, traj.series("f_reaction"))
    rhs = _trapz(t, traj.series("f_reaction_bound"))
    ok = lhs <= rhs + 1e-12 * max(1.0, abs(rhs))
    return Verdict("reaction_energy", lhs, rhs, ok, "pass" if ok else "fail")


def check_entropy_monotone(traj) -> Verdict:
    """int E nonincreasing across accepted steps, up to 1e-8 (1 + |int E|) per step."""
    E = traj.series("int_E")
    if len(E) < 2:
        return Verdict("entropy", 0.0, 0.0, True, "pass")
    inc = np.diff(E)
    tol = traj.cfg.entropy_tol * (1.0 + np.abs(E[:-1]))
    k = int(np.argmax(inc - tol))
    ok = bool(np.all(inc <= tol))
    return Verdict("entropy", float(inc[k]), float(tol[k]), ok, "pass" if ok else "fail",
                   {"max_increment": float(np.max(inc))})


def check_conservation(traj, tol: float = 1e-10) -> Verdict:
    inv = np.array([r.invariants for r in traj.records])
    scale = np.maximum(np.abs(inv[0]), np.finfo(float).tiny)
    drift = float(np.max(np.abs(inv - inv[0]) / scale))
    ok = drift < tol
    return Verdict("conservation", drift, tol, ok, "pass" if ok else "fail")


def check_positivity(traj) -> Verdict:
    clamp = float(np.sum(traj.series("clamp_mass")))
    ok = clamp == 0.0 and all(np.min(s.a) >= 0 for s in traj.states)
    return Verdict("positivity", clamp, 0.0, ok, "pass" if ok else "fail")


def elementary_inequalities_selftest(n: int = 10_000, x_max: float = 1e8) -> Verdict:
    """Sweep x over {0} and a log grid up to ``x_max``.

    Checks: eta(x) >= x ln x / 2 for x >= e^2; f(x) >= x^2 ln^2 x / 8;
    f and f' strictly increasing; f, f' positive on x > 0 and zero at 0;
    eta decreasing on [0, 1], increasing on [1, inf), eta >= 0.
    """
    x = np.concatenate([[0.0], np.logspace(-12, math.log10(x_max), n - 1)])
    L = np.log(np.where(x > 0, x, 1.0))
    fx, fpx, ex = f(x), f_prime(x), eta(x)
    big = x >= E2
    counts = {
        "eta_half_xlnx": int(np.sum(ex[big] < 0.5 * x[big] * L[big])),
        "f_eighth": int(np.sum(fx < 0.125 * x * x * L * L)),
        "f_increasing": int(np.sum(np.diff(fx) <= 0)),
        "fprime_increasing": int(np.sum(np.diff(fpx) <= 0)),
        "f_positive": int(np.sum(fx[1:] <= 0)) + int(fx[0] != 0),
        "fprime_positive": int(np.sum(fpx[1:] <= 0)) + int(fpx[0] != 0),
        "eta_nonneg": int(np.sum(ex < 0)),
        "eta_decreasing_below_1": int(np.sum(np.diff(ex[x <= 1]) >= 0)),
        "eta_increasing_above_1": int(np.sum(np.diff(ex[x >= 1]) <= 0)),
    }
    bad = sum(counts.values())
    return Verdict("elementary", float(bad), 0.0, bad == 0, "pass" if bad == 0 else "fail",
                   {"violations": counts, "points": int(x.size)})


def interpolation_campaign(grid: Grid, seed: int, draws: int = 100) -> tuple[int, float, list[Verdict]]:
    """Seeded randomized draws through the bound and its proof chain.

    Returns (draws passing everything, worst lhs/rhs ratio of the final
    bound, first failing verdicts if any).
    """
    rng = np.random.default_rng(seed)
    passed, worst, failures = 0, 0.0, []
    for _ in range(draws):
        E, w, C = random_interpolation_draw(grid, rng)
        verdicts = [check_interpolation(grid, E, w, C)] + check_interpolation_chain(grid, E, w, C)
        bad = [v for v in verdicts if not v.passed]
        if bad:
            failures = failures or bad
        else:
            passed += 1
        worst = max(worst, verdicts[0].lhs / verdicts[0].rhs if verdicts[0].rhs > 0 else math.inf)
    return passed, worst, failures

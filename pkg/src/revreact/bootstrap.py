"""Integrability-exponent bootstrap in exact rationals.

Each round of heat-kernel smoothing in three space dimensions turns an
``L^p`` bound on the concentrations into an ``L^q`` bound for every ``q``
with ``1/q > 2/p - 2/5``. Iterating ``1/p_{n+1} = 2/p_n - 2/5`` from
``p_0`` either leaves every finite exponent reachable (the next reciprocal
is ``<= 0``) or never does. Writing ``r_n = 1/p_n`` the map is affine,
``r_{n+1} - 2/5 = 2 (r_n - 2/5)``, so ``p = 5/2`` is the repelling fixed
point that separates the two behaviours. The 2/5 is specific to d = 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

GAIN = Fraction(2, 5)
FIXED_POINT = Fraction(5, 2)


@dataclass(frozen=True)
class ExponentTrace:
    exponents: tuple[Fraction, ...]
    terminated: bool
    steps: int

    def __str__(self) -> str:
        shown = [str(p) for p in self.exponents]
        if len(shown) > 8:
            shown = shown[:4] + ["..."] + shown[-2:]
        body = ", ".join(shown)
        tail = "then every finite q" if self.terminated else "not terminated"
        return f"[{body}] ({tail}; {self.steps} steps)"


def _as_fraction(p0) -> Fraction:
    p = Fraction(p0)
    if p < 1:
        raise ValueError(f"starting exponent must be >= 1, got {p}")
    return p


def bootstrap_exponents(p0, max_steps: int = 64) -> ExponentTrace:
    """Run the recursion from ``p0`` (int, str like ``"15/4"`` or Fraction)."""
    p = _as_fraction(p0)
    seq = [p]
    for n in range(1, max_steps + 1):
        r = 2 / p - GAIN
        if r <= 0:
            return ExponentTrace(tuple(seq), True, n)
        p = 1 / r
        seq.append(p)
    return ExponentTrace(tuple(seq), False, max_steps)


def bootstrap_feasible(p0) -> bool:
    """True iff the recursion escapes to every finite exponent, i.e. ``p0 > 5/2``."""
    return _as_fraction(p0) > FIXED_POINT

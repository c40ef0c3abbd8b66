"""Four-species reversible reaction A1 + A3 <=> A2 + A4 under mass action.

Species i (1-based) receives ``(-1)**i * R`` with ``R = a1*a3 - a2*a4``.
Reaction constants are fixed to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Grid, integrate

# (-1)**i for i = 1..4
SIGNS = np.array([-1.0, 1.0, -1.0, 1.0])
N_SPECIES = 4


def reaction_rate(a) -> np.ndarray | float:
    """Net forward rate a1*a3 - a2*a4; ``a`` has the species on its first axis."""
    a1, a2, a3, a4 = a
    return a1 * a3 - a2 * a4


def reaction_rate_regularized(a, eps: float) -> np.ndarray | float:
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    r = reaction_rate(a)
    if eps == 0:
        return r
    a = np.asarray(a, dtype=float)
    return r / (1.0 + eps * np.sum(a * a, axis=0))


@dataclass(frozen=True)
class SpeciesState:
    """Concentrations at time ``t`` plus the running time integrals ``w`` and ``p_accum``.

    ``a`` has shape ``(4, *grid.shape)``.
    """

    t: float
    a: np.ndarray
    w: np.ndarray
    p_accum: np.ndarray

    @classmethod
    def initial(cls, a: np.ndarray) -> SpeciesState:
        a = np.asarray(a, dtype=float)
        if a.shape[0] != N_SPECIES:
            raise ValueError(f"expected 4 species on axis 0, got shape {a.shape}")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValueError("initial concentrations must be finite and nonnegative")
        zero = np.zeros(a.shape[1:])
        return cls(0.0, a, zero, zero.copy())


def linear_invariants(grid: Grid, s: SpeciesState) -> tuple[float, float, float]:
    """Integrals of a1+a2, a3+a4 and a1+a4, all conserved by the exact dynamics."""
    a = s.a
    return (
        integrate(grid, a[0] + a[1]),
        integrate(grid, a[2] + a[3]),
        integrate(grid, a[0] + a[3]),
    )


@dataclass(frozen=True)
class InitialData:
    """Named Neumann-compatible initial-data recipe.

    kind ``constant``: ``species[i] = (value,)``.
    kind ``cosine``: ``species[i] = (base, amp, m_1, ..., m_d)`` giving
    ``base + amp * prod_k cos(m_k pi x_k / L_k)``; requires ``base >= |amp|``.
    kind ``gaussian``: ``species[i] = (base, amp, width, c_1, ..., c_d)``; the
    bump is reflected across every wall (method of images) so its normal
    derivative vanishes on the boundary up to the truncated image tail.
    """

    kind: str = "constant"
    species: tuple[tuple[float, ...], ...] = ((1.0,), (1.0,), (1.0,), (1.0,))

    KINDS = ("constant", "cosine", "gaussian")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown initial-data kind {self.kind!r}; expected one of {self.KINDS}")
        species = tuple(tuple(float(v) for v in row) for row in self.species)
        if len(species) != N_SPECIES:
            raise ValueError(f"need parameters for 4 species, got {len(species)}")
        object.__setattr__(self, "species", species)

    def build(self, grid: Grid) -> np.ndarray:
        return np.stack([self._one(grid, row, i) for i, row in enumerate(self.species)])

    def _one(self, grid: Grid, row: tuple[float, ...], i: int) -> np.ndarray:
        d = grid.dim
        x = grid.coords()
        if self.kind == "constant":
            if len(row) != 1 or row[0] < 0:
                raise ValueError(f"species a{i + 1}: constant recipe takes one nonnegative value")
            return np.full(grid.shape, row[0])
        if self.kind == "cosine":
            if len(row) != 2 + d:
                raise ValueError(f"species a{i + 1}: cosine recipe takes base, amp and {d} mode numbers")
            base, amp, *modes = row
            if base < abs(amp):
                raise ValueError(f"species a{i + 1}: base {base} below |amp| {abs(amp)} would go negative")
            out = np.full(grid.shape, amp)
            for xk, m, L in zip(x, modes, grid.extent):
                out = out * np.cos(m * np.pi * xk / L)
            return base + out
        if len(row) != 3 + d:
            raise ValueError(f"species a{i + 1}: gaussian recipe takes base, amp, width and {d} center coordinates")
        base, amp, width, *center = row
        if base < 0 or amp < 0 or width <= 0:
            raise ValueError(f"species a{i + 1}: gaussian needs base >= 0, amp >= 0, width > 0")
        out = np.full(grid.shape, amp)
        for xk, c, L in zip(x, center, grid.extent):
            bump = np.zeros_like(xk)
            for n in range(-3, 4):
                bump = bump + np.exp(-((xk - c - 2 * n * L) ** 2) / (2 * width**2))
                bump = bump + np.exp(-((xk + c - 2 * n * L) ** 2) / (2 * width**2))
            out = out * bump
        return base + out


@dataclass(frozen=True)
class SimulationConfig:
    diff: tuple[float, float, float, float] = (1.0, 0.5, 0.2, 2.0)
    eps: float = 0.0
    horizon: float = 1.0
    dt_init: float = 1e-3
    dt_max: float = 1e-2
    # accepted steps grow dt by 1/safety, up to dt_max
    safety: float = 0.8
    max_steps: int = 100_000
    extent: tuple[float, ...] = (1.0, 1.0)
    nodes: tuple[int, ...] = (64, 64)
    initial: InitialData = field(default_factory=InitialData)
    snapshots: int = 20
    linear_tol: float = 1e-10
    entropy_tol: float = 1e-8
    checks: tuple[str, ...] = ("entropy", "conservation", "positivity", "w_bound", "apriori", "reaction_energy")

    def __post_init__(self):
        diff = tuple(float(d) for d in self.diff)
        if len(diff) != N_SPECIES or any(not d > 0 for d in diff):
            raise ValueError(f"need four strictly positive diffusion rates, got {self.diff}")
        object.__setattr__(self, "diff", diff)
        object.__setattr__(self, "extent", tuple(float(e) for e in self.extent))
        object.__setattr__(self, "nodes", tuple(int(n) for n in self.nodes))
        object.__setattr__(self, "checks", tuple(self.checks))
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if not 0 < self.dt_init <= self.dt_max:
            raise ValueError(f"need 0 < dt_init <= dt_max, got {self.dt_init}, {self.dt_max}")
        if not 0 < self.safety <= 1:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")
        if self.snapshots < 1 or self.max_steps < 1:
            raise ValueError("snapshots and max_steps must be positive")
        unknown = set(self.checks) - set(CHECK_NAMES)
        if unknown:
            raise ValueError(f"unknown checks {sorted(unknown)}; valid: {CHECK_NAMES}")

    @property
    def grid(self) -> Grid:
        return Grid(self.extent, self.nodes)

    def initial_state(self) -> SpeciesState:
        return SpeciesState.initial(self.initial.build(self.grid))

    def with_(self, **kw) -> SimulationConfig:
        return replace(self, **kw)


CHECK_NAMES = ("entropy", "conservation", "positivity", "w_bound", "apriori", "reaction_energy")


def default_config() -> SimulationConfig:
    """The reference 2D scenario: 64x64 unit square, T = 1, cosine bumps."""
    return SimulationConfig(
        initial=InitialData(
            "cosine",
            (
                (2.0, 1.5, 1, 1),
                (0.6, 0.5, 2, 0),
                (1.2, 1.0, 0, 1),
                (0.4, 0.3, 1, 2),
            ),
        )
    )


def equilibrium_config(**kw) -> SimulationConfig:
    return SimulationConfig(initial=InitialData("constant", ((1.0,),) * 4), **kw)

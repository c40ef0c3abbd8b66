"""Rectangular node grids with Neumann-consistent finite differences.

Fields are plain numpy arrays whose shape equals ``grid.shape``. Nodes sit at
``x_k = j * h_k`` for ``j = 0 .. nodes_k - 1`` so both walls carry a node.
The Laplacian uses mirror ghosts (``f[-1] = f[1]``), which together with the
trapezoidal weights makes ``W @ laplacian`` a symmetric negative
semi-definite matrix; discrete mass conservation and summation by parts
follow exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft


@dataclass(frozen=True)
class Grid:
    extent: tuple[float, ...]
    nodes: tuple[int, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        extent = tuple(float(e) for e in self.extent)
        nodes = tuple(int(n) for n in self.nodes)
        if len(extent) != len(nodes):
            raise ValueError(f"extent has {len(extent)} axes but nodes has {len(nodes)}")
        if not 1 <= len(nodes) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(nodes)}")
        if any(n < 3 for n in nodes):
            raise ValueError(f"need at least 3 nodes per axis, got {nodes}")
        if any(not np.isfinite(e) or e <= 0 for e in extent):
            raise ValueError(f"extents must be finite and positive, got {extent}")
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "dim", len(nodes))

    @classmethod
    def uniform(cls, dim: int, n: int, length: float = 1.0) -> Grid:
        return cls((length,) * dim, (n,) * dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.nodes

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / (n - 1) for e, n in zip(self.extent, self.nodes))

    @property
    def measure(self) -> float:
        return float(np.prod(self.extent))

    @property
    def node_count(self) -> int:
        return int(np.prod(self.nodes))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(0.0, e, n) for e, n in zip(self.extent, self.nodes)]

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        return self._coords

    @cached_property
    def _coords(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij", sparse=True)

    @cached_property
    def weights(self) -> np.ndarray:
        """Tensor trapezoid weights; they sum to ``measure`` up to rounding."""
        w = np.ones(self.shape)
        for k, (h, n) in enumerate(zip(self.spacing, self.nodes)):
            wk = np.full(n, h)
            wk[0] = wk[-1] = 0.5 * h
            w = w * wk.reshape([-1 if j == k else 1 for j in range(self.dim)])
        return w

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of ``laplacian_neumann`` on the cosine basis, broadcast to ``shape``."""
        lam = np.zeros(self.shape)
        for k, (h, n) in enumerate(zip(self.spacing, self.nodes)):
            j = np.arange(n)
            lk = -(2.0 / h**2) * (1.0 - np.cos(np.pi * j / (n - 1)))
            lam = lam + lk.reshape([-1 if m == k else 1 for m in range(self.dim)])
        return lam


def _check_shape(grid: Grid, f: np.ndarray, batch: bool = False):
    trailing = f.shape[f.ndim - grid.dim:] if batch else f.shape
    if trailing != grid.shape or (batch and f.ndim < grid.dim):
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")


def _sl(ndim: int, axis: int, s: slice) -> tuple:
    idx = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


def laplacian_neumann(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Second-order 3-point Laplacian per axis with mirror ghost nodes.

    Leading axes beyond the grid dimensions are treated as a batch.
    """
    f = np.asarray(f, dtype=float)
    _check_shape(grid, f, batch=True)
    out = np.zeros_like(f)
    nd = f.ndim
    for k, h in enumerate(grid.spacing):
        ax = nd - grid.dim + k
        e = np.diff(f, axis=ax) / h**2
        # interior: e[j] - e[j-1]; walls: mirror ghost doubles the single edge
        out[_sl(nd, ax, slice(1, -1))] += e[_sl(nd, ax, slice(1, None))] - e[_sl(nd, ax, slice(None, -1))]
        out[_sl(nd, ax, slice(0, 1))] += 2.0 * e[_sl(nd, ax, slice(0, 1))]
        out[_sl(nd, ax, slice(-1, None))] -= 2.0 * e[_sl(nd, ax, slice(-1, None))]
    return out


def gradient_sq(grid: Grid, f: np.ndarray) -> np.ndarray:
    """|grad f|^2 at nodes: central differences inside, one-sided at the walls.

    Leading axes beyond the grid dimensions are treated as a batch.
    """
    f = np.asarray(f, dtype=float)
    _check_shape(grid, f, batch=True)
    out = np.zeros_like(f)
    nd = f.ndim
    for k, h in enumerate(grid.spacing):
        ax = nd - grid.dim + k
        e = np.diff(f, axis=ax) / h
        d = np.empty_like(f)
        d[_sl(nd, ax, slice(1, -1))] = 0.5 * (e[_sl(nd, ax, slice(1, None))] + e[_sl(nd, ax, slice(None, -1))])
        d[_sl(nd, ax, slice(0, 1))] = e[_sl(nd, ax, slice(0, 1))]
        d[_sl(nd, ax, slice(-1, None))] = e[_sl(nd, ax, slice(-1, None))]
        out += d * d
    return out


def integrate(grid: Grid, f: np.ndarray) -> float:
    """Trapezoidal quadrature; summation order is fixed by numpy's pairwise sum."""
    f = np.asarray(f, dtype=float)
    _check_shape(grid, f)
    return float(np.sum(grid.weights * f))


def sup_norm(f: np.ndarray) -> float:
    return float(np.max(np.abs(f))) if np.size(f) else 0.0


def solve_shifted(grid: Grid, rhs: np.ndarray, c) -> np.ndarray:
    """Solve ``(I - c * laplacian_neumann) u = rhs`` for ``c >= 0``.

    The mirror-ghost Laplacian is diagonal in the DCT-I basis, so the solve is
    one forward and one inverse transform. ``rhs`` may carry leading batch
    axes, in which case ``c`` may be an array over those axes.
    """
    rhs = np.asarray(rhs, dtype=float)
    _check_shape(grid, rhs, batch=True)
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("shift must be nonnegative")
    c = c.reshape(c.shape + (1,) * grid.dim)
    axes = tuple(range(rhs.ndim - grid.dim, rhs.ndim))
    coef = fft.dctn(rhs, type=1, axes=axes)
    coef /= 1.0 - c * grid.eigenvalues
    return fft.idctn(coef, type=1, axes=axes)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revreact.grid import Grid, gradient_sq, integrate, laplacian_neumann, solve_shifted, sup_norm


def dense_laplacian_1d(n, h):
    """Mirror-ghost stencil assembled row by row."""
    A = np.zeros((n, n))
    for j in range(n):
        left = j - 1 if j > 0 else 1
        right = j + 1 if j < n - 1 else n - 2
        A[j, left] += 1.0 / h**2
        A[j, right] += 1.0 / h**2
        A[j, j] -= 2.0 / h**2
    return A


def dense_laplacian(grid):
    mats = [dense_laplacian_1d(n, h) for n, h in zip(grid.nodes, grid.spacing)]
    eyes = [np.eye(n) for n in grid.nodes]
    total = 0
    for k in range(grid.dim):
        term = np.ones((1, 1))
        for j in range(grid.dim):
            term = np.kron(term, mats[j] if j == k else eyes[j])
        total = total + term
    return total


GRIDS = [Grid((1.0,), (7,)), Grid((2.0, 0.5), (5, 6)), Grid((1.0, 1.5, 0.7), (4, 3, 5))]


def test_validation():
    with pytest.raises(ValueError):
        Grid((1.0,), (2,))
    with pytest.raises(ValueError):
        Grid((1.0, 1.0), (5,))
    with pytest.raises(ValueError):
        Grid((1.0,) * 4, (3,) * 4)
    with pytest.raises(ValueError):
        Grid((0.0,), (5,))


def test_basic_geometry():
    g = Grid((2.0, 3.0), (5, 7))
    assert g.dim == 2 and g.shape == (5, 7) and g.node_count == 35
    assert g.spacing == (0.5, 0.5)
    assert g.measure == 6.0
    assert np.isclose(g.weights.sum(), g.measure)
    assert Grid.uniform(3, 4).shape == (4, 4, 4)


@pytest.mark.parametrize("grid", GRIDS, ids=lambda g: f"{g.dim}d")
def test_laplacian_matches_dense_stencil(grid):
    rng = np.random.default_rng(1)
    f = rng.normal(size=grid.shape)
    expect = (dense_laplacian(grid) @ f.ravel()).reshape(grid.shape)
    assert np.allclose(laplacian_neumann(grid, f), expect, rtol=1e-12, atol=1e-10)


@pytest.mark.parametrize("grid", GRIDS, ids=lambda g: f"{g.dim}d")
def test_weighted_laplacian_symmetric_and_mass_free(grid):
    W = np.diag(grid.weights.ravel())
    WA = W @ dense_laplacian(grid)
    assert np.allclose(WA, WA.T, atol=1e-9)
    assert np.all(np.linalg.eigvalsh(0.5 * (WA + WA.T)) < 1e-9)
    rng = np.random.default_rng(2)
    assert abs(integrate(grid, laplacian_neumann(grid, rng.normal(size=grid.shape)))) < 1e-9


@pytest.mark.parametrize("grid", GRIDS, ids=lambda g: f"{g.dim}d")
def test_cosine_modes_are_eigenvectors(grid):
    x = grid.coords()
    modes = [1, 2, 0][: grid.dim]
    phi = np.ones(grid.shape)
    lam = 0.0
    for xk, m, h, L in zip(x, modes, grid.spacing, grid.extent):
        phi = phi * np.cos(m * np.pi * xk / L)
        lam += -(2.0 / h**2) * (1.0 - np.cos(m * np.pi * h / L))
    assert np.allclose(laplacian_neumann(grid, phi), lam * phi, atol=1e-9)
    assert np.allclose(np.sort(grid.eigenvalues.ravel()), np.sort(np.linalg.eigvals(dense_laplacian(grid)).real),
                       atol=1e-8)


def test_laplacian_second_order_on_smooth_neumann_field():
    # exp(cos(pi x)) is even about both walls, so the ghost stencil keeps full order there too
    errs = []
    for n in (17, 33, 65):
        g = Grid((1.0,), (n,))
        x = g.axes()[0]
        u = np.exp(np.cos(np.pi * x))
        exact = np.pi**2 * u * (np.sin(np.pi * x) ** 2 - np.cos(np.pi * x))
        errs.append(sup_norm(laplacian_neumann(g, u) - exact))
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_gradient_sq_exact_for_linear_fields():
    g = Grid((1.0, 2.0), (9, 5))
    x, y = g.coords()
    f = 3.0 * x - 0.5 * y + np.zeros(g.shape)
    assert np.allclose(gradient_sq(g, f), 9.25)


def test_gradient_sq_consistent():
    g = Grid((1.0, 1.0), (129, 129))
    x, y = g.coords()
    f = np.cos(np.pi * x) * np.cos(2 * np.pi * y)
    exact = 0.5 * 0.5 * (np.pi**2 + 4 * np.pi**2)
    assert abs(integrate(g, gradient_sq(g, f)) / exact - 1) < 0.05


def test_batch_axes():
    g = Grid((1.0, 1.0), (6, 5))
    f = np.random.default_rng(3).normal(size=(4,) + g.shape)
    assert np.allclose(laplacian_neumann(g, f)[2], laplacian_neumann(g, f[2]))
    assert np.allclose(gradient_sq(g, f)[1], gradient_sq(g, f[1]))
    with pytest.raises(ValueError):
        laplacian_neumann(g, np.zeros((5, 6)))
    with pytest.raises(ValueError):
        integrate(g, f)


def test_integrate_trapezoid():
    g = Grid((2.0,), (5,))
    x = g.axes()[0]
    assert integrate(g, 3.0 * x + 1.0) == pytest.approx(8.0)
    # trapezoid error (b - a) h^2 f'' / 12 = 1/12
    assert integrate(g, x**2) == pytest.approx(8 / 3 + 1 / 12, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 12), m=st.integers(3, 9), c=st.floats(0.0, 10.0), seed=st.integers(0, 2**16))
def test_solve_shifted_against_dense_solve(n, m, c, seed):
    g = Grid((1.3, 0.8), (n, m))
    b = np.random.default_rng(seed).normal(size=g.shape)
    A = np.eye(n * m) - c * dense_laplacian(g)
    expect = np.linalg.solve(A, b.ravel()).reshape(g.shape)
    assert np.allclose(solve_shifted(g, b, c), expect, atol=1e-10 * (1 + c))


def test_solve_shifted_batched_shifts():
    g = Grid((1.0,), (9,))
    b = np.random.default_rng(4).normal(size=(3, 9))
    c = np.array([0.0, 0.1, 2.0])
    u = solve_shifted(g, b, c)
    for k in range(3):
        assert np.allclose(u[k], solve_shifted(g, b[k], c[k]))
    with pytest.raises(ValueError):
        solve_shifted(g, b[0], -1.0)

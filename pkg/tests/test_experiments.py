import numpy as np
import pytest

from revreact.experiments import (
    STUDIES,
    RefinementPlan,
    StudyResult,
    _finish_energy,
    _finish_refinement,
    _finish_stability,
    _finish_sweep,
    default_perturbation,
    energy_balance_study,
    epsilon_sweep,
    refinement_study,
    stability_twin_run,
)
from revreact.grid import laplacian_neumann
from revreact.system import default_config, equilibrium_config

SMALL = default_config().with_(nodes=(17, 17), horizon=0.2, snapshots=5)


def test_study_registry():
    assert set(STUDIES) == {"epsilon_sweep", "stability", "refinement", "energy_balance"}


def test_sweep_validates_list():
    with pytest.raises(ValueError):
        epsilon_sweep(SMALL, [1e-2, 1e-3])
    with pytest.raises(ValueError):
        epsilon_sweep(SMALL, [1e-3, 1e-2, 0.0])


def test_sweep_distances_scale_with_eps():
    res = epsilon_sweep(SMALL, [1e-1, 1e-2, 1e-3, 0.0])
    d = [r["sup_l2_distance"] for r in res.runs]
    assert res.verdict and res.derived["distances_strictly_decreasing"]
    assert d[-1] == 0.0
    # first order in eps for small eps
    assert d[1] / d[2] == pytest.approx(10, rel=0.05)


def test_threaded_and_serial_agree():
    a = epsilon_sweep(SMALL, [1e-2, 0.0], deterministic=True)
    b = epsilon_sweep(SMALL, [1e-2, 0.0], deterministic=False)
    assert a.runs == b.runs


def test_stability_zero_perturbation_is_exact():
    res = stability_twin_run(SMALL, delta=0.0)
    assert res.verdict and all(r["D"] == 0.0 for r in res.runs)


def test_stability_envelope():
    res = stability_twin_run(SMALL, delta=1e-2)
    assert res.verdict and res.derived["max_ratio"] < 1
    assert res.runs[0]["D"] == res.derived["D0"] > 0


def test_default_perturbation_is_cosine_eigenmode():
    g = SMALL.grid
    p = default_perturbation(g)
    assert p.shape == (4,) + g.shape and np.max(np.abs(p)) == pytest.approx(1.0)
    for pi in p:
        lap = laplacian_neumann(g, pi)
        k = np.argmax(np.abs(pi))
        lam = lap.flat[k] / pi.flat[k]
        assert np.allclose(lap, lam * pi, atol=1e-9)


def test_refinement_small_1d():
    cfg = default_config().with_(nodes=(9,), extent=(1.0,), initial=equilibrium_config().initial)
    plan = RefinementPlan(levels=3, space_nodes0=9, space_dt=1e-5, space_horizon=0.02, time_nodes=129,
                          time_dt0=0.02, time_horizon=0.2)
    res = refinement_study(cfg, plan)
    assert res.verdict, res.derived
    assert min(res.derived["space_orders"]) > 1.9 and min(res.derived["time_orders"]) > 0.9
    with pytest.raises(ValueError):
        refinement_study(cfg, RefinementPlan(levels=2))


def test_energy_balance_at_equilibrium_is_exact():
    res = energy_balance_study(equilibrium_config(nodes=(9, 9)), levels=2, horizon=0.05)
    assert all(r["residual"] <= 1e-12 for r in res.runs)


def test_verdicts_recompute_from_stored_runs(tmp_path):
    res = StudyResult("stability", [{"t": 0.0, "D": 1.0, "envelope": 1.0}, {"t": 1.0, "D": 3.0, "envelope": 2.0}],
                      {"tol": 1e-3})
    assert not _finish_stability(res).verdict
    sweep = StudyResult("epsilon_sweep", [{"eps": 0.1, "sup_l2_distance": 1.0, "check_entropy": True},
                                          {"eps": 0.0, "sup_l2_distance": 0.0, "check_entropy": False}])
    assert not _finish_sweep(sweep).verdict
    ref = StudyResult("refinement", [{"kind": k, "error": e} for k, e in
                                     [("space", 4.0), ("space", 1.0), ("space", 0.25), ("time", 4.0),
                                      ("time", 2.0), ("time", 1.5)]],
                      {"min_space_order": 1.9, "min_time_order": 0.9})
    assert not _finish_refinement(ref).verdict and ref.derived["space_orders"] == [2.0, 2.0]
    en = _finish_energy(StudyResult("energy_balance", [{"residual": 9.0}, {"residual": 3.0}, {"residual": 1.0}],
                                    {"min_ratio": 2.5}))
    assert en.verdict and en.derived["ratios"] == [3.0, 3.0]
    paths = en.write(tmp_path)
    assert paths[0].read_text().startswith("study: energy_balance\nverdict: PASS")
    assert paths[1].read_text().splitlines()[0] == "residual"

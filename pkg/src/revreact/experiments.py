"""Multi-run studies: regularization sweep, twin-run stability, refinement orders.

Verdicts are recomputed from the stored metrics only, so a StudyResult read
back from its CSV reproduces the same verdict. Independent runs go through
a thread pool unless ``deterministic`` is set; reductions are fixed-order
either way, so both modes give identical numbers.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checks import energy_balance_residual
from .grid import integrate
from .integrator import ManufacturedSolution, Trajectory, mms_source, run
from .report import audit
from .system import SimulationConfig, SpeciesState


@dataclass
class StudyResult:
    name: str
    runs: list[dict] = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    verdict: bool = False

    def to_text(self) -> str:
        lines = [f"study: {self.name}", f"verdict: {'PASS' if self.verdict else 'FAIL'}", "derived:"]
        lines += [f"  {k} = {v!r}" for k, v in self.derived.items()]
        lines.append("runs:")
        lines.append(self.runs_csv().rstrip())
        return "\n".join(lines) + "\n"

    def runs_csv(self) -> str:
        if not self.runs:
            return ""
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(self.runs[0]), lineterminator="\n")
        w.writeheader()
        for row in self.runs:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()

    def write(self, out_dir: Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        txt = out_dir / f"{self.name}.txt"
        table = out_dir / f"{self.name}_runs.csv"
        txt.write_text(self.to_text())
        table.write_text(self.runs_csv())
        return [txt, table]


def _run_many(jobs: Sequence[Callable[[], Trajectory]], deterministic: bool) -> list[Trajectory]:
    if deterministic or len(jobs) < 2:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=min(4, len(jobs))) as pool:
        return list(pool.map(lambda job: job(), jobs))


def _l2(grid, a: np.ndarray, b: np.ndarray) -> float:
    return math.sqrt(integrate(grid, np.sum((a - b) ** 2, axis=0)))


# -- regularization ---------------------------------------------------------


def epsilon_sweep(cfg: SimulationConfig, eps_list: Sequence[float], deterministic: bool = True) -> StudyResult:
    """Run the same scenario for each eps; distances are to the last (eps = 0) run."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or eps_list[-1] != 0.0:
        raise ValueError("eps_list must end at 0")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError(f"eps_list must be strictly decreasing, got {eps_list}")
    trajs = _run_many([lambda e=e: run(cfg.with_(eps=e)) for e in eps_list], deterministic)
    ref = trajs[-1]
    rows = []
    for e, tr in zip(eps_list, trajs):
        dist = max(_l2(tr.grid, s.a, r.a) for s, r in zip(tr.states, ref.states))
        row = {"eps": e, "sup_l2_distance": dist}
        row.update({f"check_{v.name}": v.passed for v in audit(tr)})
        rows.append(row)
    return _finish_sweep(StudyResult("epsilon_sweep", rows))


def _finish_sweep(res: StudyResult) -> StudyResult:
    d = [r["sup_l2_distance"] for r in res.runs]
    res.derived["distances_nonincreasing"] = all(b <= a for a, b in zip(d, d[1:]))
    res.derived["distances_strictly_decreasing"] = all(b < a for a, b in zip(d, d[1:]))
    res.derived["all_checks_pass"] = all(v for r in res.runs for k, v in r.items() if k.startswith("check_"))
    res.verdict = res.derived["distances_nonincreasing"] and res.derived["all_checks_pass"]
    return res


# -- Gronwall stability -----------------------------------------------------


def default_perturbation(grid) -> np.ndarray:
    """One cosine mode per species, Neumann by construction, unit amplitude."""
    x = grid.coords()
    out = []
    for i in range(4):
        p = np.ones(grid.shape)
        for k, (xk, L) in enumerate(zip(x, grid.extent)):
            p = p * np.cos((i + k) % 3 * np.pi * xk / L)
        out.append(p)
    return np.stack(out)


def stability_twin_run(
    cfg: SimulationConfig,
    delta: float = 1e-3,
    perturbation: np.ndarray | None = None,
    tol: float = 1e-3,
    deterministic: bool = True,
) -> StudyResult:
    """Check D(t) <= D(0) exp(2 M(t) t) (1 + tol) with M(t) the running max of |a|_inf over both runs."""
    grid = cfg.grid
    base = cfg.initial_state()
    pert = default_perturbation(grid) if perturbation is None else np.asarray(perturbation, dtype=float)
    other = SpeciesState.initial(base.a + delta * pert)
    t1, t2 = _run_many([lambda: run(cfg, initial=base), lambda: run(cfg, initial=other)], deterministic)

    def running_max(tr):
        t = tr.series("t")
        return t, np.maximum.accumulate(tr.series("a_max"))

    ta, ma = running_max(t1)
    tb, mb = running_max(t2)
    rows = []
    D0 = integrate(grid, np.sum((t1.states[0].a - t2.states[0].a) ** 2, axis=0))
    for s1, s2 in zip(t1.states, t2.states):
        M = max(ma[np.searchsorted(ta, s1.t, side="right") - 1], mb[np.searchsorted(tb, s2.t, side="right") - 1])
        D = integrate(grid, np.sum((s1.a - s2.a) ** 2, axis=0))
        rows.append({"t": s1.t, "D": D, "envelope": D0 * math.exp(2.0 * M * s1.t), "max_sup": float(M)})
    res = StudyResult("stability", rows, {"delta": delta, "tol": tol, "D0": D0})
    return _finish_stability(res)


def _finish_stability(res: StudyResult) -> StudyResult:
    tol = res.derived["tol"]
    ratios = [r["D"] / r["envelope"] if r["envelope"] > 0 else (0.0 if r["D"] == 0 else math.inf) for r in res.runs]
    # t = 0 has ratio 1 by construction; report the worst later snapshot
    res.derived["max_ratio"] = max(ratios[1:], default=ratios[0])
    res.verdict = all(r["D"] <= r["envelope"] * (1.0 + tol) for r in res.runs)
    return res


# -- refinement -------------------------------------------------------------


@dataclass(frozen=True)
class RefinementPlan:
    """Level layout for manufactured-solution order studies.

    Spatial levels use ``space_nodes0 * 2**k`` intervals per axis at fixed
    ``space_dt``; temporal levels halve ``time_dt0`` on a fixed fine grid.
    """

    levels: int = 3
    space_nodes0: int = 9
    space_dt: float = 2e-5
    space_horizon: float = 0.05
    time_nodes: int = 65
    time_dt0: float = 0.02
    time_horizon: float = 0.2
    min_space_order: float = 1.9
    min_time_order: float = 0.9


DEFAULT_MMS = ManufacturedSolution(
    base=(2.0, 1.0, 1.5, 1.0),
    amp=(0.5, 0.3, 0.4, 0.2),
    rate=(1.0, 0.5, 2.0, 0.3),
    modes=((1, 1, 1), (2, 0, 1), (0, 1, 0), (1, 2, 2)),
)


def _trim(ms: ManufacturedSolution, dim: int) -> ManufacturedSolution:
    return ManufacturedSolution(ms.base, ms.amp, ms.rate, tuple(tuple(m[:dim]) for m in ms.modes))


def mms_error(cfg: SimulationConfig, ms: ManufacturedSolution) -> float:
    """Max-norm error at the horizon of the forced run against the manufactured field."""
    grid = cfg.grid
    ms = _trim(ms, grid.dim)
    s0 = SpeciesState.initial(ms.value(grid, 0.0))
    tr = run(cfg, initial=s0, source=lambda t: mms_source(ms, grid, cfg.diff, t, cfg.eps), every_step=False)
    return float(np.max(np.abs(tr.final.a - ms.value(grid, cfg.horizon))))


def _orders(errors: Sequence[float]) -> list[float]:
    out = []
    for a, b in zip(errors, errors[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else math.inf)
    return out


def refinement_study(
    cfg: SimulationConfig,
    plan: RefinementPlan = RefinementPlan(),
    ms: ManufacturedSolution = DEFAULT_MMS,
    deterministic: bool = True,
) -> StudyResult:
    if plan.levels < 3:
        raise ValueError("a refinement study needs at least 3 levels")
    d = len(cfg.nodes)
    fixed = dict(safety=1.0, snapshots=1, eps=cfg.eps)
    space_cfgs = [
        cfg.with_(nodes=((plan.space_nodes0 - 1) * 2**k + 1,) * d, horizon=plan.space_horizon,
                  dt_init=plan.space_dt, dt_max=plan.space_dt, **fixed)
        for k in range(plan.levels)
    ]
    time_cfgs = [
        cfg.with_(nodes=(plan.time_nodes,) * d, horizon=plan.time_horizon,
                  dt_init=plan.time_dt0 / 2**k, dt_max=plan.time_dt0 / 2**k, **fixed)
        for k in range(plan.levels)
    ]
    jobs = [lambda c=c: mms_error(c, ms) for c in space_cfgs + time_cfgs]
    if deterministic:
        errs = [job() for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=4) as pool:
            errs = list(pool.map(lambda job: job(), jobs))
    rows = [{"kind": "space", "h": c.grid.spacing[0], "dt": c.dt_max, "error": e}
            for c, e in zip(space_cfgs, errs[: plan.levels])]
    rows += [{"kind": "time", "h": c.grid.spacing[0], "dt": c.dt_max, "error": e}
             for c, e in zip(time_cfgs, errs[plan.levels:])]
    res = StudyResult("refinement", rows, {"min_space_order": plan.min_space_order,
                                           "min_time_order": plan.min_time_order})
    return _finish_refinement(res)


def _finish_refinement(res: StudyResult) -> StudyResult:
    space = [r["error"] for r in res.runs if r["kind"] == "space"]
    time = [r["error"] for r in res.runs if r["kind"] == "time"]
    res.derived["space_orders"] = _orders(space)
    res.derived["time_orders"] = _orders(time)
    exact = max(space + time) <= 1e-12
    res.derived["exact"] = exact
    res.verdict = exact or (
        min(res.derived["space_orders"]) >= res.derived["min_space_order"]
        and min(res.derived["time_orders"]) >= res.derived["min_time_order"]
    )
    return res


def energy_balance_study(
    cfg: SimulationConfig,
    levels: int = 3,
    nodes0: int = 9,
    dt0: float = 5e-4,
    horizon: float = 0.2,
    min_ratio: float = 2.5,
    deterministic: bool = True,
) -> StudyResult:
    """Energy-identity residual as (h, dt) are halved together."""
    d = len(cfg.nodes)
    cfgs = [
        cfg.with_(nodes=((nodes0 - 1) * 2**k + 1,) * d, horizon=horizon, dt_init=dt0 / 2**k,
                  dt_max=dt0 / 2**k, safety=1.0, snapshots=1)
        for k in range(levels)
    ]
    trajs = _run_many([lambda c=c: run(c) for c in cfgs], deterministic)
    rows = [{"h": c.grid.spacing[0], "dt": c.dt_max, "residual": float(energy_balance_residual(tr))}
            for c, tr in zip(cfgs, trajs)]
    res = StudyResult("energy_balance", rows, {"min_ratio": min_ratio})
    return _finish_energy(res)


def _finish_energy(res: StudyResult) -> StudyResult:
    r = [row["residual"] for row in res.runs]
    ratios = [float(a / b) if b > 0 else math.inf for a, b in zip(r, r[1:])]
    res.derived["ratios"] = ratios
    res.verdict = all(q >= res.derived["min_ratio"] for q in ratios)
    return res


STUDIES = {
    "epsilon_sweep": lambda cfg, det: epsilon_sweep(cfg, [1e-2, 1e-3, 1e-4, 0.0], det),
    "stability": lambda cfg, det: stability_twin_run(cfg, 1e-3, deterministic=det),
    "refinement": lambda cfg, det: refinement_study(cfg, deterministic=det),
    "energy_balance": lambda cfg, det: energy_balance_study(cfg, deterministic=det),
}

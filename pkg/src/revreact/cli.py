"""Command-line entry point.

    revreact run       [--config PATH] [--out DIR] [--snapshots N]
    revreact verify    [--config PATH] [--seed N] [--draws N]
    revreact study     NAME [--config PATH] [--out DIR] [--deterministic]
    revreact bootstrap [P0 ...]

Exit codes: 0 success, 2 a checker failed, 1 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bootstrap import bootstrap_exponents
from .checks import elementary_inequalities_selftest, energy_balance_residual, interpolation_campaign
from .config import ConfigError, dump_config, load_config
from .experiments import STUDIES
from .integrator import SimulationError, run
from .report import audit, write_entropy_report, write_field, write_manifest, write_timeseries

log = logging.getLogger("revreact")

EXIT_OK, EXIT_ERROR, EXIT_CHECK = 0, 1, 2


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "snapshots", None) is not None:
        cfg = cfg.with_(snapshots=args.snapshots)
    return cfg


def _table(verdicts) -> str:
    rows = [f"{'check':<16} {'lhs':>14} {'rhs':>14}  status"]
    rows += [f"{v.name:<16} {v.lhs:>14.6g} {v.rhs:>14.6g}  {v.status}" for v in verdicts]
    return "\n".join(rows)


def cmd_run(args) -> int:
    started = _now()
    cfg = _load(args)
    out = Path(args.out)
    fields = out / "fields"
    fields.mkdir(parents=True, exist_ok=True)
    artifacts = []

    def dump(s, _snap, counter=[0]):
        k = counter[0]
        counter[0] += 1
        for i in range(4):
            path, side = write_field(fields / f"a{i + 1}_{k:04d}.bin", s.a[i], t=s.t, species=f"a{i + 1}",
                                     extent=cfg.extent)
            artifacts.extend([path, side])

    traj = run(cfg, callbacks=[dump])
    verdicts = audit(traj, cfg.checks)
    extra = {
        "steps": len(traj.records) - 1,
        "rejected_steps": traj.rejected,
        "energy_balance_residual": energy_balance_residual(traj),
    }
    artifacts.append(write_timeseries(out / "timeseries.csv", traj))
    artifacts.append(write_entropy_report(out / "entropy_report.csv", verdicts, extra))
    print(_table(verdicts))
    code = EXIT_OK if all(verdicts) else EXIT_CHECK
    write_manifest(out / "manifest.json", config_text=dump_config(cfg), version=__version__,
                   started=started, finished=_now(), artifacts=artifacts, exit_code=code)
    print(f"wrote {len(artifacts) + 1} files to {out}")
    return code


def cmd_verify(args) -> int:
    cfg = _load(args)
    selftest = elementary_inequalities_selftest()
    passed, worst, failures = interpolation_campaign(cfg.grid, args.seed, args.draws)
    trace = bootstrap_exponents(3)
    print(_table([selftest]))
    print(f"interpolation draws: {passed}/{args.draws} pass (seed {args.seed}, grid {cfg.grid.shape}, "
          f"worst ratio {worst:.4f})")
    for v in failures:
        print(f"  first failure: {v.name} lhs={v.lhs:.6g} rhs={v.rhs:.6g} {v.status}")
    print(f"bootstrap p0=3: {trace}")
    ok = selftest.passed and passed == args.draws and trace.terminated
    return EXIT_OK if ok else EXIT_CHECK


def cmd_study(args) -> int:
    if args.name not in STUDIES:
        print(f"unknown study {args.name!r}; valid: {', '.join(STUDIES)}", file=sys.stderr)
        return EXIT_ERROR
    cfg = _load(args)
    res = STUDIES[args.name](cfg, args.deterministic)
    paths = res.write(Path(args.out))
    print(res.to_text(), end="")
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK if res.verdict else EXIT_CHECK


def cmd_bootstrap(args) -> int:
    for p0 in args.p0:
        print(f"p0 = {p0}: {bootstrap_exponents(p0, args.max_steps)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revreact", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log clamping and step rejections")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("--config", type=Path, help="INI config; omitted keys use the defaults")
        if out_default:
            p.add_argument("--out", default=out_default, help="output directory")

    p = sub.add_parser("run", help="simulate one scenario and audit it")
    common(p, "out/run")
    p.add_argument("--snapshots", type=int, help="override the number of stored snapshots")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="self-tests, randomized interpolation draws, bootstrap trace")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("study", help=f"multi-run study: {', '.join(STUDIES)}")
    p.add_argument("name")
    common(p, "out/study")
    p.add_argument("--deterministic", action="store_true", help="run the member simulations serially")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("bootstrap", help="print integrability exponent traces")
    p.add_argument("p0", nargs="*", default=["3"], help="starting exponents, e.g. 3 or 11/4")
    p.add_argument("--max-steps", type=int, default=64)
    p.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

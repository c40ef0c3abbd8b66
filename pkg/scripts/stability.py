"""Twin runs from perturbed initial data against the exponential stability envelope."""

import argparse
from pathlib import Path

from revreact.config import load_config
from revreact.experiments import stability_twin_run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--delta", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    ap.add_argument("--out", type=Path, default=Path("out/stability"))
    args = ap.parse_args()
    cfg = load_config(args.config)
    for delta in args.delta:
        res = stability_twin_run(cfg, delta, deterministic=False)
        res.name = f"stability_delta{delta:g}"
        res.write(args.out)
        print(f"delta = {delta:g}: worst D / envelope = {res.derived['max_ratio']:.4f}  "
              f"{'PASS' if res.verdict else 'FAIL'}")


if __name__ == "__main__":
    main()

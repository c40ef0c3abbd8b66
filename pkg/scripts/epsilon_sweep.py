"""Distance of regularized runs to the eps = 0 run, per eps."""

import argparse
from pathlib import Path

from revreact.config import load_config
from revreact.experiments import epsilon_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    ap.add_argument("--out", type=Path, default=Path("out/epsilon_sweep"))
    args = ap.parse_args()
    res = epsilon_sweep(load_config(args.config), sorted(set(args.eps) | {0.0}, reverse=True), deterministic=False)
    res.write(args.out)
    for row in res.runs[:-1]:
        print(f"eps = {row['eps']:8.1e}   sup_t |a_eps - a_0|_L2 = {row['sup_l2_distance']:.4e}   "
              f"ratio to eps = {row['sup_l2_distance'] / row['eps']:.3f}")
    print("verdict:", "PASS" if res.verdict else "FAIL")


if __name__ == "__main__":
    main()

"""Manufactured-solution convergence orders and energy-identity residual ratios."""

import argparse
from pathlib import Path

from revreact.config import load_config
from revreact.experiments import RefinementPlan, energy_balance_study, refinement_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--out", type=Path, default=Path("out/refinement"))
    args = ap.parse_args()
    cfg = load_config(args.config)
    mms = refinement_study(cfg, RefinementPlan(levels=args.levels), deterministic=False)
    energy = energy_balance_study(cfg, levels=args.levels, deterministic=False)
    for res in (mms, energy):
        res.write(args.out)
        print(res.to_text())


if __name__ == "__main__":
    main()

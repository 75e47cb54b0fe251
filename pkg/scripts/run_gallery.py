#!/usr/bin/env python3
"""Run the diagnostic gallery over radii and seeds and print one row per run.

Example: python3 scripts/run_gallery.py --samples 20000 --out gallery.json
"""

from __future__ import annotations

import argparse
import json
import time

from siegel_bergman.carleson import DiagnoseConfig, diagnose
from siegel_bergman.gallery import RADII, SEEDS, gallery


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--lattice-samples", type=int, default=4096)
    ap.add_argument("--radii", type=float, nargs="+", default=list(RADII))
    ap.add_argument("--seeds", type=int, nargs="+", default=list(SEEDS))
    ap.add_argument("--out", default=None, help="write all rows as JSON")
    args = ap.parse_args(argv)

    rows, wrong = [], 0
    print(f"{'measure':22s} {'r':>4s} {'seed':>4s}  {'bounded':20s} {'vanishing':20s} {'slope':>7s} {'sec':>5s}")
    for case in gallery(args.dim):
        for r in args.radii:
            for seed in args.seeds:
                t = time.perf_counter()
                cfg = DiagnoseConfig(r=r, seed=seed, samples=args.samples, lattice_samples=args.lattice_samples)
                rep = diagnose(case.measure, cfg)
                dt = time.perf_counter() - t
                ok = rep.verdict_bounded == case.bounded and rep.verdict_vanishing == case.vanishing
                wrong += not ok
                slope = rep.slopes["rho_averaging"]
                print(
                    f"{case.name:22s} {r:4g} {seed:4d}  {rep.verdict_bounded:20s} {rep.verdict_vanishing:20s} "
                    f"{slope if slope is not None else float('nan'):7.3f} {dt:5.1f}{'' if ok else '  MISMATCH'}"
                )
                rows.append(
                    {
                        "measure": case.name,
                        "r": r,
                        "seed": seed,
                        "verdict_bounded": rep.verdict_bounded,
                        "verdict_vanishing": rep.verdict_vanishing,
                        "expected": [case.bounded, case.vanishing],
                        "slopes": rep.slopes,
                        "condition_verdicts": rep.condition_verdicts,
                    }
                )
    print(f"{len(rows) - wrong}/{len(rows)} runs match the expected verdicts")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 1 if wrong else 0


if __name__ == "__main__":
    raise SystemExit(main())

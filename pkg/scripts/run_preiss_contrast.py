#!/usr/bin/env python3
"""Compressed 1-NN versus k-NN on the infinite-dimensional tree space.

Both learners see identical training samples and are scored on the same
fresh test points; the distribution is realizable, so test error equals
excess risk. k-NN stays pinned near the infinite-sequence mass alpha while
the compressed learner keeps improving.
"""

import argparse

from nearnet.experiments import ExperimentConfig, run_preiss_contrast, write_rows_csv


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="preiss_contrast.csv")
    ap.add_argument("--seed", type=int, default=20240817)
    ap.add_argument("--alpha", type=float, default=0.3)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--n-grid", default="2000,20000")
    ap.add_argument("--test-size", type=int, default=100_000)
    args = ap.parse_args()
    config = ExperimentConfig(
        scenario="preiss",
        n_grid=tuple(int(v) for v in args.n_grid.split(",")),
        trials=args.trials,
        seed=args.seed,
        test_size=args.test_size,
        alpha=args.alpha,
        # Calibrated so the bound's net-size penalty does not drown the
        # empirical-error differences at desk-scale n; see README.
        c_linear=0.05,
        c_sqrt=0.05,
        scale_policy="geo:2",
    )
    rows = run_preiss_contrast(config)
    failures = write_rows_csv(rows, args.out)
    for learner in ("ksu", "knn"):
        for n in config.n_grid:
            vals = [
                float(r["test_err"])
                for r in rows
                if r["learner"] == learner and r["n"] == n and r["failed"] == 0
            ]
            print(f"{learner} n={n}: mean error {sum(vals) / len(vals):.4f}")
    print(f"wrote {args.out}; {failures} failed trials")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Exact oracle tables for the tree space: the consistency curve of canonical
net partitions, the truncated closed-cell (inconsistent) partitions, and the
small-ball mass ratios. Values are exact rationals rendered alongside their
numerator/denominator."""

import argparse
from fractions import Fraction

from nearnet.oracle import (
    besicovitch_ratio,
    canonical_net_partition,
    inconsistent_partition,
    partition_error,
)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", default="0.3")
    args = ap.parse_args()
    alpha = Fraction(args.alpha)
    print("canonical net partitions (true-majority labels):")
    for k in range(3, 13):
        err = partition_error(canonical_net_partition(k, alpha))
        print(f"  depth {k:2d}: err = {float(err):.3e} = {err}")
    print("truncated closed-cell partitions (base depth 2):")
    for l in range(1, 7):
        err = partition_error(inconsistent_partition(2, l, alpha))
        print(f"  stages {l}: err = {float(err):.6f} = {err}")
    print("small-ball mass ratio around infinite points:")
    for l in range(2, 13):
        r = besicovitch_ratio(l, alpha)
        print(f"  depth {l:2d}: ratio = {float(r):.3e} = {r}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

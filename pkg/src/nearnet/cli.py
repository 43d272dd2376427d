"""Command-line entry points: bound tables, fitting, prediction, the k-NN
baseline, tree-space sampling, the exact oracle tables, and batch experiments."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np

from . import experiments as exps
from . import knn as knn_mod
from . import oracle
from .bounds import BoundParams, delta_schedule, q_value
from .ksu import ScalePolicy, fit, load_model, predict_many, save_model
from .metric import load_sample_csv
from .preiss import PreissParams, PreissSpace, point_from_json, point_to_json, sample_preiss


def _parse_grid(text: str, cast=float) -> list:
    return [cast(v) for v in text.split(",") if v != ""]


def _parse_span(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _decimal_str(v: Fraction, digits: int = 30) -> str:
    getcontext().prec = digits
    return str(Decimal(v.numerator) / Decimal(v.denominator))


def _cmd_bound(args) -> int:
    params = BoundParams(c_linear=args.c1, c_sqrt=args.c2)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        w = csv.writer(out)
        w.writerow(["n", "alpha", "m", "delta", "q"])
        for n in _parse_grid(args.n_grid, int):
            for alpha in _parse_grid(args.alpha_grid):
                for m in _parse_grid(args.m_grid, int):
                    for delta in _parse_grid(args.delta_grid):
                        d = delta_schedule(n) if delta == 0 else delta
                        w.writerow([n, alpha, m, d, repr(q_value(n, alpha, m, d, params))])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_fit(args) -> int:
    sample, space = load_sample_csv(args.input)
    delta = delta_schedule(sample.n) if args.delta == "auto" else float(args.delta)
    params = BoundParams(c_linear=args.bound_c1, c_sqrt=args.bound_c2)
    clf = fit(sample, space, delta, params, ScalePolicy.parse(args.scales))
    save_model(args.out, clf, space)
    print(
        f"fitted n={sample.n} gamma*={clf.gamma_star:g} kappa*={clf.kappa_star} "
        f"alpha*={clf.alpha_star:.6g} Q*={clf.q_star:.6g} scales={clf.scale_policy}"
    )
    return 0


def _read_points(path, space):
    if isinstance(space, PreissSpace):
        points = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                obj = obj.get("point", obj)
                points.append(point_from_json(obj, depth_cap=space.params.depth_cap))
        return points, None
    rows = []
    labels = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            rows.append(row)
    width = len(rows[0])
    labeled = width == space.dim + 1
    pts = np.array([[float(v) for v in r[: space.dim]] for r in rows])
    if labeled:
        labels = np.array([int(r[-1]) for r in rows], dtype=np.int64)
    return pts, (labels if labeled else None)


def _cmd_predict(args) -> int:
    clf, space = load_model(args.model)
    points, _ = _read_points(args.input, space)
    for label in predict_many(clf, points, space):
        print(int(label))
    return 0


def _cmd_knn(args) -> int:
    sample, space = load_sample_csv(args.input)
    k = knn_mod.default_k_schedule(sample.n) if args.k == "auto" else int(args.k)
    model = knn_mod.KnnModel(sample=sample, k=k)
    points, labels = _read_points(args.test, space)
    pred = knn_mod.knn_predict_many(model, points, space)
    for label in pred:
        print(int(label))
    if labels is not None:
        print(f"# error {float(np.mean(pred != labels))!r}")
    return 0


def _cmd_preiss_sample(args) -> int:
    params = PreissParams(alpha=args.alpha, depth_cap=args.depth_cap)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    sample = sample_preiss(rng, args.n, params)
    with open(args.out, "w") as fh:
        for p, label in zip(sample.points, sample.labels):
            fh.write(json.dumps({"point": point_to_json(p), "label": int(label)}) + "\n")
    print(f"wrote {sample.n} points to {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    alpha = Fraction(args.alpha)
    rows = []
    if args.task == "net-error":
        for k in _parse_span(args.k):
            v = oracle.partition_error(oracle.canonical_net_partition(k, alpha))
            rows.append({"k": k, "value": v})
    elif args.task == "inconsistent":
        k = _parse_span(args.k)[0]
        for l in _parse_span(args.l):
            v = oracle.partition_error(oracle.inconsistent_partition(k, l, alpha))
            rows.append({"k": k, "l": l, "value": v})
    elif args.task == "besicovitch":
        for l in _parse_span(args.l):
            rows.append({"l": l, "value": oracle.besicovitch_ratio(l, alpha)})
    else:
        raise ValueError(f"unknown oracle task {args.task!r}")
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        keys = [c for c in ("k", "l") if c in rows[0]]
        w = csv.writer(out)
        w.writerow(keys + ["value_decimal", "numerator", "denominator"])
        for row in rows:
            v = row["value"]
            w.writerow([row[c] for c in keys] + [_decimal_str(v), v.numerator, v.denominator])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_experiment(args) -> int:
    config = exps.ExperimentConfig.from_toml(args.config)
    if config.scenario == "finite-dim":
        rows = exps.run_consistency(config)
    else:
        rows = exps.run_preiss_contrast(config)
    failures = exps.write_rows_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}; {failures} failed trials")
    return 1 if failures else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nearnet")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="CSV table of the compression bound over grids")
    p.add_argument("--n-grid", default="100,1000,10000")
    p.add_argument("--alpha-grid", default="0,0.1,0.2,0.3")
    p.add_argument("--m-grid", default="2,10,50")
    p.add_argument("--delta-grid", default="0.05", help="0 means the automatic schedule")
    p.add_argument("--c1", type=float, default=2.0)
    p.add_argument("--c2", type=float, default=2.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("fit", help="fit the compressed 1-NN learner on a CSV sample")
    p.add_argument("--input", required=True)
    p.add_argument("--delta", default="auto")
    p.add_argument("--scales", default="auto", help="full, auto, or geo:<ratio>")
    p.add_argument("--bound-c1", type=float, default=2.0)
    p.add_argument("--bound-c2", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="label points with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("knn", help="k-NN baseline on a CSV sample")
    p.add_argument("--input", required=True)
    p.add_argument("--k", default="auto")
    p.add_argument("--test", required=True)
    p.set_defaults(func=_cmd_knn)

    p = sub.add_parser("preiss-sample", help="draw a labeled tree-space sample to JSONL")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth-cap", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_preiss_sample)

    p = sub.add_parser("oracle", help="exact measure tables for the tree space")
    p.add_argument("--task", required=True, choices=["net-error", "inconsistent", "besicovitch"])
    p.add_argument("--alpha", default="0.3", help="exact rational, e.g. 0.3 or 3/10")
    p.add_argument("--k", default="5:12", help="net depth or depth range lo:hi")
    p.add_argument("--l", default="2:12", help="stage or ball-depth range lo:hi")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("experiment", help="run a TOML-configured experiment to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

"""Benchmark CLI: run | alignment | verify-budget | batch.

Every output file embeds the fully resolved configuration and seeds.
Per-permutation learning results are written to ``*.report.json`` (byte
deterministic for a fixed seed); wall times go to sibling
``*.timing.json`` files so timing noise never touches the reproducible
artifacts. ``runs.csv`` collects one row per run. Exit codes: 0 success,
2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baselines import (FOGDLearner, FourierFeatureMap, KernelOGDLearner,
                        NOGDLearner, baseline_stepsize_grid)
from .data import DataFormatError, load_dataset, minmax_scale, train_test_split
from .evaluation import (RunReport, budget_bound_harness,
                         kernel_alignment, online_to_batch)
from .kernels import GaussianKernel, SpectrumProfile
from .learner import PomdrConfig, POMDRLearner

DEFAULT_SIGMA_GRID = [2.0 ** k for k in range(-2, 7)]
CSV_COLUMNS = ["algo", "dataset", "sigma", "zeta", "B", "B0", "M", "U", "c",
               "seed", "perm", "amr", "time_s", "A_T", "t_bar", "restarts"]


class ConfigError(ValueError):
    """Invalid parameter combination."""


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}")


def _parse_b0(text: str):
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"--B0 must be an integer or 'auto', got {text!r}")


def _pool_width(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("OKL_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _json_dump(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _load(args):
    return load_dataset(args.data, fmt=args.format,
                        label_column=args.label_column,
                        header=args.csv_header)


def _resolved_config(args, algo: str, horizon: int, grid_value: float) -> dict:
    cfg = {
        "algo": algo,
        "horizon": horizon,
        "sigma": args.sigma,
        "seed": args.seed,
        "perms": args.perms,
        "scale": bool(getattr(args, "scale", False)),
    }
    if algo == "pomdr":
        cfg.update({
            "zeta": args.zeta,
            "B": args.B,
            "B0": args.B0 if args.B0 is not None else "auto",
            "M": args.M,
            "U": args.U,
            "ald_scale": args.ald_scale,
            "lr_scale": grid_value,
        })
    else:
        cfg.update({"eta": grid_value, "B": args.B, "U": args.U})
        if algo == "nogd":
            cfg["rank_fraction"] = args.rank_fraction
    return cfg


def _execute_run(task: dict) -> dict:
    """Run one (grid value, permutation) unit; used by the worker pool."""
    X = task["features"]
    y = task["labels"]
    algo = task["algo"]
    params = task["params"]
    horizon = X.shape[0]
    kernel = GaussianKernel(params["sigma"])
    start = time.perf_counter()
    if algo == "pomdr":
        cfg = PomdrConfig(horizon=horizon, radius=params["U"],
                          zeta=params["zeta"], budget=params["B"],
                          switch_budget=params["B0"], window=params["M"],
                          lr_scale=params["grid_value"],
                          ald_scale=params["ald_scale"],
                          seed=task["perm_seed"])
        learner = POMDRLearner(kernel, cfg)
    elif algo == "ogd":
        learner = KernelOGDLearner(kernel, eta=params["grid_value"],
                                   radius=params["U"])
    elif algo == "fogd":
        fmap = FourierFeatureMap(params["B"], X.shape[1], params["sigma"],
                                 seed=task["perm_seed"])
        learner = FOGDLearner(fmap, eta=params["grid_value"])
    elif algo == "nogd":
        learner = NOGDLearner(kernel, budget=params["B"],
                              eta=params["grid_value"], radius=params["U"],
                              rank_fraction=params["rank_fraction"])
    else:
        raise ConfigError(f"unknown algorithm {algo!r}")
    for i in range(horizon):
        learner.step(X[i], int(y[i]))
    elapsed = time.perf_counter() - start
    return {
        "mistakes": learner.mistakes,
        "amr": learner.mistakes / horizon,
        "cumulative_loss": learner.cumulative_loss,
        "exact_gap_sum": getattr(learner, "exact_gap_total", 0.0),
        "budget_trace": list(getattr(learner, "budget_trace", [])),
        "t_bar": getattr(learner, "t_bar", None),
        "restart_times": list(getattr(learner, "restart_times", [])),
        "time_s": elapsed,
        "grid_value": params["grid_value"],
        "perm": task["perm"],
        "perm_seed": task["perm_seed"],
    }


def _grid_values(args, algo: str, horizon: int) -> list[float]:
    if algo == "pomdr":
        return _float_list(args.lr_scale)
    if args.eta is not None:
        return _float_list(args.eta)
    return [float(v) for v in baseline_stepsize_grid(horizon)]


def _stem(dataset_name: str, algo: str, grid_value: float, perm: int) -> str:
    return f"{dataset_name}_{algo}_g{grid_value:g}_perm{perm}"


def cmd_run(args) -> int:
    ds = _load(args)
    if args.scale:
        ds = minmax_scale(ds)
    algo = args.algo
    horizon = len(ds)
    out_dir = Path(args.out)
    grid = _grid_values(args, algo, horizon)
    alignment = None
    if args.with_alignment:
        alignment = kernel_alignment(ds, GaussianKernel(args.sigma),
                                     chunk=args.alignment_chunk)

    tasks = []
    for grid_value in grid:
        params = {"sigma": args.sigma, "U": args.U, "B": args.B,
                  "grid_value": grid_value}
        if algo == "pomdr":
            params.update({"zeta": args.zeta, "B0": args.B0, "M": args.M,
                           "ald_scale": args.ald_scale})
        if algo == "nogd":
            params["rank_fraction"] = args.rank_fraction
        for perm in range(args.perms):
            perm_seed = args.seed + perm
            shuffled = ds.permute(perm_seed)
            tasks.append({
                "algo": algo,
                "features": shuffled.features,
                "labels": shuffled.labels,
                "params": params,
                "perm": perm,
                "perm_seed": perm_seed,
            })

    width = _pool_width(args)
    if width > 1:
        with ProcessPoolExecutor(max_workers=width) as pool:
            results = list(pool.map(_execute_run, tasks))
    else:
        results = [_execute_run(t) for t in tasks]

    rows = []
    per_grid: dict[float, list[dict]] = {}
    for res in results:
        grid_value = res["grid_value"]
        per_grid.setdefault(grid_value, []).append(res)
        config = _resolved_config(args, algo, horizon, grid_value)
        report = RunReport(
            algo=algo, dataset=ds.name, horizon=horizon,
            mistakes=res["mistakes"], amr=res["amr"],
            cumulative_loss=res["cumulative_loss"],
            exact_gap_sum=res["exact_gap_sum"],
            budget_trace=res["budget_trace"], t_bar=res["t_bar"],
            restart_times=res["restart_times"],
            wall_time_seconds=res["time_s"], config=config,
            alignment=alignment, seed=res["perm_seed"], perm=res["perm"])
        stem = _stem(ds.name, algo, grid_value, res["perm"])
        _json_dump(report.learning_payload(), out_dir / f"{stem}.report.json")
        _json_dump({"schema": "okl-timing/1", "time_s": res["time_s"],
                    "config": config, "seed": res["perm_seed"],
                    "perm": res["perm"]},
                   out_dir / f"{stem}.timing.json")
        rows.append({
            "algo": algo, "dataset": ds.name, "sigma": args.sigma,
            "zeta": args.zeta if algo == "pomdr" else "",
            "B": args.B,
            "B0": (args.B0 if args.B0 is not None else "auto") if algo == "pomdr" else "",
            "M": args.M if algo == "pomdr" else "",
            "U": args.U,
            "c": grid_value,
            "seed": res["perm_seed"], "perm": res["perm"],
            "amr": res["amr"], "time_s": res["time_s"],
            "A_T": "" if alignment is None else alignment,
            "t_bar": "" if res["t_bar"] is None else res["t_bar"],
            "restarts": len(res["restart_times"]),
        })

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "runs.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    def _stats(values: list[float]) -> tuple[float, float]:
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return mean, std

    grid_summary = []
    for grid_value in grid:
        runs = per_grid[grid_value]
        amr_mean, amr_std = _stats([r["amr"] for r in runs])
        t_mean, t_std = _stats([r["time_s"] for r in runs])
        grid_summary.append({
            "grid_value": grid_value,
            "amr_mean": amr_mean, "amr_std": amr_std,
            "time_mean": t_mean, "time_std": t_std,
            "perms": len(runs),
        })
    best = min(grid_summary, key=lambda g: g["amr_mean"])
    aggregate = {
        "schema": "okl-aggregate/1",
        "algo": algo, "dataset": ds.name, "horizon": horizon,
        "config": _resolved_config(args, algo, horizon, best["grid_value"]),
        "alignment": alignment,
        "per_grid": grid_summary,
        "best": best,
    }
    _json_dump(aggregate, out_dir / f"{ds.name}_{algo}_aggregate.json")
    pct = 100.0 * best["amr_mean"]
    spread = 100.0 * best["amr_std"]
    print(f"{algo} on {ds.name}: AMR {pct:.2f} +/- {spread:.2f} % "
          f"(grid value {best['grid_value']:g}, {args.perms} permutations)")
    return 0


def cmd_alignment(args) -> int:
    ds = _load(args)
    if args.scale:
        ds = minmax_scale(ds)
    horizon = len(ds)
    sigmas = _float_list(args.sigma) if args.sigma else list(DEFAULT_SIGMA_GRID)
    rows = []
    for sigma in sigmas:
        kernel = GaussianKernel(sigma)
        a_t = kernel_alignment(ds, kernel, chunk=args.alignment_chunk)
        shuffled = ds.permute(args.seed)
        cfg = PomdrConfig(horizon=horizon, radius=args.U, zeta=args.zeta,
                          budget=args.B, switch_budget=args.B0,
                          window=args.M, lr_scale=args.lr_scale_single,
                          ald_scale=args.ald_scale, seed=args.seed)
        learner = POMDRLearner(kernel, cfg)
        for i in range(horizon):
            learner.step(shuffled.features[i], int(shuffled.labels[i]))
        rows.append({"sigma": sigma, "A_T": a_t, "t_bar": learner.t_bar,
                     "amr": learner.mistakes / horizon,
                     "final_budget": len(learner.budget)})
        t_bar_text = "inf" if learner.t_bar is None else str(learner.t_bar)
        print(f"sigma={sigma:g}  A_T={a_t:.6g}  t_bar={t_bar_text}  "
              f"AMR={100.0 * rows[-1]['amr']:.2f}%")
    if args.out:
        payload = {
            "schema": "okl-alignment/1",
            "dataset": ds.name, "horizon": horizon, "seed": args.seed,
            "config": {"zeta": args.zeta, "B": args.B,
                       "B0": args.B0 if args.B0 is not None else "auto",
                       "M": args.M, "U": args.U,
                       "lr_scale": args.lr_scale_single,
                       "ald_scale": args.ald_scale},
            "rows": [{**r, "t_bar": r["t_bar"]} for r in rows],
        }
        _json_dump(payload, Path(args.out))
    return 0


def cmd_verify_budget(args) -> int:
    if args.decay == "exp":
        if args.r is None:
            raise ConfigError("--r is required for exponential decay")
        profile = SpectrumProfile("exponential", R0=args.R0 or args.n, rate=args.r)
    else:
        if args.p is None:
            raise ConfigError("--p is required for polynomial decay")
        profile = SpectrumProfile("polynomial", R0=args.R0 or args.n, rate=args.p)
    report = budget_bound_harness(profile, args.n, alpha=args.alpha,
                                  seed=args.seed, zeta=args.zeta)
    status = "satisfied" if report.satisfied else "VIOLATED"
    print(f"decay={args.decay} n={args.n} rate={profile.rate:g} "
          f"alpha={report.detail['alpha']:.6g}: |S|={int(report.empirical_value)} "
          f"bound={report.bound_value:.3f} slack={report.slack:.3f} [{status}]")
    if args.out:
        payload = {
            "schema": "okl-budget-bound/1",
            "empirical_value": report.empirical_value,
            "bound_value": report.bound_value,
            "satisfied": report.satisfied,
            "slack": report.slack,
            "detail": report.detail,
            "seed": args.seed,
        }
        _json_dump(payload, Path(args.out))
    return 0 if report.satisfied else 1


def cmd_batch(args) -> int:
    if args.train and args.test:
        train = load_dataset(args.train, fmt=args.format,
                             label_column=args.label_column,
                             header=args.csv_header)
        test = load_dataset(args.test, fmt=args.format,
                            label_column=args.label_column,
                            header=args.csv_header)
    elif args.data:
        ds = _load(args)
        train, test = train_test_split(ds, args.test_fraction, args.split_seed)
    else:
        raise ConfigError("provide --train/--test or --data with --test-fraction")
    if args.scale:
        train = minmax_scale(train)
        test = minmax_scale(test)
    horizon = len(train)
    kernel = GaussianKernel(args.sigma)

    def factory():
        cfg = PomdrConfig(horizon=horizon, radius=args.U, zeta=args.zeta,
                          budget=args.B, switch_budget=args.B0,
                          window=args.M, lr_scale=args.lr_scale_single,
                          ald_scale=args.ald_scale, seed=args.seed)
        return POMDRLearner(kernel, cfg)

    rows = []
    for k in range(args.r_seeds):
        r_seed = args.seed + k
        result = online_to_batch(factory, train, test, r_seed)
        rows.append({"r_seed": r_seed, **result})
        print(f"r_seed={r_seed} r={result['r']} "
              f"hinge_risk={result['test_hinge_risk']:.4f} "
              f"error={100.0 * result['test_error_rate']:.2f}%")
    mean_risk = float(np.mean([r["test_hinge_risk"] for r in rows]))
    mean_err = float(np.mean([r["test_error_rate"] for r in rows]))
    print(f"mean over {args.r_seeds} draws: hinge_risk={mean_risk:.4f} "
          f"error={100.0 * mean_err:.2f}%")
    if args.out:
        payload = {
            "schema": "okl-batch/1",
            "train_size": len(train), "test_size": len(test),
            "seed": args.seed, "r_seeds": args.r_seeds,
            "config": {"sigma": args.sigma, "zeta": args.zeta, "B": args.B,
                       "B0": args.B0 if args.B0 is not None else "auto",
                       "M": args.M, "U": args.U,
                       "lr_scale": args.lr_scale_single,
                       "ald_scale": args.ald_scale},
            "rows": rows,
            "mean_test_hinge_risk": mean_risk,
            "mean_test_error_rate": mean_err,
        }
        _json_dump(payload, Path(args.out))
    return 0


def _add_data_flags(p, required=True):
    p.add_argument("--data", required=required, help="dataset path")
    p.add_argument("--format", choices=["libsvm", "csv"], default="libsvm")
    p.add_argument("--label-column", type=int, default=0, dest="label_column")
    p.add_argument("--csv-header", action="store_true", dest="csv_header")
    p.add_argument("--scale", action="store_true",
                   help="min-max scale features to [0,1] (off by default)")


def _add_learner_flags(p, lr_list: bool):
    p.add_argument("--sigma", type=float, default=2.0,
                   help="Gaussian kernel bandwidth")
    p.add_argument("--zeta", type=float, default=2.0 / 3.0)
    p.add_argument("--B", type=int, default=400)
    p.add_argument("--B0", type=_parse_b0, default=None,
                   help="phase-switch budget size, or 'auto' = ceil(15 ln T)")
    p.add_argument("--M", type=int, default=15)
    p.add_argument("--U", type=float, default=25.0)
    if lr_list:
        p.add_argument("--lr-scale", default="0.05,0.1", dest="lr_scale",
                       help="learning-rate multiplier(s), comma separated")
    else:
        p.add_argument("--lr-scale", type=float, default=0.1,
                       dest="lr_scale_single",
                       help="learning-rate multiplier")
    p.add_argument("--ald-scale", type=float, default=10.0, dest="ald_scale",
                   help="ALD threshold scale (threshold = scale * T^-zeta)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okl",
        description="Budgeted online kernel learning benchmark runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="online pass over seeded permutations")
    p_run.add_argument("--algo", choices=["pomdr", "ogd", "fogd", "nogd"],
                       default="pomdr")
    _add_data_flags(p_run)
    _add_learner_flags(p_run, lr_list=True)
    p_run.add_argument("--eta", default=None,
                       help="baseline stepsize(s); default grid 10^[-3..3]/sqrt(T)")
    p_run.add_argument("--rank-fraction", type=float, default=0.2,
                       dest="rank_fraction")
    p_run.add_argument("--perms", type=int, default=10)
    p_run.add_argument("--seed", type=int, default=7)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--with-alignment", action="store_true",
                       dest="with_alignment",
                       help="also compute the alignment statistic (O(T^2))")
    p_run.add_argument("--alignment-chunk", type=int, default=1024,
                       dest="alignment_chunk")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker pool width (default OKL_THREADS or 1)")
    p_run.set_defaults(func=cmd_run)

    p_al = sub.add_parser("alignment",
                          help="alignment statistic and switch round per sigma")
    _add_data_flags(p_al)
    _add_learner_flags(p_al, lr_list=False)
    p_al.add_argument("--sigma-grid", default=None, dest="sigma",
                      help="comma-separated sigmas (default 2^[-2..6])")
    p_al.add_argument("--seed", type=int, default=7)
    p_al.add_argument("--alignment-chunk", type=int, default=1024,
                      dest="alignment_chunk")
    p_al.add_argument("--out", default=None, help="optional JSON output path")
    p_al.set_defaults(func=cmd_alignment)

    p_vb = sub.add_parser("verify-budget",
                          help="budget-size bound harness on synthetic spectra")
    p_vb.add_argument("--decay", choices=["exp", "poly"], required=True)
    p_vb.add_argument("--r", type=float, default=None,
                      help="exponential decay rate in (0,1)")
    p_vb.add_argument("--p", type=float, default=None,
                      help="polynomial decay degree >= 1")
    p_vb.add_argument("--n", type=int, required=True)
    p_vb.add_argument("--R0", type=float, default=None,
                      help="leading-scale constant (default n)")
    p_vb.add_argument("--zeta", type=float, default=1.0,
                      help="sets alpha = D * n^(-2 zeta) when --alpha absent")
    p_vb.add_argument("--alpha", type=float, default=None)
    p_vb.add_argument("--seed", type=int, default=7)
    p_vb.add_argument("--out", default=None)
    p_vb.set_defaults(func=cmd_verify_budget)

    p_b = sub.add_parser("batch", help="online-to-batch conversion on a split")
    p_b.add_argument("--train", default=None)
    p_b.add_argument("--test", default=None)
    _add_data_flags(p_b, required=False)
    p_b.add_argument("--test-fraction", type=float, default=0.2,
                     dest="test_fraction")
    p_b.add_argument("--split-seed", type=int, default=0, dest="split_seed")
    _add_learner_flags(p_b, lr_list=False)
    p_b.add_argument("--r-seeds", type=int, default=5, dest="r_seeds")
    p_b.add_argument("--seed", type=int, default=7)
    p_b.add_argument("--out", default=None)
    p_b.set_defaults(func=cmd_batch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, DataFormatError):
            print(f"data error: {exc}", file=sys.stderr)
            return 3
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

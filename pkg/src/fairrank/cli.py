"""Benchmark command line: generate | train | evaluate | sweep | project.

Every command writes a flat ``key = value`` manifest next to its outputs;
re-running a command with ``--config <manifest>`` reproduces the outputs
byte-identically (explicit flags win over manifest values).

Exit codes: 0 success, 2 usage, 3 infeasible constraint, 4 I/O or data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    DatasetError,
    SyntheticSpec,
    TaskDataset,
    generate_synthetic,
    load_csv,
    split_folds,
    standardize,
    write_csv,
)
from .metrics import compute_report, rmse
from .projection import (
    InfeasibleProjection,
    InstanceTooLarge,
    brute_force_project,
    project_onto_q,
)
from .proximal import predict
from .ranking import constraint_bounds
from .solver import SolverConfig, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


# ---------------------------------------------------------------------------
# manifests: flat "key = value" lines, '#' comments, written sorted


def write_manifest(path: Path, entries: dict) -> None:
    lines = ["# fairrank manifest"]
    for key in sorted(entries):
        lines.append(f"{key} = {entries[key]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DatasetError(f"{path}: line {line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


_BOOL_TRUE = {"true", "1", "yes"}


def _coerce(value: str, kind):
    if kind is bool:
        return value.lower() in _BOOL_TRUE
    return kind(value)


def resolve_options(args, config_keys: dict[str, type], defaults: dict):
    """Effective option values: explicit flag > manifest value > default."""
    manifest = {}
    if getattr(args, "config", None):
        manifest = read_manifest(Path(args.config))
    out = {}
    for key, kind in config_keys.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            out[key] = flag_value
        elif key in manifest:
            out[key] = _coerce(manifest[key], kind)
        else:
            out[key] = defaults.get(key)
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# generate

_GENERATE_KEYS = {
    "alpha": float,
    "k": int,
    "h": int,
    "n_features": int,
    "sigma": float,
    "seed": int,
    "output": str,
}
_GENERATE_DEFAULTS = {"k": 40, "h": 25, "n_features": 4, "sigma": 1.0, "seed": 0}


def cmd_generate(args, parser) -> int:
    opts = resolve_options(args, _GENERATE_KEYS, _GENERATE_DEFAULTS)
    if opts["alpha"] is None:
        parser.error("--alpha is required (flag or manifest)")
    if not opts["output"]:
        parser.error("-o/--output is required (flag or manifest)")
    started = time.monotonic()
    try:
        spec = SyntheticSpec(
            alpha=opts["alpha"],
            k=opts["k"],
            h=opts["h"],
            n=opts["n_features"] + 1,
            sigma=opts["sigma"],
            seed=opts["seed"],
        )
    except ValueError as exc:
        parser.error(str(exc))
    data = generate_synthetic(spec)
    out_path = Path(opts["output"])
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(data, out_path)
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    entries = {k: _fmt(v) for k, v in opts.items()}
    entries.update(
        {
            "meta.command": "generate",
            "meta.version": __version__,
            "meta.elapsed_seconds": f"{time.monotonic() - started:.3f}",
            "output.dataset": str(out_path),
            "output.dataset.sha256": sha256_file(out_path),
        }
    )
    write_manifest(Path(str(out_path) + ".manifest"), entries)
    print(f"wrote {data.n_instances} rows ({data.k} tasks x {data.h}) to {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train

_TRAIN_KEYS = {
    "data": str,
    "rho": float,
    "beta": float,
    "gamma": float,
    "theta": float,
    "epsilon": float,
    "tau": int,
    "outer_iters": int,
    "inner_iters": int,
    "seed": int,
    "fairness": bool,
    "printed_kappa": bool,
    "protected_a": str,
    "task_col": str,
    "protected_col": str,
    "target_col": str,
    "output_dir": str,
}
_TRAIN_DEFAULTS = {
    "rho": 0.001,
    "beta": 0.1,
    "gamma": 1.0,
    "theta": 0.01,
    "epsilon": 0.01,
    "tau": 10**7,
    "outer_iters": 30,
    "inner_iters": 50,
    "seed": 0,
    "fairness": True,
    "printed_kappa": False,
    "protected_a": None,
    "task_col": "task_id",
    "protected_col": "protected",
    "target_col": "target",
    "output_dir": None,
}


def _load_with_schema(path: Path, opts) -> TaskDataset:
    return load_csv(
        path,
        task_col=opts["task_col"],
        protected_col=opts["protected_col"],
        target_col=opts["target_col"],
        partition_a=opts["protected_a"],
    )


def _solver_config(opts) -> SolverConfig:
    return SolverConfig(
        rho=opts["rho"],
        beta=opts["beta"],
        gamma=opts["gamma"],
        theta=opts["theta"],
        epsilon=opts["epsilon"],
        tau=opts["tau"],
        outer_iters=opts["outer_iters"],
        inner_iters=opts["inner_iters"],
        seed=opts["seed"],
        fairness_enabled=opts["fairness"],
        printed_kappa=opts["printed_kappa"],
    )


def cmd_train(args, parser) -> int:
    opts = resolve_options(args, _TRAIN_KEYS, _TRAIN_DEFAULTS)
    if not opts["data"]:
        parser.error("a dataset path is required (positional or manifest)")
    if not opts["output_dir"]:
        parser.error("--output-dir is required (flag or manifest)")
    started = time.monotonic()
    data_path = Path(opts["data"])
    try:
        data = _load_with_schema(data_path, opts)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    std_data, params = standardize(data)
    config = _solver_config(opts)
    try:
        result = run(std_data, config)
    except InfeasibleProjection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    out_dir = Path(opts["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    demoted = result.outcome.demoted if result.outcome is not None else np.zeros(0, dtype=int)
    _write_predictions(out_dir / "predictions.csv", data, params, result, demoted)
    _write_weights(out_dir / "weights.csv", data, result.w)
    _write_trace(out_dir / "trace.csv", result)

    entries = {k: _fmt(v) for k, v in opts.items() if v is not None}
    entries.update(
        {
            "meta.command": "train",
            "meta.version": __version__,
            "meta.elapsed_seconds": f"{time.monotonic() - started:.3f}",
            "input.dataset.sha256": sha256_file(data_path),
            "output.predictions": str(out_dir / "predictions.csv"),
            "output.weights": str(out_dir / "weights.csv"),
            "output.trace": str(out_dir / "trace.csv"),
        }
    )
    write_manifest(out_dir / "manifest.txt", entries)
    last = result.trace.records[-1]
    print(
        f"trained {config.outer_iters} iterations; final sum rank "
        f"{last.achieved_r_a}, feasible={last.feasible}, demoted={last.n_demoted}"
    )
    return EXIT_OK


def _write_predictions(path: Path, data: TaskDataset, params, result, demoted) -> None:
    y_true = data.flat_targets()
    raw_pred = params.inverse_targets(result.raw_predictions)
    projected = params.inverse_targets(result.m_s)
    demoted_mask = np.zeros(data.n_instances, dtype=bool)
    demoted_mask[demoted] = True
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "task_id",
                "row",
                "protected",
                "partition",
                "y_true",
                "y_pred_raw",
                "y_pred_projected",
                "demoted",
            ]
        )
        for j in range(data.k):
            for i in range(data.h):
                flat = data.flat_index(j, i)
                part = str(data.protected[flat])
                writer.writerow(
                    [
                        data.task_ids[j],
                        i,
                        data.label_names[part],
                        part,
                        repr(float(y_true[flat])),
                        repr(float(raw_pred[flat])),
                        repr(float(projected[flat])),
                        int(demoted_mask[flat]),
                    ]
                )


def _write_weights(path: Path, data: TaskDataset, w: np.ndarray) -> None:
    header = ["task_id", "w_protected"] + [f"w_f{i+1}" for i in range(data.n - 1)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j in range(data.k):
            writer.writerow([data.task_ids[j]] + [repr(float(x)) for x in w[j]])


def _write_trace(path: Path, result) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "iteration",
                "objective",
                "primal_residual",
                "feasible",
                "achieved_r_a",
                "auc",
                "n_demoted",
            ]
        )
        for rec in result.trace.records:
            writer.writerow(
                [
                    rec.iteration,
                    repr(rec.objective),
                    repr(rec.primal_residual),
                    "" if rec.feasible is None else int(rec.feasible),
                    repr(rec.achieved_r_a),
                    repr(rec.auc),
                    rec.n_demoted,
                ]
            )


# ---------------------------------------------------------------------------
# evaluate

def cmd_evaluate(args, parser) -> int:
    pred_path = Path(args.predictions)
    data_path = Path(args.data)
    out_dir = Path(args.output_dir) if args.output_dir else pred_path.parent
    try:
        data = load_csv(
            data_path,
            task_col=args.task_col,
            protected_col=args.protected_col,
            target_col=args.target_col,
        )
        with open(pred_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except (DatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if len(rows) != data.n_instances:
        print(
            f"error: row count mismatch: {len(rows)} predictions vs "
            f"{data.n_instances} data rows",
            file=sys.stderr,
        )
        return EXIT_IO

    y_true = np.array([float(r["y_true"]) for r in rows])
    y_raw = np.array([float(r["y_pred_raw"]) for r in rows])
    y_proj = np.array([float(r["y_pred_projected"]) for r in rows])
    partition = np.array([r["partition"] for r in rows])
    demoted = np.flatnonzero(np.array([int(r["demoted"]) for r in rows]))

    raw_report = compute_report(y_true, y_raw, partition)
    proj_report = compute_report(y_true, y_proj, partition, demoted=demoted)

    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["series", "auc", "md", "br", "irr", "rmse", "n_a", "n_b"]
    with open(out_dir / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for name, rep in (("raw", raw_report), ("projected", proj_report)):
            writer.writerow(
                [name]
                + [repr(v) for v in (rep.auc, rep.md, rep.br, rep.irr, rep.rmse)]
                + [rep.n_a, rep.n_b]
            )
    (out_dir / "report.json").write_text(
        json.dumps(
            {"raw": raw_report.as_dict(), "projected": proj_report.as_dict()},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    entries = {
        "meta.command": "evaluate",
        "meta.version": __version__,
        "predictions": str(pred_path),
        "data": str(data_path),
        "output.report_csv": str(out_dir / "report.csv"),
        "output.report_json": str(out_dir / "report.json"),
    }
    write_manifest(out_dir / "evaluate.manifest", entries)
    for name, rep in (("raw", raw_report), ("projected", proj_report)):
        print(
            f"{name}: auc={rep.auc:.4f} md={rep.md:.4f} br={rep.br:.4f} "
            f"irr={rep.irr:.4f} rmse={rep.rmse:.4f}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep

def _fold_job(payload):
    """One (epsilon, beta, repeat, fold) training job; returns val metrics."""
    (std_data, params, train_idx, val_idx, opts, epsilon, beta, seed) = payload
    train_data = std_data.subset(train_idx)
    config = SolverConfig(
        rho=opts["rho"],
        beta=beta,
        gamma=opts["gamma"],
        theta=opts["theta"],
        epsilon=epsilon,
        tau=opts["tau"],
        outer_iters=opts["outer_iters"],
        inner_iters=opts["inner_iters"],
        seed=seed,
        fairness_enabled=opts["fairness"],
        printed_kappa=opts["printed_kappa"],
    )
    result = run(train_data, config)
    x_val = std_data.flat_features()[val_idx]
    tasks = val_idx // std_data.h
    y_hat_std = np.einsum("in,in->i", x_val, result.w[tasks])
    y_hat = params.inverse_targets(y_hat_std)
    y_val = params.inverse_targets(std_data.flat_targets()[val_idx])
    part = std_data.protected[val_idx]
    report = compute_report(y_val, y_hat, part)
    return {
        "rmse": report.rmse,
        "auc": report.auc,
        "md": report.md,
        "br": report.br,
        "irr": report.irr,
    }


_SWEEP_METRICS = ("rmse", "auc", "md", "br", "irr")


def cmd_sweep(args, parser) -> int:
    opts = resolve_options(args, _TRAIN_KEYS, _TRAIN_DEFAULTS)
    if not opts["data"]:
        parser.error("a dataset path is required")
    if not opts["output_dir"]:
        parser.error("--output-dir is required")
    epsilons = [float(x) for x in args.epsilon_grid.split(",") if x]
    betas = (
        [float(x) for x in args.beta_grid.split(",") if x]
        if args.beta_grid
        else [opts["beta"]]
    )
    if not epsilons or not betas:
        parser.error("grids must be nonempty")
    started = time.monotonic()
    try:
        data = _load_with_schema(Path(opts["data"]), opts)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    std_data, params = standardize(data)

    jobs = []
    for epsilon in epsilons:
        for beta in betas:
            for rep in range(args.repeats):
                seed = opts["seed"] + rep
                try:
                    folds = split_folds(std_data, args.folds, seed)
                except DatasetError as exc:
                    print(f"error: {exc}", file=sys.stderr)
                    return EXIT_IO
                for train_idx, val_idx in folds:
                    jobs.append(
                        (
                            (epsilon, beta, rep),
                            (std_data, params, train_idx, val_idx, opts, epsilon, beta, seed),
                        )
                    )

    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_fold_job, [payload for _, payload in jobs]))
        else:
            results = [_fold_job(payload) for _, payload in jobs]
    except InfeasibleProjection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    # aggregate: fold metrics -> per-repeat means -> mean/std across repeats
    by_point: dict[tuple, dict[int, list[dict]]] = {}
    for (key, _), res in zip(jobs, results):
        epsilon, beta, rep = key
        by_point.setdefault((epsilon, beta), {}).setdefault(rep, []).append(res)

    out_dir = Path(opts["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for (epsilon, beta), reps in sorted(by_point.items()):
        repeat_means = {
            metric: [float(np.mean([r[metric] for r in fold_list])) for fold_list in reps.values()]
            for metric in _SWEEP_METRICS
        }
        row = {"epsilon": epsilon, "beta": beta}
        for metric in _SWEEP_METRICS:
            vals = np.array(repeat_means[metric])
            row[f"{metric}_mean"] = float(vals.mean())
            row[f"{metric}_std"] = float(vals.std())
        summary_rows.append(row)

    header = ["epsilon", "beta"] + [
        f"{m}_{s}" for m in _SWEEP_METRICS for s in ("mean", "std")
    ]
    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in summary_rows:
            writer.writerow([repr(row["epsilon"]), repr(row["beta"])] + [
                repr(row[f"{m}_{s}"]) for m in _SWEEP_METRICS for s in ("mean", "std")
            ])

    # curve: per epsilon, the best (lowest) mean rmse over the beta grid
    curve = {}
    for row in summary_rows:
        eps = row["epsilon"]
        if eps not in curve or row["rmse_mean"] < curve[eps]:
            curve[eps] = row["rmse_mean"]
    with open(out_dir / "curve.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "rmse"])
        for eps in sorted(curve):
            writer.writerow([repr(eps), repr(curve[eps])])

    winner = min(summary_rows, key=lambda r: r["rmse_mean"])
    winner_entries = {k: _fmt(v) for k, v in opts.items() if v is not None}
    winner_entries.update(
        {
            "epsilon": repr(winner["epsilon"]),
            "beta": repr(winner["beta"]),
            "meta.command": "sweep-winner",
            "meta.version": __version__,
            "meta.rmse_mean": repr(winner["rmse_mean"]),
        }
    )
    write_manifest(out_dir / "winner.manifest", winner_entries)

    entries = {k: _fmt(v) for k, v in opts.items() if v is not None}
    entries.update(
        {
            "meta.command": "sweep",
            "meta.version": __version__,
            "meta.elapsed_seconds": f"{time.monotonic() - started:.3f}",
            "epsilon_grid": args.epsilon_grid,
            "beta_grid": args.beta_grid or "",
            "folds": str(args.folds),
            "repeats": str(args.repeats),
            "input.dataset.sha256": sha256_file(Path(opts["data"])),
            "output.summary": str(out_dir / "summary.csv"),
            "output.curve": str(out_dir / "curve.csv"),
            "output.winner": str(out_dir / "winner.manifest"),
        }
    )
    write_manifest(out_dir / "manifest.txt", entries)
    print(
        f"swept {len(summary_rows)} grid points; best epsilon={winner['epsilon']} "
        f"beta={winner['beta']} rmse={winner['rmse_mean']:.4f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# project

def cmd_project(args, parser) -> int:
    out_dir = Path(args.output_dir) if args.output_dir else Path(".")
    if args.fuzz and args.vector:
        parser.error("give either a vector file or --fuzz, not both")
    if not args.fuzz and not args.vector:
        parser.error("a vector file or --fuzz is required")
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.fuzz:
        return _project_fuzz(args, out_dir)

    try:
        with open(args.vector, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    values = np.array([float(r["value"]) for r in rows])
    labels_raw = sorted({r["protected"] for r in rows})
    if len(labels_raw) != 2:
        print("error: protected column not binary", file=sys.stderr)
        return EXIT_IO
    protected = np.where(
        np.array([r["protected"] for r in rows]) == labels_raw[0], "A", "B"
    )
    n_a = int((protected == "A").sum())
    spec = constraint_bounds(
        n_a, values.size - n_a, args.epsilon, printed_kappa=args.printed_kappa
    )
    if args.oracle and values.size > 16:
        parser.error(f"--oracle supports N <= 16, got {values.size}")

    try:
        outcome = project_onto_q(values, np.zeros_like(values), spec, protected, args.tau)
    except InfeasibleProjection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    payload = {
        "n": int(values.size),
        "n_a": n_a,
        "band": [spec.c, spec.upper],
        "heuristic": _outcome_dict(outcome),
    }
    if args.oracle:
        oracle = brute_force_project(values, spec, protected)
        payload["oracle"] = _outcome_dict(oracle)
        payload["objective_gap"] = (
            oracle.objective - outcome.objective if oracle.feasible else None
        )
    (out_dir / "outcome.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_manifest(
        out_dir / "project.manifest",
        {
            "meta.command": "project",
            "meta.version": __version__,
            "vector": str(args.vector),
            "epsilon": repr(args.epsilon),
            "tau": str(args.tau),
            "oracle": str(args.oracle),
            "output.outcome": str(out_dir / "outcome.json"),
        },
    )
    print(
        f"feasible={outcome.feasible} achieved={outcome.achieved_r_a} "
        f"objective={outcome.objective:.6f} demoted={outcome.n_demoted}"
    )
    return EXIT_OK


def _outcome_dict(outcome) -> dict:
    return {
        "feasible": bool(outcome.feasible),
        "achieved_r_a": outcome.achieved_r_a,
        "objective": outcome.objective,
        "demoted": [int(i) for i in outcome.demoted],
    }


def _project_fuzz(args, out_dir: Path) -> int:
    rng = np.random.default_rng(args.seed)
    size = args.size
    if size > 16:
        print("error: fuzz instances need N <= 16 for the oracle", file=sys.stderr)
        return EXIT_USAGE
    rows = []
    for i in range(args.fuzz):
        values = rng.normal(size=size)
        n_a = int(rng.integers(1, size))
        protected = np.array(["A"] * n_a + ["B"] * (size - n_a))
        rng.shuffle(protected)
        n_a = int((protected == "A").sum())
        if n_a == 0 or n_a == size:
            continue
        epsilon = float(rng.choice([0.0, 0.05, 0.1, 0.25]))
        spec = constraint_bounds(n_a, size - n_a, epsilon)
        heur = project_onto_q(values, np.zeros(size), spec, protected, args.tau)
        oracle = brute_force_project(values, spec, protected)
        gap_ratio = (
            heur.objective / oracle.objective
            if oracle.feasible and oracle.objective > 0
            else float("nan")
        )
        rows.append(
            {
                "instance": i,
                "n": size,
                "n_a": n_a,
                "epsilon": epsilon,
                "heuristic_feasible": int(heur.feasible),
                "oracle_feasible": int(oracle.feasible),
                "heuristic_objective": heur.objective,
                "oracle_objective": oracle.objective,
                "objective_ratio": gap_ratio,
            }
        )
    with open(out_dir / "gap_report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow([row[k] if isinstance(row[k], int) else repr(row[k]) for k in row])
    ratios = [r["objective_ratio"] for r in rows if r["oracle_feasible"] and not np.isnan(r["objective_ratio"])]
    summary = {
        "instances": len(rows),
        "oracle_feasible": int(sum(r["oracle_feasible"] for r in rows)),
        "heuristic_feasible": int(sum(r["heuristic_feasible"] for r in rows)),
        "objective_ratio_median": float(np.median(ratios)) if ratios else None,
        "objective_ratio_p10": float(np.percentile(ratios, 10)) if ratios else None,
        "ratio_at_least_0.7": float(np.mean([r >= 0.7 for r in ratios])) if ratios else None,
    }
    (out_dir / "gap_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_manifest(
        out_dir / "project.manifest",
        {
            "meta.command": "project-fuzz",
            "meta.version": __version__,
            "fuzz": str(args.fuzz),
            "size": str(size),
            "seed": str(args.seed),
            "tau": str(args.tau),
            "output.gap_report": str(out_dir / "gap_report.csv"),
            "output.gap_summary": str(out_dir / "gap_summary.json"),
        },
    )
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring

def _add_schema_flags(parser, with_defaults: bool) -> None:
    # train/sweep leave defaults to resolve_options so manifests can supply them
    default = (lambda v: v) if with_defaults else (lambda v: None)
    parser.add_argument("--task-col", dest="task_col", default=default("task_id"))
    parser.add_argument("--protected-col", dest="protected_col", default=default("protected"))
    parser.add_argument("--target-col", dest="target_col", default=default("target"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairrank",
        description="Fairness-constrained multi-task regression benchmark harness.",
    )
    parser.add_argument("--version", action="version", version=f"fairrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a synthetic benchmark dataset CSV")
    p_gen.add_argument("--config", help="manifest/config file with key = value lines")
    p_gen.add_argument("--alpha", type=float, help="target dependency level in (0.5, 1)")
    p_gen.add_argument("--k", type=int, help="number of tasks")
    p_gen.add_argument("--h", type=int, help="observations per task")
    p_gen.add_argument("--n-features", dest="n_features", type=int, help="explanatory features")
    p_gen.add_argument("--sigma", type=float, help="shared target standard deviation")
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("-o", "--output", help="output CSV path")
    p_gen.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="train the fair multi-task model")
    p_train.add_argument("data", nargs="?", help="dataset CSV")
    p_train.add_argument("--config", help="manifest/config file")
    p_train.add_argument("--rho", type=float)
    p_train.add_argument("--beta", type=float)
    p_train.add_argument("--gamma", type=float)
    p_train.add_argument("--theta", type=float)
    p_train.add_argument("--epsilon", type=float)
    p_train.add_argument("--tau", type=int)
    p_train.add_argument("--outer-iters", dest="outer_iters", type=int)
    p_train.add_argument("--inner-iters", dest="inner_iters", type=int)
    p_train.add_argument("--seed", type=int)
    p_train.add_argument(
        "--no-fairness", dest="fairness", action="store_false", default=None,
        help="disable the sum-rank constraint",
    )
    p_train.add_argument(
        "--printed-kappa", dest="printed_kappa", action="store_true", default=None,
        help="use the alternative epsilon * n_A^2 band width",
    )
    p_train.add_argument("--protected-a", dest="protected_a", help="label mapped to partition A")
    _add_schema_flags(p_train, with_defaults=False)
    p_train.add_argument("--output-dir", dest="output_dir")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="metric report for a predictions file")
    p_eval.add_argument("predictions", help="predictions.csv from train")
    p_eval.add_argument("data", help="dataset CSV the predictions refer to")
    _add_schema_flags(p_eval, with_defaults=True)
    p_eval.add_argument("--output-dir", dest="output_dir")
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="cross-validated hyperparameter sweep")
    p_sweep.add_argument("data", nargs="?", help="dataset CSV")
    p_sweep.add_argument("--config", help="manifest/config file")
    p_sweep.add_argument("--epsilon-grid", dest="epsilon_grid", default="0.01,0.05,0.1,0.25")
    p_sweep.add_argument("--beta-grid", dest="beta_grid", default=None)
    p_sweep.add_argument("--folds", type=int, default=10)
    p_sweep.add_argument("--repeats", type=int, default=1)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--rho", type=float)
    p_sweep.add_argument("--beta", type=float)
    p_sweep.add_argument("--gamma", type=float)
    p_sweep.add_argument("--theta", type=float)
    p_sweep.add_argument("--tau", type=int)
    p_sweep.add_argument("--outer-iters", dest="outer_iters", type=int)
    p_sweep.add_argument("--inner-iters", dest="inner_iters", type=int)
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--no-fairness", dest="fairness", action="store_false", default=None)
    p_sweep.add_argument("--protected-a", dest="protected_a")
    _add_schema_flags(p_sweep, with_defaults=False)
    p_sweep.add_argument("--output-dir", dest="output_dir")
    p_sweep.set_defaults(func=cmd_sweep)

    p_proj = sub.add_parser("project", help="standalone sum-rank projection")
    p_proj.add_argument("vector", nargs="?", help="CSV with value,protected columns")
    p_proj.add_argument("--epsilon", type=float, default=0.01)
    p_proj.add_argument("--tau", type=int, default=10**7)
    p_proj.add_argument("--printed-kappa", dest="printed_kappa", action="store_true")
    p_proj.add_argument("--oracle", action="store_true", help="also run the exhaustive oracle")
    p_proj.add_argument("--fuzz", type=int, default=0, help="run N random oracle comparisons")
    p_proj.add_argument("--size", type=int, default=10, help="fuzz instance size (<= 16)")
    p_proj.add_argument("--seed", type=int, default=0)
    p_proj.add_argument("--output-dir", dest="output_dir")
    p_proj.set_defaults(func=cmd_project)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

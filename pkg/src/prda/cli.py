"""Command-line front end: adaptation runs, divergence probes, synthetic sweeps."""

import argparse
import concurrent.futures
import json
import os
import sys
import time

from .classifier import SoftmaxClassifier
from .data import (
    SHIFT_FAMILIES,
    ShiftSpec,
    divergence_probe,
    domain_probe_scores,
    load_dataset,
    synth_domain_pair,
)
from .exceptions import PrdaError
from .mixup import DEFAULT_LAMBDA_SCHEDULE, check_lambda_schedule
from .pipeline import (
    ProgressiveDomainAugmentation,
    SubspaceAlignmentBaseline,
    evaluate,
)

REPORT_FORMAT = "prda-job-report"
REPORT_VERSION = 1

SWEEP_METHODS = ("source_only", "sa", "prda")
SWEEP_HEADER = "family,magnitude,seed,method,accuracy,probe_accuracy"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


def _parse_lambdas(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise _UsageError(f"--lambdas must be a comma-separated float list, got {text!r}")
    try:
        return check_lambda_schedule(values)
    except PrdaError as exc:
        raise _UsageError(f"--lambdas: {exc}")


def _parse_magnitudes(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise _UsageError(f"--magnitudes must be a comma-separated float list, got {text!r}")


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_report(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prda",
        description=(
            "Progressive domain augmentation for unsupervised domain "
            "adaptation on pre-extracted feature vectors."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="adapt a source dataset to a target dataset")
    run.add_argument("--source", required=True, help="labeled source dataset (csv or binary)")
    run.add_argument("--target", required=True, help="unlabeled target dataset")
    run.add_argument("--target-labels", default=None,
                     help="dataset whose labels evaluate the result (never used for adaptation)")
    run.add_argument("--k", type=int, default=44)
    run.add_argument("--tau", type=float, default=0.2)
    run.add_argument("--rho", type=float, default=0.8)
    run.add_argument("--lambdas", default=",".join(str(v) for v in DEFAULT_LAMBDA_SCHEDULE))
    run.add_argument("--batch", type=int, default=None)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default=None)
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--save-model", default=None,
                     help="write the final adapted classifier as a versioned JSON blob")

    probe = sub.add_parser("probe", help="two-class domain-divergence probe")
    probe.add_argument("--a", required=True)
    probe.add_argument("--b", required=True)
    probe.add_argument("--folds", type=int, default=5)
    probe.add_argument("--seed", type=int, default=0)
    probe.add_argument("--out", default=None)

    sweep = sub.add_parser("sweep", help="synthetic shift sweep over magnitudes and seeds")
    sweep.add_argument("--family", required=True)
    sweep.add_argument("--magnitudes", required=True)
    sweep.add_argument("--seeds", type=int, required=True)
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--k", type=int, default=44)
    sweep.add_argument("--tau", type=float, default=0.2)
    sweep.add_argument("--rho", type=float, default=0.8)
    sweep.add_argument("--lambdas", default=",".join(str(v) for v in DEFAULT_LAMBDA_SCHEDULE))
    sweep.add_argument("--batch", type=int, default=None)
    sweep.add_argument("--dim", type=int, default=20)
    sweep.add_argument("--per-class", type=int, default=250)
    return parser


def _validate_run_config(args):
    if args.k < 1:
        raise _UsageError(f"--k must be >= 1, got {args.k}")
    if not 0.0 < args.tau <= 1.0:
        raise _UsageError(f"--tau must be in (0, 1], got {args.tau}")
    if not 0.0 < args.rho < 1.0:
        raise _UsageError(f"--rho must be in (0, 1), got {args.rho}")
    if args.batch is not None and args.batch < 1:
        raise _UsageError(f"--batch must be >= 1, got {args.batch}")
    return _parse_lambdas(args.lambdas)


def _round_csv(reports):
    lines = ["lambda,virtual_count,accepted_count,source_size_after,skipped,target_accuracy"]
    for r in reports:
        acc = "" if r.target_accuracy is None else repr(r.target_accuracy)
        lines.append(
            f"{r.lam!r},{r.virtual_count},{r.accepted_count},"
            f"{r.source_size_after},{int(r.skipped)},{acc}"
        )
    return "\n".join(lines) + "\n"


def cmd_run(args):
    schedule = _validate_run_config(args)
    source = load_dataset(args.source)
    if source.labels is None:
        raise PrdaError(f"source dataset {args.source} carries no labels")
    target = load_dataset(args.target)
    eval_labels = target.labels
    if args.target_labels:
        eval_labels = load_dataset(args.target_labels).labels
        if eval_labels is None:
            raise PrdaError(f"{args.target_labels} carries no labels")

    started = time.perf_counter()
    prda = ProgressiveDomainAugmentation(
        k=args.k, tau=args.tau, rho=args.rho, lambda_schedule=schedule,
        batch=args.batch, seed=args.seed,
    ).fit(source.features, source.labels, target.features)
    sa = SubspaceAlignmentBaseline(k=args.k, seed=args.seed).fit(
        source.features, source.labels, target.features
    )
    source_only = SoftmaxClassifier(seed=args.seed).fit(source.features, source.labels)

    final = {
        "prda_accuracy": None,
        "sa_accuracy": None,
        "source_only_accuracy": None,
        "prda_source_size": prda.augmented_size_,
        "k_effective": prda.k_effective_,
        "subspace_count": prda.result_.source_stats.count,
    }
    if eval_labels is not None:
        n_eval = min(len(eval_labels), target.features.shape[0])
        final["prda_accuracy"] = evaluate(prda, target.features[:n_eval], eval_labels[:n_eval])
        final["sa_accuracy"] = evaluate(sa, target.features[:n_eval], eval_labels[:n_eval])
        final["source_only_accuracy"] = evaluate(
            source_only, target.features[:n_eval], eval_labels[:n_eval]
        )
        prda.score_rounds(target.features[:n_eval], eval_labels[:n_eval])
    elapsed = time.perf_counter() - started

    payload = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "command": "run",
        "config": {
            "source": args.source,
            "target": args.target,
            "target_labels": args.target_labels,
            "k": args.k,
            "tau": args.tau,
            "rho": args.rho,
            "lambdas": list(schedule),
            "batch": args.batch,
            "seed": args.seed,
        },
        "rounds": [r.to_dict() for r in prda.round_reports_],
        "final": final,
    }
    if args.format == "csv":
        _emit(_round_csv(prda.round_reports_), args.out)
    else:
        _emit(_json_report(payload), args.out)
    if args.save_model:
        prda.final_model_.save(args.save_model)
    # timing goes to stderr so reports stay byte-identical across reruns
    print(f"run completed in {elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_probe(args):
    if args.folds < 2:
        raise _UsageError(f"--folds must be >= 2, got {args.folds}")
    a = load_dataset(args.a)
    b = load_dataset(args.b)
    scores = domain_probe_scores(a.features, b.features, folds=args.folds, seed=args.seed)
    payload = {
        "format": "prda-probe-report",
        "version": REPORT_VERSION,
        "command": "probe",
        "a": args.a,
        "b": args.b,
        "n_folds": args.folds,
        "seed": args.seed,
        "folds": [float(s) for s in scores],
        "mean_accuracy": float(scores.mean()),
    }
    _emit(_json_report(payload), args.out)
    return EXIT_OK


def _sweep_cell(task):
    """One (magnitude, seed) sweep cell; returns rows for every method."""
    family, magnitude, seed, cfg = task
    spec = ShiftSpec(
        family=family, magnitude=magnitude, seed=seed,
        dim=cfg["dim"], per_class=cfg["per_class"],
    )
    source, target = synth_domain_pair(spec)
    probe_accuracy = divergence_probe(
        source.features, target.features, folds=5, seed=seed
    )

    source_only = SoftmaxClassifier(seed=seed).fit(source.features, source.labels)
    sa = SubspaceAlignmentBaseline(k=cfg["k"], seed=seed).fit(
        source.features, source.labels, target.features
    )
    prda = ProgressiveDomainAugmentation(
        k=cfg["k"], tau=cfg["tau"], rho=cfg["rho"],
        lambda_schedule=cfg["lambdas"], batch=cfg["batch"], seed=seed,
    ).fit(source.features, source.labels, target.features)

    accuracy = {
        "source_only": evaluate(source_only, target.features, target.labels),
        "sa": evaluate(sa, target.features, target.labels),
        "prda": evaluate(prda, target.features, target.labels),
    }
    return [
        (family, magnitude, seed, method, accuracy[method], probe_accuracy)
        for method in SWEEP_METHODS
    ]


def _worker_count():
    raw = os.environ.get("PRDA_THREADS", "").strip()
    if raw == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise _UsageError(f"PRDA_THREADS must be an integer, got {raw!r}")
    if value < 0:
        raise _UsageError(f"PRDA_THREADS must be >= 0, got {raw!r}")
    if value == 0:
        return os.cpu_count() or 1
    return value


def sweep_rows(family, magnitudes, seeds, cfg, workers=1):
    """Sweep table rows in deterministic (magnitude, seed, method) order."""
    tasks = [
        (family, magnitude, seed, cfg)
        for magnitude in magnitudes
        for seed in range(seeds)
    ]
    if workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_cell, tasks))
    else:
        chunks = [_sweep_cell(task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]
    order = {method: i for i, method in enumerate(SWEEP_METHODS)}
    rows.sort(key=lambda r: (r[1], r[2], order[r[3]]))
    return rows


def cmd_sweep(args):
    if args.family not in SHIFT_FAMILIES:
        raise _UsageError(
            f"unknown family {args.family!r}; expected one of {', '.join(SHIFT_FAMILIES)}"
        )
    if args.seeds < 1:
        raise _UsageError(f"--seeds must be >= 1, got {args.seeds}")
    schedule = _validate_run_config(args)
    if args.dim < 2:
        raise _UsageError(f"--dim must be >= 2, got {args.dim}")
    if args.per_class < 1:
        raise _UsageError(f"--per-class must be >= 1, got {args.per_class}")
    magnitudes = _parse_magnitudes(args.magnitudes)
    if any(m < 0 for m in magnitudes):
        raise _UsageError("--magnitudes must be non-negative")

    cfg = {
        "k": args.k, "tau": args.tau, "rho": args.rho, "lambdas": schedule,
        "batch": args.batch, "dim": args.dim, "per_class": args.per_class,
    }
    rows = sweep_rows(args.family, magnitudes, args.seeds, cfg, workers=_worker_count())
    lines = [SWEEP_HEADER]
    for family, magnitude, seed, method, accuracy, probe_accuracy in rows:
        lines.append(
            f"{family},{magnitude!r},{seed},{method},{accuracy!r},{probe_accuracy!r}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    handlers = {"run": cmd_run, "probe": cmd_probe, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrdaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def console_main():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())

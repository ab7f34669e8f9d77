"""Command-line interface: generate / train / evaluate / inspect.

Every command writes a flat key=value manifest recording the resolved
configuration, seed, and artifact paths, so any output can be reproduced
from its manifest alone. Exit codes: 0 success, 2 usage error, 1 runtime
error.

``train`` accepts a comma-separated list of losses and prints one
comparison row per method in the layout of the published evaluation
tables (NMI, R@1, R@2, R@4, R@8, scaled by 100). The absolute numbers
come from the synthetic desk-scale task and are not comparable to any
full-scale published results.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .data import generate_gaussian, load_csv, sample_batch, save_csv, split_by_class
from .embedding_ops import pairwise_distances
from .errors import InstanceTooLargeError
from .facility import oracle_score
from .inference import brute_force_inference, greedy_inference, pam_refine
from .metrics import margin
from .mlp import forward, load_checkpoint, save_checkpoint
from .train import TrainConfig, TrainRecord, evaluate_model, train

LOSS_KINDS = ("cluster", "triplet", "lifted", "npairs")


def positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def loss_list(text: str) -> tuple[str, ...]:
    values = tuple(v.strip() for v in text.split(",") if v.strip())
    for v in values:
        if v not in LOSS_KINDS:
            raise argparse.ArgumentTypeError(
                f"unknown loss {v!r}, choose from {', '.join(LOSS_KINDS)}"
            )
    if not values:
        raise argparse.ArgumentTypeError("expected at least one loss name")
    return values


def write_manifest(path: Path, entries: dict) -> None:
    lines = [f"{key}={entries[key]}" for key in sorted(entries)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def record_to_json(record: TrainRecord) -> str:
    payload = {
        "iteration": record.iteration,
        "loss": record.loss,
        "gamma": record.gamma,
        "nmi": record.nmi,
        "recall_at": None
        if record.recall_at is None
        else {str(k): v for k, v in record.recall_at.items()},
        "elapsed_ms": record.elapsed_ms,
    }
    return json.dumps(payload, sort_keys=True)


def print_metric_table(rows: list[tuple[str, float, dict[int, float]]], ks: tuple[int, ...]) -> None:
    """One row per method: NMI and Recall@K, scaled by 100 like the
    published evaluation tables. Synthetic desk-scale numbers only."""
    header = f"{'method':<10} {'NMI':>7} " + " ".join(f"{'R@' + str(k):>7}" for k in ks)
    print(header)
    print("-" * len(header))
    for name, nmi_value, recalls in rows:
        cells = " ".join(f"{100.0 * recalls[k]:>7.2f}" for k in ks)
        print(f"{name:<10} {100.0 * nmi_value:>7.2f} {cells}")


def cmd_generate(args: argparse.Namespace) -> int:
    dataset = generate_gaussian(
        num_classes=args.classes,
        points_per_class=args.per_class,
        input_dim=args.dim,
        center_scale=args.center_scale,
        cluster_std=args.std,
        seed=args.seed,
    )
    out = Path(args.out)
    save_csv(dataset, out)
    write_manifest(
        out.with_suffix(out.suffix + ".manifest"),
        {
            "command": "generate",
            "tool_version": __version__,
            "classes": args.classes,
            "per_class": args.per_class,
            "dim": args.dim,
            "std": args.std,
            "center_scale": args.center_scale,
            "seed": args.seed,
            "out": out,
        },
    )
    print(f"wrote {dataset.num_examples} rows ({args.classes} classes) to {out}")
    return 0


def _train_config(args: argparse.Namespace, loss: str) -> TrainConfig:
    return TrainConfig(
        batch_size=args.batch_size,
        hidden_dims=args.hidden_dims,
        embedding_dim=args.embedding_dim,
        learning_rate=args.lr,
        rms_decay=args.rms_decay,
        rms_eps=args.rms_eps,
        gamma0=args.gamma0,
        gamma_decay_rate=args.gamma_decay_rate,
        gamma_decay_interval=args.gamma_decay_interval or None,
        refine_sweeps=args.refine_sweeps,
        candidate_pool=args.candidate_pool,
        class_ratio=args.class_ratio,
        margin_alpha=args.alpha,
        reg_lambda=args.reg_lambda,
        loss_kind=loss,  # type: ignore[arg-type]
        max_iterations=args.iterations,
        train_fraction=args.train_fraction,
        eval_interval=args.eval_interval,
        recall_ks=args.recall_ks,
        seed=args.seed,
    )


def _suffixed(path: Path, tag: str, multi: bool) -> Path:
    if not multi:
        return path
    return path.with_name(f"{path.stem}-{tag}{path.suffix}")


def cmd_train(args: argparse.Namespace) -> int:
    dataset = load_csv(args.data)
    multi = len(args.loss) > 1
    table_rows = []
    for loss in args.loss:
        config = _train_config(args, loss)
        params, records = train(config, dataset)

        ckpt_path = _suffixed(Path(args.checkpoint), loss, multi)
        save_checkpoint(params, ckpt_path)
        metrics_path = (
            _suffixed(Path(args.metrics), loss, multi)
            if args.metrics
            else ckpt_path.with_suffix(ckpt_path.suffix + ".metrics.jsonl")
        )
        metrics_path.write_text(
            "".join(record_to_json(r) + "\n" for r in records), encoding="utf-8"
        )

        if records and records[-1].nmi is not None:
            final_nmi, final_recalls = records[-1].nmi, records[-1].recall_at
        else:
            split = split_by_class(dataset, config.train_fraction, config.seed)
            final_nmi, final_recalls = evaluate_model(
                params, dataset, split.test_classes, config.recall_ks, config.refine_sweeps
            )
        table_rows.append((loss, final_nmi, final_recalls))

        manifest = {f"config.{k}": v for k, v in asdict(config).items()}
        manifest.update(
            {
                "command": "train",
                "tool_version": __version__,
                "data": args.data,
                "checkpoint": ckpt_path,
                "metrics": metrics_path,
            }
        )
        write_manifest(ckpt_path.with_suffix(ckpt_path.suffix + ".manifest"), manifest)

    print("held-out metrics (synthetic task; not comparable to published full-scale numbers)")
    print_metric_table(table_rows, args.recall_ks)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    params = load_checkpoint(args.checkpoint)
    dataset = load_csv(args.data)
    split = split_by_class(dataset, args.train_fraction, args.split_seed)
    nmi_value, recalls = evaluate_model(
        params, dataset, split.test_classes, args.recall_ks, args.refine_sweeps
    )
    print(f"held-out classes: {len(split.test_classes)}")
    print_metric_table([("eval", nmi_value, recalls)], args.recall_ks)
    write_manifest(
        Path(args.checkpoint).with_suffix(".eval.manifest"),
        {
            "command": "evaluate",
            "tool_version": __version__,
            "checkpoint": args.checkpoint,
            "data": args.data,
            "split_seed": args.split_seed,
            "train_fraction": args.train_fraction,
            "recall_ks": ",".join(str(k) for k in args.recall_ks),
            "refine_sweeps": args.refine_sweeps,
            "nmi": repr(nmi_value),
            **{f"recall_at_{k}": repr(v) for k, v in recalls.items()},
        },
    )
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    params = load_checkpoint(args.checkpoint)
    dataset = load_csv(args.data)
    rng = np.random.default_rng(args.batch_seed)
    feats, labels = sample_batch(
        dataset, tuple(dataset.classes), args.m, args.class_ratio, rng
    )
    batch, _ = forward(params, feats)
    dist = pairwise_distances(batch)
    num_classes = int(labels.max()) + 1

    print(f"batch: m={args.m} classes={num_classes} gamma={args.gamma}")
    seed_result = greedy_inference(dist, labels, args.gamma)
    print("greedy selection (point, marginal gain, objective):")
    prev = 0.0
    for step, (point, objective) in enumerate(zip(seed_result.medoids, seed_result.trace)):
        gain = objective - prev if step else objective
        print(f"  step {step}: add {point:>4d} gain {gain:+.6f} A(S) {objective:.6f}")
        prev = objective
    refined = pam_refine(
        dist, labels, seed_result.medoids, args.gamma, args.refine_sweeps, args.candidate_pool
    )
    print("refinement sweeps (objective is nondecreasing):")
    for sweep, objective in enumerate(refined.trace):
        print(f"  sweep {sweep}: A(S) {objective:.6f}")
    oracle_value, oracle_medoids = oracle_score(dist, labels)
    hinge_arg = refined.objective - oracle_value
    print(f"final medoids: {' '.join(str(i) for i in refined.medoids)}")
    print(f"oracle medoids: {' '.join(str(i) for i in oracle_medoids)}")
    print(f"oracle score: {oracle_value:.6f}")
    print(f"margin of violator: {margin(refined.assignment, labels):.6f}")
    print(f"hinge argument: {hinge_arg:.6f}")
    print(f"loss: {max(0.0, hinge_arg):.6f}")
    if args.brute_force:
        try:
            exact = brute_force_inference(dist, labels, args.gamma)
        except InstanceTooLargeError as exc:
            print(f"brute force skipped: {exc}")
        else:
            print(
                f"brute-force optimum: A(S) {exact.objective:.6f} "
                f"medoids {' '.join(str(i) for i in exact.medoids)}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterembed",
        description="Metric learning by structured facility-location clustering.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic Gaussian-blob dataset")
    gen.add_argument("--classes", type=positive_int, required=True)
    gen.add_argument("--per-class", type=positive_int, required=True)
    gen.add_argument("--dim", type=positive_int, required=True)
    gen.add_argument("--std", type=nonneg_float, default=1.0)
    gen.add_argument("--center-scale", type=nonneg_float, default=10.0)
    gen.add_argument("--seed", type=nonneg_int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    tr = sub.add_parser("train", help="train one or more losses on a dataset")
    tr.add_argument("--data", required=True)
    tr.add_argument("--loss", type=loss_list, default=("cluster",),
                    help="comma-separated subset of: " + ", ".join(LOSS_KINDS))
    tr.add_argument("--checkpoint", required=True)
    tr.add_argument("--metrics", default=None, help="JSON-lines metrics path")
    tr.add_argument("--iterations", type=nonneg_int, default=1000)
    tr.add_argument("--batch-size", type=positive_int, default=128)
    tr.add_argument("--hidden-dims", type=int_list, default=(32, 32))
    tr.add_argument("--embedding-dim", type=positive_int, default=16)
    tr.add_argument("--lr", type=nonneg_float, default=1e-3)
    tr.add_argument("--rms-decay", type=positive_float, default=0.9)
    tr.add_argument("--rms-eps", type=positive_float, default=1e-8)
    tr.add_argument("--gamma0", type=positive_float, default=1.0)
    tr.add_argument("--gamma-decay-rate", type=positive_float, default=0.94)
    tr.add_argument("--gamma-decay-interval", type=nonneg_int, default=0,
                    help="0 derives one pass over the train classes")
    tr.add_argument("--refine-sweeps", type=positive_int, default=5)
    tr.add_argument("--candidate-pool", choices=("cluster", "all"), default="cluster")
    tr.add_argument("--class-ratio", type=positive_float, default=0.25)
    tr.add_argument("--alpha", type=positive_float, default=1.0)
    tr.add_argument("--reg-lambda", type=nonneg_float, default=1e-3)
    tr.add_argument("--train-fraction", type=positive_float, default=0.5)
    tr.add_argument("--eval-interval", type=positive_int, default=100)
    tr.add_argument("--recall-ks", type=int_list, default=(1, 2, 4, 8))
    tr.add_argument("--seed", type=nonneg_int, default=0)
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="evaluate a checkpoint on held-out classes")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--split-seed", type=nonneg_int, default=0)
    ev.add_argument("--train-fraction", type=positive_float, default=0.5)
    ev.add_argument("--recall-ks", type=int_list, default=(1, 2, 4, 8))
    ev.add_argument("--refine-sweeps", type=positive_int, default=5)
    ev.set_defaults(func=cmd_evaluate)

    ins = sub.add_parser("inspect", help="trace the inference on one sampled batch")
    ins.add_argument("--checkpoint", required=True)
    ins.add_argument("--data", required=True)
    ins.add_argument("--m", type=positive_int, default=16)
    ins.add_argument("--class-ratio", type=positive_float, default=0.25)
    ins.add_argument("--batch-seed", type=nonneg_int, default=0)
    ins.add_argument("--gamma", type=nonneg_float, default=1.0)
    ins.add_argument("--refine-sweeps", type=positive_int, default=5)
    ins.add_argument("--candidate-pool", choices=("cluster", "all"), default="cluster")
    ins.add_argument("--brute-force", action="store_true")
    ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

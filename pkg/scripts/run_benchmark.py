"""Four-way loss comparison on the synthetic Gaussian benchmark.

Trains one model per loss (cluster, triplet, lifted, npairs) on the same
dataset and split, then prints an NMI / Recall@K table in the layout used
by published metric-learning evaluations (values scaled by 100). Two
reference rows anchor the comparison: "raw" clusters the unembedded input
features and "init" evaluates the untrained network with normalized
embeddings (the lifted and npairs models train unnormalized, so their own
untrained baselines sit below the init row).

All numbers are desk-scale synthetic-task results; they are not comparable
to any published real-dataset table. Transfer to held-out classes on
isotropic Gaussians is weak by construction (disjoint classes share no
covariance structure), so small budgets near the default are where the
trained models beat their untrained baselines.

Usage: python3 scripts/run_benchmark.py [--iterations N] [--std S] [--seed K]
"""

import argparse
import time

import numpy as np

from clusterembed.cli import print_metric_table
from clusterembed.data import generate_gaussian, split_by_class
from clusterembed.embedding_ops import EmbeddingBatch, pairwise_distances
from clusterembed.inference import greedy_inference, pam_refine
from clusterembed.metrics import nmi, recall_at_k
from clusterembed.mlp import init_params
from clusterembed.train import TrainConfig, evaluate_model, heldout_rows, train

LOSSES = ("cluster", "triplet", "lifted", "npairs")
RECALL_KS = (1, 2, 4, 8)


def raw_feature_row(dataset, test_classes):
    feats, labels = heldout_rows(dataset, test_classes)
    batch = EmbeddingBatch(feats)
    dist = pairwise_distances(batch)
    seed_result = greedy_inference(dist, labels, gamma=0.0)
    refined = pam_refine(dist, labels, seed_result.medoids, gamma=0.0, max_sweeps=5)
    recalls = {k: recall_at_k(batch, labels, k) for k in RECALL_KS}
    return nmi(refined.assignment, labels), recalls


def make_config(loss_kind: str, args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        batch_size=args.batch_size,
        class_ratio=args.class_ratio,
        learning_rate=args.learning_rate,
        loss_kind=loss_kind,
        max_iterations=args.iterations,
        eval_interval=args.iterations,
        recall_ks=RECALL_KS,
        seed=args.seed,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--per-class", type=int, default=50)
    parser.add_argument("--dim", type=int, default=10)
    parser.add_argument("--std", type=float, default=6.0)
    parser.add_argument("--data-seed", type=int, default=7)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--iterations", type=int, default=20)
    parser.add_argument("--batch-size", type=int, default=50)
    parser.add_argument("--class-ratio", type=float, default=0.1)
    parser.add_argument("--learning-rate", type=float, default=3e-4)
    args = parser.parse_args()

    dataset = generate_gaussian(args.classes, args.per_class, args.dim,
                                center_scale=10.0, cluster_std=args.std,
                                seed=args.data_seed)
    split = split_by_class(dataset, 0.5, args.seed)
    print(f"{args.classes} classes x {args.per_class} points, dim {args.dim}, "
          f"std {args.std}; {len(split.test_classes)} held-out classes")

    rows = [("raw", *raw_feature_row(dataset, split.test_classes))]

    init_config = make_config("cluster", args)
    rng = np.random.default_rng(init_config.seed)
    dims = [args.dim, *init_config.hidden_dims, init_config.embedding_dim]
    init = init_params(dims, init_config.normalize_embeddings, rng)
    rows.append(("init", *evaluate_model(init, dataset, split.test_classes, RECALL_KS)))

    for kind in LOSSES:
        config = make_config(kind, args)
        tic = time.perf_counter()
        _, records = train(config, dataset)
        elapsed = time.perf_counter() - tic
        final = records[-1]
        rows.append((kind, final.nmi, final.recall_at))
        print(f"trained {kind} ({args.iterations} iters, {elapsed:.1f}s)")

    print()
    print_metric_table(rows, RECALL_KS)


if __name__ == "__main__":
    main()

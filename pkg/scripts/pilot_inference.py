"""Pilot for the inference regression floor.

Runs the fixed 200-instance protocol (m = 10, 2 or 3 classes, margin
weight cycling through 0 / 0.5 / 2) and reports, for each candidate
pool, how often greedy+refinement reaches the brute-force optimum and
how often refinement is at least as good as greedy alone. The measured
match fraction is what the acceptance test pins as its floor.

Usage: python3 scripts/pilot_inference.py
"""

import time

import numpy as np

from clusterembed.embedding_ops import EmbeddingBatch, pairwise_distances
from clusterembed.inference import brute_force_inference, greedy_inference, pam_refine

INSTANCES = 200
SEED = 2024


def instance(rng: np.random.Generator, index: int):
    m, dim = 10, 4
    num_classes = 2 if index % 2 == 0 else 3
    gamma = (0.0, 0.5, 2.0)[index % 3]
    emb = rng.normal(size=(m, dim))
    labels = np.concatenate(
        [np.arange(num_classes), rng.integers(0, num_classes, size=m - num_classes)]
    )
    labels = rng.permutation(labels)
    return pairwise_distances(EmbeddingBatch(emb)), labels, gamma


def main() -> None:
    for pool in ("cluster", "all"):
        rng = np.random.default_rng(SEED)
        matched = 0
        refined_ge_greedy = 0
        tic = time.perf_counter()
        for i in range(INSTANCES):
            dist, labels, gamma = instance(rng, i)
            seed_result = greedy_inference(dist, labels, gamma)
            refined = pam_refine(
                dist, labels, seed_result.medoids, gamma, max_sweeps=5, candidate_pool=pool
            )
            exact = brute_force_inference(dist, labels, gamma)
            if refined.objective >= seed_result.objective - 1e-12:
                refined_ge_greedy += 1
            if refined.objective >= exact.objective - 1e-9:
                matched += 1
        elapsed = time.perf_counter() - tic
        print(
            f"pool={pool:<8} refined>=greedy {refined_ge_greedy}/{INSTANCES}"
            f"  brute-force match {matched}/{INSTANCES}"
            f"  ({matched / INSTANCES:.3f})  elapsed {elapsed:.2f}s"
        )


if __name__ == "__main__":
    main()

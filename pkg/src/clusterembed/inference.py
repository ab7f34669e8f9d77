"""Loss-augmented inference over medoid sets.

The subproblem: over all medoid sets S of fixed size C, maximize

    A(S) = facility_score(D, S) + gamma * margin(assign(D, S), y_star)

The margin rewards candidate clusterings that disagree with the ground
truth, so the maximizer is the most-violating assignment. Exact
maximization is NP-hard; ``greedy_inference`` builds an initial set by
best-marginal-benefit selection and ``pam_refine`` improves it with
medoid/member exchanges. ``brute_force_inference`` exhaustively solves
small instances and exists for testing.

Measured costs (m points, C medoids): greedy is O(C * m * (m + C * m))
with the margin enabled and O(C * m^2) without; one refinement sweep is
O(C * m * (m + C * m)) in the worst case. Everything here is sequential
and deterministic: all argmax ties resolve to the smallest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from itertools import combinations
from typing import Literal, Sequence

import numpy as np

from .errors import InstanceTooLargeError, InvalidInputError
from .facility import assign, facility_score
from .metrics import margin

# Exhaustive search refuses instances with more candidate subsets than this.
BRUTE_FORCE_CAP = 10**6


@dataclass
class InferenceResult:
    """Outcome of one inference routine.

    ``objective`` is A(S) for the returned medoids; ``trace`` records the
    objective after each iteration of the routine that produced the result
    (greedy: after each added medoid; refinement: after each outer sweep).
    """

    medoids: tuple[int, ...]
    assignment: np.ndarray
    objective: float
    trace: list[float] = field(default_factory=list)


def _num_classes(y_star: np.ndarray) -> int:
    return int(np.max(y_star)) + 1


def augmented_objective(
    dist: np.ndarray, medoids: Sequence[int], y_star: np.ndarray, gamma: float
) -> float:
    """A(S): facility score plus gamma times the margin of the induced labels."""
    score = facility_score(dist, medoids)
    if gamma != 0.0:
        score += gamma * margin(assign(dist, medoids), y_star)
    return score


def greedy_inference(dist: np.ndarray, y_star: np.ndarray, gamma: float) -> InferenceResult:
    """Build a medoid set of size |classes| by repeatedly adding the point
    with the best marginal benefit A(S + {i}) - A(S).

    The first step maximizes A({i}) directly (A of the empty set is an
    arbitrary constant that cancels out of the argmax). Ties go to the
    smallest candidate index.
    """
    y_star = np.asarray(y_star)
    m = dist.shape[0]
    num_classes = _num_classes(y_star)
    if num_classes > m:
        raise InvalidInputError(f"need {num_classes} medoids but batch has only {m} points")

    chosen: list[int] = []
    trace: list[float] = []
    in_set = np.zeros(m, dtype=bool)
    # per-point distance to, and position of, the nearest chosen medoid
    best_dist = np.full(m, np.inf)
    best_pos = np.zeros(m, dtype=np.intp)

    for step in range(num_classes):
        cands = np.flatnonzero(~in_set)
        # facility part of A(S + {i}) for every candidate at once
        new_dist = np.minimum(best_dist[:, None], dist[:, cands])
        scores = -new_dist.sum(axis=0)
        if gamma != 0.0:
            for idx, cand in enumerate(cands):
                closer = dist[:, cand] < best_dist
                cand_assign = np.where(closer, step, best_pos)
                scores[idx] += gamma * margin(cand_assign, y_star)
        best = int(np.argmax(scores))
        pick = int(cands[best])
        chosen.append(pick)
        in_set[pick] = True
        closer = dist[:, pick] < best_dist
        best_pos = np.where(closer, step, best_pos)
        best_dist = np.minimum(best_dist, dist[:, pick])
        trace.append(float(scores[best]))

    medoids = tuple(chosen)
    return InferenceResult(
        medoids=medoids,
        assignment=best_pos.copy(),
        objective=augmented_objective(dist, medoids, y_star, gamma),
        trace=trace,
    )


def pam_refine(
    dist: np.ndarray,
    y_star: np.ndarray,
    initial_medoids: Sequence[int],
    gamma: float,
    max_sweeps: int,
    candidate_pool: Literal["cluster", "all"] = "cluster",
) -> InferenceResult:
    """Refine a medoid set by sequential medoid/point exchanges.

    With the default ``candidate_pool="cluster"``, each outer sweep freezes
    the assignment induced by the current medoids, then for every medoid
    position k picks, among the current members of cluster k, the exchange
    candidate j maximizing

        within-cluster-k facility score of j
        + gamma * margin(assign with position k swapped to j, y_star)

    and installs it in place. With ``candidate_pool="all"``, candidates
    range over the whole batch and each exchange is scored by the full
    objective A(S with position k swapped to j); when this variant stops
    changing the result is a single-exchange local optimum of A (no swap of
    one medoid for any other point improves A). The cheaper within-cluster
    surrogate does not have that property, which is why the whole-batch
    variant pays for full evaluations.

    Points serving as other positions' medoids are never candidates, which
    keeps the medoid set duplicate-free; a cluster with no members keeps
    its medoid. Ties go to the smallest candidate index. Sweeps stop early
    once one of them changes nothing.

    The trace holds A(S) after each completed sweep and never decreases.
    For the whole-batch variant each installed swap maximizes A with
    keeping the current medoid among the candidates. For the within-cluster
    variant the frozen-assignment surrogate lower-bounds the true facility
    score, the bound is tight when j is the incumbent medoid, and the
    margin term is evaluated exactly, so each swap can only raise A as
    well.
    """
    y_star = np.asarray(y_star)
    m = dist.shape[0]
    num_classes = _num_classes(y_star)
    medoids = [int(i) for i in initial_medoids]
    if len(medoids) != num_classes:
        raise InvalidInputError(
            f"initial medoid set has size {len(medoids)}, expected {num_classes}"
        )
    if len(set(medoids)) != len(medoids):
        raise InvalidInputError("initial medoid indices must be distinct")
    if any(i < 0 or i >= m for i in medoids):
        raise InvalidInputError(f"initial medoid index out of range [0, {m})")
    if max_sweeps < 1:
        raise InvalidInputError("refinement needs at least one sweep")
    if candidate_pool not in ("cluster", "all"):
        raise InvalidInputError(f"unknown candidate pool {candidate_pool!r}")

    trace: list[float] = []
    for _ in range(max_sweeps):
        labels = assign(dist, medoids)
        changed = False
        for k in range(num_classes):
            members = np.flatnonzero(labels == k)
            cands = members if candidate_pool == "cluster" else np.arange(m)
            other_medoids = set(medoids) - {medoids[k]}
            cands = cands[~np.isin(cands, list(other_medoids))]
            if cands.size == 0:
                continue
            if candidate_pool == "cluster":
                scores = -dist[np.ix_(members, cands)].sum(axis=0)
            else:
                # full facility score of each swapped set: nearest of the
                # other medoids, capped by the candidate column
                others = [medoids[p] for p in range(num_classes) if p != k]
                other_min = (
                    dist[:, others].min(axis=1) if others else np.full(m, np.inf)
                )
                scores = -np.minimum(other_min[:, None], dist[:, cands]).sum(axis=0)
            if gamma != 0.0:
                trial = list(medoids)
                for idx, cand in enumerate(cands):
                    trial[k] = int(cand)
                    scores[idx] += gamma * margin(assign(dist, trial), y_star)
            pick = int(cands[int(np.argmax(scores))])
            if pick != medoids[k]:
                medoids[k] = pick
                changed = True
        trace.append(augmented_objective(dist, medoids, y_star, gamma))
        if not changed:
            break

    final = tuple(medoids)
    return InferenceResult(
        medoids=final,
        assignment=assign(dist, final),
        objective=trace[-1],
        trace=trace,
    )


def brute_force_inference(dist: np.ndarray, y_star: np.ndarray, gamma: float) -> InferenceResult:
    """Exhaustively maximize A(S) over all medoid sets of size |classes|.

    Test oracle only: refuses instances with more than 10^6 candidate
    subsets. Ties resolve to the lexicographically smallest index tuple,
    which is the enumeration order of ``itertools.combinations``.
    """
    y_star = np.asarray(y_star)
    m = dist.shape[0]
    num_classes = _num_classes(y_star)
    if num_classes > m:
        raise InvalidInputError(f"need {num_classes} medoids but batch has only {m} points")
    if comb(m, num_classes) > BRUTE_FORCE_CAP:
        raise InstanceTooLargeError(
            f"C({m}, {num_classes}) subsets exceed the {BRUTE_FORCE_CAP} enumeration cap"
        )
    best_set: tuple[int, ...] | None = None
    best_score = -np.inf
    for subset in combinations(range(m), num_classes):
        score = -float(np.min(dist[:, subset], axis=1).sum())
        if gamma != 0.0:
            score += gamma * margin(np.argmin(dist[:, subset], axis=1), y_star)
        if score > best_score:
            best_score = score
            best_set = subset
    assert best_set is not None
    return InferenceResult(
        medoids=best_set,
        assignment=assign(dist, best_set),
        objective=best_score,
        trace=[best_score],
    )

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterembed.embedding_ops import EmbeddingBatch
from clusterembed.errors import InvalidInputError
from clusterembed.metrics import contingency_table, margin, nmi, recall_at_k, same_partition

from oracles import nmi_oracle, recall_at_k_oracle

label_pairs = st.integers(2, 30).flatmap(
    lambda m: st.tuples(
        st.lists(st.integers(0, 4), min_size=m, max_size=m),
        st.lists(st.integers(0, 4), min_size=m, max_size=m),
    )
)


def dense(y):
    """Remap arbitrary labels to dense 0..C-1 in first-appearance order."""
    y = np.asarray(y)
    _, inv = np.unique(y, return_inverse=True)
    return inv


def test_contingency_table_hand_example():
    y1 = np.array([0, 0, 1, 1, 2])
    y2 = np.array([1, 1, 1, 0, 0])
    table = contingency_table(y1, y2)
    assert table.tolist() == [[0, 2], [1, 1], [1, 0]]
    assert table.sum() == 5


def test_same_partition():
    assert same_partition([0, 0, 1, 1], [1, 1, 0, 0])
    assert same_partition([0, 1, 2], [5, 3, 9])
    assert not same_partition([0, 0, 1, 1], [0, 1, 0, 1])


def test_nmi_identity_is_exactly_one():
    y = np.array([0, 2, 1, 1, 0, 2])
    assert nmi(y, y) == 1.0


def test_nmi_label_permutation_is_exactly_one():
    y1 = np.array([0, 0, 1, 1, 2, 2])
    y2 = np.array([2, 2, 0, 0, 1, 1])
    assert nmi(y1, y2) == 1.0


def test_nmi_independent_pattern_is_zero():
    # balanced 2x2 independence: joint pmf factorizes, MI = 0
    assert nmi(np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1])) == 0.0


def test_nmi_zero_entropy_convention():
    allsame = np.zeros(4, dtype=int)
    assert nmi(allsame, allsame) == 1.0
    assert nmi(allsame, np.array([0, 0, 1, 1])) == 0.0
    assert nmi(np.array([0, 0, 1, 1]), allsame) == 0.0


def test_nmi_frozen_example():
    got = nmi(np.array([0, 0, 0, 1]), np.array([0, 0, 1, 1]))
    assert got == pytest.approx(0.3455920299442113, abs=1e-12)


def test_nmi_against_literal_oracle():
    rng = np.random.default_rng(13)
    for _ in range(300):
        m = int(rng.integers(2, 40))
        y1 = dense(rng.integers(0, rng.integers(1, 6), size=m))
        y2 = dense(rng.integers(0, rng.integers(1, 6), size=m))
        assert nmi(y1, y2) == pytest.approx(nmi_oracle(y1, y2), abs=1e-12)


def test_nmi_shape_validation():
    with pytest.raises(InvalidInputError):
        nmi(np.array([0, 1]), np.array([0, 1, 2]))
    with pytest.raises(InvalidInputError):
        nmi(np.array([]), np.array([]))


@settings(deadline=None, max_examples=200)
@given(label_pairs)
def test_nmi_bounds_and_symmetry(pair):
    y1, y2 = dense(pair[0]), dense(pair[1])
    value = nmi(y1, y2)
    assert 0.0 <= value <= 1.0
    assert nmi(y2, y1) == pytest.approx(value, abs=1e-12)


def test_margin_is_one_minus_nmi():
    y1 = np.array([0, 0, 0, 1])
    y2 = np.array([0, 0, 1, 1])
    assert margin(y1, y2) == pytest.approx(1.0 - nmi(y1, y2), abs=0)
    assert margin(y2, y2) == 0.0


def test_recall_at_k_separated_clusters():
    emb = EmbeddingBatch(
        np.array([[0.0, 0], [0.1, 0], [10.0, 0], [10.1, 0]])
    )
    labels = np.array([0, 0, 1, 1])
    assert recall_at_k(emb, labels, 1) == 1.0
    assert recall_at_k(emb, labels, 3) == 1.0


def test_recall_at_k_singleton_class_cannot_hit():
    emb = EmbeddingBatch(np.array([[0.0], [1.0], [2.0]]))
    labels = np.array([0, 0, 1])
    # the singleton at 2.0 has no same-class neighbor anywhere
    assert recall_at_k(emb, labels, 1) == pytest.approx(2 / 3)
    assert recall_at_k(emb, labels, 2) == pytest.approx(2 / 3)


def test_recall_at_k_distance_tie_breaks_by_index():
    # point 1 is equidistant from 0 and 2; index order puts 0 first
    emb = EmbeddingBatch(np.array([[0.0], [1.0], [2.0]]))
    assert recall_at_k(emb, np.array([0, 0, 1]), 1) == pytest.approx(2 / 3)
    assert recall_at_k(emb, np.array([1, 0, 0]), 1) == pytest.approx(1 / 3)


def test_recall_at_k_matches_oracle():
    rng = np.random.default_rng(14)
    for _ in range(10):
        m = int(rng.integers(4, 15))
        emb = rng.normal(size=(m, 3))
        labels = rng.integers(0, 3, size=m)
        for k in (1, 2, m - 1):
            got = recall_at_k(EmbeddingBatch(emb), labels, k)
            assert got == pytest.approx(recall_at_k_oracle(emb, labels, k), abs=0)


def test_recall_at_k_full_neighborhood_with_paired_classes():
    rng = np.random.default_rng(15)
    emb = EmbeddingBatch(rng.normal(size=(8, 2)))
    labels = np.array([0, 0, 1, 1, 2, 2, 3, 3])
    assert recall_at_k(emb, labels, 7) == 1.0


def test_recall_at_k_bounds():
    emb = EmbeddingBatch(np.zeros((4, 2)))
    labels = np.array([0, 0, 1, 1])
    with pytest.raises(InvalidInputError):
        recall_at_k(emb, labels, 0)
    with pytest.raises(InvalidInputError):
        recall_at_k(emb, labels, 4)

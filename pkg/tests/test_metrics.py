import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anomap.errors import UndefinedMetricError, ValidationError
from anomap.metrics import ScoredPixels, auprc, auroc, pool_pixels
from reference_impls import ap_threshold_sweep, auroc_pairwise


def sp(scores, labels):
    return ScoredPixels(np.asarray(scores, dtype=float), np.asarray(labels))


def test_auroc_perfect_and_inverted():
    assert auroc(sp([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])) == 1.0
    assert auroc(sp([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])) == 0.0


def test_auroc_all_ties_is_half():
    assert auroc(sp([0.5] * 6, [1, 0, 1, 0, 0, 1])) == 0.5


def test_auroc_single_class_undefined():
    with pytest.raises(UndefinedMetricError):
        auroc(sp([0.1, 0.2], [1, 1]))
    with pytest.raises(UndefinedMetricError):
        auroc(sp([0.1, 0.2], [0, 0]))


def test_auroc_matches_pairwise_oracle_with_ties():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(10, 200))
        scores = np.round(rng.random(n), 1)  # heavy ties
        labels = (rng.random(n) < 0.3).astype(int)
        if labels.sum() in (0, n):
            labels[0], labels[1] = 0, 1
        got = auroc(sp(scores, labels))
        want = auroc_pairwise(scores.tolist(), labels.tolist())
        assert got == pytest.approx(want, abs=1e-9)


def test_auprc_perfect_separation():
    assert auprc(sp([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])) == 1.0


def test_auprc_constant_scores_is_prevalence():
    assert auprc(sp([0.4] * 10, [1, 1, 0, 0, 0, 0, 0, 0, 0, 1])) == pytest.approx(0.3)


def test_auprc_hand_worked_example():
    got = auprc(sp([0.9, 0.6, 0.5, 0.4], [1, 0, 1, 0]))
    assert got == pytest.approx(0.5 * 1.0 + 0.5 * (2 / 3), abs=1e-9)


def test_auprc_zero_positives_undefined():
    with pytest.raises(UndefinedMetricError):
        auprc(sp([0.5, 0.6], [0, 0]))


def test_auprc_matches_threshold_sweep_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(5, 150))
        scores = np.round(rng.random(n), 1)
        labels = (rng.random(n) < 0.4).astype(int)
        if labels.sum() == 0:
            labels[0] = 1
        got = auprc(sp(scores, labels))
        want = ap_threshold_sweep(scores, labels)
        assert got == pytest.approx(want, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_auroc_invariant_under_monotone_transform(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    scores = rng.random(n)
    labels = (rng.random(n) < 0.5).astype(int)
    if labels.sum() in (0, n):
        labels[0], labels[-1] = 0, 1
    base = auroc(sp(scores, labels))
    # random increasing piecewise-linear transform
    knots = np.sort(rng.random(4))
    slopes = rng.uniform(0.1, 5.0, size=5)
    transformed = np.interp(scores, knots, np.cumsum(slopes[:4]) * knots) + scores * 0.01
    assert auroc(sp(transformed, labels)) == pytest.approx(base, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_auroc_complement_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 50))
    scores = np.round(rng.random(n), 2)
    labels = (rng.random(n) < 0.5).astype(int)
    if labels.sum() in (0, n):
        labels[0], labels[-1] = 0, 1
    assert auroc(sp(scores, labels)) + auroc(sp(scores, 1 - labels)) == pytest.approx(
        1.0, abs=1e-12
    )


# Note: "AP >= prevalence whenever some positive ranks first" is NOT a
# theorem (rank order [1,0,1,1,1,1,1] gives AP 0.818 < prevalence 6/7), so
# only the provable special cases are asserted here.
def test_auprc_prevalence_boundary_cases():
    # single positive ranked first: AP is exactly 1 >= any prevalence
    assert auprc(sp([0.9, 0.5, 0.4], [1, 0, 0])) == 1.0
    # constant scorer: AP equals prevalence exactly
    assert auprc(sp([0.2] * 8, [1, 0, 0, 1, 0, 0, 0, 0])) == 0.25


def test_pool_pixels_concatenates():
    maps = [np.full((2, 2), 0.5), np.full((2, 2), 0.7)]
    masks = [np.zeros((2, 2)), np.ones((2, 2))]
    pooled = pool_pixels(maps, masks)
    assert pooled.scores.shape == (8,)
    assert pooled.labels.sum() == 4


def test_pool_pixels_shape_mismatch():
    with pytest.raises(ValidationError):
        pool_pixels([np.zeros((2, 2))], [np.zeros((3, 2))])


def test_pool_pixels_empty_list():
    with pytest.raises(ValidationError):
        pool_pixels([], [])


def test_scored_pixels_validation():
    with pytest.raises(ValidationError):
        ScoredPixels(np.array([0.1, 0.2]), np.array([1]))
    with pytest.raises(ValidationError):
        ScoredPixels(np.array([0.1, np.nan]), np.array([1, 0]))
    with pytest.raises(ValidationError):
        ScoredPixels(np.array([0.1, 0.2]), np.array([1, 2]))

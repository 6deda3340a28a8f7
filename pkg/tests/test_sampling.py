import numpy as np
import pytest

from modwatch.sampling import adasyn, ensemble_undersample, majority_vote, random_oversample

from oracles import adasyn_ratio_oracle


def blobs(rng, n_min=25, n_maj=100):
    minority = rng.normal(loc=[0, 0], scale=0.8, size=(n_min, 2))
    majority = rng.normal(loc=[2.0, 1.0], scale=1.1, size=(n_maj, 2))
    return minority, majority


# -- ADASYN ------------------------------------------------------------------


def test_balanced_classes_no_synthetics():
    rng = np.random.default_rng(0)
    minority, _ = blobs(rng, 30, 30)
    result = adasyn(minority, minority.copy(), k=5, beta=1.0, seed=0)
    assert len(result.synthetic) == 0


def test_exact_budget_at_beta_one():
    rng = np.random.default_rng(1)
    minority, majority = blobs(rng, 25, 100)
    result = adasyn(minority, majority, k=5, beta=1.0, seed=3)
    assert len(result.synthetic) == 75
    assert result.allocation.sum() == 75


def test_budget_scales_with_beta():
    rng = np.random.default_rng(2)
    minority, majority = blobs(rng, 20, 80)
    result = adasyn(minority, majority, k=5, beta=0.5, seed=3)
    assert len(result.synthetic) == int(np.ceil((80 - 20) * 0.5))


def test_synthetics_inside_generating_boxes():
    rng = np.random.default_rng(3)
    minority, majority = blobs(rng, 30, 90)
    result = adasyn(minority, majority, k=5, beta=1.0, seed=9)
    lo = minority.min(axis=0)
    hi = minority.max(axis=0)
    # every synthetic is a convex combination of two minority points, so it
    # must lie inside the minority bounding box coordinate-wise
    assert (result.synthetic >= lo - 1e-9).all()
    assert (result.synthetic <= hi + 1e-9).all()


def test_allocation_matches_ratio_oracle():
    rng = np.random.default_rng(4)
    minority, majority = blobs(rng, 25, 100)
    result = adasyn(minority, majority, k=5, beta=1.0, seed=0)
    oracle = adasyn_ratio_oracle(minority.tolist(), majority.tolist(), 5)
    assert result.ratios == pytest.approx(oracle, abs=1e-12)
    norm = np.asarray(oracle) / np.sum(oracle)
    raw = norm * 75
    # integer allocation differs from the real one by less than 1 per point
    assert np.abs(result.allocation - raw).max() < 1.0


def test_uniform_allocation_when_no_border():
    minority = np.asarray([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1], [0.05, 0.05], [0.02, 0.08]])
    majority = np.tile([100.0, 100.0], (12, 1)) + np.arange(12)[:, None]
    result = adasyn(minority, majority, k=5, beta=1.0, seed=0)
    assert result.ratios.sum() == 0.0
    assert len(result.synthetic) == 6
    assert result.allocation.max() - result.allocation.min() <= 1


def test_deterministic_under_seed():
    rng = np.random.default_rng(5)
    minority, majority = blobs(rng)
    a = adasyn(minority, majority, k=5, beta=1.0, seed=11)
    b = adasyn(minority, majority, k=5, beta=1.0, seed=11)
    c = adasyn(minority, majority, k=5, beta=1.0, seed=12)
    assert np.array_equal(a.synthetic, b.synthetic)
    assert not np.array_equal(a.synthetic, c.synthetic)


def test_too_few_minority_rows_error():
    rng = np.random.default_rng(6)
    minority, majority = blobs(rng, 5, 50)
    with pytest.raises(ValueError):
        adasyn(minority, majority, k=5, beta=1.0, seed=0)


def test_minority_not_smaller_returns_empty():
    rng = np.random.default_rng(7)
    minority, majority = blobs(rng, 40, 30)
    result = adasyn(minority, majority, k=5, beta=1.0, seed=0)
    assert len(result.synthetic) == 0


def test_random_oversample_balances():
    rng = np.random.default_rng(8)
    minority, majority = blobs(rng, 20, 90)
    synth = random_oversample(minority, majority, seed=1)
    assert len(synth) == 70
    # every synthetic row is a copy of a real minority row
    assert all(any(np.array_equal(s, m) for m in minority) for s in synth[:10])


# -- ensemble undersampling -------------------------------------------------------


def test_equal_classes_single_partition():
    maj = np.arange(20).reshape(10, 2)
    mino = np.arange(20, 40).reshape(10, 2)
    result = ensemble_undersample(maj, mino, seed=0)
    assert len(result.partitions) == 1
    assert result.discarded == 0
    assert sorted(result.partitions[0].tolist()) == list(range(10))


def test_partitions_disjoint_and_sized():
    maj = np.zeros((100, 3))
    mino = np.zeros((25, 3))
    result = ensemble_undersample(maj, mino, seed=2)
    assert len(result.partitions) == 4
    assert all(len(p) == 25 for p in result.partitions)
    seen = np.concatenate(result.partitions)
    assert len(np.unique(seen)) == 100
    assert result.discarded == 0


def test_remainder_discarded_and_reported():
    maj = np.zeros((103, 2))
    mino = np.zeros((25, 2))
    result = ensemble_undersample(maj, mino, seed=3)
    assert len(result.partitions) == 4
    assert result.discarded == 3


def test_empty_minority_errors():
    with pytest.raises(ValueError):
        ensemble_undersample(np.zeros((10, 2)), np.zeros((0, 2)))


# -- majority vote ------------------------------------------------------------------


def test_vote_majority():
    assert majority_vote([1, 1, 0]) == 1
    assert majority_vote([0, 0, 0]) == 0


def test_vote_tie_goes_positive():
    assert majority_vote([1, 0]) == 1


def test_vote_empty_errors():
    with pytest.raises(ValueError):
        majority_vote([])

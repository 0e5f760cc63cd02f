import math

import pytest

from steertest.errors import DegenerateSampleError, InputError
from steertest.rng import SplitMix64
from steertest.stats import (average_ranks, cohens_d, rank_sum_test,
                             significance_marker, spearman)

from reference import ref_mann_whitney_u


def test_spearman_perfect_monotone():
    x = [1.0, 2.0, 3.0, 5.0, 9.0]
    y = [2.0, 4.0, 9.0, 12.0, 30.0]
    out = spearman(x, y)
    assert out.statistic == 1.0
    assert out.p_value == 0.0
    rev = spearman(x, list(reversed(y)))
    assert rev.statistic == -1.0


def test_spearman_hand_case():
    out = spearman([1, 2, 3, 4], [2, 1, 4, 3])
    assert out.statistic == pytest.approx(0.6)
    assert 0.0 < out.p_value <= 1.0


def test_spearman_symmetry_and_monotone_invariance():
    stream = SplitMix64(70)
    x = [stream.uniform(-3, 3) for _ in range(15)]
    y = [stream.uniform(-3, 3) for _ in range(15)]
    assert spearman(x, y).statistic == pytest.approx(spearman(y, x).statistic)
    warped = [math.exp(v) for v in x]  # strictly increasing map
    assert spearman(warped, y).statistic == pytest.approx(spearman(x, y).statistic)


def test_spearman_errors():
    with pytest.raises(InputError):
        spearman([1, 2], [1, 2])
    with pytest.raises(InputError):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(DegenerateSampleError):
        spearman([1.0, 1.0, 1.0], [1, 2, 3])


def test_average_ranks_ties():
    assert list(average_ranks([10, 20, 20, 30])) == [1.0, 2.5, 2.5, 4.0]


def test_rank_sum_identical_multisets():
    a = [1.0, 2.0, 3.0]
    out = rank_sum_test(a, list(a))
    assert out.statistic == 9.0 / 2.0  # n^2 / 2
    assert out.p_value > 0.95


def test_rank_sum_full_separation():
    out = rank_sum_test([1, 2, 3], [10, 11, 12])
    assert out.statistic == 0.0
    assert out.p_value < 0.1


def test_rank_sum_matches_pair_counting():
    stream = SplitMix64(71)
    for _ in range(200):
        na = 1 + stream.randint(8)
        nb = 1 + stream.randint(8)
        # small integer values force plenty of ties
        a = [float(stream.randint(5)) for _ in range(na)]
        b = [float(stream.randint(5)) for _ in range(nb)]
        out = rank_sum_test(a, b)
        assert out.statistic == pytest.approx(ref_mann_whitney_u(a, b))
        assert 0.0 <= out.p_value <= 1.0


def test_rank_sum_shift_invariance():
    stream = SplitMix64(72)
    a = [stream.uniform(-1, 1) for _ in range(10)]
    b = [stream.uniform(-1, 1) for _ in range(12)]
    base = rank_sum_test(a, b)
    shifted = rank_sum_test([v + 7.5 for v in a], [v + 7.5 for v in b])
    assert base.statistic == shifted.statistic
    assert base.p_value == shifted.p_value


def test_rank_sum_all_tied_gives_p_one():
    out = rank_sum_test([3.0, 3.0], [3.0, 3.0, 3.0])
    assert out.p_value == 1.0


def test_rank_sum_errors():
    with pytest.raises(InputError):
        rank_sum_test([], [1.0])


def test_cohens_d_hand_cases():
    out = cohens_d([2.0, 4.0, 6.0], [1.0, 3.0, 5.0])
    assert abs(out.statistic - 0.5) < 1e-12
    assert out.effect_label == "medium"  # |d| = 0.5 falls in [0.5, 0.8)
    same = cohens_d([1.0, 2.0], [2.0, 1.0])
    assert same.statistic == 0.0
    assert same.effect_label == "negligible"


def test_cohens_d_separated_groups_large():
    out = cohens_d([0.0, 0.001], [1.0, 0.999])
    assert abs(out.statistic) > 0.8
    assert out.effect_label == "large"


def test_cohens_d_antisymmetry_and_rescaling():
    stream = SplitMix64(73)
    a = [stream.uniform(0, 2) for _ in range(9)]
    b = [stream.uniform(1, 3) for _ in range(7)]
    d1 = cohens_d(a, b).statistic
    assert cohens_d(b, a).statistic == pytest.approx(-d1)
    d2 = cohens_d([3.0 * v for v in a], [3.0 * v for v in b]).statistic
    assert d2 == pytest.approx(d1)


def test_cohens_d_errors():
    with pytest.raises(InputError):
        cohens_d([1.0], [1.0, 2.0])
    with pytest.raises(DegenerateSampleError):
        cohens_d([2.0, 2.0], [2.0, 2.0])


@pytest.mark.parametrize("label,d", [("negligible", 0.1), ("small", 0.3),
                                     ("medium", 0.6), ("large", 2.0)])
def test_effect_labels(label, d):
    a = [0.0, 1.0, 2.0, 3.0]  # sd ~ 1.29
    sd = 1.2909944487358056
    out = cohens_d([v + d * sd for v in a], a)
    assert out.effect_label == label


def test_significance_marker():
    assert significance_marker(1e-17) == "***"
    assert significance_marker(0.01) == ""

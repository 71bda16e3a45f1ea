from collections import Counter

import numpy as np
import pytest
from scipy import stats

from zsner.corpus import parse_conll
from zsner.errors import DegenerateFitError
from zsner.similarity import (
    DomainDistribution,
    build_distribution,
    distribution_from_counts,
    fit_regression,
    global_vocabulary,
    kl_divergence,
    transfer_distance,
)


def dist(domain_id, probs, vocab=None):
    probs = np.asarray(probs, dtype=float)
    vocab = tuple(vocab) if vocab else tuple(f"w{i}" for i in range(len(probs)))
    return DomainDistribution(domain_id=domain_id, global_vocab=vocab, probs=probs)


class TestBuildDistribution:
    def test_hand_smoothing(self):
        out = distribution_from_counts("d", Counter({"a": 2, "b": 1}), ["a", "b", "c"], epsilon=1.0)
        np.testing.assert_allclose(out.probs, [0.5, 1 / 3, 1 / 6])

    def test_all_zero_counts_is_uniform(self):
        out = distribution_from_counts("d", Counter(), ["a", "b", "c", "d"], epsilon=1.0)
        np.testing.assert_allclose(out.probs, [0.25] * 4)

    def test_zero_epsilon_rejected(self):
        with pytest.raises(ValueError, match="epsilon"):
            distribution_from_counts("d", Counter({"a": 1}), ["a"], epsilon=0.0)

    def test_empty_vocab_rejected(self):
        with pytest.raises(ValueError, match="vocabulary"):
            distribution_from_counts("d", Counter({"a": 1}), [], epsilon=1.0)

    def test_from_corpus(self):
        corpus = parse_conll("The O\nthe O\ndog. O", "d")
        vocab = global_vocabulary([corpus])
        out = build_distribution(corpus, vocab, epsilon=1.0)
        assert out.global_vocab == ("dog", "the")
        np.testing.assert_allclose(out.probs, [2 / 5, 3 / 5])

    def test_strict_positivity(self):
        rng = np.random.default_rng(0)
        counts = Counter({f"w{i}": int(c) for i, c in enumerate(rng.integers(0, 50, size=30))})
        out = distribution_from_counts("d", counts, [f"w{i}" for i in range(40)], epsilon=0.5)
        assert (out.probs > 0).all()
        assert abs(out.probs.sum() - 1.0) < 1e-9


class TestKL:
    def test_identical_is_zero(self):
        p = dist("p", [0.5, 0.3, 0.2])
        q = dist("q", [0.5, 0.3, 0.2])
        assert abs(kl_divergence(p, q)) <= 1e-12

    def test_hand_value_forward(self):
        # 0.5*ln2 + 0.5*ln(2/3)
        p = dist("p", [0.5, 0.5])
        q = dist("q", [0.25, 0.75])
        assert kl_divergence(p, q) == pytest.approx(0.14384, abs=1e-5)

    def test_hand_value_reverse_witnesses_asymmetry(self):
        p = dist("p", [0.25, 0.75])
        q = dist("q", [0.5, 0.5])
        reverse = kl_divergence(p, q)
        assert reverse == pytest.approx(0.13081, abs=1e-5)
        forward = kl_divergence(q, p)
        assert abs(forward - reverse) > 1e-3

    def test_vocab_mismatch_rejected(self):
        p = dist("p", [0.5, 0.5], vocab=["a", "b"])
        q = dist("q", [0.5, 0.5], vocab=["b", "a"])
        with pytest.raises(ValueError, match="mismatch"):
            kl_divergence(p, q)

    def test_non_negative_on_random_smoothed_pairs(self):
        rng = np.random.default_rng(99)
        vocab = [f"w{i}" for i in range(25)]
        for _ in range(1000):
            cp = Counter({w: int(c) for w, c in zip(vocab, rng.integers(0, 40, 25))})
            cq = Counter({w: int(c) for w, c in zip(vocab, rng.integers(0, 40, 25))})
            p = distribution_from_counts("p", cp, vocab, epsilon=1.0)
            q = distribution_from_counts("q", cq, vocab, epsilon=1.0)
            assert kl_divergence(p, q) >= -1e-12

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(5)
        vocab = [f"w{i}" for i in range(12)]
        cp = Counter({w: int(c) for w, c in zip(vocab, rng.integers(0, 9, 12))})
        cq = Counter({w: int(c) for w, c in zip(vocab, rng.integers(0, 9, 12))})
        base = kl_divergence(
            distribution_from_counts("p", cp, vocab, 1.0),
            distribution_from_counts("q", cq, vocab, 1.0),
        )
        perm = list(rng.permutation(vocab))
        permuted = kl_divergence(
            distribution_from_counts("p", cp, perm, 1.0),
            distribution_from_counts("q", cq, perm, 1.0),
        )
        assert permuted == pytest.approx(base, abs=1e-12)

    def test_transfer_direction(self):
        # transfer source -> target is KL(target || source)
        target = dist("t", [0.5, 0.5])
        source = dist("s", [0.25, 0.75])
        assert transfer_distance(target, source) == pytest.approx(0.14384, abs=1e-5)


class TestRegression:
    def test_two_points(self):
        fit = fit_regression([(0.0, 1.0), (1.0, 0.0)])
        assert fit.slope == pytest.approx(-1.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_collinear(self):
        fit = fit_regression([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])
        assert fit.slope == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_symmetric_triple_has_no_trend(self):
        fit = fit_regression([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)])
        assert fit.slope == pytest.approx(0.0)
        assert fit.r_squared == pytest.approx(0.0)

    def test_matches_scipy_on_random_data(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            x = rng.normal(size=12)
            y = 0.7 * x + rng.normal(scale=0.5, size=12)
            fit = fit_regression(list(zip(x, y)))
            ref = stats.linregress(x, y)
            assert fit.slope == pytest.approx(ref.slope, rel=1e-10)
            assert fit.intercept == pytest.approx(ref.intercept, rel=1e-10)
            assert fit.r_squared == pytest.approx(ref.rvalue**2, rel=1e-10)

    def test_too_few_points(self):
        with pytest.raises(DegenerateFitError):
            fit_regression([(1.0, 2.0)])

    def test_constant_x(self):
        with pytest.raises(DegenerateFitError):
            fit_regression([(1.0, 2.0), (1.0, 3.0)])

    def test_constant_y_perfect_fit(self):
        fit = fit_regression([(0.0, 2.0), (1.0, 2.0), (2.0, 2.0)])
        assert fit.slope == pytest.approx(0.0)
        assert fit.r_squared == 1.0


class TestInvariants:
    def test_probs_validated(self):
        with pytest.raises(ValueError):
            dist("bad", [0.5, 0.6])
        with pytest.raises(ValueError):
            dist("bad", [1.0, 0.0])  # zero component violates strict positivity

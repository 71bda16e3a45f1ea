"""Domain vocabulary distributions, KL divergence, and the F1-vs-distance fit.

All domains under comparison share one global vocabulary (the union of their
word counts) so their distributions live on the same probability space.
Additive smoothing keeps every probability strictly positive, which the KL
sum needs to stay finite.  Logs are natural, so divergences are in nats.

Direction convention: KL(P || Q) is the distance for a transfer FROM domain
Q TO domain P (train on Q, evaluate on P).  Helpers here take explicit
(target, source) arguments so the grid axes cannot be flipped silently.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import DomainCorpus, vocabulary
from .errors import DegenerateFitError


@dataclass(frozen=True)
class DomainDistribution:
    """Smoothed word probabilities P(w) for one domain over a shared vocab."""

    domain_id: str
    global_vocab: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (len(self.global_vocab),):
            raise ValueError(
                f"probs length {self.probs.shape} != vocab size {len(self.global_vocab)}"
            )
        if not (self.probs > 0).all():
            raise ValueError("smoothed probabilities must be strictly positive")
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float


def global_vocabulary(corpora: Iterable[DomainCorpus]) -> tuple[str, ...]:
    """Sorted union of the corpora's vocabularies."""
    words: set[str] = set()
    for corpus in corpora:
        words.update(vocabulary(corpus).keys())
    return tuple(sorted(words))


def distribution_from_counts(
    domain_id: str,
    counts: Counter,
    global_vocab: Sequence[str],
    epsilon: float = 1.0,
) -> DomainDistribution:
    """P(w) = (count(w) + eps) / (N + eps*|V|), N = total count over the vocab."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be strictly positive, got {epsilon}")
    if not global_vocab:
        raise ValueError("global vocabulary must be non-empty")
    vocab = tuple(global_vocab)
    raw = np.array([counts.get(w, 0) for w in vocab], dtype=float)
    n = raw.sum()
    probs = (raw + epsilon) / (n + epsilon * len(vocab))
    return DomainDistribution(domain_id=domain_id, global_vocab=vocab, probs=probs)


def build_distribution(
    corpus: DomainCorpus, global_vocab: Sequence[str], epsilon: float = 1.0
) -> DomainDistribution:
    """Smoothed word distribution of one domain over the shared vocabulary."""
    return distribution_from_counts(
        corpus.domain_id, vocabulary(corpus), global_vocab, epsilon
    )


def kl_divergence(p: DomainDistribution, q: DomainDistribution) -> float:
    """KL(P || Q) = sum_w P(w) ln(P(w) / Q(w)), in nats.

    Both distributions must be built over the identical vocabulary (same
    words, same order).  Non-negative for any smoothed pair, zero iff P = Q.
    """
    if p.global_vocab != q.global_vocab:
        raise ValueError(
            f"vocabulary mismatch between {p.domain_id!r} and {q.domain_id!r}"
        )
    return float(np.sum(p.probs * np.log(p.probs / q.probs)))


def transfer_distance(target: DomainDistribution, source: DomainDistribution) -> float:
    """Distance for training on ``source`` and evaluating on ``target``:
    KL(target || source)."""
    return kl_divergence(target, source)


def fit_regression(points: Sequence[tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares of y on x; r_squared is the squared Pearson
    correlation (equivalently 1 - SSE/SST for a simple linear fit).

    When the y values are all equal the residuals are exactly zero and
    r_squared is reported as 1.0 (Pearson is 0/0 there).

    Raises:
        DegenerateFitError: fewer than 2 points, or all x values identical.
    """
    if len(points) < 2:
        raise DegenerateFitError(f"need at least 2 points, got {len(points)}")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    x_mean, y_mean = x.mean(), y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    if sxx == 0.0:
        raise DegenerateFitError("all x values are identical")
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    syy = float(np.sum((y - y_mean) ** 2))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    r_squared = 1.0 if syy == 0.0 else (sxy * sxy) / (sxx * syy)
    return RegressionFit(slope=slope, intercept=intercept, r_squared=r_squared)

"""k-Means and cluster-agreement metrics (adjusted Rand index, V-measure).

Lloyd's algorithm with k-means++ seeding and multiple restarts, kept
hand-rolled so the within-cluster sum of squares can be asserted
non-increasing on every iteration and restart reduction stays deterministic
(best WCSS, ties to the lowest restart index).  Restart ``i`` draws from
``default_rng([seed, i])`` so any single restart is reproducible on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, log
from typing import Sequence

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]
    k: int
    inertia: float = 0.0  # WCSS of the winning run

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if any(i < 0 or i >= self.k for i in self.labels):
            raise ValueError(f"cluster indices must lie in [0, {self.k})")


def _as_matrix(vectors: Sequence) -> np.ndarray:
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"expected uniform vectors, got array of shape {arr.shape}")
    return arr


def _wcss(x: np.ndarray, centers: np.ndarray, assign: np.ndarray) -> float:
    return float(np.sum((x - centers[assign]) ** 2))


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, then D^2-weighted draws."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:  # all remaining points coincide with a chosen center
            centers[j] = x[rng.integers(n)]
        else:
            centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(
    x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int
) -> tuple[np.ndarray, float]:
    """One seeded k-means run; returns (assignments, WCSS)."""
    centers = _kmeans_pp_init(x, k, rng)
    dists = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    assign = np.argmin(dists, axis=1)
    prev_wcss = _wcss(x, centers, assign)
    for _ in range(max_iter):
        for j in range(k):  # empty clusters keep their previous center
            members = x[assign == j]
            if len(members):
                centers[j] = members.mean(axis=0)
        dists = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(dists, axis=1)
        wcss = _wcss(x, centers, new_assign)
        assert wcss <= prev_wcss + 1e-9 * max(1.0, prev_wcss), "WCSS increased"
        if np.array_equal(new_assign, assign):
            return assign, wcss
        assign, prev_wcss = new_assign, wcss
    return assign, prev_wcss


def kmeans(
    vectors: Sequence,
    k: int,
    seed: int,
    restarts: int = 10,
    max_iter: int = 300,
) -> ClusterAssignment:
    """Best-of-``restarts`` k-means clustering.

    Args:
        vectors: points as an (n, dim) array-like; plain scalars are treated
            as 1-D points.
        k: number of clusters, at most the number of points.
        seed: base seed; restart i uses ``default_rng([seed, i])``.
        restarts: independent runs; the one with the lowest WCSS wins and
            ties go to the lowest restart index.
        max_iter: Lloyd iteration cap per run (stops early when assignments
            stabilize).

    Raises:
        ValueError: fewer points than clusters, or non-positive k/restarts.
        ShapeError: points of inconsistent dimension.
    """
    if restarts <= 0:
        raise ValueError(f"restarts must be positive, got {restarts}")
    try:
        x = _as_matrix(vectors)
    except ValueError as exc:  # ragged input makes an object array
        raise ShapeError(f"points have inconsistent dimensions: {exc}") from exc
    if x.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {x.shape[0]}")

    best: tuple[float, int, np.ndarray] | None = None
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        assign, wcss = _lloyd(x, k, rng, max_iter)
        if best is None or wcss < best[0]:
            best = (wcss, i, assign)
    assert best is not None
    return ClusterAssignment(labels=tuple(int(a) for a in best[2]), k=k, inertia=best[0])


def _labels_of(a) -> list:
    return list(a.labels) if isinstance(a, ClusterAssignment) else list(a)


def _contingency(a: list, b: list) -> np.ndarray:
    ua = {v: i for i, v in enumerate(dict.fromkeys(a))}
    ub = {v: i for i, v in enumerate(dict.fromkeys(b))}
    table = np.zeros((len(ua), len(ub)), dtype=np.int64)
    for va, vb in zip(a, b):
        table[ua[va], ub[vb]] += 1
    return table


def adjusted_rand(a, b) -> float:
    """Chance-corrected pair-counting agreement, in [-1, 1].

    ARI = (Index - Expected) / (Max - Expected) over the contingency table.
    When Max == Expected (both partitions trivial, hence identical) the
    score is 1.0 by convention.
    """
    la, lb = _labels_of(a), _labels_of(b)
    if len(la) != len(lb):
        raise ValueError(f"length mismatch: {len(la)} vs {len(lb)}")
    n = len(la)
    table = _contingency(la, lb)
    index = sum(comb(int(nij), 2) for nij in table.flat)
    sum_a = sum(comb(int(ai), 2) for ai in table.sum(axis=1))
    sum_b = sum(comb(int(bj), 2) for bj in table.sum(axis=0))
    pairs = comb(n, 2)
    if pairs == 0:
        return 1.0
    expected = sum_a * sum_b / pairs
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0
    return (index - expected) / (maximum - expected)


def _entropy(sizes: np.ndarray, n: int) -> float:
    ps = sizes[sizes > 0] / n
    return float(-np.sum(ps * np.log(ps)))


def v_measure(truth, pred) -> float:
    """Harmonic mean of homogeneity and completeness, natural-log entropies.

    homogeneity = 1 - H(truth|pred)/H(truth), completeness symmetric; either
    is 1.0 when its reference entropy is zero (single-cluster partition), and
    the measure is 0.0 when homogeneity + completeness is 0.
    """
    lt, lp = _labels_of(truth), _labels_of(pred)
    if len(lt) != len(lp):
        raise ValueError(f"length mismatch: {len(lt)} vs {len(lp)}")
    n = len(lt)
    if n == 0:
        return 1.0
    table = _contingency(lt, lp).astype(float)
    h_truth = _entropy(table.sum(axis=1), n)
    h_pred = _entropy(table.sum(axis=0), n)

    # conditional entropies from the joint counts
    h_truth_given_pred = 0.0
    h_pred_given_truth = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            nij = table[i, j]
            if nij == 0:
                continue
            h_truth_given_pred -= nij / n * log(nij / table[:, j].sum())
            h_pred_given_truth -= nij / n * log(nij / table[i, :].sum())

    homogeneity = 1.0 if h_truth == 0 else 1.0 - h_truth_given_pred / h_truth
    completeness = 1.0 if h_pred == 0 else 1.0 - h_pred_given_truth / h_pred
    if homogeneity + completeness == 0:
        return 0.0
    return 2 * homogeneity * completeness / (homogeneity + completeness)

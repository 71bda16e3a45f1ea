"""Projection head: the trainable part of the tagger.

A single affine map takes a token's contextual features h (dimension D) down
to the word-embedding dimension d.  The projected vector is scored by dot
product against each label vector e_j, plus one learned pseudo-label vector
for "O" (non-entity) that rides along as the last slot.  Softmax of the
scores gives per-label probabilities; the prediction is the argmax.  Because
label vectors enter only through the dot products, any label set can be
swapped in at inference time, including labels never seen in training; that
substitution is the whole point of the architecture.

Training is plain seeded mini-batch gradient descent on mean cross-entropy.
The label vectors stay frozen: only the projection (and the "O" vector) move.
Gradients are written out by hand below so they can be checked against finite
differences.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import LabelEmbedding
from .encoder import TokenFeatures
from .errors import DataError, FormatError, ShapeError, TrainingDivergedError

O_LABEL = "O"


@dataclass
class ProjectionHead:
    """Affine projection (weights, bias) plus the learned "O" vector.

    ``o_embedding is None`` disables the "O" slot entirely: scores then cover
    only the given labels, for corpora where every token is an entity.
    """

    weights: np.ndarray  # (d, D)
    bias: np.ndarray  # (d,)
    o_embedding: np.ndarray | None  # (d,) or None

    def __post_init__(self):
        if self.weights.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {self.weights.shape}")
        d = self.weights.shape[0]
        if self.bias.shape != (d,):
            raise ShapeError(f"bias shape {self.bias.shape} != ({d},)")
        if self.o_embedding is not None and self.o_embedding.shape != (d,):
            raise ShapeError(f"o_embedding shape {self.o_embedding.shape} != ({d},)")
        self.check_finite()

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    def check_finite(self) -> None:
        ok = np.isfinite(self.weights).all() and np.isfinite(self.bias).all()
        if ok and self.o_embedding is not None:
            ok = np.isfinite(self.o_embedding).all()
        if not ok:
            raise ShapeError("head parameters contain NaN or Inf")

    def copy(self) -> "ProjectionHead":
        return ProjectionHead(
            weights=self.weights.copy(),
            bias=self.bias.copy(),
            o_embedding=None if self.o_embedding is None else self.o_embedding.copy(),
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int
    init_scale: float = 0.1

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs <= 0:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size <= 0:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.init_scale <= 0:
            raise ValueError(f"init_scale must be positive, got {self.init_scale}")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax: exponentials of max-subtracted logits."""
    logits = np.asarray(logits, dtype=float)
    if logits.size == 0:
        raise ShapeError("softmax of an empty vector")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def project(head: ProjectionHead, h: np.ndarray) -> np.ndarray:
    """weights @ h + bias, with an explicit shape check."""
    h = np.asarray(h, dtype=float)
    if h.shape != (head.in_dim,):
        raise ShapeError(f"feature vector shape {h.shape} != ({head.in_dim},)")
    return head.weights @ h + head.bias


def _label_matrix(labels: list[LabelEmbedding], head: ProjectionHead) -> np.ndarray:
    """Stack label vectors into (L[+1], d); the "O" vector is the last row."""
    d = head.out_dim
    rows = []
    for le in labels:
        if le.vector.shape != (d,):
            raise ShapeError(
                f"label {le.label!r} vector shape {le.vector.shape} != ({d},)"
            )
        rows.append(le.vector)
    if head.o_embedding is not None:
        rows.append(head.o_embedding)
    return np.vstack(rows) if rows else np.zeros((0, d))


def score(
    projected: np.ndarray, labels: list[LabelEmbedding], head: ProjectionHead
) -> np.ndarray:
    """Raw logits: one dot product per label, "O" slot last when enabled."""
    projected = np.asarray(projected, dtype=float)
    if projected.shape != (head.out_dim,):
        raise ShapeError(f"projected vector shape {projected.shape} != ({head.out_dim},)")
    return _label_matrix(labels, head) @ projected


def predict(h: np.ndarray, labels: list[LabelEmbedding], head: ProjectionHead) -> int:
    """Predicted slot index for one token; ``len(labels)`` means "O".

    Softmax is monotone, so the argmax of the softmax equals the argmax of
    the raw logits; ties break to the lowest index.
    """
    logits = score(project(head, h), labels, head)
    if logits.size == 0:
        raise ShapeError("cannot predict with no labels and no O slot")
    return int(np.argmax(logits))


def predict_features(
    features: TokenFeatures, labels: list[LabelEmbedding], head: ProjectionHead
) -> list[int]:
    """Vectorized :func:`predict` over all tokens of a sentence."""
    if features.dim != head.in_dim:
        raise ShapeError(f"feature dim {features.dim} != head input dim {head.in_dim}")
    projected = features.vectors @ head.weights.T + head.bias  # (K, d)
    logits = projected @ _label_matrix(labels, head).T  # (K, L[+1])
    if logits.shape[1] == 0:
        raise ShapeError("cannot predict with no labels and no O slot")
    return [int(i) for i in np.argmax(logits, axis=1)]


def loss_and_gradient(
    head: ProjectionHead,
    batch_h: np.ndarray,
    batch_y: np.ndarray,
    labels: list[LabelEmbedding],
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over a batch and its analytic gradient.

    ``batch_h`` is (n, D) token features, ``batch_y`` the gold slot indices
    (``len(labels)`` for "O" when the O slot is enabled).

    With p = W h + b, logits z = E p (E stacking label vectors and, last, the
    "O" vector), s = softmax(z) and g = s - onehot(y):

        dL/dp = E^T g        dL/dW = dL/dp h^T      dL/db = dL/dp
        dL/do = g_O * p      (the "O" row of E is the only trainable row)

    averaged over the batch.  Gradient keys: "weights", "bias", "o_embedding".
    """
    batch_h = np.asarray(batch_h, dtype=float)
    batch_y = np.asarray(batch_y, dtype=int)
    if batch_h.ndim != 2 or batch_h.shape[1] != head.in_dim:
        raise ShapeError(f"batch features shape {batch_h.shape} != (n, {head.in_dim})")
    if batch_y.shape != (batch_h.shape[0],):
        raise ShapeError("batch labels must align with batch features")

    emat = _label_matrix(labels, head)  # (S, d)
    n_slots = emat.shape[0]
    if n_slots == 0:
        raise ShapeError("no labels and no O slot: nothing to score")
    if batch_y.size and (batch_y.min() < 0 or batch_y.max() >= n_slots):
        raise DataError(f"gold index outside [0, {n_slots})")

    n = batch_h.shape[0]
    projected = batch_h @ head.weights.T + head.bias  # (n, d)
    probs = softmax(projected @ emat.T)  # (n, S)
    gold_p = probs[np.arange(n), batch_y]
    loss = float(-np.mean(np.log(gold_p)))

    g = probs.copy()
    g[np.arange(n), batch_y] -= 1.0  # (n, S)
    dp = g @ emat  # (n, d)
    grads = {
        "weights": dp.T @ batch_h / n,
        "bias": dp.mean(axis=0),
    }
    if head.o_embedding is not None:
        grads["o_embedding"] = (g[:, -1:] * projected).mean(axis=0)
    return loss, grads


def init_head(
    in_dim: int, out_dim: int, config: TrainConfig, use_o_embedding: bool = True
) -> ProjectionHead:
    """Seeded uniform initialization in [-init_scale, init_scale].

    Draw order is fixed (weights, bias, o_embedding) so a seed pins the head.
    """
    rng = np.random.default_rng(config.seed)
    s = config.init_scale
    weights = rng.uniform(-s, s, size=(out_dim, in_dim))
    bias = rng.uniform(-s, s, size=out_dim)
    o_emb = rng.uniform(-s, s, size=out_dim) if use_o_embedding else None
    return ProjectionHead(weights=weights, bias=bias, o_embedding=o_emb)


@dataclass
class TrainResult:
    head: ProjectionHead
    loss_trace: list[float] = field(default_factory=list)  # full-data loss per epoch


def gold_indices(tags: list[str], label_names: list[str], with_o: bool) -> np.ndarray:
    """Map collapsed gold tags to slot indices; "O" maps to len(label_names).

    Raises:
        DataError: a tag that is neither in the label set nor "O", or an "O"
            tag when the O slot is disabled.
    """
    index = {name: i for i, name in enumerate(label_names)}
    out = np.empty(len(tags), dtype=int)
    for i, tag in enumerate(tags):
        if tag == O_LABEL:
            if not with_o:
                raise DataError('gold tag "O" but the O slot is disabled')
            out[i] = len(label_names)
        elif tag in index:
            out[i] = index[tag]
        else:
            raise DataError(f"gold label {tag!r} not in the training label set")
    return out


def train(
    features: list[tuple[TokenFeatures, list[str]]],
    labels: list[LabelEmbedding],
    config: TrainConfig,
    use_o_embedding: bool = True,
) -> TrainResult:
    """Fit a head by mini-batch gradient descent on mean cross-entropy.

    ``features`` pairs each sentence's token features with its collapsed gold
    tags.  Label vectors are frozen; only weights, bias and the "O" vector are
    updated.  The loss trace holds the full-data mean cross-entropy after
    each epoch.  With no training tokens the initialization is returned
    unchanged and the trace is empty.

    Raises:
        DataError: a gold tag outside ``labels`` + "O", or mismatched lengths.
        TrainingDivergedError: non-finite loss or parameters, naming the epoch.
    """
    label_names = [le.label for le in labels]
    hs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    for tf, tags in features:
        if len(tf) != len(tags):
            raise DataError(
                f"sentence has {len(tf)} feature rows but {len(tags)} gold tags"
            )
        hs.append(tf.vectors)
        ys.append(gold_indices(tags, label_names, with_o=use_o_embedding))

    in_dim = hs[0].shape[1] if hs else (labels[0].vector.shape[0] if labels else 1)
    out_dim = labels[0].vector.shape[0] if labels else 1
    head = init_head(in_dim, out_dim, config, use_o_embedding=use_o_embedding)

    if not hs or sum(len(y) for y in ys) == 0:
        return TrainResult(head=head, loss_trace=[])

    all_h = np.vstack(hs)
    all_y = np.concatenate(ys)
    n = all_h.shape[0]

    shuffle_rng = random.Random(config.seed)
    trace: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = list(range(n))
        shuffle_rng.shuffle(order)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = loss_and_gradient(head, all_h[idx], all_y[idx], labels)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, f"batch loss is {loss}")
            head.weights -= config.learning_rate * grads["weights"]
            head.bias -= config.learning_rate * grads["bias"]
            if head.o_embedding is not None:
                head.o_embedding -= config.learning_rate * grads["o_embedding"]
            try:
                head.check_finite()
            except ShapeError as exc:
                raise TrainingDivergedError(epoch, str(exc)) from exc
        epoch_loss, _ = loss_and_gradient(head, all_h, all_y, labels)
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch, f"epoch loss is {epoch_loss}")
        trace.append(epoch_loss)
    return TrainResult(head=head, loss_trace=trace)


def save_head(head: ProjectionHead, path: str | Path) -> None:
    """Text checkpoint: `d D has_o` header, then weight rows, bias, o vector.

    Floats are written with ``repr`` so reloading is bit-exact and reruns
    with the same seed produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8") as fh:
        has_o = 1 if head.o_embedding is not None else 0
        fh.write(f"{head.out_dim} {head.in_dim} {has_o}\n")
        for row in head.weights:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
        fh.write(" ".join(repr(float(x)) for x in head.bias) + "\n")
        if head.o_embedding is not None:
            fh.write(" ".join(repr(float(x)) for x in head.o_embedding) + "\n")


def load_head(path: str | Path) -> ProjectionHead:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty checkpoint", path=str(path))
    header = lines[0].split()
    if len(header) != 3:
        raise FormatError(f"expected `d D has_o` header, got {lines[0]!r}", line=1, path=str(path))
    try:
        d, in_dim, has_o = int(header[0]), int(header[1]), int(header[2])
    except ValueError as exc:
        raise FormatError(f"non-integer header field in {lines[0]!r}", line=1, path=str(path)) from exc
    expected = 1 + d + 1 + (1 if has_o else 0)
    if len(lines) < expected:
        raise FormatError(
            f"checkpoint truncated: expected {expected} lines, got {len(lines)}",
            path=str(path),
        )

    def parse_row(lineno: int, width: int) -> np.ndarray:
        parts = lines[lineno].split()
        if len(parts) != width:
            raise FormatError(
                f"expected {width} floats, got {len(parts)}", line=lineno + 1, path=str(path)
            )
        return np.array([float(p) for p in parts])

    weights = np.vstack([parse_row(1 + r, in_dim) for r in range(d)]) if d else np.zeros((0, in_dim))
    bias = parse_row(1 + d, d)
    o_emb = parse_row(2 + d, d) if has_o else None
    return ProjectionHead(weights=weights, bias=bias, o_embedding=o_emb)

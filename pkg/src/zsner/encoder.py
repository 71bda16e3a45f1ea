"""Contextual token features.

The desk-scale encoder concatenates the word embeddings of a centered window
around each token, so a token's feature vector carries its local context in a
fixed dimension D = d * (2w + 1).  Out-of-vocabulary words and positions past
the sentence boundary contribute zero vectors.  This is deliberately not a
transformer: it is deterministic and parameter-free, and the trainable
projection downstream is what adapts it.  Report headers always name the
encoder so its numbers cannot be mistaken for results from a pre-trained one.

Features computed elsewhere (e.g. by a large pre-trained model) can be
injected through :func:`load_precomputed_features`.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Sentence
from .embeddings import EmbeddingTable
from .errors import FormatError

MODE_WINDOW = "window-average"
MODE_PRECOMPUTED = "precomputed"


@dataclass(frozen=True)
class EncoderConfig:
    window_radius: int
    feature_dim: int
    mode: str = MODE_WINDOW

    def __post_init__(self):
        if self.window_radius < 0:
            raise ValueError(f"window_radius must be >= 0, got {self.window_radius}")
        if self.feature_dim <= 0:
            raise ValueError(f"feature_dim must be positive, got {self.feature_dim}")
        if self.mode not in (MODE_WINDOW, MODE_PRECOMPUTED):
            raise ValueError(f"unknown encoder mode {self.mode!r}")


def window_config(embedding_dim: int, window_radius: int) -> EncoderConfig:
    """Window-mode config with the implied feature dimension d*(2w+1)."""
    return EncoderConfig(
        window_radius=window_radius,
        feature_dim=embedding_dim * (2 * window_radius + 1),
        mode=MODE_WINDOW,
    )


@dataclass(frozen=True)
class TokenFeatures:
    """Per-token feature vectors for one sentence, shape (K, D)."""

    vectors: np.ndarray

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise ValueError(f"expected a (K, D) array, got shape {self.vectors.shape}")

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def encode(sentence: Sentence, table: EmbeddingTable, config: EncoderConfig) -> TokenFeatures:
    """Feature for token i = concatenation of embeddings of tokens i-w .. i+w.

    Lookups use the lowercased surface form; absent words and out-of-range
    positions contribute zeros.  Output row length is always
    ``table.dimension * (2 * config.window_radius + 1)`` and must equal
    ``config.feature_dim``.
    """
    if config.mode != MODE_WINDOW:
        raise ValueError(f"encode requires mode {MODE_WINDOW!r}, got {config.mode!r}")
    d = table.dimension
    w = config.window_radius
    k = len(sentence)
    expected = d * (2 * w + 1)
    if config.feature_dim != expected:
        raise ValueError(
            f"feature_dim {config.feature_dim} != embedding_dim*(2w+1) = {expected}"
        )

    base = np.zeros((k, d))
    for i, token in enumerate(sentence.tokens):
        vec = table.lookup(token.surface)
        if vec is not None:
            base[i] = vec
    padded = np.vstack([np.zeros((w, d)), base, np.zeros((w, d))])
    features = np.hstack([padded[off : off + k] for off in range(2 * w + 1)])
    assert features.shape == (k, expected)
    return TokenFeatures(vectors=features)


def load_precomputed_features(path: str | Path) -> dict[str, TokenFeatures]:
    """Read externally computed features from line-oriented text.

    Each record is a ``sentence_id K D`` header line followed by K lines of
    D floats.  Blank lines between records are allowed.

    Raises:
        FormatError: malformed header, non-numeric value, a row whose length
            differs from D, a truncated record, or a duplicate sentence id.
    """
    path = Path(path)
    result: dict[str, TokenFeatures] = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        header = lines[i].split()
        if len(header) != 3:
            raise FormatError(
                f"expected `sentence_id K D` header, got {lines[i]!r}",
                line=i + 1, path=str(path),
            )
        sent_id = header[0]
        try:
            k, d = int(header[1]), int(header[2])
        except ValueError as exc:
            raise FormatError(
                f"non-integer K or D in header {lines[i]!r}", line=i + 1, path=str(path)
            ) from exc
        if k < 0 or d <= 0:
            raise FormatError(
                f"K must be >= 0 and D positive, got K={k} D={d}", line=i + 1, path=str(path)
            )
        if sent_id in result:
            raise FormatError(
                f"duplicate sentence id {sent_id!r}", line=i + 1, path=str(path)
            )
        rows = np.zeros((k, d))
        for r in range(k):
            row_line = i + 1 + r
            if row_line >= len(lines):
                raise FormatError(
                    f"record {sent_id!r} truncated: expected {k} feature rows",
                    line=len(lines), path=str(path),
                )
            parts = lines[row_line].split()
            if len(parts) != d:
                raise FormatError(
                    f"expected {d} floats, got {len(parts)}",
                    line=row_line + 1, path=str(path),
                )
            try:
                rows[r] = [float(v) for v in parts]
            except ValueError as exc:
                raise FormatError(
                    f"non-numeric feature value ({exc})", line=row_line + 1, path=str(path)
                ) from exc
        result[sent_id] = TokenFeatures(vectors=rows)
        i += 1 + k
    return result


def save_precomputed_features(features: dict[str, TokenFeatures], path: str | Path) -> None:
    """Inverse of :func:`load_precomputed_features`."""
    with open(path, "w", encoding="utf-8") as fh:
        for sent_id, tf in features.items():
            k, d = tf.vectors.shape
            fh.write(f"{sent_id} {k} {d}\n")
            for row in tf.vectors:
                fh.write(" ".join(repr(float(x)) for x in row) + "\n")

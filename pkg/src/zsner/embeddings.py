"""Word-embedding ingestion and label-name vectors.

An :class:`EmbeddingTable` is a read-only map from lowercase word to a dense
float vector of fixed dimension.  Label vectors are built from the words in a
label's name: ``"natural science"`` becomes the mean of the vectors for
``natural`` and ``science``.  Those label vectors are what tokens are scored
against at inference time, so a label never has to be seen during training.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError, MissingEmbeddingError

_LABEL_SPLIT = re.compile(r"[ \-_]+")


class EmbeddingTable:
    """Immutable word -> vector map with a fixed dimension.

    Lookup of an absent word returns ``None`` so callers can tell "unknown
    word" apart from a genuine zero vector.
    """

    def __init__(self, dimension: int, entries: dict[str, np.ndarray], source: str = ""):
        if dimension <= 0:
            raise ValueError(f"dimension must be positive, got {dimension}")
        for word, vec in entries.items():
            if vec.shape != (dimension,):
                raise ValueError(
                    f"vector for {word!r} has shape {vec.shape}, expected ({dimension},)"
                )
        self._dim = dimension
        self._entries = {w: np.asarray(v, dtype=float) for w, v in entries.items()}
        self.source = source  # file identity, carried into report headers

    @property
    def dimension(self) -> int:
        return self._dim

    def lookup(self, word: str) -> np.ndarray | None:
        """Vector for ``word`` (matched lowercase), or None if absent."""
        return self._entries.get(word.lower())

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def words(self) -> Iterable[str]:
        return self._entries.keys()


@dataclass(frozen=True)
class LabelEmbedding:
    """A label name and its semantic vector (same dimension as the table)."""

    label: str
    vector: np.ndarray


def load_embeddings(path: str | Path, vocab_filter: set[str] | None = None) -> EmbeddingTable:
    """Parse a text embedding file into an :class:`EmbeddingTable`.

    Expected format is one ``word v1 v2 ... vd`` record per line, whitespace
    separated (GloVe / word2vec text / Numberbatch style).  A leading header
    line of exactly two integers (``count dim``) is skipped.  The dimension is
    inferred from the first vector line.  Words are lowercased; when two lines
    collide after lowercasing the first one wins (GloVe orders words by
    frequency, so the first is the common casing).

    Args:
        path: embedding file location.
        vocab_filter: if given, only words in this set (lowercased) are kept.

    Raises:
        OSError: unreadable file.
        FormatError: non-numeric component or a vector whose length differs
            from the inferred dimension, reported with its line number.
    """
    path = Path(path)
    if vocab_filter is not None:
        vocab_filter = {w.lower() for w in vocab_filter}

    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split()
            if dim is None and len(parts) == 2 and _is_int(parts[0]) and _is_int(parts[1]):
                continue  # `count dim` header
            word = parts[0].lower()
            values = parts[1:]
            if not values:
                raise FormatError("no vector components", line=lineno, path=str(path))
            try:
                vec = np.array([float(v) for v in values], dtype=float)
            except ValueError as exc:
                raise FormatError(
                    f"non-numeric vector component ({exc})", line=lineno, path=str(path)
                ) from exc
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise FormatError(
                    f"vector has {len(vec)} components, expected {dim}",
                    line=lineno,
                    path=str(path),
                )
            if vocab_filter is not None and word not in vocab_filter:
                continue
            if word not in entries:
                entries[word] = vec
    if dim is None:
        raise FormatError("file contains no vector lines", path=str(path))
    return EmbeddingTable(dim, entries, source=path.name)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write a table back to the text format (round-trips with load_embeddings).

    Floats are written with ``repr``, which is the shortest decimal string
    that reparses to the identical float64.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for word in table.words():
            vec = table.lookup(word)
            assert vec is not None
            fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def split_label_words(label_name: str) -> list[str]:
    """Component words of a label name: lowercased, split on space/hyphen/underscore."""
    return [w for w in _LABEL_SPLIT.split(label_name.lower()) if w]


def embed_label(
    label_name: str, table: EmbeddingTable, normalize: bool = False
) -> LabelEmbedding:
    """Build a label vector as the mean of its component-word vectors.

    Component words absent from the table are skipped; the mean is taken over
    the words that were found.  With ``normalize=True`` the result is scaled
    to unit L2 norm (off by default: scoring uses raw dot products).

    Raises:
        ValueError: empty label name.
        MissingEmbeddingError: none of the component words is in the table.
    """
    if not label_name:
        raise ValueError("label name must be non-empty")
    words = split_label_words(label_name)
    found = [table.lookup(w) for w in words]
    vectors = [v for v in found if v is not None]
    if not vectors:
        raise MissingEmbeddingError(label_name, words)
    vec = np.mean(vectors, axis=0)
    if normalize:
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            vec = vec / norm
    return LabelEmbedding(label=label_name, vector=vec)


def embed_label_set(
    labels: list[str], table: EmbeddingTable, normalize: bool = False
) -> list[LabelEmbedding]:
    """Embed an ordered label set, preserving order.

    Raises:
        ValueError: empty or duplicate label list.
        MissingEmbeddingError: aggregated over every label that has no
            embeddable component word.
    """
    if not labels:
        raise ValueError("label set must be non-empty")
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise ValueError(f"duplicate labels in label set: {', '.join(dupes)}")
    result: list[LabelEmbedding] = []
    failed: list[str] = []
    missing_words: list[str] = []
    for label in labels:
        try:
            result.append(embed_label(label, table, normalize=normalize))
        except MissingEmbeddingError as exc:
            failed.append(label)
            missing_words.extend(exc.missing)
    if failed:
        raise MissingEmbeddingError(", ".join(failed), missing_words)
    return result

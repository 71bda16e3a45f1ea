"""BIO-tagged corpora: parsing, label sets, vocabulary counts, few-shot sampling.

The on-disk format is CoNLL-like two-column text: one ``surface tag`` pair per
line, blank line between sentences.  Tags are BIO (``B-person``, ``I-person``,
``O``).  For classification and scoring the BIO prefix is collapsed so each
token carries a single entity type; the original tags are kept on the tokens.
"""

from __future__ import annotations

import logging
import random
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import FormatError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Token:
    surface: str
    gold_tag: str  # "O" or "B-<type>" / "I-<type>"


@dataclass(frozen=True)
class Sentence:
    """A non-empty token sequence.

    ``origin`` records which domain the sentence was parsed from, so
    experiment code can assert that zero-shot training never saw
    target-domain text.
    """

    tokens: tuple[Token, ...]
    origin: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def gold_tags(self) -> list[str]:
        return [t.gold_tag for t in self.tokens]


@dataclass(frozen=True)
class DomainCorpus:
    """Sentences of one domain plus its label set.

    ``label_set`` is always exactly the sorted set of entity types occurring
    in the sentences (BIO prefixes collapsed, "O" excluded); it is recomputed
    by :func:`make_corpus`, never trusted from the caller.  ``meta`` carries
    bookkeeping such as few-shot under-supply and does not participate in
    equality.
    """

    domain_id: str
    sentences: tuple[Sentence, ...]
    label_set: tuple[str, ...]
    meta: dict[str, Any] = field(default_factory=dict, compare=False)


def make_corpus(
    domain_id: str, sentences: tuple[Sentence, ...], meta: dict[str, Any] | None = None
) -> DomainCorpus:
    """Construct a corpus, computing the label set from the sentences."""
    types = {collapse_bio(t.gold_tag) for s in sentences for t in s.tokens}
    types.discard("O")
    return DomainCorpus(
        domain_id=domain_id,
        sentences=sentences,
        label_set=tuple(sorted(types)),
        meta=meta or {},
    )


def _validate_tag(tag: str, lineno: int | None = None) -> None:
    if tag == "O":
        return
    if (tag.startswith("B-") or tag.startswith("I-")) and len(tag) > 2:
        return
    raise FormatError(f"malformed BIO tag {tag!r}", line=lineno)


def collapse_bio(tag: str) -> str:
    """Strip the BIO prefix: ``B-X`` and ``I-X`` become ``X``; ``O`` stays ``O``.

    Idempotent: already-collapsed type names pass through unchanged.
    """
    if tag.startswith(("B-", "I-")):
        return tag[2:]
    return tag


def parse_conll(text: str, domain_id: str, strict: bool = False) -> DomainCorpus:
    """Parse two-column CoNLL-like text into a :class:`DomainCorpus`.

    An ``I-X`` that does not continue a ``B-X``/``I-X`` on the previous token
    is repaired to ``B-X`` with a warning (such lines are common in real
    corpora); ``strict=True`` turns the repair into a FormatError.

    Raises:
        FormatError: a non-blank line without exactly two whitespace-separated
            fields, or a malformed tag, reported with its line number.
    """
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    prev_type: str | None = None  # entity type continued by an I- tag, else None

    def flush() -> None:
        nonlocal tokens, prev_type
        if tokens:
            sentences.append(Sentence(tokens=tuple(tokens), origin=domain_id))
        tokens = []
        prev_type = None

    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            flush()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(
                f"expected `surface tag`, got {len(parts)} fields: {line!r}", line=lineno
            )
        surface, tag = parts
        _validate_tag(tag, lineno)
        if tag.startswith("I-"):
            ent = tag[2:]
            if prev_type != ent:
                if strict:
                    raise FormatError(
                        f"I-{ent} without a preceding B-{ent}/I-{ent}", line=lineno
                    )
                log.warning(
                    "%s: line %d: repairing dangling I-%s to B-%s", domain_id, lineno, ent, ent
                )
                tag = "B-" + ent
            prev_type = ent
        elif tag.startswith("B-"):
            prev_type = tag[2:]
        else:
            prev_type = None
        tokens.append(Token(surface=surface, gold_tag=tag))
    flush()
    return make_corpus(domain_id, tuple(sentences))


def read_conll(path: str | Path, domain_id: str, strict: bool = False) -> DomainCorpus:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_conll(text, domain_id, strict=strict)
    except FormatError as exc:
        raise FormatError(str(exc), path=str(path)) from exc


def serialize_conll(corpus: DomainCorpus) -> str:
    """Inverse of :func:`parse_conll` for well-formed corpora."""
    blocks = [
        "\n".join(f"{t.surface} {t.gold_tag}" for t in sent.tokens)
        for sent in corpus.sentences
    ]
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def sample_few_shot(corpus: DomainCorpus, n: int, seed: int) -> DomainCorpus:
    """Draw up to ``n`` sentences per label, uniformly without replacement.

    For each label in the corpus a sentence counts as an example if it
    contains at least one token of that label.  Selections are unioned and
    deduplicated; the result keeps the original sentence order.  Labels with
    fewer than ``n`` candidate sentences contribute everything they have and
    are recorded in ``result.meta["undersupplied"]`` as label -> available.

    Identical (corpus, n, seed) always select identical sentences.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return make_corpus(corpus.domain_id, (), meta={"few_shot_n": 0})

    by_label: dict[str, list[int]] = {label: [] for label in corpus.label_set}
    for idx, sent in enumerate(corpus.sentences):
        present = {collapse_bio(t.gold_tag) for t in sent.tokens} - {"O"}
        for label in present:
            by_label[label].append(idx)

    rng = random.Random(seed)
    chosen: set[int] = set()
    undersupplied: dict[str, int] = {}
    for label in corpus.label_set:  # sorted order keeps the draw deterministic
        candidates = by_label[label]
        if len(candidates) < n:
            undersupplied[label] = len(candidates)
            log.warning(
                "few-shot under-supply for %r: requested %d, only %d sentences",
                label, n, len(candidates),
            )
        take = min(n, len(candidates))
        chosen.update(rng.sample(candidates, take))

    picked = tuple(corpus.sentences[i] for i in sorted(chosen))
    meta: dict[str, Any] = {"few_shot_n": n}
    if undersupplied:
        meta["undersupplied"] = undersupplied
    return make_corpus(corpus.domain_id, picked, meta=meta)


def _strip_punct(word: str) -> str:
    start, end = 0, len(word)
    while start < end and unicodedata.category(word[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(word[end - 1]).startswith("P"):
        end -= 1
    return word[start:end]


def vocabulary(corpus: DomainCorpus) -> Counter:
    """Word counts over the corpus: lowercased, leading/trailing punctuation
    stripped, internal punctuation kept (``"U.S."`` counts as ``"u.s"``).
    Tokens that are pure punctuation are dropped.
    """
    counts: Counter = Counter()
    for sent in corpus.sentences:
        for token in sent.tokens:
            word = _strip_punct(token.surface.lower())
            if word:
                counts[word] += 1
    return counts

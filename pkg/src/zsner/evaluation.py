"""Token-level macro-F1 scoring and the experiment protocols.

Three protocols share one train/evaluate cell:

* zero-shot grid: train a head on each source domain, evaluate it on every
  target domain's test split scored against the *target's* label vectors, so
  off-diagonal cells exercise labels the head never trained on;
* few-shot curve: add n sampled target-domain sentences per label to the
  source training data and re-run the same cell (n=0 reduces to the zero-shot
  cell bit for bit);
* in-domain: source equals target (the grid diagonal).

F1 is token-level over collapsed entity types, "O" excluded from the macro.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

import numpy as np

from .corpus import DomainCorpus, Sentence, collapse_bio, make_corpus, sample_few_shot
from .embeddings import EmbeddingTable, LabelEmbedding, embed_label_set
from .encoder import EncoderConfig, encode
from .errors import DataError, TaggerError
from .head import (
    O_LABEL,
    ProjectionHead,
    TrainConfig,
    predict_features,
    train,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelScore:
    precision: float
    recall: float
    f1: float
    support: int  # gold token count


@dataclass(frozen=True)
class EvalReport:
    per_label: dict[str, LabelScore]
    macro_f1: float
    config_fingerprint: str = ""
    excluded: tuple[str, ...] = ()  # labels absent from both pred and gold


@dataclass(frozen=True)
class GridResult:
    """Zero-shot score matrix: rows are source (train) domains, columns are
    target (test) domains."""

    domains: tuple[str, ...]
    scores: np.ndarray
    off_diagonal_mean: float
    config_fingerprint: str = ""


def macro_f1(
    pred: list[str],
    gold: list[str],
    label_set: list[str] | tuple[str, ...],
    config_fingerprint: str = "",
) -> EvalReport:
    """Token-level macro F1 over collapsed entity types.

    Per label: precision tp/(tp+fp), recall tp/(tp+fn), both 0 on an empty
    denominator, f1 their harmonic mean (0 when p+r = 0).  The macro average
    runs over ``label_set`` except labels that occur in neither ``pred`` nor
    ``gold``; those are excluded (and logged) rather than dragged in as
    zeros.  "O" never enters the macro.

    Raises:
        ValueError: pred/gold length mismatch.
    """
    if len(pred) != len(gold):
        raise ValueError(f"pred has {len(pred)} tokens, gold has {len(gold)}")
    per_label: dict[str, LabelScore] = {}
    f1s: list[float] = []
    excluded: list[str] = []
    for label in label_set:
        if label == O_LABEL:
            continue
        tp = sum(1 for p, g in zip(pred, gold) if p == label and g == label)
        fp = sum(1 for p, g in zip(pred, gold) if p == label and g != label)
        fn = sum(1 for p, g in zip(pred, gold) if p != label and g == label)
        support = tp + fn
        if support == 0 and fp == 0:
            excluded.append(label)
            continue
        precision = tp / (tp + fp) if (tp + fp) else 0.0
        recall = tp / (tp + fn) if (tp + fn) else 0.0
        f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
        per_label[label] = LabelScore(precision=precision, recall=recall, f1=f1, support=support)
        f1s.append(f1)
    if excluded:
        log.info("macro F1: excluding labels absent from pred and gold: %s", excluded)
    macro = float(np.mean(f1s)) if f1s else 0.0
    return EvalReport(
        per_label=per_label,
        macro_f1=macro,
        config_fingerprint=config_fingerprint,
        excluded=tuple(excluded),
    )


@dataclass(frozen=True)
class DomainSplit:
    domain_id: str
    train: DomainCorpus
    test: DomainCorpus

    @property
    def label_set(self) -> tuple[str, ...]:
        """The domain's labels: union over the train and test splits."""
        return tuple(sorted(set(self.train.label_set) | set(self.test.label_set)))


def split_corpus(corpus: DomainCorpus, train_fraction: float = 0.8, seed: int = 0) -> DomainSplit:
    """Seeded sentence-level split for corpora that ship as a single file."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    indices = list(range(len(corpus.sentences)))
    random.Random(seed).shuffle(indices)
    cut = int(len(indices) * train_fraction)
    train_sents = tuple(corpus.sentences[i] for i in sorted(indices[:cut]))
    test_sents = tuple(corpus.sentences[i] for i in sorted(indices[cut:]))
    return DomainSplit(
        domain_id=corpus.domain_id,
        train=make_corpus(corpus.domain_id, train_sents),
        test=make_corpus(corpus.domain_id, test_sents),
    )


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one train/evaluate cell needs besides the corpora."""

    table: EmbeddingTable
    encoder: EncoderConfig
    train: TrainConfig
    use_o_embedding: bool = True
    normalize_labels: bool = False
    fingerprint: str = ""


def _training_pairs(sentences: tuple[Sentence, ...], cfg: PipelineConfig):
    return [
        (encode(s, cfg.table, cfg.encoder), [collapse_bio(t.gold_tag) for t in s.tokens])
        for s in sentences
    ]


def train_head_on(
    sentences: tuple[Sentence, ...],
    label_set: tuple[str, ...] | list[str],
    cfg: PipelineConfig,
) -> tuple[ProjectionHead, list[float], list[LabelEmbedding]]:
    """Encode sentences, embed the label set, and fit a head.

    Returns (head, per-epoch loss trace, the label embeddings trained
    against).
    """
    label_embs = embed_label_set(list(label_set), cfg.table, normalize=cfg.normalize_labels) if label_set else []
    result = train(
        _training_pairs(sentences, cfg),
        label_embs,
        cfg.train,
        use_o_embedding=cfg.use_o_embedding,
    )
    return result.head, result.loss_trace, label_embs


def evaluate_head(
    head: ProjectionHead,
    test: DomainCorpus,
    cfg: PipelineConfig,
    label_set: tuple[str, ...] | None = None,
) -> EvalReport:
    """Tag the test corpus against its own label vectors and score it.

    ``label_set`` defaults to the test corpus's label set; passing a list of
    labels the head never saw in training is the zero-shot path.
    """
    labels = list(label_set if label_set is not None else test.label_set)
    if not test.sentences:
        raise ValueError(f"test corpus {test.domain_id!r} is empty")
    label_embs = embed_label_set(labels, cfg.table, normalize=cfg.normalize_labels) if labels else []
    slot_names = labels + [O_LABEL]  # predict() uses len(labels) for "O"
    pred: list[str] = []
    gold: list[str] = []
    for sentence in test.sentences:
        features = encode(sentence, cfg.table, cfg.encoder)
        pred.extend(slot_names[slot] for slot in predict_features(features, label_embs, head))
        gold.extend(collapse_bio(t.gold_tag) for t in sentence.tokens)
    return macro_f1(pred, gold, labels, config_fingerprint=cfg.fingerprint)


def run_in_domain(split: DomainSplit, cfg: PipelineConfig) -> EvalReport:
    """Train and evaluate on the same domain (a grid diagonal cell)."""
    head, _, _ = train_head_on(split.train.sentences, split.train.label_set, cfg)
    return evaluate_head(head, split.test, cfg, label_set=split.label_set)


def run_zero_shot_grid(splits: list[DomainSplit], cfg: PipelineConfig) -> GridResult:
    """Score every (source, target) pair; off-diagonal cells are zero-shot.

    One head is trained per source on its train split with its own label
    vectors; each target is scored with the target's label vectors.  Training
    data provenance is asserted so no target sentence can leak into training.
    """
    if len(splits) < 2:
        raise ValueError(f"grid needs at least 2 domains, got {len(splits)}")
    n = len(splits)
    scores = np.zeros((n, n))
    for i, source in enumerate(splits):
        for sentence in source.train.sentences:
            if sentence.origin != source.domain_id:
                raise DataError(
                    f"training sentence from {sentence.origin!r} leaked into "
                    f"source domain {source.domain_id!r}"
                )
        try:
            head, _, _ = train_head_on(source.train.sentences, source.train.label_set, cfg)
        except TaggerError as exc:
            raise DataError(f"source {source.domain_id!r}: {exc}") from exc
        for j, target in enumerate(splits):
            try:
                scores[i, j] = evaluate_head(
                    head, target.test, cfg, label_set=target.label_set
                ).macro_f1
            except TaggerError as exc:
                raise DataError(
                    f"cell ({source.domain_id!r}, {target.domain_id!r}): {exc}"
                ) from exc
    off_diag = scores[~np.eye(n, dtype=bool)]
    return GridResult(
        domains=tuple(s.domain_id for s in splits),
        scores=scores,
        off_diagonal_mean=float(off_diag.mean()),
        config_fingerprint=cfg.fingerprint,
    )


def run_few_shot(
    source: DomainSplit,
    target: DomainSplit,
    n_values: list[int],
    seed: int,
    cfg: PipelineConfig,
) -> list[tuple[int, float]]:
    """Macro F1 on the target test split after adding n target sentences per
    label to the source training data, for each n.

    The training label set is the source label set joined with the labels
    occurring in the sampled sentences, so n=0 trains on exactly the source
    configuration and reproduces the zero-shot grid cell.  ``seed`` drives
    the sampling; the training seed comes from ``cfg.train``.
    """
    if not n_values:
        raise ValueError("n_values must be non-empty")
    results: list[tuple[int, float]] = []
    for n in n_values:
        sample = sample_few_shot(target.train, n, seed)
        if sample.meta.get("undersupplied"):
            log.warning(
                "few-shot n=%d on %r under-supplied: %s",
                n, target.domain_id, sample.meta["undersupplied"],
            )
        sentences = source.train.sentences + sample.sentences
        label_set = tuple(sorted(set(source.train.label_set) | set(sample.label_set)))
        head, _, _ = train_head_on(sentences, label_set, cfg)
        report = evaluate_head(head, target.test, cfg, label_set=target.label_set)
        results.append((n, report.macro_f1))
    return results

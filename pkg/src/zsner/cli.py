"""Command-line entry point.

Subcommands: ``train``, ``grid``, ``fewshot``, ``domain-distance``,
``cluster``.  Each reads the YAML experiment config (``--config``), writes
CSV reports into the output directory, and exits 0 on success, 1 on a
validation problem (bad flag, bad config, missing file), 2 on a runtime
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import reports
from .clustering import ClusterAssignment, adjusted_rand, kmeans, v_measure
from .config import ExperimentConfig, load_config
from .corpus import DomainCorpus, read_conll, vocabulary
from .embeddings import EmbeddingTable, load_embeddings, split_label_words
from .encoder import window_config
from .errors import ConfigError, TaggerError
from .evaluation import (
    DomainSplit,
    PipelineConfig,
    run_few_shot,
    run_zero_shot_grid,
    split_corpus,
    train_head_on,
)
from .head import TrainConfig, save_head
from .similarity import (
    build_distribution,
    fit_regression,
    global_vocabulary,
    transfer_distance,
)

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (validation) instead of 2 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}")


def _load_corpora(cfg: ExperimentConfig) -> dict[str, DomainSplit]:
    splits: dict[str, DomainSplit] = {}
    for domain, paths in cfg.corpora.items():
        if paths.single is not None:
            corpus = read_conll(paths.single, domain)
            splits[domain] = split_corpus(corpus, cfg.split_fraction, cfg.split_seed)
        else:
            splits[domain] = DomainSplit(
                domain_id=domain,
                train=read_conll(paths.train, domain),
                test=read_conll(paths.test, domain),
            )
    return splits


def _corpus_vocab(splits: dict[str, DomainSplit]) -> set[str]:
    words: set[str] = set()
    for split in splits.values():
        for corpus in (split.train, split.test):
            for sentence in corpus.sentences:
                words.update(t.surface.lower() for t in sentence.tokens)
            for label in corpus.label_set:
                words.update(split_label_words(label))
    return words


def _load_table(cfg: ExperimentConfig, vocab: set[str]) -> EmbeddingTable:
    if cfg.embedding_path is None:
        raise ConfigError("embeddings.path", "required for this command")
    return load_embeddings(cfg.embedding_path, vocab_filter=vocab)


def _pipeline(cfg: ExperimentConfig, table: EmbeddingTable, train_cfg: TrainConfig | None = None) -> PipelineConfig:
    enc = window_config(table.dimension, cfg.window_radius)
    return PipelineConfig(
        table=table,
        encoder=enc,
        train=train_cfg or cfg.train,
        use_o_embedding=cfg.use_o_embedding,
        normalize_labels=cfg.normalize_labels,
        fingerprint=cfg.fingerprint,
    )


def _encoder_header(cfg: ExperimentConfig, table: EmbeddingTable) -> str:
    d = table.dimension
    w = cfg.window_radius
    return (
        f"encoder=window-average radius={w} feature_dim={d * (2 * w + 1)} "
        f"embeddings={table.source} dim={d}"
    )


def cmd_train(cfg: ExperimentConfig, domain: str | None) -> None:
    splits = _load_corpora(cfg)
    if not splits:
        raise ConfigError("corpora", "no domains configured")
    if domain is None:
        if len(splits) != 1:
            raise ConfigError(
                "corpora", f"{len(splits)} domains configured; pick one with --domain"
            )
        domain = next(iter(splits))
    if domain not in splits:
        raise ConfigError("corpora", f"unknown domain {domain!r}")
    split = splits[domain]
    table = _load_table(cfg, _corpus_vocab({domain: split}))
    pipeline = _pipeline(cfg, table)
    head, trace, _ = train_head_on(split.train.sentences, split.train.label_set, pipeline)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    ckpt = cfg.out_dir / f"head_{domain}.txt"
    save_head(head, ckpt)
    reports.write_loss_csv(
        cfg.out_dir / f"loss_{domain}.csv", trace, cfg.fingerprint,
        _encoder_header(cfg, table), f"domain={domain}",
    )
    print(f"wrote {ckpt} and {cfg.out_dir / f'loss_{domain}.csv'}")


def cmd_grid(cfg: ExperimentConfig) -> None:
    splits = _load_corpora(cfg)
    if len(splits) < 2:
        raise ConfigError("corpora", f"grid needs at least 2 domains, got {len(splits)}")
    table = _load_table(cfg, _corpus_vocab(splits))
    pipeline = _pipeline(cfg, table)
    ordered = [splits[d] for d in sorted(splits)]
    grid = run_zero_shot_grid(ordered, pipeline)
    out = cfg.out_dir / "grid.csv"
    reports.write_grid_csv(out, grid, _encoder_header(cfg, table))
    print(f"wrote {out} (off-diagonal mean {grid.off_diagonal_mean:.4f})")


def cmd_fewshot(cfg: ExperimentConfig, source: str, target: str, n_values: list[int]) -> None:
    if not n_values:
        raise ConfigError("n", "at least one n value required")
    if any(n < 0 for n in n_values):
        raise ConfigError("n", "n values must be non-negative")
    splits = _load_corpora(cfg)
    for name in (source, target):
        if name not in splits:
            raise ConfigError("corpora", f"unknown domain {name!r}")
    table = _load_table(cfg, _corpus_vocab(splits))

    # average the curve over the configured seeds (one seed is the common case)
    curves: list[list[tuple[int, float]]] = []
    for seed in cfg.train_seeds:
        train_cfg = TrainConfig(
            learning_rate=cfg.train.learning_rate,
            epochs=cfg.train.epochs,
            batch_size=cfg.train.batch_size,
            seed=seed,
            init_scale=cfg.train.init_scale,
        )
        pipeline = _pipeline(cfg, table, train_cfg)
        curves.append(run_few_shot(splits[source], splits[target], n_values, seed, pipeline))
    rows = [
        (n_values[i], float(np.mean([curve[i][1] for curve in curves])))
        for i in range(len(n_values))
    ]
    out = cfg.out_dir / f"fewshot_{source}_{target}.csv"
    reports.write_fewshot_csv(
        out, rows, cfg.fingerprint,
        _encoder_header(cfg, table),
        f"source={source} target={target} seeds={','.join(str(s) for s in cfg.train_seeds)}",
    )
    print(f"wrote {out}")


def cmd_domain_distance(cfg: ExperimentConfig, scores_csv: Path | None) -> None:
    splits = _load_corpora(cfg)
    if len(splits) < 2:
        raise ConfigError("corpora", f"distances need at least 2 domains, got {len(splits)}")
    # distances describe the full domain text, train and test together
    corpora = {
        d: DomainCorpus(
            domain_id=d,
            sentences=s.train.sentences + s.test.sentences,
            label_set=s.label_set,
        )
        for d, s in splits.items()
    }
    vocab = global_vocabulary(corpora.values())
    dists = {d: build_distribution(c, vocab, cfg.epsilon) for d, c in corpora.items()}
    names = sorted(corpora)
    rows = []
    for source in names:
        for target in names:
            if source == target:
                continue
            # transfer source -> target is scored as KL(target || source)
            rows.append((source, target, transfer_distance(dists[target], dists[source])))
    out = cfg.out_dir / "domain_distance.csv"
    reports.write_distance_csv(
        out, rows, cfg.fingerprint, f"epsilon={cfg.epsilon} vocab_size={len(vocab)} log=nats"
    )
    print(f"wrote {out}")

    if scores_csv is not None:
        _, cells = reports.read_grid_csv(scores_csv)
        points = []
        for source, target, kl in rows:
            if (source, target) in cells:
                points.append((kl, cells[(source, target)]))
        if len(points) < 2:
            raise ConfigError("scores", "grid CSV shares fewer than 2 domain pairs with the config")
        fit = fit_regression(points)
        reg_out = cfg.out_dir / "distance_regression.csv"
        reports.write_regression_csv(
            reg_out, fit, cfg.fingerprint, f"points={len(points)} x=kl_nats y=macro_f1"
        )
        print(f"wrote {reg_out} (slope {fit.slope:.4f}, R2 {fit.r_squared:.4f})")


def _read_wordlist(path: Path) -> list[tuple[str, str]]:
    """Lines of `word domain`; duplicates are a validation error."""
    entries: list[tuple[str, str]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError("wordlist", f"line {lineno}: expected `word domain`, got {line!r}")
        word, domain = parts[0].lower(), parts[1]
        if word in seen:
            raise ConfigError("wordlist", f"line {lineno}: duplicate word {word!r}")
        seen.add(word)
        entries.append((word, domain))
    if not entries:
        raise ConfigError("wordlist", "no entries")
    return entries


def cmd_cluster(cfg: ExperimentConfig, wordlist_path: Path) -> None:
    entries = _read_wordlist(wordlist_path)
    if not cfg.embedding_sources:
        raise ConfigError("embeddings", "configure embeddings.path or embeddings.sources")
    words = {w for w, _ in entries}
    rows: list[tuple[str, float, float]] = []
    for name, path in sorted(cfg.embedding_sources.items()):
        table = load_embeddings(path, vocab_filter=words)
        used = [(w, d) for w, d in entries if w in table]
        if not used:
            raise ConfigError(
                f"embeddings.sources.{name}", "every wordlist word is out of vocabulary"
            )
        skipped = len(entries) - len(used)
        if skipped:
            log.warning("%s: %d wordlist words have no embedding, skipped", name, skipped)
        vectors = [table.lookup(w) for w, _ in used]
        domains = [d for _, d in used]
        k = cfg.kmeans_k if cfg.kmeans_k is not None else len(set(domains))
        pred = kmeans(vectors, k=k, seed=cfg.kmeans_seed, restarts=cfg.kmeans_restarts)
        domain_ids = {d: i for i, d in enumerate(dict.fromkeys(domains))}
        truth = ClusterAssignment(
            labels=tuple(domain_ids[d] for d in domains), k=len(domain_ids)
        )
        rows.append((name, adjusted_rand(truth, pred), v_measure(truth, pred)))
    out = cfg.out_dir / "cluster_metrics.csv"
    reports.write_cluster_csv(
        out, rows, cfg.fingerprint,
        f"wordlist={wordlist_path.name} k={cfg.kmeans_k if cfg.kmeans_k is not None else 'auto'}",
    )
    print(f"wrote {out}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML experiment config")
    common.add_argument("--out", default=None, help="output directory (overrides config)")
    common.add_argument("--seed", type=int, default=None, help="training seed override")

    parser = _Parser(prog="zsner", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train one head, write checkpoint + loss CSV")
    p.add_argument("--domain", default=None, help="source domain (required if several are configured)")

    sub.add_parser("grid", parents=[common], help="zero-shot source x target macro-F1 grid")

    p = sub.add_parser("fewshot", parents=[common], help="few-shot curve for one domain pair")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--n", default="0,1,5,10", help="comma-separated n values (default 0,1,5,10)")

    p = sub.add_parser("domain-distance", parents=[common], help="pairwise KL divergence (nats)")
    p.add_argument("--scores", default=None, help="grid CSV to regress macro F1 against distance")

    p = sub.add_parser("cluster", parents=[common], help="k-means quality of label/concept embeddings")
    p.add_argument("wordlist", help="file of `word domain` lines")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return 0 if not exc.code else 1  # --help exits 0

    try:
        cfg = load_config(args.config, seed_override=args.seed, out_override=args.out)
        if args.command == "train":
            cmd_train(cfg, args.domain)
        elif args.command == "grid":
            cmd_grid(cfg)
        elif args.command == "fewshot":
            try:
                n_values = [int(v) for v in args.n.split(",") if v.strip()]
            except ValueError:
                raise ConfigError("n", f"not a comma-separated integer list: {args.n!r}")
            cmd_fewshot(cfg, args.source, args.target, n_values)
        elif args.command == "domain-distance":
            cmd_domain_distance(cfg, Path(args.scores) if args.scores else None)
        elif args.command == "cluster":
            cmd_cluster(cfg, Path(args.wordlist))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TaggerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Experiment configuration: a single YAML file with one section per concern.

Example::

    embeddings:
      path: glove.6B.50d.txt
      normalize_labels: false
      sources:            # optional, for `cluster`: name -> embedding file
        glove: glove.6B.50d.txt
    corpora:
      music: {train: music_train.conll, test: music_test.conll}
      science: {path: science.conll}   # single file, split by `split`
    split: {train_fraction: 0.8, seed: 13}
    encoder: {window_radius: 1}
    train:
      learning_rate: 0.5
      epochs: 50
      batch_size: 32
      seed: 7
      init_scale: 0.1
      use_o_embedding: true
      seeds: [7, 8, 9]    # optional, few-shot runs average over these
    smoothing: {epsilon: 1.0}
    kmeans: {k: null, restarts: 10, seed: 11}
    output: {dir: out}

Every experiment's randomness funnels through the named seeds above.  The
resolved config (defaults applied, paths absolute, overrides folded in) is
hashed into a fingerprint that is stamped on every report, so equal
fingerprints mean byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .head import TrainConfig

_KNOWN_SECTIONS = {
    "embeddings", "corpora", "split", "encoder", "train", "smoothing", "kmeans", "output",
}


@dataclass(frozen=True)
class CorpusPaths:
    """Either explicit train/test files or a single file to be split."""

    train: Path | None = None
    test: Path | None = None
    single: Path | None = None


@dataclass
class ExperimentConfig:
    embedding_path: Path | None
    embedding_sources: dict[str, Path]
    normalize_labels: bool
    corpora: dict[str, CorpusPaths]
    split_fraction: float
    split_seed: int
    window_radius: int
    train: TrainConfig
    train_seeds: list[int]
    use_o_embedding: bool
    epsilon: float
    kmeans_k: int | None
    kmeans_restarts: int
    kmeans_seed: int
    out_dir: Path
    fingerprint: str = ""
    resolved: dict[str, Any] = field(default_factory=dict)


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, f"must be a mapping, got {type(value).__name__}")
    return value


def _get(section: dict, section_name: str, key: str, default, kind) -> Any:
    value = section.get(key, default)
    if value is None:
        return None
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{section_name}.{key}", "must be an integer, got a boolean")
    if not isinstance(value, kind):
        raise ConfigError(
            f"{section_name}.{key}",
            f"must be {kind.__name__}, got {type(value).__name__}",
        )
    return value


def _existing_path(value: str, field_name: str, base: Path) -> Path:
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise ConfigError(field_name, f"file not found: {path}")
    return path.resolve()


def load_config(
    path: str | Path,
    seed_override: int | None = None,
    out_override: str | None = None,
) -> ExperimentConfig:
    """Parse and validate a YAML experiment config.

    Relative paths are resolved against the config file's directory.  The
    global ``--seed`` override replaces the training seed (and the seed list);
    ``--out`` replaces the output directory.

    Raises:
        ConfigError: unknown section, wrong type, out-of-range value, or a
            referenced file that does not exist, named by field.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("config", f"not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping of sections")
    unknown = set(raw) - _KNOWN_SECTIONS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown config section")
    base = path.parent

    emb = _section(raw, "embeddings")
    embedding_path: Path | None = None
    if emb.get("path") is not None:
        embedding_path = _existing_path(
            _get(emb, "embeddings", "path", None, str), "embeddings.path", base
        )
    sources: dict[str, Path] = {}
    raw_sources = emb.get("sources") or {}
    if not isinstance(raw_sources, dict):
        raise ConfigError("embeddings.sources", "must be a mapping of name -> path")
    for name, p in raw_sources.items():
        if not isinstance(p, str):
            raise ConfigError(f"embeddings.sources.{name}", "must be a path string")
        sources[str(name)] = _existing_path(p, f"embeddings.sources.{name}", base)
    if not sources and embedding_path is not None:
        sources["default"] = embedding_path
    normalize_labels = _get(emb, "embeddings", "normalize_labels", False, bool)

    corpora: dict[str, CorpusPaths] = {}
    for domain, spec in _section(raw, "corpora").items():
        fieldname = f"corpora.{domain}"
        if not isinstance(spec, dict):
            raise ConfigError(fieldname, "must be a mapping with train/test or path")
        if "path" in spec:
            corpora[domain] = CorpusPaths(
                single=_existing_path(spec["path"], f"{fieldname}.path", base)
            )
        elif "train" in spec and "test" in spec:
            corpora[domain] = CorpusPaths(
                train=_existing_path(spec["train"], f"{fieldname}.train", base),
                test=_existing_path(spec["test"], f"{fieldname}.test", base),
            )
        else:
            raise ConfigError(fieldname, "needs either `path` or both `train` and `test`")

    split = _section(raw, "split")
    split_fraction = _get(split, "split", "train_fraction", 0.8, float)
    split_seed = _get(split, "split", "seed", 13, int)
    if not 0.0 < split_fraction < 1.0:
        raise ConfigError("split.train_fraction", f"must be in (0, 1), got {split_fraction}")

    enc = _section(raw, "encoder")
    window_radius = _get(enc, "encoder", "window_radius", 1, int)
    if window_radius < 0:
        raise ConfigError("encoder.window_radius", f"must be >= 0, got {window_radius}")

    tr = _section(raw, "train")
    seed = seed_override if seed_override is not None else _get(tr, "train", "seed", 7, int)
    try:
        train_cfg = TrainConfig(
            learning_rate=_get(tr, "train", "learning_rate", 0.5, float),
            epochs=_get(tr, "train", "epochs", 50, int),
            batch_size=_get(tr, "train", "batch_size", 32, int),
            seed=seed,
            init_scale=_get(tr, "train", "init_scale", 0.1, float),
        )
    except ValueError as exc:
        raise ConfigError("train", str(exc)) from exc
    use_o_embedding = _get(tr, "train", "use_o_embedding", True, bool)
    raw_seeds = tr.get("seeds")
    if seed_override is not None or raw_seeds is None:
        train_seeds = [seed]
    else:
        if not isinstance(raw_seeds, list) or not raw_seeds or not all(
            isinstance(s, int) and not isinstance(s, bool) for s in raw_seeds
        ):
            raise ConfigError("train.seeds", "must be a non-empty list of integers")
        train_seeds = list(raw_seeds)

    smoothing = _section(raw, "smoothing")
    epsilon = _get(smoothing, "smoothing", "epsilon", 1.0, float)
    if epsilon <= 0:
        raise ConfigError("smoothing.epsilon", f"must be strictly positive, got {epsilon}")

    km = _section(raw, "kmeans")
    kmeans_k = _get(km, "kmeans", "k", None, int)
    if kmeans_k is not None and kmeans_k <= 0:
        raise ConfigError("kmeans.k", f"must be positive, got {kmeans_k}")
    kmeans_restarts = _get(km, "kmeans", "restarts", 10, int)
    if kmeans_restarts <= 0:
        raise ConfigError("kmeans.restarts", f"must be positive, got {kmeans_restarts}")
    kmeans_seed = _get(km, "kmeans", "seed", 11, int)

    out = _section(raw, "output")
    out_dir = Path(out_override if out_override is not None else _get(out, "output", "dir", "out", str))

    resolved = {
        "embeddings": {
            "path": str(embedding_path) if embedding_path else None,
            "sources": {k: str(v) for k, v in sorted(sources.items())},
            "normalize_labels": normalize_labels,
        },
        "corpora": {
            d: {
                "train": str(c.train) if c.train else None,
                "test": str(c.test) if c.test else None,
                "single": str(c.single) if c.single else None,
            }
            for d, c in sorted(corpora.items())
        },
        "split": {"train_fraction": split_fraction, "seed": split_seed},
        "encoder": {"window_radius": window_radius, "mode": "window-average"},
        "train": {
            "learning_rate": train_cfg.learning_rate,
            "epochs": train_cfg.epochs,
            "batch_size": train_cfg.batch_size,
            "seed": train_cfg.seed,
            "init_scale": train_cfg.init_scale,
            "use_o_embedding": use_o_embedding,
            "seeds": train_seeds,
        },
        "smoothing": {"epsilon": epsilon},
        "kmeans": {"k": kmeans_k, "restarts": kmeans_restarts, "seed": kmeans_seed},
    }
    fingerprint = config_fingerprint(resolved)

    return ExperimentConfig(
        embedding_path=embedding_path,
        embedding_sources=sources,
        normalize_labels=normalize_labels,
        corpora=corpora,
        split_fraction=split_fraction,
        split_seed=split_seed,
        window_radius=window_radius,
        train=train_cfg,
        train_seeds=train_seeds,
        use_o_embedding=use_o_embedding,
        epsilon=epsilon,
        kmeans_k=kmeans_k,
        kmeans_restarts=kmeans_restarts,
        kmeans_seed=kmeans_seed,
        out_dir=out_dir,
        fingerprint=fingerprint,
        resolved=resolved,
    )


def config_fingerprint(resolved: dict[str, Any]) -> str:
    """12-hex-digit hash of the resolved config (defaults and seeds included)."""
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

"""Exception types shared across the toolkit."""

from __future__ import annotations


class TaggerError(Exception):
    """Base class for all toolkit-specific errors."""


class FormatError(TaggerError):
    """A text input (embedding file, corpus, feature file) is malformed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)
        self.line = line
        self.path = path


class MissingEmbeddingError(TaggerError):
    """No component word of a label was found in the embedding table."""

    def __init__(self, label: str, missing: list[str]):
        super().__init__(
            f"label {label!r}: no component word has an embedding "
            f"(missing: {', '.join(missing)})"
        )
        self.label = label
        self.missing = list(missing)


class ShapeError(TaggerError):
    """Vector or matrix dimensions do not match the expected shape."""


class DataError(TaggerError):
    """Training data violates its contract (e.g. a gold label not in the label set)."""


class TrainingDivergedError(TaggerError):
    """Loss or parameters became non-finite during training."""

    def __init__(self, epoch: int, detail: str):
        super().__init__(f"training diverged at epoch {epoch}: {detail}")
        self.epoch = epoch


class DegenerateFitError(TaggerError):
    """Regression input has fewer than 2 points or constant x values."""


class ConfigError(TaggerError):
    """An experiment config field is missing, malformed, or points nowhere."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field

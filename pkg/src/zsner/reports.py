"""CSV report emission.

Every report starts with ``#`` comment lines carrying the config fingerprint
and the encoder/embedding identity, so a number can always be traced back to
the exact configuration (and never mistaken for output of a pre-trained
encoder).  Nothing time-dependent is written: identical config means
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

from .errors import FormatError
from .evaluation import GridResult
from .similarity import RegressionFit


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def header_lines(fingerprint: str, *extra: str) -> list[str]:
    lines = [f"# fingerprint={fingerprint}"]
    lines.extend(f"# {e}" for e in extra)
    return lines


def _write(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_loss_csv(path: Path, trace: list[float], fingerprint: str, *extra: str) -> None:
    lines = header_lines(fingerprint, *extra)
    lines.append("epoch,loss")
    lines.extend(f"{epoch},{_fmt(loss)}" for epoch, loss in enumerate(trace, 1))
    _write(path, lines)


def write_grid_csv(path: Path, grid: GridResult, *extra: str) -> None:
    """Rows are source (train) domains, columns are target (test) domains;
    the footer row carries the off-diagonal mean."""
    lines = header_lines(grid.config_fingerprint, *extra)
    lines.append("source_domain," + ",".join(grid.domains))
    for i, domain in enumerate(grid.domains):
        lines.append(domain + "," + ",".join(_fmt(v) for v in grid.scores[i]))
    lines.append(f"off_diagonal_mean,{_fmt(grid.off_diagonal_mean)}")
    _write(path, lines)


def read_grid_csv(path: Path) -> tuple[list[str], dict[tuple[str, str], float]]:
    """Parse a grid CSV back into (domains, {(source, target): score})."""
    cells: dict[tuple[str, str], float] = {}
    rows = [
        line for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not rows or not rows[0].startswith("source_domain,"):
        raise FormatError("missing `source_domain,...` header row", path=str(path))
    domains = rows[0].split(",")[1:]
    for line in rows[1:]:
        parts = line.split(",")
        if parts[0] == "off_diagonal_mean":
            continue
        if len(parts) != len(domains) + 1:
            raise FormatError(f"row has {len(parts)} fields, expected {len(domains) + 1}", path=str(path))
        source = parts[0]
        for target, value in zip(domains, parts[1:]):
            try:
                cells[(source, target)] = float(value)
            except ValueError as exc:
                raise FormatError(f"non-numeric score {value!r}", path=str(path)) from exc
    return domains, cells


def write_fewshot_csv(path: Path, rows: list[tuple[int, float]], fingerprint: str, *extra: str) -> None:
    lines = header_lines(fingerprint, *extra)
    lines.append("n,macro_f1")
    lines.extend(f"{n},{_fmt(f1)}" for n, f1 in rows)
    _write(path, lines)


def write_distance_csv(
    path: Path, rows: list[tuple[str, str, float]], fingerprint: str, *extra: str
) -> None:
    """Ordered (source, target) pairs with KL(target || source) in nats."""
    lines = header_lines(fingerprint, *extra)
    lines.append("source,target,kl_nats")
    lines.extend(f"{s},{t},{_fmt(v)}" for s, t, v in rows)
    _write(path, lines)


def write_regression_csv(path: Path, fit: RegressionFit, fingerprint: str, *extra: str) -> None:
    lines = header_lines(fingerprint, *extra)
    lines.append("slope,intercept,r2")
    lines.append(f"{_fmt(fit.slope)},{_fmt(fit.intercept)},{_fmt(fit.r_squared)}")
    _write(path, lines)


def write_cluster_csv(
    path: Path, rows: list[tuple[str, float, float]], fingerprint: str, *extra: str
) -> None:
    lines = header_lines(fingerprint, *extra)
    lines.append("embedding_source,adjusted_rand,v_measure")
    lines.extend(f"{name},{_fmt(ari)},{_fmt(v)}" for name, ari, v in rows)
    _write(path, lines)

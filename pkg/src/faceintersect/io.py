"""Plain-text matrix files, key-value files and instance directories.

Matrix files start with a ``# rows=<n> cols=<m>`` header followed by one
comma-separated line per row, written with 17 significant digits so a
write/read round trip is exact.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .model import DataMatrix

_HEADER = re.compile(r"#\s*rows\s*=\s*(\d+)\s+cols\s*=\s*(\d+)\s*$")


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def write_matrix(path, X) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, m = X.shape
    lines = [f"# rows={n} cols={m}"]
    lines += [",".join(f"{v:.17g}" for v in row) for row in X]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    text = Path(path).read_text().splitlines()
    if not text:
        raise FormatError(f"{path}: empty file")
    m = _HEADER.match(text[0].strip())
    if not m:
        raise FormatError(f"{path}: first line must be '# rows=<n> cols=<m>'")
    n, cols = int(m.group(1)), int(m.group(2))
    body = [ln for ln in text[1:] if ln.strip()]
    if len(body) != n:
        raise FormatError(f"{path}: header says {n} rows, found {len(body)}")
    out = np.empty((n, cols))
    for i, ln in enumerate(body):
        parts = ln.split(",")
        if len(parts) != cols:
            raise FormatError(f"{path}: row {i} has {len(parts)} values, expected {cols}")
        try:
            out[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(f"{path}: row {i}: {exc}") from exc
    return out


def write_kv(path, items: dict) -> None:
    lines = []
    for k, v in items.items():
        lines.append(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_kv(path) -> dict[str, str]:
    from .config import parse_key_values

    return parse_key_values(Path(path).read_text(), str(path))


def write_instance(out_dir, inst) -> Path:
    """Write ``M.csv``, ``M_noisy.csv``, ``A.csv``, ``W.csv`` and ``meta``."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "M.csv", inst.M.entries)
    write_matrix(d / "M_noisy.csv", inst.M_noisy.entries)
    write_matrix(d / "A.csv", inst.A)
    write_matrix(d / "W.csv", inst.W)
    keys = ("r", "m", "n1", "n2", "noise", "seed", "measured_noise", "clamp_count")
    write_kv(d / "meta", {k: inst.meta[k] for k in keys})
    return d


def load_data_matrix(path) -> DataMatrix:
    """Load ``M.csv`` (or an instance directory, preferring ``M_noisy.csv``) and normalize rows."""
    from .model import row_normalize

    p = Path(path)
    if p.is_dir():
        cand = p / "M_noisy.csv"
        p = cand if cand.exists() else p / "M.csv"
    X = read_matrix(p)
    if np.any(X < 0):
        raise FormatError(f"{p}: negative entries")
    return row_normalize(X)

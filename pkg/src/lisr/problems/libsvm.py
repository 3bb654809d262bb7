"""Reader and writer for the LIBSVM sparse text format (binary labels only)."""

from __future__ import annotations

import io
import os
from typing import Optional, TextIO, Tuple, Union

import numpy as np

from ..errors import ParseError

_LABELS = {0.0: -1.0, 1.0: 1.0, -1.0: -1.0}


def _open(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def parse_libsvm(source: Union[str, os.PathLike, TextIO], dim: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Parse ``<label> <index>:<value> ...`` lines into dense ``(features, labels)``.

    Labels ``0``/``-1`` map to ``-1`` and ``1``/``+1`` to ``+1``. Indices are
    1-based and must strictly increase within a line. Blank lines and text
    after ``#`` are ignored. The feature dimension is the largest index seen
    unless ``dim`` is given.
    """
    fh, owned = _open(source)
    rows, labels = [], []
    max_index = 0
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise ParseError(lineno, f"bad label {tokens[0]!r}") from None
            if label not in _LABELS:
                raise ParseError(lineno, f"label {tokens[0]!r} is not one of 0, 1, -1, +1")
            idx, vals = [], []
            prev = 0
            for tok in tokens[1:]:
                key, sep, val = tok.partition(":")
                if not sep:
                    raise ParseError(lineno, f"malformed feature {tok!r}")
                try:
                    j = int(key)
                    v = float(val)
                except ValueError:
                    raise ParseError(lineno, f"malformed feature {tok!r}") from None
                if j < 1:
                    raise ParseError(lineno, f"feature index {j} is not positive")
                if j <= prev:
                    raise ParseError(lineno, f"feature index {j} does not increase (previous {prev})")
                prev = j
                idx.append(j - 1)
                vals.append(v)
            max_index = max(max_index, prev)
            rows.append((idx, vals))
            labels.append(_LABELS[label])
    finally:
        if owned:
            fh.close()
    if dim is None:
        dim = max_index
    elif max_index > dim:
        raise ParseError(0, f"feature index {max_index} exceeds dimension {dim}")
    X = np.zeros((len(rows), dim))
    for r, (idx, vals) in enumerate(rows):
        X[r, idx] = vals
    return X, np.asarray(labels, dtype=float)


def _fmt(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_libsvm(features: np.ndarray, labels: np.ndarray, dest: Union[str, os.PathLike, TextIO, None] = None) -> str:
    """Serialize dense features and +-1 labels; zeros are omitted.

    Returns the text; also writes it to ``dest`` when given.
    """
    buf = io.StringIO()
    for x, y in zip(features, labels):
        parts = ["+1" if y > 0 else "-1"]
        parts.extend(f"{j + 1}:{_fmt(v)}" for j, v in enumerate(x) if v != 0.0)
        buf.write(" ".join(parts) + "\n")
    text = buf.getvalue()
    if dest is not None:
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            dest.write(text)
    return text

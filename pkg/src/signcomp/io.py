"""Dense matrix files: plain CSV and MatrixMarket ``array real general``.

Values are written with ``repr`` (shortest round-trip form, at most 17
significant digits), so a write/read cycle is bit-faithful.  Files are written
to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io as _io
import os
import tempfile
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy.io

from .errors import MatrixParseError

FORMATS = ("csv", "matrixmarket")
PathLike = Union[str, os.PathLike]


def infer_format(path: PathLike, fmt: Optional[str] = None) -> str:
    if fmt not in (None, "auto"):
        if fmt not in FORMATS:
            raise ValueError(f"unknown matrix format {fmt!r}; expected one of {FORMATS}")
        return fmt
    return "matrixmarket" if Path(path).suffix.lower() in (".mtx", ".mm") else "csv"


def parse_csv(text: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, row in enumerate(csv.reader(_io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise MatrixParseError(f"not a number: {cell.strip()!r}", lineno, col) from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise MatrixParseError(
                f"row {lineno} has {len(vals)} entries, expected {width}", lineno
            )
        rows.append(vals)
    if not rows:
        raise MatrixParseError("no data rows")
    return np.array(rows, dtype=float)


def read_matrix(path: PathLike, fmt: Optional[str] = None) -> np.ndarray:
    """Read a dense matrix; a 1-D file becomes a single row (CSV) or column (MatrixMarket)."""
    fmt = infer_format(path, fmt)
    try:
        if fmt == "csv":
            with open(path, newline="") as fh:
                return parse_csv(fh.read())
        M = scipy.io.mmread(str(path))
    except MatrixParseError:
        raise
    except OSError as exc:
        raise MatrixParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, TypeError, IndexError, UnicodeDecodeError) as exc:
        raise MatrixParseError(f"malformed MatrixMarket file {path}: {exc}") from exc
    if hasattr(M, "toarray"):
        M = M.toarray()
    M = np.asarray(M)
    if np.iscomplexobj(M):
        raise MatrixParseError(f"{path}: complex matrices are not supported")
    return M.astype(float)


def format_csv(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in M)


def format_matrixmarket(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n, m = M.shape
    lines = ["%%MatrixMarket matrix array real general", f"{n} {m}"]
    lines += [repr(float(v)) for v in M.ravel(order="F")]
    return "\n".join(lines) + "\n"


def atomic_write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix(M, path: PathLike, fmt: Optional[str] = None) -> None:
    fmt = infer_format(path, fmt)
    text = format_csv(M) if fmt == "csv" else format_matrixmarket(M)
    atomic_write_text(path, text)

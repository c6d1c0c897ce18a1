"""Delimited-text input and output for datasets."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset
from .exceptions import ParseError


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if header_line.count("\t") > header_line.count(",") else ","


def parse_table(text: str):
    """Parse header plus numeric rows; returns ``(names, array)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("input is empty")
    delim = _sniff_delimiter(lines[0])
    rows = list(csv.reader(lines, delimiter=delim))
    names = [h.strip() for h in rows[0]]
    if any(not h for h in names):
        raise ParseError("row 1: empty column name in header")
    if len(set(names)) != len(names):
        raise ParseError("row 1: duplicate column names in header")
    if len(rows) == 1:
        raise ParseError("input has a header but no data rows")
    values = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(names):
            raise ParseError(f"row {i}: expected {len(names)} fields, found {len(row)}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == "" or cell.lower() in ("na", "nan", "null"):
                raise ParseError(f"row {i}, column {names[j]!r}: missing value")
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"row {i}, column {names[j]!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(f"row {i}, column {names[j]!r}: non-finite value {cell!r}")
            values[i - 2, j] = v
    return names, values


def ingest_csv(path: Union[str, Path], response: Optional[str] = None):
    """Read a delimited file into ``(Dataset, predictor_names, response_name)``.

    The delimiter (comma or tab) is detected from the header.  ``response``
    names the response column; the last column is used when omitted.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    names, values = parse_table(text)
    if len(names) < 2:
        raise ParseError("need a response column and at least one predictor")
    if response is None:
        response = names[-1]
    if response not in names:
        raise ParseError(f"response column {response!r} not found; columns are {names}")
    k = names.index(response)
    predictors = [nm for nm in names if nm != response]
    X = np.delete(values, k, axis=1)
    return Dataset(values[:, k], X), predictors, response


def format_table(data: Dataset, predictor_names: Sequence[str], response_name: str,
                 delimiter: str = ",") -> str:
    """Inverse of :func:`ingest_csv` with the response as last column; ``repr`` keeps full precision."""
    out = io.StringIO()
    w = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    w.writerow(list(predictor_names) + [response_name])
    for xi, yi in zip(data.X, data.y):
        w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
    return out.getvalue()


def write_csv(path: Union[str, Path], data: Dataset, predictor_names: Sequence[str],
              response_name: str, delimiter: str = ",") -> None:
    Path(path).write_text(format_table(data, predictor_names, response_name, delimiter))

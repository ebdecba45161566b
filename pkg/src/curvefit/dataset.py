"""Paired (x, y) observations with per-entry missingness."""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AllMissing, EmptyFile, MissingColumn, ParseError

MISSING_TOKENS = ("", "NaN")


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable paired observations.

    Missingness lives in the boolean ``x_present`` / ``y_present`` masks. The
    value slot behind a missing entry holds NaN so that any code ignoring the
    mask fails loudly instead of silently averaging a fill value.
    """

    x: np.ndarray
    y: np.ndarray
    x_present: np.ndarray = field(default=None)
    y_present: np.ndarray = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError(f"x and y differ in length ({x.size} != {y.size})")
        if x.size == 0:
            raise ValueError("a dataset needs at least one observation")
        xp = ~np.isnan(x) if self.x_present is None else np.asarray(self.x_present, dtype=bool).ravel()
        yp = ~np.isnan(y) if self.y_present is None else np.asarray(self.y_present, dtype=bool).ravel()
        if xp.shape != x.shape or yp.shape != y.shape:
            raise ValueError("presence masks must match the data length")
        if not (np.all(np.isfinite(x[xp])) and np.all(np.isfinite(y[yp]))):
            raise ValueError("present entries must be finite reals")
        x = np.where(xp, x, np.nan)
        y = np.where(yp, y, np.nan)
        object.__setattr__(self, "x", _frozen(x, float))
        object.__setattr__(self, "y", _frozen(y, float))
        object.__setattr__(self, "x_present", _frozen(xp, bool))
        object.__setattr__(self, "y_present", _frozen(yp, bool))

    @classmethod
    def from_values(cls, x, y):
        """Build from sequences where ``None`` or NaN marks a missing entry."""
        def conv(seq):
            return [np.nan if v is None else float(v) for v in seq]
        return cls(conv(x), conv(y))

    def __len__(self):
        return self.x.size

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.x_present, other.x_present)
            and np.array_equal(self.y_present, other.y_present)
            and np.array_equal(self.x, other.x, equal_nan=True)
            and np.array_equal(self.y, other.y, equal_nan=True)
        )

    __hash__ = None

    @property
    def is_complete(self):
        return bool(self.x_present.all() and self.y_present.all())

    @property
    def complete_mask(self):
        return self.x_present & self.y_present

    def missing_counts(self):
        return {"x": int((~self.x_present).sum()), "y": int((~self.y_present).sum())}


def complete_pairs(d):
    """Listwise deletion: keep rows where both x and y are present."""
    keep = d.complete_mask
    if not keep.any():
        raise AllMissing("no row has both x and y present")
    if keep.all():
        return d
    return Dataset(d.x[keep], d.y[keep])


def _parse_cell(token, row, column):
    if token.strip() in MISSING_TOKENS:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        raise ParseError(row, column, token) from None
    if not math.isfinite(value):
        # "nan", "inf" and friends are rejected; only the literal NaN token means missing
        raise ParseError(row, column, token)
    return value


def read_columns(path, columns):
    """Read named numeric columns from a headed CSV file.

    Returns a dict of column name to float array with NaN at missing cells.
    Data rows are numbered from 1 in error messages.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise EmptyFile(f"{path} has no header row")
        header = [h.strip() for h in header]
        idx = {}
        for name in columns:
            if name not in header:
                raise MissingColumn(name)
            idx[name] = header.index(name)
        out = {name: [] for name in columns}
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            for name, j in idx.items():
                token = row[j] if j < len(row) else ""
                out[name].append(_parse_cell(token, rownum, name))
    if not out or not next(iter(out.values())):
        raise EmptyFile(f"{path} has no data rows")
    return {k: np.array(v, dtype=float) for k, v in out.items()}


def load_csv(path, x_col="x", y_col="y"):
    """Load a :class:`Dataset` from two named columns of a CSV file.

    Empty cells and the literal token ``NaN`` become missing entries.
    Infinite or unparsable tokens raise :class:`~curvefit.errors.ParseError`.
    """
    cols = read_columns(path, [x_col, y_col])
    return Dataset(cols[x_col], cols[y_col])


def format_value(v):
    """Shortest decimal string that round-trips the float; missing is empty."""
    return "" if math.isnan(v) else repr(float(v))


def write_csv(path, columns):
    """Write an ordered mapping of column name to values as CSV."""
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*arrays):
            w.writerow([format_value(v) for v in row])


def save_csv(d, path, x_col="x", y_col="y"):
    write_csv(path, {x_col: d.x, y_col: d.y})

"""Rock specimens, porosity, CSV ingestion and train/test splitting.

CSV files are UTF-8 with the header ``n_percent,v_mps,ucs_mpa``; the
``ucs_mpa`` column may be omitted for prediction inputs.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

FEATURES = ("n", "v")
TARGET = "ucs"
COLUMNS = ("n_percent", "v_mps", "ucs_mpa")


class DatasetError(ValueError):
    pass


class ParseError(DatasetError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class RockSample:
    """Porosity ``n`` in percent, P-wave velocity ``v`` in m/s, UCS in MPa."""

    n: float
    v: float
    ucs: float | None = None

    def __post_init__(self):
        if not 0 < self.n < 100:
            raise DatasetError(f"porosity must lie in (0, 100) percent, got {self.n}")
        if not self.v > 0:
            raise DatasetError(f"velocity must be positive, got {self.v}")
        if self.ucs is not None and not self.ucs > 0:
            raise DatasetError(f"UCS must be positive, got {self.ucs}")


@dataclass(frozen=True)
class DensityMeasurement:
    rho_d: float
    rho_s: float


def porosity(m: DensityMeasurement) -> float:
    """Total porosity as a fraction: one minus dry over solid density."""
    if not (m.rho_d > 0 and m.rho_s > 0):
        raise DatasetError("densities must be positive")
    if m.rho_d > m.rho_s:
        raise DatasetError(
            f"dry density {m.rho_d} exceeds solid density {m.rho_s}"
        )
    return 1.0 - m.rho_d / m.rho_s


def porosity_percent(m: DensityMeasurement) -> float:
    return 100.0 * porosity(m)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[RockSample, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        present = {s.ucs is not None for s in self.samples}
        if len(present) > 1:
            raise DatasetError("UCS must be given for all samples or none")

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def has_target(self) -> bool:
        return bool(self.samples) and self.samples[0].ucs is not None

    def features(self) -> dict[str, np.ndarray]:
        """Columns keyed by the terminal names ``n`` and ``v``."""
        return {
            "n": np.array([s.n for s in self.samples], dtype=np.float64),
            "v": np.array([s.v for s in self.samples], dtype=np.float64),
        }

    def target(self) -> np.ndarray:
        if not self.has_target:
            raise DatasetError("dataset has no ucs_mpa values")
        return np.array([s.ucs for s in self.samples], dtype=np.float64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS if self.has_target else COLUMNS[:2])
        for s in self.samples:
            row = [repr(s.n), repr(s.v)]
            if s.ucs is not None:
                row.append(repr(s.ucs))
            w.writerow(row)
        return buf.getvalue()


def _read_text(source) -> str:
    if hasattr(source, "read"):
        text = source.read()
        return text.decode("utf-8") if isinstance(text, bytes) else text
    with open(os.fspath(source), encoding="utf-8", newline="") as f:
        return f.read()


def load_csv(source, require_target: bool = False) -> Dataset:
    """Parse a CSV file (path or open file) into a :class:`Dataset`.

    Row numbers in errors are 1-based file lines, the header being line 1.
    """
    text = _read_text(source)
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty file") from None
    if header == list(COLUMNS):
        with_target = True
    elif header == list(COLUMNS[:2]):
        with_target = False
    else:
        missing = [c for c in COLUMNS[:2] if c not in header]
        col = missing[0] if missing else None
        raise ParseError(
            f"header must be {','.join(COLUMNS)} (ucs_mpa optional), got {','.join(header)}",
            row=1, column=col,
        )
    if require_target and not with_target:
        raise ParseError("missing target column", row=1, column="ucs_mpa")

    samples = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, got {len(row)}", row=lineno)
        values = []
        for name, cell in zip(header, row):
            try:
                x = float(cell.strip())
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", lineno, name) from None
            if not math.isfinite(x):
                raise ParseError(f"not a finite number: {cell!r}", lineno, name)
            values.append(x)
        try:
            samples.append(RockSample(*values))
        except DatasetError as exc:
            col = _violating_column(values)
            raise ParseError(str(exc), lineno, col) from None
    return Dataset(tuple(samples))


def _violating_column(values):
    n, v, *rest = values
    if not 0 < n < 100:
        return "n_percent"
    if not v > 0:
        return "v_mps"
    return "ucs_mpa"


def split(ds: Dataset, train_fraction: float, rng) -> tuple[Dataset, Dataset]:
    """Random train/test partition.

    The train side gets ``round(train_fraction * N)`` samples, halves
    rounding toward train.  ``rng`` is a numpy Generator or an integer seed.
    """
    if not 0 < train_fraction < 1:
        raise DatasetError("train_fraction must lie strictly between 0 and 1")
    n = len(ds)
    if n < 2:
        raise DatasetError("need at least two samples to split")
    n_train = math.floor(train_fraction * n + 0.5)
    if n_train in (0, n):
        raise DatasetError(f"a {train_fraction} split of {n} samples leaves a side empty")
    rng = np.random.default_rng(rng)
    order = rng.permutation(n)
    train = tuple(ds.samples[i] for i in order[:n_train])
    test = tuple(ds.samples[i] for i in order[n_train:])
    return Dataset(train), Dataset(test)


def table1_path():
    return resources.files("gepucs") / "data" / "table1.csv"


def table1() -> Dataset:
    """The 39 published carbonate test specimens, in published order."""
    with resources.as_file(table1_path()) as path:
        return load_csv(path, require_target=True)

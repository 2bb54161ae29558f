"""Shared domain types: covariates in a metric space, datasets, kernels, grids.

Covariates are stored as rows of a 2-D float array. A scalar covariate is a
row of length one, a vector covariate a row of length ``p`` and a curve a row
of ``p >= 2`` values sampled on a shared uniform grid.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DimensionMismatch, InvalidConfiguration

COVARIATE_KINDS = ("scalar", "vector", "curve")
METRIC_KINDS = ("absolute", "euclidean", "l2", "sup")

_DEFAULT_METRIC = {"scalar": "absolute", "vector": "euclidean", "curve": "l2"}
_ALLOWED_METRICS = {
    "scalar": ("absolute",),
    "vector": ("euclidean",),
    "curve": ("l2", "sup"),
}


# ---------------------------------------------------------------------------
# metric space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Metric:
    """Distance on the covariate space.

    ``kind`` is one of ``absolute`` (scalars), ``euclidean`` (vectors),
    ``l2`` (rectangle-rule L2 norm on a uniform grid of spacing ``step``)
    or ``sup`` (supremum norm on the grid).
    """

    kind: str = "absolute"
    step: float = 1.0

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise InvalidConfiguration(f"unknown metric kind {self.kind!r}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise InvalidConfiguration("metric grid step must be positive")

    def __call__(self, a, b) -> float:
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if a.ndim != 1 or a.shape != b.shape:
            raise DimensionMismatch(
                f"covariates of shape {a.shape} and {b.shape} are not comparable"
            )
        return float(self.to_many(a[None, :], b)[0])

    def to_many(self, X: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Distances from every row of ``X`` to the point ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.ndim != 1 or X.shape[1] != x.shape[0]:
            raise DimensionMismatch(
                f"point of dimension {x.shape} against covariates of dimension {X.shape[1]}"
            )
        diff = X - x
        if self.kind == "absolute":
            if diff.shape[1] != 1:
                raise DimensionMismatch("absolute-difference metric needs scalar covariates")
            return np.abs(diff[:, 0])
        if self.kind == "euclidean":
            return np.sqrt(np.sum(diff * diff, axis=1))
        if self.kind == "l2":
            return np.sqrt(self.step * np.sum(diff * diff, axis=1))
        return np.max(np.abs(diff), axis=1)


def distance(metric: Metric, a, b) -> float:
    """d(a, b) under ``metric``; raises DimensionMismatch on incompatible shapes."""
    return metric(a, b)


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Immutable sample of (covariate, response) pairs with its metric."""

    X: np.ndarray
    y: np.ndarray
    metric: Metric = field(default_factory=Metric)
    kind: str = "scalar"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"{X.shape[0]} covariates for {y.shape[0]} responses"
            )
        if y.size < 1:
            raise InvalidConfiguration("a dataset needs at least one observation")
        if self.kind not in COVARIATE_KINDS:
            raise InvalidConfiguration(f"unknown covariate kind {self.kind!r}")
        if self.kind == "scalar" and X.shape[1] != 1:
            raise DimensionMismatch("scalar covariates must be one-dimensional")
        if self.kind == "curve" and X.shape[1] < 2:
            raise DimensionMismatch("curves need a grid of at least two points")
        if self.metric.kind not in _ALLOWED_METRICS[self.kind]:
            raise InvalidConfiguration(
                f"metric {self.metric.kind!r} does not apply to {self.kind} covariates"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidConfiguration("covariates and responses must be finite")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def distances(self, x) -> np.ndarray:
        return self.metric.to_many(self.X, x)

    def with_responses(self, y) -> "Dataset":
        return Dataset(self.X, y, self.metric, self.kind)


def make_dataset(X, y, kind: str | None = None, metric: str | None = None,
                 step: float | None = None) -> Dataset:
    """Build a Dataset picking the natural metric for the covariate kind."""
    X = np.asarray(X, dtype=float)
    if kind is None:
        kind = "scalar" if X.ndim == 1 or X.shape[1] == 1 else "vector"
    metric = metric or _DEFAULT_METRIC[kind]
    if step is None:
        width = 1 if X.ndim == 1 else X.shape[1]
        step = 1.0 / width if kind == "curve" else 1.0
    return Dataset(X, y, Metric(metric, step), kind)


def read_csv(path, metric: str | None = None) -> Dataset:
    """Load a dataset from CSV.

    The header must contain ``y`` and either ``x``, ``x1..xp`` or ``t1..tp``.
    Curve columns are taken as values on a uniform grid of cells of width
    ``1/p``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if "y" not in header:
            raise DataFormatError(f"{path}: line 1: missing response column 'y'")
        kind, cols = _covariate_columns(header, path)
        y_idx = header.index("y")
        idx = [header.index(c) for c in cols]
        rows_x, rows_y = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                values = [float(row[i]) for i in idx]
                response = float(row[y_idx])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in values) or not math.isfinite(response):
                raise DataFormatError(f"{path}: line {lineno}: non-finite value")
            rows_x.append(values)
            rows_y.append(response)
    if not rows_y:
        raise DataFormatError(f"{path}: no data rows")
    return make_dataset(np.array(rows_x), np.array(rows_y), kind=kind, metric=metric)


def _covariate_columns(header, path):
    if "x" in header:
        return "scalar", ["x"]
    for prefix, kind in (("x", "vector"), ("t", "curve")):
        cols = []
        k = 1
        while f"{prefix}{k}" in header:
            cols.append(f"{prefix}{k}")
            k += 1
        if cols:
            if kind == "curve" and len(cols) < 2:
                raise DataFormatError(f"{path}: line 1: a curve needs at least t1,t2")
            return kind, cols
    raise DataFormatError(f"{path}: line 1: no covariate columns (x, x1.., t1..)")


def write_csv(ds: Dataset, path) -> None:
    """Inverse of :func:`read_csv`; floats are written with full precision."""
    if ds.kind == "scalar":
        names = ["x"]
    else:
        prefix = "x" if ds.kind == "vector" else "t"
        names = [f"{prefix}{k + 1}" for k in range(ds.dim)]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["y"])
        for row, resp in zip(ds.X, ds.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(resp))])


def parse_covariate(text: str) -> np.ndarray:
    """``"0.5"`` or ``"0.1,0.2,0.3"`` to a 1-D array."""
    try:
        values = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise InvalidConfiguration(f"cannot parse covariate {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise InvalidConfiguration(f"covariate {text!r} must be finite numbers")
    return np.array(values)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelK:
    """Covariate kernel on [0, 1], bounded away from zero, integrating to one."""

    kind: str = "uniform"

    def __post_init__(self):
        if self.kind not in ("uniform", "bounded-linear"):
            raise InvalidConfiguration(f"unknown covariate kernel {self.kind!r}")

    @property
    def bounds(self) -> tuple[float, float]:
        return (1.0, 1.0) if self.kind == "uniform" else (0.5, 1.5)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= 1.0)
        if self.kind == "uniform":
            values = np.ones_like(t)
        else:
            # 1.5 - t already integrates to one on [0, 1]
            values = 1.5 - t
        return np.where(inside, values, 0.0)


@dataclass(frozen=True)
class KernelQ:
    """Response-smoothing density q on [-1, 1] with its distribution function Q."""

    kind: str = "biweight"

    def __post_init__(self):
        if self.kind not in ("biweight", "triangular", "uniform"):
            raise InvalidConfiguration(f"unknown response kernel {self.kind!r}")

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) <= 1.0
        if self.kind == "biweight":
            values = 15.0 / 16.0 * (1.0 - s * s) ** 2
        elif self.kind == "triangular":
            values = 1.0 - np.abs(s)
        else:
            values = np.full_like(s, 0.5)
        return np.where(inside, values, 0.0)

    def cdf(self, s):
        """Q(s); written around the nearer endpoint to keep tails accurate."""
        s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
        a = 1.0 + s
        b = 1.0 - s
        if self.kind == "biweight":
            left = a ** 3 * (8.0 - 9.0 * s + 3.0 * s * s) / 16.0
            right = 1.0 - b ** 3 * (8.0 + 9.0 * s + 3.0 * s * s) / 16.0
        elif self.kind == "triangular":
            left = 0.5 * a * a
            right = 1.0 - 0.5 * b * b
        else:
            left = 0.5 * a
            right = 1.0 - 0.5 * b
        return np.where(s <= 0.0, left, right)

    @property
    def max_density(self) -> float:
        return {"biweight": 15.0 / 16.0, "triangular": 1.0, "uniform": 0.5}[self.kind]


@dataclass(frozen=True)
class KernelPair:
    k: KernelK = field(default_factory=KernelK)
    q: KernelQ = field(default_factory=KernelQ)


def survival_weights(kernel: KernelQ, responses: np.ndarray, y: float, lam: float):
    """Q((Y_i - y) / lambda), with lambda = 0 meaning the indicator Y_i >= y."""
    if lam == 0.0:
        return (responses >= y).astype(float)
    return kernel.cdf((responses - y) / lam)


@dataclass(frozen=True)
class Bandwidths:
    h: float
    lam: float = 0.0

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidConfiguration(f"covariate bandwidth h must be > 0, got {self.h}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidConfiguration(f"response bandwidth lambda must be >= 0, got {self.lam}")


# ---------------------------------------------------------------------------
# level grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TauGrid:
    """Strictly decreasing positive multipliers tau_1 > ... > tau_J > 0."""

    taus: tuple[float, ...]

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if not taus:
            raise InvalidConfiguration("a tau grid needs at least one level")
        if not all(t > 0 and math.isfinite(t) for t in taus):
            raise InvalidConfiguration("tau levels must be positive and finite")
        if any(a <= b for a, b in zip(taus, taus[1:])):
            raise InvalidConfiguration("tau levels must be strictly decreasing")
        object.__setattr__(self, "taus", taus)

    @classmethod
    def harmonic(cls, J: int) -> "TauGrid":
        """tau_j = 1/j for j = 1..J."""
        return cls(tuple(1.0 / j for j in range(1, J + 1)))

    @classmethod
    def parse(cls, text: str) -> "TauGrid":
        try:
            return cls(tuple(float(t) for t in text.split(",") if t.strip()))
        except ValueError:
            raise InvalidConfiguration(f"cannot parse tau grid {text!r}") from None

    def __len__(self) -> int:
        return len(self.taus)

    def __iter__(self):
        return iter(self.taus)

    @property
    def log_inverse(self) -> np.ndarray:
        """(log(1/tau_1), ..., log(1/tau_J))."""
        return -np.log(np.array(self.taus))

    def sigma(self) -> np.ndarray:
        """Sigma[j, j'] = 1 / tau_{min(j, j')}."""
        taus = np.array(self.taus)
        idx = np.arange(len(taus))
        return 1.0 / taus[np.minimum.outer(idx, idx)]

"""Kernel estimator of the conditional survival function P(Y > y | X = x)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Bandwidths, Dataset, KernelK, KernelPair, survival_weights
from .errors import EmptyNeighborhood


@dataclass(frozen=True)
class CsfEstimate:
    value: float
    neighborhood_count: int
    weight_sum: float


@dataclass(frozen=True)
class Neighborhood:
    """The observations with nonzero covariate weight around a point ``x``.

    Responses are kept sorted with suffix sums of their weights, so one
    survival evaluation only touches the responses within lambda of ``y``.
    Built once per query point and reused by the quantile bisection.
    """

    weights: np.ndarray
    responses: np.ndarray
    n: int
    tail: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        order = np.argsort(self.responses, kind="stable")
        w = np.asarray(self.weights, dtype=float)[order]
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "responses", np.asarray(self.responses, dtype=float)[order])
        # tail[i] = sum of weights[i:], tail[count] = 0
        object.__setattr__(self, "tail", np.append(np.cumsum(w[::-1])[::-1], 0.0))

    @property
    def count(self) -> int:
        return self.responses.shape[0]

    @property
    def weight_sum(self) -> float:
        return float(self.tail[0])

    def _parts(self, kernels: KernelPair, lam: float, y: float):
        """Weight of responses beyond the smoothing window, and window terms."""
        r = self.responses
        if lam == 0.0:
            return float(self.tail[np.searchsorted(r, y, "left")]), np.empty(0)
        lo = np.searchsorted(r, y - lam, "left")
        hi = np.searchsorted(r, y + lam, "left")
        window = self.weights[lo:hi] * survival_weights(kernels.q, r[lo:hi], y, lam)
        return float(self.tail[hi]), window

    def survival(self, kernels: KernelPair, lam: float, y: float) -> float:
        above, window = self._parts(kernels, lam, y)
        value = (above + float(window.sum())) / self.weight_sum
        # rounding can push a convex combination of [0, 1] values just outside
        return min(max(value, 0.0), 1.0)

    def exceeds(self, kernels: KernelPair, lam: float, y: float, alpha: float) -> bool:
        """Whether survival(y) > alpha.

        Near the level the comparison is redone with an exactly rounded sum,
        so tails of Q far below machine epsilon relative to the other terms
        still count.
        """
        above, window = self._parts(kernels, lam, y)
        target = alpha * self.weight_sum
        fast = above + float(window.sum()) - target
        if abs(fast) > 1e-12 * self.weight_sum:
            return fast > 0
        return math.fsum([above, -target, *window.tolist()]) > 0


def neighborhood(ds: Dataset, k: KernelK, h: float, x) -> Neighborhood:
    """Points with d(x, X_i) <= h (closed ball) and their K(d/h) weights."""
    t = ds.distances(x) / h
    mask = t <= 1.0
    weights = k(t[mask])
    if weights.size == 0 or not weights.sum() > 0:
        raise EmptyNeighborhood(
            f"no observation within distance h={h:g} of the query point"
        )
    return Neighborhood(weights, ds.y[mask], ds.n)


def csf_estimate(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x, y: float) -> CsfEstimate:
    """Kernel-weighted survival estimate at response level ``y`` given ``x``.

    Each neighbor contributes K(d(x, X_i)/h) Q((Y_i - y)/lambda); the result
    is normalized by the sum of covariate weights.
    """
    nb = neighborhood(ds, kernels.k, bw.h, x)
    return CsfEstimate(nb.survival(kernels, bw.lam, float(y)), nb.count, nb.weight_sum)


def kernel_moment(ds: Dataset, k: KernelK, h: float, x, tau_order: float = 1.0) -> float:
    """Empirical mean of K(d(x, X_i)/h) ** tau_order over the whole sample."""
    if not h > 0:
        raise ValueError("h must be positive")
    if not tau_order > 0:
        raise ValueError("moment order must be positive")
    t = ds.distances(x) / h
    t = t[t <= 1.0]
    if t.size == 0:
        return 0.0
    return float(np.sum(k(t) ** tau_order) / ds.n)


def small_ball_estimate(ds: Dataset, x, h: float) -> float:
    """Fraction of covariates falling in the closed ball B(x, h)."""
    return kernel_moment(ds, KernelK("uniform"), h, x, 1.0)

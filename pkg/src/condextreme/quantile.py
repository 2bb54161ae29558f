"""Extreme conditional quantiles by generalized inversion of the kernel csf.

The estimator ``inf{t : S(t | x) <= alpha}`` can never exceed the largest
response in the covariate ball plus lambda. At very small ``alpha`` it
saturates there, which is why :mod:`condextreme.weissman` exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Bandwidths, Dataset, KernelPair, TauGrid
from .csf import Neighborhood, kernel_moment, neighborhood, small_ball_estimate
from .errors import EmptyNeighborhood, InvalidLevel

MAX_BISECTION_STEPS = 200
# well inside the 1e-10 contract; results are then stable under rescaling
RELATIVE_TOLERANCE = 1e-15


@dataclass(frozen=True)
class QuantileEstimate:
    value: float
    level: float
    sigma_hat: float
    neighborhood_count: int


def _check_level(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidLevel(f"quantile level must lie in (0, 1), got {alpha}")
    return alpha


def invert_survival(nb: Neighborhood, kernels: KernelPair, lam: float, alpha: float) -> float:
    """Leftmost t with survival(t) <= alpha, found by bisection.

    The bracket starts where the survival estimate is 1 and ends where it is
    0. The upper end always satisfies survival <= alpha and is the value
    returned, so flat stretches resolve to their left edge.
    """
    lo = float(nb.responses.min()) - lam - 1.0
    hi = float(nb.responses.max()) + lam
    if lam == 0.0:
        # the indicator still counts the maximum itself
        hi = float(np.nextafter(hi, np.inf))
    if not nb.exceeds(kernels, lam, lo, alpha):
        return lo
    for _ in range(MAX_BISECTION_STEPS):
        if hi - lo <= RELATIVE_TOLERANCE * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if not nb.exceeds(kernels, lam, mid, alpha):
            hi = mid
        else:
            lo = mid
    return hi


def _sigma(nb_moment: float, n: int, alpha: float) -> float:
    if not nb_moment > 0:
        raise EmptyNeighborhood("empirical kernel moment is zero")
    return 1.0 / math.sqrt(n * nb_moment * alpha)


def quantile_estimate(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x,
                      alpha: float) -> QuantileEstimate:
    """Kernel estimate of the conditional quantile of exceedance level alpha."""
    alpha = _check_level(alpha)
    nb = neighborhood(ds, kernels.k, bw.h, x)
    value = invert_survival(nb, kernels, bw.lam, alpha)
    sigma = _sigma(nb.weight_sum / ds.n, ds.n, alpha)
    return QuantileEstimate(value, alpha, sigma, nb.count)


def quantile_path(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x, alpha: float,
                  grid: TauGrid) -> np.ndarray:
    """Quantile estimates at levels tau_1*alpha, ..., tau_J*alpha.

    Since the taus decrease, the returned sequence is nondecreasing.
    """
    levels = [_check_level(tau * alpha) for tau in grid]
    nb = neighborhood(ds, kernels.k, bw.h, x)
    return np.array([invert_survival(nb, kernels, bw.lam, a) for a in levels])


def sigma_n(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x, alpha: float) -> float:
    """(n * mu_hat * alpha) ** -1/2 with mu_hat the empirical first kernel moment."""
    alpha = _check_level(alpha)
    return _sigma(kernel_moment(ds, kernels.k, bw.h, x, 1.0), ds.n, alpha)


def rate_diagnostics(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x, alpha: float,
                     estimate: QuantileEstimate | None = None) -> dict[str, float]:
    """Finite-sample stand-ins for the rate conditions on (alpha, h, lambda).

    Returns n*phi_hat*alpha (should be large), sigma^-1 * h * |log alpha| and
    sigma^-1 * lambda / q_hat (both should be small).
    """
    if estimate is None:
        estimate = quantile_estimate(ds, kernels, bw, x, alpha)
    inv_sigma = 1.0 / estimate.sigma_hat
    q_hat = estimate.value
    return {
        "n_phi_alpha": ds.n * small_ball_estimate(ds, x, bw.h) * alpha,
        "bias_h_log_alpha": inv_sigma * bw.h * abs(math.log(alpha)),
        "bias_lambda_over_q": inv_sigma * bw.lam / abs(q_hat) if q_hat != 0 else math.inf,
    }

"""Weissman-type extrapolation of conditional quantiles beyond the sample."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Bandwidths, Dataset, KernelPair, TauGrid
from .errors import InvalidAnchor, InvalidExtrapolation, InvalidLevel
from .quantile import quantile_estimate
from .tailindex import PhiSpec, tail_index


@dataclass(frozen=True)
class ExtrapolatedQuantile:
    value: float
    anchor_level: float
    target_level: float
    gamma_used: float
    extrapolation_factor: float
    anchor_value: float


def weissman_quantile(anchor_q: float, alpha: float, beta: float,
                      gamma_hat: float) -> ExtrapolatedQuantile:
    """anchor_q * (alpha / beta) ** gamma_hat, for 0 < beta <= alpha < 1."""
    if not 0.0 < alpha < 1.0:
        raise InvalidLevel(f"anchor level must lie in (0, 1), got {alpha}")
    if not beta > 0.0:
        raise InvalidLevel(f"target level must be positive, got {beta}")
    if beta > alpha:
        raise InvalidExtrapolation(
            f"target level beta={beta} exceeds anchor level alpha={alpha}"
        )
    if not (anchor_q > 0 and math.isfinite(anchor_q)):
        raise InvalidAnchor(f"anchor quantile must be positive, got {anchor_q}")
    factor = (alpha / beta) ** gamma_hat
    return ExtrapolatedQuantile(anchor_q * factor, alpha, beta, gamma_hat, factor, anchor_q)


def extrapolate(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x, alpha: float,
                beta: float, grid: TauGrid, spec: PhiSpec) -> ExtrapolatedQuantile:
    """Kernel quantile at ``alpha`` pushed out to ``beta`` with an estimated tail index."""
    if beta > alpha:
        raise InvalidExtrapolation(
            f"target level beta={beta} exceeds anchor level alpha={alpha}"
        )
    anchor = quantile_estimate(ds, kernels, bw, x, alpha)
    gamma_hat = tail_index(ds, kernels, bw, x, alpha, grid, spec).gamma_hat
    return weissman_quantile(anchor.value, alpha, beta, gamma_hat)

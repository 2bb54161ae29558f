"""Conditional tail-index estimators built from log-quantile paths.

An estimator is defined by a functional ``phi`` on R^J that is invariant to
adding a constant to every coordinate and homogeneous of degree one along
the reference vector ``v = (log(1/tau_1), ..., log(1/tau_J))``. The estimate is

    phi(log q_hat(tau_1 alpha), ..., log q_hat(tau_J alpha)) / phi(v).

Most members are built from ``m_p(x) = sum_j (x_j - x_1) ** p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Bandwidths, Dataset, KernelPair, TauGrid
from .errors import DegenerateGrid, DegeneratePhi, InvalidConfiguration
from .quantile import quantile_path

PHI_KINDS = ("hill", "gomes-martins", "segers", "caeiro-gomes", "pickands")
PICKANDS_TAUS = (4.0, 2.0, 1.0)


@dataclass(frozen=True)
class PhiSpec:
    """Which member of the phi family to use, with its parameters.

    ``p`` is used by gomes-martins (m_p / m_1^(p-1)), segers (m_p^(1/p)) and
    caeiro-gomes (m_{p theta}^(1/theta) / m_{p-1}, needs p >= 1); ``theta``
    only by caeiro-gomes.
    """

    kind: str = "hill"
    p: float = 2.0
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in PHI_KINDS:
            raise InvalidConfiguration(f"unknown phi kind {self.kind!r}")
        if self.kind in ("gomes-martins", "segers", "caeiro-gomes") and not self.p > 0:
            raise InvalidConfiguration("p must be positive")
        if self.kind == "caeiro-gomes":
            if self.p < 1:
                raise InvalidConfiguration("caeiro-gomes needs p >= 1")
            if not self.theta > 0:
                raise InvalidConfiguration("caeiro-gomes needs theta > 0")


@dataclass(frozen=True)
class TailIndexEstimate:
    gamma_hat: float
    variance_factor: float
    grid: TauGrid
    level: float


def m_p(x, p: float) -> float:
    x = np.asarray(x, dtype=float)
    d = x[1:] - x[0]
    if p == 0:
        return float(x.size)
    with np.errstate(invalid="ignore"):
        return float(np.sum(d ** p))


def check_grid(spec: PhiSpec, grid: TauGrid) -> None:
    """Reject grids the chosen phi is not defined for."""
    if spec.kind == "pickands":
        if grid.taus != PICKANDS_TAUS:
            raise DegenerateGrid("pickands is defined on the grid (4, 2, 1) only")
    elif grid.taus[0] != 1.0:
        raise DegenerateGrid(
            f"{spec.kind} uses q_hat(alpha) as reference level and needs tau_1 = 1"
        )


def phi_eval(spec: PhiSpec, v) -> float:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise DegeneratePhi("phi expects a non-empty vector")
    kind = spec.kind
    if kind == "pickands":
        if v.size != 3:
            raise DegeneratePhi("pickands phi needs exactly three coordinates")
        e = np.exp(v - v.max())
        num, den = e[1] - e[0], e[2] - e[1]
        if den == 0 or num == 0 or (num > 0) != (den > 0):
            raise DegeneratePhi(
                "pickands phi undefined: quantile spacings are zero or of opposite sign"
            )
        return math.log(num / den)
    try:
        if kind == "hill":
            value = m_p(v, 1.0)
        elif kind == "gomes-martins":
            value = m_p(v, spec.p) / m_p(v, 1.0) ** (spec.p - 1.0)
        elif kind == "segers":
            value = m_p(v, spec.p) ** (1.0 / spec.p)
        else:
            value = m_p(v, spec.p * spec.theta) ** (1.0 / spec.theta) / m_p(v, spec.p - 1.0)
    except (ZeroDivisionError, OverflowError):
        value = math.nan
    if isinstance(value, complex) or not math.isfinite(value):
        raise DegeneratePhi(f"{kind} phi is not finite at {v.tolist()}")
    return value


def phi_gradient(spec: PhiSpec, v, method: str = "auto") -> np.ndarray:
    """Gradient of phi at ``v``.

    Hill and Pickands have analytic gradients; every other kind, or
    ``method="numeric"``, uses central differences with step
    ``1e-6 * max(1, max|v|)``.
    """
    v = np.asarray(v, dtype=float)
    if method not in ("auto", "analytic", "numeric"):
        raise ValueError(f"unknown gradient method {method!r}")
    analytic = spec.kind in ("hill", "pickands")
    if method == "analytic" and not analytic:
        raise ValueError(f"no analytic gradient for {spec.kind}")
    if method != "numeric" and analytic:
        phi_eval(spec, v)
        if spec.kind == "hill":
            g = np.ones_like(v)
            g[0] = -(v.size - 1.0)
            return g
        e = np.exp(v - v.max())
        d21, d32 = e[1] - e[0], e[2] - e[1]
        return np.array([-e[0] / d21, e[1] / d21 + e[1] / d32, -e[2] / d32])
    step = 1e-6 * max(1.0, float(np.max(np.abs(v))))
    g = np.empty_like(v)
    for j in range(v.size):
        up, down = v.copy(), v.copy()
        up[j] += step
        down[j] -= step
        g[j] = (phi_eval(spec, up) - phi_eval(spec, down)) / (2.0 * step)
    return g


def _reference(spec: PhiSpec, grid: TauGrid) -> tuple[np.ndarray, float]:
    check_grid(spec, grid)
    v = grid.log_inverse
    try:
        denom = phi_eval(spec, v)
    except DegeneratePhi as exc:
        raise DegenerateGrid(f"phi is undefined on the reference vector: {exc}") from None
    if denom == 0:
        raise DegenerateGrid("phi vanishes on the reference vector log(1/tau)")
    return v, denom


def gamma_from_quantiles(quantiles, grid: TauGrid, spec: PhiSpec) -> float:
    """Tail index from a quantile path q(tau_1 alpha), ..., q(tau_J alpha)."""
    _, denom = _reference(spec, grid)
    q = np.asarray(quantiles, dtype=float)
    if q.shape != (len(grid),):
        raise DegeneratePhi(f"expected {len(grid)} quantiles, got {q.shape}")
    if np.any(q <= 0):
        raise DegeneratePhi("quantiles must be positive to take logarithms")
    return phi_eval(spec, np.log(q)) / denom


def tail_index(ds: Dataset, kernels: KernelPair, bw: Bandwidths, x, alpha: float,
               grid: TauGrid, spec: PhiSpec) -> TailIndexEstimate:
    _reference(spec, grid)
    path = quantile_path(ds, kernels, bw, x, alpha, grid)
    gamma_hat = gamma_from_quantiles(path, grid, spec)
    if gamma_hat > 0:
        factor = asymptotic_variance(spec, gamma_hat, grid) / gamma_hat ** 2
    else:
        factor = math.nan
    return TailIndexEstimate(gamma_hat, factor, grid, float(alpha))


def asymptotic_variance(spec: PhiSpec, gamma: float, grid: TauGrid,
                        gradient: str = "auto") -> float:
    """gamma^2 g' Sigma g / phi(v)^2 with g the gradient of phi at gamma*v.

    Sigma[j, j'] = 1 / tau_min(j, j') is the limiting covariance of the
    normalized log-quantile errors along the grid.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    v, denom = _reference(spec, grid)
    g = phi_gradient(spec, gamma * v, method=gradient)
    return gamma ** 2 * float(g @ grid.sigma() @ g) / denom ** 2


def variance_hill_closed(gamma: float, grid: TauGrid) -> float:
    taus = np.array(grid.taus)
    J = taus.size
    j = np.arange(1, J + 1)
    denom = float(np.sum(np.log(1.0 / taus))) ** 2
    if denom == 0:
        raise DegenerateGrid("sum of log(1/tau_j) is zero")
    return gamma ** 2 * (float(np.sum((2 * (J - j) + 1) / taus)) - J ** 2) / denom


def variance_hill_harmonic(gamma: float, J: int) -> float:
    """Closed form for tau_j = 1/j: gamma^2 J(J-1)(2J-1) / (6 log^2 J!)."""
    if J < 2:
        raise DegenerateGrid("need J >= 2")
    return gamma ** 2 * J * (J - 1) * (2 * J - 1) / (6.0 * math.lgamma(J + 1) ** 2)


def variance_pickands_closed(gamma: float) -> float:
    return (gamma ** 2 * (2.0 ** (2 * gamma + 1) + 1)
            / (4.0 * math.log(2.0) ** 2 * (2.0 ** gamma - 1) ** 2))


def variance_scan(gamma: float = 1.0, jmax: int = 15) -> list[tuple[int, float]]:
    """V_H over harmonic grids J = 2..jmax."""
    return [(J, variance_hill_closed(gamma, TauGrid.harmonic(J))) for J in range(2, jmax + 1)]

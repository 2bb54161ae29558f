"""Functional kernel estimators of extreme conditional quantiles.

Heavy-tailed responses Y are observed with covariates X in a metric space
(scalars, vectors or discretized curves). The package estimates the
conditional survival function and its extreme quantiles by kernel
smoothing, derives conditional tail-index estimators (kernel Hill, kernel
Pickands and relatives), extrapolates with a Weissman factor, and checks
the asymptotic normal laws of these estimators by simulation.
"""
from .core import (
    Bandwidths,
    Dataset,
    KernelK,
    KernelPair,
    KernelQ,
    Metric,
    TauGrid,
    distance,
    make_dataset,
    read_csv,
    write_csv,
)
from .csf import CsfEstimate, csf_estimate, kernel_moment, small_ball_estimate
from .errors import (
    DataFormatError,
    DegenerateGrid,
    DegeneratePhi,
    DimensionMismatch,
    EmptyNeighborhood,
    EstimationError,
    InvalidAnchor,
    InvalidConfiguration,
    InvalidExtrapolation,
    InvalidLevel,
    UnstableConfiguration,
)
from .quantile import QuantileEstimate, quantile_estimate, quantile_path, sigma_n
from .tailindex import (
    PhiSpec,
    TailIndexEstimate,
    asymptotic_variance,
    gamma_from_quantiles,
    phi_eval,
    phi_gradient,
    tail_index,
    variance_hill_closed,
    variance_pickands_closed,
)
from .weissman import ExtrapolatedQuantile, extrapolate, weissman_quantile

__version__ = "0.1.0"

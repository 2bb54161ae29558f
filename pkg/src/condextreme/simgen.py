"""Heavy-tailed conditional models with exact oracles, and a Monte Carlo harness.

Two families are available, both with support [1, inf) and survival c(x) at 1:

* ``exact-pareto``: S(y | x) = c(x) y^(-1/gamma(x)); the auxiliary function
  epsilon is identically zero.
* ``burr``: S(y | x) = c(x) ((1 + y^(-rho/gamma(x))) / 2)^(1/rho), rho < 0, with
  quantile q(alpha | x) = (2 (alpha/c)^rho - 1)^(-gamma/rho). Here
  epsilon(u | x) = (1/gamma) / (1 + u^(-rho/gamma)), which is regularly varying
  in u with index rho/gamma (second-order parameter rho on the quantile scale).
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .core import Bandwidths, Dataset, KernelPair, Metric, TauGrid
from .csf import neighborhood
from .errors import EstimationError, InvalidConfiguration, InvalidLevel, UnstableConfiguration
from .quantile import invert_survival
from .tailindex import PhiSpec, asymptotic_variance, gamma_from_quantiles
from .weissman import weissman_quantile

GammaFn = Callable[[np.ndarray], np.ndarray]


def constant(value: float) -> GammaFn:
    """Covariate function returning ``value`` for every row."""
    def fn(X):
        return np.full(np.atleast_2d(X).shape[0], float(value))
    fn.description = f"{value:g}"
    return fn


def linear(intercept: float, slope: float) -> GammaFn:
    """``intercept + slope * mean(row)``; for scalar covariates simply a + b x."""
    def fn(X):
        return intercept + slope * np.atleast_2d(X).mean(axis=1)
    fn.description = f"{intercept:g}+{slope:g}*x"
    return fn


@dataclass(frozen=True)
class TailModel:
    gamma_fn: GammaFn = field(default_factory=lambda: constant(0.5))
    c_fn: GammaFn = field(default_factory=lambda: constant(1.0))
    family: str = "exact-pareto"
    rho: float = -1.0

    def __post_init__(self):
        if self.family not in ("exact-pareto", "burr"):
            raise InvalidConfiguration(f"unknown tail family {self.family!r}")
        if self.family == "burr" and not self.rho < 0:
            raise InvalidConfiguration("burr second-order parameter rho must be negative")

    def gamma(self, x) -> float:
        return float(self.gamma_fn(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def c(self, x) -> float:
        return float(self.c_fn(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    # vectorized forms; gamma and c are arrays or scalars
    def _survival(self, gamma, c, y):
        y = np.maximum(y, 1.0)
        if self.family == "exact-pareto":
            return c * y ** (-1.0 / gamma)
        rho = self.rho
        return c * np.exp((np.log1p(y ** (-rho / gamma)) - math.log(2.0)) / rho)

    def _quantile(self, gamma, c, alpha):
        r = alpha / c
        if self.family == "exact-pareto":
            return r ** (-gamma)
        rho = self.rho
        return (2.0 * r ** rho - 1.0) ** (-gamma / rho)


def true_csf(model: TailModel, x, y: float) -> float:
    """Exact conditional survival; levels below the support floor 1 give c(x)."""
    return float(model._survival(model.gamma(x), model.c(x), float(y)))


def true_quantile(model: TailModel, x, alpha: float) -> float:
    c = model.c(x)
    if not 0.0 < alpha < c:
        raise InvalidLevel(f"level {alpha} outside (0, c(x)={c})")
    return float(model._quantile(model.gamma(x), c, float(alpha)))


def sample_conditional(model: TailModel, x, rng: np.random.Generator) -> float:
    """One draw of Y given X = x by inverse transform."""
    c = model.c(x)
    u = c * (1.0 - rng.random())
    return float(model._quantile(model.gamma(x), c, u))


def epsilon_numeric(model: TailModel, x, u: float) -> float:
    """epsilon(u | x) = 1/gamma + d log S / d log u, by central differences."""
    if not u > 1:
        raise ValueError("epsilon is evaluated for u > 1")
    gamma, c = model.gamma(x), model.c(x)
    step = 1e-5
    lu = math.log(u)
    hi = math.log(model._survival(gamma, c, math.exp(lu + step)))
    lo = math.log(model._survival(gamma, c, math.exp(lu - step)))
    return 1.0 / gamma + (hi - lo) / (2.0 * step)


# ---------------------------------------------------------------------------
# designs
# ---------------------------------------------------------------------------

COVARIATE_LAWS = ("uniform-scalar", "uniform-vector", "random-curves")


@dataclass(frozen=True)
class Design:
    """Covariate law and sample size. ``p`` is the vector dimension or curve grid size."""

    covariate_law: str = "uniform-scalar"
    n: int = 1000
    p: int = 1

    def __post_init__(self):
        if self.covariate_law not in COVARIATE_LAWS:
            raise InvalidConfiguration(f"unknown covariate law {self.covariate_law!r}")
        if self.n < 1:
            raise InvalidConfiguration("design needs n >= 1")
        if self.covariate_law == "random-curves" and self.p < 2:
            raise InvalidConfiguration("random curves need at least two grid points")

    def covariates(self, rng: np.random.Generator) -> np.ndarray:
        if self.covariate_law == "uniform-scalar":
            return rng.random((self.n, 1))
        if self.covariate_law == "uniform-vector":
            return rng.random((self.n, self.p))
        # a*sin(2 pi t) + b*cos(2 pi t) + shift with coefficients in [0, 1]
        t = (np.arange(self.p) + 0.5) / self.p
        coef = rng.random((self.n, 3))
        return (coef[:, :1] * np.sin(2 * np.pi * t) + coef[:, 1:2] * np.cos(2 * np.pi * t)
                + coef[:, 2:])

    @property
    def kind(self) -> str:
        return {"uniform-scalar": "scalar", "uniform-vector": "vector",
                "random-curves": "curve"}[self.covariate_law]

    def metric(self) -> Metric:
        if self.kind == "scalar":
            return Metric("absolute")
        if self.kind == "vector":
            return Metric("euclidean")
        return Metric("l2", 1.0 / self.p)


def sample_dataset(design: Design, model: TailModel, seed=None) -> Dataset:
    """Draw n i.i.d. pairs; ``seed`` may be an int, SeedSequence or Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X = design.covariates(rng)
    gamma = model.gamma_fn(X)
    c = model.c_fn(X)
    u = c * (1.0 - rng.random(design.n))
    y = model._quantile(gamma, c, u)
    return Dataset(X, y, design.metric(), design.kind)


# ---------------------------------------------------------------------------
# Monte Carlo validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McConfig:
    """What to estimate in every replicate.

    ``grid`` gives the quantile levels tau_j*alpha, ``csf_multipliers`` the
    survival levels a_j*y_n with y_n = ``y_level`` (default: the true quantile
    of order alpha). A tail index is estimated on ``tail_grid`` when given,
    and Weissman extrapolations to each of ``betas``.
    """

    x: tuple[float, ...] = (0.5,)
    kernels: KernelPair = field(default_factory=KernelPair)
    bw: Bandwidths = field(default_factory=lambda: Bandwidths(0.1, 0.01))
    alpha: float = 0.05
    grid: TauGrid = field(default_factory=lambda: TauGrid((1.0,)))
    csf_multipliers: tuple[float, ...] = (1.0, 2.0)
    y_level: float | None = None
    spec: PhiSpec | None = None
    tail_grid: TauGrid | None = None
    betas: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        if not 0 < self.alpha < 1:
            raise InvalidConfiguration("alpha must lie in (0, 1)")
        if any(a <= 0 for a in self.csf_multipliers) or any(
                a >= b for a, b in zip(self.csf_multipliers, self.csf_multipliers[1:])):
            raise InvalidConfiguration("csf multipliers must be positive and increasing")
        if self.betas and (self.spec is None or self.tail_grid is None):
            raise InvalidConfiguration("extrapolation needs a phi spec and a tail grid")
        if any(b > self.alpha or b <= 0 for b in self.betas):
            raise InvalidConfiguration("every beta must lie in (0, alpha]")


@dataclass
class McReport:
    replicates: int
    failures: int
    gamma: float
    sigma_mean: float
    quantile_errors: np.ndarray
    quantile_target: np.ndarray
    csf_errors: np.ndarray
    csf_target: np.ndarray
    tail_errors: np.ndarray | None = None
    tail_target: float | None = None
    weissman_relative: np.ndarray | None = None
    weissman_normalized: np.ndarray | None = None
    betas: tuple[float, ...] = ()
    diagnostics: dict[str, float] = field(default_factory=dict)

    @staticmethod
    def _cov(errors: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.cov(errors, rowvar=False, ddof=1))

    @property
    def quantile_mean(self) -> np.ndarray:
        return self.quantile_errors.mean(axis=0)

    @property
    def quantile_cov(self) -> np.ndarray:
        return self._cov(self.quantile_errors)

    @property
    def csf_mean(self) -> np.ndarray:
        return self.csf_errors.mean(axis=0)

    @property
    def csf_cov(self) -> np.ndarray:
        return self._cov(self.csf_errors)

    def covariance_rows(self) -> list[tuple[str, int, int, float, float]]:
        rows = []
        for block, emp, target in (("quantile", self.quantile_cov, self.quantile_target),
                                   ("csf", self.csf_cov, self.csf_target)):
            J = target.shape[0]
            for j in range(J):
                for k in range(J):
                    rows.append((block, j + 1, k + 1, float(emp[j, k]), float(target[j, k])))
        if self.tail_errors is not None:
            rows.append(("tail_index", 1, 1, float(np.var(self.tail_errors, ddof=1)),
                         float(self.tail_target)))
        if self.weissman_normalized is not None:
            for b in range(len(self.betas)):
                rows.append(("weissman", b + 1, b + 1,
                             float(np.var(self.weissman_normalized[:, b], ddof=1)),
                             float(self.tail_target)))
        return rows

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["block", "j", "k", "empirical", "target"])
            for block, j, k, emp, target in self.covariance_rows():
                writer.writerow([block, j, k, f"{emp:.10g}", f"{target:.10g}"])

    def summary(self) -> str:
        fmt = "{:.10g}".format
        lines = [
            f"replicates: {self.replicates} (failed: {self.failures})",
            f"gamma(x): {fmt(self.gamma)}  mean sigma_hat: {fmt(self.sigma_mean)}",
            "quantile normalized errors",
            "  mean: " + " ".join(fmt(v) for v in self.quantile_mean),
        ]
        lines += _matrix_lines(self.quantile_cov, self.quantile_target)
        lines.append("survival normalized errors")
        lines.append("  mean: " + " ".join(fmt(v) for v in self.csf_mean))
        lines += _matrix_lines(self.csf_cov, self.csf_target)
        if self.tail_errors is not None:
            lines.append("tail index normalized errors")
            lines.append(f"  mean: {fmt(self.tail_errors.mean())}  variance: "
                         f"{fmt(np.var(self.tail_errors, ddof=1))}  target: {fmt(self.tail_target)}")
        if self.weissman_relative is not None:
            lines.append("weissman extrapolation")
            for b, beta in enumerate(self.betas):
                lines.append(
                    f"  beta={fmt(beta)}  median |rel err|: "
                    f"{fmt(np.median(np.abs(self.weissman_relative[:, b])))}  "
                    f"normalized sd: {fmt(np.std(self.weissman_normalized[:, b], ddof=1))}"
                )
        lines.append("diagnostics")
        lines += [f"  {k}: {fmt(v)}" for k, v in self.diagnostics.items()]
        return "\n".join(lines)


def _matrix_lines(emp, target):
    fmt = "{:.10g}".format
    lines = ["  covariance (empirical | target):"]
    for row_e, row_t in zip(emp, target):
        lines.append("    " + " ".join(fmt(v) for v in row_e) + " | "
                     + " ".join(fmt(v) for v in row_t))
    return lines


def quantile_target(gamma: float, grid: TauGrid) -> np.ndarray:
    """gamma^2 Sigma with Sigma[j, j'] = 1/tau_min(j, j')."""
    return gamma ** 2 * grid.sigma()


def csf_target(gamma: float, multipliers) -> np.ndarray:
    """C[j, j'] = a_min(j, j') ** (1/gamma)."""
    a = np.asarray(multipliers, dtype=float)
    idx = np.arange(a.size)
    return a[np.minimum.outer(idx, idx)] ** (1.0 / gamma)


def _replicate(design: Design, model: TailModel, cfg: McConfig, truth: dict, seed):
    try:
        ds = sample_dataset(design, model, seed)
        nb = neighborhood(ds, cfg.kernels.k, cfg.bw.h, np.array(cfg.x))
        lam = cfg.bw.lam
        mu = nb.weight_sum / ds.n
        sigma = 1.0 / math.sqrt(ds.n * mu * cfg.alpha)

        q_hat = np.array([invert_survival(nb, cfg.kernels, lam, tau * cfg.alpha)
                          for tau in cfg.grid])
        q_err = (q_hat / truth["q"] - 1.0) / sigma

        s_hat = np.array([nb.survival(cfg.kernels, lam, y) for y in truth["y_levels"]])
        s_err = math.sqrt(ds.n * mu * truth["s_ref"]) * (s_hat / truth["s"] - 1.0)

        out = {"q": q_err, "s": s_err, "sigma": sigma, "count": nb.count,
               "inv_sigma_q": lam / sigma / q_hat[0]}
        if cfg.tail_grid is not None:
            path = np.array([invert_survival(nb, cfg.kernels, lam, tau * cfg.alpha)
                             for tau in cfg.tail_grid])
            gamma_hat = gamma_from_quantiles(path, cfg.tail_grid, cfg.spec)
            out["t"] = (gamma_hat - truth["gamma"]) / sigma
            if cfg.betas:
                anchor = invert_survival(nb, cfg.kernels, lam, cfg.alpha)
                rel = np.array([
                    weissman_quantile(anchor, cfg.alpha, b, gamma_hat).value / qb - 1.0
                    for b, qb in zip(cfg.betas, truth["q_beta"])
                ])
                out["w"] = rel
                out["wn"] = rel / sigma / np.log(cfg.alpha / np.array(cfg.betas))
        return out
    except EstimationError:
        return None


def monte_carlo(design: Design, model: TailModel, config: McConfig, replicates: int,
                seed=0, workers: int = 1) -> McReport:
    """Regenerate the data ``replicates`` times and collect normalized errors.

    Replicate r uses the r-th child of ``SeedSequence(seed)``; results are
    merged by replicate index, so the report does not depend on ``workers``.
    """
    if replicates < 2:
        raise InvalidConfiguration("monte carlo needs at least two replicates")
    cfg = config
    x = np.array(cfg.x)
    gamma = model.gamma(x)
    y_ref = cfg.y_level if cfg.y_level is not None else true_quantile(model, x, cfg.alpha)
    truth = {
        "gamma": gamma,
        "q": np.array([true_quantile(model, x, tau * cfg.alpha) for tau in cfg.grid]),
        "y_levels": [a * y_ref for a in cfg.csf_multipliers],
        "s": np.array([true_csf(model, x, a * y_ref) for a in cfg.csf_multipliers]),
        "s_ref": true_csf(model, x, y_ref),
        "q_beta": [true_quantile(model, x, b) for b in cfg.betas],
    }
    children = np.random.SeedSequence(seed).spawn(replicates)

    def run(child):
        return _replicate(design, model, cfg, truth, np.random.default_rng(child))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(c) for c in children]

    ok = [r for r in results if r is not None]
    failures = replicates - len(ok)
    if failures > 0.1 * replicates:
        raise UnstableConfiguration(
            f"{failures} of {replicates} replicates failed; widen h or raise alpha"
        )
    if len(ok) < 2:
        raise UnstableConfiguration("fewer than two successful replicates")

    sigma_mean = float(np.mean([r["sigma"] for r in ok]))
    report = McReport(
        replicates=replicates,
        failures=failures,
        gamma=gamma,
        sigma_mean=sigma_mean,
        quantile_errors=np.array([r["q"] for r in ok]),
        quantile_target=quantile_target(gamma, cfg.grid),
        csf_errors=np.array([r["s"] for r in ok]),
        csf_target=csf_target(gamma, cfg.csf_multipliers),
        betas=tuple(cfg.betas),
    )
    if cfg.tail_grid is not None:
        report.tail_errors = np.array([r["t"] for r in ok])
        report.tail_target = asymptotic_variance(cfg.spec, gamma, cfg.tail_grid)
        if cfg.betas:
            report.weissman_relative = np.array([r["w"] for r in ok])
            report.weissman_normalized = np.array([r["wn"] for r in ok])

    inv_sigma = 1.0 / sigma_mean
    report.diagnostics = {
        "mean_neighborhood_count": float(np.mean([r["count"] for r in ok])),
        "n_phi_alpha": float(np.mean([r["count"] for r in ok])) * cfg.alpha,
        "bias_h_log_alpha": inv_sigma * cfg.bw.h * abs(math.log(cfg.alpha)),
        "bias_lambda_over_q": float(np.mean([r["inv_sigma_q"] for r in ok])),
    }
    tau1_level = (cfg.tail_grid or cfg.grid).taus[0] * cfg.alpha
    if tau1_level < model.c(x) and model.family == "burr":
        eps = epsilon_numeric(model, x, true_quantile(model, x, tau1_level))
        report.diagnostics["bias_epsilon"] = inv_sigma * abs(eps)
    elif model.family == "exact-pareto":
        report.diagnostics["bias_epsilon"] = 0.0
    return report

"""Exit criteria for the package, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from condextreme.core import Bandwidths, TauGrid
from condextreme.csf import csf_estimate, neighborhood
from condextreme.quantile import quantile_estimate
from condextreme.simgen import (
    Design,
    McConfig,
    TailModel,
    constant,
    epsilon_numeric,
    monte_carlo,
    sample_dataset,
    true_csf,
    true_quantile,
)
from condextreme.tailindex import (
    PhiSpec,
    asymptotic_variance,
    gamma_from_quantiles,
    variance_hill_closed,
    variance_pickands_closed,
    variance_scan,
)
from condextreme.weissman import weissman_quantile

from _instances import random_instance

GAMMAS = (0.3, 0.5, 1.0, 2.0)
PICKANDS_GRID = TauGrid((4.0, 2.0, 1.0))
MP_SPECS = (PhiSpec("hill"), PhiSpec("gomes-martins", p=2.0), PhiSpec("segers", p=2.0),
            PhiSpec("caeiro-gomes", p=2.0, theta=1.5))

# constant-gamma validation design shared by criteria 4 and 5
GAMMA = 0.5
DESIGN = Design("uniform-scalar", 10_000)
MODEL = TailModel(constant(GAMMA))
X0 = (0.5,)
BW = Bandwidths(0.1, 0.01)
ALPHA = 0.05
SEED = 0


def _grids(rng):
    for J in range(2, 10):
        yield TauGrid.harmonic(J)
        rest = np.sort(rng.uniform(0.01, 0.99, J - 1))[::-1]
        yield TauGrid((1.0, *rest))


def test_criterion_1_exact_recovery(report_criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for gamma in GAMMAS:
        for grid in _grids(rng):
            q = (np.array(grid.taus) * ALPHA) ** -gamma
            for spec in MP_SPECS:
                worst = max(worst, abs(gamma_from_quantiles(q, grid, spec) - gamma))
        q = (np.array(PICKANDS_GRID.taus) * ALPHA) ** -gamma
        worst = max(worst, abs(gamma_from_quantiles(q, PICKANDS_GRID, PhiSpec("pickands")) - gamma))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    report_criterion(1, ok, f"max |gamma_hat - gamma| = {worst:.2e} (<= 1e-12), {elapsed:.3f}s (< 1s)")
    assert ok


def test_criterion_2_variance_closed_form(report_criterion):
    start = time.perf_counter()
    identity = all(
        6 * (sum(j * (2 * (J - j) + 1) for j in range(1, J + 1)) - J * J) == J * (J - 1) * (2 * J - 1)
        for J in range(2, 21)
    )
    closed = max(
        abs(variance_hill_closed(1.0, TauGrid.harmonic(J))
            / (J * (J - 1) * (2 * J - 1) / (6 * math.log(math.factorial(J)) ** 2)) - 1)
        for J in range(2, 21)
    )
    J_best, v_best = min(variance_scan(1.0, 15), key=lambda row: row[1])
    elapsed = time.perf_counter() - start
    ok = identity and closed <= 1e-12 and J_best == 9 and abs(v_best - 1.2448) <= 0.005 and elapsed < 1
    report_criterion(2, ok, f"integer identity {identity}, closed-form rel err {closed:.1e}, "
                            f"argmin J={J_best} value {v_best:.6f} (1.2448 +/- 0.005), {elapsed:.3f}s")
    assert ok


def test_criterion_3_quadratic_form(report_criterion):
    start = time.perf_counter()
    worst = 0.0
    for gamma in GAMMAS:
        for J in range(2, 10):
            grid = TauGrid.harmonic(J)
            generic = asymptotic_variance(PhiSpec("hill"), gamma, grid, gradient="numeric")
            worst = max(worst, abs(generic / variance_hill_closed(gamma, grid) - 1))
        generic = asymptotic_variance(PhiSpec("pickands"), gamma, PICKANDS_GRID, gradient="numeric")
        worst = max(worst, abs(generic / variance_pickands_closed(gamma) - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 1.0
    report_criterion(3, ok, f"finite-difference quadratic form vs closed forms rel err {worst:.2e} "
                            f"(<= 1e-6), {elapsed:.3f}s")
    assert ok


def test_criterion_4_quantile_normality(report_criterion):
    start = time.perf_counter()
    cfg = McConfig(x=X0, bw=BW, alpha=ALPHA, grid=TauGrid((1.0, 0.5)))
    report = monte_carlo(DESIGN, MODEL, cfg, 500, seed=SEED)
    elapsed = time.perf_counter() - start
    z = report.quantile_errors[:, 0] / GAMMA
    mean, var = float(z.mean()), float(z.var(ddof=1))
    target = GAMMA ** 2 * np.array([[1.0, 1.0], [1.0, 2.0]])
    rel = np.abs(report.quantile_cov / target - 1)
    ok = (abs(mean) <= 0.15 and 0.7 <= var <= 1.3 and rel.max() <= 0.35
          and report.failures == 0 and elapsed < 120)
    report_criterion(4, ok, f"z mean {mean:+.4f} (|.|<=0.15), var {var:.4f} ([0.7,1.3]), "
                            f"cov max rel err {rel.max():.3f} (<=0.35), {elapsed:.1f}s (< 120s)")
    assert ok


def test_criterion_5_weissman(report_criterion):
    start = time.perf_counter()
    beta = ALPHA / 100
    cfg = McConfig(x=X0, bw=BW, alpha=ALPHA, spec=PhiSpec("hill"),
                   tail_grid=TauGrid.harmonic(9), betas=(beta,))
    report = monte_carlo(DESIGN, MODEL, cfg, 200, seed=SEED)
    elapsed = time.perf_counter() - start
    median = float(np.median(np.abs(report.weissman_relative[:, 0])))
    anchor = true_quantile(MODEL, X0, ALPHA)
    oracle = weissman_quantile(anchor, ALPHA, beta, GAMMA).value
    exact_err = abs(oracle / true_quantile(MODEL, X0, beta) - 1)
    ok = median <= 0.15 and exact_err <= 1e-14 and elapsed < 120
    report_criterion(5, ok, f"median |q_W/q - 1| {median:.4f} (<= 0.15), oracle composition err "
                            f"{exact_err:.1e}, {elapsed:.1f}s (< 120s)")
    assert exact_err <= 1e-14
    assert median <= 0.15


def _csf_properties(rng):
    ds, kernels, bw, x = random_instance(rng)
    lam = bw.lam
    ys = np.sort(rng.uniform(ds.y.min() - 2, ds.y.max() + 2, 50))
    values = np.array([csf_estimate(ds, kernels, bw, x, y).value for y in ys])
    if np.any(np.diff(values) > 0) or values.min() < 0 or values.max() > 1:
        return False
    y0 = float(rng.uniform(ds.y.min(), ds.y.max()))
    base = csf_estimate(ds, kernels, bw, x, y0).value
    shift = float(rng.uniform(-10, 10))
    moved = csf_estimate(ds.with_responses(ds.y + shift), kernels, bw, x, y0 + shift).value
    c = float(rng.uniform(0.1, 10))
    scaled = csf_estimate(ds.with_responses(c * ds.y), kernels, Bandwidths(bw.h, c * lam), x,
                          c * y0).value
    if abs(moved - base) > 1e-9 or abs(scaled - base) > 1e-9:
        return False
    # away from every response the smoothed and step estimates coincide exactly
    r = np.sort(neighborhood(ds, kernels.k, bw.h, x).responses)
    r = np.concatenate([[r[0] - 2.0], r, [r[-1] + 2.0]])
    gap = int(np.argmax(np.diff(r)))
    width = r[gap + 1] - r[gap]
    if width > 0:
        mid = 0.5 * (r[gap] + r[gap + 1])
        smooth = csf_estimate(ds, kernels, Bandwidths(bw.h, width / 4), x, mid).value
        step = csf_estimate(ds, kernels, Bandwidths(bw.h, 0.0), x, mid).value
        if smooth != step:
            return False
    return True


def _inversion_consistent(rng):
    ds, kernels, bw, x = random_instance(rng)
    alpha = float(rng.uniform(0.005, 0.995))
    v = quantile_estimate(ds, kernels, bw, x, alpha).value
    s = csf_estimate(ds, kernels, bw, x, v).value
    if s > alpha + 1e-12:
        return False
    if csf_estimate(ds, kernels, bw, x, v - 1e-6 * max(1.0, abs(v))).value <= alpha:
        return False
    if bw.lam > 0:
        bound = kernels.q.max_density / bw.lam * 1e-10 * max(1.0, abs(v)) + 1e-14
        if abs(s - alpha) > bound:
            return False
    return True


def test_criterion_6_structural(report_criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    csf_ok = sum(_csf_properties(rng) for _ in range(1000))
    quant_ok = sum(_inversion_consistent(rng) for _ in range(1000))
    elapsed = time.perf_counter() - start
    ok = csf_ok == 1000 and quant_ok == 1000 and elapsed < 30
    report_criterion(6, ok, f"csf properties {csf_ok}/1000, inversion consistency {quant_ok}/1000, "
                            f"{elapsed:.1f}s (< 30s)")
    assert ok


def test_criterion_7_generator(report_criterion):
    start = time.perf_counter()
    n = 100_000
    ds = sample_dataset(Design("uniform-scalar", n), MODEL, seed=SEED)
    points = np.geomspace(1.05, 40.0, 10)
    worst = 0.0
    for y in points:
        p = true_csf(MODEL, 0.5, y)
        worst = max(worst, abs(np.mean(ds.y > y) - p) / math.sqrt(p * (1 - p) / n))
    eps_pareto = max(abs(epsilon_numeric(MODEL, 0.5, u)) for u in np.geomspace(1.01, 1e8, 30))
    burr = TailModel(constant(GAMMA), family="burr", rho=-1.0)
    eps_burr = [abs(epsilon_numeric(burr, 0.5, u)) for u in np.geomspace(2.0, 1e4, 12)]
    decays = all(b < a for a, b in zip(eps_burr, eps_burr[1:])) and eps_burr[-1] < 1e-6
    elapsed = time.perf_counter() - start
    ok = worst <= 3 and eps_pareto <= 1e-6 and decays and elapsed < 10
    report_criterion(7, ok, f"max |S_emp - S| = {worst:.2f} binomial sd (<= 3), pareto |eps| "
                            f"{eps_pareto:.1e} (<= 1e-6), burr eps decays {decays}, {elapsed:.2f}s")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

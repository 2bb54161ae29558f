import numpy as np
import pytest

from condextreme.core import Bandwidths, KernelK, KernelPair, KernelQ, make_dataset
from condextreme.csf import csf_estimate, kernel_moment, small_ball_estimate
from condextreme.errors import EmptyNeighborhood


@pytest.fixture
def toy():
    return make_dataset([0.0, 0.1, 0.9], [1.0, 3.0, 10.0])


def brute_csf(X, Y, x, y, h, lam, k=KernelK(), q=KernelQ()):
    """Loop-based evaluation of the kernel survival formula."""
    num = den = 0.0
    for xi, yi in zip(X, Y):
        w = float(k(abs(xi - x) / h))
        if lam == 0:
            s = 1.0 if yi >= y else 0.0
        else:
            s = float(q.cdf((yi - y) / lam))
        num += w * s
        den += w
    return num / den


def test_toy_value(toy):
    est = csf_estimate(toy, KernelPair(), Bandwidths(0.2, 0.1), 0.05, 2.0)
    assert est.value == 0.5
    assert est.neighborhood_count == 2
    assert est.weight_sum == 2.0


def test_toy_saturation(toy):
    bw = Bandwidths(0.2, 0.1)
    assert csf_estimate(toy, KernelPair(), bw, 0.05, 1.0 - 0.1 - 1e-9).value == 1.0
    assert csf_estimate(toy, KernelPair(), bw, 0.05, 3.0 + 0.1 + 1e-9).value == 0.0


def test_empty_neighborhood(toy):
    with pytest.raises(EmptyNeighborhood):
        csf_estimate(toy, KernelPair(), Bandwidths(0.05, 0.1), 0.5, 2.0)


def test_closed_ball():
    ds = make_dataset([0.0, 0.25], [1.0, 2.0])
    assert csf_estimate(ds, KernelPair(), Bandwidths(0.25, 0.0), 0.0, 1.5).neighborhood_count == 2


@pytest.mark.parametrize("kk", ["uniform", "bounded-linear"])
@pytest.mark.parametrize("kq", ["biweight", "triangular", "uniform"])
def test_matches_brute_force(kk, kq):
    rng = np.random.default_rng(11)
    X = rng.random(60)
    Y = rng.pareto(2.0, 60) + 1
    ds = make_dataset(X, Y)
    kernels = KernelPair(KernelK(kk), KernelQ(kq))
    for lam in (0.0, 0.05, 0.5):
        for y in (1.0, 1.3, 2.0, 4.0):
            got = csf_estimate(ds, kernels, Bandwidths(0.3, lam), 0.4, y).value
            want = brute_csf(X, Y, 0.4, y, 0.3, lam, KernelK(kk), KernelQ(kq))
            assert got == pytest.approx(want, abs=1e-13)


def test_kernel_moment():
    X = np.concatenate([np.full(20, 0.5), np.full(80, 5.0)])
    ds = make_dataset(X, np.ones(100))
    assert kernel_moment(ds, KernelK(), 0.1, 0.5, 1.0) == pytest.approx(0.2)
    assert kernel_moment(ds, KernelK(), 0.1, 0.5, 2.0) == kernel_moment(ds, KernelK(), 0.1, 0.5, 1.0)
    assert kernel_moment(ds, KernelK(), 0.1, 3.0, 1.0) == 0.0


def test_kernel_moment_bounded_linear():
    ds = make_dataset([0.0, 0.5, 2.0], [1, 1, 1])
    # K(0)=1.5, K(0.5)=1.0, third point outside
    assert kernel_moment(ds, KernelK("bounded-linear"), 1.0, 0.0, 2.0) == pytest.approx((2.25 + 1.0) / 3)


def test_small_ball(toy):
    assert small_ball_estimate(toy, 0.05, 0.2) == pytest.approx(2 / 3)
    assert small_ball_estimate(toy, 0.5, 10.0) == 1.0
    assert small_ball_estimate(toy, 5.0, 0.1) == 0.0


def test_small_ball_equals_uniform_moment():
    rng = np.random.default_rng(2)
    ds = make_dataset(rng.random(50), rng.random(50))
    assert small_ball_estimate(ds, 0.3, 0.2) == kernel_moment(ds, KernelK("uniform"), 0.2, 0.3, 1.0)


def test_curve_covariates():
    t = np.linspace(0, 1, 5)
    X = np.array([np.sin(t), np.sin(t) + 0.01, np.cos(t)])
    ds = make_dataset(X, [1.0, 5.0, 9.0], kind="curve")
    est = csf_estimate(ds, KernelPair(), Bandwidths(0.05, 0.0), np.sin(t), 3.0)
    assert est.neighborhood_count == 2
    assert est.value == 0.5

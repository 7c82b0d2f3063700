import math

import numpy as np
import pytest
from scipy import integrate

from fracou.errors import DomainError
from fracou.kernels import (
    MeanKernel,
    ResolventKernel,
    bound_m,
    bound_m2,
    bound_m3,
    deriv_bound_constant,
    empirical_kernel,
    empirical_kernel_values,
    mean_kernel,
    mean_kernel_deriv,
    mean_kernel_values,
    resolvent,
    resolvent_deriv,
    resolvent_l2_norm,
    resolvent_values,
    stationary_variance,
    tail_variance_bound,
    variance_integral,
    volterra_residual,
)
from fracou.mixing import GammaMixing, sample_alphas

E_19_AT_1 = 0.5064595543685906536309  # frozen oracle: E_1.9(-1)

MK19 = MeanKernel(1.9, GammaMixing(4.0, 1.0))
MK1 = MeanKernel(1.0, GammaMixing(4.0, 1.0))


def test_resolvent_basics():
    assert resolvent(ResolventKernel(0.0, 1.7), 3.4) == 1.0
    k = ResolventKernel(2.0, 1.0)
    for t in (0.1, 1.0, 4.0):
        assert resolvent(k, t) == pytest.approx(math.exp(-2.0 * t), rel=1e-12)
    k = ResolventKernel(1.0, 1.9)
    assert resolvent(k, 1.0) == pytest.approx(E_19_AT_1, abs=1e-12)
    with pytest.raises(DomainError):
        ResolventKernel(-1.0, 1.5)
    with pytest.raises(DomainError):
        resolvent(ResolventKernel(1.0, 1.5), -0.5)


def test_volterra_residual():
    assert volterra_residual(ResolventKernel(0.0, 1.5), 1.0) == 0.0
    assert abs(volterra_residual(ResolventKernel(2.0, 1.0), 1.0)) < 1e-9
    assert abs(volterra_residual(ResolventKernel(3.0, 1.9), 2.0)) < 1e-6


def test_resolvent_deriv():
    k = ResolventKernel(1.5, 1.0)
    assert resolvent_deriv(k, 0.7) == pytest.approx(
        -1.5 * math.exp(-1.5 * 0.7), rel=1e-12)
    # vanishing slope at the origin for rho > 1
    assert abs(resolvent_deriv(ResolventKernel(1.0, 1.9), 1e-8)) < 1e-6
    k = ResolventKernel(2.0, 1.9)
    h = 1e-5
    fd = (resolvent(k, 1.0 + h) - resolvent(k, 1.0 - h)) / (2 * h)
    assert abs(resolvent_deriv(k, 1.0) - fd) < 1e-6


def test_empirical_kernel():
    assert empirical_kernel([0.5, 0.5, 0.5], 1.9, 1.3) == pytest.approx(
        resolvent(ResolventKernel(0.5, 1.9), 1.3), rel=1e-14)
    assert empirical_kernel([0.1, 2.0, 5.0], 1.9, 0.0) == 1.0
    with pytest.raises(DomainError):
        empirical_kernel([], 1.9, 1.0)


def test_empirical_kernel_lln_against_mean_kernel():
    alphas = sample_alphas(GammaMixing(4.0, 1.0), 10**4, 21)
    t = 1.0
    per = ml_spread = np.array([resolvent(ResolventKernel(float(a), 1.9), t)
                                for a in alphas[:500]])
    est = empirical_kernel(alphas, 1.9, t)
    # spread estimated from a 500-rate subsample, scaled to the full n
    se = float(np.std(ml_spread, ddof=1)) / math.sqrt(alphas.size)
    assert abs(est - mean_kernel(MK19, t)) < 4.0 * se


def test_mean_kernel_routes_and_closed_form():
    assert mean_kernel(MK19, 0.0) == 1.0
    mu, lam = 4.0, 2.0
    mk = MeanKernel(1.0, GammaMixing(mu, lam))
    for t in (0.2, 1.0, 7.0, 123.0):
        assert mean_kernel(mk, t) == pytest.approx((lam / (t + lam)) ** mu,
                                                   abs=1e-10)
    # vectorized values agree with scalar routing everywhere
    ts = np.geomspace(1e-3, 300.0, 60)
    vec = mean_kernel_values(MK19, ts)
    scal = np.array([mean_kernel(MK19, float(t)) for t in ts])
    assert np.max(np.abs(vec - scal)) < 1e-9


def test_mean_kernel_deriv_closed_form_and_fd():
    mu, lam = 4.0, 1.0
    mk = MeanKernel(1.0, GammaMixing(mu, lam))
    for t in (0.5, 2.0):
        expected = -mu * lam**mu * (t + lam) ** (-mu - 1.0)
        assert mean_kernel_deriv(mk, t) == pytest.approx(expected, rel=1e-10)
    h = 1e-5
    fd = (mean_kernel(MK19, 1.0 + h) - mean_kernel(MK19, 1.0 - h)) / (2 * h)
    assert abs(mean_kernel_deriv(MK19, 1.0) - fd) < 1e-5
    # uniform bound by the envelope constant times the (1/rho)-moment
    from fracou.mixing import moment_frac

    ts = np.linspace(1e-3, 5.0, 200)
    from fracou.kernels import mean_kernel_deriv_values

    dvals = mean_kernel_deriv_values(MK19, ts)
    limit = deriv_bound_constant(1.9) * moment_frac(MK19.mixing, 1.0 / 1.9)
    assert np.max(np.abs(dvals)) <= limit
    with pytest.raises(DomainError):
        mean_kernel_deriv(MeanKernel(0.9, GammaMixing(4.0, 1.0)), 1.0)


def test_variance_integral():
    assert variance_integral(MK19, 0.0) == 0.0
    assert variance_integral(MK1, 1.0) == pytest.approx((1 - 2.0**-7) / 7.0,
                                                        rel=1e-9)
    ts = [0.5, 1.0, 2.0, 5.0]
    vals = [variance_integral(MK19, t) for t in ts]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # derivative of the integral recovers the squared kernel
    h = 1e-4
    num = (variance_integral(MK19, 1.0 + h) - variance_integral(MK19, 1.0 - h)) / (2 * h)
    assert num == pytest.approx(mean_kernel(MK19, 1.0) ** 2, rel=1e-5)


def test_resolvent_l2_norm():
    for a in (0.5, 1.0, 3.0):
        assert resolvent_l2_norm(ResolventKernel(a, 1.0)) == pytest.approx(
            1.0 / (2.0 * a), rel=1e-10)
    # exact scaling in alpha
    vals = [resolvent_l2_norm(ResolventKernel(a, 1.9)) * a ** (1.0 / 1.9)
            for a in (0.5, 1.0, 2.0, 8.0)]
    assert max(vals) - min(vals) < 1e-8 * vals[0]
    # brute truncated Riemann sum at doubled range
    du = 1e-3
    us = np.arange(1, int(600.0 / du)) * du
    b = float(np.sum(resolvent_values(ResolventKernel(1.0, 1.9), us) ** 2) * du)
    assert abs(resolvent_l2_norm(ResolventKernel(1.0, 1.9)) - b) < 1e-3
    with pytest.raises(DomainError):
        resolvent_l2_norm(ResolventKernel(0.0, 1.9))
    with pytest.raises(DomainError):
        resolvent_l2_norm(ResolventKernel(1.0, 0.5))


def test_tail_variance_bound_dominates_and_decays():
    for T in (5.0, 10.0, 40.0):
        assert tail_variance_bound(MK19, 2 * T) < tail_variance_bound(MK19, T)
    for T in (10.0, 50.0):
        direct, _ = integrate.quad(
            lambda v: math.exp(v) * mean_kernel(MK19, math.exp(v)) ** 2,
            math.log(T), math.log(2000.0), limit=300)
        assert tail_variance_bound(MK19, T) >= direct
    Ts = np.geomspace(10.0, 1000.0, 8)
    slope = np.polyfit(np.log(Ts),
                       np.log([tail_variance_bound(MK19, T) for T in Ts]), 1)[0]
    assert abs(slope - (1.0 - 2.0 * 1.9)) < 0.05
    with pytest.raises(DomainError):
        tail_variance_bound(MeanKernel(1.9, GammaMixing(0.2, 1.0)), 10.0)


def test_stationary_variance():
    assert stationary_variance(MK1, 1e-6) == pytest.approx(1.0 / 7.0, abs=1e-6)
    # bracket validity and stability under tighter tolerance
    v1 = stationary_variance(MK19, 1e-4)
    v2 = stationary_variance(MK19, 1e-5)
    assert abs(v1 - v2) < 1e-4
    head = variance_integral(MK19, 64.0)
    assert head <= v2 <= head + tail_variance_bound(MK19, 64.0)
    with pytest.raises(DomainError):
        stationary_variance(MeanKernel(1.9, GammaMixing(0.2, 1.0)), 1e-4)


def test_bound_constants():
    for rho in (1.1, 1.5, 1.9):
        assert bound_m(rho) > 1.0
        assert bound_m2(rho) > 0.0
        assert bound_m3(rho) > 0.0
    assert bound_m(1.0) == pytest.approx(1.1, rel=1e-9)
    with pytest.raises(DomainError):
        bound_m(2.0)
    with pytest.raises(DomainError):
        bound_m3(0.9)
    # envelope actually dominates on a fresh grid
    from fracou.special_functions import ml_one_values

    xs = np.geomspace(1e-3, 1e5, 1500)
    assert np.all(np.abs(ml_one_values(1.9, xs)) * (1 + xs) <= bound_m(1.9))


def test_empirical_kernel_values_matches_scalar():
    alphas = np.array([0.3, 1.0, 2.5])
    ts = np.linspace(0.0, 3.0, 7)
    vec = empirical_kernel_values(alphas, 1.9, ts)
    scal = np.array([empirical_kernel(alphas, 1.9, float(t)) for t in ts])
    assert np.max(np.abs(vec - scal)) < 1e-13


def test_uniform_lln_kernel_gap():
    # sup-norm gap between the empirical kernel and its mixing-law limit
    # shrinks like the pointwise standard error, uniformly on a grid
    ts = np.linspace(0.0, 5.0, 100)
    gvals = mean_kernel_values(MK19, ts)
    alphas = sample_alphas(GammaMixing(4.0, 1.0), 10**4, 33)
    sups = {}
    for n in (100, 1000, 10000):
        fn = empirical_kernel_values(alphas[:n], 1.9, ts)
        sups[n] = float(np.max(np.abs(fn - gvals)))
    assert sups[100] > sups[1000] > sups[10000]
    # pointwise spread of s_alpha(t) over the mixing law, from a subsample
    sub = alphas[:2000]
    spread = 0.0
    for t in ts[1::7]:
        vals = np.array([resolvent(ResolventKernel(float(a), 1.9), float(t))
                         for a in sub[:300]])
        spread = max(spread, float(np.std(vals, ddof=1)))
    for n in (100, 1000, 10000):
        assert sups[n] < 5.0 * spread / math.sqrt(n)


def test_mean_kernel_weighted_boundedness():
    # |G(t)| (1 + t^(rho min(mu,1))) stays bounded far out
    for mu, mkx in ((4.0, MK19), (0.4, MeanKernel(1.9, GammaMixing(0.4, 1.0)))):
        ts = np.geomspace(1e-2, 1e3, 400)
        w = np.abs(mean_kernel_values(mkx, ts)) * (1.0 + ts ** (1.9 * min(mu, 1.0)))
        assert np.isfinite(w).all()
        again = np.abs(mean_kernel_values(mkx, np.geomspace(1e-2, 1e3, 800)))
        w2 = again * (1.0 + np.geomspace(1e-2, 1e3, 800) ** (1.9 * min(mu, 1.0)))
        assert w2.max() < 1.5 * max(w.max(), 1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sc

from fracou.errors import AccuracyError, DomainError
from fracou.special_functions import (
    FractionalOrder,
    _asym_many,
    _regime_thresholds,
    _series_many,
    g_rho_quadrature,
    g_rho_series,
    ml_asymptotic,
    ml_one,
    ml_one_deriv,
    ml_one_values,
    ml_two,
    pochhammer,
)

# frozen reference values from the high-precision summation oracle
E_15_AT_10 = -0.1097130542527401466939
E_19_AT_1 = 0.5064595543685906536309
E_19_AT_50 = 0.02202214511423457828704
E2_1515_AT_1 = 0.7065280370641757942561


def test_fractional_order_domain():
    assert float(FractionalOrder(1.5)) == 1.5
    for bad in (0.0, -1.0, 2.5, float("nan")):
        with pytest.raises(DomainError):
            FractionalOrder(bad)


def test_pochhammer_values():
    assert pochhammer(4.0, 3) == 120.0
    assert pochhammer(7.3, 0) == 1.0
    assert pochhammer(0.5, 2) == 0.75
    with pytest.raises(DomainError):
        pochhammer(0.0, 2)
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)


@given(st.floats(min_value=0.05, max_value=50.0),
       st.integers(min_value=0, max_value=40))
@settings(max_examples=100, deadline=None)
def test_pochhammer_recurrence(mu, k):
    assert pochhammer(mu, k + 1) == pytest.approx(
        pochhammer(mu, k) * (mu + k), rel=1e-12)


def test_ml_one_closed_forms():
    xs = np.linspace(0.0, 50.0, 257)
    assert np.max(np.abs(ml_one_values(1.0, xs) - np.exp(-xs))) < 1e-12
    assert np.max(np.abs(ml_one_values(2.0, xs) - np.cos(np.sqrt(xs)))) < 1e-12
    r = ml_one(1.0, 1.0)
    assert r.method == "closed_form"
    assert r.value == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert ml_one(2.0, math.pi**2 / 4).value == pytest.approx(0.0, abs=1e-12)


def test_ml_one_frozen_oracle_values():
    r = ml_one(1.5, 10.0)
    assert abs(r.value - E_15_AT_10) <= max(r.est_abs_error, 1e-12)
    r = ml_one(1.9, 1.0)
    assert abs(r.value - E_19_AT_1) <= max(r.est_abs_error, 1e-13)
    r = ml_one(1.9, 50.0)
    assert abs(r.value - E_19_AT_50) <= max(r.est_abs_error, 1e-11)


def test_ml_one_est_is_honest(ml_oracle):
    # spot points across series, bridge and asymptotic regimes
    for rho in (1.1, 1.5, 1.9):
        lo, hi = _regime_thresholds(rho, 1.0)
        for x in (0.5, 0.5 * lo, 0.99 * lo, math.sqrt(lo * hi), 1.5 * hi):
            r = ml_one(rho, x)
            assert abs(r.value - ml_oracle(rho, x)) <= max(r.est_abs_error, 1e-14)
            assert r.est_abs_error <= 1e-8


def test_ml_one_series_regime_certifies_target():
    for rho in (1.1, 1.5, 1.9):
        lo, _ = _regime_thresholds(rho, 1.0)
        xs = np.linspace(0.0, lo, 50)
        _, ests, _, _ = _series_many(rho, 1.0, xs)
        assert ests.max() <= 1e-10


def test_ml_two_values(ml_oracle):
    assert ml_two(1.0, 2.0).value == pytest.approx(math.exp(-2.0), abs=1e-14)
    assert ml_two(2.0, math.pi**2).value == pytest.approx(0.0, abs=1e-12)
    assert ml_two(1.7, 0.0).value == pytest.approx(1.0 / math.gamma(1.7), abs=5e-16)
    r = ml_two(1.5, 1.0)
    assert abs(r.value - E2_1515_AT_1) <= max(r.est_abs_error, 1e-13)
    for x in (3.0, 40.0, 300.0):
        r = ml_two(1.9, x)
        assert abs(r.value - ml_oracle(1.9, x, beta=1.9)) <= max(r.est_abs_error, 1e-13)


def test_ml_one_deriv_identity():
    xs = np.linspace(0.1, 20.0, 41)
    for x in xs:
        assert ml_one_deriv(1.0, x) == pytest.approx(-math.exp(-x), rel=1e-10)
    for rho in (1.2, 1.5, 1.9):
        assert ml_one_deriv(rho, 0.0) == pytest.approx(
            -1.0 / math.gamma(rho + 1.0), rel=1e-14)
        h = 1e-5
        for x in xs[::4]:
            fd = (ml_one(rho, x + h).value - ml_one(rho, x - h).value) / (2 * h)
            assert abs(fd - ml_one_deriv(rho, x)) < 1e-6


def test_ml_asymptotic_power_tail_only():
    # all reciprocal-gamma coefficients vanish at rho = 1
    assert ml_asymptotic(1.0, 7.0, 5) == 0.0
    # one-term value is elementary arithmetic
    expected = sc.rgamma(1.0 - 1.9) / 50.0
    assert ml_asymptotic(1.9, 50.0, 1) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(-1.892e-3, rel=1e-3)
    # for 1 < rho < 2 the power tail alone misses the damped oscillation,
    # which still dominates at x = 50; the full evaluation does not
    assert abs(ml_asymptotic(1.9, 50.0, 4) - E_19_AT_50) > 1e-2
    assert abs(ml_one(1.9, 50.0).value - E_19_AT_50) < 1e-10
    with pytest.raises(DomainError):
        ml_asymptotic(2.0, 10.0, 3)
    with pytest.raises(DomainError):
        ml_asymptotic(1.5, -1.0, 3)


def test_ml_asymptotic_positive_for_completely_monotone_order():
    assert ml_asymptotic(0.5, 100.0, 2) > 0.0


def test_complete_monotonicity_rho_half():
    xs = np.linspace(0.0, 100.0, 2001)
    vals = ml_one_values(0.5, xs)
    assert (vals > 0.0).all()
    assert (np.diff(vals) < 0.0).all()
    # independent closed form: scaled complementary error function
    spot = np.geomspace(0.1, 90.0, 25)
    assert np.max(np.abs(ml_one_values(0.5, spot) - sc.erfcx(spot))) < 1e-10


def test_damped_oscillation_sign_changes():
    xs = np.linspace(0.0, 50.0, 1001)
    vals = ml_one_values(1.9, xs)
    changes = int(np.sum(np.diff(np.sign(vals[vals != 0.0])) != 0))
    assert changes >= 2


def test_global_envelope_stable_under_grid_refinement():
    for rho in (1.1, 1.5, 1.9):
        sups = []
        for n in (2000, 4000):
            xs = np.concatenate([[0.0], np.geomspace(1e-4, 1e4, n)])
            sups.append(np.max(np.abs(ml_one_values(rho, xs)) * (1 + xs)))
        assert np.isfinite(sups).all()
        assert abs(sups[1] - sups[0]) < 0.02 * sups[0]


def test_series_asymptotic_overlap_band():
    for rho in (1.1, 1.5, 1.9):
        lo, hi = _regime_thresholds(rho, 1.0)
        band = np.linspace(0.8 * lo, 1.2 * lo, 21)
        sv, se, _, _ = _series_many(rho, 1.0, band)
        av, ae, _ = _asym_many(rho, 1.0, band)
        assert np.all(np.abs(sv - av) <= se + ae)
        # and the asymptotic is certified on its own side of the bridge
        sv, se, _, _ = _series_many(rho, 1.0, np.array([hi]))
        av, ae, _ = _asym_many(rho, 1.0, np.array([hi]))
        assert abs(sv[0] - av[0]) <= se[0] + ae[0]


def test_domain_errors():
    with pytest.raises(DomainError):
        ml_one(1.5, -1.0)
    with pytest.raises(DomainError):
        ml_one(2.5, 1.0)
    with pytest.raises(DomainError):
        ml_two(1.5, float("nan"))


def test_g_rho_series_basics():
    assert g_rho_series(1.9, 4.0, 0.0).value == 1.0
    with pytest.raises(DomainError):
        g_rho_series(1.0, 4.0, -1.0)
    with pytest.raises(DomainError):
        g_rho_series(1.9, 4.0, 1.0)
    with pytest.raises(AccuracyError):
        g_rho_series(1.9, 4.0, -500.0)  # cancellation guard


def test_g_rho_series_vs_quadrature():
    gs = g_rho_series(1.9, 4.0, -3.0)
    t = 3.0 ** (1.0 / 1.9)
    gq = g_rho_quadrature(1.9, 4.0, 1.0, t)
    assert abs(gs.value - gq.value) <= max(1e-8,
                                           gs.est_abs_error + gq.est_abs_error)


def test_g_rho_dips_negative_and_decays():
    # the dip below zero happens well inside the certified series range
    zs = -np.linspace(0.0, 12.0, 121)
    vals = np.array([g_rho_series(1.9, 4.0, float(z)).value for z in zs])
    assert vals.min() < 0.0
    # decay to zero continues through the quadrature path
    far = g_rho_quadrature(1.9, 4.0, 1.0, 30.0 ** (1.0 / 1.9))
    farther = g_rho_quadrature(1.9, 4.0, 1.0, 300.0 ** (1.0 / 1.9))
    assert abs(far.value) < 0.05 * abs(vals.min())
    assert abs(farther.value) < 0.2 * abs(far.value)


def test_g_rho_quadrature_rho_one_closed_form():
    mu, lam = 4.0, 2.0
    for t in (0.0, 0.3, 2.0, 17.0, 240.0):
        r = g_rho_quadrature(1.0, mu, lam, t)
        assert r.value == pytest.approx((lam / (t + lam)) ** mu,
                                        abs=max(r.est_abs_error, 1e-12))


def test_g_rho_quadrature_domain():
    with pytest.raises(DomainError):
        g_rho_quadrature(1.9, -1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        g_rho_quadrature(1.9, 4.0, 1.0, -2.0)


@given(st.floats(min_value=1.05, max_value=1.95),
       st.floats(min_value=0.0, max_value=200.0))
@settings(max_examples=60, deadline=None)
def test_envelope_property(rho, x):
    # |E_rho(-x)| (1+x) stays below the per-rho empirical envelope constant
    from fracou.kernels import bound_m

    val = ml_one_values(round(rho, 2), np.array([x]))[0]
    assert abs(val) * (1.0 + x) <= bound_m(round(rho, 2))

"""Deterministic kernel layer.

The scalar resolvent s_alpha(t) = E_rho(-alpha t^rho) solves the
convolution identity s + alpha (g * s) = 1 with the power memory kernel
g(t) = t^(rho-1)/Gamma(rho).  Averaging s_alpha over a Gamma(mu, lam) law in
alpha gives the mean kernel G(t), the deterministic object behind the
aggregated process: its square integrates to path variances, and its tail
controls how much history a stationary simulation must keep.

Bound constants: the envelope constants M (for E_rho), M2 (for E_{rho,rho})
and M3 (for the derivative of the unit resolvent) are estimated once per rho
as suprema over a dense logarithmic grid, times a 1.1 safety factor, and
cached.  They are not exact suprema, only stable empirical ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError
from .mixing import GammaMixing, check_condition
from .special_functions import (
    FractionalOrder,
    _g_quadrature_many,
    _g_series_many,
    _laguerre_rule,
    g_rho_quadrature,
    g_rho_series,
    ml_one,
    ml_one_values,
    ml_two,
    ml_two_values,
)

__all__ = [
    "ResolventKernel",
    "MeanKernel",
    "resolvent",
    "resolvent_values",
    "volterra_residual",
    "resolvent_deriv",
    "empirical_kernel",
    "empirical_kernel_values",
    "mean_kernel",
    "mean_kernel_values",
    "mean_kernel_deriv",
    "variance_integral",
    "resolvent_l2_norm",
    "tail_variance_bound",
    "stationary_variance",
    "bound_m",
    "bound_m2",
    "bound_m3",
]


@dataclass(frozen=True)
class ResolventKernel:
    """s_alpha with fixed reversion rate alpha >= 0 and order rho."""

    alpha: float
    rho: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0.0):
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "rho", float(FractionalOrder(self.rho)))


@dataclass(frozen=True)
class MeanKernel:
    """Gamma-mixed expectation of the resolvent kernel."""

    rho: float
    mixing: GammaMixing

    def __post_init__(self):
        object.__setattr__(self, "rho", float(FractionalOrder(self.rho)))


# ---------------------------------------------------------------------------
# envelope constants
# ---------------------------------------------------------------------------

_SAFETY = 1.1


@lru_cache(maxsize=64)
def bound_m(rho: float) -> float:
    """Empirical M with |E_rho(-x)| <= M/(1+x) for all x >= 0."""
    rho = float(FractionalOrder(rho))
    if rho == 2.0:
        raise DomainError("E_2(-x) = cos(sqrt x) does not decay; no envelope")
    xs = np.concatenate([[0.0], np.geomspace(1e-4, 1e6, 4000)])
    vals = ml_one_values(rho, xs)
    return _SAFETY * float(np.max(np.abs(vals) * (1.0 + xs)))


@lru_cache(maxsize=64)
def bound_m2(rho: float) -> float:
    """Empirical M2 with |E_{rho,rho}(-x)| <= M2/(1+x) for all x >= 0."""
    rho = float(FractionalOrder(rho))
    if rho == 2.0:
        raise DomainError("E_{2,2}(-x) decays too slowly; no 1/(1+x) envelope")
    xs = np.concatenate([[0.0], np.geomspace(1e-4, 1e6, 4000)])
    vals = ml_two_values(rho, xs)
    return _SAFETY * float(np.max(np.abs(vals) * (1.0 + xs)))


@lru_cache(maxsize=64)
def bound_m3(rho: float) -> float:
    """Empirical M3 with |s_1'(x)| = x^(rho-1)|E_{rho,rho}(-x^rho)| <= M3/(1+x).

    Only defined for rho >= 1; below that the derivative blows up at 0.
    """
    rho = float(FractionalOrder(rho))
    if rho < 1.0 or rho == 2.0:
        raise DomainError(f"derivative envelope needs 1 <= rho < 2, got {rho}")
    xs = np.geomspace(1e-6, 1e4, 4000)
    vals = ml_two_values(rho, xs**rho)
    return _SAFETY * float(np.max((1.0 + xs) * xs ** (rho - 1.0) * np.abs(vals)))


def deriv_bound_constant(rho: float) -> float:
    """Uniform-in-t bound constant B with |d/dt s_alpha(t)| <= B alpha^(1/rho).

    B = M2 sup_x x^(rho-1)/(1+x^rho); the sup has the closed form
    (rho-1)^((rho-1)/rho) / rho and never exceeds 1 on (1, 2].
    """
    rho = float(FractionalOrder(rho))
    if rho <= 1.0:
        raise DomainError(f"uniform derivative bound needs rho > 1, got {rho}")
    sup = (rho - 1.0) ** ((rho - 1.0) / rho) / rho
    return bound_m2(rho) * sup


# ---------------------------------------------------------------------------
# resolvent kernel
# ---------------------------------------------------------------------------


def resolvent(k: ResolventKernel, t: float) -> float:
    """s_alpha(t) = E_rho(-alpha t^rho); equals 1 identically when alpha = 0."""
    if not np.isfinite(t) or t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if k.alpha == 0.0:
        return 1.0
    return ml_one(k.rho, k.alpha * t**k.rho).value


def resolvent_values(k: ResolventKernel, ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if k.alpha == 0.0:
        return np.ones_like(ts)
    return ml_one_values(k.rho, k.alpha * ts**k.rho)


def volterra_residual(k: ResolventKernel, t: float) -> float:
    """s(t) + alpha * (g * s)(t) - 1 with the convolution done by quadrature.

    The weakly singular weight (t-tau)^(rho-1) is removed by the substitution
    w = (t-tau)^rho, after which the integrand is bounded and adaptive
    quadrature applies directly.
    """
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    if k.alpha == 0.0:
        return 0.0
    rho = k.rho

    def integrand(w):
        return resolvent(k, t - w ** (1.0 / rho))

    val, err = integrate.quad(integrand, 0.0, t**rho,
                              epsabs=1e-11, epsrel=1e-11, limit=400)
    if err > 1e-8:
        raise AccuracyError(
            f"convolution quadrature reported error {err:.2e} at t={t}")
    conv = val / math.gamma(rho + 1.0)
    return resolvent(k, t) + k.alpha * conv - 1.0


def resolvent_deriv(k: ResolventKernel, t: float) -> float:
    """d/dt s_alpha(t) = -alpha t^(rho-1) E_{rho,rho}(-alpha t^rho)."""
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    if k.alpha == 0.0:
        return 0.0
    return -k.alpha * t ** (k.rho - 1.0) * ml_two(k.rho, k.alpha * t**k.rho).value


# ---------------------------------------------------------------------------
# empirical and mean kernels
# ---------------------------------------------------------------------------


def empirical_kernel(alphas, rho, t: float) -> float:
    """f_n(t): arithmetic mean of s_alpha(t) over the given rates."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        raise DomainError("alphas must be nonempty")
    if not np.isfinite(t) or t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    rho = float(FractionalOrder(rho))
    return float(np.mean(ml_one_values(rho, alphas * t**rho)))


def empirical_kernel_values(alphas, rho, ts: np.ndarray) -> np.ndarray:
    """f_n on a whole grid of times; chunked over the (n_alpha x n_t) product."""
    alphas = np.asarray(alphas, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if alphas.size == 0:
        raise DomainError("alphas must be nonempty")
    rho = float(FractionalOrder(rho))
    tp = ts**rho
    out = np.zeros(ts.shape)
    chunk = max(1, int(4e6) // max(ts.size, 1))
    for a in range(0, alphas.size, chunk):
        block = alphas[a : a + chunk]
        args = block[:, None] * tp[None, :]
        out += np.add.reduce(ml_one_values(rho, args.ravel()).reshape(args.shape),
                             axis=0)
    return out / alphas.size


_series_range_cache: dict = {}


def _g_series_range(rho: float, mu: float) -> float:
    """Largest |z| for which the direct series self-certifies 1e-9."""
    key = (rho, mu)
    got = _series_range_cache.get(key)
    if got is not None:
        return got
    zmax = 0.5
    for z in np.geomspace(0.5, 1e5, 80):
        try:
            _, est, _, guard = _g_series_many(rho, mu, np.array([-z]))
        except AccuracyError:
            break
        if guard[0] or est[0] > 1e-9:
            break
        zmax = float(z)
    _series_range_cache[key] = zmax
    return zmax


def mean_kernel(mk: MeanKernel, t: float) -> float:
    """G(t) = mean of s_alpha(t) under the mixing law.

    Routed through the direct series where it certifies (rho > 1, moderate
    t), otherwise through the mixing-integral quadrature, which covers every
    rho in (0, 2].
    """
    if not np.isfinite(t) or t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    mu, lam = mk.mixing.mu, mk.mixing.lam
    z = t**mk.rho / lam
    if mk.rho > 1.0 and z <= _g_series_range(mk.rho, mu):
        try:
            return g_rho_series(mk.rho, mu, -z).value
        except AccuracyError:
            pass
    return g_rho_quadrature(mk.rho, mu, lam, t).value


def mean_kernel_values(mk: MeanKernel, ts: np.ndarray) -> np.ndarray:
    """Vectorized mean kernel with the same series/quadrature routing."""
    ts = np.asarray(ts, dtype=float)
    mu, lam = mk.mixing.mu, mk.mixing.lam
    z = ts**mk.rho / lam
    out = np.empty(ts.shape)
    done = np.zeros(ts.shape, dtype=bool)
    if mk.rho > 1.0:
        sel = np.nonzero(z <= _g_series_range(mk.rho, mu))[0]
        if sel.size:
            vals, ests, _, guard = _g_series_many(mk.rho, mu, -z[sel])
            ok = ~guard & (ests <= 1e-9)
            out[sel[ok]] = vals[ok]
            done[sel[ok]] = True
    rest = ~done
    if rest.any():
        vals, ests = _g_quadrature_many(mk.rho, mu, lam, ts[rest])
        if float(ests.max(initial=0.0)) > 1e-7:
            raise AccuracyError(
                f"mixing quadrature disagreement {float(ests.max()):.2e} > 1e-7")
        out[rest] = vals
    return out


def mean_kernel_deriv(mk: MeanKernel, t: float) -> float:
    """d/dt G(t) = -t^(rho-1) E[alpha E_{rho,rho}(-alpha t^rho)].

    Computed by generalized Gauss-Laguerre against the mixing density with an
    order-doubling error check.  Defined for rho >= 1, where the uniform
    derivative envelope is integrable against the mixing law.
    """
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    if mk.rho < 1.0:
        raise DomainError("mean kernel derivative requires rho >= 1")
    return float(mean_kernel_deriv_values(mk, np.array([t]))[0])


def mean_kernel_deriv_values(mk: MeanKernel, ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0.0):
        raise DomainError("all times must be > 0")
    if mk.rho < 1.0:
        raise DomainError("mean kernel derivative requires rho >= 1")
    mu, lam = mk.mixing.mu, mk.mixing.lam
    scale = ts**mk.rho / lam
    prev = None
    for order in (64, 128):
        nodes, weights = _laguerre_rule(order, mu)
        args = nodes[None, :] * scale[:, None]
        ev = ml_two_values(mk.rho, args.ravel()).reshape(args.shape)
        q = (ev * nodes[None, :]) @ weights / lam
        if prev is None:
            prev = q
    if float(np.abs(q - prev).max(initial=0.0)) > 1e-7:
        raise AccuracyError("derivative quadrature did not stabilize")
    return -(ts ** (mk.rho - 1.0)) * q


# ---------------------------------------------------------------------------
# variance integrals and tails
# ---------------------------------------------------------------------------


def variance_integral(mk: MeanKernel, t: float) -> float:
    """sigma_t^2 = integral of G(u)^2 over [0, t].

    Long ranges are split at u = 16 with a log substitution beyond, so the
    adaptive rule cannot step over the mass concentrated near the origin.
    """
    if not np.isfinite(t) or t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    head, e1 = integrate.quad(lambda u: mean_kernel(mk, u) ** 2,
                              0.0, min(t, 16.0),
                              epsabs=1e-10, epsrel=1e-10, limit=400)
    tail, e2 = 0.0, 0.0
    if t > 16.0:
        tail, e2 = integrate.quad(
            lambda v: math.exp(v) * mean_kernel(mk, math.exp(v)) ** 2,
            math.log(16.0), math.log(t),
            epsabs=1e-10, epsrel=1e-10, limit=400)
    val = head + tail
    if e1 + e2 > 1e-7 * max(1.0, abs(val)):
        raise AccuracyError(f"variance quadrature error {e1 + e2:.2e} at t={t}")
    return float(val)


@lru_cache(maxsize=64)
def _unit_resolvent_l2(rho: float) -> float:
    """||s_1||^2 on the half line, by quadrature plus certified envelope tail."""
    if rho == 1.0:
        return 0.5
    m = bound_m(rho)
    # envelope tail below 1e-9 fixes the truncation point
    upper = (m * m / ((2.0 * rho - 1.0) * 1e-9)) ** (1.0 / (2.0 * rho - 1.0))
    upper = max(upper, 32.0)
    head, e1 = integrate.quad(lambda u: ml_one(rho, u**rho).value ** 2,
                              0.0, 32.0, epsabs=1e-11, epsrel=1e-11, limit=400)
    # log substitution keeps the long tail piece well-scaled
    body, e2 = integrate.quad(
        lambda v: math.exp(v) * ml_one(rho, math.exp(v * rho)).value ** 2,
        math.log(32.0), math.log(upper), epsabs=1e-11, epsrel=1e-11, limit=400)
    tail = m * m * upper ** (1.0 - 2.0 * rho) / (2.0 * rho - 1.0)
    if e1 + e2 > 1e-8:
        raise AccuracyError("resolvent norm quadrature did not converge")
    return float(head + body + tail)


def resolvent_l2_norm(k: ResolventKernel) -> float:
    """||s_alpha||^2_{L2(0,inf)} = alpha^(-1/rho) ||s_1||^2 (exact scaling).

    Square integrability of the envelope requires rho > 1/2.
    """
    if not k.alpha > 0.0:
        raise DomainError("l2 norm needs alpha > 0")
    if k.rho <= 0.5:
        raise DomainError(f"square integrability needs rho > 1/2, got {k.rho}")
    return k.alpha ** (-1.0 / k.rho) * _unit_resolvent_l2(k.rho)


def _tail_bound_from(mk: MeanKernel, T: float) -> float:
    """Closed-form upper bound for the tail integral of G^2 past T.

    Assembled from elementary bounds on the mixing integral of the envelope
    M/(1+alpha u^rho): split the Gamma weight at z=1, bound each piece, then
    integrate the squared sum in closed form.  Valid for T^rho >= lam.
    """
    rho, mu, lam = mk.rho, mk.mixing.mu, mk.mixing.lam
    m = bound_m(rho)
    gm = math.gamma(mu)
    b2 = math.gamma(mu - 1.0) if mu > 1.0 else math.exp(-1.0)
    c2 = m * b2 * lam / gm  # coefficient of the u^(-rho) piece
    p = 2.0 * rho - 1.0
    if mu > 1.0:
        a = m * lam / (gm * (mu - 1.0)) + c2
        return a * a * T ** (-p) / p
    if mu == 1.0:
        # G <= M lam u^(-rho) (ln(1+u^rho/lam) + e^-1); expand the log as
        # rho ln u + ln(u^-rho + 1/lam) and bound the second addend on [T, inf)
        d = math.log(T ** (-rho) + 1.0 / lam) + math.exp(-1.0)
        c = m * lam
        i0 = T ** (-p) / p
        i1 = T ** (-p) * (math.log(T) / p + 1.0 / p**2)
        i2 = T ** (-p) * (math.log(T) ** 2 / p + 2.0 * math.log(T) / p**2 + 2.0 / p**3)
        return c * c * (rho * rho * i2 + 2.0 * rho * d * i1 + d * d * i0)
    # 0 < mu < 1
    a1 = (m / gm) * lam**mu * (1.0 / mu + 1.0 / (1.0 - mu))
    q = 2.0 * rho * mu - 1.0
    r = rho * (mu + 1.0) - 1.0
    return (a1 * a1 * T ** (-q) / q
            + 2.0 * a1 * c2 * T ** (-r) / r
            + c2 * c2 * T ** (-p) / p)


def tail_variance_bound(mk: MeanKernel, T: float) -> float:
    """Upper bound for the tail integral of G(u)^2 over [T, inf).

    Decays like T^(1-2 rho) for mu > 1, (log T)^2 T^(1-2 rho) for mu = 1 and
    T^(1-2 mu rho) for mu < 1.  Requires the admissibility condition
    mu > 1/(2 rho); below it the tail integral itself diverges.
    """
    if not check_condition(mk.mixing, mk.rho):
        raise DomainError(
            f"tail bound needs mu > 1/(2 rho); mu={mk.mixing.mu}, rho={mk.rho}")
    if not T > 0.0:
        raise DomainError(f"T must be > 0, got {T}")
    t0 = max(mk.mixing.lam ** (1.0 / mk.rho), 1.0)
    if T >= t0:
        return _tail_bound_from(mk, T)
    # below the closed-form range, pad with the global envelope |G| <= M
    m = bound_m(mk.rho)
    return m * m * (t0 - T) + _tail_bound_from(mk, t0)


def stationary_variance(mk: MeanKernel, tol: float) -> float:
    """Limit variance sigma^2 = integral of G^2 over the whole half line.

    Brackets [sigma_T^2, sigma_T^2 + tail(T)] and grows T until the bound is
    below tol; the returned midpoint is within tol/2 of the truth.
    """
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    if not check_condition(mk.mixing, mk.rho):
        raise DomainError(
            f"stationary variance needs mu > 1/(2 rho); "
            f"mu={mk.mixing.mu}, rho={mk.rho}")
    T = 8.0
    while tail_variance_bound(mk, T) >= tol:
        T *= 2.0
        if T > 1e9:
            raise AccuracyError(
                f"tail bound does not reach tol={tol} below T=1e9")
    head = variance_integral(mk, T)
    return head + 0.5 * tail_variance_bound(mk, T)

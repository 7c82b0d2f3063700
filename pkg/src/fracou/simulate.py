"""Gaussian sample paths by stochastic convolution.

Every process here is a Wiener convolution integral discretized by
left-endpoint quadrature on a uniform grid: X(t_j) = sum_{i<j} K(t_j - t_i)
dW_i.  One ensemble of component paths shares a single Brownian driver; the
randomness of the reversion rates lives in a separate seed namespace, so
rates can be resampled holding the driver fixed and vice versa.

Stationary (two-sided-time) processes truncate their infinite history at a
point certified by the kernel tail bounds, never at an arbitrary cutoff.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal

from . import _rng
from .errors import AccuracyError, DomainError, TruncationError
from .kernels import (
    MeanKernel,
    bound_m,
    mean_kernel_values,
    tail_variance_bound,
)
from .mixing import check_condition
from .special_functions import FractionalOrder, ml_one_values

__all__ = [
    "TimeGrid",
    "PathEnsemble",
    "brownian_increments",
    "simulate_component_paths",
    "empirical_mean_path",
    "simulate_limit_path",
    "simulate_exact_gaussian",
    "y_minus_s_at_zero",
    "simulate_stationary_paths",
    "empirical_stationary_mean",
]

# direct convolution below this work estimate, FFT above; fixed rule so the
# choice never depends on the environment
_FFT_CUTOVER = 1 << 15


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = t0 + j dt, j = 0..n_steps."""

    t0: float
    T: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.T) and self.T > self.t0):
            raise DomainError(f"need finite T > t0, got [{self.t0}, {self.T}]")
        if self.n_steps < 1 or self.n_steps != int(self.n_steps):
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return (self.T - self.t0) / self.n_steps

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_steps + 1) * self.dt


@dataclass
class PathEnsemble:
    """Trajectories on a shared grid plus provenance.

    values has shape (n_paths, n_steps+1); labels carries one record per
    path; method is "increment_quadrature" or "exact_covariance".
    """

    grid: TimeGrid
    values: np.ndarray
    labels: list = field(default_factory=list)
    method: str = "increment_quadrature"
    meta: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path: str, sidecar: bool = True) -> None:
        """CSV with columns t, path_0..path_{m-1}; floats in shortest
        round-trip form.  The sidecar JSON holds the full provenance."""
        times = self.grid.times()
        header = ",".join(["t"] + [f"path_{i}" for i in range(self.n_paths)])
        lines = [header]
        for j, t in enumerate(times):
            row = [repr(float(t))] + [repr(float(v)) for v in self.values[:, j]]
            lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        if sidecar:
            side = {
                "grid": {"t0": self.grid.t0, "T": self.grid.T,
                         "n_steps": self.grid.n_steps},
                "method": self.method,
                "labels": self.labels,
                "meta": self.meta,
            }
            with open(os.path.splitext(path)[0] + ".json", "w") as fh:
                json.dump(side, fh, indent=2, sort_keys=True)
                fh.write("\n")


def brownian_increments(grid: TimeGrid, seed: int, rep: int = 0,
                        kind: str = "w") -> np.ndarray:
    """Increments over the grid cells: i.i.d. N(0, dt), counter-based.

    kind selects the driver namespace ("w" forward, "wtilde" backward); rep
    indexes independent replications of the whole driver.
    """
    z = _rng.normal_rows(seed, (kind,), 1, grid.n_steps, row_offset=rep)[0]
    return z * math.sqrt(grid.dt)


def _increment_matrix(seed: int, kind: str, n_reps: int, n_steps: int,
                      dt: float, rep0: int = 0) -> np.ndarray:
    z = _rng.normal_rows(seed, (kind,), n_reps, n_steps, row_offset=rep0)
    return z * math.sqrt(dt)


def _two_sided_increments(seed: int, n_reps: int, n_hist: int, n_steps: int,
                          dt: float, rep0: int = 0) -> np.ndarray:
    """Driver increments over cells [-n_hist, n_steps) anchored at t = 0.

    Backward and forward cells come from separate streams indexed by their
    absolute position, so two simulations with different history depths share
    every overlapping cell; this is what couples processes across truncation
    choices.
    """
    back = _rng.normal_rows(seed, ("w2s-b",), n_reps, n_hist,
                            row_offset=rep0)[:, ::-1]
    fwd = _rng.normal_rows(seed, ("w2s-f",), n_reps, n_steps, row_offset=rep0)
    return np.concatenate([back, fwd], axis=1) * math.sqrt(dt)


def _convolve_rows(kernels: np.ndarray, dw: np.ndarray,
                   method: str = "auto") -> np.ndarray:
    """Row-wise causal convolutions sum_m kernels[., m+1] dw[., j-m].

    kernels has shape (K, L) with lag-0 entry unused; dw has shape (R, N);
    either K == R, K == 1 or R == 1.  Returns paths of shape
    (max(K, R), N+1) with a zero first column.
    """
    kern = np.atleast_2d(np.asarray(kernels, dtype=float))[:, 1:]
    dw = np.atleast_2d(np.asarray(dw, dtype=float))
    n = dw.shape[1]
    rows = max(kern.shape[0], dw.shape[0])
    if method == "auto":
        method = "fft" if kern.shape[1] * n >= _FFT_CUTOVER else "direct"
    if method == "fft":
        full = signal.fftconvolve(kern, dw, mode="full", axes=1)
    elif method == "direct":
        full = np.empty((rows, kern.shape[1] + n - 1))
        for r in range(rows):
            a = kern[min(r, kern.shape[0] - 1)]
            b = dw[min(r, dw.shape[0] - 1)]
            full[r] = np.convolve(a, b)
    else:
        raise DomainError(f"unknown convolution method {method!r}")
    out = np.zeros((rows, n + 1))
    out[:, 1:] = full[:, :n]
    return out


def _resolvent_lag_rows(alphas: np.ndarray, rho: float,
                        lags: np.ndarray) -> np.ndarray:
    """Matrix s_alpha(lag) for every (alpha, lag) pair, chunked."""
    out = np.empty((alphas.size, lags.size))
    lp = lags**rho
    chunk = max(1, int(4e6) // max(lags.size, 1))
    for a in range(0, alphas.size, chunk):
        block = alphas[a : a + chunk]
        args = block[:, None] * lp[None, :]
        out[a : a + chunk] = ml_one_values(rho, args.ravel()).reshape(args.shape)
    return out


def _require_simulatable(rho: float) -> float:
    rho = float(FractionalOrder(rho))
    if rho < 1.0:
        raise DomainError(
            "path simulation is limited to rho >= 1; below that the kernel "
            "derivative is unbounded at the origin and the left-endpoint "
            "scheme loses its error control")
    return rho


def simulate_component_paths(alphas, rho, grid: TimeGrid, seed: int,
                             method: str = "auto", rep: int = 0) -> PathEnsemble:
    """One path per reversion rate, all driven by the same increments.

    X_k(t_j) = sum_{i<j} s_{alpha_k}(t_j - t_i) dW_i with X_k(0) = 0.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0 or np.any(alphas < 0):
        raise DomainError("alphas must be a nonempty 1-d array of rates >= 0")
    rho = _require_simulatable(rho)
    if grid.t0 != 0.0:
        raise DomainError("component processes start at t = 0; need t0 = 0")
    lags = np.arange(grid.n_steps + 1) * grid.dt
    kern = _resolvent_lag_rows(alphas, rho, lags)
    dw = brownian_increments(grid, seed, rep=rep)
    values = _convolve_rows(kern, dw[None, :], method=method)
    labels = [{"process": "component", "alpha": float(a), "rep": rep}
              for a in alphas]
    return PathEnsemble(grid, values, labels, "increment_quadrature",
                        {"process": "component", "rho": rho, "seed": seed,
                         "rep": rep})


def empirical_mean_path(ensemble: PathEnsemble) -> np.ndarray:
    """Pointwise average across the paths of one shared-driver ensemble."""
    return ensemble.values.mean(axis=0)


def simulate_limit_path(mk: MeanKernel, grid: TimeGrid, seed: int,
                        rep: int = 0, method: str = "auto") -> np.ndarray:
    """Aggregated-limit path: the mean kernel convolved with the same driver
    namespace a component ensemble with this seed uses."""
    rho = _require_simulatable(mk.rho)
    if grid.t0 != 0.0:
        raise DomainError("the limit process starts at t = 0; need t0 = 0")
    lags = np.arange(grid.n_steps + 1) * grid.dt
    kern = mean_kernel_values(mk, lags)
    dw = brownian_increments(grid, seed, rep=rep)
    return _convolve_rows(kern[None, :], dw[None, :], method=method)[0]


def simulate_exact_gaussian(kernel, grid: TimeGrid, n_paths: int,
                            seed: int) -> PathEnsemble:
    """Exact sampler for the convolution process with the given kernel.

    Builds the grid covariance C(s, t) = integral of K(t-u) K(s-u) over
    [0, min(s, t)] by quadrature, takes a symmetric square root (diagonal
    jitter escalated from 1e-12 on indefiniteness) and draws exact Gaussian
    vectors.  The high-accuracy oracle against increment quadrature; cost is
    quadratic in the grid, so keep grids short.
    """
    if grid.t0 != 0.0:
        raise DomainError("exact sampler assumes processes started at 0")
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    times = grid.times()
    n = times.size
    cov = np.zeros((n, n))
    for i in range(1, n):
        for j in range(i, n):
            s, t = times[i], times[j]
            val, _ = integrate.quad(lambda v: kernel(t - s + v) * kernel(v),
                                    0.0, s, epsabs=1e-12, epsrel=1e-12,
                                    limit=200)
            cov[i, j] = cov[j, i] = val
    scale = float(np.max(np.diag(cov)))
    if scale == 0.0:
        root = np.zeros((n, n))
    else:
        jitter = 1e-12
        for _ in range(8):
            w, vecs = np.linalg.eigh(cov + jitter * scale * np.eye(n))
            if w.min() >= -1e-10 * scale:
                break
            jitter *= 10.0
        else:
            raise AccuracyError("covariance square root failed despite jitter")
        root = vecs * np.sqrt(np.clip(w, 0.0, None))
    z = _rng.normal_rows(seed, ("exact",), n_paths, n)
    values = z @ root.T
    values[:, 0] = 0.0
    labels = [{"process": "exact", "rep": r} for r in range(n_paths)]
    return PathEnsemble(grid, values, labels, "exact_covariance",
                        {"process": "exact", "seed": seed,
                         "marginal_variances": np.diag(cov).tolist()})


def y_minus_s_at_zero(mk: MeanKernel, s: float, n_paths: int, seed: int,
                      n_steps: int | None = None) -> np.ndarray:
    """Samples of the time-shifted aggregate read off at time zero.

    Integrates the mean kernel against the backward extension of the driver
    over [-s, 0]; the law coincides with the unshifted process at time s.
    """
    if not s > 0.0:
        raise DomainError(f"shift s must be > 0, got {s}")
    if n_steps is None:
        n_steps = min(max(int(math.ceil(s / 2e-3)), 200), 20000)
    dv = s / n_steps
    lags = np.arange(n_steps) * dv
    kern = mean_kernel_values(mk, lags)
    dw = _increment_matrix(seed, "wtilde", n_paths, n_steps, dv)
    return dw @ kern


def _certified_history(mk_or_pairs, grid: TimeGrid, tol: float) -> float:
    """Shortest truncation depth whose certified tail variance is below tol."""
    T = max(8.0 * grid.dt, 8.0)
    while True:
        if isinstance(mk_or_pairs, MeanKernel):
            tail = tail_variance_bound(mk_or_pairs, T)
        else:
            rho, alphas = mk_or_pairs
            m = bound_m(rho)
            a_min = float(np.min(alphas))
            tail = (m * m / (a_min * a_min)) * T ** (1.0 - 2.0 * rho) / (2.0 * rho - 1.0)
        if tail < tol:
            return T
        T *= 2.0
        if T > 1e7:
            raise TruncationError(
                f"history truncation cannot certify tol={tol} below T=1e7")


def simulate_stationary_paths(kernel, grid: TimeGrid, seed: int, tol: float,
                              rho: float | None = None, n_paths: int = 1,
                              rep: int = 0, method: str = "auto") -> PathEnsemble:
    """Two-sided-time processes with certified history truncation.

    kernel may be a MeanKernel (the stationary aggregate; n_paths
    independent replications) or a 1-d array of rates (one path per rate on
    a single shared driver; requires rho).  History is truncated where the
    corresponding tail bound drops below tol.
    """
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    if grid.t0 != 0.0:
        raise DomainError("stationary grids are laid out from t0 = 0")
    dt = grid.dt
    if isinstance(kernel, MeanKernel):
        rho = _require_simulatable(kernel.rho)
        if not check_condition(kernel.mixing, rho):
            raise DomainError(
                "stationary aggregate needs mu > 1/(2 rho); "
                f"mu={kernel.mixing.mu}, rho={rho}")
        t_hist = _certified_history(kernel, grid, tol)
        n_hist = int(math.ceil(t_hist / dt))
        lags = np.arange(n_hist + grid.n_steps + 1) * dt
        kern = mean_kernel_values(kernel, lags)[None, :]
        dw = _two_sided_increments(seed, n_paths, n_hist, grid.n_steps,
                                   dt, rep0=rep)
        full = _convolve_rows(kern, dw, method=method)
        values = full[:, n_hist : n_hist + grid.n_steps + 1]
        labels = [{"process": "eta", "rep": rep + r} for r in range(n_paths)]
        meta = {"process": "eta", "rho": rho, "mu": kernel.mixing.mu,
                "lam": kernel.mixing.lam, "seed": seed, "tol": tol,
                "t_trunc": n_hist * dt,
                "tail_bound": tail_variance_bound(kernel, n_hist * dt)}
    else:
        alphas = np.asarray(kernel, dtype=float)
        if alphas.ndim != 1 or alphas.size == 0 or np.any(alphas <= 0):
            raise DomainError("stationary component rates must be positive")
        if rho is None:
            raise DomainError("rho is required with explicit rates")
        rho = _require_simulatable(rho)
        t_hist = _certified_history((rho, alphas), grid, tol)
        n_hist = int(math.ceil(t_hist / dt))
        lags = np.arange(n_hist + grid.n_steps + 1) * dt
        kern = _resolvent_lag_rows(alphas, rho, lags)
        dw = _two_sided_increments(seed, 1, n_hist, grid.n_steps,
                                   dt, rep0=rep)
        full = _convolve_rows(kern, dw, method=method)
        values = full[:, n_hist : n_hist + grid.n_steps + 1]
        labels = [{"process": "xi", "alpha": float(a), "rep": rep}
                  for a in alphas]
        meta = {"process": "xi", "rho": rho, "seed": seed, "tol": tol,
                "t_trunc": n_hist * dt}
    return PathEnsemble(grid, values, labels, "increment_quadrature", meta)


def empirical_stationary_mean(ensemble: PathEnsemble) -> np.ndarray:
    """Average of stationary component paths sharing one driver."""
    return ensemble.values.mean(axis=0)


# ---------------------------------------------------------------------------
# marginal-sample helpers used by the diagnostics (no full path storage)
# ---------------------------------------------------------------------------


def marginal_samples(kernel_lags: np.ndarray, t_indices, n_paths: int,
                     seed: int, dt: float, kind: str = "w",
                     rep0: int = 0) -> np.ndarray:
    """Samples of the convolution process at selected grid indices.

    Returns shape (n_paths, len(t_indices)); row r uses driver replication
    rep0 + r.  Chunked over replications to bound memory.
    """
    t_indices = np.asarray(t_indices, dtype=int)
    n_steps = int(t_indices.max())
    out = np.empty((n_paths, t_indices.size))
    # reversed-kernel dot per requested time
    weights = [kernel_lags[1 : j + 1][::-1] if j > 0 else np.empty(0)
               for j in t_indices]
    chunk = max(1, int(2e7) // max(n_steps, 1))
    for r0 in range(0, n_paths, chunk):
        r1 = min(r0 + chunk, n_paths)
        dw = _increment_matrix(seed, kind, r1 - r0, n_steps, dt, rep0=rep0 + r0)
        for col, (j, w) in enumerate(zip(t_indices, weights)):
            out[r0:r1, col] = dw[:, :j] @ w if j > 0 else 0.0
    return out


def stationary_marginal_samples(kernel_lags: np.ndarray, t_indices,
                                n_hist: int, n_paths: int, seed: int,
                                dt: float, rep0: int = 0) -> np.ndarray:
    """Marginals of a two-sided convolution with n_hist history steps."""
    t_indices = np.asarray(t_indices, dtype=int)
    n_steps = n_hist + int(t_indices.max())
    out = np.empty((n_paths, t_indices.size))
    weights = [kernel_lags[1 : n_hist + j + 1][::-1] for j in t_indices]
    chunk = max(1, int(2e7) // max(n_steps, 1))
    for r0 in range(0, n_paths, chunk):
        r1 = min(r0 + chunk, n_paths)
        dw = _two_sided_increments(seed, r1 - r0, n_hist,
                                   int(t_indices.max()), dt, rep0=rep0 + r0)
        for col, (j, w) in enumerate(zip(t_indices, weights)):
            out[r0:r1, col] = dw[:, : n_hist + j] @ w
    return out

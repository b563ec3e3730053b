"""Monte Carlo averages of CDF distances over the unit sphere.

For each direction theta, the law F_theta of <X, theta> is represented
exactly (finite sample spaces) or by a deterministic midpoint-grid CDF
(interval sample spaces, with a Kantorovich error certificate from the
per-cell oscillation bound).  The per-direction distance triple
(rho, omega^2, W) against the target is computed by the exact kernels;
directions are drawn from splittable substreams chunked by index, so results
are bit-identical for a fixed (seed, n_theta, inner_budget) regardless of
the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .distances import (
    AnalyticCDF,
    MixtureSphereCDF,
    NormalCDF,
    _kernel_params,
    cdf_values,
    mean_abs,
    mean_abs_gap_of,
    quantile,
    typical_law,
)
from .errors import NumericFailure, ParameterError
from .streams import spawn_rngs
from .systems import FINITE_KINDS, GridSpec, System, atom_matrix, grid_certificate, grid_spec

DEFAULT_INNER_BUDGET = 1 << 16
DEFAULT_MIXTURE_BUDGET = 256
DEFAULT_CERT_TOL = 0.01
THETA_CHUNK = 64

METRICS = ("rho", "omega", "omega_sq", "rho_sq", "kantorovich")
TARGETS = ("normal", "typical")


@dataclass(frozen=True)
class SphereAverage:
    """Monte Carlo estimate of E_theta d(F_theta, target) with provenance."""

    system: str
    kind: str
    n: int
    metric: str
    target: str
    mean: float
    stderr: float
    n_theta: int
    inner_budget: int
    seed: int

    def csv_row(self) -> list:
        return [self.system, self.kind, self.n, self.metric, self.target,
                self.mean, self.stderr, self.n_theta, self.inner_budget, self.seed]


def target_object(system: System, target: str, seed: int,
                  mixture_budget: int = DEFAULT_MIXTURE_BUDGET) -> AnalyticCDF:
    if target == "normal":
        return NormalCDF()
    if target == "typical":
        return typical_law(system, budget=mixture_budget, seed=seed)
    raise ParameterError(f"unknown target {target!r}; choose from {TARGETS}")


def _mixture_batch_triples(sorted_vals: np.ndarray, target: MixtureSphereCDF) -> np.ndarray:
    """Vectorized (rho, omega^2, W) rows against a radius-mixture target."""
    B, m = sorted_vals.shape
    w = 1.0 / m
    iw = np.arange(1, m + 1) * w
    ezz = mean_abs_gap_of(target)
    G = cdf_values(target, sorted_vals)
    rho = np.maximum(np.abs(iw - G), np.abs(iw - w - G)).max(axis=1)
    eaz = mean_abs(target, sorted_vals)
    term1 = eaz.mean(axis=1)
    ca = np.cumsum(sorted_vals, axis=1) * w
    ess = 2.0 * w * np.sum(sorted_vals * (iw - w) - (ca - sorted_vals * w), axis=1)
    omega_sq = np.maximum(term1 - 0.5 * ess - 0.5 * ezz, 0.0)
    H = 0.5 * (eaz + sorted_vals)
    if m > 1:
        c = np.broadcast_to(iw[:-1], (B, m - 1))
        lo, hi = sorted_vals[:, :-1], sorted_vals[:, 1:]
        at_lo = c <= G[:, :-1]
        xs = np.where(at_lo, lo, hi)
        Hs = np.where(at_lo, H[:, :-1], H[:, 1:])
        inside = ~at_lo & (c < G[:, 1:])
        if inside.any():
            sol = np.clip(quantile(target, c[inside]), lo[inside], hi[inside])
            xs = xs.copy()
            Hs = Hs.copy()
            xs[inside] = sol
            Hs[inside] = 0.5 * (mean_abs(target, sol) + sol)
        w1 = (c * (2.0 * xs - lo - hi) - 2.0 * Hs + H[:, :-1] + H[:, 1:]).sum(axis=1)
    else:
        w1 = np.zeros(B)
    w1 = w1 + H[:, 0] + 0.5 * (eaz[:, -1] - sorted_vals[:, -1])
    return np.column_stack([rho, omega_sq, w1])


def batch_triples(sorted_vals: np.ndarray, target: AnalyticCDF) -> np.ndarray:
    params = _kernel_params(target)
    if params is not None:
        kind, dim, scale, ezz = params
        return _kernels.batch_distances(sorted_vals, kind, dim, scale, ezz)
    return _mixture_batch_triples(sorted_vals, target)


def required_inner_budget(system: System, cert_tol: float = DEFAULT_CERT_TOL) -> int:
    """Smallest power-of-two grid budget whose oscillation certificate meets
    cert_tol (the certificate scales like 1/K on interval sample spaces and
    1/sqrt(K) on the square)."""
    budget = 256
    while budget <= 1 << 34:
        if grid_certificate(system, budget) <= cert_tol:
            return budget
        budget *= 2
    raise NumericFailure(
        f"no feasible grid budget reaches certificate {cert_tol:.1e} for {system.label()}"
    )


def sphere_triples(
    system: System,
    target: AnalyticCDF,
    n_theta: int,
    inner_budget: int = DEFAULT_INNER_BUDGET,
    seed: int = 0,
    threads: Optional[int] = None,
    cert_tol: float = DEFAULT_CERT_TOL,
) -> np.ndarray:
    """(n_theta, 3) rows of (rho, omega^2, W) over deterministic directions."""
    n_theta = int(n_theta)
    if n_theta < 1:
        raise ParameterError("n_theta must be >= 1")
    n = system.n

    if system.kind in FINITE_KINDS:
        values, probs = atom_matrix(system)
        if not np.allclose(probs, probs[0]):  # pragma: no cover - all finite kinds are uniform
            raise ParameterError("finite sample spaces must have uniform atom probabilities")
    else:
        grid: GridSpec = grid_spec(system, int(inner_budget))
        if grid.cell_osc > cert_tol:
            raise NumericFailure(
                f"inner budget {inner_budget} certifies only {grid.cell_osc:.3e} "
                f"Kantorovich error (> {cert_tol:.1e}); "
                f"need inner_budget >= {required_inner_budget(system, cert_tol)}"
            )
        values = grid.values

    n_chunks = (n_theta + THETA_CHUNK - 1) // THETA_CHUNK
    rngs = spawn_rngs(seed, n_chunks)
    out = np.empty((n_theta, 3))

    def work(chunk: int) -> None:
        lo = chunk * THETA_CHUNK
        hi = min(lo + THETA_CHUNK, n_theta)
        g = rngs[chunk].standard_normal((hi - lo, n))
        thetas = g / np.linalg.norm(g, axis=1, keepdims=True)
        s_vals = np.sort(thetas @ values.T, axis=1)
        out[lo:hi] = batch_triples(np.ascontiguousarray(s_vals), target)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(work, range(n_chunks)))
    else:
        for chunk in range(n_chunks):
            work(chunk)
    return out


def metric_series(triples: np.ndarray, metric: str) -> np.ndarray:
    if metric == "rho":
        return triples[:, 0]
    if metric == "omega_sq":
        return triples[:, 1]
    if metric == "kantorovich":
        return triples[:, 2]
    if metric == "omega":
        return np.sqrt(triples[:, 1])
    if metric == "rho_sq":
        return np.square(triples[:, 0])
    raise ParameterError(f"unknown metric {metric!r}; choose from {METRICS}")


def sphere_average_distance(
    system: System,
    metric: str,
    target: str,
    n_theta: int,
    inner_budget: int = DEFAULT_INNER_BUDGET,
    seed: int = 0,
    threads: Optional[int] = None,
    mixture_budget: int = DEFAULT_MIXTURE_BUDGET,
    cert_tol: float = DEFAULT_CERT_TOL,
) -> SphereAverage:
    """Estimate E_theta metric(F_theta, target) with its standard error."""
    if metric not in METRICS:
        raise ParameterError(f"unknown metric {metric!r}; choose from {METRICS}")
    tgt = target_object(system, target, seed, mixture_budget)
    triples = sphere_triples(system, tgt, n_theta, inner_budget, seed, threads, cert_tol)
    series = metric_series(triples, metric)
    stderr = float(series.std(ddof=1) / math.sqrt(series.size)) if series.size > 1 else 0.0
    return SphereAverage(
        system=system.label(), kind=system.kind, n=system.n, metric=metric, target=target,
        mean=float(series.mean()), stderr=stderr, n_theta=int(n_theta),
        inner_budget=int(inner_budget) if system.kind not in FINITE_KINDS else 0,
        seed=int(seed),
    )

"""One-dimensional distribution representations and the distances rho, omega, W.

Discrete-versus-smooth distances are computed exactly:

  * rho: the supremum is attained at an atom (both one-sided limits checked);
  * omega^2: the bilinear identity  E|U-V| - E|U-U'|/2 - E|V-V'|/2  with
    independent U ~ F, V ~ G reduces the integral to closed-form partial
    moments of the target;
  * W: piecewise integration with each inter-atom segment split at the level
    crossing G^{-1}(c).

Smooth-versus-smooth values use certified bracketing (rho) or adaptive
quadrature (omega, W).  Targets: the standard normal law, the exact typical
law scale * theta_1(n) of fixed-norm systems, and frozen radius mixtures
(1/M) sum_i theta_1-laws scaled by |X_i| for everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.special import ndtr, ndtri

from . import sphere
from . import _kernels
from .errors import ParameterError, UnsupportedModeError
from .quadrature import integrate
from .streams import tagged_rng
from .systems import System, sample_batch

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


# ---------------------------------------------------------------------------
# distribution representations


@dataclass(frozen=True)
class EmpiricalCDF:
    """Sorted weighted atoms; duplicates merged, weights sum to 1."""

    atoms: np.ndarray
    weights: np.ndarray

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def mean(self) -> float:
        return float(np.dot(self.atoms, self.weights))


def ecdf(samples, weights=None) -> EmpiricalCDF:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ParameterError("ecdf needs at least one sample")
    if weights is None:
        weights = np.full(samples.size, 1.0 / samples.size)
    else:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != samples.shape:
            raise ParameterError("weights must match samples in length")
        if np.any(weights < 0):
            raise ParameterError("weights must be nonnegative")
        total = weights.sum()
        if not np.isclose(total, 1.0, atol=1e-9):
            weights = weights / total
    order = np.argsort(samples, kind="stable")
    a = samples[order]
    w = weights[order]
    uniq, inverse = np.unique(a, return_inverse=True)
    merged = np.zeros(uniq.size)
    np.add.at(merged, inverse, w)
    return EmpiricalCDF(atoms=uniq, weights=merged)


@dataclass(frozen=True)
class NormalCDF:
    """Standard normal distribution function."""


@dataclass(frozen=True)
class SphereMarginalCDF:
    """Law of scale * theta_1 under the uniform measure on S^{n-1}."""

    n: int
    scale: float

    @classmethod
    def typical(cls, n: int) -> "SphereMarginalCDF":
        return cls(n=n, scale=math.sqrt(n))


@dataclass(frozen=True)
class MixtureSphereCDF:
    """Typical law of a non-fixed-norm system: frozen |X| radius mixture."""

    n: int
    radii: tuple

    def radius_array(self) -> np.ndarray:
        return np.asarray(self.radii, dtype=float)


AnalyticCDF = Union[NormalCDF, SphereMarginalCDF, MixtureSphereCDF]


# ---------------------------------------------------------------------------
# analytic-target primitives


def cdf_values(target: AnalyticCDF, x):
    x = np.asarray(x, dtype=float)
    if isinstance(target, NormalCDF):
        return ndtr(x)
    if isinstance(target, SphereMarginalCDF):
        return sphere.theta1_cdf(target.n, x / target.scale)
    if isinstance(target, MixtureSphereCDF):
        r = target.radius_array()
        out = np.zeros(x.shape if x.ndim else (1,))
        xx = np.atleast_1d(x)
        pos = r > 0
        if pos.any():
            out += sphere.theta1_cdf(target.n, xx[..., None] / r[pos]).mean(axis=-1) * pos.mean()
        if (~pos).any():
            out += (xx >= 0.0) * (~pos).mean()
        return out if x.ndim else float(out[0])
    raise ParameterError(f"unknown analytic CDF {target!r}")


def mean_abs(target: AnalyticCDF, a):
    """E |a - Z| for Z distributed by the target."""
    a = np.asarray(a, dtype=float)
    if isinstance(target, NormalCDF):
        return a * (2.0 * ndtr(a) - 1.0) + 2.0 * _phi(a)
    if isinstance(target, SphereMarginalCDF):
        return sphere.mean_abs_around(target.n, target.scale, a)
    if isinstance(target, MixtureSphereCDF):
        r = target.radius_array()
        aa = np.atleast_1d(a)
        out = np.zeros(aa.shape)
        for rad in r:  # M is small and frozen per experiment
            if rad > 0:
                out += sphere.mean_abs_around(target.n, rad, aa)
            else:
                out += np.abs(aa)
        out /= r.size
        return out if a.ndim else float(out[0])
    raise ParameterError(f"unknown analytic CDF {target!r}")


def mean_abs_gap_of(target: AnalyticCDF) -> float:
    """E |Z - Z'| for independent copies under the target."""
    if isinstance(target, NormalCDF):
        return _kernels.NORMAL_MEAN_ABS_GAP
    if isinstance(target, SphereMarginalCDF):
        return sphere.mean_abs_gap(target.n, target.scale)
    if isinstance(target, MixtureSphereCDF):
        hi = float(max(target.radii)) if target.radii else 0.0
        if hi == 0.0:
            return 0.0

        def f(x):
            g = cdf_values(target, x)
            return 2.0 * g * (1.0 - g)

        return integrate(f, -hi, hi, tol=1e-12)
    raise ParameterError(f"unknown analytic CDF {target!r}")


def quantile(target: AnalyticCDF, u):
    u = np.asarray(u, dtype=float)
    if isinstance(target, NormalCDF):
        with np.errstate(divide="ignore"):
            return ndtri(u)
    if isinstance(target, SphereMarginalCDF):
        return target.scale * sphere.theta1_quantile(target.n, u)
    if isinstance(target, MixtureSphereCDF):
        hi = float(max(target.radii))
        lo_arr = np.full(u.shape if u.ndim else (1,), -hi)
        hi_arr = np.full_like(lo_arr, hi)
        uu = np.atleast_1d(u)
        for _ in range(60):  # bisection to ~1e-16 relative width
            mid = 0.5 * (lo_arr + hi_arr)
            below = cdf_values(target, mid) < uu
            lo_arr = np.where(below, mid, lo_arr)
            hi_arr = np.where(below, hi_arr, mid)
        out = 0.5 * (lo_arr + hi_arr)
        return out if u.ndim else float(out[0])
    raise ParameterError(f"unknown analytic CDF {target!r}")


def support_radius(target: AnalyticCDF) -> float:
    """Radius R with target mass 1 on [-R, R] (inf-tail targets use 12)."""
    if isinstance(target, NormalCDF):
        return 12.0
    if isinstance(target, SphereMarginalCDF):
        return target.scale
    if isinstance(target, MixtureSphereCDF):
        return float(max(target.radii))
    raise ParameterError(f"unknown analytic CDF {target!r}")


def density(target: AnalyticCDF, x):
    x = np.asarray(x, dtype=float)
    if isinstance(target, NormalCDF):
        return _phi(x)
    if isinstance(target, SphereMarginalCDF):
        return sphere.theta1_density(target.n, x / target.scale) / target.scale
    if isinstance(target, MixtureSphereCDF):
        r = target.radius_array()
        xx = np.atleast_1d(x)
        out = np.zeros(xx.shape)
        for rad in r:
            if rad > 0:
                out += sphere.theta1_density(target.n, xx / rad) / rad
        out /= r.size
        return out if x.ndim else float(out[0])
    raise ParameterError(f"unknown analytic CDF {target!r}")


def _kink_points(target: AnalyticCDF) -> list[float]:
    """Support edges / atoms where the density is discontinuous."""
    if isinstance(target, NormalCDF):
        return []
    if isinstance(target, SphereMarginalCDF):
        return [-target.scale, target.scale]
    if isinstance(target, MixtureSphereCDF):
        pts = []
        for rad in sorted(set(target.radii)):
            if rad > 0:
                pts.extend([-rad, rad])
            else:
                pts.append(0.0)
        return pts
    raise ParameterError(f"unknown analytic CDF {target!r}")


def _kernel_params(target: AnalyticCDF):
    """(kind, dim, scale, ezz) for targets the compiled kernels support."""
    if isinstance(target, NormalCDF):
        return _kernels.TARGET_NORMAL, 0.0, 1.0, _kernels.NORMAL_MEAN_ABS_GAP
    if isinstance(target, SphereMarginalCDF):
        return _kernels.TARGET_SPHERE, float(target.n), float(target.scale), \
            sphere.mean_abs_gap(target.n, target.scale)
    return None


# ---------------------------------------------------------------------------
# discrete vs analytic (exact paths)


def discrete_triple(a: EmpiricalCDF, b: AnalyticCDF) -> tuple[float, float, float]:
    """(rho, omega^2, W) between a discrete CDF and an analytic target."""
    params = _kernel_params(b)
    if params is not None:
        kind, dim, scale, ezz = params
        return _kernels.weighted_distances(a.atoms, a.weights, kind, dim, scale, ezz)
    # mixture target: same algebra through the mixture primitives
    atoms, w = a.atoms, a.weights
    cum = np.cumsum(w)
    G = np.atleast_1d(cdf_values(b, atoms))
    rho = float(np.maximum(np.abs(cum - G), np.abs(cum - w - G)).max())
    eaz = np.atleast_1d(mean_abs(b, atoms))
    term1 = float(np.dot(w, eaz))
    prev_ca = np.concatenate(([0.0], np.cumsum(atoms * w)[:-1]))
    ess = 2.0 * float(np.sum(w * (atoms * (cum - w) - prev_ca)))
    omega_sq = max(term1 - 0.5 * ess - 0.5 * mean_abs_gap_of(b), 0.0)
    H = 0.5 * (eaz + atoms)
    w1 = float(H[0] + 0.5 * (eaz[-1] - atoms[-1]))
    if atoms.size > 1:
        c = cum[:-1]
        at_lo = c <= G[:-1]
        xs = np.where(at_lo, atoms[:-1], atoms[1:])
        Hs = np.where(at_lo, H[:-1], H[1:])
        inside = ~at_lo & (c < G[1:])
        if inside.any():
            sol = np.clip(np.atleast_1d(quantile(b, c[inside])),
                          atoms[:-1][inside], atoms[1:][inside])
            xs[inside] = sol
            Hs[inside] = 0.5 * (np.atleast_1d(mean_abs(b, sol)) + sol)
        w1 += float(np.sum(c * (2.0 * xs - atoms[:-1] - atoms[1:]) - 2.0 * Hs + H[:-1] + H[1:]))
    return rho, omega_sq, w1


def _discrete_pair_triple(a: EmpiricalCDF, b: EmpiricalCDF) -> tuple[float, float, float]:
    """(rho, omega^2, W) between two discrete CDFs over the merged atom grid."""
    grid = np.union1d(a.atoms, b.atoms)
    fa = np.concatenate(([0.0], a.cumulative()))[np.searchsorted(a.atoms, grid, side="right")]
    fb = np.concatenate(([0.0], b.cumulative()))[np.searchsorted(b.atoms, grid, side="right")]
    diff = fa - fb
    rho = float(np.abs(diff).max())
    deltas = np.diff(grid)
    w1 = float(np.dot(np.abs(diff[:-1]), deltas))
    w2 = float(np.dot(np.square(diff[:-1]), deltas))
    return rho, w2, w1


# ---------------------------------------------------------------------------
# analytic vs analytic


def _analytic_sup_diff(a: AnalyticCDF, b: AnalyticCDF, n_scan: int = 8193) -> float:
    """sup |F_a - F_b| for two smooth CDFs.

    Between density crossings (and density kinks) the difference F_a - F_b is
    monotone, so the supremum is attained at a crossing, a kink, or a support
    edge; crossings are located by a sign scan plus Brent refinement.
    """
    from scipy.optimize import brentq

    R = max(support_radius(a), support_radius(b))
    kinks = sorted(set(_kink_points(a) + _kink_points(b)))
    pieces = [-R] + [k for k in kinks if -R < k < R] + [R]
    candidates = list(pieces)
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        pad = 1e-12 * max(1.0, R)
        xs = np.linspace(lo + pad, hi - pad, max(16, int(n_scan * (hi - lo) / (2 * R))))
        if xs.size < 2:
            continue
        dd = np.atleast_1d(density(a, xs)) - np.atleast_1d(density(b, xs))
        sign = np.sign(dd)
        for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
            candidates.append(
                brentq(
                    lambda x: float(np.atleast_1d(density(a, np.array([x])))[0]
                                    - np.atleast_1d(density(b, np.array([x])))[0]),
                    xs[i], xs[i + 1], xtol=1e-14,
                )
            )
        candidates.extend(xs[np.abs(sign) < 0.5])  # flat stretches of equal density
    cand = np.asarray(candidates, dtype=float)
    va = np.atleast_1d(cdf_values(a, cand))
    vb = np.atleast_1d(cdf_values(b, cand))
    return float(np.abs(va - vb).max())


def _crossings(fa, fb, lo: float, hi: float, n_scan: int = 4097) -> list[float]:
    from scipy.optimize import brentq

    xs = np.linspace(lo, hi, n_scan)
    d = np.atleast_1d(fa(xs)) - np.atleast_1d(fb(xs))
    roots = []
    sign = np.sign(d)
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        roots.append(brentq(lambda x: float(fa(np.array([x]))[0] - fb(np.array([x]))[0]),
                            xs[i], xs[i + 1], xtol=1e-13))
    return roots


def kolmogorov(a: Union[EmpiricalCDF, AnalyticCDF], b: Union[EmpiricalCDF, AnalyticCDF]) -> float:
    """rho(a, b) = sup |F_a - F_b|; exact at jumps for discrete inputs."""
    if isinstance(a, EmpiricalCDF) and isinstance(b, EmpiricalCDF):
        return _discrete_pair_triple(a, b)[0]
    if isinstance(b, EmpiricalCDF):
        a, b = b, a
    if isinstance(a, EmpiricalCDF):
        return discrete_triple(a, b)[0]
    return _analytic_sup_diff(a, b)


def l2_dist(a: Union[EmpiricalCDF, AnalyticCDF], b: Union[EmpiricalCDF, AnalyticCDF]) -> float:
    """omega(a, b) = L2 norm of F_a - F_b."""
    return math.sqrt(l2_dist_sq(a, b))


def l2_dist_sq(a: Union[EmpiricalCDF, AnalyticCDF], b: Union[EmpiricalCDF, AnalyticCDF]) -> float:
    if isinstance(a, EmpiricalCDF) and isinstance(b, EmpiricalCDF):
        return _discrete_pair_triple(a, b)[1]
    if isinstance(b, EmpiricalCDF):
        a, b = b, a
    if isinstance(a, EmpiricalCDF):
        return discrete_triple(a, b)[1]
    R = max(support_radius(a), support_radius(b)) + 2.0
    edges = _kink_points(a) + _kink_points(b)
    val = integrate(lambda x: (cdf_values(a, x) - cdf_values(b, x)) ** 2,
                    -R, R, tol=1e-12, points=edges)
    return max(val, 0.0)


def kantorovich(a: Union[EmpiricalCDF, AnalyticCDF], b: Union[EmpiricalCDF, AnalyticCDF]) -> float:
    """W(a, b) = integral of |F_a - F_b|."""
    if isinstance(a, EmpiricalCDF) and isinstance(b, EmpiricalCDF):
        return _discrete_pair_triple(a, b)[2]
    if isinstance(b, EmpiricalCDF):
        a, b = b, a
    if isinstance(a, EmpiricalCDF):
        return discrete_triple(a, b)[2]
    R = max(support_radius(a), support_radius(b)) + 2.0
    fa = lambda x: np.atleast_1d(cdf_values(a, x))
    fb = lambda x: np.atleast_1d(cdf_values(b, x))
    cuts = _crossings(fa, fb, -R, R) + _kink_points(a) + _kink_points(b)
    return integrate(lambda x: np.abs(cdf_values(a, x) - cdf_values(b, x)),
                     -R, R, tol=1e-10, points=cuts)


# ---------------------------------------------------------------------------
# the typical law


class TypicalCdf(NamedTuple):
    value: float
    stderr: float


def typical_law(system: System, budget: int = 512, seed: int = 0) -> AnalyticCDF:
    """The sphere-average law of <X, theta>: exact for fixed-norm systems,
    otherwise a frozen |X| mixture of ``budget`` radii (same mixture for
    every direction, so direction averages are not inflated)."""
    if system.fixed_norm:
        return SphereMarginalCDF.typical(system.n)
    rng = tagged_rng(seed, 0xF0)
    X = sample_batch(system, rng, int(budget))
    radii = np.linalg.norm(X, axis=1)
    return MixtureSphereCDF(n=system.n, radii=tuple(float(r) for r in radii))


def typical_cdf(system: System, x: float, budget: int = 4096, seed: int = 0) -> TypicalCdf:
    """F(x) = E_theta F_theta(x); exact when |X|^2 = n a.s., else an |X|-mixture
    Monte Carlo value with its standard error."""
    if system.fixed_norm:
        return TypicalCdf(float(sphere.theta1_cdf(system.n, x / math.sqrt(system.n))), 0.0)
    rng = tagged_rng(seed, 0xF0)
    X = sample_batch(system, rng, int(budget))
    radii = np.linalg.norm(X, axis=1)
    terms = np.where(radii > 0, sphere.theta1_cdf(system.n, np.where(radii > 0, x / np.maximum(radii, 1e-300), 0.0)),
                     float(x >= 0.0))
    return TypicalCdf(float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(terms.size)))


# ---------------------------------------------------------------------------
# weighted total variation between the typical law and the normal law


def weighted_tv_typical(system: System) -> float:
    """int (1 + x^2) |f_F(x) - phi(x)| dx for the exact fixed-norm typical law.

    The substitution x = sqrt(n) sin(u) removes the density singularity at the
    support edge (n = 2); normal tails beyond sqrt(n) are added in closed form.
    """
    if not system.fixed_norm:
        raise UnsupportedModeError("weighted TV requires the exact fixed-norm typical law")
    n = system.n
    rt = math.sqrt(n)
    log_cn = sphere.log_normalizer(n)

    def integrand(u):
        # (1 + x^2) |c_n cos^{n-2}(u) - phi(x) sqrt(n) cos(u)| with x = sqrt(n) sin(u)
        x = rt * np.sin(u)
        cosu = np.cos(u)
        f_part = np.exp(log_cn + (n - 2) * np.log(np.maximum(cosu, 1e-300)))
        g_part = _phi(x) * rt * cosu
        return (1.0 + x * x) * np.abs(f_part - g_part)

    cuts = _crossings(
        lambda u: np.exp(log_cn + (n - 2) * np.log(np.maximum(np.cos(u), 1e-300))),
        lambda u: _phi(rt * np.sin(u)) * rt * np.cos(u),
        -math.pi / 2, math.pi / 2,
    )
    core = integrate(integrand, -math.pi / 2, math.pi / 2, tol=1e-10, points=cuts)
    # normal mass beyond the support: 2 * int_sqrt(n)^inf (1 + x^2) phi dx
    tail = 2.0 * (2.0 * (1.0 - ndtr(rt)) + rt * float(_phi(rt)))
    return core + tail

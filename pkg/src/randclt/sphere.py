"""Uniform measure on the unit sphere: first-coordinate law and its transforms.

For theta uniform on S^{n-1}, the first coordinate theta_1 has density

    c_n (1 - x^2)^((n-3)/2)  on [-1, 1],   c_n = Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)),

equivalently theta_1^2 ~ Beta(1/2, (n-1)/2).  This module provides the
density, CDF, quantile, absolute moments, the characteristic function

    jn(n, s) = E cos(s * theta_1),

its second-order Gaussian approximant (1 - t^4/(4n)) exp(-t^2/2) at s = t sqrt(n),
and closed-form partial moments used by the distance kernels.

The characteristic function is evaluated by Gauss-Legendre quadrature after
the substitution x = cos(u), which removes the n = 2 endpoint singularity:

    jn(n, s) = c_n * int_0^pi cos(s cos u) sin(u)^(n-2) du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betainc, betaincinv, gammaln

from .errors import NumericFailure, ParameterError
from .quadrature import integrate

#: beyond this multiple of sqrt(n), jn returns 0 (see jn docstring for the bound)
JN_CUTOFF_FACTOR = 1e3


def _check_dim(n: int) -> int:
    n = int(n)
    if n < 2:
        raise ParameterError(f"dimension must be >= 2, got {n}")
    return n


def log_normalizer(n: int) -> float:
    """log c_n, computed via log-Gamma to stay finite for large n."""
    n = _check_dim(n)
    return gammaln(n / 2.0) - gammaln((n - 1) / 2.0) - 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class SphereLaw:
    """The law of theta_1 under the uniform measure on S^{n-1}."""

    n: int
    normalizer: float

    @classmethod
    def for_dimension(cls, n: int) -> "SphereLaw":
        n = _check_dim(n)
        return cls(n=n, normalizer=math.exp(log_normalizer(n)))

    def density(self, x):
        return theta1_density(self.n, x)

    def cdf(self, x):
        return theta1_cdf(self.n, x)


def sample_unit_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform point on S^{n-1} (normalized Gaussian vector)."""
    n = _check_dim(n)
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm


def sample_unit_sphere_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, n) array of independent uniform sphere points."""
    n = _check_dim(n)
    g = rng.standard_normal((size, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    bad = (norms == 0).ravel()
    for i in np.flatnonzero(bad):  # pragma: no cover - probability zero
        g[i] = sample_unit_sphere(n, rng)
        norms[i] = 1.0
    return g / norms


def _as_array(x):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    scalar = np.ndim(x) == 0
    return arr, scalar


def _maybe_scalar(out, scalar):
    return float(out[0]) if scalar else out


def theta1_density(n: int, x):
    """Density c_n (1-x^2)^((n-3)/2) of theta_1; zero outside [-1, 1]."""
    n = _check_dim(n)
    x, scalar = _as_array(x)
    out = np.zeros_like(x)
    inside = np.abs(x) <= 1.0
    cn = math.exp(log_normalizer(n))
    expo = 0.5 * (n - 3)
    if expo == 0.0:
        out[inside] = cn
    else:
        with np.errstate(divide="ignore"):
            out[inside] = cn * np.power(1.0 - np.square(x[inside]), expo)
    return _maybe_scalar(out, scalar)


def theta1_cdf(n: int, x):
    """P(theta_1 <= x), via the regularized incomplete Beta function."""
    n = _check_dim(n)
    x, scalar = _as_array(x)
    xc = np.clip(x, -1.0, 1.0)
    tail = betainc(0.5, (n - 1) / 2.0, np.square(xc))
    out = 0.5 + 0.5 * np.sign(xc) * tail
    return _maybe_scalar(out, scalar)


def theta1_quantile(n: int, u):
    """Inverse of theta1_cdf on (0, 1)."""
    n = _check_dim(n)
    u, scalar = _as_array(u)
    s = np.sign(u - 0.5)
    y = betaincinv(0.5, (n - 1) / 2.0, np.abs(2.0 * u - 1.0))
    return _maybe_scalar(s * np.sqrt(y), scalar)


def jn(n: int, s: float) -> float:
    """Characteristic function of theta_1 at s, |error| <= ~1e-12.

    For |s| > 1e3 sqrt(n) the value is not computed and 0 is returned.  The
    magnitude there is bounded by Gamma(n/2) (2/|s|)^((n-2)/2) sqrt(2/(pi|s|)),
    which is below 1e-12 for n >= 9; for smaller n the true value can be as
    large as ~1e-2 (n = 2), so callers probing that regime must evaluate the
    Bessel form themselves.
    """
    return float(jn_many(n, np.array([float(s)]))[0])


def jn_many(n: int, s) -> np.ndarray:
    """Vectorized jn over an array of arguments (shared quadrature grid)."""
    n = _check_dim(n)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.ones_like(s)
    cutoff = JN_CUTOFF_FACTOR * math.sqrt(n)
    live = np.abs(s) <= cutoff
    sl = np.abs(s[live])
    if sl.size:
        smax = float(sl.max())
        scale = max(smax, math.sqrt(n), 6.0)
        n_panels = max(2, int(math.ceil(math.pi * scale / 6.0)))
        x, w = np.polynomial.legendre.leggauss(24)
        edges = np.linspace(0.0, math.pi, n_panels + 1)
        half = 0.5 * (edges[1] - edges[0])
        mids = 0.5 * (edges[:-1] + edges[1:])
        u = (mids[:, None] + half * x[None, :]).ravel()
        log_sin = (n - 2) * np.log(np.sin(u)) if n != 2 else np.zeros_like(u)
        weight = np.exp(log_normalizer(n) + log_sin) * np.tile(w, n_panels) * half
        vals = np.cos(np.outer(sl, np.cos(u))) @ weight
        if not np.all(np.isfinite(vals)):
            raise NumericFailure(f"jn quadrature produced non-finite values (n={n})")
        out[live] = vals
    out[~live] = 0.0
    return out


def jn_edgeworth(n: int, t):
    """Second-order approximant (1 - t^4/(4n)) exp(-t^2/2) to jn(n, t sqrt(n))."""
    n = _check_dim(n)
    t, scalar = _as_array(t)
    out = (1.0 - t**4 / (4.0 * n)) * np.exp(-0.5 * t**2)
    return _maybe_scalar(out, scalar)


def theta1_abs_moment(n: int, p: float) -> float:
    """E |theta_1|^p by adaptive quadrature (p > 0).

    Uses 2 c_n int_0^(pi/2) sin(v)^p cos(v)^(n-2) dv (x = sin v on the
    positive half), which is singularity-free for all n >= 2.
    """
    n = _check_dim(n)
    p = float(p)
    if p <= 0:
        raise ParameterError(f"moment order must be positive, got {p}")

    def f(v):
        base = p * np.log(np.sin(v))
        if n != 2:
            base = base + (n - 2) * np.log(np.cos(v))
        return np.exp(base)

    return 2.0 * math.exp(log_normalizer(n)) * integrate(f, 0.0, math.pi / 2, tol=1e-13)


def theta1_abs_moment_exact(n: int, p: float) -> float:
    """Closed Beta-function form of E |theta_1|^p (used as a cross-check)."""
    n = _check_dim(n)
    return math.exp(
        gammaln((p + 1) / 2.0)
        + gammaln(n / 2.0)
        - gammaln(0.5)
        - gammaln((n + p) / 2.0)
    )


# ---------------------------------------------------------------------------
# Closed-form helpers for the law of Z = scale * theta_1 (support [-scale, scale]).
# These feed the exact CDF-distance kernels.


def partial_first_moment(n: int, scale: float, a: float) -> float:
    """int_a^scale z g(z) dz for Z = scale * theta_1."""
    r = a / scale
    if r >= 1.0:
        return 0.0
    if r <= -1.0:
        return 0.0  # full integral vanishes by symmetry
    w = 1.0 - r * r
    return scale * math.exp(log_normalizer(n) + 0.5 * (n - 1) * math.log(w)) / (n - 1)


def mean_abs_around(n: int, scale: float, a):
    """E |a - Z| with Z = scale * theta_1, vectorized in a."""
    a, scalar = _as_array(a)
    r = np.clip(a / scale, -1.0, 1.0)
    cdf = theta1_cdf(n, r)
    w = np.maximum(1.0 - np.square(r), 0.0)
    with np.errstate(divide="ignore"):
        pm = np.where(
            w > 0.0,
            scale * np.exp(log_normalizer(n) + 0.5 * (n - 1) * np.log(np.maximum(w, 1e-300))) / (n - 1),
            0.0,
        )
    out = a * (2.0 * cdf - 1.0) + 2.0 * pm
    out = np.where(np.abs(a) >= scale, np.abs(a), out)
    return _maybe_scalar(out, scalar)


@lru_cache(maxsize=None)
def mean_abs_gap(n: int, scale: float) -> float:
    """E |Z - Z'| for independent copies of Z = scale * theta_1.

    Evaluated once per (n, scale) as 2 int G(1-G) over the support.
    """

    def f(x):
        g = theta1_cdf(n, x / scale)
        return 2.0 * g * (1.0 - g)

    return integrate(f, -scale, scale, tol=1e-13)

"""NumPy implementation of the CDF-distance kernels.

Given a sorted vector of atoms a_1 <= ... <= a_m carrying equal weight 1/m
(one row per sphere direction) and a smooth target CDF G, the kernels return
the exact triple

    rho      = sup_x |F(x) - G(x)|          (evaluated at both one-sided limits)
    omega^2  = int (F(x) - G(x))^2 dx       (through the bilinear identity
               E|U-V| - E|U-U'|/2 - E|V-V'|/2 with U ~ F, V ~ G independent)
    W        = int |F(x) - G(x)| dx         (piecewise, splitting each
               inter-atom segment at the level crossing G^{-1}(c))

"Exact" means: closed forms in the target's CDF / partial first moment, no
grid or truncation error.  Supported targets: the standard normal law and
scale * theta_1(dim) marginals of the uniform sphere measure.

The compiled twin (_ckernels) implements the same contract; the package
selects a backend at import time in randclt._kernels.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .. import sphere

BACKEND = "python"

TARGET_NORMAL = 0
TARGET_SPHERE = 1

_SQRT_2PI = math.sqrt(2.0 * math.pi)
NORMAL_MEAN_ABS_GAP = 2.0 / math.sqrt(math.pi)  # E|Z - Z'| for independent standard normals


def _normal_eabs(a):
    """E|a - Z| for Z standard normal."""
    return a * (2.0 * ndtr(a) - 1.0) + 2.0 * np.exp(-0.5 * np.square(a)) / _SQRT_2PI


def _target_funcs(kind: int, dim: float, scale: float):
    if kind == TARGET_NORMAL:
        return ndtr, _normal_eabs, ndtri
    if kind == TARGET_SPHERE:
        n = int(dim)

        def cdf(a):
            return sphere.theta1_cdf(n, np.asarray(a) / scale)

        def eabs(a):
            return sphere.mean_abs_around(n, scale, a)

        def quantile(u):
            return scale * sphere.theta1_quantile(n, u)

        return cdf, eabs, quantile
    raise ValueError(f"unknown target kind {kind}")


def batch_distances(sorted_vals, kind, dim, scale, ezz):
    """Distance triple per row of ``sorted_vals`` (equal atom weights).

    sorted_vals: (B, m) float64, each row nondecreasing.  Ties allowed.
    Returns (B, 3) array with columns (rho, omega_sq, kantorovich).
    """
    vals = np.ascontiguousarray(sorted_vals, dtype=float)
    if vals.ndim != 2:
        raise ValueError("sorted_vals must be 2-d")
    B, m = vals.shape
    cdf, eabs, quantile = _target_funcs(kind, dim, scale)
    w = 1.0 / m
    iw = np.arange(1, m + 1) * w

    G = cdf(vals)
    rho = np.maximum(np.abs(iw - G), np.abs(iw - w - G)).max(axis=1)

    eaz = eabs(vals)
    term1 = eaz.mean(axis=1)
    ca = np.cumsum(vals, axis=1) * w
    ess = 2.0 * w * np.sum(vals * (iw - w) - (ca - vals * w), axis=1)
    omega_sq = np.maximum(term1 - 0.5 * ess - 0.5 * ezz, 0.0)

    H = 0.5 * (eaz + vals)
    if m > 1:
        c = np.broadcast_to(iw[:-1], (B, m - 1))
        lo, hi = vals[:, :-1], vals[:, 1:]
        # the level c crosses G inside only a few segments; solve the
        # quantile there, elsewhere the crossing pins to a segment endpoint
        at_lo = c <= G[:, :-1]
        xs = np.where(at_lo, lo, hi)
        Hs = np.where(at_lo, H[:, :-1], H[:, 1:])
        inside = ~at_lo & (c < G[:, 1:])
        if inside.any():
            with np.errstate(divide="ignore", over="ignore"):
                sol = np.clip(quantile(c[inside]), lo[inside], hi[inside])
            xs = xs.copy()
            Hs = Hs.copy()
            xs[inside] = sol
            Hs[inside] = 0.5 * (eabs(sol) + sol)
        seg = c * (2.0 * xs - lo - hi) - 2.0 * Hs + H[:, :-1] + H[:, 1:]
        w1 = seg.sum(axis=1)
    else:
        w1 = np.zeros(B)
    w1 = w1 + H[:, 0] + 0.5 * (eaz[:, -1] - vals[:, -1])
    return np.column_stack([rho, omega_sq, w1])


def weighted_distances(atoms, weights, kind, dim, scale, ezz):
    """Distance triple for one weighted discrete CDF vs the target.

    atoms must be sorted ascending; weights sum to 1.
    """
    a = np.asarray(atoms, dtype=float)
    wgt = np.asarray(weights, dtype=float)
    cdf, eabs, quantile = _target_funcs(kind, dim, scale)
    cum = np.cumsum(wgt)

    G = cdf(a)
    rho = float(np.maximum(np.abs(cum - G), np.abs(cum - wgt - G)).max())

    eaz = eabs(a)
    term1 = float(np.dot(wgt, eaz))
    prev_ca = np.concatenate(([0.0], np.cumsum(a * wgt)[:-1]))
    ess = 2.0 * float(np.sum(wgt * (a * (cum - wgt) - prev_ca)))
    omega_sq = max(term1 - 0.5 * ess - 0.5 * ezz, 0.0)

    H = 0.5 * (eaz + a)
    w1 = float(H[0] + 0.5 * (eaz[-1] - a[-1]))
    if a.size > 1:
        c = cum[:-1]
        at_lo = c <= G[:-1]
        xs = np.where(at_lo, a[:-1], a[1:])
        Hs = np.where(at_lo, H[:-1], H[1:])
        inside = ~at_lo & (c < G[1:])
        if inside.any():
            with np.errstate(divide="ignore", over="ignore"):
                sol = np.clip(quantile(c[inside]), a[:-1][inside], a[1:][inside])
            xs[inside] = sol
            Hs[inside] = 0.5 * (eabs(sol) + sol)
        seg = c * (2.0 * xs - a[:-1] - a[1:]) - 2.0 * Hs + H[:-1] + H[1:]
        w1 += float(seg.sum())
    return rho, omega_sq, w1

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled distance kernels: same contract as _pykernels.batch_distances.

Per sorted row of equal-weight atoms, computes the exact triple
(rho, omega^2, W) against the standard normal law or a scale * theta_1(n)
sphere marginal.  The incomplete Beta function and its inverse are
implemented here so the whole row loop runs without the GIL.
"""

from libc.math cimport erf, exp, fabs, lgamma, log, sqrt, M_PI
from libc.stdlib cimport free, malloc

import numpy as np

BACKEND = "cython"

TARGET_NORMAL = 0
TARGET_SPHERE = 1

cdef int _KIND_NORMAL = 0

NORMAL_MEAN_ABS_GAP = 2.0 / sqrt(M_PI)

cdef double _SQRT2 = sqrt(2.0)
cdef double _INV_SQRT_2PI = 1.0 / sqrt(2.0 * M_PI)


cdef inline double _norm_cdf(double x) noexcept nogil:
    return 0.5 * (1.0 + erf(x / _SQRT2))


cdef inline double _norm_pdf(double x) noexcept nogil:
    return _INV_SQRT_2PI * exp(-0.5 * x * x)


cdef inline double _norm_eabs(double x) noexcept nogil:
    return x * (2.0 * _norm_cdf(x) - 1.0) + 2.0 * _norm_pdf(x)


cdef double _norm_quantile(double u) noexcept nogil:
    """Acklam's rational approximation polished by one Halley step."""
    cdef double q, r, x, e, du
    if u <= 0.0:
        return -1e308
    if u >= 1.0:
        return 1e308
    if u < 0.02425:
        q = sqrt(-2.0 * log(u))
        x = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
              + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
               + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    elif u > 1.0 - 0.02425:
        q = sqrt(-2.0 * log(1.0 - u))
        x = -(((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                 - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
               + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
               + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    else:
        q = u - 0.5
        r = q * q
        x = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
                - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
              - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q / \
            (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
                - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
              - 1.328068155288572e+01) * r + 1.0)
    e = _norm_cdf(x) - u
    du = e / _norm_pdf(x)
    x = x - du / (1.0 + 0.5 * x * du)
    return x


cdef double _betacf(double a, double b, double x) noexcept nogil:
    """Continued fraction for the incomplete Beta (modified Lentz)."""
    cdef int m, m2
    cdef double aa, c, d, delta, h, qab, qam, qap
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if fabs(d) < 1e-300:
        d = 1e-300
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < 1e-300:
            d = 1e-300
        c = 1.0 + aa / c
        if fabs(c) < 1e-300:
            c = 1e-300
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < 1e-300:
            d = 1e-300
        c = 1.0 + aa / c
        if fabs(c) < 1e-300:
            c = 1e-300
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < 1e-16:
            break
    return h


cdef double _betainc(double a, double b, double x) noexcept nogil:
    """Regularized incomplete Beta I_x(a, b)."""
    cdef double bt
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    bt = exp(lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x))
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


cdef struct SphereParams:
    double nn
    double scale
    double bhalf     # (n - 1) / 2
    double log_cn    # log Gamma(n/2) - log Gamma((n-1)/2) - log(pi)/2


cdef inline double _sphere_cdf(double x, SphereParams* p) noexcept nogil:
    cdef double r = x / p.scale
    cdef double t
    if r <= -1.0:
        return 0.0
    if r >= 1.0:
        return 1.0
    t = _betainc(0.5, p.bhalf, r * r)
    return 0.5 + 0.5 * t if r >= 0.0 else 0.5 - 0.5 * t


cdef inline double _sphere_pdf(double x, SphereParams* p) noexcept nogil:
    cdef double r = x / p.scale
    cdef double w = 1.0 - r * r
    if w <= 0.0:
        return 0.0
    return exp(p.log_cn + 0.5 * (p.nn - 3.0) * log(w)) / p.scale


cdef inline double _sphere_eabs_with_cdf(double x, double cdf, SphereParams* p) noexcept nogil:
    cdef double r = x / p.scale
    cdef double w, pm
    if r >= 1.0:
        return x
    if r <= -1.0:
        return -x
    w = 1.0 - r * r
    pm = p.scale * exp(p.log_cn + 0.5 * (p.nn - 1.0) * log(w)) / (p.nn - 1.0)
    return x * (2.0 * cdf - 1.0) + 2.0 * pm


cdef inline double _sphere_eabs(double x, SphereParams* p) noexcept nogil:
    return _sphere_eabs_with_cdf(x, _sphere_cdf(x, p), p)


cdef double _sphere_quantile(double u, SphereParams* p) noexcept nogil:
    """Safeguarded Newton iteration on the marginal CDF."""
    cdef double lo = -p.scale
    cdef double hi = p.scale
    cdef double x, f, dens, xn
    cdef int it
    if u <= 0.0:
        return lo
    if u >= 1.0:
        return hi
    x = p.scale * _norm_quantile(u) / sqrt(p.nn)
    if x <= lo or x >= hi:
        x = 0.0
    for it in range(120):
        f = _sphere_cdf(x, p) - u
        if f > 0.0:
            hi = x
        else:
            lo = x
        dens = _sphere_pdf(x, p)
        if dens > 1e-300:
            xn = x - f / dens
        else:
            xn = 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if fabs(xn - x) <= 1e-15 * p.scale:
            return xn
        x = xn
    return x


cdef void _row(const double* a, Py_ssize_t m, int kind, SphereParams* p, double ezz,
               double* G, double* EA, double* out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double w = 1.0 / m
    cdef double rho = 0.0, d1, d2
    cdef long double t1 = 0.0, ess = 0.0, ca = 0.0
    cdef double omega2, w1, c, glo, ghi, cl, xs, eax, hs
    for i in range(m):
        if kind == _KIND_NORMAL:
            G[i] = _norm_cdf(a[i])
            EA[i] = _norm_eabs(a[i])
        else:
            G[i] = _sphere_cdf(a[i], p)
            EA[i] = _sphere_eabs_with_cdf(a[i], G[i], p)
    for i in range(m):
        d1 = fabs((i + 1) * w - G[i])
        d2 = fabs(i * w - G[i])
        if d1 > rho:
            rho = d1
        if d2 > rho:
            rho = d2
    for i in range(m):
        t1 += EA[i]
        ess += a[i] * (i * w) - ca
        ca += a[i] * w
    omega2 = <double> (w * t1 - w * ess - 0.5 * ezz)
    if omega2 < 0.0:
        omega2 = 0.0
    w1 = 0.5 * (EA[0] + a[0]) + 0.5 * (EA[m - 1] - a[m - 1])
    for i in range(m - 1):
        c = (i + 1) * w
        glo = G[i]
        ghi = G[i + 1]
        if c <= glo:
            xs = a[i]
            eax = EA[i]
        elif c >= ghi:
            xs = a[i + 1]
            eax = EA[i + 1]
        else:
            if kind == _KIND_NORMAL:
                xs = _norm_quantile(c)
            else:
                xs = _sphere_quantile(c, p)
            if xs < a[i]:
                xs = a[i]
            elif xs > a[i + 1]:
                xs = a[i + 1]
            if kind == _KIND_NORMAL:
                eax = _norm_eabs(xs)
            else:
                eax = _sphere_eabs(xs, p)
        hs = 0.5 * (eax + xs)
        w1 += c * (2.0 * xs - a[i] - a[i + 1]) - 2.0 * hs \
            + 0.5 * (EA[i] + a[i]) + 0.5 * (EA[i + 1] + a[i + 1])
    out[0] = rho
    out[1] = omega2
    out[2] = w1


def batch_distances(sorted_vals, int kind, double dim, double scale, double ezz):
    """Distance triple per row; see _pykernels.batch_distances for the contract."""
    cdef double[:, ::1] vals = np.ascontiguousarray(sorted_vals, dtype=np.float64)
    cdef Py_ssize_t B = vals.shape[0]
    cdef Py_ssize_t m = vals.shape[1]
    if m < 1:
        raise ValueError("rows must contain at least one atom")
    out_arr = np.empty((B, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef SphereParams params
    params.nn = dim
    params.scale = scale
    params.bhalf = 0.5 * (dim - 1.0)
    params.log_cn = lgamma(0.5 * dim) - lgamma(0.5 * (dim - 1.0)) - 0.5 * log(M_PI) \
        if kind != _KIND_NORMAL else 0.0
    cdef double* G = <double*> malloc(m * sizeof(double))
    cdef double* EA = <double*> malloc(m * sizeof(double))
    if G == NULL or EA == NULL:
        free(G)
        free(EA)
        raise MemoryError()
    cdef Py_ssize_t b
    try:
        with nogil:
            for b in range(B):
                _row(&vals[b, 0], m, kind, &params, ezz, G, EA, &out[b, 0])
    finally:
        free(G)
        free(EA)
    return out_arr

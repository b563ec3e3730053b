"""Acceptance suite: one test per criterion, at the stated tolerance.

Each test prints a single PASS/FAIL line (visible with pytest -s or in the
captured output of a failing run) and asserts both the numeric criterion and
its runtime cap.
"""

import math
import time

import numpy as np
import pytest

from randclt import averaging as AV
from randclt import distances as D
from randclt import expansions as E
from randclt import harness as H
from randclt import moments as M
from randclt import sphere
from randclt.quadrature import integrate
from randclt.streams import spawn_rngs
from randclt.systems import grid_spec, make_system


def report(num, label, ok, elapsed, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:02d} [{label}]: {status} ({elapsed:.1f}s) {detail}")
    assert ok, f"criterion {num} [{label}] failed: {detail}"


@pytest.fixture(scope="module")
def typical_triples():
    """Per-direction (rho, omega^2, W) vs the exact typical law, shared by
    the explicit-constant audits (criterion 12)."""
    out = {}
    for label, system in (("walsh_d4", make_system("walsh", d=4)),
                          ("empirical_32", make_system("empirical", 32))):
        target = D.SphereMarginalCDF.typical(system.n)
        out[label] = (system, AV.sphere_triples(system, target, 2000, seed=12))
    return out


def test_criterion_01_j3_closed_form():
    t0 = time.time()
    s = np.arange(0.1, 10.0 + 1e-9, 0.1)
    gap = float(np.max(np.abs(sphere.jn_many(3, s) - np.sin(s) / s)))
    elapsed = time.time() - t0
    report(1, "J3 closed form", gap <= 1e-10 and elapsed < 1.0, elapsed, f"max gap {gap:.2e}")


def test_criterion_02_normalization_and_moment_bound():
    t0 = time.time()
    ok = True
    detail = []
    for n in (2, 3, 5, 10, 50):
        # n = 2 has the integrable edge singularity: integrate through x = sin v
        def f(v, n=n):
            return np.ones_like(v) if n == 2 else np.exp((n - 2) * np.log(np.cos(v)))

        mass = 2 * math.exp(sphere.log_normalizer(n)) * integrate(f, 0, math.pi / 2, tol=1e-13)
        if abs(mass - 1.0) > 1e-10:
            ok = False
            detail.append(f"mass(n={n})={mass}")
        for p in range(1, 9):
            val = sphere.theta1_abs_moment(n, p)
            if val > 2.0 * (p / n) ** (p / 2) + 1e-12:
                ok = False
                detail.append(f"moment bound n={n} p={p}")
    elapsed = time.time() - t0
    report(2, "density mass + moment bound", ok and elapsed < 5.0, elapsed, "; ".join(detail))


def test_criterion_03_second_order_rate():
    t0 = time.time()
    ts = np.linspace(0.0, 3.0, 301)

    def sup_gap(n):
        return float(np.max(np.abs(sphere.jn_many(n, ts * math.sqrt(n)) - sphere.jn_edgeworth(n, ts))))

    gaps = {n: sup_gap(n) for n in (50, 100, 200, 400)}
    ratios = [gaps[2 * n] / gaps[n] for n in (50, 100, 200)]
    ok = all(0.15 <= r <= 0.40 for r in ratios)
    elapsed = time.time() - t0
    report(3, "Gaussian approximant O(n^-2) rate", ok and elapsed < 30.0, elapsed,
           f"ratios {[round(r, 3) for r in ratios]}")


def test_criterion_04_walsh_enumeration_vs_mc():
    t0 = time.time()
    system = make_system("walsh", d=3)
    e3 = M.inner_moment(system, 3).value
    e4 = M.inner_moment(system, 4).value
    ok = abs(e3 - 42.0) < 1e-9 and abs(e4 - 301.0) < 1e-9
    detail = f"exact E3={e3} E4={e4}"
    for p, expect in ((3, 42.0), (4, 301.0)):
        est = M.inner_moment(system, p, budget=10**5, seed=2)
        if abs(est.value - expect) >= 4 * est.stderr:
            ok = False
            detail += f"; MC p={p} off by {abs(est.value - expect) / est.stderr:.1f} se"
    elapsed = time.time() - t0
    report(4, "Walsh brute-force moments", ok and elapsed < 10.0, elapsed, detail)


def test_criterion_05_empirical_constant():
    t0 = time.time()
    target = 7 / (8 * math.sqrt(math.pi))
    ok = True
    detail = []
    for n in (32, 64):
        r = AV.sphere_average_distance(make_system("empirical", n), "omega_sq", "normal",
                                       4000, seed=7)
        band = 3 * n * r.stderr + 2 / n
        gap = abs(n * r.mean - target)
        detail.append(f"n={n}: {n * r.mean:.4f} (band {band:.4f})")
        if gap > band:
            ok = False
    elapsed = time.time() - t0
    report(5, "empirical-system 7/(8 sqrt(pi))", ok and elapsed < 60.0, elapsed, "; ".join(detail))


def test_criterion_06_cor51_cross_validation():
    t0 = time.time()
    system = make_system("walsh", d=4)
    n = system.n
    r = AV.sphere_average_distance(system, "omega_sq", "typical", 20000, seed=3)
    pred = E.cor51_prediction(system, M.xi_functionals(system))
    gap = abs(r.mean - pred.main_value)
    band = 3 * r.stderr + 2 / n**2
    elapsed = time.time() - t0
    report(6, "Cor 5.1 vs measured (walsh d=4)", gap <= band and elapsed < 120.0, elapsed,
           f"measured {r.mean:.6f} predicted {pred.main_value:.6f} gap {gap:.2e} band {band:.2e}")


def test_criterion_07_sigma4_exactness():
    t0 = time.time()
    ok = True
    detail = []
    for kind in ("cosine", "chebyshev"):
        est = M.sigma_2p(make_system(kind, 16), 2, budget=10**5, seed=4)
        z = abs(est.value - math.sqrt(0.5)) / est.stderr
        detail.append(f"{kind}: {est.value:.4f} ({z:.1f} se)")
        if z >= 3:
            ok = False
    for kind, kw in (("trig", dict(n=8)), ("walsh", dict(d=3)),
                     ("empirical", dict(n=9)), ("lacunary_trig", dict(n=8, q=2.0))):
        est = M.sigma_2p(make_system(kind, **kw), 2)
        if est.value != 0.0:
            ok = False
            detail.append(f"{kind} sigma4 != 0")
    elapsed = time.time() - t0
    report(7, "sigma4 exactness", ok and elapsed < 30.0, elapsed, "; ".join(detail))


def test_criterion_08_lacunary_counting():
    t0 = time.time()
    zero = M.sigma3_lacunary_count([2**k for k in range(1, 21)])
    fib = [1, 2]
    while len(fib) < 15:  # frequencies for n up to 30 (n/2 per system)
        fib.append(fib[-1] + fib[-2])
    ratios = [M.sigma3_lacunary_count(fib[: n // 2]) / n for n in range(4, 31, 2)]
    ok = zero == 0 and all(r <= 2.0 for r in ratios)
    elapsed = time.time() - t0
    report(8, "lacunary triple counts", ok and elapsed < 1.0, elapsed,
           f"2^k count {zero}; max fib ratio {max(ratios):.3f}")


def test_criterion_09_two_sided_band():
    t0 = time.time()
    scaled = {}
    for n in (8, 16, 32, 64):
        r = AV.sphere_average_distance(make_system("trig", n), "omega_sq", "normal",
                                       2000, seed=1)
        scaled[n] = n * r.mean
    band = max(scaled.values()) / min(scaled.values())
    elapsed = time.time() - t0
    report(9, "two-sided band (trig, omega^2)", band <= 3.0 and elapsed < 300.0, elapsed,
           f"n*mean {[round(v, 4) for v in scaled.values()]} band {band:.2f}")


def test_criterion_10_rho_lower_scaling():
    t0 = time.time()
    vals = {}
    for n in (20, 40, 80, 160):
        cf = lambda t: sphere.jn_many(n, np.asarray(t, dtype=float) * math.sqrt(n))
        vals[n] = n * E.rho_lower_functional(cf, 1.0)
    band = max(vals.values()) / min(vals.values())
    ok = band <= 2.0 and min(vals.values()) > 0
    elapsed = time.time() - t0
    report(10, "CF lower functional Omega(1/n)", ok and elapsed < 10.0, elapsed,
           f"n*value {[round(v, 5) for v in vals.values()]} band {band:.2f}")


def test_criterion_11_quadrature_self_tests():
    t0 = time.time()
    ok = all(abs(E.identity_3_6(eta) - 4 * eta) <= 1e-8 for eta in (0.1, 1.0, 7.0))
    for alpha in np.linspace(0.1, 2.0, 8):
        for r in np.linspace(-0.2, 0.2, 5):
            if abs(E.psi_r(alpha, r) - E.psi_r_quadrature(alpha, r)) > 1e-8:
                ok = False
    eps = np.linspace(-1.0, 1.0, 10**4)
    w = 1 - np.sqrt(1 - eps)
    ok = ok and bool(np.all(E.sqrt_expansion_lower(eps) <= w + 1e-12))
    ok = ok and bool(np.all(w <= E.sqrt_expansion_upper(eps) + 1e-12))
    elapsed = time.time() - t0
    report(11, "quadrature self-tests", ok and elapsed < 10.0, elapsed)


def test_criterion_12_explicit_constant_audits(typical_triples):
    t0 = time.time()
    ok = True
    detail = []
    for label, (system, triples) in typical_triples.items():
        n = system.n
        b = system.norm_bound
        # Prop 11.1 (alpha = 2, explicit 14 and 8)
        lhs = float(triples[:, 1].mean()) / b
        rhs = 14.0 * math.sqrt(math.log(n)) * float((triples[:, 0] ** 2).mean()) + 8.0 / n**4
        if lhs > rhs:
            ok = False
            detail.append(f"{label}: prop 11.1 violated")
        # Prop 11.2
        lhs2 = float(triples[:, 2].mean())
        rhs2 = 14.0 * b * math.sqrt(math.log(n)) * float(triples[:, 0].mean()) + 8.0 * b / n**4
        if lhs2 > rhs2:
            ok = False
            detail.append(f"{label}: prop 11.2 violated")
        # Lemma 12.3 on the omega samples
        om = np.sqrt(triples[:, 1])
        if om.mean() < np.mean(om**2) ** 2 / np.mean(om**3) * (1 - 1e-12):
            ok = False
            detail.append(f"{label}: lemma 12.3 violated")
        # per-direction chain omega^2 <= rho * W
        gap = float(np.max(triples[:, 1] - triples[:, 0] * triples[:, 2]))
        if gap > 1e-9 * float(triples[:, 1].max()):
            ok = False
            detail.append(f"{label}: omega^2 <= rho W violated by {gap:.2e}")
    elapsed = time.time() - t0
    report(12, "explicit-constant audits", ok and elapsed < 120.0, elapsed, "; ".join(detail))


def test_criterion_13_plancherel_consistency():
    t0 = time.time()
    n = 8
    system = make_system("trig", n)
    theta = spawn_rngs(21, 1)[0].standard_normal(n)
    theta /= np.linalg.norm(theta)
    grid = grid_spec(system, 1 << 16)
    s_u = grid.values @ theta
    cdf_side = D.l2_dist_sq(D.ecdf(s_u), D.SphereMarginalCDF.typical(n))

    def integrand(ts):
        ts = np.atleast_1d(ts)
        ft = np.exp(1j * np.outer(ts, s_u)).mean(axis=1)
        f = sphere.jn_many(n, ts * math.sqrt(n))
        return np.abs(ft - f) ** 2 / ts**2

    cf_side = integrate(integrand, 1e-3, 60.0, tol=1e-7) / math.pi
    gap = abs(cdf_side - cf_side)
    elapsed = time.time() - t0
    report(13, "Plancherel consistency (trig n=8)", gap <= 1e-3 and elapsed < 30.0, elapsed,
           f"cdf {cdf_side:.6f} cf {cf_side:.6f} gap {gap:.2e}")


def test_criterion_14_reproducibility(tmp_path):
    t0 = time.time()
    texts = {}
    for preset, budget in (("two_sided", 300), ("walsh", 500)):
        for threads in (1, 4):
            if preset == "two_sided":
                cfg = H.preset_two_sided(seed=99, n_theta=budget, threads=threads)
            else:
                cfg = H.preset_walsh(seed=99, n_theta=budget, threads=threads)
            texts[(preset, threads)] = H.run(cfg).csv_text()
    ok = (texts[("two_sided", 1)] == texts[("two_sided", 4)]
          and texts[("walsh", 1)] == texts[("walsh", 4)])
    elapsed = time.time() - t0
    report(14, "byte-identical CSV across threads", ok and elapsed < 300.0, elapsed)

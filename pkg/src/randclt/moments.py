"""Scalar moment functionals of a system: m_p, sigma_2p, xi moments,
closeness probabilities, and the lacunary triple count.

With Y an independent copy of X:

    m_p      = (1/sqrt(n)) (E <X,Y>^p)^(1/p)
    sigma_2p = sqrt(n) (E | |X|^2/n - 1 |^p)^(1/p)
    xi       = <X,Y>/n

Finite sample spaces (walsh, empirical) support exact enumeration over atom
pairs; everything else uses paired Monte Carlo draws from one split stream,
chunked deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import NumericFailure, ParameterError, UnsupportedModeError
from .streams import spawn_rngs
from .systems import FINITE_KINDS, System, atom_matrix, sample_batch

EXACT = "exact"
_MC_CHUNK = 1 << 14
_MAX_EXACT_ATOMS = 4096


@dataclass(frozen=True)
class Estimate:
    """A scalar estimate with its provenance (exact or Monte Carlo)."""

    value: float
    stderr: float
    mode: str  # "exact" or "monte_carlo"
    n_samples: int = 0

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class XiMoments:
    e1: float
    e2: float
    e3: float
    e4: float
    one_minus_sqrt: Optional[float]  # E(1 - sqrt(1 - xi)); None if 1 - xi < 0 occurs
    mode: str
    stderrs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MomentReport:
    n: int
    m2: float
    m3: Optional[float]
    m4: float
    sigma2: float
    sigma4: float
    xi: XiMoments
    mode: str
    budget: int
    seed: int

    def to_json(self) -> dict:
        return {
            "n": self.n, "m2": self.m2, "m3": self.m3, "m4": self.m4,
            "sigma2": self.sigma2, "sigma4": self.sigma4,
            "xi": {
                "E": self.xi.e1, "E2": self.xi.e2, "E3": self.xi.e3, "E4": self.xi.e4,
                "one_minus_sqrt": self.xi.one_minus_sqrt,
            },
            "mode": self.mode, "budget": self.budget, "seed": self.seed,
        }


def pair_law(system: System) -> tuple[np.ndarray, np.ndarray]:
    """All values of <X, Y> with probabilities, for finite sample spaces."""
    values, probs = atom_matrix(system)
    if values.shape[0] > _MAX_EXACT_ATOMS:
        raise UnsupportedModeError(
            f"exact enumeration over {values.shape[0]}^2 atom pairs is too large"
        )
    gram = values @ values.T
    pp = np.outer(probs, probs)
    vals, inv = np.unique(np.round(gram, 9), return_inverse=True)
    agg = np.zeros(vals.size)
    np.add.at(agg, inv.ravel(), pp.ravel())
    return vals, agg


def _require_budget(budget) -> int:
    if budget == EXACT:
        raise UnsupportedModeError("exact mode is only available for walsh and empirical systems")
    n_samples = int(budget)
    if n_samples < 1:
        raise ParameterError("Monte Carlo budget must be >= 1")
    return n_samples


def _paired_mc(system: System, n_samples: int, seed: int, fn) -> tuple[float, float]:
    """Mean and stderr of fn(X, Y) over paired draws, deterministic chunking."""
    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    rngs = spawn_rngs(seed, n_chunks)
    total = 0.0
    total_sq = 0.0
    count = 0
    for chunk in range(n_chunks):
        m = min(_MC_CHUNK, n_samples - count)
        x = sample_batch(system, rngs[chunk], m)
        y = sample_batch(system, rngs[chunk], m)
        vals = fn(x, y)
        total += float(vals.sum())
        total_sq += float(np.square(vals).sum())
        count += m
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    stderr = math.sqrt(var / count)
    return mean, stderr


def inner_moment(system: System, p: int, budget: Union[str, int] = EXACT,
                 seed: int = 0) -> Estimate:
    """E <X, Y>^p; exact over atom pairs or paired Monte Carlo."""
    p = int(p)
    if p < 1:
        raise ParameterError("moment order p must be a positive integer")
    if budget == EXACT:
        vals, probs = pair_law(system)
        return Estimate(float(np.dot(vals**p, probs)), 0.0, EXACT)
    n_samples = _require_budget(budget)
    mean, stderr = _paired_mc(
        system, n_samples, seed, lambda x, y: np.sum(x * y, axis=1) ** p
    )
    return Estimate(mean, stderr, "monte_carlo", n_samples)


def m_p(system: System, p: int, budget: Union[str, int] = EXACT, seed: int = 0) -> Estimate:
    """(1/sqrt(n)) (E <X,Y>^p)^(1/p).

    For even p a negative Monte Carlo estimate signals a too-small budget
    (the true value is nonnegative) and raises; for odd p, a negative
    estimate is reported as not estimable (value nan) rather than clamped
    silently.
    """
    inner = inner_moment(system, p, budget, seed)
    if inner.value < 0.0:
        if p % 2 == 0:
            raise NumericFailure(
                f"E<X,Y>^{p} estimate {inner.value:.3e} is negative; "
                f"stderr {inner.stderr:.3e} too large at this budget"
            )
        return Estimate(float("nan"), inner.stderr, inner.mode, inner.n_samples)
    root = inner.value ** (1.0 / p) / math.sqrt(system.n)
    # delta-method propagation of the stderr through x -> x^(1/p)/sqrt(n)
    dst = 0.0
    if inner.stderr > 0 and inner.value > 0:
        dst = inner.stderr * inner.value ** (1.0 / p - 1.0) / (p * math.sqrt(system.n))
    return Estimate(root, dst, inner.mode, inner.n_samples)


def sigma_2p(system: System, p: float, budget: Union[str, int] = 10**5,
             seed: int = 0) -> Estimate:
    """sqrt(n) (E | |X|^2/n - 1 |^p)^(1/p); exactly 0 for fixed-norm systems."""
    if p < 1:
        raise ParameterError("sigma_2p needs p >= 1")
    if system.fixed_norm:
        return Estimate(0.0, 0.0, EXACT)
    if budget == EXACT:
        raise UnsupportedModeError("sigma_2p exact mode is only the fixed-norm shortcut")
    n_samples = _require_budget(budget)
    profile = sigma_2p_profile(system, [p], n_samples, seed)
    return profile[0]


def sigma_2p_profile(system: System, ps, n_samples: int, seed: int = 0) -> list[Estimate]:
    """sigma_2p for several p on one shared sample set (per-sample monotone in p)."""
    n = system.n
    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    rngs = spawn_rngs(seed, n_chunks)
    devs = []
    count = 0
    for chunk in range(n_chunks):
        m = min(_MC_CHUNK, n_samples - count)
        x = sample_batch(system, rngs[chunk], m)
        devs.append(np.abs(np.sum(x * x, axis=1) / n - 1.0))
        count += m
    dev = np.concatenate(devs)
    out = []
    for p in ps:
        powed = dev ** float(p)
        mean = float(powed.mean())
        se = float(powed.std(ddof=1) / math.sqrt(powed.size)) if powed.size > 1 else 0.0
        value = math.sqrt(n) * mean ** (1.0 / p)
        dst = 0.0
        if mean > 0:
            dst = math.sqrt(n) * se * mean ** (1.0 / p - 1.0) / p
        out.append(Estimate(value, dst, "monte_carlo", n_samples))
    return out


def xi_functionals(system: System, budget: Union[str, int] = EXACT, seed: int = 0) -> XiMoments:
    """Moments of xi = <X,Y>/n and E(1 - sqrt(1 - xi)).

    The square-root functional needs 1 - xi >= 0, guaranteed for fixed-norm
    systems; it is reported as None whenever a negative argument occurs.
    """
    n = system.n
    if budget == EXACT:
        vals, probs = pair_law(system)
        xi = vals / n
        mom = [float(np.dot(xi**k, probs)) for k in (1, 2, 3, 4)]
        arg = 1.0 - xi
        oms = None
        if np.all(arg >= -1e-12):
            oms = float(np.dot(1.0 - np.sqrt(np.maximum(arg, 0.0)), probs))
        return XiMoments(*mom, one_minus_sqrt=oms, mode=EXACT)
    n_samples = _require_budget(budget)
    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    rngs = spawn_rngs(seed, n_chunks)
    chunks = []
    count = 0
    for chunk in range(n_chunks):
        m = min(_MC_CHUNK, n_samples - count)
        x = sample_batch(system, rngs[chunk], m)
        y = sample_batch(system, rngs[chunk], m)
        chunks.append(np.sum(x * y, axis=1) / n)
        count += m
    xi = np.concatenate(chunks)
    mom = []
    errs = {}
    for k in (1, 2, 3, 4):
        v = xi**k
        mom.append(float(v.mean()))
        errs[f"e{k}"] = float(v.std(ddof=1) / math.sqrt(v.size))
    arg = 1.0 - xi
    oms = None
    if np.all(arg >= -1e-12):
        v = 1.0 - np.sqrt(np.maximum(arg, 0.0))
        oms = float(v.mean())
        errs["one_minus_sqrt"] = float(v.std(ddof=1) / math.sqrt(v.size))
    return XiMoments(*mom, one_minus_sqrt=oms, mode="monte_carlo", stderrs=errs)


def closeness_probability(system: System, lam: float, budget: Union[str, int] = 10**5,
                          seed: int = 0) -> Estimate:
    """P(|X - Y|^2 <= lam * n); exact on finite spaces.

    lam = 1/4 reproduces the event |X - Y| <= sqrt(n)/2 of the lower bound.
    """
    if not 0.0 < lam <= 1.0:
        raise ParameterError("lam must lie in (0, 1]")
    n = system.n
    if budget == EXACT:
        if system.kind not in FINITE_KINDS:
            raise UnsupportedModeError("exact closeness needs a finite sample space")
        vals, probs = pair_law(system)
        if system.fixed_norm:
            dist_sq = 2.0 * n - 2.0 * vals
        else:  # pragma: no cover - all finite kinds are fixed-norm
            raise UnsupportedModeError("exact closeness implemented for fixed-norm spaces")
        return Estimate(float(probs[dist_sq <= lam * n + 1e-9].sum()), 0.0, EXACT)
    n_samples = _require_budget(budget)
    mean, stderr = _paired_mc(
        system, n_samples, seed,
        lambda x, y: (np.sum((x - y) ** 2, axis=1) <= lam * n).astype(float),
    )
    return Estimate(mean, stderr, "monte_carlo", n_samples)


def sigma3_lacunary_count(frequencies, include_equal_pair: bool = False) -> int:
    """Number of triples i1 < i2 < i3 with m_{i1} + m_{i2} = m_{i3}.

    This strict count vanishes for every ratio q >= 2 (doubling a frequency
    never reuses an index).  ``include_equal_pair`` relaxes the first
    inequality to i1 <= i2; that variant is nonzero for exact powers of two
    ((k, k, k+1) solves 2^k + 2^k = 2^(k+1)), so the q >= 2 vanishing
    statement only holds for the strict count.
    """
    freqs = np.asarray(list(frequencies), dtype=np.int64)
    if freqs.size and (np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0)):
        raise ParameterError("frequencies must be strictly increasing positive integers")
    index = {int(v): i for i, v in enumerate(freqs)}
    count = 0
    for i1 in range(freqs.size):
        start = i1 if include_equal_pair else i1 + 1
        for i2 in range(start, freqs.size):
            i3 = index.get(int(freqs[i1] + freqs[i2]))
            if i3 is not None and i3 > i2:
                count += 1
    return count


def moment_report(system: System, budget: Union[str, int], seed: int = 0) -> MomentReport:
    """Assemble the m_p / sigma_2p / xi summary for one system."""
    mode = EXACT if budget == EXACT else "monte_carlo"
    m2 = m_p(system, 2, budget, seed)
    m3 = m_p(system, 3, budget, seed)
    m4 = m_p(system, 4, budget, seed)
    if system.fixed_norm:
        s2 = s4 = Estimate(0.0, 0.0, EXACT)
    else:
        n_mc = 10**5 if budget == EXACT else int(budget)
        s2, s4 = sigma_2p_profile(system, [1, 2], n_mc, seed)
    xi = xi_functionals(system, budget, seed)
    return MomentReport(
        n=system.n, m2=m2.value, m3=(None if math.isnan(m3.value) else m3.value),
        m4=m4.value, sigma2=s2.value, sigma4=s4.value, xi=xi, mode=mode,
        budget=0 if budget == EXACT else int(budget), seed=seed,
    )

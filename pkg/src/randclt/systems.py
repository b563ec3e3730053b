"""Constructors and samplers for the concrete orthonormal systems.

Each system is a random vector X in R^n built from an orthonormal family on a
probability space (Omega, P), together with metadata flags, all derivable
from the construction:

    kind             Omega                X_k
    trig             (-pi, pi)            sqrt(2) cos(kt), sqrt(2) sin(kt)
    cosine           (0, pi)              sqrt(2) cos(kt)
    chebyshev        (-1, 1), arcsine     sqrt(2) cos(k arccos t)
    shifted_periodic (0,1)^2              Psi(kt + s),  Psi 1-periodic
    walsh            {-1,1}^d             prod_{k in tau} t_k, tau nonempty
    empirical        {1..n}               sqrt(n) e_k
    lacunary_trig    (-pi, pi)            sqrt(2) cos(m_k t), sqrt(2) sin(m_k t)

Flags: isotropic (E X_i X_j = delta_ij), fixed_norm (|X|^2 = n a.s.),
mean_zero, and the coordinate sup bound b = sup_k |X_k|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError, UnsupportedModeError
from .quadrature import integrate

KINDS = ("trig", "cosine", "chebyshev", "shifted_periodic", "walsh", "empirical", "lacunary_trig")

FINITE_KINDS = ("walsh", "empirical")

_MAX_WALSH_D = 16


@dataclass(frozen=True)
class PsiDescriptor:
    """A 1-periodic profile with declared mean 0 and second moment 1 on (0,1)."""

    fn: Callable[[np.ndarray], np.ndarray]
    name: Optional[str]
    lipschitz: Optional[float]
    sup: float
    fourth_moment: Optional[float] = None  # int Psi^4, when known analytically

    def __call__(self, x):
        return self.fn(np.mod(x, 1.0))


def _cos2pi(x):
    return math.sqrt(2.0) * np.cos(2.0 * math.pi * x)


def _triangle(x):
    return math.sqrt(3.0) * (1.0 - 4.0 * np.abs(x - 0.5))


PSI_PRESETS: dict[str, PsiDescriptor] = {
    "cos2pi": PsiDescriptor(
        fn=_cos2pi, name="cos2pi", lipschitz=2.0 * math.pi * math.sqrt(2.0),
        sup=math.sqrt(2.0), fourth_moment=1.5,
    ),
    "triangle": PsiDescriptor(
        fn=_triangle, name="triangle", lipschitz=4.0 * math.sqrt(3.0),
        sup=math.sqrt(3.0), fourth_moment=1.8,
    ),
}


def validate_psi(psi: PsiDescriptor, tol: float = 1e-6) -> None:
    """Reject profiles whose mean / second moment violate the declared values."""
    mean = integrate(lambda x: psi.fn(x), 0.0, 1.0, tol=1e-9, points=(0.5,))
    m2 = integrate(lambda x: psi.fn(x) ** 2, 0.0, 1.0, tol=1e-9, points=(0.5,))
    if abs(mean) > tol:
        raise ParameterError(f"psi mean {mean:.2e} exceeds tolerance {tol:.0e}")
    if abs(m2 - 1.0) > tol:
        raise ParameterError(f"psi second moment {m2:.6f} must be 1 within {tol:.0e}")


@dataclass(frozen=True)
class System:
    """Immutable descriptor of one orthonormal system of dimension n."""

    kind: str
    n: int
    params: dict = field(default_factory=dict)
    isotropic: bool = True
    fixed_norm: bool = False
    mean_zero: bool = True
    sup_bound: float = math.sqrt(2.0)

    def label(self) -> str:
        if self.kind == "walsh":
            return f"walsh[d={self.params['d']}]"
        if self.kind == "shifted_periodic":
            return f"shifted_periodic[{self.params.get('psi_name', 'custom')}]"
        if self.kind == "lacunary_trig":
            return f"lacunary_trig[q={self.params.get('q')}]"
        return self.kind

    @property
    def norm_bound(self) -> float:
        """b with |X| <= b sqrt(n) a.s. (1 for fixed-norm systems)."""
        return 1.0 if self.fixed_norm else self.sup_bound

    def psi(self) -> PsiDescriptor:
        return self.params["psi"]

    def frequencies(self) -> np.ndarray:
        if self.kind == "trig":
            return np.arange(1, self.n // 2 + 1)
        return np.asarray(self.params["frequencies"])


@dataclass(frozen=True)
class SystemSample:
    """One draw: the vector x and the underlying sample point omega."""

    x: np.ndarray
    omega: object


def _check_n(n) -> int:
    if n is None:
        raise ParameterError("dimension n is required for this kind")
    n = int(n)
    if n < 2:
        raise ParameterError(f"dimension must be >= 2, got {n}")
    return n


def _lacunary_frequencies(n_half: int, q: float, m1: int) -> np.ndarray:
    if not q > 1.0:
        raise ParameterError(f"lacunary ratio q must exceed 1, got {q}")
    freqs = [int(m1)]
    while len(freqs) < n_half:
        nxt = max(int(math.ceil(freqs[-1] * q)), freqs[-1] + 1)
        freqs.append(nxt)
    return np.asarray(freqs, dtype=np.int64)


def make_system(
    kind: str,
    n: Optional[int] = None,
    *,
    d: Optional[int] = None,
    psi: PsiDescriptor | str | None = None,
    frequencies=None,
    q: Optional[float] = None,
    m1: int = 1,
) -> System:
    """Construct a system descriptor, validating kind-specific constraints."""
    if kind not in KINDS:
        raise ParameterError(f"unknown system kind {kind!r}; choose from {KINDS}")

    if kind == "trig":
        n = _check_n(n)
        if n % 2:
            raise ParameterError(f"trig system needs even n, got {n}")
        return System(kind, n, {}, isotropic=True, fixed_norm=True, mean_zero=True,
                      sup_bound=math.sqrt(2.0))

    if kind == "cosine":
        n = _check_n(n)
        return System(kind, n, {}, isotropic=True, fixed_norm=False, mean_zero=True,
                      sup_bound=math.sqrt(2.0))

    if kind == "chebyshev":
        n = _check_n(n)
        return System(kind, n, {}, isotropic=True, fixed_norm=False, mean_zero=True,
                      sup_bound=math.sqrt(2.0))

    if kind == "shifted_periodic":
        n = _check_n(n)
        if psi is None:
            psi = "cos2pi"
        if isinstance(psi, str):
            try:
                psi = PSI_PRESETS[psi]
            except KeyError:
                raise ParameterError(f"unknown psi preset {psi!r}") from None
        validate_psi(psi)
        return System(kind, n, {"psi": psi, "psi_name": psi.name},
                      isotropic=True, fixed_norm=False, mean_zero=True, sup_bound=psi.sup)

    if kind == "walsh":
        if d is None:
            if n is None:
                raise ParameterError("walsh system needs d (or n = 2^d - 1)")
            d = int(math.log2(n + 1))
            if 2**d - 1 != int(n):
                raise ParameterError(f"walsh system needs n = 2^d - 1, got {n}")
        d = int(d)
        if d < 2 or d > _MAX_WALSH_D:
            raise ParameterError(f"walsh system needs 2 <= d <= {_MAX_WALSH_D}, got {d}")
        if n is not None and int(n) != 2**d - 1:
            raise ParameterError(f"walsh: n = {n} inconsistent with d = {d}")
        return System(kind, 2**d - 1, {"d": d},
                      isotropic=True, fixed_norm=True, mean_zero=True, sup_bound=1.0)

    if kind == "empirical":
        n = _check_n(n)
        return System(kind, n, {},
                      isotropic=True, fixed_norm=True, mean_zero=False,
                      sup_bound=math.sqrt(n))

    # lacunary_trig
    n = _check_n(n)
    if n % 2:
        raise ParameterError(f"lacunary_trig system needs even n, got {n}")
    if frequencies is not None:
        freqs = np.asarray(list(frequencies), dtype=np.int64)
        if freqs.size != n // 2:
            raise ParameterError(f"need {n // 2} frequencies for n = {n}, got {freqs.size}")
        if np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
            raise ParameterError("frequencies must be strictly increasing positive integers")
        ratios = freqs[1:] / freqs[:-1]
        q_implied = float(ratios.min()) if freqs.size > 1 else 2.0
        if q is not None and q_implied < float(q) - 1e-12:
            raise ParameterError(
                f"frequency ratios fall below the declared q = {q} (min ratio {q_implied:.4f})"
            )
        q_val = float(q) if q is not None else q_implied
    else:
        if q is None:
            raise ParameterError("lacunary_trig needs either frequencies or a ratio q")
        freqs = _lacunary_frequencies(n // 2, float(q), m1)
        q_val = float(q)
    return System("lacunary_trig", n,
                  {"frequencies": tuple(int(f) for f in freqs), "q": q_val},
                  isotropic=True, fixed_norm=True, mean_zero=True, sup_bound=math.sqrt(2.0))


# ---------------------------------------------------------------------------
# sampling


def _trig_eval(freqs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """(len(t), 2*len(freqs)) matrix of sqrt(2)(cos m_k t, sin m_k t) pairs."""
    phase = np.multiply.outer(t, freqs.astype(float))
    out = np.empty((t.size, 2 * freqs.size))
    out[:, 0::2] = math.sqrt(2.0) * np.cos(phase)
    out[:, 1::2] = math.sqrt(2.0) * np.sin(phase)
    return out


def _walsh_eval(signs: np.ndarray) -> np.ndarray:
    """(rows, 2^d - 1) Walsh products in binary-counter order of the subsets."""
    rows, d = signs.shape
    out = np.empty((rows, 2**d - 1))
    # dynamic programme: X_j = X_{j - lowbit(j)} * t_{log2(lowbit(j))}
    for j in range(1, 2**d):
        low = j & (-j)
        k = low.bit_length() - 1
        rest = j - low
        col = signs[:, k] if rest == 0 else out[:, rest - 1] * signs[:, k]
        out[:, j - 1] = col
    return out


def sample_batch(system: System, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n) array of independent draws of X."""
    kind, n = system.kind, system.n
    if kind in ("trig", "lacunary_trig"):
        t = rng.uniform(-math.pi, math.pi, size)
        return _trig_eval(system.frequencies(), t)
    if kind == "cosine":
        t = rng.uniform(0.0, math.pi, size)
        phase = np.multiply.outer(t, np.arange(1.0, n + 1))
        return math.sqrt(2.0) * np.cos(phase)
    if kind == "chebyshev":
        u = rng.uniform(0.0, 1.0, size)
        phase = np.multiply.outer(math.pi * u, np.arange(1.0, n + 1))
        return math.sqrt(2.0) * np.cos(phase)
    if kind == "shifted_periodic":
        t = rng.uniform(0.0, 1.0, size)
        s = rng.uniform(0.0, 1.0, size)
        psi = system.psi()
        args = np.multiply.outer(t, np.arange(1.0, n + 1)) + s[:, None]
        return psi(args)
    if kind == "walsh":
        d = system.params["d"]
        signs = rng.integers(0, 2, size=(size, d)) * 2 - 1
        return _walsh_eval(signs)
    if kind == "empirical":
        idx = rng.integers(0, n, size)
        out = np.zeros((size, n))
        out[np.arange(size), idx] = math.sqrt(n)
        return out
    raise ParameterError(f"unknown kind {kind}")  # pragma: no cover


def sample_x(system: System, rng: np.random.Generator) -> SystemSample:
    """One draw of X together with the underlying sample point."""
    kind, n = system.kind, system.n
    if kind in ("trig", "lacunary_trig"):
        t = float(rng.uniform(-math.pi, math.pi))
        return SystemSample(_trig_eval(system.frequencies(), np.array([t]))[0], t)
    if kind == "cosine":
        t = float(rng.uniform(0.0, math.pi))
        return SystemSample(math.sqrt(2.0) * np.cos(t * np.arange(1.0, n + 1)), t)
    if kind == "chebyshev":
        u = float(rng.uniform(0.0, 1.0))
        t = math.cos(math.pi * u)
        return SystemSample(math.sqrt(2.0) * np.cos(math.pi * u * np.arange(1.0, n + 1)), t)
    if kind == "shifted_periodic":
        t = float(rng.uniform(0.0, 1.0))
        s = float(rng.uniform(0.0, 1.0))
        psi = system.psi()
        return SystemSample(psi(t * np.arange(1.0, n + 1) + s), (t, s))
    if kind == "walsh":
        d = system.params["d"]
        signs = rng.integers(0, 2, size=(1, d)) * 2 - 1
        return SystemSample(_walsh_eval(signs)[0], signs[0].copy())
    if kind == "empirical":
        idx = int(rng.integers(0, n))
        x = np.zeros(n)
        x[idx] = math.sqrt(n)
        return SystemSample(x, idx)
    raise ParameterError(f"unknown kind {kind}")  # pragma: no cover


def walsh_sample_from_omega(system: System, signs) -> np.ndarray:
    """Evaluate the Walsh vector at an explicit sign pattern (diagnostics)."""
    signs = np.asarray(signs, dtype=np.int64).reshape(1, -1)
    if signs.shape[1] != system.params["d"]:
        raise ParameterError("sign pattern length must equal d")
    return _walsh_eval(signs)[0]


# ---------------------------------------------------------------------------
# finite sample spaces and dense grids


def atom_matrix(system: System) -> tuple[np.ndarray, np.ndarray]:
    """All atoms of a finite sample space: (matrix (m, n), probabilities (m,))."""
    if system.kind == "walsh":
        d = system.params["d"]
        rows = np.arange(2**d, dtype=np.int64)
        signs = 1 - 2 * ((rows[:, None] >> np.arange(d)[None, :]) & 1)
        return _walsh_eval(signs), np.full(2**d, 2.0**-d)
    if system.kind == "empirical":
        n = system.n
        return math.sqrt(n) * np.eye(n), np.full(n, 1.0 / n)
    raise UnsupportedModeError(f"{system.kind} has a continuous sample space")


@dataclass(frozen=True)
class GridSpec:
    """Deterministic midpoint grid over an interval sample space.

    values: (K_eff, n) matrix of X at the cell midpoints, equal cell mass.
    cell_osc: bound on sup_cell |<X(omega), theta> - <X(mid), theta>| for |theta| = 1;
    certifies the Kantorovich error of the grid CDF of S_theta.
    """

    values: np.ndarray
    cell_osc: float


def grid_certificate(system: System, budget: int) -> float:
    """Per-cell oscillation bound of the midpoint grid, without building it."""
    kind, n = system.kind, system.n
    budget = int(budget)
    if budget < 2:
        raise ParameterError("inner budget must be at least 2")
    if kind in ("trig", "lacunary_trig"):
        return math.sqrt(2.0) * float(system.frequencies().max()) * (math.pi / budget)
    if kind == "cosine":
        return math.sqrt(2.0) * n * (math.pi / (2.0 * budget))
    if kind == "chebyshev":
        return math.sqrt(2.0) * math.pi * n / (2.0 * budget)
    if kind == "shifted_periodic":
        psi = system.psi()
        if psi.lipschitz is None:
            raise UnsupportedModeError("grid evaluation needs a declared Lipschitz constant for psi")
        k_side = max(2, int(round(math.sqrt(budget))))
        per_coord = psi.lipschitz * (np.arange(1, n + 1) * (0.5 / k_side) + 0.5 / k_side)
        return float(np.sqrt(np.sum(per_coord**2)))
    raise UnsupportedModeError(f"{kind} does not use grid evaluation")


def grid_spec(system: System, budget: int) -> GridSpec:
    """Grid of at least 2 cells; ``budget`` is the total number of cells."""
    kind, n = system.kind, system.n
    budget = int(budget)
    osc = grid_certificate(system, budget)
    if kind in ("trig", "lacunary_trig"):
        freqs = system.frequencies()
        t = -math.pi + (np.arange(budget) + 0.5) * (2.0 * math.pi / budget)
        return GridSpec(_trig_eval(freqs, t), osc)
    if kind == "cosine":
        t = (np.arange(budget) + 0.5) * (math.pi / budget)
        vals = math.sqrt(2.0) * np.cos(np.multiply.outer(t, np.arange(1.0, n + 1)))
        return GridSpec(vals, osc)
    if kind == "chebyshev":
        u = (np.arange(budget) + 0.5) / budget
        vals = math.sqrt(2.0) * np.cos(np.multiply.outer(math.pi * u, np.arange(1.0, n + 1)))
        return GridSpec(vals, osc)
    # shifted_periodic
    psi = system.psi()
    k_side = max(2, int(round(math.sqrt(budget))))
    t = (np.arange(k_side) + 0.5) / k_side
    s = (np.arange(k_side) + 0.5) / k_side
    tt, ss = np.meshgrid(t, s, indexing="ij")
    args = np.multiply.outer(tt.ravel(), np.arange(1.0, n + 1)) + ss.ravel()[:, None]
    return GridSpec(psi(args), osc)


# ---------------------------------------------------------------------------
# analytic facts


def exact_sigma4(system: System) -> Optional[float]:
    """sigma_4^2 = Var(|X|^2)/n when known in closed form; None otherwise."""
    if system.fixed_norm:
        return 0.0
    if system.kind in ("cosine", "chebyshev"):
        return 0.5
    if system.kind == "shifted_periodic":
        m4 = system.psi().fourth_moment
        return None if m4 is None else m4 - 1.0
    return None


def mean_vector_norm(system: System) -> float:
    """|E X| when known in closed form (0 for mean-zero kinds)."""
    if system.mean_zero:
        return 0.0
    if system.kind == "empirical":
        return 1.0  # E X = (1/sqrt(n)) (1, ..., 1)
    raise UnsupportedModeError(f"|E X| not known in closed form for {system.kind}")


# ---------------------------------------------------------------------------
# JSON round-trip


def system_to_json(system: System) -> dict:
    params = dict(system.params)
    if system.kind == "shifted_periodic":
        name = params.pop("psi_name", None)
        params.pop("psi", None)
        if name is None:
            raise ParameterError("cannot serialize a shifted_periodic system with a custom psi")
        params["psi"] = name
    if system.kind == "lacunary_trig":
        params["frequencies"] = list(params["frequencies"])
    return {
        "kind": system.kind,
        "n": system.n,
        "params": params,
        "flags": {
            "isotropic": system.isotropic,
            "fixed_norm": system.fixed_norm,
            "mean_zero": system.mean_zero,
            "sup_norm_bound": system.sup_bound,
        },
    }


def system_from_json(obj: dict) -> System:
    kind = obj.get("kind")
    params = dict(obj.get("params", {}))
    n = obj.get("n")
    sys = make_system(
        kind,
        n,
        d=params.get("d"),
        psi=params.get("psi"),
        frequencies=params.get("frequencies"),
        q=params.get("q"),
        m1=params.get("m1", 1),
    )
    flags = obj.get("flags")
    if flags:
        derived = system_to_json(sys)["flags"]
        for key in ("isotropic", "fixed_norm", "mean_zero"):
            if key in flags and bool(flags[key]) != derived[key]:
                raise ParameterError(f"flag {key!r} conflicts with the {kind} construction")
    return sys

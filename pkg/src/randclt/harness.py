"""Experiment orchestration: configs, reports, presets, and inequality audits.

A config names one system family, a list of dimensions, metrics and targets;
``run`` executes the cross product, attaches the applicable expansion
predictions and bounds, executes the requested audits, and serializes the
rows to a fixed, versioned CSV schema (byte-identical for identical
config + seed, independent of the thread count) or to JSON.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from . import distances, expansions, moments
from .averaging import (
    DEFAULT_INNER_BUDGET,
    DEFAULT_MIXTURE_BUDGET,
    METRICS,
    TARGETS,
    SphereAverage,
    metric_series,
    sphere_triples,
    target_object,
)
from .errors import ParameterError
from .sphere import jn_many
from .systems import FINITE_KINDS, System, make_system, mean_vector_norm

CSV_SCHEMA = "randclt-rows-v1"
CSV_COLUMNS = ("system", "kind", "n", "metric", "target", "mean", "stderr",
               "n_theta", "inner_budget", "seed")

LACUNARY_SCHEMA = "randclt-lacunary-v1"
LACUNARY_COLUMNS = ("n", "q", "m_max", "sigma3_count", "count_over_n")


@dataclass
class ExperimentConfig:
    system: dict                      # {"kind": ..., "params": {...}}; n comes from n_list
    n_list: list
    seed: int                         # mandatory: reports never default to wall clock
    metrics: list = field(default_factory=lambda: ["omega_sq"])
    targets: list = field(default_factory=lambda: ["normal"])
    n_theta: int = 2000
    inner_budget: int = DEFAULT_INNER_BUDGET
    mixture_budget: int = DEFAULT_MIXTURE_BUDGET
    moment_budget: int = 10**5
    audits: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    threads: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if not self.n_list:
            raise ParameterError("n_list must be nonempty")
        if self.seed is None:
            raise ParameterError("seed is mandatory")
        for m in self.metrics:
            if m not in METRICS:
                raise ParameterError(f"unknown metric {m!r}")
        for t in self.targets:
            if t not in TARGETS:
                raise ParameterError(f"unknown target {t!r}")
        if self.format not in ("csv", "json"):
            raise ParameterError(f"unknown format {self.format!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        missing = {"system", "n_list", "seed"} - set(obj)
        if missing:
            raise ParameterError(f"config is missing required keys: {sorted(missing)}")
        return cls(**obj)

    def make_system_for(self, n: int) -> System:
        params = dict(self.system.get("params", {}))
        return make_system(
            self.system["kind"], n,
            d=params.get("d"), psi=params.get("psi"),
            frequencies=params.get("frequencies"), q=params.get("q"),
            m1=params.get("m1", 1),
        )


@dataclass
class AuditResult:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "satisfied": bool(self.satisfied), "details": self.details}


class AuditContext:
    """Lazily computed measurement inputs shared by the audits."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._systems: dict = {}
        self._triples: dict = {}

    def system(self, n: int) -> System:
        if n not in self._systems:
            self._systems[n] = self.config.make_system_for(n)
        return self._systems[n]

    def triples(self, n: int, target: str) -> np.ndarray:
        key = (n, target)
        if key not in self._triples:
            cfg = self.config
            system = self.system(n)
            tgt = target_object(system, target, cfg.seed, cfg.mixture_budget)
            self._triples[key] = sphere_triples(
                system, tgt, cfg.n_theta, cfg.inner_budget, cfg.seed, cfg.threads
            )
        return self._triples[key]


def _per_n(ctx: AuditContext):
    return [int(n) for n in ctx.config.n_list]


def audit_lemma_12_3(ctx: AuditContext) -> list[AuditResult]:
    """E xi >= (E xi^2)^2 / E xi^3 on every measured omega-sample set (exact
    per empirical measure, by Cauchy-Schwarz under the xi-weighted law)."""
    out = []
    for target in ctx.config.targets:
        for n in _per_n(ctx):
            om = np.sqrt(ctx.triples(n, target)[:, 1])
            lhs = float(om.mean())
            rhs = float(np.mean(om**2) ** 2 / np.mean(om**3))
            out.append(AuditResult("lemma_12_3", lhs, rhs, lhs >= rhs * (1 - 1e-12),
                                   {"n": n, "target": target}))
    return out


def audit_lemma_4_3(ctx: AuditContext) -> list[AuditResult]:
    """E (xi-eta)^2/(xi+eta)^(3/2) <= 12 Var(xi)/(E xi)^(3/2) with eta an
    independent copy under the empirical measure (all ordered pairs)."""
    out = []
    for target in ctx.config.targets:
        for n in _per_n(ctx):
            om = np.sqrt(ctx.triples(n, target)[:, 1])[:512]
            xi, eta = np.meshgrid(om, om)
            s = xi + eta
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = np.where(s > 0, (xi - eta) ** 2 / np.maximum(s, 1e-300) ** 1.5, 0.0)
            lhs = float(vals.mean())
            rhs = float(12.0 * om.var() / om.mean() ** 1.5)
            out.append(AuditResult("lemma_4_3", lhs, rhs, lhs <= rhs * (1 + 1e-12),
                                   {"n": n, "target": target, "atoms": int(om.size)}))
    return out


def audit_omega_rho_w_chain(ctx: AuditContext) -> list[AuditResult]:
    """omega^2 <= rho * W for every computed direction."""
    out = []
    for target in ctx.config.targets:
        for n in _per_n(ctx):
            t = ctx.triples(n, target)
            gap = t[:, 1] - t[:, 0] * t[:, 2]
            lhs = float(gap.max())
            out.append(AuditResult("omega_rho_w_chain", lhs, 0.0,
                                   lhs <= 1e-9 * float(t[:, 1].max()) + 1e-12,
                                   {"n": n, "target": target}))
    return out


def audit_prop_11_1(ctx: AuditContext) -> list[AuditResult]:
    """b^(-1) E omega^2 <= 14 sqrt(log n) E rho^2 + 8/n^4 (alpha = 2 case)."""
    out = []
    for n in _per_n(ctx):
        t = ctx.triples(n, "typical")
        b = ctx.system(n).norm_bound
        lhs = float(t[:, 1].mean()) / b
        rhs = 14.0 * math.sqrt(math.log(n)) * float((t[:, 0] ** 2).mean()) + 8.0 / n**4
        out.append(AuditResult("prop_11_1", lhs, rhs, lhs <= rhs, {"n": n, "b": b, "alpha": 2}))
    return out


def audit_prop_11_2(ctx: AuditContext) -> list[AuditResult]:
    """E W <= 14 b sqrt(log n) E rho + 8 b / n^4."""
    out = []
    for n in _per_n(ctx):
        t = ctx.triples(n, "typical")
        b = ctx.system(n).norm_bound
        lhs = float(t[:, 2].mean())
        rhs = 14.0 * b * math.sqrt(math.log(n)) * float(t[:, 0].mean()) + 8.0 * b / n**4
        out.append(AuditResult("prop_11_2", lhs, rhs, lhs <= rhs, {"n": n, "b": b}))
    return out


def audit_two_sided_13_1(ctx: AuditContext) -> list[AuditResult]:
    """Band factor of n * E omega^2(F_theta, Phi) across the n list (<= 3)."""
    vals = {n: n * float(ctx.triples(n, "normal")[:, 1].mean()) for n in _per_n(ctx)}
    band = max(vals.values()) / min(vals.values())
    return [AuditResult("two_sided_13_1", band, 3.0, band <= 3.0,
                        {"scaled_means": {str(k): v for k, v in vals.items()}})]


def audit_prop_3_1(ctx: AuditContext) -> list[AuditResult]:
    """Implied constant in E omega^2(F_theta, F) <= c A / n, and its cross-n band."""
    cfg = ctx.config
    implied = {}
    for n in _per_n(ctx):
        system = ctx.system(n)
        t = ctx.triples(n, "typical")
        rep = moments.moment_report(
            system, moments.EXACT if system.kind in FINITE_KINDS else cfg.moment_budget, cfg.seed
        )
        a_norm = mean_vector_norm(system)
        A = 1.0 + a_norm**2 + rep.m2**2 + rep.sigma4**2
        implied[n] = n * float(t[:, 1].mean()) / A
    band = max(implied.values()) / min(implied.values())
    return [AuditResult("prop_3_1", band, 3.0, band <= 3.0,
                        {"implied_constants": {str(k): v for k, v in implied.items()}})]


def audit_prop_9_1(ctx: AuditContext) -> list[AuditResult]:
    """Implied constant in E rho^2(F_theta, Phi) <= c (1+sigma2^2)(log n)^2/n."""
    cfg = ctx.config
    implied = {}
    for n in _per_n(ctx):
        system = ctx.system(n)
        t = ctx.triples(n, "normal")
        if system.fixed_norm:
            s2 = 0.0
        else:
            s2 = moments.sigma_2p(system, 1, cfg.moment_budget, cfg.seed).value
        implied[n] = n * float((t[:, 0] ** 2).mean()) / ((1 + s2**2) * math.log(n) ** 2)
    band = max(implied.values()) / min(implied.values())
    return [AuditResult("prop_9_1", band, 3.0, band <= 3.0,
                        {"implied_constants": {str(k): v for k, v in implied.items()}})]


def audit_jensen_rho(ctx: AuditContext) -> list[AuditResult]:
    """E_theta rho(F_theta, Phi) >= rho(F, Phi) (convexity of the sup distance)."""
    out = []
    for n in _per_n(ctx):
        system = ctx.system(n)
        if not system.fixed_norm:
            continue
        t = ctx.triples(n, "normal")
        rho = t[:, 0]
        lhs = float(rho.mean() - 3.0 * rho.std(ddof=1) / math.sqrt(rho.size))
        rhs = distances.kolmogorov(distances.SphereMarginalCDF.typical(n), distances.NormalCDF())
        out.append(AuditResult("jensen_rho", lhs, rhs, lhs >= rhs, {"n": n}))
    return out


def audit_lemma_2_3(ctx: Optional[AuditContext] = None) -> list[AuditResult]:
    """Fitted constant in |J_n(t sqrt(n)) - exp(-t^2/2)| <= C min(1, t^2)/n,
    stable within a factor 2 across n in {25, 50, 100, 200}."""
    ts = np.linspace(0.05, 6.0, 240)
    fitted = {}
    for n in (25, 50, 100, 200):
        gap = np.abs(jn_many(n, ts * math.sqrt(n)) - np.exp(-0.5 * ts**2))
        fitted[n] = float(np.max(gap * n / np.minimum(1.0, ts**2)))
    band = max(fitted.values()) / min(fitted.values())
    return [AuditResult("lemma_2_3", band, 2.0, band <= 2.0,
                        {"fitted_constants": {str(k): v for k, v in fitted.items()}})]


def audit_subgaussian_cf(ctx: Optional[AuditContext] = None) -> list[AuditResult]:
    """|J_n(t sqrt(n))| <= 5 exp(-t^2/2) + 4 exp(-n/12) on t in [0, 10]."""
    ts = np.linspace(0.0, 10.0, 501)
    worst = -np.inf
    for n in (5, 10, 20, 50):
        lhs = np.abs(jn_many(n, ts * math.sqrt(n)))
        rhs = 5.0 * np.exp(-0.5 * ts**2) + 4.0 * math.exp(-n / 12.0)
        worst = max(worst, float(np.max(lhs - rhs)))
    return [AuditResult("subgaussian_cf", worst, 0.0, worst <= 0.0, {})]


AUDITS = {
    "lemma_12_3": audit_lemma_12_3,
    "lemma_4_3": audit_lemma_4_3,
    "omega_rho_w_chain": audit_omega_rho_w_chain,
    "prop_11_1": audit_prop_11_1,
    "prop_11_2": audit_prop_11_2,
    "two_sided_13_1": audit_two_sided_13_1,
    "prop_3_1": audit_prop_3_1,
    "prop_9_1": audit_prop_9_1,
    "jensen_rho": audit_jensen_rho,
    "lemma_2_3": audit_lemma_2_3,
    "subgaussian_cf": audit_subgaussian_cf,
}

#: audits that need no measurement context
STANDALONE_AUDITS = ("lemma_2_3", "subgaussian_cf")


def audit(name: str, ctx: Optional[AuditContext]) -> list[AuditResult]:
    if name not in AUDITS:
        raise ParameterError(f"unknown audit {name!r}; choose from {sorted(AUDITS)}")
    if name in STANDALONE_AUDITS:
        return AUDITS[name](ctx)
    if ctx is None:
        raise ParameterError(f"audit {name!r} needs measurement inputs")
    return AUDITS[name](ctx)


# ---------------------------------------------------------------------------
# run


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    predictions: list
    bounds: list
    audits: list
    provenance: dict

    def to_json(self) -> dict:
        return {
            "schema": CSV_SCHEMA,
            "provenance": self.provenance,
            "config": {**self.config.__dict__},
            "rows": [dict(zip(CSV_COLUMNS, r.csv_row())) for r in self.rows],
            "predictions": self.predictions,
            "bounds": self.bounds,
            "audits": [a.to_json() for a in self.audits],
        }

    def csv_text(self) -> str:
        lines = [f"# schema: {CSV_SCHEMA}", ",".join(CSV_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(_csv_cell(v) for v in row.csv_row()))
        return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _predictions_for(ctx: AuditContext, n: int, target: str, series_mean: float,
                     series_stderr: float) -> list[dict]:
    cfg = ctx.config
    system = ctx.system(n)
    budget = moments.EXACT if system.kind in FINITE_KINDS else cfg.moment_budget
    preds = []
    if target == "typical" and system.fixed_norm:
        xi = moments.xi_functionals(system, budget, cfg.seed)
        for pred in (expansions.cor51_prediction(system, xi),
                     expansions.prop42_prediction(system, budget, cfg.seed)):
            gap = abs(series_mean - pred.main_value)
            band = 3.0 * series_stderr + pred.error_scale
            preds.append({"n": n, "target": target, **pred.to_json(),
                          "measured": series_mean, "gap": gap, "band": band,
                          "within_band": bool(gap <= band)})
    if target == "normal":
        rep = moments.moment_report(system, budget, cfg.seed)
        pred = expansions.thm11_prediction(system, rep)
        entry = {"n": n, "target": target, **pred.to_json(), "measured": series_mean}
        if pred.applicable and not math.isnan(pred.main_value):
            gap = abs(series_mean - pred.main_value)
            band = 3.0 * series_stderr + pred.error_scale
            entry.update({"gap": gap, "band": band, "within_band": bool(gap <= band)})
        preds.append(entry)
    return preds


def run(config: ExperimentConfig) -> ExperimentReport:
    ctx = AuditContext(config)
    rows: list[SphereAverage] = []
    predictions: list[dict] = []
    bounds: list[dict] = []
    for n in config.n_list:
        n = int(n)
        system = ctx.system(n)
        for target in config.targets:
            triples = ctx.triples(n, target)
            for metric in config.metrics:
                series = metric_series(triples, metric)
                stderr = float(series.std(ddof=1) / math.sqrt(series.size)) if series.size > 1 else 0.0
                rows.append(SphereAverage(
                    system=system.label(), kind=system.kind, n=n, metric=metric,
                    target=target, mean=float(series.mean()), stderr=stderr,
                    n_theta=int(config.n_theta),
                    inner_budget=int(config.inner_budget) if system.kind not in FINITE_KINDS else 0,
                    seed=int(config.seed),
                ))
                if metric == "omega_sq":
                    predictions.extend(_predictions_for(ctx, n, target, rows[-1].mean, stderr))
        for bound_kind in config.bounds:
            if bound_kind == "thm12":
                budget = moments.EXACT if system.kind in FINITE_KINDS else config.moment_budget
                bounds.append({"n": n, **expansions.thm12_lower_bound(
                    system, budget, seed=config.seed).to_json()})
            else:
                raise ParameterError(f"unknown bound kind {bound_kind!r}")
    audit_results: list[AuditResult] = []
    for name in config.audits:
        audit_results.extend(audit(name, ctx))
    provenance = {
        "seed": int(config.seed),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    report = ExperimentReport(config, rows, predictions, bounds, audit_results, provenance)
    if config.output:
        write_report(report, config.output, config.format)
    return report


def write_report(report: ExperimentReport, path: str, fmt: str) -> None:
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write(report.csv_text())
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ParameterError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# presets


def preset_two_sided(seed: int, n_theta: int = 2000, threads: Optional[int] = None,
                     output: Optional[str] = None, fmt: str = "csv") -> ExperimentConfig:
    return ExperimentConfig(
        system={"kind": "trig", "params": {}}, n_list=[8, 16, 32, 64], seed=seed,
        metrics=["omega_sq"], targets=["normal"], n_theta=n_theta,
        audits=["two_sided_13_1", "lemma_12_3"], threads=threads, output=output, format=fmt,
    )


def preset_walsh(seed: int, n_theta: int = 20000, threads: Optional[int] = None,
                 output: Optional[str] = None, fmt: str = "csv") -> ExperimentConfig:
    return ExperimentConfig(
        system={"kind": "walsh", "params": {}}, n_list=[7, 15], seed=seed,
        metrics=["omega_sq", "rho", "kantorovich"], targets=["typical", "normal"],
        n_theta=n_theta, bounds=["thm12"],
        audits=["prop_11_1", "prop_11_2", "lemma_12_3", "omega_rho_w_chain"],
        threads=threads, output=output, format=fmt,
    )


def lacunary_table(q: float, n_max: int, m1: int = 1) -> list[dict]:
    """Sigma_3 counts for the geometric lacunary frequency rule, n = 2, 4, ..."""
    rows = []
    for n in range(2, n_max + 1, 2):
        system = make_system("lacunary_trig", n, q=q, m1=m1)
        freqs = list(system.params["frequencies"])
        count = moments.sigma3_lacunary_count(freqs)
        rows.append({"n": n, "q": q, "m_max": freqs[-1],
                     "sigma3_count": count, "count_over_n": count / n})
    return rows


def lacunary_csv(rows: list[dict]) -> str:
    lines = [f"# schema: {LACUNARY_SCHEMA}", ",".join(LACUNARY_COLUMNS)]
    for r in rows:
        lines.append(",".join(_csv_cell(r[c]) for c in LACUNARY_COLUMNS))
    return "\n".join(lines) + "\n"

"""Monte Carlo studies for coverage, power and method comparison.

Scenarios describe two groups of clustered Gaussian or exponentiated
Gaussian marker vectors with exchangeable correlation.  Each replicate gets
its own RNG stream derived from (master seed, replicate index), so results
are independent of execution order and worker count.

Three runners:

* :func:`run_study` estimates bias, RMSE, confidence coverage and rejection
  rate of the weighted paired wAUC difference over the scenario grid of
  measures and weighting methods.
* :func:`run_method_comparison` benchmarks the empirical AUC against a
  binormal moment plug-in and a logistic-score AUC, per marker.
* scenario text files (``key = value`` lines) drive both from the CLI.
"""

from __future__ import annotations

import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.linalg import block_diag
from scipy.stats import norm

from .covariance import contrast_covariance, sigma_matrix
from .dataset import MarkerDataset, SubjectRecord
from .designs import StudyDesign
from .errors import DataFormatError, WrocError
from .estimators import wauc_vector
from .inference import (
    equal_weights,
    optimal_weights,
    pair_contrast,
    variance_delta,
)
from .measures import WeightMeasure, parse_measure

_FAMILIES = ("normal", "lognormal")


# -- scenario description ------------------------------------------------


@dataclass(frozen=True)
class ScenarioSpec:
    """Generative description of one simulation scenario.

    Marker-level means and variances apply to every time and replicate of
    that marker on the latent Gaussian scale; ``family="lognormal"``
    exponentiates the draws.  With ``correlation_scope="all"`` the
    correlation is exchangeable across all of a subject's measurements;
    with ``"modality"`` (reader designs only) it is exchangeable within
    each modality's markers and the two modality blocks are independent.
    Cluster sizes are per-subject-half pairs: the first ``ceil(n/2)``
    subjects of a group use the first size for every cell, the rest the
    second.
    """

    name: str
    family: str
    design: StudyDesign
    mu_diseased: tuple[float, ...]
    mu_nondiseased: tuple[float, ...]
    variances: tuple[float, ...]
    rho_diseased: float
    rho_nondiseased: float
    cluster_sizes_diseased: tuple[int, int]
    cluster_sizes_nondiseased: tuple[int, int]
    n_diseased: int
    n_nondiseased: int
    n_reps: int
    seed: int
    measures: tuple[WeightMeasure, ...]
    weight_methods: tuple[str, ...]
    alpha: float = 0.05
    correlation_scope: str = "all"

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if self.correlation_scope not in ("all", "modality"):
            raise ValueError(
                f"correlation_scope must be 'all' or 'modality', got {self.correlation_scope!r}")
        if self.correlation_scope == "modality" and self.design.kind != "readers":
            raise ValueError("correlation_scope='modality' needs a reader design")
        n_markers = self.design.n_markers
        for label, values in (("mu_diseased", self.mu_diseased),
                              ("mu_nondiseased", self.mu_nondiseased),
                              ("variances", self.variances)):
            if len(values) != n_markers:
                raise ValueError(f"{label} needs {n_markers} entries, got {len(values)}")
        if any(v <= 0 for v in self.variances):
            raise ValueError("variances must be positive")
        if any(c < 1 for c in self.cluster_sizes_diseased + self.cluster_sizes_nondiseased):
            raise ValueError("cluster sizes must be >= 1")
        if self.n_diseased < 2 or self.n_nondiseased < 2:
            raise ValueError("need at least 2 subjects per group")
        if self.n_reps < 1:
            raise ValueError("need at least one replicate")
        if not self.measures:
            raise ValueError("need at least one weight measure")
        for method in self.weight_methods:
            if method not in ("equal", "optimal"):
                raise ValueError(f"unknown weight method {method!r}")

    def config_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "design": (f"readers:{self.design.n_readers}" if self.design.kind == "readers"
                       else f"longitudinal:{self.design.n_times}"),
            "mu_diseased": list(self.mu_diseased),
            "mu_nondiseased": list(self.mu_nondiseased),
            "variances": list(self.variances),
            "rho_diseased": self.rho_diseased,
            "rho_nondiseased": self.rho_nondiseased,
            "correlation_scope": self.correlation_scope,
            "cluster_sizes_diseased": list(self.cluster_sizes_diseased),
            "cluster_sizes_nondiseased": list(self.cluster_sizes_nondiseased),
            "n_diseased": self.n_diseased,
            "n_nondiseased": self.n_nondiseased,
            "n_reps": self.n_reps,
            "seed": self.seed,
            "measures": [m.selector() for m in self.measures],
            "weight_methods": list(self.weight_methods),
            "alpha": self.alpha,
        }


def compound_symmetry(variances, rho: float) -> np.ndarray:
    """Covariance with exchangeable correlation rho and the given diagonal."""
    sd = np.sqrt(np.asarray(variances, dtype=float))
    dim = sd.size
    if dim > 1 and not -1.0 / (dim - 1) < rho < 1.0:
        raise ValueError(f"rho {rho} breaks positive definiteness for dimension {dim}")
    corr = np.full((dim, dim), rho) + (1.0 - rho) * np.eye(dim)
    return corr * np.outer(sd, sd)


def sample_mvn(mu, cov, size: int, rng: np.random.Generator,
               family: str = "normal") -> np.ndarray:
    """Draw ``size`` correlated vectors via the lower Cholesky factor applied
    to iid standard normals; lognormal draws exponentiate the result."""
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    draws = np.asarray(mu, dtype=float) + rng.standard_normal((size, chol.shape[0])) @ chol.T
    if family == "lognormal":
        draws = np.exp(draws)
    elif family != "normal":
        raise ValueError(f"family must be one of {_FAMILIES}, got {family!r}")
    return draws


# -- closed-form truth ---------------------------------------------------


def binormal_roc(u, mu_x: float, sd_x: float, mu_y: float, sd_y: float):
    """ROC of two Gaussian marker distributions at false-positive rate u."""
    return norm.cdf((mu_x - mu_y + sd_y * norm.ppf(u)) / sd_x)


def true_wauc(measure: WeightMeasure, mu_x: float, sd_x: float,
              mu_y: float, sd_y: float, family: str = "normal") -> float:
    """Population wAUC of a binormal pair.

    Exponentiating both groups preserves ranks, so the lognormal family has
    the same wAUC as its latent Gaussian parameters; ``family`` is accepted
    for symmetry and validated only.
    """
    if family not in _FAMILIES:
        raise ValueError(f"family must be one of {_FAMILIES}, got {family!r}")
    if measure.kind == "full":
        value = float(norm.cdf((mu_x - mu_y) / math.hypot(sd_x, sd_y)))
    elif measure.kind == "pauc":
        value, _ = quad(binormal_roc, measure.lower, measure.upper,
                        args=(mu_x, sd_x, mu_y, sd_y), epsabs=1e-10, limit=200)
    else:
        value = sum(mass * float(binormal_roc(u, mu_x, sd_x, mu_y, sd_y))
                    for u, mass in measure.atoms)
    if measure.normalized:
        value /= measure.total_mass
    return float(value)


def true_paired_delta(scenario: ScenarioSpec, measure: WeightMeasure) -> float:
    """Equal-weight population value of the paired wAUC difference.

    Every scenario here has time-invariant marginals, so per-time and pooled
    wAUCs share the same population value and equal weights lose nothing.
    """
    design = scenario.design
    pairs = design.n_pairs
    if design.kind == "readers":
        first = range(0, pairs)
        second = range(pairs, 2 * pairs)
    else:
        # both markers repeat over times; marker indices 0 and 1
        first = [0] * pairs
        second = [1] * pairs
    diffs = []
    for a, b in zip(first, second):
        omega_a = true_wauc(measure, scenario.mu_diseased[a], math.sqrt(scenario.variances[a]),
                            scenario.mu_nondiseased[a], math.sqrt(scenario.variances[a]))
        omega_b = true_wauc(measure, scenario.mu_diseased[b], math.sqrt(scenario.variances[b]),
                            scenario.mu_nondiseased[b], math.sqrt(scenario.variances[b]))
        diffs.append(omega_a - omega_b)
    return float(np.mean(diffs))


# -- dataset generation --------------------------------------------------


@dataclass
class _HalfPlan:
    n_subjects: int
    cluster_size: int
    mu_row: np.ndarray
    chol: np.ndarray


@dataclass
class _GeneratorPlan:
    scenario: ScenarioSpec
    diseased: tuple[_HalfPlan, _HalfPlan]
    nondiseased: tuple[_HalfPlan, _HalfPlan]


def _half_plan(scenario: ScenarioSpec, n_subjects: int, cluster_size: int,
               mu_markers, rho: float) -> _HalfPlan:
    design = scenario.design
    cells_per_marker = design.n_times * cluster_size
    mu_row = np.repeat(np.asarray(mu_markers, dtype=float), cells_per_marker)
    var_row = np.repeat(np.asarray(scenario.variances, dtype=float), cells_per_marker)
    if scenario.correlation_scope == "modality":
        # independent per-modality blocks; marker-major layout puts the
        # first modality's readers in the leading half of the row
        split = design.n_pairs * cells_per_marker
        cov = block_diag(compound_symmetry(var_row[:split], rho),
                         compound_symmetry(var_row[split:], rho))
    else:
        cov = compound_symmetry(var_row, rho)
    return _HalfPlan(n_subjects=n_subjects, cluster_size=cluster_size,
                     mu_row=mu_row, chol=np.linalg.cholesky(cov))


def _build_plan(scenario: ScenarioSpec) -> _GeneratorPlan:
    def halves(total, sizes, mu, rho):
        n_first = (total + 1) // 2
        return (
            _half_plan(scenario, n_first, sizes[0], mu, rho),
            _half_plan(scenario, total - n_first, sizes[1], mu, rho),
        )

    return _GeneratorPlan(
        scenario=scenario,
        diseased=halves(scenario.n_diseased, scenario.cluster_sizes_diseased,
                        scenario.mu_diseased, scenario.rho_diseased),
        nondiseased=halves(scenario.n_nondiseased, scenario.cluster_sizes_nondiseased,
                           scenario.mu_nondiseased, scenario.rho_nondiseased),
    )


def _draw_group(plan_halves, scenario: ScenarioSpec, rng: np.random.Generator,
                id_prefix: str) -> list[SubjectRecord]:
    design = scenario.design
    n_markers = design.n_markers
    n_times = design.n_times
    records: list[SubjectRecord] = []
    subject_no = 0
    for half in plan_halves:
        if half.n_subjects == 0:
            continue
        z = rng.standard_normal((half.n_subjects, half.mu_row.size))
        rows = half.mu_row + z @ half.chol.T
        if scenario.family == "lognormal":
            rows = np.exp(rows)
        c = half.cluster_size
        for row in rows:
            subject_no += 1
            cells = {}
            col = 0
            for marker in range(1, n_markers + 1):
                for t in range(1, n_times + 1):
                    cells[(marker, t)] = tuple(row[col:col + c])
                    col += c
            records.append(SubjectRecord(f"{id_prefix}{subject_no}", cells))
    return records


def generate_dataset(scenario: ScenarioSpec, rng: np.random.Generator,
                     plan: _GeneratorPlan | None = None) -> MarkerDataset:
    """One simulated dataset.  Draws diseased halves first, then
    non-diseased, so streams are reproducible."""
    if plan is None:
        plan = _build_plan(scenario)
    diseased = _draw_group(plan.diseased, scenario, rng, "d")
    nondiseased = _draw_group(plan.nondiseased, scenario, rng, "n")
    return MarkerDataset(diseased, nondiseased, scenario.design.n_markers,
                         scenario.design.n_times)


def replicate_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng((seed, rep))


# -- scenario builders ---------------------------------------------------

_TABLE1_VARIANCES = (1.0, 1.5, 2.0, 1.0, 1.5, 2.0)
DEFAULT_MEASURES = (WeightMeasure.full_auc(), WeightMeasure.partial_auc(0.0, 0.6))


def table1_scenario(rho: float, n: int, family: str = "normal", *,
                    n_reps: int = 1000, seed: int = 20240817,
                    measures=DEFAULT_MEASURES,
                    weight_methods=("equal",)) -> ScenarioSpec:
    """Three readers, two identical modalities: a null difference whose
    coverage calibrates the variance estimator.

    Reader scenarios correlate measurements within each modality only;
    the two modality blocks are independent.  That is the only structure
    under which the equal-weight difference variance grows as rho falls,
    the behaviour the power study is built around.
    """
    return ScenarioSpec(
        name=f"table1_rho{rho:g}_n{n}_{family}",
        family=family,
        design=StudyDesign.readers(3),
        mu_diseased=(1.0,) * 6,
        mu_nondiseased=(0.0,) * 6,
        variances=_TABLE1_VARIANCES,
        rho_diseased=rho,
        rho_nondiseased=rho,
        cluster_sizes_diseased=(1, 1),
        cluster_sizes_nondiseased=(1, 1),
        n_diseased=n,
        n_nondiseased=n,
        n_reps=n_reps,
        seed=seed,
        measures=tuple(measures),
        weight_methods=tuple(weight_methods),
        correlation_scope="modality",
    )


def table2_scenario(rho: float, n: int, family: str = "lognormal", *,
                    n_reps: int = 1000, seed: int = 20240817) -> ScenarioSpec:
    """Method-comparison scenario: modality 2 separates better than
    modality 1, heavier means on the second half."""
    base = table1_scenario(rho, n, family, n_reps=n_reps, seed=seed,
                           measures=(WeightMeasure.full_auc(),))
    return replace(base,
                   name=f"table2_rho{rho:g}_n{n}_{family}",
                   mu_diseased=(1.0, 1.0, 1.0, 1.5, 2.0, 2.5))


def table3_scenario(rho: float, n: int, *, n_reps: int = 1000,
                    seed: int = 20240817,
                    measures=DEFAULT_MEASURES,
                    weight_methods=("equal", "optimal")) -> ScenarioSpec:
    """Power scenario: reader 1 modality 1 separates strongly, so optimal
    weights concentrate there."""
    return ScenarioSpec(
        name=f"table3_rho{rho:g}_n{n}",
        family="normal",
        design=StudyDesign.readers(3),
        mu_diseased=(2.0, 1.0, 1.0, 1.0, 1.0, 1.0),
        mu_nondiseased=(0.0,) * 6,
        variances=(1.0, 1.5, 2.0, 2.0, 3.0, 2.0),
        rho_diseased=rho,
        rho_nondiseased=rho,
        cluster_sizes_diseased=(1, 1),
        cluster_sizes_nondiseased=(1, 1),
        n_diseased=n,
        n_nondiseased=n,
        n_reps=n_reps,
        seed=seed,
        measures=tuple(measures),
        weight_methods=tuple(weight_methods),
        correlation_scope="modality",
    )


def table4_scenario(n: int, family: str = "lognormal", *, n_reps: int = 1000,
                    seed: int = 20240817,
                    measures=DEFAULT_MEASURES) -> ScenarioSpec:
    """Longitudinal two-marker scenario with three times and unbalanced
    cluster sizes (diseased 2 then 4 replicates, non-diseased 5 then 3)."""
    return ScenarioSpec(
        name=f"table4_n{n}_{family}",
        family=family,
        design=StudyDesign.longitudinal(3),
        mu_diseased=(2.0, 1.0),
        mu_nondiseased=(0.0, 0.0),
        variances=(1.0, 1.0),
        rho_diseased=0.4,
        rho_nondiseased=0.3,
        cluster_sizes_diseased=(2, 4),
        cluster_sizes_nondiseased=(5, 3),
        n_diseased=n,
        n_nondiseased=n,
        n_reps=n_reps,
        seed=seed,
        measures=tuple(measures),
        weight_methods=("equal",),
    )


def null_scenario(rho: float = 0.5, n: int = 200, *, n_reps: int = 2000,
                  seed: int = 20240817) -> ScenarioSpec:
    """Identical modalities, used to check test size under both weightings."""
    base = table1_scenario(rho, n, "normal", n_reps=n_reps, seed=seed,
                           measures=(WeightMeasure.full_auc(),),
                           weight_methods=("equal", "optimal"))
    return replace(base, name=f"null_rho{rho:g}_n{n}")


_STUDY_BUILDERS = {
    "table1": table1_scenario,
    "table2": table2_scenario,
    "table3": table3_scenario,
    "table4": table4_scenario,
    "null": null_scenario,
}


# -- study runner --------------------------------------------------------


@dataclass(frozen=True)
class CellResult:
    """Aggregated Monte Carlo summary for one (measure, weighting) cell."""

    measure: str
    weight_method: str
    truth: float
    n_reps: int
    n_failures: int
    n_fallbacks: int
    mean_estimate: float
    bias: float
    rmse: float
    coverage: float
    power: float
    mean_variance: float
    mc_variance: float
    estimates: np.ndarray = field(repr=False, compare=False, default=None)
    variances: np.ndarray = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "weight_method": self.weight_method,
            "truth": self.truth,
            "n_reps": self.n_reps,
            "n_failures": self.n_failures,
            "n_fallbacks": self.n_fallbacks,
            "mean_estimate": self.mean_estimate,
            "bias": self.bias,
            "bias_pct": 100.0 * self.bias,
            "rmse": self.rmse,
            "coverage": self.coverage,
            "power": self.power,
            "mean_variance": self.mean_variance,
            "mc_variance": self.mc_variance,
        }


@dataclass(frozen=True)
class StudyReport:
    scenario: ScenarioSpec
    cells: tuple[CellResult, ...]
    elapsed_seconds: float

    def cell(self, measure: WeightMeasure | str, weight_method: str) -> CellResult:
        selector = measure.selector() if isinstance(measure, WeightMeasure) else measure
        for cell in self.cells:
            if cell.measure == selector and cell.weight_method == weight_method:
                return cell
        raise KeyError(f"no cell for ({selector!r}, {weight_method!r})")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.config_dict(),
            "elapsed_seconds": self.elapsed_seconds,
            "cells": [cell.to_dict() for cell in self.cells],
        }


def _simulate_one_rep(scenario: ScenarioSpec, plan: _GeneratorPlan, rep: int):
    """(estimate, variance, fallback, failed) per (measure, method) cell."""
    n_cells = len(scenario.measures) * len(scenario.weight_methods)
    out = np.full((n_cells, 4), np.nan)
    rng = replicate_rng(scenario.seed, rep)
    dataset = generate_dataset(scenario, rng, plan)
    design = scenario.design
    idx = 0
    for measure in scenario.measures:
        try:
            omega = wauc_vector(dataset, design, measure)
            cov = sigma_matrix(dataset, design, measure)
            cov_diff = contrast_covariance(cov.sigma, design)
        except (WrocError, np.linalg.LinAlgError, ValueError):
            for _ in scenario.weight_methods:
                out[idx] = (np.nan, np.nan, 0.0, 1.0)
                idx += 1
            continue
        for method in scenario.weight_methods:
            try:
                if method == "equal":
                    w = equal_weights(design.n_pairs)
                else:
                    w = optimal_weights(cov_diff)
                contrast = pair_contrast(design, w)
                estimate = float(contrast.value(omega.values))
                variance = variance_delta(cov, contrast).total
                out[idx] = (estimate, variance, float(w.fell_back), 0.0)
            except (WrocError, np.linalg.LinAlgError, ValueError):
                out[idx] = (np.nan, np.nan, 0.0, 1.0)
            idx += 1
    return out


def _run_rep_range(scenario: ScenarioSpec, reps: list[int]) -> np.ndarray:
    plan = _build_plan(scenario)
    return np.stack([_simulate_one_rep(scenario, plan, rep) for rep in reps])


def run_study(scenario: ScenarioSpec, n_jobs: int = 1) -> StudyReport:
    """Run every replicate and aggregate the (measure, weighting) grid.

    ``n_jobs`` only distributes work; per-replicate RNG streams make the
    output identical for any worker count.
    """
    started = _time.perf_counter()
    reps = list(range(scenario.n_reps))
    if n_jobs > 1 and scenario.n_reps > 1:
        chunks = [list(chunk) for chunk in np.array_split(reps, min(n_jobs * 4, len(reps)))]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            pieces = list(pool.map(_run_rep_range, [scenario] * len(chunks), chunks))
        raw = np.concatenate(pieces)
    else:
        raw = _run_rep_range(scenario, reps)

    crit = float(norm.ppf(1.0 - scenario.alpha / 2.0))
    cells = []
    idx = 0
    for measure in scenario.measures:
        truth = true_paired_delta(scenario, measure)
        for method in scenario.weight_methods:
            est = raw[:, idx, 0]
            var = raw[:, idx, 1]
            fell = raw[:, idx, 2]
            failed = raw[:, idx, 3]
            ok = failed == 0.0
            est_ok = est[ok]
            var_ok = var[ok]
            half_widths = crit * np.sqrt(var_ok)
            covered = np.abs(est_ok - truth) <= half_widths
            rejected = np.abs(est_ok) > half_widths
            n_ok = int(ok.sum())
            cells.append(CellResult(
                measure=measure.selector(),
                weight_method=method,
                truth=truth,
                n_reps=n_ok,
                n_failures=int(scenario.n_reps - n_ok),
                n_fallbacks=int(fell[ok].sum()),
                mean_estimate=float(est_ok.mean()) if n_ok else float("nan"),
                bias=float(est_ok.mean() - truth) if n_ok else float("nan"),
                rmse=float(np.sqrt(np.mean((est_ok - truth) ** 2))) if n_ok else float("nan"),
                coverage=float(covered.mean()) if n_ok else float("nan"),
                power=float(rejected.mean()) if n_ok else float("nan"),
                mean_variance=float(var_ok.mean()) if n_ok else float("nan"),
                mc_variance=float(est_ok.var(ddof=1)) if n_ok > 1 else float("nan"),
                estimates=est_ok,
                variances=var_ok,
            ))
            idx += 1
    return StudyReport(scenario=scenario, cells=tuple(cells),
                       elapsed_seconds=_time.perf_counter() - started)


# -- comparator baselines ------------------------------------------------


def baseline_parametric_auc(x_values, y_values) -> tuple[float, float]:
    """Binormal moment plug-in AUC with its delta-method variance.

    Fits nothing beyond sample means and variances; deliberately misspecified
    for non-Gaussian data, which is the point of the comparison.
    """
    x = np.asarray(x_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    if x.size < 2 or y.size < 2:
        raise ValueError("parametric AUC needs at least 2 values per group")
    sx2 = float(x.var(ddof=1))
    sy2 = float(y.var(ddof=1))
    spread = sx2 + sy2
    if spread <= 0.0:
        raise ValueError("degenerate samples: zero pooled variance")
    diff = float(x.mean() - y.mean())
    delta = diff / math.sqrt(spread)
    d_mu = 1.0 / math.sqrt(spread)
    d_var = -delta / (2.0 * spread)
    var_delta_hat = (d_mu ** 2 * (sx2 / x.size + sy2 / y.size)
                     + d_var ** 2 * (2.0 * sx2 ** 2 / (x.size - 1)
                                     + 2.0 * sy2 ** 2 / (y.size - 1)))
    dens = float(norm.pdf(delta))
    return float(norm.cdf(delta)), dens * dens * var_delta_hat


@dataclass(frozen=True)
class SemiparametricAuc:
    auc: float
    slope: float
    converged: bool
    separation: bool


def _strict_auc(x: np.ndarray, y: np.ndarray) -> float:
    ys = np.sort(y)
    wins = np.searchsorted(ys, x, side="left").sum()
    return float(wins) / (x.size * y.size)


def baseline_semiparametric_auc(x_values, y_values, *, max_iter: int = 50,
                                tol: float = 1e-10) -> SemiparametricAuc:
    """AUC of the fitted logistic score of disease status on the marker.

    The fitted score is monotone in the marker, so its strict-indicator AUC
    equals the empirical AUC when the slope is positive and the reversed
    empirical AUC when negative; it is computed on the marker scale with the
    fitted orientation to keep that identity exact.  Perfect separation is
    detected and reported, falling back to the forward empirical AUC.
    """
    x = np.asarray(x_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    values = np.concatenate([x, y])
    labels = np.concatenate([np.ones(x.size), np.zeros(y.size)])
    sd = values.std(ddof=1)
    forward = _strict_auc(x, y)
    if not sd > 0.0:
        return SemiparametricAuc(auc=forward, slope=0.0, converged=False, separation=False)
    v = (values - values.mean()) / sd
    design = np.column_stack([np.ones(v.size), v])
    beta = np.zeros(2)
    converged = False
    separation = False
    for _ in range(max_iter):
        eta = design @ beta
        p = 1.0 / (1.0 + np.exp(-eta))
        score = design.T @ (labels - p)
        if float(np.linalg.norm(score)) < tol:
            converged = True
            break
        w = p * (1.0 - p)
        hessian = (design * w[:, None]).T @ design
        try:
            step = np.linalg.solve(hessian, score)
        except np.linalg.LinAlgError:
            separation = True
            break
        beta = beta + step
        if not np.all(np.isfinite(beta)) or abs(beta[1]) > 50.0:
            # standardized slope this large means quasi-separated data
            separation = True
            break
    slope = float(beta[1])
    if separation or not converged:
        return SemiparametricAuc(auc=forward, slope=slope,
                                 converged=converged, separation=separation)
    if slope > 0.0:
        return SemiparametricAuc(auc=forward, slope=slope, converged=True, separation=False)
    if slope < 0.0:
        return SemiparametricAuc(auc=_strict_auc(-x, -y), slope=slope,
                                 converged=True, separation=False)
    return SemiparametricAuc(auc=forward, slope=0.0, converged=True, separation=False)


@dataclass(frozen=True)
class MethodCell:
    method: str
    marker: int
    truth: float
    mean_estimate: float
    bias: float
    rmse: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "marker": self.marker,
            "truth": self.truth,
            "mean_estimate": self.mean_estimate,
            "bias": self.bias,
            "rmse": self.rmse,
        }


@dataclass(frozen=True)
class MethodComparisonReport:
    scenario: ScenarioSpec
    component: int
    cells: tuple[MethodCell, ...]
    semiparametric_matches_when_positive: bool
    n_positive_slopes: int
    n_separation: int
    elapsed_seconds: float

    def cell(self, method: str, marker: int | None = None) -> MethodCell:
        marker = self.component if marker is None else marker
        for cell in self.cells:
            if cell.method == method and cell.marker == marker:
                return cell
        raise KeyError(f"no cell for ({method!r}, marker {marker})")

    def parametric_offset(self, marker: int | None = None) -> float:
        """Systematic shortfall of the parametric plug-in, reported with the
        positive orientation truth - mean(estimate)."""
        return -self.cell("parametric", marker).bias

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.config_dict(),
            "component": self.component,
            "cells": [c.to_dict() for c in self.cells],
            "parametric_offset": self.parametric_offset(),
            "semiparametric_matches_when_positive": self.semiparametric_matches_when_positive,
            "n_positive_slopes": self.n_positive_slopes,
            "n_separation": self.n_separation,
            "elapsed_seconds": self.elapsed_seconds,
        }


_COMPARISON_METHODS = ("empirical", "parametric", "semiparametric")


def _comparison_rep(scenario: ScenarioSpec, plan: _GeneratorPlan, rep: int):
    rng = replicate_rng(scenario.seed, rep)
    dataset = generate_dataset(scenario, rng, plan)
    n_markers = scenario.design.n_markers
    est = np.zeros((3, n_markers))
    matches = True
    positive = 0
    separated = 0
    for marker in range(1, n_markers + 1):
        x = dataset.stratum("diseased", marker).values
        y = dataset.stratum("nondiseased", marker).values
        empirical = _strict_auc(x, y)
        parametric, _ = baseline_parametric_auc(x, y)
        semi = baseline_semiparametric_auc(x, y)
        est[0, marker - 1] = empirical
        est[1, marker - 1] = parametric
        est[2, marker - 1] = semi.auc
        if semi.slope > 0.0 and not semi.separation:
            positive += 1
            if semi.auc != empirical:
                matches = False
        if semi.separation:
            separated += 1
    return est, matches, positive, separated


def _comparison_rep_range(scenario: ScenarioSpec, reps: list[int]):
    plan = _build_plan(scenario)
    return [_comparison_rep(scenario, plan, rep) for rep in reps]


def run_method_comparison(scenario: ScenarioSpec, component: int = 1,
                          n_jobs: int = 1) -> MethodComparisonReport:
    """Monte Carlo bias and RMSE of the three per-marker AUC estimators."""
    started = _time.perf_counter()
    if not 1 <= component <= scenario.design.n_markers:
        raise ValueError(f"component {component} outside 1..{scenario.design.n_markers}")
    reps = list(range(scenario.n_reps))
    if n_jobs > 1 and scenario.n_reps > 1:
        chunks = [list(chunk) for chunk in np.array_split(reps, min(n_jobs * 4, len(reps)))]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            pieces = list(pool.map(_comparison_rep_range, [scenario] * len(chunks), chunks))
        results = [item for piece in pieces for item in piece]
    else:
        results = _comparison_rep_range(scenario, reps)

    estimates = np.stack([r[0] for r in results])      # (reps, 3, markers)
    matches = all(r[1] for r in results)
    positive = sum(r[2] for r in results)
    separated = sum(r[3] for r in results)
    full = WeightMeasure.full_auc()
    cells = []
    for m_idx, method in enumerate(_COMPARISON_METHODS):
        for marker in range(1, scenario.design.n_markers + 1):
            truth = true_wauc(full, scenario.mu_diseased[marker - 1],
                              math.sqrt(scenario.variances[marker - 1]),
                              scenario.mu_nondiseased[marker - 1],
                              math.sqrt(scenario.variances[marker - 1]))
            vals = estimates[:, m_idx, marker - 1]
            cells.append(MethodCell(
                method=method,
                marker=marker,
                truth=truth,
                mean_estimate=float(vals.mean()),
                bias=float(vals.mean() - truth),
                rmse=float(np.sqrt(np.mean((vals - truth) ** 2))),
            ))
    return MethodComparisonReport(
        scenario=scenario,
        component=component,
        cells=tuple(cells),
        semiparametric_matches_when_positive=matches,
        n_positive_slopes=positive,
        n_separation=separated,
        elapsed_seconds=_time.perf_counter() - started,
    )


# -- scenario files ------------------------------------------------------


def _parse_int_pair(text: str) -> tuple[int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise ValueError(f"expected one or two integers, got {text!r}")


def parse_scenario_text(text: str) -> ScenarioSpec:
    """Parse the plain key = value scenario format.

    Required key ``study`` picks a builder (table1..table4, null, custom);
    the remaining keys override its parameters.  Custom studies spell out
    the full generative description.
    """
    entries: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"expected 'key = value', got {line!r}", line=line_no)
        key, _, value = line.partition("=")
        entries[key.strip().lower()] = value.strip()

    study = entries.pop("study", None)
    if study is None:
        raise DataFormatError("scenario file needs a 'study' key")
    study = study.lower()

    def pop_float(key, default=None):
        if key in entries:
            return float(entries.pop(key))
        return default

    def pop_int(key, default=None):
        if key in entries:
            return int(entries.pop(key))
        return default

    try:
        n_val = pop_int("n")
        m_val = pop_int("m", n_val)
        j_val = pop_int("j", n_val)
        reps = pop_int("reps", 1000)
        seed = pop_int("seed", 20240817)
        family = entries.pop("family", None)
        alpha = pop_float("alpha", 0.05)
        measures = None
        if "measures" in entries:
            measures = tuple(parse_measure(tok) for tok in entries.pop("measures").split())
        weight_methods = None
        if "weights" in entries:
            weight_methods = tuple(
                tok.strip() for tok in entries.pop("weights").split(",") if tok.strip())

        if study in ("table1", "table3", "null"):
            rho = pop_float("rho", 0.5)
            if m_val is None:
                raise DataFormatError(f"study {study} needs n (or m/j)")
            if study == "table1":
                spec = table1_scenario(rho, m_val, family or "normal",
                                       n_reps=reps, seed=seed)
            elif study == "table3":
                spec = table3_scenario(rho, m_val, n_reps=reps, seed=seed)
            else:
                spec = null_scenario(rho, m_val, n_reps=reps, seed=seed)
        elif study == "table2":
            rho = pop_float("rho", 0.5)
            if m_val is None:
                raise DataFormatError("study table2 needs n (or m/j)")
            spec = table2_scenario(rho, m_val, family or "lognormal",
                                   n_reps=reps, seed=seed)
        elif study == "table4":
            if m_val is None:
                raise DataFormatError("study table4 needs n (or m/j)")
            spec = table4_scenario(m_val, family or "lognormal", n_reps=reps, seed=seed)
        elif study == "custom":
            from .designs import parse_design

            design = parse_design(entries.pop("design"))
            mu_d = tuple(float(v) for v in entries.pop("mu_diseased").split(","))
            mu_n = tuple(float(v) for v in entries.pop("mu_nondiseased").split(","))
            variances = tuple(float(v) for v in entries.pop("variances").split(","))
            spec = ScenarioSpec(
                name=entries.pop("name", "custom"),
                family=family or "normal",
                design=design,
                mu_diseased=mu_d,
                mu_nondiseased=mu_n,
                variances=variances,
                rho_diseased=pop_float("rho_diseased", pop_float("rho", 0.0) or 0.0),
                rho_nondiseased=pop_float("rho_nondiseased", pop_float("rho", 0.0) or 0.0),
                cluster_sizes_diseased=_parse_int_pair(entries.pop("clusters_diseased", "1")),
                cluster_sizes_nondiseased=_parse_int_pair(entries.pop("clusters_nondiseased", "1")),
                n_diseased=m_val if m_val is not None else 50,
                n_nondiseased=j_val if j_val is not None else 50,
                n_reps=reps,
                seed=seed,
                measures=measures or (WeightMeasure.full_auc(),),
                weight_methods=weight_methods or ("equal",),
                alpha=alpha if alpha is not None else 0.05,
                correlation_scope=entries.pop("correlation_scope", "all"),
            )
            entries.pop("rho", None)
            measures = None
            weight_methods = None
        else:
            raise DataFormatError(f"unknown study {study!r}")
    except DataFormatError:
        raise
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad scenario file: {exc}") from exc

    overrides = {}
    if measures:
        overrides["measures"] = measures
    if weight_methods:
        overrides["weight_methods"] = weight_methods
    if alpha is not None:
        overrides["alpha"] = alpha
    if j_val is not None and j_val != spec.n_nondiseased and study != "custom":
        overrides["n_nondiseased"] = j_val
    if overrides:
        spec = replace(spec, **overrides)
    if entries:
        raise DataFormatError(f"unknown scenario keys: {', '.join(sorted(entries))}")
    return spec


def parse_scenario_file(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario_text(handle.read())


def study_names() -> tuple[str, ...]:
    return tuple(_STUDY_BUILDERS)

"""Weighted paired comparisons and the asymptotic z-test.

The paired summary is ``delta = sum_p w_p (omega_first[p] - omega_second[p])
/ sum_p w_p`` over a design's pairs (readers of two modalities, or time
points of two markers).  Weights can be equal, user supplied, or optimal:
the solution of ``(Sigma_A + ridge I) w = 1`` with ``Sigma_A`` the covariance
of the paired differences, which minimizes the variance of the weighted
difference.  If the solved weights are not all positive the comparison
falls back to equal weights and flags it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .covariance import CovarianceEstimate, bootstrap_covariance, contrast_covariance, sigma_matrix
from .dataset import MarkerDataset
from .designs import ContrastFunction, StudyDesign
from .errors import SingularCovarianceError
from .estimators import WaucVector, wauc_vector
from .measures import WeightMeasure

DEFAULT_RIDGE_FACTOR = 1e-8


@dataclass(frozen=True)
class WeightVector:
    """Pair weights normalized to sum one, with provenance."""

    weights: np.ndarray
    method: str                      # "equal" | "optimal" | "custom"
    fell_back: bool = False
    ridge: float = 0.0
    raw_sum: float = float("nan")    # pre-normalization sum of the solved weights

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("weights must be a non-empty vector")
        object.__setattr__(self, "weights", arr)

    @property
    def n_pairs(self) -> int:
        return int(self.weights.size)


def equal_weights(n_pairs: int) -> WeightVector:
    if n_pairs < 1:
        raise ValueError("need at least one pair")
    return WeightVector(np.full(n_pairs, 1.0 / n_pairs), method="equal")


def custom_weights(values) -> WeightVector:
    arr = np.asarray(values, dtype=float)
    total = float(arr.sum())
    if not np.all(np.isfinite(arr)) or total <= 0.0:
        raise ValueError("custom weights must be finite with a positive sum")
    return WeightVector(arr / total, method="custom", raw_sum=total)


def optimal_weights(cov_diff: np.ndarray, ridge: float | None = None) -> WeightVector:
    """Variance-minimizing pair weights from the covariance of the paired
    differences.

    Solves ``(cov_diff + ridge I) w = 1``.  When ``ridge`` is None a default
    of ``1e-8 * trace / n_pairs`` keeps near-singular systems solvable; an
    explicit ridge of 0 lets singularity surface as an error.  Any
    non-positive solved weight triggers the equal-weight fallback, flagged on
    the result.
    """
    mat = np.asarray(cov_diff, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("cov_diff must be a square matrix")
    n_pairs = mat.shape[0]
    if ridge is None:
        ridge = DEFAULT_RIDGE_FACTOR * float(np.trace(mat)) / n_pairs
    if ridge < 0.0:
        raise ValueError("ridge must be non-negative")
    system = mat + ridge * np.eye(n_pairs)
    try:
        raw = np.linalg.solve(system, np.ones(n_pairs))
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError(
            "difference covariance is singular; pass a positive ridge"
        ) from exc
    if not np.all(np.isfinite(raw)):
        raise SingularCovarianceError(
            "difference covariance is numerically singular; pass a larger ridge")
    if np.any(raw <= 0.0):
        fallback = equal_weights(n_pairs)
        return WeightVector(fallback.weights, method="optimal", fell_back=True,
                            ridge=ridge, raw_sum=float(raw.sum()))
    total = float(raw.sum())
    return WeightVector(raw / total, method="optimal", ridge=ridge, raw_sum=total)


def _paired_delta(omega: np.ndarray, weights: WeightVector) -> float:
    omega = np.asarray(omega, dtype=float)
    k = weights.n_pairs
    if omega.size != 2 * k:
        raise ValueError(f"wAUC vector length {omega.size} does not match {k} pairs")
    diffs = omega[:k] - omega[k:]
    w = weights.weights
    return float((w @ diffs) / w.sum())


def delta_m(omega, weights: WeightVector) -> float:
    """Weighted reader-averaged difference between two modalities."""
    values = omega.values if isinstance(omega, WaucVector) else omega
    return _paired_delta(values, weights)


def delta_longitudinal(omega, weights: WeightVector) -> float:
    """Weighted time-averaged wAUC difference between two markers."""
    values = omega.values if isinstance(omega, WaucVector) else omega
    return _paired_delta(values, weights)


def delta_h(omega, contrast: ContrastFunction) -> float:
    """General smooth summary of the wAUC vector."""
    values = omega.values if isinstance(omega, WaucVector) else np.asarray(omega, float)
    return contrast.value(values)


def pair_contrast(design: StudyDesign, weights: WeightVector) -> ContrastFunction:
    """Linear contrast over the full wAUC vector equivalent to the weighted
    paired difference."""
    if weights.n_pairs != design.n_pairs:
        raise ValueError(f"{weights.n_pairs} weights for a {design.n_pairs}-pair design")
    w = weights.weights / weights.weights.sum()
    coefficients = np.concatenate([w, -w])
    return ContrastFunction.linear(coefficients)


@dataclass(frozen=True)
class DeltaVariance:
    total: float
    diseased: float | None = None
    nondiseased: float | None = None

    def __float__(self) -> float:
        return self.total


def variance_delta(cov: CovarianceEstimate | np.ndarray, contrast: ContrastFunction,
                   omega=None) -> DeltaVariance:
    """Delta-method variance of a contrast of the wAUC vector.

    For linear contrasts the gradient is the coefficient vector; smooth
    contrasts are differentiated at ``omega`` (analytically when a gradient
    was declared, by central differences otherwise).  The diseased and
    non-diseased contributions are reported separately when the covariance
    estimate decomposes.
    """
    if isinstance(cov, CovarianceEstimate):
        sigma = cov.sigma
        parts = (cov.sigma_diseased, cov.sigma_nondiseased)
    else:
        sigma = np.asarray(cov, dtype=float)
        parts = (None, None)
    if contrast.kind == "linear":
        grad = np.asarray(contrast.coefficients, dtype=float)
    else:
        if omega is None:
            raise ValueError("smooth contrasts need the wAUC vector to differentiate at")
        values = omega.values if isinstance(omega, WaucVector) else np.asarray(omega, float)
        grad = contrast.gradient(values)
    if grad.size != sigma.shape[0]:
        raise ValueError(
            f"gradient length {grad.size} does not match covariance dimension {sigma.shape[0]}")
    total = float(grad @ sigma @ grad)
    part_d = float(grad @ parts[0] @ grad) if parts[0] is not None else None
    part_n = float(grad @ parts[1] @ grad) if parts[1] is not None else None
    return DeltaVariance(total=total, diseased=part_d, nondiseased=part_n)


@dataclass(frozen=True)
class TestResult:
    estimate: float
    variance: float
    z: float
    p_value: float
    ci_lower: float
    ci_upper: float
    alpha: float


def z_test(estimate: float, variance: float, *, alpha: float = 0.05,
           null: float = 0.0) -> TestResult:
    """Two-sided normal test of ``estimate`` against ``null`` with the given
    variance; also returns the matching confidence interval."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not variance > 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    se = float(np.sqrt(variance))
    z = (float(estimate) - null) / se
    p = 2.0 * float(norm.sf(abs(z)))
    crit = float(norm.ppf(1.0 - alpha / 2.0))
    return TestResult(
        estimate=float(estimate),
        variance=float(variance),
        z=z,
        p_value=p,
        ci_lower=float(estimate) - crit * se,
        ci_upper=float(estimate) + crit * se,
        alpha=alpha,
    )


@dataclass(frozen=True)
class ComparisonResult:
    """Full output of a paired wAUC comparison."""

    estimate: float
    variance: float
    variance_diseased: float | None
    variance_nondiseased: float | None
    z: float
    p_value: float
    ci_lower: float
    ci_upper: float
    alpha: float
    weights: WeightVector
    wauc: WaucVector
    covariance: CovarianceEstimate
    measure: WeightMeasure
    design: StudyDesign

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "variance": self.variance,
            "variance_decomposition": {
                "diseased": self.variance_diseased,
                "nondiseased": self.variance_nondiseased,
            },
            "z": self.z,
            "p_value": self.p_value,
            "ci": [self.ci_lower, self.ci_upper],
            "alpha": self.alpha,
            "weights": {
                "method": self.weights.method,
                "values": [float(w) for w in self.weights.weights],
                "fell_back_to_equal": self.weights.fell_back,
                "ridge": self.weights.ridge,
            },
            "wauc": {label: float(v) for label, v in
                     zip(self.wauc.labels, self.wauc.values)},
            "measure": self.measure.selector(),
        }


def compare_modalities(dataset: MarkerDataset, design: StudyDesign,
                       measure: WeightMeasure, *, weights="equal",
                       alpha: float = 0.05, ridge: float | None = None,
                       midrank: bool = False, bandwidth_rule="silverman") -> ComparisonResult:
    """Estimate, test and interval for the weighted paired wAUC difference.

    ``weights`` is ``"equal"``, ``"optimal"`` (inverse-covariance weights
    solved from this dataset's difference covariance) or an explicit
    sequence of pair weights.
    """
    omega = wauc_vector(dataset, design, measure, midrank=midrank)
    cov = sigma_matrix(dataset, design, measure, midrank=midrank,
                       bandwidth_rule=bandwidth_rule)
    cov_diff = contrast_covariance(cov.sigma, design)
    if isinstance(weights, WeightVector):
        weight_vec = weights
    elif weights == "equal":
        weight_vec = equal_weights(design.n_pairs)
    elif weights == "optimal":
        weight_vec = optimal_weights(cov_diff, ridge=ridge)
    else:
        weight_vec = custom_weights(weights)
    contrast = pair_contrast(design, weight_vec)
    estimate = delta_h(omega, contrast)
    var = variance_delta(cov, contrast)
    test = z_test(estimate, var.total, alpha=alpha)
    return ComparisonResult(
        estimate=test.estimate,
        variance=test.variance,
        variance_diseased=var.diseased,
        variance_nondiseased=var.nondiseased,
        z=test.z,
        p_value=test.p_value,
        ci_lower=test.ci_lower,
        ci_upper=test.ci_upper,
        alpha=test.alpha,
        weights=weight_vec,
        wauc=omega,
        covariance=cov,
        measure=measure,
        design=design,
    )

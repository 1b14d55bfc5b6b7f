"""Cluster-aware covariance estimation for wAUC vectors.

The covariance of the wAUC vector splits into a diseased and a non-diseased
part, reflecting independence of the two groups.  Entries are estimated on
the finite-sample variance scale (the covariance of the estimates as they
stand, with no asymptotic rescaling), with per-subject cluster products
``sum_i c1_i * c2_i / (m1 * m2)`` carrying the cluster structure.

Two computation paths:

* Full-AUC measures use exact placement values (structural components): the
  per-subject sums of placement deviations are empirically covaried across
  subjects with a ddof-1 factor, which reduces exactly to the classic
  structural-component AUC covariance when every subject contributes one
  measurement.  No density estimation is involved.
* Interval measures integrate the survival-based integrand on a
  Gauss-Legendre grid (64 nodes per axis); atomic measures evaluate the same
  integrand as finite sums over their atoms.  Both need the density ratio of
  the two groups at the non-diseased thresholds, estimated by Gaussian
  kernels with a Silverman-type bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import MarkerDataset, Stratum
from .designs import StudyDesign
from .errors import DegenerateDensityError
from .estimators import (
    EmpiricalSurvival,
    WaucVector,
    _auc_core,
    _placements,
    design_strata,
    wauc_vector,
)
from .measures import WeightMeasure

DEFAULT_NODES = 64
PSD_EIGENVALUE_TOLERANCE = 1e-8
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class CovarianceEstimate:
    """Covariance of a wAUC vector on the finite-sample variance scale.

    ``sigma`` always equals ``sigma_diseased + sigma_nondiseased`` elementwise
    when the parts are present; bootstrap estimates cannot decompose and
    carry ``None`` parts.
    """

    sigma: np.ndarray
    sigma_diseased: np.ndarray | None
    sigma_nondiseased: np.ndarray | None
    labels: tuple[str, ...]
    measure: WeightMeasure
    design: StudyDesign | None
    method: str
    repaired: bool = False
    n_redrawn: int = 0

    @property
    def n_strata(self) -> int:
        return self.sigma.shape[0]


# -- kernel density machinery -------------------------------------------


def silverman_bandwidth(values) -> float:
    """0.9 * min(sd, IQR / 1.34) * n^(-1/5), skipping zero candidates."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise DegenerateDensityError("need at least 2 values for a density estimate")
    sd = float(v.std(ddof=1))
    q75, q25 = np.percentile(v, [75.0, 25.0])
    iqr = float(q75 - q25)
    candidates = [c for c in (sd, iqr / 1.34) if c > 0.0]
    if not candidates:
        raise DegenerateDensityError("sample has zero spread, no usable bandwidth")
    return 0.9 * min(candidates) * v.size ** (-0.2)


def _resolve_bandwidth(values: np.ndarray, rule) -> float:
    if callable(rule):
        h = float(rule(values))
    elif isinstance(rule, (int, float)):
        h = float(rule)
    elif rule == "silverman":
        h = silverman_bandwidth(values)
    else:
        raise ValueError(f"unknown bandwidth rule {rule!r}")
    if not h > 0.0:
        raise DegenerateDensityError(f"non-positive bandwidth {h}")
    return h


def _kde_at(values: np.ndarray, points: np.ndarray, bandwidth: float) -> np.ndarray:
    z = (points[:, None] - values[None, :]) / bandwidth
    return np.exp(-0.5 * z * z).sum(axis=1) / (values.size * bandwidth * _SQRT_2PI)


def _density_ratio_at(x: Stratum, y: Stratum, thresholds: np.ndarray, rule) -> np.ndarray:
    hx = _resolve_bandwidth(x.values, rule)
    hy = _resolve_bandwidth(y.values, rule)
    f_dis = _kde_at(x.values, thresholds, hx)
    f_non = _kde_at(y.values, thresholds, hy)
    if np.any(f_non <= 0.0):
        bad = thresholds[np.argmax(f_non <= 0.0)]
        raise DegenerateDensityError(
            f"non-diseased density vanished at threshold {bad!r}")
    return f_dis / f_non


def density_ratio(dataset: MarkerDataset, marker: int, u, *, time: int | None = None,
                  bandwidth_rule="silverman"):
    """Ratio of diseased to non-diseased density at the threshold for rate u.

    This is the slope ratio of the two survival curves that scales the
    non-diseased contribution to the wAUC covariance.
    """
    x = dataset.stratum("diseased", marker, time)
    y = dataset.stratum("nondiseased", marker, time)
    y_surv = EmpiricalSurvival(y.sorted_values, presorted=True)
    scalar = np.isscalar(u)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    thresholds = y_surv.inverse_survival_many(u_arr)
    out = _density_ratio_at(x, y, thresholds, bandwidth_rule)
    return float(out[0]) if scalar else out


# -- within-subject pair pooling ----------------------------------------


def _subject_blocks(stratum: Stratum) -> np.ndarray:
    """Values reordered so each subject's block is contiguous and ascending."""
    order = np.argsort(stratum.subjects, kind="stable")
    return stratum.values[order]


def _within_subject_pairs(s1: Stratum, s2: Stratum) -> tuple[np.ndarray, np.ndarray]:
    """All cross pairs (v1, v2) drawn from the same subject, both strata."""
    v1 = _subject_blocks(s1)
    v2 = _subject_blocks(s2)
    c1 = s1.counts
    c2 = s2.counts
    if c1.size and (c1 == 1).all() and (c2 == 1).all():
        return v1, v2
    left = np.repeat(v1, np.repeat(c2, c1))
    starts2 = np.concatenate(([0], np.cumsum(c2)[:-1]))
    chunks = []
    for i in range(c1.size):
        if c1[i] and c2[i]:
            block = np.arange(starts2[i], starts2[i] + c2[i])
            chunks.append(np.tile(block, c1[i]))
    if chunks:
        right = v2[np.concatenate(chunks)]
    else:
        right = np.empty(0)
    return left, right


def joint_survival(dataset: MarkerDataset, group: str, marker1: int, marker2: int,
                   x1: float, x2: float, *, time1: int | None = None,
                   time2: int | None = None) -> float:
    """Fraction of within-subject cross pairs jointly above (x1, x2).

    The denominator counts every available pair ``sum_i c1_i * c2_i`` with
    per-subject counts pooled over the requested times, so it never exceeds
    the number of enumerated pairs.
    """
    s1 = dataset.stratum(group, marker1, time1)
    s2 = dataset.stratum(group, marker2, time2)
    left, right = _within_subject_pairs(s1, s2)
    if left.size == 0:
        raise ValueError("no subject contributes pairs to the joint survival")
    hits = np.count_nonzero((left > x1) & (right > x2))
    return float(hits) / left.size


def _exceedance_grid(left: np.ndarray, right: np.ndarray,
                     t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """C[a, b] = #{pairs with left > t1[a] and right > t2[b]}.

    Strictness is exact: thresholds are nudged one ulp up so histogram bins
    starting there count only strictly greater values.
    """
    if left.size == 0:
        return np.zeros((t1.size, t2.size))
    e1, inv1 = np.unique(np.nextafter(t1, np.inf), return_inverse=True)
    e2, inv2 = np.unique(np.nextafter(t2, np.inf), return_inverse=True)
    edges1 = np.concatenate(([-np.inf], e1, [np.inf]))
    edges2 = np.concatenate(([-np.inf], e2, [np.inf]))
    hist, _, _ = np.histogram2d(left, right, bins=[edges1, edges2])
    suffix = np.flip(np.flip(hist, 0).cumsum(0), 0)
    suffix = np.flip(np.flip(suffix, 1).cumsum(1), 1)
    return suffix[np.ix_(inv1 + 1, inv2 + 1)]


# -- covariance paths ----------------------------------------------------


def _check_group_sizes(dataset: MarkerDataset) -> None:
    if dataset.n_diseased < 2 or dataset.n_nondiseased < 2:
        raise ValueError("analytic covariance needs at least 2 subjects per group")


def _placement_parts(dataset: MarkerDataset, strata, midrank: bool):
    n_dis = dataset.n_diseased
    n_non = dataset.n_nondiseased
    n_s = len(strata)
    dev_x = np.zeros((n_s, n_dis))
    dev_y = np.zeros((n_s, n_non))
    m_tot = np.zeros(n_s)
    n_tot = np.zeros(n_s)
    for s, (marker, time) in enumerate(strata):
        x = dataset.stratum("diseased", marker, time)
        y = dataset.stratum("nondiseased", marker, time)
        vx, vy = _placements(x, y, midrank)
        omega = _auc_core(x, y, midrank)
        sum_x = np.bincount(x.subjects, weights=vx, minlength=n_dis)
        sum_y = np.bincount(y.subjects, weights=vy, minlength=n_non)
        dev_x[s] = sum_x - omega * x.counts
        dev_y[s] = sum_y - omega * y.counts
        m_tot[s] = x.n
        n_tot[s] = y.n
    sigma1 = (dev_x @ dev_x.T) * (n_dis / (n_dis - 1)) / np.outer(m_tot, m_tot)
    sigma2 = (dev_y @ dev_y.T) * (n_non / (n_non - 1)) / np.outer(n_tot, n_tot)
    return sigma1, sigma2


def _integral_parts(dataset: MarkerDataset, strata, u_nodes: np.ndarray,
                    u_weights: np.ndarray, bandwidth_rule):
    n_s = len(strata)
    thresholds = []
    rocs = []
    ratios = []
    xs = []
    ys = []
    for marker, time in strata:
        x = dataset.stratum("diseased", marker, time)
        y = dataset.stratum("nondiseased", marker, time)
        y_surv = EmpiricalSurvival(y.sorted_values, presorted=True)
        t = y_surv.inverse_survival_many(u_nodes)
        x_surv = EmpiricalSurvival(x.sorted_values, presorted=True)
        thresholds.append(t)
        rocs.append(x_surv.survival(t))
        ratios.append(_density_ratio_at(x, y, t, bandwidth_rule))
        xs.append(x)
        ys.append(y)
    sigma1 = np.zeros((n_s, n_s))
    sigma2 = np.zeros((n_s, n_s))
    for a in range(n_s):
        for b in range(a, n_s):
            left, right = _within_subject_pairs(xs[a], xs[b])
            joint_d = _exceedance_grid(left, right, thresholds[a], thresholds[b])
            joint_d /= max(left.size, 1)
            bracket_d = joint_d - np.outer(rocs[a], rocs[b])
            weight_d = left.size / (xs[a].n * xs[b].n)
            sigma1[a, b] = sigma1[b, a] = weight_d * (u_weights @ bracket_d @ u_weights)

            left, right = _within_subject_pairs(ys[a], ys[b])
            joint_n = _exceedance_grid(left, right, thresholds[a], thresholds[b])
            joint_n /= max(left.size, 1)
            bracket_n = (joint_n - np.outer(u_nodes, u_nodes)) * np.outer(ratios[a], ratios[b])
            weight_n = left.size / (ys[a].n * ys[b].n)
            sigma2[a, b] = sigma2[b, a] = weight_n * (u_weights @ bracket_n @ u_weights)
    return sigma1, sigma2


def _repair_part(mat: np.ndarray) -> tuple[np.ndarray, bool]:
    sym = 0.5 * (mat + mat.T)
    diag_max = float(np.max(np.diag(sym), initial=0.0))
    eigvals = np.linalg.eigvalsh(sym)
    floor = -PSD_EIGENVALUE_TOLERANCE * max(diag_max, np.finfo(float).tiny)
    if eigvals.min() >= floor:
        return sym, False
    vals, vecs = np.linalg.eigh(sym)
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ vecs.T, True


def sigma_matrix(dataset: MarkerDataset, design: StudyDesign | None,
                 measure: WeightMeasure, *, midrank: bool = False,
                 bandwidth_rule="silverman", n_nodes: int = DEFAULT_NODES) -> CovarianceEstimate:
    """Analytic covariance of the wAUC vector over the design's strata.

    Returned on the finite-sample scale: the diagonal estimates the variance
    of each wAUC entry as computed, with cluster sizes and group sizes
    already folded in.
    """
    _check_group_sizes(dataset)
    strata = design_strata(dataset, design)
    if measure.kind == "full":
        sigma1, sigma2 = _placement_parts(dataset, strata, midrank)
        method = "placement"
    elif measure.kind == "pauc":
        glx, glw = np.polynomial.legendre.leggauss(n_nodes)
        half = 0.5 * (measure.upper - measure.lower)
        mid = 0.5 * (measure.upper + measure.lower)
        u_nodes = mid + half * glx
        u_weights = half * glw
        sigma1, sigma2 = _integral_parts(dataset, strata, u_nodes, u_weights, bandwidth_rule)
        method = "quadrature"
    else:
        u_nodes = np.asarray([u for u, _ in measure.atoms])
        u_weights = np.asarray([m for _, m in measure.atoms])
        sigma1, sigma2 = _integral_parts(dataset, strata, u_nodes, u_weights, bandwidth_rule)
        method = "atoms"
    if measure.normalized:
        scale = measure.total_mass ** 2
        sigma1 = sigma1 / scale
        sigma2 = sigma2 / scale
    sigma1, repaired1 = _repair_part(sigma1)
    sigma2, repaired2 = _repair_part(sigma2)
    if design is None:
        labels = tuple(f"marker{marker}" for marker, _ in strata)
    else:
        labels = tuple(design.labels())
    return CovarianceEstimate(
        sigma=sigma1 + sigma2,
        sigma_diseased=sigma1,
        sigma_nondiseased=sigma2,
        labels=labels,
        measure=measure,
        design=design,
        method=method,
        repaired=repaired1 or repaired2,
    )


def contrast_covariance(sigma: np.ndarray, design: StudyDesign) -> np.ndarray:
    """Covariance of the paired differences: A' Sigma A for the design's
    signed pairing matrix."""
    mat = design.contrast_matrix()
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (mat.shape[0], mat.shape[0]):
        raise ValueError(
            f"sigma is {sigma.shape}, design expects {mat.shape[0]} strata")
    return mat.T @ sigma @ mat


def bootstrap_covariance(dataset: MarkerDataset, design: StudyDesign | None,
                         measure: WeightMeasure, n_boot: int, seed: int, *,
                         midrank: bool = False) -> CovarianceEstimate:
    """Subject-level bootstrap covariance of the wAUC vector.

    Subjects are resampled with replacement within each group; replicate b
    draws its RNG stream from (seed, b) so results do not depend on
    scheduling.  A replicate leaving any stratum empty is redrawn and
    counted in ``n_redrawn``.
    """
    if n_boot < 100:
        raise ValueError(f"need at least 100 bootstrap replicates, got {n_boot}")
    strata = design_strata(dataset, design)
    n_dis = dataset.n_diseased
    n_non = dataset.n_nondiseased
    if n_dis == 0 or n_non == 0:
        raise ValueError("bootstrap needs non-empty groups")
    draws = np.empty((n_boot, len(strata)))
    n_redrawn = 0
    for b in range(n_boot):
        attempt = 0
        while True:
            rng = np.random.default_rng((seed, b, attempt))
            idx_d = rng.integers(0, n_dis, n_dis)
            idx_n = rng.integers(0, n_non, n_non)
            resampled = dataset.resample(idx_d, idx_n)
            if _all_strata_nonempty(resampled, strata):
                break
            n_redrawn += 1
            attempt += 1
            if attempt > 1000:
                raise RuntimeError("bootstrap could not draw a usable replicate")
        draws[b] = wauc_vector(resampled, design, measure, midrank=midrank).values
    sigma = np.cov(draws, rowvar=False, ddof=1)
    sigma = np.atleast_2d(sigma)
    if design is None:
        labels = tuple(f"marker{marker}" for marker, _ in strata)
    else:
        labels = tuple(design.labels())
    return CovarianceEstimate(
        sigma=sigma,
        sigma_diseased=None,
        sigma_nondiseased=None,
        labels=labels,
        measure=measure,
        design=design,
        method="bootstrap",
        n_redrawn=n_redrawn,
    )


def _all_strata_nonempty(dataset: MarkerDataset, strata) -> bool:
    for marker, time in strata:
        if dataset.stratum("diseased", marker, time).n == 0:
            return False
        if dataset.stratum("nondiseased", marker, time).n == 0:
            return False
    return True

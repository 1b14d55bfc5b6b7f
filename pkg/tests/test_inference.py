"""Weights, contrasts, delta-method variance and the z test."""

import math

import numpy as np
import pytest

from wroc.covariance import contrast_covariance, sigma_matrix
from wroc.designs import ContrastFunction, StudyDesign
from wroc.errors import SingularCovarianceError
from wroc.estimators import wauc_vector
from wroc.inference import (
    ComparisonResult,
    compare_modalities,
    custom_weights,
    delta_h,
    delta_longitudinal,
    delta_m,
    equal_weights,
    optimal_weights,
    pair_contrast,
    variance_delta,
    z_test,
)
from wroc.measures import WeightMeasure

from conftest import paired_dataset

FULL = WeightMeasure.full_auc()


# -- weights -------------------------------------------------------------


def test_equal_weights():
    w = equal_weights(4)
    np.testing.assert_allclose(w.weights, 0.25)
    assert w.method == "equal"


def test_optimal_weights_symmetric_case():
    # symmetric covariance -> equal weights are optimal
    w = optimal_weights(np.array([[2.0, 1.0], [1.0, 2.0]]), ridge=0.0)
    np.testing.assert_allclose(w.weights, [0.5, 0.5])
    assert not w.fell_back


def test_optimal_weights_favor_precise_pair():
    cov = np.diag([1.0, 4.0])
    w = optimal_weights(cov, ridge=0.0)
    # inverse-variance: 1 and 1/4, normalized
    np.testing.assert_allclose(w.weights, [0.8, 0.2])


def test_optimal_weights_fallback_on_negative_solution():
    # strong off-diagonal drives one solved weight negative
    cov = np.array([[1.0, 1.9], [1.9, 4.0]])
    w = optimal_weights(cov, ridge=0.0)
    assert w.fell_back
    np.testing.assert_allclose(w.weights, [0.5, 0.5])
    assert w.method == "optimal"


def test_optimal_weights_singular_matrix():
    with pytest.raises(SingularCovarianceError):
        optimal_weights(np.zeros((2, 2)), ridge=0.0)


def test_custom_weights_normalize():
    w = custom_weights([2.0, 6.0])
    np.testing.assert_allclose(w.weights, [0.25, 0.75])
    assert w.raw_sum == 8.0
    with pytest.raises(ValueError):
        custom_weights([1.0, -1.0, 0.0])


def test_weight_scale_invariance_exact():
    # scaling the covariance by a power of two scales the solved weights
    # identically, so the normalized weights agree bitwise
    cov = np.array([[3.0, 0.5], [0.5, 1.25]])
    base = optimal_weights(cov, ridge=0.0)
    scaled = optimal_weights(4.0 * cov, ridge=0.0)
    np.testing.assert_array_equal(base.weights, scaled.weights)


# -- deltas and contrasts ------------------------------------------------


def test_delta_m_weighted_difference():
    omega = np.array([0.9, 0.7, 0.6, 0.5])
    assert delta_m(omega, equal_weights(2)) == pytest.approx(0.25)
    w = custom_weights([3.0, 1.0])
    assert delta_m(omega, w) == pytest.approx(0.75 * 0.3 + 0.25 * 0.2)
    assert delta_longitudinal(omega, equal_weights(2)) == pytest.approx(0.25)


def test_pair_contrast_matches_manual():
    design = StudyDesign.readers(2)
    w = custom_weights([3.0, 1.0])
    contrast = pair_contrast(design, w)
    np.testing.assert_allclose(contrast.coefficients,
                               [0.75, 0.25, -0.75, -0.25])
    omega = np.array([0.9, 0.7, 0.6, 0.5])
    assert delta_h(omega, contrast) == pytest.approx(delta_m(omega, w))


def test_variance_delta_identity_covariance():
    design = StudyDesign.readers(1)
    contrast = pair_contrast(design, equal_weights(1))
    var = variance_delta(np.eye(2), contrast)
    assert var.total == pytest.approx(2.0)
    assert var.diseased is None   # plain matrix has no decomposition


def test_variance_delta_smooth_contrast():
    contrast = ContrastFunction.smooth(lambda w: float(w[0] / w[1]))
    omega = np.array([0.5, 0.6])
    sigma = np.diag([0.01, 0.02])
    # gradient (1/w1, -w0/w1^2) = (1.6667, -1.3889)
    grad = np.array([1.0 / 0.6, -0.5 / 0.36])
    want = float(grad @ sigma @ grad)
    got = variance_delta(sigma, contrast, omega=omega)
    assert got.total == pytest.approx(want, rel=1e-6)


# -- z test and published arithmetic -------------------------------------


def test_z_test_known_values():
    res = z_test(-0.1115, 0.0006961)
    assert res.z == pytest.approx(-0.1115 / math.sqrt(0.0006961))
    assert res.p_value == pytest.approx(2.36e-5, rel=0.02)
    res2 = z_test(-0.1145, 0.0007475)
    assert res2.p_value == pytest.approx(2.82e-5, rel=0.02)


def test_z_test_interval_and_null():
    res = z_test(0.3, 0.01, alpha=0.05, null=0.3)
    assert res.z == 0.0
    assert res.p_value == 1.0
    assert res.ci_lower == pytest.approx(0.3 - 1.959964 * 0.1, rel=1e-5)
    assert res.ci_upper == pytest.approx(0.3 + 1.959964 * 0.1, rel=1e-5)
    with pytest.raises(ValueError):
        z_test(0.1, 0.0)
    with pytest.raises(ValueError):
        z_test(0.1, 0.01, alpha=1.5)


def test_reader_study_pipeline_arithmetic():
    # four readers, two modalities, rounded AUCs as the wAUC vector:
    # equal-weight difference is exactly -0.1125
    omega = np.array([0.71, 0.75, 0.63, 0.76, 0.83, 0.85, 0.75, 0.87])
    assert delta_m(omega, equal_weights(4)) == pytest.approx(-0.1125, abs=1e-15)
    # weights solved in the published analysis, renormalized
    w = custom_weights([298.08, 401.16, 176.88, 560.48])
    assert delta_m(omega, w) == pytest.approx(-0.1105, abs=5e-3)


# -- end-to-end comparison -----------------------------------------------


def test_compare_modalities_composition(rng):
    design = StudyDesign.readers(2)
    ds = paired_dataset([rng.normal(1.2, 1, 40) for _ in range(4)],
                        [rng.normal(0, 1, 40) for _ in range(4)])
    res = compare_modalities(ds, design, FULL)
    assert isinstance(res, ComparisonResult)

    omega = wauc_vector(ds, design, FULL)
    cov = sigma_matrix(ds, design, FULL)
    contrast = pair_contrast(design, equal_weights(2))
    manual_delta = delta_h(omega, contrast)
    manual_var = variance_delta(cov, contrast)
    assert res.estimate == manual_delta
    assert res.variance == manual_var.total
    assert res.variance_diseased == manual_var.diseased
    assert res.variance == pytest.approx(
        res.variance_diseased + res.variance_nondiseased)
    assert 0.0 <= res.p_value <= 1.0
    assert res.ci_lower < res.estimate < res.ci_upper

    d = res.to_dict()
    assert d["weights"]["method"] == "equal"
    assert set(d["wauc"]) == set(design.labels())


def test_compare_modalities_optimal_and_custom(rng):
    design = StudyDesign.readers(2)
    ds = paired_dataset([rng.normal(1.2, 1, 50) for _ in range(4)],
                        [rng.normal(0, 1, 50) for _ in range(4)])
    opt = compare_modalities(ds, design, FULL, weights="optimal")
    assert opt.weights.method == "optimal"
    assert opt.weights.weights.sum() == pytest.approx(1.0)

    cov_diff = contrast_covariance(sigma_matrix(ds, design, FULL).sigma, design)
    w_manual = optimal_weights(cov_diff)
    np.testing.assert_allclose(opt.weights.weights, w_manual.weights)

    cus = compare_modalities(ds, design, FULL, weights=[0.7, 0.3])
    np.testing.assert_allclose(cus.weights.weights, [0.7, 0.3])
    # optimal weighting never increases the estimated variance
    assert opt.variance <= compare_modalities(ds, design, FULL).variance + 1e-15

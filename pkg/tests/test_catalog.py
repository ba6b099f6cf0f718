from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from qbounds import catalog, phase_space, statistics
from qbounds.errors import DomainError, PovmBoundError, TruncationError, WeightError
from qbounds.fock import TOL_TRUNC

STATES = [
    catalog.coherent_state(1.2 - 0.4j),
    catalog.number_state(3),
    catalog.thermal_state(1.5),
    catalog.photon_added_thermal(0.7),
    catalog.cat_state(1.1j, "even"),
    catalog.cat_state(0.8, "odd"),
    catalog.squeezed_vacuum(0.3),
    catalog.thermal_number_mixture(0.5, 9.0, 1),
    catalog.vacuum_number_mixture(0.3, 4),
]

# Closed-form cross-checks at the default truncation carry errors of order
# sqrt(TOL_TRUNC) for pure states; these copies use dimensions far past the
# budget so the comparison isolates the formulas.
WIDE = [
    catalog.coherent_state(1.2 - 0.4j, dim=60),
    catalog.number_state(3),
    catalog.thermal_state(1.5, dim=200),
    catalog.photon_added_thermal(0.7, dim=200),
    catalog.cat_state(1.1j, "even", dim=60),
    catalog.cat_state(0.8, "odd", dim=60),
    catalog.squeezed_vacuum(0.3, dim=200),
    catalog.mixture([(0.5, catalog.thermal_state(9.0, dim=600)), (0.5, catalog.number_state(1))]),
    catalog.vacuum_number_mixture(0.3, 4),
]


@pytest.mark.parametrize("st", STATES, ids=lambda e: e.label)
def test_states_are_normalized_psd_and_within_budget(st):
    op = st.operator
    assert op.truncation_loss <= TOL_TRUNC
    assert op.trace() + op.truncation_loss == pytest.approx(1.0, abs=1e-12)
    assert np.min(np.linalg.eigvalsh(op.matrix)) > -1e-13


@pytest.mark.parametrize("st", [s for s in WIDE if s.analytic.number_probs is not None], ids=lambda e: e.label)
def test_number_probs_closed_form_matches_matrix(st):
    diag = st.operator.diagonal()
    for n in range(min(st.dim, 30)):
        assert diag[n] == pytest.approx(st.analytic.number_probs(n), abs=1e-12)


@pytest.mark.parametrize("st", [s for s in WIDE if s.analytic.q is not None], ids=lambda e: e.label)
def test_q_closed_form_matches_matrix(st):
    rng = np.random.default_rng(3)
    for a in rng.normal(scale=1.3, size=(6, 2)):
        z = complex(*a)
        assert phase_space.q_value(st, z) == pytest.approx(st.analytic.q(z), abs=1e-10)


@pytest.mark.parametrize("st", [s for s in WIDE if s.analytic.mean_n is not None], ids=lambda e: e.label)
def test_mean_photon_number_closed_form(st):
    n = np.arange(st.dim)
    assert float(np.sum(n * st.operator.diagonal())) == pytest.approx(st.analytic.mean_n, abs=1e-8)


@pytest.mark.parametrize("st", [s for s in WIDE if s.analytic.mandel_q is not None], ids=lambda e: e.label)
def test_mandel_closed_form(st):
    assert statistics.mandel_q(st).q_mandel == pytest.approx(st.analytic.mandel_q, abs=1e-7)


def test_photon_added_thermal_number_probs_against_mpmath():
    n_tc = mp.mpf("0.7")
    st = catalog.photon_added_thermal(0.7)
    for n in (1, 2, 5, 12):
        ref = n * n_tc ** (n - 1) / (1 + n_tc) ** (n + 1)
        assert st.operator.diagonal()[n] == pytest.approx(float(ref), rel=1e-12)


def test_cat_number_probs_against_mpmath():
    a = mp.mpf("1.3")
    norm = 2 * (1 + mp.exp(-2 * a * a))
    st = catalog.cat_state(1.3, "even")
    for n in (0, 2, 6):
        ref = 4 * mp.exp(-a * a) * a ** (2 * n) / mp.factorial(n) / norm
        assert st.operator.diagonal()[n] == pytest.approx(float(ref), rel=1e-11)
    assert st.operator.diagonal()[3] == pytest.approx(0.0, abs=1e-15)


def test_squeezed_vacuum_variance():
    st = catalog.squeezed_vacuum(0.1, dim=600)
    assert statistics.quadrature_variance(st, 0.0) == pytest.approx(0.01, abs=1e-9)
    assert statistics.quadrature_variance(st, math.pi / 2) == pytest.approx(1 / (16 * 0.01), rel=1e-8)


def test_p_classification_tags():
    assert catalog.thermal_state(1.0).p_classification.tag == "regular_nonnegative"
    assert catalog.photon_added_thermal(1.0).p_classification.tag == "regular_negative"
    assert catalog.coherent_state(1.0).p_classification.tag == "singular"
    assert catalog.number_state(2).p_classification.tag == "singular"
    mix = catalog.mixture([(0.5, catalog.thermal_state(1.0)), (0.5, catalog.photon_added_thermal(1.0))])
    assert mix.p_classification.tag == "regular_negative"


def test_photon_added_p_function_is_negative_near_origin():
    pc = catalog.photon_added_thermal(0.5).p_classification
    assert pc.closed_form(0.0) < 0
    assert pc.closed_form(2.0) > 0


def test_mixture_rejects_bad_weights():
    a, b = catalog.number_state(0), catalog.number_state(1)
    with pytest.raises(WeightError):
        catalog.mixture([(0.6, a), (0.6, b)])
    with pytest.raises(WeightError):
        catalog.mixture([(-0.1, a), (1.1, b)])
    with pytest.raises(WeightError):
        catalog.mixture([(0.5, a), (0.5, catalog.povm_number(1))])


def test_domain_errors():
    with pytest.raises(DomainError):
        catalog.number_state(-1)
    with pytest.raises(DomainError):
        catalog.thermal_state(-0.1)
    with pytest.raises(DomainError):
        catalog.squeezed_vacuum(0.0)
    with pytest.raises(DomainError):
        catalog.cat_state(1.0, "neither")
    with pytest.raises(PovmBoundError):
        catalog.contaminated_one_photon(1.2, 0.0)
    with pytest.raises(DomainError):
        catalog.povm_quadrature(float("inf"))


def test_explicit_dim_too_small_raises():
    with pytest.raises(TruncationError):
        catalog.thermal_state(3.0, dim=10)


def test_povm_elements():
    assert catalog.povm_number(2).operator.trace() == pytest.approx(1.0)
    assert catalog.povm_coherent(0.5).operator.trace() == pytest.approx(1 / math.pi, abs=1e-10)
    det = catalog.contaminated_one_photon(1.0, 0.1)
    assert det.operator.trace() == pytest.approx(1.2)
    proj = catalog.povm_projector(catalog.cat_state(1.0, "even"))
    assert np.max(np.abs(proj.operator.matrix @ proj.operator.matrix - proj.operator.matrix)) < 1e-12
    with pytest.raises(DomainError):
        catalog.povm_projector(catalog.thermal_state(1.0))


def test_coherent_rotated_quadrature_density_matches_matrix_path():
    st = catalog.coherent_state(0.6 + 0.3j, dim=60)
    for th in (0.3, 1.7):
        for x in (-0.4, 0.2, 0.9):
            closed = statistics.quadrature_density(st, x, th)
            matrix = statistics.quadrature_density(st, x, th, use_closed_form=False)
            assert closed == pytest.approx(matrix, abs=1e-12)

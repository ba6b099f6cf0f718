from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from qbounds import fock
from qbounds.errors import SpaceMismatch, TruncationError
from qbounds.fock import FockOperator, FockSpace


def test_space_rejects_tiny_dims():
    with pytest.raises(ValueError):
        FockSpace(1)
    with pytest.raises(ValueError):
        FockSpace(2.5)


def test_coherent_amplitudes_match_mpmath():
    alpha = 1.3 - 0.7j
    c = fock.coherent_amplitudes(alpha, 30)
    for n in (0, 1, 5, 17, 29):
        ref = mp.exp(-abs(mp.mpc(alpha)) ** 2 / 2) * mp.mpc(alpha) ** n / mp.sqrt(mp.factorial(n))
        assert abs(c[n] - complex(ref)) < 1e-14


def test_coherent_amplitudes_large_alpha_log_path():
    c = fock.coherent_amplitudes(26.0, 900)
    n = 676
    ref = mp.exp(-mp.mpf(676) / 2 + n * mp.log(26) - mp.loggamma(n + 1) / 2)
    assert c[n].real == pytest.approx(float(ref), rel=1e-10)


def test_coherent_vector_truncation_budget():
    v = fock.coherent_vector(2.0)
    assert v.truncation_loss <= fock.TOL_TRUNC
    assert 1 - v.norm2 == pytest.approx(v.truncation_loss, abs=1e-13)
    with pytest.raises(TruncationError):
        fock.coherent_vector(2.0, FockSpace(8))


def test_poisson_dim_is_minimal():
    from scipy.stats import poisson

    for mean in (0.3, 4.0, 9.0, 30.0):
        d = fock.poisson_dim(mean)
        assert poisson.sf(d - 1, mean) <= fock.TOL_TRUNC
        assert poisson.sf(d - 2, mean) > fock.TOL_TRUNC


def test_geometric_dim():
    d = fock.geometric_dim(0.9)
    assert 0.9**d <= fock.TOL_TRUNC < 0.9 ** (d - 1)


def test_operator_symmetrizes_and_checks_hermiticity():
    m = np.array([[0.5, 0.1 + 1e-14j], [0.1, 0.5]])
    op = FockOperator(FockSpace(2), m)
    assert np.allclose(op.matrix, op.matrix.conj().T, atol=0)
    with pytest.raises(ValueError):
        FockOperator(FockSpace(2), np.array([[0.5, 0.3], [0.1, 0.5]]))


def test_state_kind_checks_trace_and_positivity():
    with pytest.raises(TruncationError):
        FockOperator(FockSpace(2), np.diag([0.5, 0.4]), "state")
    with pytest.raises(ValueError):
        FockOperator(FockSpace(2), np.diag([1.2, -0.2]), "state")


def test_povm_kind_checks_eigenvalues():
    from qbounds.errors import PovmBoundError

    with pytest.raises(PovmBoundError):
        FockOperator(FockSpace(2), np.diag([1.1, 0.0]), "povm_element")


def test_expectation_needs_matching_spaces():
    a = FockOperator(FockSpace(2), np.eye(2))
    b = FockOperator(FockSpace(3), np.eye(3) / 3)
    with pytest.raises(SpaceMismatch):
        fock.expectation(a, b)
    assert fock.expectation_aligned(a, b) == pytest.approx(2 / 3)


def test_number_and_quadrature_operators():
    sp = FockSpace(40)
    v = fock.coherent_vector(1.5 + 0.5j, sp)
    rho = v.projector()
    assert fock.expectation(fock.number_operator(sp), rho) == pytest.approx(2.5, abs=1e-9)
    # <X_theta> = Re(alpha e^{i theta})
    for th in (0.0, 0.4, 2.0):
        x = fock.expectation(fock.quadrature_operator(th, sp), rho)
        assert x == pytest.approx(((1.5 + 0.5j) * np.exp(1j * th)).real, abs=1e-9)


def test_rotation_moves_coherent_amplitude():
    sp = FockSpace(30)
    rho = fock.coherent_vector(1.0, sp).projector()
    rot = fock.rotate(rho, 0.7)
    target = fock.coherent_vector(np.exp(0.7j), sp).projector()
    assert np.max(np.abs(rot.matrix - target.matrix)) < 1e-14


def test_fock_wavefunctions_orthonormal():
    x = np.linspace(-8, 8, 8001)
    psi = fock.fock_wavefunctions(12, x)
    gram = np.trapezoid(psi[:, None, :] * psi[None, :, :], x, axis=-1)
    assert np.max(np.abs(gram - np.eye(13))) < 1e-10


def test_fock_wavefunction_against_hermite():
    # psi_n(x) = (2/pi)^(1/4) H_n(sqrt2 x) exp(-x^2) / sqrt(2^n n!)
    for n in (0, 3, 8):
        for x in (-1.1, 0.0, 0.6):
            ref = (2 / mp.pi) ** 0.25 * mp.hermite(n, mp.sqrt(2) * x) * mp.exp(-x * x) / mp.sqrt(
                2**n * mp.factorial(n))
            assert fock.fock_wavefunction(n, x) == pytest.approx(float(ref), abs=1e-13)


def test_coherent_wavefunction_matches_fock_sum():
    alpha = 0.8 + 0.3j
    x = np.array([-0.5, 0.2, 1.0])
    c = fock.coherent_amplitudes(alpha, 40)
    psi = fock.fock_wavefunctions(39, x)
    assert np.allclose(c @ psi, fock.coherent_wavefunction(alpha, x), atol=1e-12)


def test_displacement_maps_vacuum_to_coherent():
    d = fock.displacement_matrix(0.9 - 0.4j, 25)
    col = d[:, 0]
    assert np.allclose(col, fock.coherent_amplitudes(0.9 - 0.4j, 25), atol=1e-12)


def test_phase_point():
    p = fock.PhasePoint.of(1 + 2j)
    assert p.z == 1 + 2j
    assert fock.PhasePoint.of(p) == p
    assert math.isclose(abs(fock.PhasePoint.of(3.0).z), 3.0)

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from qbounds import catalog, statistics
from qbounds.errors import TruncationError


@pytest.mark.parametrize("st", [catalog.cat_state(1.5, "even", dim=70), catalog.photon_added_thermal(0.7, dim=150),
                                catalog.number_state(3)], ids=lambda e: e.label)
def test_quadrature_density_normalized(st):
    for th in (0.0, 0.9):
        total, _ = quad(lambda x: statistics.quadrature_density(st, x, th), -10, 10, epsabs=1e-12, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)


def test_quadrature_density_closed_form_vs_matrix_for_thermal():
    st = catalog.thermal_state(0.6, dim=120)
    xs = np.linspace(-2, 2, 9)
    assert np.allclose(statistics.quadrature_density(st, xs, use_closed_form=False),
                       statistics.quadrature_density(st, xs), atol=1e-12, rtol=0)


def test_number_state_quadrature_density_is_hermite():
    # |psi_1(x)|^2 = sqrt(2/pi) 4 x^2 exp(-2 x^2)
    st = catalog.number_state(1)
    for x in (0.0, 0.3, 1.1):
        assert statistics.quadrature_density(st, x) == pytest.approx(
            math.sqrt(2 / math.pi) * 4 * x * x * math.exp(-2 * x * x), abs=1e-14)


def test_variance_moments_against_density():
    st = catalog.cat_state(0.9 + 0.4j, "odd", dim=60)
    for th in (0.0, 1.0, 2.2):
        m1, _ = quad(lambda x: x * statistics.quadrature_density(st, x, th), -9, 9, epsabs=1e-12, limit=200)
        m2, _ = quad(lambda x: x * x * statistics.quadrature_density(st, x, th), -9, 9, epsabs=1e-12, limit=200)
        assert statistics.quadrature_variance(st, th) == pytest.approx(m2 - m1 * m1, abs=1e-8)


def test_min_variance_over_theta_is_the_minimum():
    st = catalog.squeezed_vacuum(0.3)
    th, v = statistics.min_variance_over_theta(st)
    grid = [statistics.quadrature_variance(st, t) for t in np.linspace(0, math.pi, 721)]
    assert v <= min(grid) + 1e-12
    assert v == pytest.approx(0.09, abs=1e-9)
    assert statistics.squeezing_percentage(st) == pytest.approx(40.0, abs=1e-6)


def test_squeezing_percentage_zero_for_unsqueezed():
    assert statistics.squeezing_percentage(catalog.thermal_state(1.0)) == 0.0
    assert statistics.squeezing_percentage_signed(catalog.thermal_state(1.0)) < 0


def test_number_statistics_and_mandel():
    st = catalog.thermal_state(2.0)
    dist = statistics.number_statistics(st)
    assert dist[0] == pytest.approx(1 / 3)
    assert dist[10_000] == 0.0
    rep = statistics.mandel_q(st)
    assert rep.mean == pytest.approx(2.0, abs=1e-7)
    assert rep.q_mandel == pytest.approx(2.0, abs=1e-6)
    assert statistics.mandel_q(catalog.number_state(4)).q_mandel == pytest.approx(-1.0)


def test_matrix_density_guards_truncation():
    # at the default dimension the highest Fock level matters far from the mean
    st = catalog.coherent_state(2.0 + 1.0j)
    with pytest.raises(TruncationError):
        statistics.quadrature_density_matrix(st, 3.0, 0.4)

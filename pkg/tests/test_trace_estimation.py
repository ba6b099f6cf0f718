from __future__ import annotations

import numpy as np
import pytest

from qbounds import catalog, trace_estimation as te
from qbounds.errors import DomainError, TailError


def test_phase_averaged_coherent_is_poissonian():
    st = te.phase_averaged_coherent(1.5)
    assert st.is_diagonal()
    assert float(np.sum(np.arange(st.dim) * st.diagonal())) == pytest.approx(2.25, abs=1e-8)
    with pytest.raises(DomainError):
        te.phase_averaged_coherent(-1.0)


@pytest.mark.parametrize("povm", [catalog.povm_number(0), catalog.povm_number(3), catalog.povm_coherent(1.2j),
                                  catalog.contaminated_one_photon(1.0, 0.1)], ids=lambda e: e.label)
def test_radial_protocol_recovers_trace(povm):
    tr = povm.operator.trace()
    assert te.trace_via_radial(povm) == pytest.approx(tr, rel=1e-8)


def test_radial_trapezoid_and_grid_variants():
    det = catalog.contaminated_one_photon(1.0, 0.1)
    trap = te.trace_via_radial(det, te.RadialProtocolConfig(quadrature_rule="trapezoid"))
    assert trap == pytest.approx(1.2, rel=1e-6)
    grid = te.trace_via_radial(det, te.RadialProtocolConfig(r_grid=tuple(np.linspace(0, 7, 8))))
    assert grid == pytest.approx(1.2, rel=1e-8)


def test_radial_tail_error():
    with pytest.raises(TailError):
        te.trace_via_radial(catalog.povm_number(6), te.RadialProtocolConfig(r_max=1.0))


def test_thermal_ratio_closed_form():
    # q + p xi + q xi^2 for the contaminated detector
    xi = 100 / 101
    assert te.thermal_ratio(catalog.contaminated_one_photon(1.0, 0.1), 100.0) == pytest.approx(
        0.1 + xi + 0.1 * xi**2, rel=1e-14)


def test_thermal_extrapolation_converges():
    det = catalog.contaminated_one_photon(1.0, 0.1)
    est = te.trace_via_thermal(det)
    assert est.extrapolated == pytest.approx(1.2, abs=1e-9)
    single = te.trace_via_thermal(det, te.ThermalProtocolConfig((100.0,), False))
    assert single.value == single.ratios[0]
    assert single.extrapolated is None


def test_config_validation():
    with pytest.raises(DomainError):
        te.ThermalProtocolConfig((200.0, 100.0))
    with pytest.raises(DomainError):
        te.ThermalProtocolConfig((100.0,), True)
    with pytest.raises(DomainError):
        te.RadialProtocolConfig(quadrature_rule="simpson")
    with pytest.raises(DomainError):
        te.RadialProtocolConfig(r_grid=(1.0, 0.5))

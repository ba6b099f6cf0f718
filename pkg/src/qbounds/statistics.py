"""Photon-number and quadrature statistics of single-mode states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .catalog import analytic_of, as_operator
from .errors import DegenerateState, TruncationError
from .fock import FockOperator


@dataclass(frozen=True)
class NumberDistribution:
    probabilities: np.ndarray
    truncation_loss: float = 0.0

    def __getitem__(self, n: int) -> float:
        if n >= len(self.probabilities):
            return 0.0
        return float(self.probabilities[n])

    def __len__(self) -> int:
        return len(self.probabilities)

    def moment(self, k: int) -> float:
        n = np.arange(len(self.probabilities), dtype=float)
        return float(np.sum(n**k * self.probabilities))


@dataclass(frozen=True)
class MandelReport:
    mean: float
    variance: float
    q_mandel: float


def number_statistics(state) -> NumberDistribution:
    op = as_operator(state)
    p = np.clip(op.diagonal(), 0.0, None)
    return NumberDistribution(p, op.truncation_loss)


def mandel_q(state) -> MandelReport:
    dist = number_statistics(state)
    mean = dist.moment(1)
    if mean < 1e-14:
        raise DegenerateState("Mandel parameter undefined for zero mean photon number")
    var = max(dist.moment(2) - mean**2, 0.0)
    return MandelReport(mean, var, var / mean - 1.0)


# ---------------------------------------------------------------------------
# quadratures


def quadrature_density_matrix(state, x, theta: float = 0.0) -> np.ndarray:
    """p(x) = sum_mn rho_mn psi_m(x) psi_n(x) for the rotated state, as an array."""
    op = as_operator(state)
    if theta:
        op = fock.rotate(op, theta)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = fock.fock_wavefunctions(op.dim - 1, x)  # (D, nx)
    rho = op.matrix.real if not np.any(op.matrix.imag) else op.matrix
    # only the real part survives for real psi and Hermitian rho
    rp = np.real(rho)
    p = np.einsum("mi,mn,ni->i", psi, rp, psi)
    if op.truncation_loss > 0:
        # an exactly supported operator has nothing beyond its top level
        top = np.abs(2 * psi[-1] * (rp[-1] @ psi) - rp[-1, -1] * psi[-1] ** 2)
        bad = top > 1e-9 * np.maximum(np.abs(p), 1e-300)
        if np.any(bad & (top > 1e-15)):
            raise TruncationError("highest Fock level contributes more than 1e-9 of the density")
    return p


def quadrature_density_source(state, theta: float = 0.0) -> str:
    """'analytic' when quadrature_density would use a closed form, else 'numeric'."""
    analytic = analytic_of(state)
    if analytic.quadrature_density is not None and (theta == 0 or as_operator(state).is_diagonal()):
        return "analytic"
    return "analytic" if analytic.quadrature_density_rotated is not None else "numeric"


def quadrature_density(state, x, theta: float = 0.0, use_closed_form: bool = True):
    """Probability density of the rotated quadrature X_theta at outcome x."""
    analytic = analytic_of(state)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(x)
    src = quadrature_density_source(state, theta) if use_closed_form else "numeric"
    if src == "analytic" and analytic.quadrature_density is not None and (
            theta == 0 or as_operator(state).is_diagonal()):
        out = np.array([analytic.quadrature_density(float(t)) for t in xs])
    elif src == "analytic":
        out = np.array([analytic.quadrature_density_rotated(float(t), theta) for t in xs])
    else:
        out = quadrature_density_matrix(state, x, theta)
    return float(out[0]) if scalar else out


def _moments(op: FockOperator):
    a = fock.annihilation_operator(op.space)
    rho = op.matrix
    m1 = complex(np.trace(rho @ a))
    m2 = complex(np.trace(rho @ (a @ a)))
    n = float(np.sum(np.arange(op.dim) * op.diagonal()))
    return m1, m2, n


def quadrature_variance(state, theta: float = 0.0) -> float:
    """(Delta X_theta)^2 with X_theta = (a^dag e^{-i theta} + a e^{i theta}) / 2."""
    m1, m2, n = _moments(as_operator(state))
    b = m2 - m1**2
    return 0.25 * (1 + 2 * (n - abs(m1) ** 2)) + 0.5 * (b * np.exp(2j * theta)).real


def min_variance_over_theta(state) -> tuple[float, float]:
    """(theta, variance) minimizing (Delta X_theta)^2 over theta in [0, pi)."""
    m1, m2, n = _moments(as_operator(state))
    b = m2 - m1**2
    base = 0.25 * (1 + 2 * (n - abs(m1) ** 2))
    if abs(b) == 0:
        return 0.0, base
    theta = ((math.pi - np.angle(b)) / 2) % math.pi
    return float(theta), float(base - 0.5 * abs(b))


def squeezing_percentage_signed(state) -> float:
    _, v = min_variance_over_theta(state)
    return 100.0 * (1.0 - 2.0 * math.sqrt(max(v, 0.0)))


def squeezing_percentage(state) -> float:
    """100 (1 - 2 Delta X_min), reported as 0 when the state is not squeezed."""
    return max(0.0, squeezing_percentage_signed(state))

"""Detector inefficiency and finite sampling.

Loss is a beam splitter of amplitude transmission t = sqrt(eta) in front of an
ideal detector. Two readings of the measurement bound follow: keep the ideal
POVM and let the probe pass through the loss (Q replaced by the two-mode
convolution Q-tilde), or fold the loss into an effective POVM whose trace is
larger by 1/eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from . import fock, phase_space
from .bounds import BoundReport, _outcome, _scaled, _src, state_test
from .catalog import CatalogEntry, as_operator
from .errors import DensityUnsupported, DomainError
from .fock import FockOperator
from .phase_space import MaxResult


@dataclass(frozen=True)
class EfficiencyModel:
    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}", "robustness")

    @property
    def t(self) -> float:
        return math.sqrt(self.eta)

    @property
    def r(self) -> float:
        return math.sqrt(1.0 - self.eta)


@dataclass(frozen=True)
class SamplingModel:
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be positive", "robustness")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


# ---------------------------------------------------------------------------
# loss channel


def _loss_kernel(dim: int, eta: float) -> np.ndarray:
    """K[m, k] = sqrt(C(m+k, k) eta^m (1-eta)^k), zero where m + k >= dim."""
    m = np.arange(dim)[:, None]
    k = np.arange(dim)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_c = gammaln(m + k + 1) - gammaln(m + 1) - gammaln(k + 1)
        log_e = m * math.log(eta) + (k * math.log1p(-eta) if eta < 1 else np.where(k == 0, 0.0, -np.inf))
        kern = np.exp(0.5 * (log_c + log_e))
    kern[m + k >= dim] = 0.0
    return np.nan_to_num(kern)


def lossy_state(state, eta: float) -> FockOperator:
    """Pure-loss channel rho -> sum_k E_k rho E_k^dagger in the Fock basis."""
    EfficiencyModel(eta)
    op = as_operator(state)
    if eta == 1.0:
        return op
    d = op.dim
    kern = _loss_kernel(d, eta)
    out = np.zeros_like(op.matrix)
    for k in range(d):
        w = kern[: d - k, k]
        out[: d - k, : d - k] += w[:, None] * op.matrix[k:, k:] * w[None, :]
    out = 0.5 * (out + out.conj().T)
    return FockOperator(op.space, out, op.kind, op.truncation_loss)


# ---------------------------------------------------------------------------
# convolved Q function


def q_tilde_values(probe, eta: float, alphas) -> np.ndarray:
    """Q of the probe after a beam splitter of transmission sqrt(eta).

    Q~(alpha) = (1/pi) int d^2u exp(-|r alpha + t u|^2) Q(t alpha - r u). The
    exponents combine into exp(-|u|^2 - |alpha|^2) times a polynomial of degree
    2(D-1) in u, so a tensor Gauss-Hermite rule with D nodes per axis is exact.
    """
    model = EfficiencyModel(eta)
    op = as_operator(probe)
    alphas = np.asarray(alphas, dtype=complex)
    shape = alphas.shape
    flat = alphas.ravel()
    if eta == 1.0:
        return phase_space.q_values(op, flat).reshape(shape)
    t, r = model.t, model.r
    y, w = np.polynomial.hermite.hermgauss(op.dim + 2)
    u = (y[:, None] + 1j * y[None, :]).ravel()
    ww = (w[:, None] * w[None, :]).ravel()
    sqrt_n = np.sqrt(np.arange(1, op.dim))
    chunk = max(1, 2_000_000 // (u.size * op.dim))
    out = np.empty(flat.size)
    for s in range(0, flat.size, chunk):
        a = flat[s:s + chunk]
        gam = t * a[:, None] - r * u[None, :]
        # gamma^n / sqrt(n!) without the Gaussian factor
        steps = gam[..., None] / sqrt_n
        powers = np.concatenate([np.ones(gam.shape + (1,), dtype=complex), np.cumprod(steps, axis=-1)], axis=-1)
        quad_form = np.einsum("aum,mn,aun->au", powers.conj(), op.matrix, powers, optimize=True).real
        out[s:s + chunk] = np.exp(-np.abs(a) ** 2) * (quad_form @ ww) / math.pi ** 2
    return out.reshape(shape)


def q_tilde_max(probe, eta: float) -> MaxResult:
    """Maximum of Q~ over the plane (radial search for phase-invariant probes)."""
    op = as_operator(probe)
    if _is_one_photon(probe):
        return _one_photon_q_tilde_max(eta)
    r_max = phase_space.radius_cut(op)
    f = lambda a: q_tilde_values(op, eta, a)
    if op.is_diagonal():
        return phase_space.maximize_radial(lambda rs: f(np.asarray(rs, dtype=complex)), r_max)
    return phase_space.maximize_plane(f, r_max)


def _is_one_photon(probe) -> bool:
    return isinstance(probe, CatalogEntry) and probe.label == "number" and probe.params.get("n") == 1


def _one_photon_q_tilde_max(eta: float) -> MaxResult:
    # Q~(alpha) = exp(-|alpha|^2)(eta |alpha|^2 + 1 - eta)/pi, maximal at
    # |alpha|^2 = (2 eta - 1)/eta when eta > 1/2 and at the origin otherwise.
    if eta > 0.5:
        u = (2 * eta - 1) / eta
        return MaxResult(eta * math.exp(-u) / math.pi, complex(math.sqrt(u)), "closed_form")
    return MaxResult((1 - eta) / math.pi, 0j, "closed_form")


def one_photon_q_tilde(eta: float, alpha) -> float:
    s = abs(complex(alpha)) ** 2
    return math.exp(-s) * (eta * s + 1 - eta) / math.pi


# ---------------------------------------------------------------------------
# the two bound variants


def lossy_bound_ideal_povm(povm, probe, eta: float) -> BoundReport:
    """Ideal POVM, lossy probe: p = tr(Delta rho_t) against pi Q~_max tr(Delta)."""
    op = as_operator(povm)
    p = fock.expectation_aligned(op, lossy_state(probe, eta))
    qm = q_tilde_max(probe, eta)
    bound = _scaled("lossy_ideal", math.pi * qm.value * fock.trace(op))
    return BoundReport(p, bound, "measurement_test", _outcome(povm),
                       {"probability": "numeric", "bound": _src(qm.method)},
                       notes=(f"eta={eta:g}", "bound=ideal_povm"))


def lossy_bound_effective_povm(povm, probe, eta: float) -> BoundReport:
    """Effective POVM including loss: p = tr(Delta rho_t) against pi Q_max tr(Delta)/eta."""
    EfficiencyModel(eta)
    op = as_operator(povm)
    p = fock.expectation_aligned(op, lossy_state(probe, eta))
    qm = phase_space.q_max(probe)
    bound = _scaled("lossy_effective", math.pi * qm.value * fock.trace(op) / eta)
    return BoundReport(p, bound, "measurement_test", _outcome(povm),
                       {"probability": "numeric", "bound": _src(qm.method)},
                       notes=(f"eta={eta:g}", "bound=effective_povm"))


BOUND_KINDS = ("state", "ideal_povm", "effective_povm")


def efficiency_report(state, povm, eta: float, bound_kind: str) -> BoundReport:
    if bound_kind == "state":
        rep = state_test(lossy_state(state, eta), povm)
        return replace(rep, notes=rep.notes + (f"eta={eta:g}",))
    if bound_kind == "ideal_povm":
        return lossy_bound_ideal_povm(povm, state, eta)
    if bound_kind == "effective_povm":
        return lossy_bound_effective_povm(povm, state, eta)
    raise DomainError(f"bound_kind must be one of {BOUND_KINDS}", "robustness")


def efficiency_scan(state, povm, eta_grid: Sequence[float], bound_kind: str = "state") -> list[BoundReport]:
    grid = np.asarray(eta_grid, dtype=float)
    if grid.size and (np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] > 1):
        raise DomainError("eta grid must be increasing within (0, 1]", "robustness")
    return [efficiency_report(state, povm, float(e), bound_kind) for e in grid]


def _bisect(pred, a: float, b: float, tol: float) -> float:
    """Boundary between pred(a) and pred(b) (which differ)."""
    fa = pred(a)
    while b - a > tol:
        mid = 0.5 * (a + b)
        if pred(mid) == fa:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def efficiency_violation_window(state, povm, bound_kind: str = "state", n_grid: int = 100,
                                tol: float = 1e-4) -> tuple[float, float] | None:
    """Outer endpoints of the eta set where the bound is violated, or None if never."""
    grid = np.linspace(1.0 / n_grid, 1.0, n_grid)
    pred = lambda e: efficiency_report(state, povm, e, bound_kind).violated
    flags = [pred(float(e)) for e in grid]
    hits = [i for i, f in enumerate(flags) if f]
    if not hits:
        return None
    i0, i1 = hits[0], hits[-1]
    lo = grid[0] if i0 == 0 else _bisect(pred, float(grid[i0 - 1]), float(grid[i0]), tol)
    if i0 == 0 and pred(1e-6):
        lo = 0.0
    hi = 1.0 if i1 == n_grid - 1 else _bisect(pred, float(grid[i1]), float(grid[i1 + 1]), tol)
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# finite sampling


def sampling_moments(p: float, model: SamplingModel) -> tuple[float, float]:
    """Mean and standard deviation of the relative frequency k/N."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]", "robustness")
    return p, math.sqrt(p * (1.0 - p) / model.trials)


def simulate_counts(p: float, model: SamplingModel, replications: int = 1) -> np.ndarray:
    """Empirical frequencies k/N with k ~ Binomial(N, p), one per replication."""
    sampling_moments(p, model)
    k = model.generator().binomial(model.trials, p, size=replications)
    return k / model.trials


def significance(report: BoundReport, model: SamplingModel) -> float:
    """Violation p - p_b in units of the sampling standard deviation."""
    if report.density:
        raise DensityUnsupported("sampling significance needs a probability, not a density; bin first")
    p = min(max(report.probability, 0.0), 1.0)
    _, dp = sampling_moments(p, model)
    diff = report.probability - report.bound
    if dp == 0.0:
        return math.inf if diff > 0 else (-math.inf if diff < 0 else 0.0)
    return diff / dp


def is_significant(sigma: float, threshold: float = 3.0) -> bool:
    return sigma >= threshold

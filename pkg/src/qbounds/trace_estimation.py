"""Operational estimates of tr(Delta) for a detector outcome.

Two protocols: integrate the click probability over phase-averaged coherent
probes of radius r (2 int r p(r) dr = tr Delta), or illuminate with a broad
thermal state whose Q function is nearly flat, so that p (n_tc + 1) tends to
tr Delta as n_tc grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.stats import poisson

from . import fock
from .catalog import as_operator
from .errors import DomainError, TailError, TruncationError
from .fock import FockOperator, FockSpace


@dataclass(frozen=True)
class RadialProtocolConfig:
    r_grid: tuple[float, ...] | None = None
    quadrature_rule: str = "adaptive"  # "adaptive" | "trapezoid"
    r_max: float | None = None
    tol: float = 1e-6

    def __post_init__(self):
        if self.quadrature_rule not in ("adaptive", "trapezoid"):
            raise DomainError("quadrature_rule must be 'adaptive' or 'trapezoid'", "trace_estimation")
        if self.r_grid is not None:
            g = np.asarray(self.r_grid, dtype=float)
            if g.size < 2 or g[0] < 0 or np.any(np.diff(g) <= 0):
                raise DomainError("r_grid must be increasing and nonnegative", "trace_estimation")


@dataclass(frozen=True)
class ThermalProtocolConfig:
    n_tc_values: tuple[float, ...] = (100.0, 200.0, 400.0, 800.0)
    extrapolate: bool = True

    def __post_init__(self):
        v = np.asarray(self.n_tc_values, dtype=float)
        if v.size == 0 or np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise DomainError("n_tc_values must be increasing and positive", "trace_estimation")
        if self.extrapolate and v.size < 2:
            raise DomainError("extrapolation needs at least two n_tc values", "trace_estimation")


@dataclass(frozen=True)
class ThermalEstimate:
    n_tc_values: tuple[float, ...]
    ratios: tuple[float, ...]
    extrapolated: float | None

    @property
    def value(self) -> float:
        return self.extrapolated if self.extrapolated is not None else self.ratios[-1]


def phase_averaged_coherent(r: float, space: FockSpace | None = None) -> FockOperator:
    """(1/2pi) int dphi |r e^{i phi}><r e^{i phi}|: Poisson populations, no coherences."""
    if r < 0:
        raise DomainError("r must be nonnegative", "trace_estimation")
    mean = r * r
    d = space.dim if space is not None else fock.poisson_dim(mean)
    pops = poisson.pmf(np.arange(d), mean) if mean > 0 else np.eye(1, d)[0]
    loss = max(0.0, 1.0 - float(pops.sum()))
    if loss > fock.TOL_TRUNC:
        raise TruncationError(f"phase-averaged coherent state loses {loss:.3e} in D={d}")
    return FockOperator(FockSpace(d), np.diag(pops).astype(complex), "state", loss)


def _click_probability(diag: np.ndarray):
    n = np.arange(diag.size)

    def p(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return poisson.pmf(n[None, :], (r * r)[:, None]) @ diag

    return p


def _occupied_radius(diag: np.ndarray, tol: float = 1e-12) -> float:
    w = np.abs(diag)
    nz = np.flatnonzero(w > tol * max(w.max(initial=0.0), 1e-300))
    n_cut = int(nz[-1]) if nz.size else 0
    return math.sqrt(n_cut) + 5.0


def trace_via_radial(povm, config: RadialProtocolConfig = RadialProtocolConfig()) -> float:
    """2 int_0^inf r p(r) dr with p(r) the click probability under a phase-averaged probe.

    Only the diagonal of Delta enters, since the probe has no coherences; the
    probe populations are evaluated exactly on the element's support.
    """
    diag = as_operator(povm).diagonal()
    if not np.any(diag):
        return 0.0
    p = _click_probability(diag)
    integrand = lambda r: 2.0 * r * float(p(r)[0])
    r_max = config.r_max if config.r_max is not None else _occupied_radius(diag)
    if config.r_grid is not None:
        grid = np.asarray(config.r_grid, dtype=float)
        r_max = float(grid[-1])
        if config.quadrature_rule == "trapezoid":
            est = float(trapezoid(2.0 * grid * p(grid), grid))
        else:
            est = sum(quad(integrand, a, b, epsabs=1e-10, limit=200)[0] for a, b in zip(grid[:-1], grid[1:]))
    elif config.quadrature_rule == "trapezoid":
        grid = np.linspace(0.0, r_max, 2001)
        est = float(trapezoid(2.0 * grid * p(grid), grid))
    else:
        est = quad(integrand, 0.0, r_max, epsabs=config.tol * 1e-3, limit=400)[0]
    tail = quad(integrand, r_max, np.inf, epsabs=1e-14, limit=200)[0]
    if abs(tail) > config.tol * max(abs(est), 1e-300):
        raise TailError(f"radial tail {tail:.3e} beyond r_max = {r_max:g} exceeds tolerance")
    return float(est)


def thermal_ratio(povm, n_tc: float) -> float:
    """p (n_tc + 1) for a thermal probe of mean n_tc, taking pi Q_0 = 1/(n_tc + 1)."""
    diag = as_operator(povm).diagonal()
    xi = n_tc / (n_tc + 1.0)
    pops = xi ** np.arange(diag.size) / (n_tc + 1.0)
    return float(pops @ diag) * (n_tc + 1.0)


def trace_via_thermal(povm, config: ThermalProtocolConfig = ThermalProtocolConfig()) -> ThermalEstimate:
    """Ratios p (n_tc + 1) per n_tc and, optionally, their limit in 1/n_tc -> 0.

    The extrapolation fits a polynomial in h = 1/(n_tc + 1) through all points
    and evaluates it at h = 0.
    """
    ns = tuple(float(v) for v in config.n_tc_values)
    ratios = tuple(thermal_ratio(povm, n) for n in ns)
    extrap = None
    if config.extrapolate:
        h = 1.0 / (np.asarray(ns) + 1.0)
        coef = np.polynomial.polynomial.polyfit(h, np.asarray(ratios), len(ns) - 1)
        extrap = float(coef[0])
    return ThermalEstimate(ns, ratios, extrap)

"""Classical upper bounds on measurement statistics and their violation reports.

Two dual tests are provided. ``state_test`` bounds p_m = tr(rho Delta_m) by the
maximum of the Q function of the POVM element (pi Q_m,max), which holds for
every state with a nonnegative regular P function. ``measurement_test`` bounds
the same probability by pi Q_max tr(Delta_m) with Q the probe state's Q
function, which holds for every POVM element with a nonnegative P function.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import erf

from . import fock, phase_space, statistics
from .catalog import CatalogEntry, QuadratureEffect, analytic_of, as_operator
from .errors import InfiniteTrace, NotGaussian

EPS_V = 1e-12

QUADRATURE_STATE_BOUND = math.sqrt(2.0 / math.pi)

# Named multipliers on bound constants. Only the negative-control checks set
# these; every public bound routes through _scaled.
_BOUND_SCALE: dict[str, float] = {}

BOUND_NAMES = (
    "number",
    "state",
    "measurement",
    "quadrature_state",
    "quadrature_measurement",
    "two_mode_quadrature",
    "su2_state",
    "su2_measurement",
    "lossy_ideal",
    "lossy_effective",
)


def _scaled(name: str, value: float) -> float:
    return value * _BOUND_SCALE.get(name, 1.0)


@contextmanager
def perturbed(name: str, factor: float) -> Iterator[None]:
    """Temporarily multiply one named bound constant by factor."""
    if name not in BOUND_NAMES:
        raise KeyError(f"unknown bound {name!r}; choose from {', '.join(BOUND_NAMES)}")
    old = _BOUND_SCALE.get(name)
    _BOUND_SCALE[name] = factor
    try:
        yield
    finally:
        if old is None:
            _BOUND_SCALE.pop(name, None)
        else:
            _BOUND_SCALE[name] = old


@dataclass(frozen=True)
class BoundReport:
    probability: float
    bound: float
    test_kind: str  # "state_test" | "measurement_test"
    outcome_label: str
    provenance: dict = field(default_factory=lambda: {"probability": "numeric", "bound": "numeric"})
    density: bool = False
    notes: tuple[str, ...] = ()

    @property
    def violated(self) -> bool:
        return self.probability > self.bound * (1.0 + EPS_V)

    @property
    def violation_pct(self) -> float:
        return 100.0 * (self.probability - self.bound) / self.bound

    @property
    def ratio(self) -> float:
        return self.probability / self.bound

    def to_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        d["violated"] = self.violated
        d["violation_pct"] = self.violation_pct
        return d


@dataclass(frozen=True)
class ViolationInterval:
    lo: float
    hi: float
    captured_probability: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def empty(self) -> bool:
        return self.hi <= self.lo


# ---------------------------------------------------------------------------
# bounds


def classical_number_bound(n: int) -> float:
    """exp(-n) n^n / n!, the largest p_n reachable by a classical state (1 at n = 0)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return _scaled("number", 1.0)
    return _scaled("number", math.exp(-n + n * math.log(n) - math.lgamma(n + 1)))


def _provenance(p_src: str, b_src: str) -> dict:
    return {"probability": p_src, "bound": b_src}


def _src(method: str) -> str:
    return "analytic" if method == "closed_form" else "numeric"


def _outcome(povm) -> str:
    if isinstance(povm, QuadratureEffect):
        return f"x={povm.x:g}" + (f",theta={povm.theta:g}" if povm.theta else "")
    if isinstance(povm, CatalogEntry):
        if povm.params:
            args = ",".join(f"{k}={_fmt(v)}" for k, v in povm.params.items())
            return f"{povm.label}({args})"
        return povm.label
    return "operator"


def _fmt(v) -> str:
    if isinstance(v, complex):
        return f"{v.real:g}{v.imag:+g}j"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def _probability(povm, state) -> float:
    return fock.expectation_aligned(as_operator(povm), as_operator(state))


def state_test(state, povm) -> BoundReport:
    """Check p_m <= pi Q_m,max, satisfied by every classical state."""
    if isinstance(povm, QuadratureEffect):
        p = statistics.quadrature_density(state, povm.x, povm.theta)
        src = statistics.quadrature_density_source(state, povm.theta)
        return BoundReport(p, _scaled("quadrature_state", QUADRATURE_STATE_BOUND), "state_test",
                           _outcome(povm), _provenance(src, "analytic"), density=True)
    p = _probability(povm, state)
    if isinstance(povm, CatalogEntry) and povm.label == "povm_number":
        bound, b_src = classical_number_bound(povm.params["n"]), "analytic"
    else:
        qm = phase_space.q_max(povm)
        bound, b_src = _scaled("state", math.pi * qm.value), _src(qm.method)
    return BoundReport(p, bound, "state_test", _outcome(povm), _provenance("numeric", b_src))


def measurement_test(povm, probe) -> BoundReport:
    """Check p_m <= pi Q_max tr(Delta_m), satisfied by every classical measurement."""
    if isinstance(povm, QuadratureEffect):
        p = statistics.quadrature_density(probe, povm.x, povm.theta)
        target = probe if not povm.theta else fock.rotate(as_operator(probe), povm.theta)
        qm = phase_space.q_marginal_max(target)
        bound = _scaled("quadrature_measurement", math.pi * qm.value * povm.reduced_trace)
        src = statistics.quadrature_density_source(probe, povm.theta)
        return BoundReport(p, bound, "measurement_test", _outcome(povm),
                           _provenance(src, _src(qm.method)), density=True)
    try:
        op = as_operator(povm)
    except TypeError as exc:
        raise InfiniteTrace(f"{type(povm).__name__} has no finite trace") from exc
    tr = fock.trace(op)
    if not math.isfinite(tr):
        raise InfiniteTrace("POVM element trace is not finite")
    p = _probability(op, probe)
    qm = phase_space.q_max(probe)
    bound = _scaled("measurement", math.pi * qm.value * tr)
    return BoundReport(p, bound, "measurement_test", _outcome(povm), _provenance("numeric", _src(qm.method)))


# ---------------------------------------------------------------------------
# violating outcome sets


def _gaussian_std(source) -> float:
    if isinstance(source, (int, float)):
        return float(source)
    std = getattr(source, "quadrature_std", None)
    if std is None and isinstance(source, CatalogEntry):
        std = source.analytic.quadrature_std
        if source.analytic.quadrature_density is None:
            std = None
    if std is None:
        raise NotGaussian("quadrature statistics are not known to be Gaussian; scan numerically")
    return float(std)


def violating_interval(source, bound: float, center: float = 0.0) -> ViolationInterval:
    """Outcomes of a centered Gaussian p_x that exceed a constant density bound.

    source is the standard deviation Delta X itself or an object exposing a
    Gaussian ``quadrature_std``.
    """
    dx = _gaussian_std(source)
    p0 = 1.0 / (math.sqrt(2 * math.pi) * dx)
    if p0 <= bound:
        return ViolationInterval(center, center, 0.0)
    x_star = dx * math.sqrt(2.0 * math.log(p0 / bound))
    captured = float(erf(x_star / (dx * math.sqrt(2.0))))
    return ViolationInterval(center - x_star, center + x_star, captured)


def violating_regions(density: Callable[[np.ndarray], np.ndarray], bound: float, lo: float, hi: float,
                      resolution: float = 1e-6, n_grid: int = 4001) -> list[ViolationInterval]:
    """Sign-change scan of density(x) - bound for non-Gaussian statistics."""
    xs = np.linspace(lo, hi, n_grid)
    g = np.asarray(density(xs)) - bound
    f = lambda t: float(np.asarray(density(np.array([t])))[0]) - bound
    above = g > 0
    edges = []
    for i in np.flatnonzero(above[1:] != above[:-1]):
        edges.append(brentq(f, xs[i], xs[i + 1], xtol=resolution))
    bounds_list = ([lo] if above[0] else []) + edges + ([hi] if above[-1] else [])
    out = []
    for a, b in zip(bounds_list[0::2], bounds_list[1::2]):
        mass, _ = quad(lambda t: float(np.asarray(density(np.array([t])))[0]), a, b, epsabs=1e-10, limit=200)
        out.append(ViolationInterval(a, b, mass))
    return out


def scan_number_outcomes(state, n_max: int) -> list[BoundReport]:
    """State tests against every photon-number projector up to n_max."""
    from .catalog import povm_number

    d = as_operator(state).dim
    if n_max >= d:
        raise ValueError(f"n_max = {n_max} must be below the state's dimension {d}")
    return [state_test(state, povm_number(n)) for n in range(n_max + 1)]


def any_violation(reports: Sequence[BoundReport]) -> bool:
    return any(r.violated for r in reports)

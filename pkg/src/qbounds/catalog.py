"""Named states and POVM elements with their closed-form companions.

Each constructor returns a :class:`CatalogEntry` holding the truncated matrix
plus whatever is known analytically (Q function, photon statistics, quadrature
statistics, P classification). The analytic handles are used both as fast
paths and as cross-checks of the matrix computations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.special import gammaln

from . import fock
from .errors import DegenerateState, DomainError, PovmBoundError, TruncationError, WeightError
from .fock import TOL_TRUNC, FockOperator, FockSpace, FockVector, PhasePoint

PTag = Literal["regular_nonnegative", "regular_negative", "singular"]


@dataclass(frozen=True)
class PClassification:
    tag: PTag
    closed_form: Callable[[complex], float] | None = None

    def __post_init__(self):
        if self.tag != "singular" and self.closed_form is None:
            raise ValueError("regular P classification needs a closed form")

    @property
    def classical(self) -> bool:
        return self.tag == "regular_nonnegative"


SINGULAR = PClassification("singular")


@dataclass(frozen=True)
class Analytic:
    """Optional closed forms. Quadrature entries refer to X = X_0."""

    q: Callable[[complex], float] | None = None
    q_max: float | None = None
    q_argmax: complex | None = None
    q_marginal: Callable[[float], float] | None = None
    q_marginal_max: float | None = None
    number_probs: Callable[[int], float] | None = None
    quadrature_density: Callable[[float], float] | None = None
    quadrature_density_rotated: Callable[[float, float], float] | None = None  # (x, theta)
    quadrature_std: float | None = None
    mean_n: float | None = None
    mandel_q: float | None = None
    p_classification: PClassification = SINGULAR


@dataclass(frozen=True)
class CatalogEntry:
    operator: FockOperator
    label: str
    params: dict = field(default_factory=dict)
    analytic: Analytic = field(default_factory=Analytic)
    vector: FockVector | None = None

    @property
    def kind(self) -> str:
        return self.operator.kind

    @property
    def dim(self) -> int:
        return self.operator.dim

    @property
    def p_classification(self) -> PClassification:
        return self.analytic.p_classification


@dataclass(frozen=True)
class QuadratureEffect:
    """Continuous-outcome effect |x><x| of the quadrature X_theta.

    Pairing with a state gives a probability density. Its trace is infinite;
    the reduced trace over the x' coordinate of its P function is 1/pi.
    """

    x: float
    theta: float = 0.0
    label: str = "povm_quadrature"

    @property
    def reduced_trace(self) -> float:
        return 1.0 / math.pi

    @property
    def params(self) -> dict:
        return {"x": self.x, "theta": self.theta}


def as_operator(obj) -> FockOperator:
    if isinstance(obj, CatalogEntry):
        return obj.operator
    if isinstance(obj, FockOperator):
        return obj
    raise TypeError(f"expected CatalogEntry or FockOperator, got {type(obj).__name__}")


def analytic_of(obj) -> Analytic:
    return obj.analytic if isinstance(obj, CatalogEntry) else Analytic()


# ---------------------------------------------------------------------------
# helpers


def _log_poisson(n, mean):
    n = np.asarray(n, dtype=float)
    if mean == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return -mean + n * math.log(mean) - gammaln(n + 1)


def _diag_entry(pops: np.ndarray, kind, label, params, analytic, loss=None) -> CatalogEntry:
    d = max(2, len(pops))
    m = np.zeros((d, d), dtype=complex)
    m[np.arange(len(pops)), np.arange(len(pops))] = pops
    if loss is None:
        loss = max(0.0, 1.0 - float(np.sum(pops))) if kind == "state" else 0.0
    if loss > TOL_TRUNC and kind == "state":
        raise TruncationError(f"{label}: truncation loss {loss:.3e} exceeds {TOL_TRUNC:g}")
    op = FockOperator(FockSpace(d), m, kind=kind, truncation_loss=loss)
    return CatalogEntry(op, label, params, analytic)


def _check_dim(dim, needed):
    return needed if dim is None else int(dim)


def _centered_gaussian(x: float, var: float) -> float:
    return math.exp(-x * x / (2 * var)) / math.sqrt(2 * math.pi * var)


def _xi(n_tc: float) -> float:
    return n_tc / (n_tc + 1.0)


# ---------------------------------------------------------------------------
# states


def coherent_state(alpha, dim: int | None = None) -> CatalogEntry:
    z = PhasePoint.of(alpha).z
    space = FockSpace(dim) if dim is not None else None
    v = fock.coherent_vector(z, space)
    r2 = abs(z) ** 2
    analytic = Analytic(
        q=lambda b: math.exp(-abs(complex(b) - z) ** 2) / math.pi,
        q_max=1.0 / math.pi,
        q_argmax=z,
        q_marginal=lambda x: math.exp(-(x - z.real) ** 2) / math.sqrt(math.pi),
        q_marginal_max=1.0 / math.sqrt(math.pi),
        number_probs=lambda n: float(np.exp(_log_poisson(n, r2))),
        quadrature_density=lambda x: math.sqrt(2 / math.pi) * math.exp(-2 * (x - z.real) ** 2),
        quadrature_density_rotated=lambda x, th: math.sqrt(2 / math.pi) * math.exp(
            -2 * (x - (z * cmath.exp(1j * th)).real) ** 2),
        quadrature_std=0.5,
        mean_n=r2,
        mandel_q=0.0,
    )
    return CatalogEntry(v.projector("state"), "coherent", {"alpha": z}, analytic, vector=v)


def number_state(n: int, dim: int | None = None) -> CatalogEntry:
    if n < 0 or int(n) != n:
        raise DomainError(f"photon number must be a nonnegative integer, got {n}")
    n = int(n)
    d = _check_dim(dim, max(2, n + 1))
    v = fock.number_vector(n, FockSpace(d))
    q_max = math.exp(-n + (n * math.log(n) if n else 0.0) - math.lgamma(n + 1)) / math.pi

    def q(a):
        r2 = abs(a) ** 2
        if n == 0:
            return math.exp(-r2) / math.pi
        if r2 == 0:
            return 0.0
        return math.exp(-r2 + n * math.log(r2) - math.lgamma(n + 1)) / math.pi

    analytic = Analytic(
        q=q,
        q_max=q_max,
        q_argmax=complex(math.sqrt(n)),
        number_probs=lambda k: 1.0 if k == n else 0.0,
        mean_n=float(n),
        mandel_q=None if n == 0 else -1.0,
    )
    return CatalogEntry(v.projector("state"), "number", {"n": n}, analytic, vector=v)


def thermal_state(n_tc: float, dim: int | None = None) -> CatalogEntry:
    if n_tc < 0:
        raise DomainError(f"n_tc must be nonnegative, got {n_tc}")
    xi = _xi(n_tc)
    d = _check_dim(dim, fock.geometric_dim(xi))
    k = np.arange(d)
    pops = (1 - xi) * xi**k
    loss = xi**d
    nn = n_tc + 1.0
    p_class = (
        PClassification("regular_nonnegative",
                        lambda a: math.exp(-abs(a) ** 2 / n_tc) / (math.pi * n_tc))
        if n_tc > 0 else SINGULAR
    )
    analytic = Analytic(
        q=lambda a: math.exp(-abs(a) ** 2 / nn) / (math.pi * nn),
        q_max=1.0 / (math.pi * nn),
        q_argmax=0j,
        q_marginal=lambda x: math.exp(-x * x / nn) / math.sqrt(math.pi * nn),
        q_marginal_max=1.0 / math.sqrt(math.pi * nn),
        number_probs=lambda n: (1 - xi) * xi**n,
        quadrature_density=lambda x: math.exp(-2 * x * x / (1 + 2 * n_tc)) / math.sqrt(math.pi * (0.5 + n_tc)),
        quadrature_std=math.sqrt((1 + 2 * n_tc) / 4),
        mean_n=float(n_tc),
        mandel_q=float(n_tc) if n_tc > 0 else None,
        p_classification=p_class,
    )
    return _diag_entry(pops, "state", "thermal", {"n_tc": n_tc, "xi": xi}, analytic, loss)


def photon_added_thermal(n_tc: float, dim: int | None = None) -> CatalogEntry:
    if n_tc < 0:
        raise DomainError(f"n_tc must be nonnegative, got {n_tc}")
    xi = _xi(n_tc)

    def pops_for(d):
        k = np.arange(d, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(k >= 1, (1 - xi) ** 2 * k * xi ** np.maximum(k - 1, 0), 0.0)

    d = _check_dim(dim, fock.dim_from_populations(pops_for) if xi > 0 else 2)
    pops = pops_for(d)
    if n_tc > 0:
        p_class = PClassification(
            "regular_negative",
            lambda a: ((n_tc + 1) * abs(a) ** 2 - n_tc) * math.exp(-abs(a) ** 2 / n_tc) / (math.pi * n_tc**3),
        )
    else:
        p_class = SINGULAR
    analytic = Analytic(
        q=lambda a: (1 - xi) ** 2 * abs(a) ** 2 * math.exp(-(1 - xi) * abs(a) ** 2) / math.pi,
        q_max=(1 - xi) / (math.e * math.pi),
        q_argmax=complex(1 / math.sqrt(1 - xi)),
        number_probs=lambda n: (1 - xi) ** 2 * xi ** (n - 1) * n if n >= 1 else 0.0,
        quadrature_std=math.sqrt((3 + 4 * n_tc) / 4),
        mean_n=2 * n_tc + 1,
        mandel_q=(2 * n_tc**2 - 1) / (2 * n_tc + 1),
        p_classification=p_class,
    )
    return _diag_entry(pops, "state", "photon_added_thermal", {"n_tc": n_tc, "xi": xi}, analytic)


def cat_state(alpha, parity: str = "even", dim: int | None = None) -> CatalogEntry:
    z = PhasePoint.of(alpha).z
    if parity not in ("even", "odd"):
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    s = abs(z) ** 2
    if parity == "odd" and s == 0:
        raise DegenerateState("odd cat state vanishes at alpha = 0")
    sign = 1.0 if parity == "even" else -1.0
    # norm^2 of |a> +- |-a> is 2(1 +- exp(-2|a|^2))
    norm2 = 2.0 * (1.0 + sign * math.exp(-2 * s)) if parity == "even" else -2.0 * math.expm1(-2 * s)

    def amplitudes(d):
        return fock.coherent_amplitudes(z, d) * (1 + sign * (-1.0) ** np.arange(d)) / math.sqrt(norm2)

    d = _check_dim(dim, fock.dim_from_populations(lambda k: np.abs(amplitudes(k)) ** 2))
    v = amplitudes(d)
    loss = max(0.0, 1.0 - float(np.vdot(v, v).real))
    if loss > TOL_TRUNC:
        raise TruncationError(f"cat state loses {loss:.3e} in D={d}")
    vec = FockVector(FockSpace(d), v, loss)

    if parity == "even":
        def probs(k):
            if k % 2:
                return 0.0
            if s == 0:
                return 1.0 if k == 0 else 0.0
            return math.exp(k * math.log(s) - math.lgamma(k + 1) - math.log(math.cosh(s)))

        mean_n = s * math.tanh(s)
        mandel = 2 * s / math.sinh(2 * s) if s > 0 else None
        if z.real == 0:
            four_n2 = 2.0 / (1.0 + math.exp(-2 * s))
            a = math.sqrt(s)
            dens = lambda x: four_n2 * math.sqrt(2 / math.pi) * math.cos(2 * a * x) ** 2 * math.exp(-2 * x * x)
        else:
            dens = _cat_density(z, sign, norm2)
        analytic = Analytic(number_probs=probs, quadrature_density=dens, mean_n=mean_n, mandel_q=mandel)
    else:
        def probs(k):
            if k % 2 == 0:
                return 0.0
            return math.exp(k * math.log(s) - math.lgamma(k + 1) - math.log(math.sinh(s)))

        mean_n = s / math.tanh(s)
        analytic = Analytic(number_probs=probs, quadrature_density=_cat_density(z, sign, norm2), mean_n=mean_n)
    return CatalogEntry(vec.projector("state"), f"cat_{parity}", {"alpha": z, "parity": parity}, analytic, vec)


def _cat_density(z: complex, sign: float, norm2: float):
    def dens(x):
        amp = fock.coherent_wavefunction(z, x) + sign * fock.coherent_wavefunction(-z, x)
        return float(abs(amp) ** 2 / norm2)

    return dens


def squeezed_vacuum(delta_x: float, dim: int | None = None) -> CatalogEntry:
    """Squeezed vacuum with X-quadrature uncertainty delta_x (vacuum: 1/2)."""
    if not delta_x > 0:
        raise DomainError(f"delta_x must be positive, got {delta_x}")
    r = -math.log(2 * delta_x)
    t = math.tanh(r)

    def amps_for(d):
        c = np.zeros(d)
        m = np.arange((d + 1) // 2)
        # c_{2m} = (-tanh r)^m sqrt((2m)!) / (2^m m!) / sqrt(cosh r)
        logmag = m * math.log(abs(t)) if t != 0 else np.where(m == 0, 0.0, -np.inf)
        logmag = logmag + 0.5 * gammaln(2 * m + 1) - m * math.log(2) - gammaln(m + 1) - 0.5 * math.log(math.cosh(r))
        c[0::2] = np.exp(logmag) * np.where(m % 2 == 0, 1.0, -1.0 if t > 0 else 1.0)
        return c

    d = _check_dim(dim, fock.dim_from_populations(lambda d: amps_for(d) ** 2) if t != 0 else 2)
    c = amps_for(d)
    loss = max(0.0, 1.0 - float(np.sum(c**2)))
    if loss > TOL_TRUNC:
        raise TruncationError(f"squeezed vacuum loses {loss:.3e} in D={d}")
    vec = FockVector(FockSpace(d), c, loss)
    v2 = delta_x**2
    pref = 4 * delta_x / (1 + 4 * v2) / math.pi
    analytic = Analytic(
        q=lambda a: pref * math.exp(-(2 * complex(a).real ** 2 + 8 * v2 * complex(a).imag ** 2) / (1 + 4 * v2)),
        q_max=pref,
        q_argmax=0j,
        q_marginal=lambda x: math.sqrt(2 / (math.pi * (1 + 4 * v2))) * math.exp(-2 * x * x / (1 + 4 * v2)),
        q_marginal_max=math.sqrt(2 / (math.pi * (1 + 4 * v2))),
        quadrature_density=lambda x: math.exp(-x * x / (2 * v2)) / (math.sqrt(2 * math.pi) * delta_x),
        quadrature_density_rotated=lambda x, th: _centered_gaussian(
            x, v2 * math.cos(th) ** 2 + math.sin(th) ** 2 / (16 * v2)),
        quadrature_std=delta_x,
        mean_n=math.sinh(r) ** 2,
    )
    return CatalogEntry(vec.projector("state"), "squeezed_vacuum", {"delta_x": delta_x, "r": r}, analytic, vec)


def _combine_classification(entries: Sequence[CatalogEntry], weights) -> PClassification:
    live = [(w, e) for w, e in zip(weights, entries) if w > 0]
    tags = [e.p_classification.tag for _, e in live]
    if "singular" in tags:
        return SINGULAR
    fns = [(w, e.p_classification.closed_form) for w, e in live]
    closed = lambda a: sum(w * f(a) for w, f in fns)
    if "regular_negative" in tags:
        return PClassification("regular_negative", closed)
    return PClassification("regular_nonnegative", closed)


def _linear(handles, weights):
    if any(h is None for h in handles):
        return None
    pairs = list(zip(weights, handles))
    return lambda arg: sum(w * h(arg) for w, h in pairs)


def mixture(components: Sequence[tuple[float, CatalogEntry]], label: str = "mixture",
            params: dict | None = None) -> CatalogEntry:
    if not components:
        raise WeightError("mixture needs at least one component")
    weights = [float(w) for w, _ in components]
    entries = [e for _, e in components]
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
        raise WeightError(f"weights must be nonnegative and sum to 1, got {weights}")
    if any(e.kind != "state" for e in entries):
        raise WeightError("mixture components must be states")
    ops = fock.align(*(e.operator for e in entries))
    m = sum(w * op.matrix for w, op in zip(weights, ops))
    loss = sum(w * e.operator.truncation_loss for w, e in zip(weights, entries))
    op = FockOperator(ops[0].space, m, "state", loss)

    analytics = [e.analytic for e in entries]
    mean = None
    if all(a.mean_n is not None for a in analytics):
        mean = sum(w * a.mean_n for w, a in zip(weights, analytics))
    analytic = Analytic(
        q=_linear([a.q for a in analytics], weights),
        number_probs=_linear([a.number_probs for a in analytics], weights),
        quadrature_density=_linear([a.quadrature_density for a in analytics], weights),
        mean_n=mean,
        p_classification=_combine_classification(entries, weights),
    )
    if params is None:
        params = {"weights": weights, "labels": [e.label for e in entries]}
    return CatalogEntry(op, label, params, analytic)


def vacuum_number_mixture(p: float, N: int) -> CatalogEntry:
    """(1 - p)|0><0| + p|N><N|."""
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if N < 1:
        raise DomainError("N must be at least 1")
    e = mixture([(1 - p, number_state(0, dim=N + 1)), (p, number_state(N))],
                "vacuum_number_mixture", {"p": p, "N": N})
    mq = N * (1 - p) - 1 if p > 0 else None
    return CatalogEntry(e.operator, e.label, e.params, _replace(e.analytic, mandel_q=mq))


def thermal_number_mixture(p: float, n_tc: float, n_0: int) -> CatalogEntry:
    """p rho_tc + (1 - p)|n_0><n_0|."""
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    comps = [(p, thermal_state(n_tc)), (1 - p, number_state(n_0))]
    return mixture(comps, "thermal_number_mixture", {"p": p, "n_tc": n_tc, "n_0": n_0})


def _replace(analytic: Analytic, **kw) -> Analytic:
    from dataclasses import replace

    return replace(analytic, **kw)


# ---------------------------------------------------------------------------
# POVM elements


def povm_number(n: int, dim: int | None = None) -> CatalogEntry:
    e = number_state(n, dim)
    return CatalogEntry(e.operator.with_kind("povm_element"), "povm_number", {"n": n}, e.analytic, e.vector)


def povm_projector(state) -> CatalogEntry:
    """|psi><psi| for a pure state (FockVector or pure CatalogEntry)."""
    if isinstance(state, CatalogEntry):
        if state.vector is None:
            raise DomainError(f"{state.label} is not a pure state")
        vec, analytic, label = state.vector, state.analytic, state.label
        analytic = Analytic(q=analytic.q, q_max=analytic.q_max, q_argmax=analytic.q_argmax)
    else:
        vec, analytic, label = state, Analytic(), "vector"
    v = vec.amplitudes / math.sqrt(vec.norm2)
    m = np.outer(v, v.conj())
    op = FockOperator(vec.space, m, "povm_element")
    return CatalogEntry(op, "povm_projector", {"of": label}, analytic, FockVector(vec.space, v))


def povm_coherent(alpha, dim: int | None = None) -> CatalogEntry:
    """|alpha><alpha| / pi."""
    z = PhasePoint.of(alpha).z
    space = FockSpace(dim) if dim is not None else None
    v = fock.coherent_vector(z, space)
    m = np.outer(v.amplitudes, v.amplitudes.conj()) / math.pi
    op = FockOperator(v.space, m, "povm_element", v.truncation_loss)
    analytic = Analytic(
        q=lambda b: math.exp(-abs(complex(b) - z) ** 2) / math.pi**2,
        q_max=1.0 / math.pi**2,
        q_argmax=z,
    )
    return CatalogEntry(op, "povm_coherent", {"alpha": z}, analytic, v)


def contaminated_one_photon(p: float, q: float) -> CatalogEntry:
    """q|0><0| + p|1><1| + q|2><2|: a one-photon click with vacuum and two-photon leakage."""
    if p < 0 or q < 0:
        raise DomainError("p and q must be nonnegative")
    if p > 1 or q > 1:
        raise PovmBoundError("POVM element eigenvalues exceed 1")
    op = FockOperator(FockSpace(3), np.diag([q, p, q]), "povm_element")
    analytic = Analytic(
        q=lambda a: math.exp(-abs(a) ** 2) * (q + p * abs(a) ** 2 + q * abs(a) ** 4 / 2) / math.pi,
    )
    return CatalogEntry(op, "contaminated_one_photon", {"p": p, "q": q}, analytic)


def povm_quadrature(x: float, theta: float = 0.0) -> QuadratureEffect:
    if not math.isfinite(x):
        raise DomainError("quadrature outcome must be finite")
    return QuadratureEffect(float(x), float(theta))


# ---------------------------------------------------------------------------
# string addressing (used by the CLI)

STATE_FAMILIES: dict[str, Callable[..., CatalogEntry]] = {
    "coherent": coherent_state,
    "number": number_state,
    "thermal": thermal_state,
    "photon_added_thermal": photon_added_thermal,
    "cat": cat_state,
    "squeezed_vacuum": squeezed_vacuum,
    "vacuum_number_mixture": vacuum_number_mixture,
    "thermal_number_mixture": thermal_number_mixture,
}

POVM_FAMILIES: dict[str, Callable[..., object]] = {
    "number": povm_number,
    "coherent": povm_coherent,
    "contaminated_one_photon": contaminated_one_photon,
    "quadrature": povm_quadrature,
}

"""Husimi Q functions, their maxima, and the x-marginal of Q.

Q(alpha) = <alpha|A|alpha> / pi is evaluated through truncated coherent
amplitudes. Maxima use a closed form when the catalog supplies one and
otherwise a coarse polar grid followed by bounded 1-D refinements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import fock
from .catalog import CatalogEntry, analytic_of, as_operator
from .errors import ConvergenceError, QuadratureError, SingularP, TruncationError
from .fock import FockOperator, PhasePoint

GRID_R = 64
GRID_PHI = 64
REL_TOL = 1e-9


@dataclass(frozen=True)
class MaxResult:
    value: float
    argmax: complex
    method: str  # "closed_form" | "grid_refine"
    est_error: float = 0.0

    @property
    def radius(self) -> float:
        return abs(self.argmax)


@dataclass(frozen=True)
class QSurface:
    source: FockOperator
    evaluation: Callable[[complex], float]
    closed_form: Callable[[complex], float] | None = None

    def __call__(self, alpha) -> float:
        return self.evaluation(alpha)


# ---------------------------------------------------------------------------
# evaluation


# exp(-|alpha|^2 / 2) underflows past this radius
MAX_RADIUS = 37.0


def _check_disc(op: FockOperator, alphas: np.ndarray) -> None:
    if np.max(np.abs(alphas), initial=0.0) > MAX_RADIUS:
        raise TruncationError(f"|alpha| beyond the valid disc r = {MAX_RADIUS:g}")


def q_values(op, alphas) -> np.ndarray:
    """Vectorized Q over an array of complex amplitudes."""
    op = as_operator(op)
    alphas = np.asarray(alphas, dtype=complex)
    shape = alphas.shape
    flat = alphas.ravel()
    _check_disc(op, flat)
    c = fock.coherent_table(flat, op.dim)
    q = np.einsum("im,mn,in->i", c.conj(), op.matrix, c).real / math.pi
    return q.reshape(shape)


def q_value(op, alpha) -> float:
    return float(q_values(op, np.array([PhasePoint.of(alpha).z]))[0])


def q_surface(obj) -> QSurface:
    op = as_operator(obj)
    return QSurface(op, lambda a: q_value(op, a), analytic_of(obj).q)


# ---------------------------------------------------------------------------
# maximization


def radius_cut(op: FockOperator, tol: float = 1e-8) -> float:
    """sqrt(n_cut) + 5 where n_cut holds all but tol of the diagonal weight."""
    d = np.abs(op.diagonal())
    total = d.sum()
    if total == 0:
        return 5.0
    c = np.cumsum(d) / total
    n_cut = int(np.searchsorted(c, 1.0 - tol))
    return min(math.sqrt(n_cut) + 5.0, MAX_RADIUS)


def _refine_1d(f, lo, hi):
    res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 500})
    return float(res.x), float(-res.fun)


def maximize_radial(f: Callable[[np.ndarray], np.ndarray], r_max: float) -> MaxResult:
    """Maximize a function of the radius only; f maps an array of radii to values."""
    rs = np.linspace(0.0, r_max, GRID_R)
    vals = f(rs)
    i = int(np.argmax(vals))
    lo, hi = rs[max(i - 1, 0)], rs[min(i + 1, GRID_R - 1)]
    r, v = _refine_1d(lambda t: float(f(np.array([t]))[0]), lo, hi)
    if v < vals[i]:
        r, v = float(rs[i]), float(vals[i])
    # a second bracket around the refined point estimates the residual error
    h = (hi - lo) * 1e-3
    _, v2 = _refine_1d(lambda t: float(f(np.array([t]))[0]), max(0.0, r - h), r + h)
    err = abs(v2 - v) + 4 * np.finfo(float).eps * abs(v)
    return MaxResult(max(v, v2), complex(r), "grid_refine", float(err))


def maximize_plane(f: Callable[[np.ndarray], np.ndarray], r_max: float,
                   n_r: int = GRID_R, n_phi: int = GRID_PHI, max_sweeps: int = 60) -> MaxResult:
    """Maximize f(alpha) over the disc |alpha| <= r_max.

    Coarse polar grid (ties go to smaller radius, then smaller angle),
    coordinate-wise bounded refinement in (r, phi), then a simplex polish.
    """
    rs = np.linspace(0.0, r_max, n_r)
    phis = np.arange(n_phi) * (2 * math.pi / n_phi)
    grid = rs[:, None] * np.exp(1j * phis[None, :])
    vals = f(grid.ravel()).reshape(grid.shape)
    flat = int(np.argmax(vals))
    ir, ip = divmod(flat, n_phi)
    r, phi = float(rs[ir]), float(phis[ip])
    best = float(vals[ir, ip])
    dr, dphi = rs[1] - rs[0], phis[1] - phis[0]
    f1 = lambda z: float(f(np.array([z]))[0])

    change = math.inf
    for _ in range(max_sweeps):
        prev = best
        r, v = _refine_1d(lambda t: f1(t * np.exp(1j * phi)), max(0.0, r - dr), min(r_max, r + dr))
        best = max(best, v)
        if r > 0:
            phi, v = _refine_1d(lambda t: f1(r * np.exp(1j * t)), phi - dphi, phi + dphi)
            best = max(best, v)
        change = best - prev
        if change <= 1e-15 * max(1.0, abs(best)):
            break
    z0 = r * np.exp(1j * phi)
    res = minimize(lambda p: -f1(complex(p[0], p[1])), [z0.real, z0.imag], method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-16, "maxiter": 4000})
    if -res.fun > best:
        change = max(change, -res.fun - best)
        best = float(-res.fun)
        z0 = complex(res.x[0], res.x[1])
    if change > REL_TOL * max(abs(best), 1e-300):
        raise ConvergenceError(f"refinement stalled with last change {change:.3e}")
    err = abs(change) + 4 * np.finfo(float).eps * abs(best)
    return MaxResult(best, complex(z0), "grid_refine", float(err))


def q_max(obj, method: str = "auto") -> MaxResult:
    """Maximum of the Q function of a state or POVM element."""
    analytic = analytic_of(obj)
    if method in ("auto", "closed_form") and analytic.q_max is not None:
        arg = analytic.q_argmax if analytic.q_argmax is not None else 0j
        return MaxResult(float(analytic.q_max), complex(arg), "closed_form", 0.0)
    if method == "closed_form":
        raise ValueError("no closed-form Q maximum for this operator")
    op = as_operator(obj)
    r_max = radius_cut(op)
    if op.is_diagonal():
        d = op.diagonal()

        def radial(rs):
            c = fock.coherent_table(np.asarray(rs, dtype=complex), op.dim)
            return (np.abs(c) ** 2 @ d) / math.pi

        return maximize_radial(radial, r_max)
    return maximize_plane(lambda a: q_values(op, a), r_max)


# ---------------------------------------------------------------------------
# x-marginal of Q


def _gh(n: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w


def _marginal_rule(op: FockOperator, x, n_nodes: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y, w = _gh(n_nodes)
    alphas = (x[:, None] + 1j * y[None, :]).ravel()
    c = fock.coherent_table(alphas, op.dim, drop_imag_gaussian=True)
    g = np.einsum("im,mn,in->i", c.conj(), op.matrix, c).real.reshape(x.size, n_nodes)
    return g @ w / math.pi


def q_marginal(obj, x, *, use_closed_form: bool = True):
    """Integral of Q(x, y) over y.

    The integrand is exp(-y^2) times a polynomial of degree 2(D-1) in y, so a
    Gauss-Hermite rule with at least D nodes is exact; a second rule with more
    nodes bounds the roundoff.
    """
    analytic = analytic_of(obj)
    scalar = np.ndim(x) == 0
    if use_closed_form and analytic.q_marginal is not None:
        out = np.array([analytic.q_marginal(float(t)) for t in np.atleast_1d(x)])
        return float(out[0]) if scalar else out
    op = as_operator(obj)
    n1 = op.dim + 4
    v1 = _marginal_rule(op, x, n1)
    v2 = _marginal_rule(op, x, n1 + 12)
    tail = float(np.max(np.abs(v1 - v2)))
    if tail > 1e-10:
        raise QuadratureError(f"marginal quadrature disagreement {tail:.3e}")
    return float(v2[0]) if scalar else v2


def q_marginal_max(obj, method: str = "auto") -> MaxResult:
    analytic = analytic_of(obj)
    if method in ("auto", "closed_form") and analytic.q_marginal_max is not None:
        return MaxResult(float(analytic.q_marginal_max), 0j, "closed_form", 0.0)
    op = as_operator(obj)
    r_max = radius_cut(op)
    xs = np.linspace(-r_max, r_max, 2 * GRID_R + 1)
    vals = q_marginal(op, xs, use_closed_form=False)
    i = int(np.argmax(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    x, v = _refine_1d(lambda t: q_marginal(op, t, use_closed_form=False), lo, hi)
    if v < vals[i]:
        x, v = float(xs[i]), float(vals[i])
    return MaxResult(v, complex(x), "grid_refine", 4 * np.finfo(float).eps * abs(v))


# ---------------------------------------------------------------------------
# P functions (closed forms only)


def p_value(entry: CatalogEntry, alpha) -> float:
    pc = entry.p_classification
    if pc.tag == "singular" or pc.closed_form is None:
        raise SingularP(f"{entry.label}: P function is singular; no pointwise value")
    return float(pc.closed_form(PhasePoint.of(alpha).z))

"""Two-mode bounds: joint and total photon numbers and the quadrature difference.

The two-mode squeezed vacuum is kept in Schmidt form (one coefficient per
photon number); dense two-mode matrices are built only when asked for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .bounds import BoundReport, _scaled, classical_number_bound
from .catalog import as_operator
from .errors import DomainError, SpaceMismatch, TruncationError
from .fock import TOL_TRUNC, FockOperator, FockSpace

QUADRATURE_DIFFERENCE_BOUND = 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class TwoModeOperator:
    spaces: tuple[FockSpace, FockSpace]
    matrix: np.ndarray
    kind: str = "state"
    truncation_loss: float = 0.0
    # coefficient matrix c[m, n] of a pure state, when known
    amplitudes: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        d = self.dims[0] * self.dims[1]
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (d, d):
            raise SpaceMismatch(f"matrix shape {m.shape} does not match {self.dims}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("two-mode operator is not Hermitian")
        object.__setattr__(self, "matrix", 0.5 * (m + m.conj().T))
        if self.kind == "state":
            tr = float(np.trace(self.matrix).real)
            if abs(tr - 1.0) > max(TOL_TRUNC, 2 * self.truncation_loss) + 1e-12:
                raise TruncationError(f"two-mode state trace {tr:.12f} differs from 1")

    @property
    def dims(self) -> tuple[int, int]:
        return self.spaces[0].dim, self.spaces[1].dim

    def joint_number_probs(self) -> np.ndarray:
        return self.matrix.diagonal().real.reshape(self.dims)

    def reduced(self, keep: int = 0) -> FockOperator:
        d1, d2 = self.dims
        t = self.matrix.reshape(d1, d2, d1, d2)
        m = np.einsum("ijkj->ik", t) if keep == 0 else np.einsum("ijil->jl", t)
        return FockOperator(self.spaces[keep], m, self.kind, self.truncation_loss)

    def quadrature_difference_density(self, x) -> np.ndarray:
        return _difference_density_generic(self, x)


@dataclass(frozen=True)
class TmsvState:
    zeta: float
    dim: int

    def __post_init__(self):
        if not 0.0 <= self.zeta < 1.0:
            raise DomainError(f"zeta must lie in [0, 1), got {self.zeta}", "two_mode")

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim, self.dim

    @property
    def schmidt(self) -> np.ndarray:
        return math.sqrt(1.0 - self.zeta**2) * self.zeta ** np.arange(self.dim)

    @property
    def truncation_loss(self) -> float:
        return self.zeta ** (2 * self.dim)

    @property
    def mean_total(self) -> float:
        return 2 * self.zeta**2 / (1 - self.zeta**2)

    @property
    def quadrature_std(self) -> float:
        """Standard deviation of X1 - X2."""
        return math.sqrt((1 - self.zeta) / (2 * (1 + self.zeta)))

    @property
    def amplitudes(self) -> np.ndarray:
        return np.diag(self.schmidt)

    def joint_number_probs(self) -> np.ndarray:
        return np.diag(self.schmidt**2)

    def reduced(self, keep: int = 0) -> FockOperator:
        return FockOperator(FockSpace(self.dim), np.diag(self.schmidt**2).astype(complex), "state",
                            self.truncation_loss)

    def dense(self) -> TwoModeOperator:
        c = np.diag(self.schmidt).astype(complex)
        return _pure(c, self.truncation_loss)

    def quadrature_difference_density(self, x) -> np.ndarray:
        dx = self.quadrature_std
        x = np.asarray(x, dtype=float)
        return np.exp(-x * x / (2 * dx * dx)) / (math.sqrt(2 * math.pi) * dx)


def tmsv(zeta: float, dim: int | None = None) -> TmsvState:
    """Two-mode squeezed vacuum sqrt(1 - zeta^2) sum_n zeta^n |n>|n> in Schmidt form."""
    if not 0.0 <= zeta < 1.0:
        raise DomainError(f"zeta must lie in [0, 1), got {zeta}", "two_mode")
    need = fock.geometric_dim(zeta**2)
    d = need if dim is None else dim
    if zeta ** (2 * d) > TOL_TRUNC:
        raise TruncationError(f"two-mode squeezed vacuum loses {zeta ** (2 * d):.3e} per mode at D={d}")
    return TmsvState(float(zeta), d)


def _pure(c: np.ndarray, loss: float = 0.0) -> TwoModeOperator:
    d1, d2 = c.shape
    v = c.ravel()
    return TwoModeOperator((FockSpace(d1), FockSpace(d2)), np.outer(v, v.conj()), "state", loss, amplitudes=c)


def product_state(first, second) -> TwoModeOperator:
    """Uncorrelated product of two single-mode catalog states."""
    a, b = as_operator(first), as_operator(second)
    va, vb = getattr(first, "vector", None), getattr(second, "vector", None)
    loss = a.truncation_loss + b.truncation_loss
    if va is not None and vb is not None:
        return _pure(np.outer(va.amplitudes, vb.amplitudes), loss)
    return TwoModeOperator((a.space, b.space), np.kron(a.matrix, b.matrix), "state", loss)


# ---------------------------------------------------------------------------
# quadrature difference


def _difference_density_generic(state, x) -> np.ndarray:
    """p(x) = int dy <x + y, y| rho |x + y, y> on a uniform grid in y.

    The integrand is smooth and decays like a Gaussian, so the trapezoid rule
    converges geometrically once the grid resolves the highest Fock level.
    """
    d1, d2 = state.dims
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half = math.sqrt(max(d1, d2)) + 8.0
    h = min(0.02, 0.25 / math.sqrt(max(d1, d2)))
    y = np.arange(-half - np.max(np.abs(x)), half + np.max(np.abs(x)) + h, h)
    psi2 = fock.fock_wavefunctions(d2 - 1, y)
    out = np.empty(x.size)
    for i, xi in enumerate(x):
        psi1 = fock.fock_wavefunctions(d1 - 1, xi + y)
        amplitudes = state.amplitudes
        if amplitudes is not None:
            amp = np.einsum("my,mn,ny->y", psi1, amplitudes, psi2)
            vals = np.abs(amp) ** 2
        else:
            v = (psi1[:, None, :] * psi2[None, :, :]).reshape(d1 * d2, -1)
            vals = np.sum(v * (state.matrix @ v), axis=0).real
        out[i] = np.trapezoid(vals, y) if hasattr(np, "trapezoid") else np.trapz(vals, y)
    return out


def quadrature_difference_density(state, x, use_closed_form: bool = True):
    scalar = np.ndim(x) == 0
    if isinstance(state, TmsvState):
        out = state.quadrature_difference_density(x) if use_closed_form else \
            _difference_density_generic(state, x)
    else:
        out = _difference_density_generic(state, x)
    out = np.atleast_1d(out)
    return float(out[0]) if scalar else out


def quadrature_difference_test(state, x: float) -> BoundReport:
    """Density of X1 - X2 at x against the classical bound 1/sqrt(pi)."""
    p = quadrature_difference_density(state, x)
    src = "analytic" if isinstance(state, TmsvState) else "numeric"
    bound = _scaled("two_mode_quadrature", QUADRATURE_DIFFERENCE_BOUND)
    return BoundReport(p, bound, "state_test", f"x1-x2={x:g}", {"probability": src, "bound": "analytic"},
                       density=True)


# ---------------------------------------------------------------------------
# photon numbers


def joint_number_test(state, n1: int, n2: int) -> BoundReport:
    """p_{n1,n2} against the product of single-mode bounds."""
    probs = state.joint_number_probs()
    if n1 >= probs.shape[0] or n2 >= probs.shape[1] or min(n1, n2) < 0:
        raise DomainError(f"({n1}, {n2}) outside the truncated spaces {probs.shape}", "two_mode")
    bound = classical_number_bound(n1) * classical_number_bound(n2)
    notes = ("bound largest when n1 = 0 or n2 = 0 and smallest at n1 = n2 for fixed n1 + n2",)
    return BoundReport(float(probs[n1, n2]), bound, "state_test", f"n1={n1},n2={n2}",
                       {"probability": "numeric", "bound": "analytic"}, notes=notes)


def total_number_probs(state) -> np.ndarray:
    probs = state.joint_number_probs()
    d1, d2 = probs.shape
    out = np.zeros(d1 + d2 - 1)
    for m in range(d1):
        out[m:m + d2] += probs[m]
    return out


def total_number_test(state, n: int) -> BoundReport:
    """Total count n = n1 + n2 against the single-mode bound."""
    probs = total_number_probs(state)
    if not 0 <= n < probs.size:
        raise DomainError(f"n = {n} outside 0..{probs.size - 1}", "two_mode")
    return BoundReport(float(probs[n]), classical_number_bound(n), "state_test", f"n1+n2={n}",
                       {"probability": "numeric", "bound": "analytic"})


def joint_bound_table(n_max: int = 10) -> np.ndarray:
    """p_b(n1) p_b(n2) for n1, n2 = 0..n_max."""
    pb = np.array([classical_number_bound(n) for n in range(n_max + 1)])
    return np.outer(pb, pb)


def zeta_violation_window(n1: int, n2: int, n_grid: int = 400, tol: float = 1e-6) -> tuple[float, float] | None:
    """Outer endpoints of the zeta set where the squeezed vacuum violates the (n1, n2) bound."""
    pred = lambda z: joint_number_test(tmsv(z, dim=max(fock.geometric_dim(z * z), n1 + 1, n2 + 1)), n1, n2).violated
    grid = np.linspace(0.0, 0.99, n_grid)
    flags = [pred(float(z)) for z in grid]
    hits = [i for i, f in enumerate(flags) if f]
    if not hits:
        return None

    def edge(a, b):
        fa = pred(a)
        while b - a > tol:
            mid = 0.5 * (a + b)
            if pred(mid) == fa:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    i0, i1 = hits[0], hits[-1]
    lo = float(grid[0]) if i0 == 0 else edge(float(grid[i0 - 1]), float(grid[i0]))
    hi = float(grid[-1]) if i1 == n_grid - 1 else edge(float(grid[i1]), float(grid[i1 + 1]))
    return lo, hi

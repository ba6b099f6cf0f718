"""Truncated Fock-space linear algebra.

States and POVM elements of a single bosonic mode are dense Hermitian matrices
on the number basis |0>, ..., |D-1>. Quadratures follow the convention
X = (a + a^dagger)/2, so the vacuum has variance 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import SpaceMismatch, TruncationError

TOL_TRUNC = 1e-10
HERMITIAN_TOL = 1e-12
IMAG_TOL = 1e-10

Kind = Literal["state", "povm_element", "generic"]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhasePoint:
    """Complex amplitude alpha = re + i im."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("phase point components must be finite")

    @classmethod
    def of(cls, alpha) -> "PhasePoint":
        if isinstance(alpha, PhasePoint):
            return alpha
        z = complex(alpha)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class FockSpace:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock dimension must be an integer >= 2, got {self.dim}")


@dataclass(frozen=True)
class FockVector:
    space: FockSpace
    amplitudes: np.ndarray
    truncation_loss: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes))
        if self.amplitudes.shape != (self.space.dim,):
            raise SpaceMismatch("amplitude vector does not match space dimension")

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def projector(self, kind: Kind = "state") -> "FockOperator":
        v = self.amplitudes
        return FockOperator(self.space, np.outer(v, v.conj()), kind=kind,
                            truncation_loss=self.truncation_loss)


@dataclass(frozen=True)
class FockOperator:
    space: FockSpace
    matrix: np.ndarray
    kind: Kind = "generic"
    truncation_loss: float = 0.0
    _checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceMismatch(f"matrix shape {m.shape} does not match dim {d}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            raise ValueError("operator is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", _frozen(m))
        if self._checked and self.kind != "generic":
            _check_kind(m, self.kind, self.truncation_loss)

    @property
    def dim(self) -> int:
        return self.space.dim

    def trace(self) -> float:
        return trace(self)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        off = self.matrix - np.diag(self.matrix.diagonal())
        return bool(np.max(np.abs(off), initial=0.0) <= tol)

    def padded(self, dim: int) -> "FockOperator":
        """Embed into a larger space; the added block is zero."""
        if dim == self.dim:
            return self
        if dim < self.dim:
            raise SpaceMismatch("cannot pad to a smaller space")
        m = np.zeros((dim, dim), dtype=complex)
        m[: self.dim, : self.dim] = self.matrix
        return FockOperator(FockSpace(dim), m, self.kind, self.truncation_loss, _checked=False)

    def with_kind(self, kind: Kind) -> "FockOperator":
        return FockOperator(self.space, self.matrix, kind, self.truncation_loss)


def _check_kind(m: np.ndarray, kind: str, loss: float) -> None:
    ev = np.linalg.eigvalsh(m)
    if kind == "state":
        if ev[0] < -HERMITIAN_TOL * max(1.0, ev[-1]):
            raise ValueError(f"state is not positive semidefinite (min eigenvalue {ev[0]:.3e})")
        tr = float(np.trace(m).real)
        if not (1.0 - max(TOL_TRUNC, loss) - 1e-12 <= tr <= 1.0 + 1e-12):
            raise TruncationError(f"state trace {tr!r} outside [1 - tol_trunc, 1]")
    elif kind == "povm_element":
        if ev[0] < -HERMITIAN_TOL or ev[-1] > 1.0 + HERMITIAN_TOL:
            from .errors import PovmBoundError

            raise PovmBoundError(f"POVM element eigenvalues [{ev[0]:.6g}, {ev[-1]:.6g}] outside [0, 1]")


def align(*ops: FockOperator) -> list[FockOperator]:
    """Pad operators to a common dimension (exact: padding adds only zeros)."""
    d = max(op.dim for op in ops)
    return [op.padded(d) for op in ops]


# ---------------------------------------------------------------------------
# truncation rules


def poisson_dim(mean: float, tol: float = TOL_TRUNC) -> int:
    """Smallest D such that a Poisson(mean) distribution loses at most tol beyond D-1."""
    if mean <= 0:
        return 2
    d = max(2, int(mean))
    while poisson.sf(d - 1, mean) > tol:
        d = max(d + 1, int(d * 1.1))
    lo = max(2, int(mean) - 1)
    while lo < d and poisson.sf(lo - 1, mean) > tol:
        lo += 1
    return max(2, lo)


def geometric_dim(ratio: float, tol: float = TOL_TRUNC) -> int:
    """Smallest D with ratio**D <= tol (loss of a geometric distribution)."""
    if ratio <= 0:
        return 2
    return max(2, int(math.ceil(math.log(tol) / math.log(ratio))))


def heuristic_dim(mean_n: float) -> int:
    return int(math.ceil(mean_n + 8 * math.sqrt(mean_n + 1) + 10))


def dim_from_populations(pops_fn, tol: float = TOL_TRUNC, start: int = 8, limit: int = 4096) -> int:
    """Smallest D whose cumulative population pops_fn(D).sum() >= 1 - tol."""
    d = start
    while d <= limit:
        p = pops_fn(d)
        if p.sum() >= 1.0 - tol:
            c = np.cumsum(p)
            return max(2, int(np.searchsorted(c, 1.0 - tol) + 1))
        d *= 2
    raise TruncationError(f"populations do not converge within D = {limit}")


# ---------------------------------------------------------------------------
# vectors and operators


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n < dim."""
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    if r2 < 600.0:
        ratios = np.empty(dim, dtype=complex)
        ratios[0] = math.exp(-0.5 * r2)
        ratios[1:] = alpha / np.sqrt(np.arange(1, dim))
        return np.cumprod(ratios)
    n = np.arange(dim)
    logmag = -0.5 * r2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def coherent_vector(alpha, space: FockSpace | None = None, tol: float = TOL_TRUNC) -> FockVector:
    z = PhasePoint.of(alpha).z
    if space is None:
        space = FockSpace(poisson_dim(abs(z) ** 2, tol))
    c = coherent_amplitudes(z, space.dim)
    loss = float(poisson.sf(space.dim - 1, abs(z) ** 2)) if z != 0 else 0.0
    if loss > tol:
        raise TruncationError(
            f"coherent state |alpha|={abs(z):.4g} loses {loss:.3e} in D={space.dim}"
        )
    return FockVector(space, c, loss)


def number_vector(n: int, space: FockSpace) -> FockVector:
    if not 0 <= n < space.dim:
        raise SpaceMismatch(f"|{n}> is outside D={space.dim}")
    v = np.zeros(space.dim, dtype=complex)
    v[n] = 1.0
    return FockVector(space, v)


@lru_cache(maxsize=64)
def _annihilation(dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation_operator(space: FockSpace) -> np.ndarray:
    """Lowering matrix a with a|n> = sqrt(n)|n-1> (not Hermitian, so a bare array)."""
    return _annihilation(space.dim)


def number_operator(space: FockSpace) -> FockOperator:
    return FockOperator(space, np.diag(np.arange(space.dim, dtype=float)))


def quadrature_operator(theta: float, space: FockSpace) -> FockOperator:
    a = annihilation_operator(space)
    x = 0.5 * (a.conj().T * np.exp(-1j * theta) + a * np.exp(1j * theta))
    return FockOperator(space, x)


def rotate(op: FockOperator, theta: float) -> FockOperator:
    """exp(i theta n) A exp(-i theta n); X_theta statistics of A equal X statistics of the result."""
    n = np.arange(op.dim)
    ph = np.exp(1j * theta * n)
    m = op.matrix * ph[:, None] * ph.conj()[None, :]
    return FockOperator(op.space, m, op.kind, op.truncation_loss, _checked=False)


# ---------------------------------------------------------------------------
# traces


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise ValueError(f"{what} has imaginary residue {z.imag:.3e}")
    return float(z.real)


def trace(op: FockOperator) -> float:
    return _real(complex(np.trace(op.matrix)), "trace")


def expectation(op: FockOperator, state: FockOperator) -> float:
    """tr(op . state)."""
    if op.dim != state.dim:
        raise SpaceMismatch(f"dimensions differ: {op.dim} vs {state.dim}")
    # tr(AB) = sum_ij A_ij B_ji
    return _real(complex(np.sum(op.matrix * state.matrix.T)), "expectation")


def expectation_aligned(op: FockOperator, state: FockOperator) -> float:
    return expectation(*align(op, state))


def overlap_probability(v1: FockVector, v2: FockVector) -> float:
    if v1.space != v2.space:
        raise SpaceMismatch("vectors live in different spaces")
    return float(abs(np.vdot(v1.amplitudes, v2.amplitudes)) ** 2)


# ---------------------------------------------------------------------------
# quadrature wavefunctions

_PSI0 = (2.0 / math.pi) ** 0.25


def fock_wavefunctions(n_max: int, x) -> np.ndarray:
    """Table psi_n(x) = <x|n> for n = 0..n_max, shape (n_max + 1, *x.shape).

    Three-term recurrence psi_{n+1} = (2 x psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = _PSI0 * np.exp(-x * x)
    if n_max >= 1:
        out[1] = 2.0 * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = (2.0 * x * out[n] - math.sqrt(n) * out[n - 1]) / math.sqrt(n + 1)
    return out


def coherent_wavefunction(alpha: complex, x) -> np.ndarray:
    """<x|alpha> = (2/pi)^(1/4) exp(-x^2 + 2 alpha x - alpha^2/2 - |alpha|^2/2)."""
    alpha = complex(alpha)
    x = np.asarray(x, dtype=float)
    return _PSI0 * np.exp(-x * x + 2 * alpha * x - 0.5 * alpha**2 - 0.5 * abs(alpha) ** 2)


def fock_wavefunction(n: int, x: float) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return float(fock_wavefunctions(n, np.asarray(float(x)))[n])


def coherent_table(alphas, dim: int, drop_imag_gaussian: bool = False) -> np.ndarray:
    """Rows of coherent amplitudes for many alphas, shape (len(alphas), dim).

    With drop_imag_gaussian the common factor exp(-Im(alpha)^2 / 2) is left
    out, which is what a Gauss-Hermite rule in Im(alpha) expects.
    """
    alphas = np.asarray(alphas, dtype=complex).ravel()
    r2 = alphas.real**2 if drop_imag_gaussian else np.abs(alphas) ** 2
    ratios = np.empty((alphas.size, dim), dtype=complex)
    ratios[:, 0] = np.exp(-0.5 * r2)
    ratios[:, 1:] = alphas[:, None] / np.sqrt(np.arange(1, dim))[None, :]
    return np.cumprod(ratios, axis=1)


def displacement_matrix(beta: complex, dim: int, pad: int = 60) -> np.ndarray:
    """D(beta) restricted to the first dim levels, computed in a padded space."""
    from scipy.linalg import expm

    big = dim + pad
    a = _annihilation(big)
    gen = beta * a.conj().T - np.conj(beta) * a
    return expm(gen)[:dim, :dim]

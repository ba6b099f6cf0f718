"""Spin-j version of the bounds built on SU(2) coherent states.

Basis ordering is |j, m> with m = -j, ..., j (index i holds m = -j + i). The
Q function is Q(Omega) = (2j+1)/(4 pi) <j, Omega|A|j, Omega> and the classical
bounds carry the factor 4 pi/(2j+1) in place of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import gammaln

from .bounds import BoundReport, _scaled
from .errors import ConvergenceError, DomainError, SpaceMismatch, UnsupportedJ

GRID_THETA = 128
GRID_PHI = 128


def _check_j(j: float) -> int:
    two_j = round(2 * j)
    if two_j < 0 or abs(2 * j - two_j) > 1e-12:
        raise DomainError(f"j must be a nonnegative half-integer, got {j}", "su2")
    return two_j


@dataclass(frozen=True)
class SphereDirection:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}", "su2")
        # fold phi into (-pi, pi]
        phi = math.remainder(self.phi, 2 * math.pi)
        if phi == -math.pi:
            phi = math.pi
        object.__setattr__(self, "phi", phi)

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(frozen=True)
class SpinOperator:
    j: float
    matrix: np.ndarray
    kind: str = "generic"  # "state" | "povm" | "generic"
    label: str = "operator"
    q_max_closed: float | None = None

    def __post_init__(self):
        d = _check_j(self.j) + 1
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (d, d):
            raise SpaceMismatch(f"matrix shape {m.shape} does not match 2j+1 = {d}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("spin operator is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", m)
        if self.kind in ("state", "povm"):
            ev = np.linalg.eigvalsh(m)
            if ev[0] < -1e-10:
                raise ValueError(f"{self.kind} has negative eigenvalue {ev[0]:.3e}")
            if self.kind == "state" and abs(ev.sum() - 1.0) > 1e-10:
                raise ValueError("spin state must have unit trace")
            if self.kind == "povm" and ev[-1] > 1 + 1e-10:
                raise ValueError("POVM element exceeds the identity")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class SphereMaxResult:
    value: float
    argmax: SphereDirection
    method: str
    est_error: float = 0.0


# ---------------------------------------------------------------------------
# spin algebra


@lru_cache(maxsize=32)
def _spin_matrices(two_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    j = two_j / 2
    m = np.arange(two_j + 1) - j
    jp = np.zeros((two_j + 1, two_j + 1), dtype=complex)
    for i in range(two_j):
        jp[i + 1, i] = math.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    jx = 0.5 * (jp + jp.conj().T)
    jy = -0.5j * (jp - jp.conj().T)
    jz = np.diag(m).astype(complex)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return jx, jy, jz


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(j_x, j_y, j_z) in the |j, m> basis."""
    return _spin_matrices(_check_j(j))


def _coherent_table(two_j: int, theta, phi) -> np.ndarray:
    """Amplitudes <j, m|j, Omega>, shape (..., 2j+1)."""
    theta = np.asarray(theta, dtype=float)[..., None]
    phi = np.asarray(phi, dtype=float)[..., None]
    k = np.arange(two_j + 1)  # k = j + m
    log_binom = gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1)
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    with np.errstate(divide="ignore"):
        mag = np.exp(0.5 * log_binom) * s ** (two_j - k) * c**k
    return mag * np.exp(-1j * k * phi)


def su2_coherent(j: float, omega: SphereDirection) -> np.ndarray:
    """Spin coherent state |j, Omega> as an amplitude vector over m = -j..j."""
    return _coherent_table(_check_j(j), omega.theta, omega.phi)


def spin_state(vector, label: str = "pure") -> SpinOperator:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return SpinOperator((v.size - 1) / 2, np.outer(v, v.conj()), "state", label)


def spin_projector(j: float, m: float) -> SpinOperator:
    """POVM element |j, m><j, m|."""
    two_j = _check_j(j)
    i = round(m + j)
    if not 0 <= i <= two_j or abs(m + j - i) > 1e-12:
        raise DomainError(f"m = {m} is not a level of j = {j}", "su2")
    mat = np.zeros((two_j + 1, two_j + 1), dtype=complex)
    mat[i, i] = 1.0
    closed = None
    if two_j == 2 and i == 1:
        closed = 3 / (8 * math.pi)
    return SpinOperator(j, mat, "povm", f"projector(m={m:g})", closed)


def su2_coherent_projector(j: float, omega: SphereDirection, weight: float = 1.0) -> SpinOperator:
    """weight |j, Omega><j, Omega|, an element with a point-like P function."""
    v = su2_coherent(j, omega)
    q = weight * (2 * j + 1) / (4 * math.pi)
    return SpinOperator(j, weight * np.outer(v, v.conj()), "povm", "coherent_projector", q)


def maximally_mixed(j: float) -> SpinOperator:
    d = _check_j(j) + 1
    return SpinOperator(j, np.eye(d) / d, "state", "maximally_mixed", 1 / (4 * math.pi))


def phase_averaged_equatorial(j: float = 1) -> SpinOperator:
    """Equatorial coherent state averaged over phi: diag(1/4, 1/2, 1/4) for j = 1."""
    if _check_j(j) != 2:
        raise UnsupportedJ(f"phase-averaged equatorial state is provided for j = 1 only, got {j}")
    v = _coherent_table(2, math.pi / 2, 0.0)
    return SpinOperator(1, np.diag(np.abs(v) ** 2), "state", "phase_averaged_equatorial", 9 / (32 * math.pi))


def bloch_state(r) -> SpinOperator:
    """Spin-1/2 state (I + r.sigma)/2 with sigma = 2 j."""
    r = np.asarray(r, dtype=float)
    jx, jy, jz = _spin_matrices(1)
    mat = 0.5 * np.eye(2) + r[0] * jx + r[1] * jy + r[2] * jz
    return SpinOperator(0.5, mat, "state", "bloch", (1 + np.linalg.norm(r)) / (4 * math.pi))


def bloch_povm(lam: float, r_m) -> SpinOperator:
    """Spin-1/2 POVM element lam (I + r_m.sigma)."""
    r_m = np.asarray(r_m, dtype=float)
    jx, jy, jz = _spin_matrices(1)
    mat = lam * (np.eye(2) + 2 * (r_m[0] * jx + r_m[1] * jy + r_m[2] * jz))
    return SpinOperator(0.5, mat, "povm", "bloch_povm", lam * (1 + np.linalg.norm(r_m)) / (2 * math.pi))


# ---------------------------------------------------------------------------
# Q function


def su2_q_values(op: SpinOperator, theta, phi) -> np.ndarray:
    two_j = _check_j(op.j)
    c = _coherent_table(two_j, theta, phi)
    val = np.einsum("...m,mn,...n->...", c.conj(), op.matrix, c).real
    return (two_j + 1) / (4 * math.pi) * val


def su2_q(op: SpinOperator, omega: SphereDirection) -> float:
    return float(su2_q_values(op, omega.theta, omega.phi))


def sphere_integral(op: SpinOperator, n_nodes: int | None = None) -> float:
    """Integral of Q over the sphere (d Omega = sin theta dtheta dphi).

    Gauss-Legendre in cos(theta) and a uniform rule in phi are exact for the
    trigonometric polynomials of degree 2j that make up Q.
    """
    n = n_nodes or (_check_j(op.j) + 2)
    u, w = np.polynomial.legendre.leggauss(n)
    phis = np.arange(2 * n + 2) * (2 * math.pi / (2 * n + 2))
    th = np.arccos(u)
    vals = su2_q_values(op, th[:, None], phis[None, :])
    return float(w @ vals.sum(axis=1) * (2 * math.pi / phis.size))


def _refine(f, lo, hi):
    res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 500})
    return float(res.x), float(-res.fun)


def su2_q_max(op: SpinOperator, method: str = "auto", max_sweeps: int = 60) -> SphereMaxResult:
    """Maximum of the SU(2) Q function over the sphere.

    Uniform (theta, phi) grid with the poles included, coordinate-wise bounded
    refinement, then a simplex polish.
    """
    if method in ("auto", "closed_form") and op.q_max_closed is not None:
        return SphereMaxResult(float(op.q_max_closed), SphereDirection(0.0), "closed_form")
    if method == "closed_form":
        raise ValueError("no closed-form maximum for this operator")
    thetas = np.linspace(0.0, math.pi, GRID_THETA)
    phis = -math.pi + (np.arange(GRID_PHI) + 1) * (2 * math.pi / GRID_PHI)
    vals = su2_q_values(op, thetas[:, None], phis[None, :])
    it, ip = divmod(int(np.argmax(vals)), GRID_PHI)
    th, ph = float(thetas[it]), float(phis[ip])
    best = float(vals[it, ip])
    dth, dph = thetas[1] - thetas[0], phis[1] - phis[0]
    f = lambda t, p: float(su2_q_values(op, t, p))

    change = math.inf
    for _ in range(max_sweeps):
        prev = best
        th, v = _refine(lambda t: f(t, ph), max(0.0, th - dth), min(math.pi, th + dth))
        best = max(best, v)
        if 0.0 < th < math.pi:
            ph, v = _refine(lambda p: f(th, p), ph - dph, ph + dph)
            best = max(best, v)
        change = best - prev
        if change <= 1e-15 * max(1.0, abs(best)):
            break
    res = minimize(lambda x: -f(min(max(x[0], 0.0), math.pi), x[1]), [th, ph], method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-16, "maxiter": 4000})
    if -res.fun > best:
        change = max(change, -res.fun - best)
        best = float(-res.fun)
        th, ph = min(max(float(res.x[0]), 0.0), math.pi), float(res.x[1])
    if change > 1e-9 * max(abs(best), 1e-300):
        raise ConvergenceError(f"sphere refinement stalled with last change {change:.3e}", "su2")
    err = abs(change) + 4 * np.finfo(float).eps * abs(best)
    return SphereMaxResult(best, SphereDirection(th, ph), "grid_refine", float(err))


# ---------------------------------------------------------------------------
# bounds


def _match(a: SpinOperator, b: SpinOperator) -> None:
    if a.dim != b.dim:
        raise SpaceMismatch(f"spin mismatch: j = {a.j} vs j = {b.j}", "su2")


def _prob(povm: SpinOperator, state: SpinOperator) -> float:
    _match(povm, state)
    return float(np.einsum("ij,ji->", povm.matrix, state.matrix).real)


def _src(method: str) -> str:
    return "analytic" if method == "closed_form" else "numeric"


def su2_state_test(state: SpinOperator, povm: SpinOperator) -> BoundReport:
    """p_m against (4 pi/(2j+1)) Q_m,max of the POVM element."""
    p = _prob(povm, state)
    qm = su2_q_max(povm)
    bound = _scaled("su2_state", 4 * math.pi / (2 * povm.j + 1) * qm.value)
    return BoundReport(p, bound, "state_test", povm.label, {"probability": "numeric", "bound": _src(qm.method)})


def su2_measurement_test(povm: SpinOperator, probe: SpinOperator) -> BoundReport:
    """p_m against (4 pi/(2j+1)) Q_max tr(Delta_m) of the probe."""
    p = _prob(povm, probe)
    qm = su2_q_max(probe)
    bound = _scaled("su2_measurement", 4 * math.pi / (2 * probe.j + 1) * qm.value * povm.trace())
    return BoundReport(p, bound, "measurement_test", povm.label,
                       {"probability": "numeric", "bound": _src(qm.method)})


@dataclass(frozen=True)
class SpinHalfCheck:
    trials: int
    seed: int
    state_violations: int
    measurement_violations: int
    max_state_ratio: float
    max_measurement_ratio: float
    numeric_crosscheck_max_dev: float

    @property
    def passed(self) -> bool:
        return self.state_violations == 0 and self.measurement_violations == 0


def _ball(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.random(n)[:, None] ** (1 / 3)


def spin_half_no_violation_check(trials: int, seed: int = 0, crosscheck: int = 64) -> SpinHalfCheck:
    """Random spin-1/2 states and POVM elements tested against both bounds.

    Probabilities come from matrix traces. Q maxima use the Bloch-vector
    closed forms, and the first `crosscheck` samples are re-maximized on the
    sphere numerically to confirm them.
    """
    if trials < 1:
        raise DomainError("trials must be positive", "su2")
    rng = np.random.Generator(np.random.PCG64(seed))
    r = _ball(rng, trials)
    r_m = _ball(rng, trials)
    nr, nm = np.linalg.norm(r, axis=1), np.linalg.norm(r_m, axis=1)
    lam = rng.random(trials) / (1 + nm)
    jx, jy, jz = _spin_matrices(1)
    jvec = np.stack([jx, jy, jz])
    rho = 0.5 * np.eye(2) + np.einsum("tk,kab->tab", r, jvec)
    delta = lam[:, None, None] * (np.eye(2) + 2 * np.einsum("tk,kab->tab", r_m, jvec))
    p = np.einsum("tab,tba->t", rho, delta).real
    q_max = (1 + nr) / (4 * math.pi)
    qm_max = lam * (1 + nm) / (2 * math.pi)
    state_bound = _scaled("su2_state", 2 * math.pi * qm_max)
    meas_bound = _scaled("su2_measurement", 2 * math.pi * q_max * np.trace(delta, axis1=1, axis2=2).real)
    dev = 0.0
    for i in range(min(crosscheck, trials)):
        num = su2_q_max(SpinOperator(0.5, rho[i]), method="grid_refine").value
        dev = max(dev, abs(num - q_max[i]))
    return SpinHalfCheck(
        trials, seed,
        int(np.sum(p > state_bound * (1 + 1e-12))),
        int(np.sum(p > meas_bound * (1 + 1e-12))),
        float(np.max(p / state_bound)),
        float(np.max(p / meas_bound)),
        dev,
    )


# ---------------------------------------------------------------------------
# covariance indicator


@lru_cache(maxsize=32)
def _anticommutators(two_j: int) -> np.ndarray:
    """{j_k, j_l} built from ladder products, each radical taken once so that
    integer entries come out exact."""
    j = two_j / 2
    m = np.arange(two_j + 1) - j
    d = two_j + 1
    jp = np.zeros((d, d))
    jp2 = np.zeros((d, d))
    for i in range(two_j):
        jp[i + 1, i] = math.sqrt((j - m[i]) * (j + m[i] + 1))
    for i in range(two_j - 1):
        jp2[i + 2, i] = math.sqrt((j - m[i]) * (j + m[i] + 1) * (j - m[i] - 1) * (j + m[i] + 2))
    pm = np.diag(2 * (j * (j + 1) - m**2))  # {J+, J-}
    side = jp * (2 * m + 1)[None, :]  # {J+, j_z}
    out = np.empty((3, 3, d, d), dtype=complex)
    out[0, 0] = 0.5 * (jp2 + jp2.T + pm)
    out[1, 1] = 0.5 * (pm - jp2 - jp2.T)
    out[2, 2] = np.diag(2 * m**2)
    out[0, 1] = out[1, 0] = -0.5j * (jp2 - jp2.T)
    out[0, 2] = out[2, 0] = 0.5 * (side + side.T)
    out[1, 2] = out[2, 1] = -0.5j * (side - side.T)
    out.setflags(write=False)
    return out


def covariance_z(state: SpinOperator) -> np.ndarray:
    """Z_kl = <j_k j_l + j_l j_k> - delta_kl - <j_k><j_l>."""
    js = spin_matrices(state.j)
    anti = _anticommutators(_check_j(state.j))
    mean = np.array([np.trace(state.matrix @ a).real for a in js])
    z = np.einsum("klab,ba->kl", anti, state.matrix).real
    return z - np.eye(3) - np.outer(mean, mean)


def classicality_indicator(state: SpinOperator) -> float:
    """Smallest eigenvalue of Z; for j = 1 a negative value flags nonclassicality."""
    if _check_j(state.j) != 2:
        raise UnsupportedJ("the covariance indicator is only meaningful for j = 1")
    return float(np.linalg.eigvalsh(covariance_z(state))[0])

"""Single-photon Floquet propagation with end-of-period auxiliary truncation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import (
    BranchError,
    ConditioningError,
    DomainError,
    IntegrationError,
    SingularPropagatorError,
    WindowError,
)
from .lattice import (
    Boundary,
    LatticeSpec,
    bond_couplings,
    coupling_patterns,
    straight_indices,
)

DEFAULT_STEPS = 2000
NORM_TOL = 1e-8
BRANCH_LIMIT = 0.9 * np.pi


def rk4(apply_h: Callable[[float, np.ndarray], np.ndarray], psi: np.ndarray,
        z0: float, length: float, steps: int) -> np.ndarray:
    """Fixed-step classical Runge-Kutta for ``i dpsi/dz = H(z) psi``.

    ``apply_h(z, x)`` returns ``H(z) @ x``; ``psi`` may hold several columns.
    """
    dz = length / steps
    psi = np.array(psi, dtype=complex)
    z = z0
    for i in range(steps):
        z = z0 + i * dz
        k1 = -1j * apply_h(z, psi)
        k2 = -1j * apply_h(z + dz / 2, psi + (dz / 2) * k1)
        k3 = -1j * apply_h(z + dz / 2, psi + (dz / 2) * k2)
        k4 = -1j * apply_h(z + dz, psi + dz * k3)
        psi = psi + (dz / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def lattice_apply(spec: LatticeSpec) -> Callable[[float, np.ndarray], np.ndarray]:
    p_left, p_right = coupling_patterns(spec)
    beta0 = spec.onsite_beta0

    def apply_h(z, x):
        k_left, k_right = bond_couplings(z, spec)
        return -k_left * (p_left @ x) - k_right * (p_right @ x) + beta0 * x

    return apply_h


def _check_norm(before: np.ndarray, after: np.ndarray, steps: int, tol: float):
    n0 = np.linalg.norm(before, axis=0)
    n1 = np.linalg.norm(after, axis=0)
    mask = n0 > 0
    if not np.any(mask):
        return
    dev = np.max(np.abs(n1[mask] / n0[mask] - 1))
    if dev > tol:
        raise IntegrationError(
            f"norm drift {dev:.3e} exceeds {tol:.0e} with {steps} steps per period; "
            "increase steps_per_period"
        )


def propagate_period(spec: LatticeSpec, state: np.ndarray, z0: float = 0.0,
                     steps: int = DEFAULT_STEPS, tol: float = NORM_TOL) -> np.ndarray:
    """Evolve full-lattice amplitudes (length M, or M x k) over one period."""
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != spec.n_sites:
        raise DomainError(f"state has {state.shape[0]} rows, lattice has {spec.n_sites} sites")
    out = rk4(lattice_apply(spec), state, z0, spec.period_T, steps)
    _check_norm(state.reshape(spec.n_sites, -1), out.reshape(spec.n_sites, -1), steps, tol)
    return out


@lru_cache(maxsize=64)
def _period_propagator(spec: LatticeSpec, z0: float, steps: int) -> np.ndarray:
    p = propagate_period(spec, np.eye(spec.n_sites), z0, steps)
    p.setflags(write=False)
    return p


def period_propagator(spec: LatticeSpec, z0: float = 0.0, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Closed-system M x M propagator over one period (unitary to integration error)."""
    return _period_propagator(spec, float(z0), int(steps))


def truncate_aux(state: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """Keep straight-site amplitudes; light left in the auxiliary guides is lost."""
    state = np.asarray(state)
    if state.shape[0] != spec.n_sites:
        raise DomainError(f"state has {state.shape[0]} rows, lattice has {spec.n_sites} sites")
    return state[straight_indices(spec)]


@dataclass(frozen=True, eq=False)
class TransmissionMatrix:
    entries: np.ndarray
    period_T: float
    spec: LatticeSpec | None = None
    steps: int | None = None

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.entries, compute_uv=False)

    def power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.entries, k)


def transmission_matrix(spec: LatticeSpec, steps: int = DEFAULT_STEPS) -> TransmissionMatrix:
    """Straight-to-straight amplitudes after one period, auxiliary light discarded.

    Column ``n0`` is the truncated output for unit input at straight site ``n0``.
    """
    p = period_propagator(spec, 0.0, steps)
    s = straight_indices(spec)
    u = np.array(p[np.ix_(s, s)])
    u.setflags(write=False)
    return TransmissionMatrix(u, spec.period_T, spec, steps)


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    entries: np.ndarray
    period_T: float
    branch_note: str
    roundtrip_error: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.entries)

    def propagator(self, periods: int = 1) -> np.ndarray:
        return linalg.expm(-1j * self.period_T * periods * self.entries)


def _as_matrix(u) -> tuple[np.ndarray, float]:
    if isinstance(u, TransmissionMatrix):
        return u.entries, u.period_T
    raise DomainError("expected a TransmissionMatrix")


def effective_hamiltonian(u: TransmissionMatrix, method: str = "schur",
                          tol: float = 1e-8) -> EffectiveHamiltonian:
    """``H_eff = (i/T) log U`` on the principal branch.

    ``method="schur"`` uses scipy's inverse scaling-and-squaring logarithm, which
    stays accurate for the strongly non-normal propagators of skin-effect
    lattices.  ``method="eig"`` takes the logarithm eigenvalue by eigenvalue.
    """
    mat, period = _as_matrix(u)
    w = np.linalg.eigvals(mat)
    if np.min(np.abs(w)) < 1e-12:
        raise SingularPropagatorError(
            f"propagator eigenvalue of modulus {np.min(np.abs(w)):.2e}: light is fully absorbed"
        )
    worst = float(np.max(np.abs(np.angle(w))))
    if worst > BRANCH_LIMIT:
        raise BranchError(f"eigenphase {worst:.3f} rad exceeds 0.9 pi; period too long for log")

    cond = None
    if method == "schur":
        log_u = linalg.logm(mat)
    elif method == "eig":
        w, v = np.linalg.eig(mat)
        cond = float(np.linalg.cond(v))
        log_u = v @ np.diag(np.log(w)) @ np.linalg.inv(v)
    else:
        raise DomainError(f"unknown method {method!r}")
    h = 1j * log_u / period

    back = linalg.expm(-1j * period * h)
    err = float(np.linalg.norm(back - mat) / np.linalg.norm(mat))
    if err > tol:
        extra = f"; eigenvector condition number {cond:.2e}" if cond is not None else ""
        raise ConditioningError(f"exp(-iT H_eff) misses U by {err:.2e} (relative){extra}")
    return EffectiveHamiltonian(h, period, f"principal ({method})", err)


def evolve_n_periods(u: TransmissionMatrix, psi0: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        raise DomainError("period count must be non-negative")
    psi = np.array(psi0, dtype=complex)
    for _ in range(k):
        psi = u.entries @ psi
    return psi


def intensity_distribution(u: TransmissionMatrix, n0: int, periods: int = 1,
                           normalized: bool = False) -> np.ndarray:
    """|(U^k)_{n, n0}|^2, optionally renormalised to unit sum (post-selection)."""
    if not 0 <= n0 < u.n:
        raise DomainError(f"injection site {n0} outside 0..{u.n - 1}")
    psi = np.zeros(u.n, complex)
    psi[n0] = 1.0
    p = np.abs(evolve_n_periods(u, psi, periods)) ** 2
    if normalized:
        total = p.sum()
        if total <= 0:
            raise DomainError("no light survives; cannot normalise")
        p = p / total
    return p


def packet_center(p) -> float:
    p = np.asarray(p, dtype=float)
    total = p.sum()
    if not total > 0:
        raise DomainError("distribution has no weight")
    return float(np.arange(p.size) @ p / total)


@dataclass(frozen=True)
class LyapunovResult:
    per_period: float
    per_um: float
    site: int
    window: tuple[int, int]
    n_straight: int
    boundary_ratio: float  # max edge amplitude / peak amplitude at the window end
    padded_per_period: float | None = field(default=None)


def lyapunov_from_transmission(u, m: int, window: tuple[int, int]) -> float:
    """Growth rate of log|psi_m| per period between periods k1 and k2."""
    mat = u.entries if isinstance(u, TransmissionMatrix) else np.asarray(u)
    k1, k2 = window
    if not 0 <= k1 < k2:
        raise DomainError(f"window must satisfy 0 <= k1 < k2, got {window}")
    psi = np.zeros(mat.shape[0], complex)
    psi[m] = 1.0
    logs = {}
    for k in range(1, k2 + 1):
        psi = mat @ psi
        if k in (k1, k2):
            logs[k] = np.log(np.abs(psi[m]))
    logs.setdefault(0, 0.0)
    return float((logs[k2] - logs[k1]) / (k2 - k1))


def lyapunov_exponent(spec: LatticeSpec, m: int | None = None,
                      window: tuple[int, int] = (20, 40), steps: int = DEFAULT_STEPS,
                      check_boundary: bool = True, pad: int = 10,
                      boundary_tol: float = 1e-6) -> LyapunovResult:
    """Finite-window estimate of lim log|psi_m(z)| / z for injection at straight site m.

    With ``check_boundary`` the same window is recomputed on a lattice padded by
    ``pad`` sites on each side; a relative mismatch above ``boundary_tol`` means
    edge reflections reached the injection site and raises ``WindowError``.
    """
    if spec.boundary is not Boundary.OPEN:
        raise DomainError("Lyapunov windows are defined on open lattices")
    n = spec.n_straight
    m = n // 2 if m is None else m
    u = transmission_matrix(spec, steps)
    lam = lyapunov_from_transmission(u, m, window)

    psi = np.zeros(n, complex)
    psi[m] = 1.0
    psi = np.abs(evolve_n_periods(u, psi, window[1]))
    ratio = float(max(psi[0], psi[-1]) / psi.max())

    padded = None
    if check_boundary:
        big = spec.with_(n_straight=n + 2 * pad)
        padded = lyapunov_from_transmission(transmission_matrix(big, steps), m + pad, window)
        if abs(padded - lam) > boundary_tol * max(abs(padded), 1e-12):
            raise WindowError(
                f"lambda changes from {lam:.6g} to {padded:.6g} per period when the lattice "
                f"is padded by {pad} sites; use a larger n_straight or a shorter window"
            )
    return LyapunovResult(lam, lam / spec.period_T, m, tuple(window), n, ratio, padded)


def mirror_spec(spec: LatticeSpec) -> LatticeSpec:
    """Lattice whose dynamics are the site-reversed dynamics of ``spec``."""
    return spec.with_(phase_phi=spec.phase_phi + np.pi)

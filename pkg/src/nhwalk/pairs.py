"""Two-photon density-matrix dynamics in the extended (M^2 + M + 1) basis.

Layout: index ``n*M + m`` is the ordered pair (n, m) of a symmetric two-photon
wavefunction, ``M*M + l`` the single photon at site ``l`` and ``M*M + M`` the
vacuum.  In this first-quantised convention |2_n> = |n,n> and
|1_n 1_m> = (|n,m> + |m,n>)/sqrt(2), so the Hamiltonian lifts as H x I + I x H.

One period = coherent propagation through the full lattice, then loss of every
photon left in an auxiliary waveguide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from . import fock
from .errors import ConstructionError, DomainError, StabilityError
from .floquet import DEFAULT_STEPS, NORM_TOL, TransmissionMatrix, period_propagator, rk4
from .lattice import LatticeSpec, aux_indices, bond_couplings, coupling_patterns, straight_indices

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8
GAMMA_TAU = 30.0


@dataclass(frozen=True)
class ExtendedBasis:
    m: int

    @property
    def dim(self) -> int:
        return self.m * self.m + self.m + 1

    @property
    def vacuum(self) -> int:
        return self.m * self.m + self.m

    def pair(self, n: int, m: int) -> int:
        return n * self.m + m

    def single(self, l: int) -> int:
        return self.m * self.m + l

    def label(self, index: int) -> tuple:
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} outside 0..{self.dim - 1}")
        if index < self.m * self.m:
            return ("pair", index // self.m, index % self.m)
        if index < self.vacuum:
            return ("single", index - self.m * self.m)
        return ("vacuum",)

    def index(self, label: tuple) -> int:
        kind = label[0]
        if kind == "pair":
            return self.pair(label[1], label[2])
        if kind == "single":
            return self.single(label[1])
        if kind == "vacuum":
            return self.vacuum
        raise DomainError(f"unknown label {label!r}")

    @property
    def pair_slice(self) -> slice:
        return slice(0, self.m * self.m)

    @property
    def single_slice(self) -> slice:
        return slice(self.m * self.m, self.vacuum)

    def photon_number(self) -> np.ndarray:
        n = np.zeros(self.dim, dtype=int)
        n[self.pair_slice] = 2
        n[self.single_slice] = 1
        return n


def lift_hamiltonian(h: np.ndarray, as_sparse: bool = False):
    """block-diag(H x I + I x H, H, 0)."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("Hamiltonian must be square")
    m = h.shape[0]
    hs = sparse.csr_matrix(h)
    eye = sparse.identity(m, format="csr")
    two = sparse.kron(hs, eye) + sparse.kron(eye, hs)
    out = sparse.block_diag([two, hs, sparse.csr_matrix((1, 1))], format="csr")
    return out if as_sparse else out.toarray()


@dataclass(frozen=True, eq=False)
class OperatorLift:
    site: int
    kind: str
    matrix: np.ndarray


def _annihilation_formula(j: int, m: int) -> sparse.csr_matrix:
    # a_j acting on psi(n, m) gives phi(l) = (psi(j, l) + psi(l, j)) / sqrt(2)
    basis = ExtendedBasis(m)
    rows, cols, vals = [], [], []
    for l in range(m):
        rows += [basis.single(l), basis.single(l)]
        cols += [basis.pair(j, l), basis.pair(l, j)]
        vals += [1 / np.sqrt(2)] * 2
    rows.append(basis.vacuum)
    cols.append(basis.single(j))
    vals.append(1.0)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


def naive_annihilation(j: int, m: int) -> np.ndarray:
    """Variant with the 1/(1 + delta_nm) weighting of the pair block.

    Kept for comparison only: it gives <1_j|a_j|2_j> = 1 instead of sqrt(2).
    """
    basis = ExtendedBasis(m)
    a = np.zeros((basis.dim, basis.dim))
    for n in range(m):
        for mm in range(m):
            for l in range(m):
                t = ((j == n) * (l == mm) + (j == mm) * (l == n)) / (1 + (n == mm))
                if t:
                    a[basis.single(l), basis.pair(n, mm)] = t
    a[basis.vacuum, basis.single(j)] = 1.0
    return a


@lru_cache(maxsize=16)
def _oracle_lifts(m: int) -> tuple[np.ndarray, ...]:
    w = fock.to_extended(m)
    return tuple(w @ fock.annihilation(j, m) @ w.T for j in range(m))


@lru_cache(maxsize=512)
def _checked_annihilation(j: int, m: int) -> sparse.csr_matrix:
    a = _annihilation_formula(j, m)
    oracle = _oracle_lifts(m)[j]
    err = np.max(np.abs(a.toarray() - oracle))
    if err > 1e-12:
        raise ConstructionError(f"lift of a_{j} on {m} sites differs from Fock oracle by {err:.2e}")
    return a


def lift_annihilation(j: int, basis: ExtendedBasis | int) -> OperatorLift:
    """Bosonic a_j on the <=2-photon sector, checked against the Fock oracle."""
    m = basis.m if isinstance(basis, ExtendedBasis) else int(basis)
    if not 0 <= j < m:
        raise DomainError(f"site {j} outside 0..{m - 1}")
    return OperatorLift(j, "annihilation", _checked_annihilation(j, m).toarray())


def lift_creation(j: int, basis: ExtendedBasis | int) -> OperatorLift:
    a = lift_annihilation(j, basis)
    return OperatorLift(j, "creation", a.matrix.T.copy())


def symmetric_projector(m: int) -> np.ndarray:
    """Projector onto bosonic (exchange-symmetric) states of the extended space."""
    w = fock.to_extended(m)
    return w @ w.T


@dataclass(frozen=True, eq=False)
class ExtendedDensityMatrix:
    entries: np.ndarray
    basis: ExtendedBasis

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def block_traces(self) -> tuple[float, float, float]:
        """(two-photon, one-photon, vacuum) weights."""
        d = np.diag(self.entries).real
        b = self.basis
        return float(d[b.pair_slice].sum()), float(d[b.single_slice].sum()), float(d[b.vacuum])

    def hermiticity_residual(self) -> float:
        r = self.entries
        norm = np.linalg.norm(r)
        return float(np.linalg.norm(r - r.conj().T) / norm) if norm > 0 else 0.0

    def min_eigenvalue(self) -> float:
        r = self.entries
        return float(np.linalg.eigvalsh((r + r.conj().T) / 2).min())

    def bosonic_asymmetry(self) -> float:
        """Largest |psi(n,m) - psi(m,n)| type violation in the pair block."""
        m = self.basis.m
        blk = self.entries[: m * m]
        swapped = blk.reshape(m, m, -1).transpose(1, 0, 2).reshape(m * m, -1)
        return float(np.max(np.abs(blk - swapped)))

    def two_photon_block(self) -> np.ndarray:
        s = self.basis.pair_slice
        return self.entries[s, s]

    def one_photon_block(self) -> np.ndarray:
        s = self.basis.single_slice
        return self.entries[s, s]


def pure_state(psi: np.ndarray, basis: ExtendedBasis) -> ExtendedDensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    return ExtendedDensityMatrix(np.outer(psi, psi.conj()), basis)


def pair_state(n: int, m: int, basis: ExtendedBasis) -> ExtendedDensityMatrix:
    """a_n^dag a_m^dag |0><0| a_n a_m with unit norm (flat site indices)."""
    psi = np.zeros(basis.dim, complex)
    if n == m:
        psi[basis.pair(n, n)] = 1.0
    else:
        psi[basis.pair(n, m)] = psi[basis.pair(m, n)] = 1 / np.sqrt(2)
    return pure_state(psi, basis)


def vacuum_state(basis: ExtendedBasis) -> ExtendedDensityMatrix:
    psi = np.zeros(basis.dim, complex)
    psi[basis.vacuum] = 1.0
    return pure_state(psi, basis)


def lifted_apply(spec: LatticeSpec):
    p_left, p_right = coupling_patterns(spec)
    l_left = lift_hamiltonian(p_left, as_sparse=True)
    l_right = lift_hamiltonian(p_right, as_sparse=True)
    number = ExtendedBasis(spec.n_sites).photon_number().astype(float)[:, None]
    beta0 = spec.onsite_beta0

    def apply_h(z, x):
        k_left, k_right = bond_couplings(z, spec)
        out = -k_left * (l_left @ x) - k_right * (l_right @ x)
        if beta0:
            out = out + beta0 * number * x
        return out

    return apply_h


@lru_cache(maxsize=16)
def _lifted_propagator(spec: LatticeSpec, steps: int, method: str) -> np.ndarray:
    basis = ExtendedBasis(spec.n_sites)
    if method == "sparse":
        v = rk4(lifted_apply(spec), np.eye(basis.dim), 0.0, spec.period_T, steps)
    else:
        p = period_propagator(spec, 0.0, steps)
        v = np.zeros((basis.dim, basis.dim), complex)
        v[basis.pair_slice, basis.pair_slice] = np.kron(p, p)
        v[basis.single_slice, basis.single_slice] = p
        v[basis.vacuum, basis.vacuum] = 1.0
    v.setflags(write=False)
    return v


def lifted_propagator(spec: LatticeSpec, steps: int = DEFAULT_STEPS,
                      method: str = "kron") -> np.ndarray:
    """Solution of i dV/dz = H_lift(z) V over one period.

    The commutator equation is linear, so rho -> V rho V^dag is its exact solution
    for any initial rho; one V serves every period.  Because the lift is
    block-diag(H x I + I x H, H, 0), its propagator is block-diag(P x P, P, 1)
    with P the single-photon propagator (``"kron"``).  ``"sparse"`` integrates
    the D x D lifted equation directly instead.
    """
    if method not in ("kron", "sparse"):
        raise DomainError(f"unknown method {method!r}")
    return _lifted_propagator(spec, int(steps), method)


def no_aux_projector(spec: LatticeSpec) -> np.ndarray:
    """Diagonal mask of extended states with no photon in an auxiliary waveguide."""
    basis = ExtendedBasis(spec.n_sites)
    straight = np.zeros(spec.n_sites, dtype=bool)
    straight[straight_indices(spec)] = True
    keep = np.zeros(basis.dim, dtype=bool)
    keep[basis.pair_slice] = np.logical_and.outer(straight, straight).ravel()
    keep[basis.single_slice] = straight
    keep[basis.vacuum] = True
    return keep


def aux_number(spec: LatticeSpec) -> np.ndarray:
    """Photons in auxiliary waveguides for every extended basis state.

    This is the diagonal of sum_j a_j^dag a_j on exchange-symmetric states;
    the ordered-pair lift itself is not diagonal in that basis.
    """
    basis = ExtendedBasis(spec.n_sites)
    is_aux = np.zeros(spec.n_sites)
    is_aux[aux_indices(spec)] = 1.0
    n = np.zeros(basis.dim)
    n[basis.pair_slice] = np.add.outer(is_aux, is_aux).ravel()
    n[basis.single_slice] = is_aux
    return n


@lru_cache(maxsize=16)
def loss_kraus(spec: LatticeSpec) -> tuple[sparse.csr_matrix, ...]:
    """Kraus operators of complete photon loss from every auxiliary waveguide."""
    m = spec.n_sites
    keep = sparse.diags(no_aux_projector(spec).astype(float), format="csr")
    aux = [int(j) for j in aux_indices(spec)]
    a = {j: _checked_annihilation(j, m) for j in aux}
    ops = [keep]
    ops += [keep @ a[j] for j in aux]
    for i, j in enumerate(aux):
        ops.append(keep @ a[j] @ a[j] / np.sqrt(2))
        ops += [keep @ a[j] @ a[k] for k in aux[i + 1:]]
    return tuple(ops)


def dissipate_closed(rho: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """Infinite-time limit of the auxiliary loss channel."""
    out = np.zeros_like(rho)
    for k in loss_kraus(spec):
        # (k (k rho)^dag)^dag = k rho k^dag with only sparse-left products
        out += (k @ (k @ rho).conj().T).conj().T
    return out


def dissipate_ode(rho: np.ndarray, spec: LatticeSpec, gamma_tau: float = GAMMA_TAU,
                  rtol: float = 1e-12, atol: float = 1e-15) -> np.ndarray:
    """Integrate d rho/dt = -i(Ht rho - rho Ht^dag) + 2 gamma sum_j a_j rho a_j^dag.

    Ht = -i gamma sum_j a_j^dag a_j over auxiliary sites; time in units of 1/gamma.
    """
    m = spec.n_sites
    d = ExtendedBasis(m).dim
    ops = [_checked_annihilation(int(j), m) for j in aux_indices(spec)]
    n_aux = aux_number(spec)
    decay = (n_aux[:, None] + n_aux[None, :])

    def rhs(_, y):
        r = y.view(complex).reshape(d, d)
        out = -decay * r
        for a in ops:
            out += 2 * (a @ (a @ r).conj().T).conj().T
        return out.ravel().view(float)

    y0 = np.ascontiguousarray(rho, dtype=complex).ravel().view(float)
    sol = solve_ivp(rhs, (0.0, gamma_tau), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise StabilityError(f"dissipation ODE failed: {sol.message}")
    return sol.y[:, -1].copy().view(complex).reshape(d, d)


def _check_invariants(before: ExtendedDensityMatrix, after: ExtendedDensityMatrix, tag: str):
    herm = after.hermiticity_residual()
    if herm > HERMITIAN_TOL:
        raise StabilityError(f"{tag}: Hermiticity residual {herm:.2e}")
    if after.trace > before.trace + 1e-10:
        raise StabilityError(f"{tag}: trace grew from {before.trace:.12f} to {after.trace:.12f}")
    lam = after.min_eigenvalue()
    if lam < -PSD_TOL:
        raise StabilityError(f"{tag}: negative eigenvalue {lam:.2e}")
    b2, _, b0 = before.block_traces()
    a2, _, a0 = after.block_traces()
    if a2 > b2 + 1e-10 or a0 < b0 - 1e-10:
        raise StabilityError(f"{tag}: weight moved to a higher photon-number block")


def propagate_density_period(spec: LatticeSpec, rho: ExtendedDensityMatrix,
                             steps: int = DEFAULT_STEPS, dissipation: str = "closed",
                             gamma_tau: float = GAMMA_TAU,
                             check: bool = True) -> ExtendedDensityMatrix:
    """Coherent propagation over one period followed by auxiliary photon loss."""
    if rho.basis.m != spec.n_sites:
        raise DomainError(f"density matrix has {rho.basis.m} sites, lattice {spec.n_sites}")
    v = lifted_propagator(spec, steps)
    mid = v @ rho.entries @ v.conj().T
    drift = abs(np.trace(mid).real - rho.trace)
    if drift > NORM_TOL * max(rho.trace, 1.0):
        raise StabilityError(
            f"propagation changed the trace by {drift:.2e} with {steps} steps; increase steps"
        )
    if dissipation == "closed":
        out = dissipate_closed(mid, spec)
    elif dissipation == "ode":
        out = dissipate_ode(mid, spec, gamma_tau)
    else:
        raise DomainError(f"unknown dissipation model {dissipation!r}")
    result = ExtendedDensityMatrix(out, rho.basis)
    if check:
        _check_invariants(rho, result, "period")
    return result


def pair_trajectory(spec: LatticeSpec, n0: int, m0: int, k: int,
                    steps: int = DEFAULT_STEPS, dissipation: str = "closed",
                    check: bool = True) -> list[ExtendedDensityMatrix]:
    """States at periods 0..k for photons injected at straight sites n0, m0 (0-based)."""
    if k < 0:
        raise DomainError("period count must be non-negative")
    for s in (n0, m0):
        if not 0 <= s < spec.n_straight:
            raise DomainError(f"straight site {s} outside 0..{spec.n_straight - 1}")
    basis = ExtendedBasis(spec.n_sites)
    rho = pair_state(2 * n0, 2 * m0, basis)
    states = [rho]
    for _ in range(k):
        rho = propagate_density_period(spec, rho, steps, dissipation, check=check)
        states.append(rho)
    return states


def evolve_pair(spec: LatticeSpec, n0: int, m0: int, k: int, steps: int = DEFAULT_STEPS,
                dissipation: str = "closed") -> ExtendedDensityMatrix:
    return pair_trajectory(spec, n0, m0, k, steps, dissipation)[-1]


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Coincidence matrix over straight sites, ordered-pair convention.

    ``gamma[n, m]`` with n != m is half the probability of finding one photon at
    each of n and m, so the full sum equals ``survival_p2``.
    """

    gamma: np.ndarray
    survival_p2: float

    @property
    def normalized(self) -> np.ndarray:
        if self.survival_p2 <= 0:
            raise DomainError("no two-photon weight left to normalise")
        return self.gamma / self.survival_p2

    def unordered(self) -> np.ndarray:
        """Per-pair probabilities: P(2_n) on the diagonal, P(1_n 1_m) off it."""
        g = 2 * self.gamma
        g[np.diag_indices_from(g)] /= 2
        return g


def correlation_matrix(rho: ExtendedDensityMatrix, spec: LatticeSpec) -> CorrelationMatrix:
    s = straight_indices(spec)
    m = rho.basis.m
    idx = (s[:, None] * m + s[None, :]).ravel()
    diag = np.diag(rho.entries)[idx].real.reshape(len(s), len(s))
    if diag.min() < -1e-12:
        raise StabilityError(f"negative coincidence probability {diag.min():.2e}")
    diag = np.clip(diag, 0.0, None)
    return CorrelationMatrix(diag, float(diag.sum()))


def straight_pair_amplitudes(rho: ExtendedDensityMatrix, spec: LatticeSpec) -> np.ndarray:
    """Two-photon block restricted to straight sites, as an (N^2 x N^2) matrix."""
    s = straight_indices(spec)
    m = rho.basis.m
    idx = (s[:, None] * m + s[None, :]).ravel()
    return rho.entries[np.ix_(idx, idx)]


def pair_amplitudes_via_u(u, n0: int, m0: int, periods: int = 1) -> np.ndarray:
    """Symmetric first-quantised amplitude psi(j, l) after ``periods`` periods."""
    mat = u.entries if isinstance(u, TransmissionMatrix) else np.asarray(u)
    uk = np.linalg.matrix_power(mat, periods)
    if n0 == m0:
        return np.outer(uk[:, n0], uk[:, n0])
    a, b = uk[:, n0], uk[:, m0]
    return (np.outer(a, b) + np.outer(b, a)) / np.sqrt(2)


def pair_correlation_via_u(u, n0: int, m0: int, periods: int = 1) -> CorrelationMatrix:
    """Coincidences from the single-photon transmission matrix.

    Equivalent to |U_jn U_lm + U_jm U_ln|^2 / (1 + delta_jl) per unordered pair,
    stored in the ordered convention of :class:`CorrelationMatrix`.
    """
    n = (u.entries if isinstance(u, TransmissionMatrix) else np.asarray(u)).shape[0]
    for s in (n0, m0):
        if not 0 <= s < n:
            raise DomainError(f"site {s} outside 0..{n - 1}")
    g = np.abs(pair_amplitudes_via_u(u, n0, m0, periods)) ** 2
    return CorrelationMatrix(g, float(g.sum()))


def dump_density(rho: ExtendedDensityMatrix, path: str | Path, meta: dict | None = None) -> Path:
    """Little-endian float64 re/im interleaved, row-major, plus a JSON sidecar."""
    path = Path(path)
    np.ascontiguousarray(rho.entries, dtype="<c16").tofile(path)
    sidecar = {
        "dimension": rho.basis.dim,
        "sites": rho.basis.m,
        "dtype": "float64 little-endian, (re, im) interleaved, row-major",
        "layout": {
            "pairs": [0, rho.basis.m ** 2],
            "single": [rho.basis.m ** 2, rho.basis.vacuum],
            "vacuum": rho.basis.vacuum,
            "pair_index": "n * sites + m",
        },
    }
    if meta:
        sidecar["meta"] = meta
    side = path.with_suffix(path.suffix + ".json")
    side.write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return side


def load_density(path: str | Path) -> ExtendedDensityMatrix:
    path = Path(path)
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    d = side["dimension"]
    data = np.fromfile(path, dtype="<c16").reshape(d, d)
    return ExtendedDensityMatrix(data, ExtendedBasis(side["sites"]))

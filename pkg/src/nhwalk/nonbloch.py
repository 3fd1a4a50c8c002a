"""Bulk hoppings, PBC/OBC spectra, generalized Brillouin zone and skin depth.

Hopping convention: ``kappa[d]`` is the amplitude for light to hop from site
``n`` to site ``n + d``, i.e. the matrix element ``H[n + d, n]``.  A Bloch wave
``psi_n = beta**n`` then has energy ``E(beta) = sum_d kappa[d] * beta**(-d)``,
and ``|beta| < 1`` on the GBZ means left-localised skin modes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DomainError, GBZError, NonCircularGBZError, ScaleError
from .floquet import DEFAULT_STEPS, EffectiveHamiltonian, effective_hamiltonian, transmission_matrix
from .lattice import Boundary, LatticeSpec

# un-aliased on a 24-site ring; |kappa| beyond +-5 is below 1% of the largest term
GBZ_ORDERS = (-5, 5)
GBZ_RING = 24
TABLE_ORDERS = (-4, 5)


class NonCirculantWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class BulkHoppings:
    orders: np.ndarray
    kappa: np.ndarray
    source_ring_size: int | None = None
    circulant_residual: float = 0.0

    def __getitem__(self, order: int) -> complex:
        idx = np.flatnonzero(self.orders == order)
        return complex(self.kappa[idx[0]]) if idx.size else 0j

    @property
    def p(self) -> int:
        """Longest hop to the right."""
        nz = self.orders[np.abs(self.kappa) > 0]
        return int(max(nz.max(), 0)) if nz.size else 0

    @property
    def q(self) -> int:
        """Longest hop to the left."""
        nz = self.orders[np.abs(self.kappa) > 0]
        return int(max(-nz.min(), 0)) if nz.size else 0

    def as_dict(self) -> dict[int, complex]:
        return {int(o): complex(k) for o, k in zip(self.orders, self.kappa)}

    def energy(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=complex)
        return sum(k * beta ** (-int(o)) for o, k in zip(self.orders, self.kappa))

    def toeplitz(self, n: int) -> np.ndarray:
        """Open-boundary matrix of these hoppings on ``n`` sites."""
        h = np.zeros((n, n), complex)
        for o, k in zip(self.orders, self.kappa):
            o = int(o)
            for s in range(max(0, -o), min(n, n - o)):
                h[s + o, s] = k
        return h


def hoppings_from_dict(d: dict[int, complex]) -> BulkHoppings:
    orders = np.array(sorted(d), dtype=int)
    return BulkHoppings(orders, np.array([d[o] for o in orders], dtype=complex))


def circulant_average(h: np.ndarray, orders) -> tuple[np.ndarray, float]:
    """kappa[d] = mean_n H[(n+d) mod N, n] and the worst deviation from that mean."""
    n = h.shape[0]
    idx = np.arange(n)
    kappa, dev = [], 0.0
    for o in orders:
        diag = h[(idx + o) % n, idx]
        kappa.append(diag.mean())
        dev = max(dev, float(np.max(np.abs(diag - diag.mean()))))
    return np.array(kappa), dev


def bulk_hoppings(spec: LatticeSpec, n_ring: int | None = None,
                  orders: tuple[int, int] = TABLE_ORDERS,
                  steps: int = DEFAULT_STEPS) -> BulkHoppings:
    """Average hopping of each order in the effective Hamiltonian of a ring."""
    lo, hi = orders
    n_ring = spec.n_straight if n_ring is None else n_ring
    if hi - lo + 1 > n_ring:
        raise DomainError(
            f"orders {lo}..{hi} alias on a {n_ring}-site ring; need n_ring >= {hi - lo + 1}"
        )
    ring = spec.with_(n_straight=n_ring, boundary=Boundary.RING)
    heff = effective_hamiltonian(transmission_matrix(ring, steps))
    order_list = np.arange(lo, hi + 1)
    kappa, dev = circulant_average(heff.entries, order_list)
    scale = np.max(np.abs(kappa))
    residual = dev / scale if scale > 0 else 0.0
    if residual > 0.01:
        warnings.warn(
            f"ring effective Hamiltonian deviates from circulant by {residual:.2%}",
            NonCirculantWarning, stacklevel=2,
        )
    return BulkHoppings(order_list, kappa, n_ring, residual)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    kind: str
    eigenvalues: np.ndarray
    lattice_size: int


def pbc_spectrum(h: BulkHoppings, n_samples: int = 256) -> SpectrumResult:
    """Bloch band E(k) = sum_d kappa_d exp(-i k d) at k = 2 pi j / n_samples."""
    if n_samples < 3:
        raise DomainError("need at least 3 momentum samples")
    k = 2 * np.pi * np.arange(n_samples) / n_samples
    return SpectrumResult("PBC", h.energy(np.exp(1j * k)), n_samples)


def obc_hamiltonian(spec: LatticeSpec, n_sites: int = 30,
                    steps: int = DEFAULT_STEPS) -> EffectiveHamiltonian:
    lattice = spec.with_(n_straight=n_sites, boundary=Boundary.OPEN)
    return effective_hamiltonian(transmission_matrix(lattice, steps))


def obc_spectrum(spec: LatticeSpec | np.ndarray, n_sites: int = 30,
                 steps: int = DEFAULT_STEPS) -> SpectrumResult:
    """Eigenvalues of an open-boundary effective Hamiltonian (or of a given matrix)."""
    if isinstance(spec, LatticeSpec):
        if n_sites < 2:
            raise DomainError("need at least 2 sites")
        h = obc_hamiltonian(spec, n_sites, steps).entries
    else:
        h = np.asarray(spec)
    try:
        w = np.linalg.eigvals(h)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"eigensolver failed: {exc}") from exc
    return SpectrumResult("OBC", w, h.shape[0])


def loop_area(points) -> float:
    """Signed shoelace area of a closed curve in the complex plane."""
    z = np.asarray(points, dtype=complex)
    x, y = z.real, z.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def winding_number(loop, energy: complex) -> int:
    """Winding of a closed curve around ``energy`` (non-zero means enclosed)."""
    z = np.asarray(loop, dtype=complex) - energy
    dphi = np.angle(np.roll(z, -1) / z)
    return int(np.round(dphi.sum() / (2 * np.pi)))


@dataclass(frozen=True, eq=False)
class GBZCurve:
    energies: np.ndarray
    betas: np.ndarray  # accepted roots, two per accepted energy
    fitted_radius: float
    circle_residual: float
    skipped: int = 0
    tolerance: float = 1e-3
    orders: tuple[int, int] = field(default=(0, 0))

    @property
    def relative_residual(self) -> float:
        return self.circle_residual / self.fitted_radius


def characteristic_roots(h: BulkHoppings, energy: complex) -> np.ndarray:
    """Roots of sum_d kappa_d beta**(p - d) - E beta**p, sorted by modulus."""
    p, q = h.p, h.q
    coef = np.zeros(p + q + 1, complex)  # coef[k] multiplies beta**k
    for o, k in zip(h.orders, h.kappa):
        if -q <= o <= p:
            coef[p - int(o)] += k
    coef[p] -= energy
    # companion-matrix eigenvalues
    roots = np.roots(coef[::-1])
    return roots[np.argsort(np.abs(roots))]


def gbz(h: BulkHoppings, energies, tol: float = 1e-3) -> GBZCurve:
    """Generalized Brillouin zone sampled at the given energies.

    With ``p`` right- and ``q`` left-hopping orders the equation for beta has
    ``p + q`` roots; the GBZ condition is that the ``p``-th and ``(p+1)``-th
    smallest have equal modulus.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=complex))
    if energies.size == 0:
        raise DomainError("no energies given")
    p, q = h.p, h.q
    if p < 1 or q < 1:
        raise DomainError("GBZ needs hopping in both directions")
    accepted_e, betas, skipped = [], [], 0
    for e in energies:
        r = characteristic_roots(h, e)
        pair = r[p - 1:p + 1]
        a, b = np.abs(pair)
        if abs(a - b) <= tol * max(a, b):
            accepted_e.append(e)
            betas.extend(pair)
        else:
            skipped += 1
    if skipped > energies.size / 2:
        raise GBZError(f"{skipped} of {energies.size} energies have no matching root pair")
    betas = np.array(betas)
    mods = np.abs(betas)
    radius = float(mods.mean())  # least-squares circle radius about the origin
    residual = float(np.max(np.abs(mods - radius)))
    return GBZCurve(np.array(accepted_e), betas, radius, residual, skipped, tol,
                    (int(h.orders.min()), int(h.orders.max())))


def skin_depth(curve: GBZCurve, max_relative_residual: float = 0.05) -> float:
    """g = log(radius); negative g means modes piled up at the left edge."""
    if curve.circle_residual >= max_relative_residual * curve.fitted_radius:
        raise NonCircularGBZError(
            f"GBZ radius varies by {curve.relative_residual:.1%}; a single diagonal "
            "similarity transform cannot remove the skin effect"
        )
    return float(np.log(curve.fitted_radius))


def similarity_matrix(n: int, g: float) -> np.ndarray:
    return np.diag(np.exp(-g * np.arange(1, n + 1)))


def similarity_transform(h, g: float) -> np.ndarray:
    """S H S^-1 with S = diag(exp(-g), exp(-2g), ..., exp(-Ng))."""
    mat = h.entries if isinstance(h, EffectiveHamiltonian) else np.asarray(h)
    n = mat.shape[0]
    if not np.isfinite(g):
        raise ScaleError("skin depth must be finite")
    if n * abs(g) >= 300:
        raise ScaleError(f"N |g| = {n * abs(g):.1f} would overflow the similarity matrix")
    idx = np.arange(1, n + 1)
    # (S H S^-1)[a, b] = exp(-(a - b) g) H[a, b]
    return np.exp(-g * (idx[:, None] - idx[None, :])) * mat


def hermitianize(h_bar) -> tuple[np.ndarray, float]:
    """Rotate by i and report how far the result is from Hermitian."""
    h_tilde = 1j * np.asarray(h_bar)
    norm = np.linalg.norm(h_tilde)
    residual = float(np.linalg.norm(h_tilde - h_tilde.conj().T) / norm) if norm > 0 else 0.0
    return h_tilde, residual


def eigenvector_centroids(h: np.ndarray) -> np.ndarray:
    """Intensity centroid (0-based site) of every right eigenvector."""
    _, v = np.linalg.eig(h)
    p = np.abs(v) ** 2
    p /= p.sum(axis=0)
    return np.arange(h.shape[0]) @ p


def gbz_for_spec(spec: LatticeSpec, n_obc: int = 30, n_ring: int = GBZ_RING,
                 orders: tuple[int, int] = GBZ_ORDERS, tol: float = 1e-3,
                 steps: int = DEFAULT_STEPS) -> tuple[BulkHoppings, SpectrumResult, GBZCurve]:
    """Hoppings from an un-aliased ring, energies from the open lattice."""
    h = bulk_hoppings(spec, n_ring, orders, steps)
    obc = obc_spectrum(spec, n_obc, steps)
    return h, obc, gbz(h, obc.eigenvalues, tol)

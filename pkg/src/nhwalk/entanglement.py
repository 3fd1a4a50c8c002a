"""Second-order Renyi entropy of photon pairs and distribution similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .pairs import CorrelationMatrix

NORM_TOL = 1e-6


@dataclass(frozen=True)
class EntropyResult:
    s2: float
    estimator: str  # "exact" or "diagonal"
    survival_p2: float = 1.0


def reduced_from_amplitudes(beta: np.ndarray) -> np.ndarray:
    """One-photon reduced density matrix of a symmetric pair wavefunction."""
    beta = np.asarray(beta, dtype=complex)
    return beta @ beta.conj().T


def reduced_from_density(rho2: np.ndarray) -> np.ndarray:
    """Trace one photon out of an (N^2 x N^2) two-photon density block."""
    n = int(round(np.sqrt(rho2.shape[0])))
    return np.einsum("ambm->ab", np.asarray(rho2).reshape(n, n, n, n))


def renyi(rho_a: np.ndarray, order: float = 2) -> float:
    """Renyi entropy log(tr rho_A^n) / (1 - n) of a unit-trace reduced state."""
    if order == 1:
        w = np.clip(np.linalg.eigvalsh(rho_a), 0, None)
        w = w[w > 0]
        return float(-(w * np.log(w)).sum())
    w = np.clip(np.linalg.eigvalsh((rho_a + rho_a.conj().T) / 2), 0, None)
    return float(np.log((w ** order).sum()) / (1 - order))


def renyi2_exact(beta: np.ndarray) -> EntropyResult:
    """-log tr rho_A^2 from the full (phase-resolved) pair amplitudes.

    ``beta[n, m]`` is the symmetric first-quantised amplitude, so |2_n> has
    ``beta[n, n] = 1`` and |1_n 1_m> has ``beta[n, m] = beta[m, n] = 1/sqrt(2)``.
    """
    beta = np.asarray(beta, dtype=complex)
    norm = float(np.sum(np.abs(beta) ** 2))
    if abs(norm - 1) > NORM_TOL:
        raise DomainError(f"pair amplitudes have norm^2 {norm:.6g}, expected 1")
    rho_a = reduced_from_amplitudes(beta)
    purity = float(np.trace(rho_a @ rho_a).real)
    return EntropyResult(-np.log(purity), "exact")


def renyi2_from_density(rho2: np.ndarray) -> EntropyResult:
    """Exact estimator for a (possibly mixed) two-photon block, after post-selection."""
    rho2 = np.asarray(rho2)
    p2 = float(np.trace(rho2).real)
    if p2 <= 0:
        raise DomainError("two-photon block is empty")
    rho_a = reduced_from_density(rho2 / p2)
    purity = float(np.trace(rho_a @ rho_a).real)
    return EntropyResult(-np.log(purity), "exact", p2)


def _weights(gamma) -> tuple[np.ndarray, float]:
    if isinstance(gamma, CorrelationMatrix):
        return gamma.normalized, gamma.survival_p2
    g = np.asarray(gamma, dtype=float)
    total = g.sum()
    if abs(total - 1) > NORM_TOL:
        raise DomainError(f"correlation matrix sums to {total:.6g}; normalise it first")
    return g, 1.0


def renyi2_diagonal(gamma) -> EntropyResult:
    """Intensity-only estimator that drops the off-diagonal coherences of rho_A.

    Works on the ordered-pair convention: the weight of the unordered pair
    {i, j} is gamma[i, j] + gamma[j, i].  With d_i = |beta_ii|^2 + f_i and
    f_i = sum_{j<i} |beta_ji|^2 the purity is sum_i d_i^2.
    """
    g, p2 = _weights(gamma)
    if g.min() < -1e-12:
        raise DomainError(f"negative coincidence weight {g.min():.2e}")
    g = np.clip(g, 0, None)
    b_diag = np.diag(g)
    pairs = np.triu(g + g.T, k=1)  # pairs[j, i] = |beta_ji|^2 for j < i
    f = pairs.sum(axis=0)
    purity = np.sum(b_diag ** 2) + 2 * np.sum(f * b_diag) + np.sum(f ** 2)
    return EntropyResult(float(-np.log(purity)), "diagonal", p2)


def normalized_entropy(s2_asym: float, s2_sym: float) -> float:
    """Entropy relative to the symmetric lattice at the same period and injection."""
    return float(s2_asym - s2_sym)


def similarity_single(p, q) -> float:
    """(sum sqrt(p q))^2 / (sum p * sum q); 1 iff p is proportional to q."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DomainError("distributions differ in size")
    if p.min() < 0 or q.min() < 0:
        raise DomainError("distributions must be non-negative")
    sp, sq = p.sum(), q.sum()
    if sp == 0 or sq == 0:
        raise DomainError("distribution has no weight")
    return float(np.sum(np.sqrt(p * q)) ** 2 / (sp * sq))


def similarity_pair(g1, g2) -> float:
    a = g1.gamma if isinstance(g1, CorrelationMatrix) else g1
    b = g2.gamma if isinstance(g2, CorrelationMatrix) else g2
    return similarity_single(a, b)

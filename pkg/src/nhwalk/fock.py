"""Brute-force bosonic Fock space with at most two photons.

Independent of the extended-basis machinery in :mod:`nhwalk.pairs`; used to
generate and check operator lifts and to cross-check small dynamics.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy import linalg


@lru_cache(maxsize=32)
def fock_basis(m: int, max_photons: int = 2) -> tuple[tuple[int, ...], ...]:
    """Occupation tuples on ``m`` modes with total photon number <= max_photons."""
    states = []
    for n in range(max_photons + 1):
        for modes in combinations_with_replacement(range(m), n):
            occ = [0] * m
            for mode in modes:
                occ[mode] += 1
            states.append(tuple(occ))
    return tuple(states)


def annihilation(j: int, m: int, max_photons: int = 2) -> np.ndarray:
    basis = fock_basis(m, max_photons)
    index = {s: i for i, s in enumerate(basis)}
    a = np.zeros((len(basis), len(basis)))
    for col, s in enumerate(basis):
        if s[j] == 0:
            continue
        t = list(s)
        t[j] -= 1
        a[index[tuple(t)], col] = np.sqrt(s[j])
    return a


def hamiltonian(h: np.ndarray, max_photons: int = 2) -> np.ndarray:
    """Second-quantised sum_ij h_ij a_i^dag a_j."""
    m = h.shape[0]
    ops = [annihilation(j, m, max_photons) for j in range(m)]
    out = np.zeros((ops[0].shape[0],) * 2, dtype=complex)
    for i in range(m):
        for j in range(m):
            if h[i, j] != 0:
                out += h[i, j] * ops[i].T @ ops[j]
    return out


def to_extended(m: int) -> np.ndarray:
    """Isometry from Fock states to the ordered-pair extended basis.

    |2_n> -> |n,n>,  |1_n 1_m> -> (|n,m> + |m,n>)/sqrt(2),  |1_l> -> |l>,  |0> -> |0>.
    Extended layout: m*m ordered pairs, then m single-photon sites, then vacuum.
    """
    basis = fock_basis(m, 2)
    w = np.zeros((m * m + m + 1, len(basis)))
    for col, s in enumerate(basis):
        occupied = [i for i, n in enumerate(s) for _ in range(n)]
        if len(occupied) == 0:
            w[m * m + m, col] = 1.0
        elif len(occupied) == 1:
            w[m * m + occupied[0], col] = 1.0
        else:
            a, b = occupied
            if a == b:
                w[a * m + a, col] = 1.0
            else:
                w[a * m + b, col] = w[b * m + a, col] = 1 / np.sqrt(2)
    return w


def two_photon_state(m: int, n0: int, m0: int) -> np.ndarray:
    """a_n0^dag a_m0^dag |0>, normalised."""
    basis = fock_basis(m, 2)
    occ = [0] * m
    occ[n0] += 1
    occ[m0] += 1
    psi = np.zeros(len(basis), complex)
    psi[basis.index(tuple(occ))] = 1.0
    return psi


def coincidences(psi: np.ndarray, m: int) -> np.ndarray:
    """Ordered-pair coincidence matrix: P(2_n) on the diagonal, P(1_n 1_m)/2 off it."""
    basis = fock_basis(m, 2)
    gamma = np.zeros((m, m))
    for amp, s in zip(psi, basis):
        occupied = [i for i, n in enumerate(s) for _ in range(n)]
        if len(occupied) != 2:
            continue
        a, b = occupied
        prob = abs(amp) ** 2
        if a == b:
            gamma[a, a] += prob
        else:
            gamma[a, b] += prob / 2
            gamma[b, a] += prob / 2
    return gamma


def evolve(h: np.ndarray, psi: np.ndarray, length: float) -> np.ndarray:
    return linalg.expm(-1j * length * hamiltonian(h)) @ psi

"""Composite experiments built from the module operations.

Every function here takes 0-based straight-site indices and returns plain
arrays or small dataclasses; the harness handles 1-based I/O and export.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import linalg

from .entanglement import renyi2_diagonal, renyi2_from_density
from .errors import ConfigurationError
from .floquet import (
    DEFAULT_STEPS,
    LyapunovResult,
    effective_hamiltonian,
    intensity_distribution,
    lyapunov_exponent,
    packet_center,
    transmission_matrix,
)
from .lattice import Boundary, LatticeSpec
from .nonbloch import (
    GBZ_ORDERS,
    GBZ_RING,
    TABLE_ORDERS,
    bulk_hoppings,
    gbz_for_spec,
    loop_area,
    obc_spectrum,
    pbc_spectrum,
    similarity_transform,
    skin_depth,
)
from .pairs import (
    CorrelationMatrix,
    correlation_matrix,
    pair_amplitudes_via_u,
    pair_correlation_via_u,
    pair_trajectory,
    straight_pair_amplitudes,
)

WORKERS_ENV = "NHWALK_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{WORKERS_ENV}={raw!r} is not an integer") from exc
    if n < 1:
        raise ConfigurationError(f"{WORKERS_ENV} must be at least 1")
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map over a bounded process pool; results come back in input order."""
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True, eq=False)
class SingleWalk:
    periods: list[int]
    raw: np.ndarray  # (len(periods), N)
    normalized: np.ndarray
    centers: np.ndarray  # 0-based
    n0: int


def single_walk(spec: LatticeSpec, n0: int, periods: Iterable[int],
                steps: int = DEFAULT_STEPS) -> SingleWalk:
    u = transmission_matrix(spec, steps)
    periods = [int(k) for k in periods]
    raw = np.array([intensity_distribution(u, n0, k) for k in periods])
    norm = raw / raw.sum(axis=1, keepdims=True)
    centers = np.array([packet_center(p) for p in norm])
    return SingleWalk(periods, raw, norm, centers, n0)


def drift(spec: LatticeSpec, n0: int, k: int, steps: int = DEFAULT_STEPS) -> float:
    """Shift of the post-selected intensity centroid after k periods."""
    return float(single_walk(spec, n0, [k], steps).centers[0] - n0)


def pair_walk(spec: LatticeSpec, n0: int, m0: int, periods: Iterable[int],
              method: str = "master", steps: int = DEFAULT_STEPS) -> dict[int, CorrelationMatrix]:
    """Coincidence matrices at the requested periods.

    ``method="master"`` evolves the density matrix period by period;
    ``method="transmission"`` uses products of single-photon amplitudes.
    """
    periods = sorted({int(k) for k in periods})
    if method == "master":
        states = pair_trajectory(spec, n0, m0, max(periods), steps)
        return {k: correlation_matrix(states[k], spec) for k in periods}
    if method == "transmission":
        u = transmission_matrix(spec, steps)
        return {k: pair_correlation_via_u(u, n0, m0, k) for k in periods}
    raise ConfigurationError(f"unknown pair method {method!r}")


def matched_skin_depth(spec: LatticeSpec, steps: int = DEFAULT_STEPS) -> float:
    _, _, curve = gbz_for_spec(spec, steps=steps)
    return skin_depth(curve)


def skin_removed_propagator(spec: LatticeSpec, g: float | None = None,
                            steps: int = DEFAULT_STEPS) -> tuple[np.ndarray, float]:
    """exp(-iT S H_eff S^-1) on the open lattice of ``spec``, with g from the GBZ if omitted."""
    if g is None:
        g = matched_skin_depth(spec, steps)
    heff = effective_hamiltonian(transmission_matrix(spec, steps))
    h_bar = similarity_transform(heff, g)
    return linalg.expm(-1j * spec.period_T * h_bar), g


@dataclass(frozen=True, eq=False)
class EntropyCurve:
    phi: float
    periods: np.ndarray
    s2: np.ndarray  # diagonal estimator on normalised coincidences
    s2_exact: np.ndarray  # with coherences, on the post-selected two-photon block
    survival_p2: np.ndarray
    method: str


def entropy_curve(spec: LatticeSpec, n0: int, m0: int, k_max: int,
                  method: str = "master", g: float | None = None,
                  steps: int = DEFAULT_STEPS) -> EntropyCurve:
    """S2 at periods 0..k_max.

    ``method`` is ``master`` (density matrix), ``transmission`` (amplitude
    products) or ``similarity`` (amplitude products under the skin-removed
    effective Hamiltonian).
    """
    ks = np.arange(k_max + 1)
    s2, exact, p2 = [], [], []
    if method == "master":
        for rho in pair_trajectory(spec, n0, m0, k_max, steps):
            gamma = correlation_matrix(rho, spec)
            s2.append(renyi2_diagonal(gamma).s2)
            exact.append(renyi2_from_density(straight_pair_amplitudes(rho, spec)).s2)
            p2.append(gamma.survival_p2)
    elif method in ("transmission", "similarity"):
        if method == "similarity":
            u, g = skin_removed_propagator(spec, g, steps)
        else:
            u = transmission_matrix(spec, steps).entries
        for k in ks:
            amp = pair_amplitudes_via_u(u, n0, m0, int(k))
            gamma = CorrelationMatrix(np.abs(amp) ** 2, float(np.sum(np.abs(amp) ** 2)))
            s2.append(renyi2_diagonal(gamma).s2)
            rho2 = np.outer(amp.ravel(), amp.ravel().conj())
            exact.append(renyi2_from_density(rho2).s2)
            p2.append(gamma.survival_p2)
    else:
        raise ConfigurationError(f"unknown entropy method {method!r}")
    return EntropyCurve(spec.phase_phi, ks, np.array(s2), np.array(exact), np.array(p2), method)


def _lyapunov_point(args) -> LyapunovResult:
    spec, window, steps = args
    return lyapunov_exponent(spec, window=window, steps=steps)


def lyapunov_sweep(spec: LatticeSpec, phis: Sequence[float], n_straight: int = 30,
                   window: tuple[int, int] = (20, 40),
                   steps: int = DEFAULT_STEPS) -> list[LyapunovResult]:
    base = spec.with_(n_straight=n_straight, boundary=Boundary.OPEN)
    jobs = [(base.with_(phase_phi=float(p)), tuple(window), steps) for p in phis]
    return parallel_map(_lyapunov_point, jobs)


@dataclass(frozen=True, eq=False)
class Spectra:
    pbc: np.ndarray
    obc: np.ndarray
    pbc_area: float
    hopping_orders: tuple[int, int]


def spectra(spec: LatticeSpec, n_obc: int = 30, n_samples: int = 256,
            steps: int = DEFAULT_STEPS) -> Spectra:
    h = bulk_hoppings(spec, GBZ_RING, GBZ_ORDERS, steps)
    obc = obc_spectrum(spec, n_obc, steps)
    pbc = pbc_spectrum(h, n_samples)
    return Spectra(pbc.eigenvalues, obc.eigenvalues, loop_area(pbc.eigenvalues), GBZ_ORDERS)


def table1(spec: LatticeSpec, n_ring: int = 10, orders: tuple[int, int] = TABLE_ORDERS,
           steps: int = DEFAULT_STEPS):
    return bulk_hoppings(spec, n_ring, orders, steps)

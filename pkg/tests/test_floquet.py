from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import linalg

from nhwalk.errors import (
    BranchError,
    ConditioningError,
    DomainError,
    IntegrationError,
    SingularPropagatorError,
    WindowError,
)
from nhwalk.floquet import (
    TransmissionMatrix,
    effective_hamiltonian,
    evolve_n_periods,
    intensity_distribution,
    lyapunov_exponent,
    lyapunov_from_transmission,
    mirror_spec,
    packet_center,
    period_propagator,
    propagate_period,
    rk4,
    transmission_matrix,
    truncate_aux,
)
from nhwalk.lattice import Boundary, LatticeSpec, aux_indices, straight_indices

small_specs = st.builds(
    LatticeSpec,
    n_straight=st.integers(2, 4),
    boundary=st.sampled_from(list(Boundary)),
    spacing_a=st.floats(0.8, 1.2),
    radius_R=st.floats(0.0, 0.3),
    period_T=st.floats(10.0, 60.0),
    phase_phi=st.floats(0, 2 * np.pi),
)


def _tm(mat, period=40.0):
    return TransmissionMatrix(np.asarray(mat, dtype=complex), period)


def test_free_evolution_when_uncoupled():
    spec = LatticeSpec(coupling_A=0.0, n_straight=4)
    psi = np.arange(spec.n_sites) + 1j
    np.testing.assert_allclose(propagate_period(spec, psi), psi, atol=1e-15)
    np.testing.assert_allclose(transmission_matrix(spec).entries, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("kappa,length", [(0.3, 1.0), (0.0083, 40.0), (1.0, np.pi / 4)])
def test_rabi_oscillation(kappa, length):
    h = np.array([[0.0, -kappa], [-kappa, 0.0]])
    psi = rk4(lambda z, x: h @ x, np.array([1.0, 0.0]), 0.0, length, 2000)
    assert abs(psi[1]) ** 2 == pytest.approx(np.sin(kappa * length) ** 2, abs=1e-12)


@given(small_specs, st.floats(0, 40))
def test_norm_conserved_over_period(spec, z0):
    rng = np.random.default_rng(0)
    psi = rng.normal(size=spec.n_sites) + 1j * rng.normal(size=spec.n_sites)
    out = propagate_period(spec, psi, z0)
    assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(psi), rel=1e-8)


def test_closed_propagator_unitary(ref):
    p = period_propagator(ref)
    np.testing.assert_allclose(p.conj().T @ p, np.eye(ref.n_sites), atol=1e-9)


def test_too_few_steps_raise_integration_error(ref):
    with pytest.raises(IntegrationError, match="steps"):
        propagate_period(ref, np.eye(ref.n_sites)[:, 0], steps=5)


def test_wrong_state_length(ref):
    with pytest.raises(DomainError):
        propagate_period(ref, np.ones(3))


def test_truncation_examples(ref):
    aux, straight = aux_indices(ref), straight_indices(ref)
    on_aux = np.zeros(ref.n_sites, complex)
    on_aux[aux] = 1.0
    assert not truncate_aux(on_aux, ref).any()
    on_straight = np.zeros(ref.n_sites, complex)
    on_straight[straight] = np.arange(1, ref.n_straight + 1)
    np.testing.assert_array_equal(truncate_aux(on_straight, ref), np.arange(1, ref.n_straight + 1))
    mixed = np.random.default_rng(1).normal(size=ref.n_sites).astype(complex)
    lost = np.sum(np.abs(mixed[aux]) ** 2)
    assert np.sum(np.abs(truncate_aux(mixed, ref)) ** 2) == pytest.approx(
        np.sum(np.abs(mixed) ** 2) - lost, rel=1e-14)


def test_transmission_columns_match_truncated_propagation(ref):
    u = transmission_matrix(ref)
    for n0 in (0, 4, 8):
        psi = np.zeros(ref.n_sites, complex)
        psi[2 * n0] = 1.0
        np.testing.assert_allclose(u.entries[:, n0], truncate_aux(propagate_period(ref, psi), ref),
                                   atol=1e-13)


@given(small_specs)
def test_passivity(spec):
    assert transmission_matrix(spec).singular_values().max() <= 1 + 1e-6


def test_symmetric_phase_spreads_symmetrically(ref):
    u = transmission_matrix(ref.with_(phase_phi=np.pi / 2))
    p = intensity_distribution(u, 5, periods=6, normalized=True)
    dev = max(abs(p[5 + d] - p[5 - d]) for d in range(1, 4))
    assert dev <= 0.05 * p.max()


def test_step_doubling_converged(ref):
    u1 = transmission_matrix(ref).entries
    u2 = transmission_matrix(ref, steps=4000).entries
    assert np.max(np.abs(u1 - u2)) < 1e-6


def test_mirror_lattice_gives_mirrored_intensities(ref):
    u = transmission_matrix(ref.with_(phase_phi=0.4))
    um = transmission_matrix(mirror_spec(ref.with_(phase_phi=0.4)))
    n = ref.n_straight
    for n0 in (2, 5):
        p = intensity_distribution(u, n0, periods=4)
        pm = intensity_distribution(um, n - 1 - n0, periods=4)
        np.testing.assert_allclose(pm[::-1], p, atol=1e-9)


# effective Hamiltonian -----------------------------------------------------

def test_log_of_identity_and_scalar():
    assert np.allclose(effective_hamiltonian(_tm(np.eye(3))).entries, 0)
    theta = 0.2
    h = effective_hamiltonian(_tm(np.exp(-1j * theta) * np.eye(3), 40.0))
    np.testing.assert_allclose(h.entries, theta / 40.0 * np.eye(3), atol=1e-15)


@pytest.mark.parametrize("boundary,n", [(Boundary.OPEN, 9), (Boundary.RING, 10), (Boundary.OPEN, 30)])
@pytest.mark.parametrize("phi", [0.0, np.pi / 2])
def test_round_trip_and_lossy_spectrum(ref, boundary, n, phi):
    spec = ref.with_(boundary=boundary, n_straight=n, phase_phi=phi)
    u = transmission_matrix(spec)
    h = effective_hamiltonian(u)
    assert h.roundtrip_error <= 1e-8
    np.testing.assert_allclose(h.propagator(), u.entries, atol=1e-8)
    assert np.all(h.eigenvalues().imag <= 1e-10)


def test_eigendecomposition_route_agrees(ref):
    u = transmission_matrix(ref.with_(n_straight=5, phase_phi=1.0))
    a = effective_hamiltonian(u, "schur").entries
    b = effective_hamiltonian(u, "eig").entries
    assert np.max(np.abs(a - b)) < 1e-9 * np.max(np.abs(a))


def test_singular_propagator():
    with pytest.raises(SingularPropagatorError):
        effective_hamiltonian(_tm(np.diag([1.0, 0.0])))


def test_branch_guard():
    with pytest.raises(BranchError):
        effective_hamiltonian(_tm(np.diag([1.0, np.exp(0.95j * np.pi)])))


def test_defective_matrix_flags_conditioning():
    jordan = 0.9 * np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ConditioningError, match="condition number"):
        effective_hamiltonian(_tm(jordan), method="eig")


def test_unknown_log_method():
    with pytest.raises(DomainError):
        effective_hamiltonian(_tm(np.eye(2)), method="pade")


# stroboscopic evolution ----------------------------------------------------

def test_evolve_n_periods(ref):
    u = transmission_matrix(ref)
    psi = np.random.default_rng(3).normal(size=9) + 0j
    np.testing.assert_array_equal(evolve_n_periods(u, psi, 0), psi)
    np.testing.assert_allclose(evolve_n_periods(u, psi, 1), u.entries @ psi)
    norms = [np.linalg.norm(evolve_n_periods(u, psi, k)) for k in range(8)]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
    with pytest.raises(DomainError):
        evolve_n_periods(u, psi, -1)


def test_intensity_uncoupled_is_delta():
    u = transmission_matrix(LatticeSpec(coupling_A=0.0))
    p = intensity_distribution(u, 3, periods=5)
    assert p[3] == pytest.approx(1.0) and p.sum() == pytest.approx(1.0)
    with pytest.raises(DomainError):
        intensity_distribution(u, 9)


def test_packet_center_examples():
    assert packet_center(np.eye(9)[3]) == 3
    assert packet_center(np.ones(9)) == pytest.approx(4)
    assert packet_center([0, 1, 2, 4, 2, 1, 0, 0, 0, 0, 0][:11]) == pytest.approx(3)
    with pytest.raises(DomainError):
        packet_center(np.zeros(4))


def test_drift_direction(ref):
    u = transmission_matrix(ref)
    center = packet_center(intensity_distribution(u, 5, periods=6, normalized=True))
    assert center < 5 - 1  # pulled toward the left edge


# Lyapunov exponent ---------------------------------------------------------

def test_lyapunov_reports_both_units(ref):
    res = lyapunov_exponent(ref.with_(n_straight=30))
    assert res.per_um == pytest.approx(res.per_period / ref.period_T)
    assert res.per_period < 0
    assert res.padded_per_period == pytest.approx(res.per_period, rel=1e-6)


def test_lyapunov_window_error_on_small_lattice(ref):
    with pytest.raises(WindowError, match="n_straight"):
        lyapunov_exponent(ref.with_(n_straight=5), window=(20, 40))


def test_lyapunov_vanishes_for_unitary_walk():
    # Hermitian nearest-neighbour walk: |psi_m| decays only algebraically
    n = 401
    h = -0.0025 * (np.eye(n, k=1) + np.eye(n, k=-1))
    u = linalg.expm(-1j * 10.0 * h)
    lams = [abs(lyapunov_from_transmission(u, n // 2, (20, k2))) for k2 in (40, 120, 420, 1020)]
    assert all(b < a for a, b in zip(lams, lams[1:]))
    assert lams[-1] < 0.005


def test_lyapunov_rejects_ring(ref):
    with pytest.raises(DomainError):
        lyapunov_exponent(ref.with_(boundary=Boundary.RING))

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhwalk.errors import DomainError, GBZError, NonCircularGBZError, ScaleError
from nhwalk.lattice import Boundary, LatticeSpec
from nhwalk.nonbloch import (
    GBZCurve,
    bulk_hoppings,
    characteristic_roots,
    circulant_average,
    eigenvector_centroids,
    gbz,
    gbz_for_spec,
    hermitianize,
    hoppings_from_dict,
    loop_area,
    obc_hamiltonian,
    obc_spectrum,
    pbc_spectrum,
    similarity_transform,
    skin_depth,
    winding_number,
)


@pytest.fixture(scope="module")
def asym_analysis():
    spec = LatticeSpec()
    h, obc, curve = gbz_for_spec(spec)
    return spec, h, obc, curve


def hatano_nelson(right: complex, left: complex):
    return hoppings_from_dict({-1: left, 0: 0j, 1: right})


def test_uncoupled_lattice_has_no_hopping():
    h = bulk_hoppings(LatticeSpec(coupling_A=0.0, n_straight=10, boundary=Boundary.RING))
    assert np.all(h.kappa == 0)
    assert np.all(obc_spectrum(LatticeSpec(coupling_A=0.0), 6).eigenvalues == 0)


def test_symmetric_phase_gives_symmetric_hopping():
    h = bulk_hoppings(LatticeSpec(phase_phi=np.pi / 2, n_straight=10, boundary=Boundary.RING))
    assert abs(h[-1]) == pytest.approx(abs(h[1]), rel=0.01)


def test_asymmetric_hopping_table():
    h = bulk_hoppings(LatticeSpec(n_straight=10, boundary=Boundary.RING))
    assert h.source_ring_size == 10
    assert h.circulant_residual < 1e-6
    assert np.max(np.abs(h.kappa.real)) < 1e-10
    assert abs(h[-1]) / abs(h[1]) == pytest.approx(10, rel=0.1)
    # magnitudes fall off away from the dominant orders on the negative side
    assert abs(h[-1]) > abs(h[-2]) > abs(h[-3]) > abs(h[-4])


def test_aliasing_guard():
    with pytest.raises(DomainError, match="alias"):
        bulk_hoppings(LatticeSpec(n_straight=10, boundary=Boundary.RING), orders=(-5, 5))


def test_circulant_residual_detects_broken_translation():
    rng = np.random.default_rng(0)
    h = np.diag(np.ones(5)) + np.diag(rng.normal(size=4), 1)
    _, dev = circulant_average(h, [-1, 0, 1])
    assert dev > 0.1
    c = np.roll(np.eye(6), 1, axis=0) * 0.3
    kappa, dev = circulant_average(c, [-1, 0, 1])
    assert dev == 0 and kappa[2] == pytest.approx(0.3)


def test_pbc_examples():
    const = pbc_spectrum(hoppings_from_dict({0: 0.7 + 0.1j}), 16)
    assert const.lattice_size == 16 and np.allclose(const.eigenvalues, 0.7 + 0.1j)
    line = pbc_spectrum(hatano_nelson(1.0, 1.0), 64).eigenvalues
    assert np.allclose(line.imag, 0) and loop_area(line) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        pbc_spectrum(hatano_nelson(1, 1), 2)


def test_obc_examples():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(6, 6))
    assert np.allclose(obc_spectrum(a + a.T).eigenvalues.imag, 0)
    with pytest.raises(DomainError):
        obc_spectrum(LatticeSpec(), n_sites=1)


def test_pbc_loop_encloses_obc_spectrum(asym_analysis):
    _, h, obc, _ = asym_analysis
    loop = pbc_spectrum(h, 512).eigenvalues
    assert abs(loop_area(loop)) > 0
    assert all(winding_number(loop, e) != 0 for e in obc.eigenvalues)


def test_winding_of_circle():
    circle = np.exp(2j * np.pi * np.arange(200) / 200)
    assert winding_number(circle, 0.1) == 1
    assert winding_number(circle[::-1], 0.0) == -1
    assert winding_number(circle, 3.0) == 0


# GBZ ------------------------------------------------------------------------

def test_bloch_limit_for_hermitian_hopping():
    curve = gbz(hatano_nelson(1.0, 1.0), np.linspace(-1.9, 1.9, 21))
    assert curve.skipped == 0
    assert np.max(np.abs(np.abs(curve.betas) - 1)) < 1e-6


def test_hatano_nelson_closed_form():
    h = hatano_nelson(0.01j, 0.02j)
    energies = np.linalg.eigvals(h.toeplitz(30))
    curve = gbz(h, energies)
    np.testing.assert_allclose(np.abs(curve.betas), 1 / np.sqrt(2), atol=1e-6)
    assert skin_depth(curve) == pytest.approx(-0.3466, abs=1e-4)


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0, 2 * np.pi))
def test_nearest_neighbour_gbz_matches_closed_form(r, l, phase):
    h = hatano_nelson(r * np.exp(1j * phase), l * np.exp(1j * phase))
    energies = np.linalg.eigvals(h.toeplitz(20))
    curve = gbz(h, energies)
    np.testing.assert_allclose(np.abs(curve.betas), np.sqrt(r / l), rtol=1e-6)


def test_characteristic_roots_solve_energy_equation():
    h = hoppings_from_dict({-2: 0.1, -1: 1.0 + 0.2j, 0: 0.3, 1: 0.4j, 2: 0.05, 3: 0.02})
    e = 0.2 - 0.1j
    roots = characteristic_roots(h, e)
    assert roots.size == h.p + h.q == 5
    np.testing.assert_allclose(h.energy(roots), e, atol=1e-9)
    assert np.all(np.diff(np.abs(roots)) >= 0)


def test_gbz_needs_two_sided_hopping():
    with pytest.raises(DomainError):
        gbz(hoppings_from_dict({0: 1.0, 1: 0.5}), [0.1])
    with pytest.raises(DomainError):
        gbz(hatano_nelson(1, 1), [])


def test_gbz_failure_when_most_energies_miss():
    # energies far from the spectrum have no matching root pair
    with pytest.raises(GBZError):
        gbz(hatano_nelson(1.0, 0.5), [10.0, 20.0, 30.0])


def test_reference_gbz_is_shrunken_circle(asym_analysis):
    *_, curve = asym_analysis
    assert curve.fitted_radius < 1
    assert curve.relative_residual < 0.05
    assert skin_depth(curve) < 0


def test_skin_depth_examples():
    unit = GBZCurve(np.zeros(2), np.array([1.0, -1.0]), 1.0, 0.0)
    assert skin_depth(unit) == 0
    lumpy = GBZCurve(np.zeros(2), np.array([0.5, 1.0]), 0.75, 0.25)
    with pytest.raises(NonCircularGBZError):
        skin_depth(lumpy)


# similarity transform and Hermitianization ----------------------------------

def test_similarity_identity_at_zero():
    h = np.random.default_rng(4).normal(size=(5, 5))
    np.testing.assert_array_equal(similarity_transform(h, 0.0), h)


@given(st.integers(2, 8), st.floats(-2, 2), st.integers(0, 1000))
def test_similarity_preserves_spectrum(n, g, seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    s = np.diag(np.exp(-g * np.arange(1, n + 1)))
    np.testing.assert_allclose(similarity_transform(h, g), s @ h @ np.linalg.inv(s), rtol=1e-10, atol=1e-12)
    w0 = np.sort_complex(np.linalg.eigvals(h))
    w1 = np.sort_complex(np.linalg.eigvals(similarity_transform(h, g)))
    assert np.max(np.abs(w0 - w1)) <= 1e-8 * max(np.abs(w0).max(), 1)


def test_similarity_symmetrizes_hatano_nelson():
    h = hatano_nelson(0.01j, 0.02j)
    mat = h.toeplitz(12)
    g = 0.5 * np.log(0.01 / 0.02)
    bar = similarity_transform(mat, g)
    np.testing.assert_allclose(np.abs(np.diag(bar, 1)), np.abs(np.diag(bar, -1)), rtol=1e-12)


def test_scale_guard():
    with pytest.raises(ScaleError):
        similarity_transform(np.eye(100), 3.5)
    with pytest.raises(ScaleError):
        similarity_transform(np.eye(3), np.inf)


def test_hermitianize_residuals():
    a = np.random.default_rng(5).normal(size=(4, 4))
    sym = a + a.T
    _, r = hermitianize(-1j * sym)
    assert r < 1e-15
    _, r = hermitianize(sym)
    assert r == pytest.approx(2.0)


def test_reference_similarity_transform(asym_analysis):
    spec, _, _, curve = asym_analysis
    g = skin_depth(curve)
    h = obc_hamiltonian(spec, 30).entries
    bar = similarity_transform(h, g)
    w0 = np.sort_complex(np.linalg.eigvals(h))
    w1 = np.sort_complex(np.linalg.eigvals(bar))
    assert np.max(np.abs(w0 - w1)) <= 1e-8 * np.abs(w0).max()
    _, residual = hermitianize(bar)
    assert np.isfinite(residual)
    # skin modes pile up at one edge before, spread across the lattice after
    n = 30
    assert abs(eigenvector_centroids(h).mean() - n / 2) > 0.2 * n
    assert abs(eigenvector_centroids(bar).mean() - n / 2) < 0.1 * n

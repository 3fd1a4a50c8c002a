from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nhwalk.entanglement import (
    normalized_entropy,
    reduced_from_amplitudes,
    reduced_from_density,
    renyi,
    renyi2_diagonal,
    renyi2_exact,
    renyi2_from_density,
    similarity_pair,
    similarity_single,
)
from nhwalk.errors import DomainError
from nhwalk.experiments import entropy_curve
from nhwalk.pairs import CorrelationMatrix

LOG2 = np.log(2)


def ordered_gamma(beta):
    """Ordered coincidence weights of a symmetric amplitude array."""
    return np.abs(beta) ** 2


def test_product_state_has_zero_entropy():
    beta = np.zeros((3, 3))
    beta[0, 0] = 1
    assert renyi2_exact(beta).s2 == pytest.approx(0, abs=1e-15)
    assert renyi2_diagonal(ordered_gamma(beta)).s2 == pytest.approx(0, abs=1e-15)


def test_bunched_superposition():
    beta = np.diag([1, 1]) / np.sqrt(2)
    assert renyi2_exact(beta).s2 == pytest.approx(LOG2)
    res = renyi2_diagonal(np.diag([0.5, 0.5]))
    assert res.s2 == pytest.approx(LOG2) and res.estimator == "diagonal"


def test_split_pair():
    beta = np.array([[0, 1], [1, 0]]) / np.sqrt(2)
    res = renyi2_exact(beta)
    assert res.s2 == pytest.approx(LOG2) and res.estimator == "exact"
    np.testing.assert_allclose(reduced_from_amplitudes(beta), np.eye(2) / 2)


def test_exact_requires_normalised_amplitudes():
    with pytest.raises(DomainError):
        renyi2_exact(np.eye(2))


def test_diagonal_requires_normalised_weights():
    with pytest.raises(DomainError):
        renyi2_diagonal(np.eye(2))
    with pytest.raises(DomainError):
        renyi2_diagonal(np.array([[1.5, 0.0], [0.0, -0.5]]))


def test_diagonal_post_selects_correlation_matrix():
    g = CorrelationMatrix(np.diag([0.1, 0.1]), 0.2)
    res = renyi2_diagonal(g)
    assert res.s2 == pytest.approx(LOG2) and res.survival_p2 == pytest.approx(0.2)


@given(arrays(float, st.integers(1, 6), elements=st.floats(0.01, 1.0)),
       st.integers(0, 1000))
def test_estimators_agree_without_coherences(weights, seed):
    phases = np.exp(2j * np.pi * np.random.default_rng(seed).random(len(weights)))
    beta = np.diag(np.sqrt(weights / weights.sum()) * phases)
    exact = renyi2_exact(beta).s2
    assert renyi2_diagonal(ordered_gamma(beta)).s2 == pytest.approx(exact, abs=1e-10)


@given(st.integers(2, 6), st.integers(0, 10_000))
def test_entropy_range(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    beta = (x + x.T) / 2
    beta /= np.linalg.norm(beta)
    for res in (renyi2_exact(beta), renyi2_diagonal(ordered_gamma(beta))):
        assert -1e-10 <= res.s2 <= np.log(n) + 1e-10


@given(st.integers(2, 5), st.integers(0, 10_000))
def test_density_route_matches_amplitudes(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    beta = (x + x.T) / 2
    beta /= np.linalg.norm(beta)
    rho2 = 0.3 * np.outer(beta.ravel(), beta.ravel().conj())
    res = renyi2_from_density(rho2)
    assert res.s2 == pytest.approx(renyi2_exact(beta).s2, abs=1e-12)
    assert res.survival_p2 == pytest.approx(0.3)
    np.testing.assert_allclose(reduced_from_density(rho2 / 0.3), reduced_from_amplitudes(beta), atol=1e-12)
    assert renyi(reduced_from_amplitudes(beta), 2) == pytest.approx(res.s2, abs=1e-12)


def test_renyi_orders():
    rho = np.diag([0.5, 0.25, 0.25])
    assert renyi(rho, 1) == pytest.approx(-(0.5 * np.log(0.5) + 0.5 * np.log(0.25)))
    assert renyi(rho, 2) == pytest.approx(-np.log(0.375))
    with pytest.raises(DomainError):
        renyi2_from_density(np.zeros((4, 4)))


def test_normalized_entropy():
    assert normalized_entropy(0.7, 0.7) == 0
    assert normalized_entropy(0.5, 0.7) == pytest.approx(-0.2)


def test_similarity_examples():
    assert similarity_single([1, 2, 3], [1, 2, 3]) == pytest.approx(1)
    assert similarity_single([1, 0], [0, 1]) == 0
    assert similarity_single([1, 0], [0.5, 0.5]) == pytest.approx(0.5)
    for bad in ([0, 0], [1, -1]):
        with pytest.raises(DomainError):
            similarity_single(bad, [1, 1])
    with pytest.raises(DomainError):
        similarity_single([1, 1], [1, 1, 1])


@given(arrays(float, 6, elements=st.floats(0.0, 1.0)), arrays(float, 6, elements=st.floats(0.0, 1.0)),
       st.permutations(range(6)), st.floats(0.01, 100.0))
def test_similarity_properties(p, q, perm, c):
    if p.sum() == 0 or q.sum() == 0:
        return
    qs = similarity_single(p, q)
    assert -1e-12 <= qs <= 1 + 1e-12
    assert similarity_single(q, p) == pytest.approx(qs)
    assert similarity_single(p[list(perm)], q[list(perm)]) == pytest.approx(qs)
    assert similarity_single(c * p, q) == pytest.approx(qs)


def test_similarity_pair():
    g = CorrelationMatrix(np.array([[0.2, 0.1], [0.1, 0.0]]), 0.4)
    assert similarity_pair(g, g) == pytest.approx(1)
    assert similarity_pair(g, CorrelationMatrix(3 * g.gamma, 1.2)) == pytest.approx(1)
    other = CorrelationMatrix(np.array([[0.0, 0.0], [0.0, 1.0]]), 1.0)
    assert similarity_pair(g, other) == 0


@pytest.fixture(scope="module")
def curves():
    from nhwalk.lattice import reference_lattice
    spec = reference_lattice()
    return {phi: entropy_curve(spec.with_(phase_phi=phi), 4, 5, 15, method="transmission")
            for phi in (0.0, np.pi / 8, np.pi / 4, np.pi / 2)}


def test_entropy_suppressed_by_skin_effect(curves):
    s = {phi: c.s2 for phi, c in curves.items()}
    assert normalized_entropy(s[np.pi / 8][6], s[np.pi / 2][6]) < 0
    for k in (10, 12, 15):
        assert s[0.0][k] < s[np.pi / 4][k] < s[np.pi / 2][k]
        strong = normalized_entropy(s[np.pi / 8][k], s[np.pi / 2][k])
        weak = normalized_entropy(s[np.pi / 4][k], s[np.pi / 2][k])
        assert abs(strong) >= abs(weak)


def test_entropy_curve_bounds(curves):
    for c in curves.values():
        assert c.s2[0] == pytest.approx(0, abs=1e-12)  # |1_5 1_6> has f concentrated on one site
        assert np.all(c.s2 <= np.log(9) + 1e-10)
        assert np.all(np.diff(c.survival_p2) <= 1e-12)

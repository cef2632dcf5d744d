import json

import numpy as np
import pytest

from mongesphere.errors import ValidationError
from mongesphere.qstate import (DensityMatrix, PureState, basis_state,
                                bures_distance, fubini_study, haar_pure,
                                hs_distance, jx_matrix, jy_matrix, jz_matrix,
                                kicked_step, maximally_mixed, named_state,
                                pole_mixture, random_mixed, trace_distance)

RNG = np.random.default_rng(2024)


def _pure_density(n, rng=RNG):
    return haar_pure(rng, n).to_density()


def test_trace_distance_examples():
    e1 = basis_state(2, 2).to_density()
    e2 = basis_state(2, 0).to_density()
    assert trace_distance(e1, e2) == pytest.approx(2.0, abs=1e-12)
    rho = random_mixed(RNG, 4)
    assert trace_distance(rho, rho) == 0.0
    psi = _pure_density(3)
    assert trace_distance(psi, maximally_mixed(3)) == pytest.approx(4 / 3, abs=1e-12)


def test_hs_distance_examples():
    e1 = basis_state(4, 4).to_density()
    e2 = basis_state(4, 2).to_density()
    assert hs_distance(e1, e2) == pytest.approx(np.sqrt(2), abs=1e-12)
    for n in range(2, 7):
        for _ in range(20):
            psi = _pure_density(n)
            assert hs_distance(psi, maximally_mixed(n)) == pytest.approx(
                np.sqrt(1 - 1 / n), abs=1e-10)


def test_bures_distance_examples():
    psi = _pure_density(2)
    assert bures_distance(psi, maximally_mixed(2)) == pytest.approx(
        np.sqrt(2 - np.sqrt(2)), abs=1e-12)
    rho = random_mixed(RNG, 3)
    assert bures_distance(rho, rho) == pytest.approx(0.0, abs=1e-7)


def test_pure_pair_formulas_match_matrix_level():
    # closed forms in the transition probability p for random pure pairs
    for n in (2, 3, 5):
        for _ in range(25):
            a = haar_pure(RNG, n)
            b = haar_pure(RNG, n)
            p = abs(a.overlap(b)) ** 2
            ra, rb = a.to_density(), b.to_density()
            assert trace_distance(ra, rb) == pytest.approx(
                2 * np.sqrt(1 - p), rel=1e-10)
            assert hs_distance(ra, rb) == pytest.approx(
                np.sqrt(2 * (1 - p)), rel=1e-10)
            assert bures_distance(ra, rb) == pytest.approx(
                np.sqrt(2 * (1 - np.sqrt(p))), rel=1e-8)


def test_fubini_study():
    a = haar_pure(RNG, 4)
    assert fubini_study(a, a) == pytest.approx(0.0, abs=1e-7)
    e1, e2 = basis_state(6, 6), basis_state(6, 4)
    assert fubini_study(e1, e2) == pytest.approx(np.pi)
    # p = cos^2(Xi/2) gives angle Xi
    for xi in (0.3, 1.0, 2.5):
        amp = np.zeros(2, dtype=complex)
        amp[0], amp[1] = np.cos(xi / 2), np.sin(xi / 2)
        assert fubini_study(basis_state(1, 1), PureState(amp)) == pytest.approx(
            xi, abs=1e-12)


def test_metric_axioms_on_sampled_triples():
    states = [random_mixed(RNG, 3) for _ in range(8)] + [_pure_density(3) for _ in range(4)]
    for dist in (trace_distance, hs_distance, bures_distance):
        for _ in range(60):
            a, b, c = (states[k] for k in RNG.integers(0, len(states), 3))
            assert dist(a, b) == dist(b, a)
            assert dist(a, b) + dist(b, c) - dist(a, c) >= -1e-12
        for s in states[:4]:
            assert dist(s, s) <= 1e-6


def test_kicked_step_commuting_and_eigenstate():
    rho = pole_mixture(3, 0.7)
    h = np.asarray(jz_matrix(3))
    stepped = kicked_step(rho, 0.8 * h)
    assert np.allclose(stepped.mat, rho.mat, atol=1e-12)
    plus = basis_state(2, 2).to_density()
    assert np.allclose(kicked_step(plus, 1.3 * np.asarray(jz_matrix(2))).mat,
                       plus.mat, atol=1e-12)


def test_kicked_step_preserves_spectrum_and_distances():
    for _ in range(10):
        rho1 = random_mixed(RNG, 4)
        rho2 = random_mixed(RNG, 4)
        g = RNG.standard_normal((4, 4)) + 1j * RNG.standard_normal((4, 4))
        h = g + g.conj().T
        r1p, r2p = kicked_step(rho1, h), kicked_step(rho2, h)
        assert np.allclose(np.sort(r1p.eigvals()), np.sort(rho1.eigvals()),
                           atol=1e-12)
        for dist in (trace_distance, hs_distance, bures_distance):
            assert dist(r1p, r2p) == pytest.approx(dist(rho1, rho2), abs=1e-10)


def test_kicked_step_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        kicked_step(maximally_mixed(2), np.array([[0, 1], [0, 0]], dtype=complex))


def test_named_state_catalog():
    assert np.allclose(named_state("star", 2).mat, np.eye(3) / 3)
    half = named_state("mix:0.5", 1)
    assert np.allclose(half.mat, np.eye(2) / 2)  # equals the maximally mixed state
    coh0 = named_state("coh:0,0", 3)
    assert np.allclose(coh0.mat, named_state("plus", 3).mat, atol=1e-14)
    jm = named_state("jm:1/2", 3)
    assert jm.mat[1, 1] == pytest.approx(1.0)


def test_named_state_errors():
    with pytest.raises(ValidationError):
        named_state("graveyard", 2)
    with pytest.raises(ValidationError):
        named_state("mix:1.2", 2)
    with pytest.raises(ValidationError):
        named_state("coh:4.0,0", 2)  # theta beyond pi
    with pytest.raises(ValidationError):
        named_state("jm:5/2", 3)


def test_density_matrix_json_roundtrip():
    rho = random_mixed(RNG, 3)
    text = rho.to_json()
    obj = json.loads(text)
    assert obj["dim"] == 3
    back = DensityMatrix.from_json(text)
    assert np.allclose(back.mat, rho.mat, atol=1e-15)


def test_density_matrix_invariants():
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))  # not Hermitian
    with pytest.raises(ValidationError):
        DensityMatrix(np.eye(2))  # trace 2
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.5, -0.5]))  # negative eigenvalue
    with pytest.raises(ValidationError):
        PureState(np.array([1.0, 1.0]))  # not normalized


def test_angular_momentum_algebra():
    for two_j in (1, 2, 5):
        jx, jy, jz = jx_matrix(two_j), jy_matrix(two_j), jz_matrix(two_j)
        comm = jx @ jy - jy @ jx
        assert np.allclose(comm, 1j * jz, atol=1e-12)
        j = two_j / 2
        casimir = jx @ jx + jy @ jy + jz @ jz
        assert np.allclose(casimir, j * (j + 1) * np.eye(two_j + 1), atol=1e-12)


def test_standard_triangle_shapes_from_star():
    # pole states and the maximally mixed state: a metric line for N=2,
    # an isosceles triangle for N>2, equilateral in the large-N limit
    n = 2
    plus, minus, star = (named_state(s, n - 1) for s in ("plus", "minus", "star"))
    assert trace_distance(plus, minus) == pytest.approx(
        trace_distance(plus, star) + trace_distance(star, minus), abs=1e-12)
    for two_j in (2, 3, 6):
        n = two_j + 1
        plus, minus, star = (named_state(s, two_j) for s in ("plus", "minus", "star"))
        d_pm = trace_distance(plus, minus)
        d_ps = trace_distance(plus, star)
        assert d_ps == pytest.approx(trace_distance(minus, star), abs=1e-12)
        assert d_pm > d_ps  # isosceles, not a line
        assert d_pm == pytest.approx(2.0, abs=1e-12)
        assert d_ps == pytest.approx(2 - 2 / n, abs=1e-12)
    # ratio tends to 1: equilateral in the limit
    assert (2 - 2 / 101) / 2.0 > 0.98

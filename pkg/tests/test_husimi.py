import numpy as np
import pytest

from mongesphere.errors import ValidationError
from mongesphere.husimi import (coherent_amplitudes, coherent_matrix,
                                coherent_wehrl_minimum, husimi, mean_wehrl,
                                wehrl_entropy, wehrl_entropy_pure_batch)
from mongesphere.qstate import (basis_state, haar_pure, maximally_mixed,
                                named_state, random_mixed, rotation_z,
                                apply_unitary)
from mongesphere.sphere import build_grid, default_grid, geodesic_matrix

RNG = np.random.default_rng(7)


def test_coherent_amplitudes_at_poles():
    for two_j in (1, 2, 7):
        north = coherent_amplitudes(two_j, 0.0, 1.234)
        assert north.amplitudes[0] == pytest.approx(1.0)
        assert np.allclose(north.amplitudes[1:], 0.0)
        south = coherent_amplitudes(two_j, np.pi, 0.456)
        assert abs(south.amplitudes[-1]) == pytest.approx(1.0)
        assert np.allclose(south.amplitudes[:-1], 0.0)


def test_coherent_unit_norm():
    thetas = RNG.uniform(0, np.pi, 50)
    phis = RNG.uniform(0, 2 * np.pi, 50)
    for two_j in (1, 3, 10, 25):
        a = coherent_matrix(two_j, thetas, phis)
        assert np.allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)


def test_coherent_overlap_law():
    # |<eta'|eta>|^2 = cos^(4j)(Xi/2)
    for two_j in (1, 2, 5, 9):
        for _ in range(20):
            t1, p1, t2, p2 = (RNG.uniform(0, np.pi), RNG.uniform(0, 2 * np.pi),
                              RNG.uniform(0, np.pi), RNG.uniform(0, 2 * np.pi))
            a = coherent_amplitudes(two_j, t1, p1)
            b = coherent_amplitudes(two_j, t2, p2)
            xi = geodesic_matrix([t1], [p1], [t2], [p2])[0, 0]
            assert abs(a.overlap(b)) ** 2 == pytest.approx(
                np.cos(xi / 2) ** (2 * two_j), abs=1e-12)


def test_husimi_of_maximally_mixed_is_uniform():
    field = husimi(maximally_mixed(4), 3)
    pts = RNG.uniform(0, np.pi, 20), RNG.uniform(0, 2 * np.pi, 20)
    assert np.allclose(field.values(*pts), 1.0, atol=1e-12)


def test_husimi_coherent_formula_and_antipode():
    two_j = 4
    t0, p0 = 1.1, 0.7
    rho = coherent_amplitudes(two_j, t0, p0).to_density()
    field = husimi(rho, two_j)
    ts = RNG.uniform(0, np.pi, 30)
    ps = RNG.uniform(0, 2 * np.pi, 30)
    xi = geodesic_matrix(ts, ps, [t0], [p0])[:, 0]
    expected = (two_j + 1) * np.cos(xi / 2) ** (2 * two_j)
    assert np.allclose(field.values(ts, ps), expected, atol=1e-12)
    anti = field.values([np.pi - t0], [p0 + np.pi])
    assert abs(anti[0]) < 1e-12


def test_husimi_dimension_mismatch():
    with pytest.raises(ValidationError):
        husimi(maximally_mixed(3), 3)


def test_normalization_invariant_random_states():
    g = default_grid()
    for n in range(2, 9):
        for _ in range(50):
            rho = random_mixed(RNG, n)
            field = husimi(rho, n - 1, validate=False)
            assert g.integrate(field.on_grid(g)) == pytest.approx(1.0, abs=1e-10)


def test_positivity_on_grid():
    g = default_grid()
    for n in (2, 5, 8):
        rho = random_mixed(RNG, n)
        vals = husimi(rho, n - 1, validate=False).on_grid(g)
        assert vals.min() >= -1e-12


def test_rotational_covariance_about_z():
    two_j = 3
    rho = random_mixed(RNG, two_j + 1)
    alpha = 0.9
    rotated = apply_unitary(rho, rotation_z(two_j, alpha))
    f0 = husimi(rho, two_j, validate=False)
    f1 = husimi(rotated, two_j, validate=False)
    ts = RNG.uniform(0, np.pi, 25)
    ps = RNG.uniform(0, 2 * np.pi, 25)
    assert np.allclose(f1.values(ts, ps), f0.values(ts, ps - alpha), atol=1e-10)


def test_wehrl_entropy_of_star_is_zero():
    for n in (2, 4, 7):
        assert abs(wehrl_entropy(maximally_mixed(n), n - 1)) < 1e-13


def test_wehrl_entropy_coherent_minimum():
    # pole-centered coherent state: the log point of the integrand sits at
    # the south pole where the quadrature row never lands
    grid = build_grid("gauss-product", 400, 32)
    for n in range(2, 9):
        rho = coherent_amplitudes(n - 1, 0.0, 0.0).to_density()
        s = wehrl_entropy(rho, n - 1, grid)
        assert s == pytest.approx(coherent_wehrl_minimum(n), abs=1e-8)
    # direction independence (off-pole states carry the Husimi zero into the
    # grid interior, limiting plain quadrature to ~1e-6)
    s_off = wehrl_entropy(coherent_amplitudes(3, 0.8, 2.0).to_density(), 3,
                          build_grid("gauss-product", 400, 128))
    assert s_off == pytest.approx(coherent_wehrl_minimum(4), abs=1e-5)


def test_wehrl_lower_bound_probe():
    # at N=2 every pure state sits exactly at the bound, so the quadrature
    # itself must stay below the 1e-8 slack for the worst of 100 random
    # directions of the Husimi zero
    grid = build_grid("gauss-product", 512, 256)
    for n in range(2, 7):
        amps = np.array([haar_pure(RNG, n).amplitudes for _ in range(100)])
        entropies = wehrl_entropy_pure_batch(amps, n - 1, grid)
        assert entropies.min() >= coherent_wehrl_minimum(n) - 1e-8
        assert entropies.max() <= 1e-5  # at most quadrature error above zero


def test_mean_wehrl_closed_values():
    assert mean_wehrl(1) == 0.0
    assert mean_wehrl(2) == pytest.approx(0.5 - np.log(2), abs=1e-14)
    assert mean_wehrl(3) == pytest.approx(-np.log(3) + 5 / 6, abs=1e-14)
    # approaches euler_gamma - 1 from below as N grows
    assert mean_wehrl(10 ** 6) == pytest.approx(np.euler_gamma - 1.0, abs=1e-5)


def test_monte_carlo_mean_matches_haar_average():
    # digamma-sum oracle vs sampled mean, three sigma band
    for n in (3, 5):
        amps = np.array([haar_pure(RNG, n).amplitudes for _ in range(600)])
        entropies = wehrl_entropy_pure_batch(amps, n - 1)
        mean = entropies.mean()
        stderr = entropies.std(ddof=1) / np.sqrt(len(entropies))
        assert abs(mean - mean_wehrl(n)) < 3 * stderr


def test_named_coherent_state_matches_plus():
    assert np.allclose(named_state("coh:0,0", 5).mat,
                       basis_state(5, 5).to_density().mat, atol=1e-14)

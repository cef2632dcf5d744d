import math

import numpy as np
import pytest
from scipy.special import gammaln

from mongesphere.errors import PathRefusal, ValidationError
from mongesphere.husimi import husimi
from mongesphere.monge_analytic import (a_uv, a_uv_series, bloch_vector,
                                        build_w_polynomial,
                                        coherent_pair_distance,
                                        coherent_pair_cap, coherent_pair_slope,
                                        coherent_to_star, eigenstate_distance,
                                        eigenstate_gap, mixture_line_distance,
                                        monge_bloch, monge_prop6,
                                        monge_symmetric, pole_distance,
                                        prop2_upper_bound, radial_cdf,
                                        salvemini, zero_state_to_star)
from mongesphere.qstate import (DensityMatrix, named_state, pole_mixture,
                                random_mixed)

RNG = np.random.default_rng(11)


# ---------------------------------------------------------------------------
# 1-d transport

def test_salvemini_trivial_and_point_masses():
    f = lambda x: np.clip(x, 0.0, 1.0)
    assert salvemini(f, f, 0.0, 1.0) == 0.0
    a, b = 0.3, 0.8
    fa = lambda x: float(x >= a)
    fb = lambda x: float(x >= b)
    assert salvemini(fa, fb, 0.0, 1.0) == pytest.approx(abs(a - b), abs=1e-8)


def test_salvemini_pole_state_vs_star():
    # colatitude marginals at j=1/2: the distance from either pole state to
    # the flat state is pi/8
    f_plus = husimi(named_state("plus", 1), 1)
    f_star = husimi(named_state("star", 1), 1)
    cdf_plus = radial_cdf(f_plus)
    cdf_star = radial_cdf(f_star)
    assert salvemini(cdf_plus, cdf_star, 0.0, np.pi) == pytest.approx(
        np.pi / 8, abs=1e-9)


# ---------------------------------------------------------------------------
# symmetric reduction

def test_monge_symmetric_values():
    assert monge_symmetric(named_state("plus", 1), named_state("minus", 1), 1) \
        == pytest.approx(np.pi / 4, abs=1e-12)
    assert monge_symmetric(named_state("plus", 2), named_state("star", 2), 2) \
        == pytest.approx(3 * np.pi / 16, abs=1e-12)
    assert monge_symmetric(named_state("jm:0", 2), named_state("star", 2), 2) \
        == pytest.approx(1 / 6, abs=1e-12)


def test_monge_symmetric_refuses_asymmetric_fields():
    tilted = named_state(f"coh:{np.pi / 3},0", 2)
    with pytest.raises(PathRefusal, match="phi"):
        monge_symmetric(tilted, named_state("star", 2), 2)


def test_metric_line_additivity_of_pole_mixtures():
    for two_j in (1, 2, 4, 6):
        full = monge_symmetric(named_state("plus", two_j),
                               named_state("minus", two_j), two_j)
        for a in (0.0, 0.25, 0.5, 0.75, 1.0):
            mix = pole_mixture(two_j, a)
            d_plus = monge_symmetric(named_state("plus", two_j), mix, two_j) \
                if a < 1.0 else 0.0
            d_minus = monge_symmetric(mix, named_state("minus", two_j), two_j) \
                if a > 0.0 else 0.0
            assert d_plus == pytest.approx((1 - a) * full, abs=1e-8)
            assert d_minus == pytest.approx(a * full, abs=1e-8)


def test_j1_diagonal_mixture_line():
    # diag(a, b, c) lies between the pole states: distance from the top
    # coherent state is (3 pi / 16) (2 - b - 2a)
    for _ in range(8):
        w = RNG.dirichlet(np.ones(3))
        rho = DensityMatrix(np.diag(w))
        got = monge_symmetric(named_state("plus", 2), rho, 2)
        assert got == pytest.approx((3 * np.pi / 16) * (2 - w[1] - 2 * w[0]),
                                    abs=1e-8)


# ---------------------------------------------------------------------------
# meridian reduction

def test_prop6_identical_states():
    rho = random_mixed(RNG, 3)
    assert monge_prop6(rho, rho, 2) == pytest.approx(0.0, abs=1e-12)


def test_prop6_coherent_pairs_j_half():
    for xi in (np.pi, 2.0, 1.0, 0.4):
        r1 = named_state(f"coh:{(np.pi - xi) / 2},0", 1)
        r2 = named_state(f"coh:{(np.pi + xi) / 2},0", 1)
        assert monge_prop6(r1, r2, 1) == pytest.approx(
            (np.pi / 4) * np.sin(xi / 2), abs=1e-12)


def test_prop6_covers_criterion_values():
    cases = [
        ("plus", "minus", 1, np.pi / 4),
        ("plus", "star", 2, 3 * np.pi / 16),
        ("plus", "jm:0", 2, 3 * np.pi / 16),
        ("plus", "minus", 2, 3 * np.pi / 8),
    ]
    for s1, s2, two_j, expect in cases:
        got = monge_prop6(named_state(s1, two_j), named_state(s2, two_j), two_j)
        assert got == pytest.approx(expect, abs=1e-10)


def test_prop6_refuses_crossing_cumulatives():
    with pytest.raises(PathRefusal, match="assumption 2"):
        monge_prop6(named_state("star", 2), named_state("jm:0", 2), 2)


def test_prop6_agrees_with_colatitude_certificate():
    # the meridian double integral equals the expectation of the colatitude
    # difference, the dual value of the 1-Lipschitz witness f = -theta
    from mongesphere.sphere import default_grid
    g = default_grid()
    r1 = named_state("plus", 3)
    r2 = named_state("star", 3)
    val = monge_prop6(r1, r2, 3)
    h1 = husimi(r1, 3).on_grid(g)
    h2 = husimi(r2, 3).on_grid(g)
    dual = g.integrate(g.theta * (h2 - h1))
    assert val == pytest.approx(dual, abs=1e-10)


# ---------------------------------------------------------------------------
# Bloch ball

def test_monge_bloch_values():
    plus, minus = named_state("plus", 1), named_state("minus", 1)
    assert monge_bloch(plus, minus) == pytest.approx(np.pi / 4, abs=1e-15)
    rho = random_mixed(RNG, 2)
    assert monge_bloch(rho, rho) == 0.0
    with pytest.raises(ValidationError):
        monge_bloch(named_state("star", 2), named_state("plus", 2))


def test_monge_bloch_matches_meridian_reduction():
    for _ in range(6):
        r1 = random_mixed(RNG, 2)
        r2 = random_mixed(RNG, 2)
        expect = 0.25 * np.pi * np.linalg.norm(bloch_vector(r1) - bloch_vector(r2))
        assert monge_bloch(r1, r2) == pytest.approx(expect, abs=1e-14)
        try:
            via_meridian = monge_prop6(r1, r2, 1)
        except PathRefusal:
            continue
        assert via_meridian == pytest.approx(expect, abs=1e-9)


# ---------------------------------------------------------------------------
# eigenstate closed forms

def test_eigenstate_gap_values():
    assert eigenstate_gap(2, 2) == pytest.approx(3 * np.pi / 16, abs=1e-14)
    assert eigenstate_gap(3, 3) == pytest.approx(5 * np.pi / 32, abs=1e-14)
    assert eigenstate_gap(4, 2) == pytest.approx(15 * np.pi / 128, abs=1e-14)
    assert eigenstate_gap(4, 4) == pytest.approx(35 * np.pi / 256, abs=1e-14)
    assert eigenstate_gap(3, 1) == pytest.approx(9 * np.pi / 64, abs=1e-14)
    with pytest.raises(ValidationError):
        eigenstate_gap(2, -2)  # m = -j has no lower neighbour
    with pytest.raises(ValidationError):
        eigenstate_gap(2, 3)


def test_eigenstate_distance_line():
    assert eigenstate_distance(4, 2, 2) == 0.0
    assert eigenstate_distance(1, 1, -1) == pytest.approx(np.pi / 4, abs=1e-14)
    # the full line for j=2: sum of four gaps equals the closed form
    total = eigenstate_distance(4, 4, -4)
    assert total == pytest.approx(np.pi * (1 - 252 / 512), abs=1e-13)
    assert total == pytest.approx(pole_distance(4), abs=1e-13)


def test_coherent_to_star_values():
    assert coherent_to_star(1) == pytest.approx(np.pi / 8, abs=1e-14)
    assert coherent_to_star(2) == pytest.approx(3 * np.pi / 16, abs=1e-14)
    assert coherent_to_star(4) == pytest.approx(65 * np.pi / 256, abs=1e-14)
    for two_j in (1, 2, 3, 5):
        assert coherent_to_star(two_j) == pytest.approx(
            0.5 * eigenstate_distance(two_j, two_j, -two_j), abs=1e-13)


def test_closed_forms_match_quadrature():
    for two_j in (1, 2, 3, 4, 5):
        got = monge_symmetric(named_state("plus", two_j),
                              named_state("minus", two_j), two_j)
        assert got == pytest.approx(pole_distance(two_j), abs=1e-7)
        got = monge_symmetric(named_state("plus", two_j),
                              named_state("star", two_j), two_j)
        assert got == pytest.approx(coherent_to_star(two_j), abs=1e-7)


def test_zero_state_to_star():
    assert zero_state_to_star(1) == pytest.approx(1 / 6, abs=1e-15)
    assert zero_state_to_star(2) == pytest.approx(29 / 120, abs=1e-15)
    assert abs(zero_state_to_star(500) - (np.pi / 2 - 1)) < 0.05
    with pytest.raises(ValidationError):
        zero_state_to_star(0)
    # agreement with the quadrature route
    for j in (1, 2):
        got = monge_symmetric(named_state("jm:0", 2 * j),
                              named_state("star", 2 * j), 2 * j)
        assert got == pytest.approx(zero_state_to_star(j), abs=1e-9)


def test_four_digit_reference_values():
    # no closed form is known for these two; the quadrature value is pinned
    # to the printed 4-digit references
    d_half = monge_symmetric(named_state("jm:1/2", 3), named_state("star", 3), 3)
    assert round(d_half, 4) == 0.2737
    d_one = monge_symmetric(named_state("jm:1", 4), named_state("star", 4), 4)
    assert round(d_one, 4) == 0.3909
    assert monge_symmetric(named_state("jm:-1", 4), named_state("star", 4), 4) \
        == pytest.approx(d_one, abs=1e-9)


# ---------------------------------------------------------------------------
# the coherent-pair polynomial

def test_w_polynomial_small_cases():
    assert build_w_polynomial(1).coeffs == pytest.approx((0.25,), abs=1e-15)
    assert build_w_polynomial(2).coeffs == pytest.approx((0.375,), abs=1e-15)
    assert build_w_polynomial(3).coeffs == pytest.approx(
        (57 / 128, 1 / 128), abs=1e-14)
    assert build_w_polynomial(4).coeffs == pytest.approx(
        (125 / 256, 5 / 256), abs=1e-14)


def test_w_polynomial_positivity_and_degree():
    for two_j in range(1, 41):
        w = build_w_polynomial(two_j)
        assert all(c > 0 for c in w.coeffs)
        assert w.degree == (two_j - 1) // 2


def _hyp3f2_terminating(a_list, b_list):
    # partial-sum evaluation; one of the numerator parameters is a
    # nonpositive integer or half-integer making the series terminate
    total, term, k = 0.0, 1.0, 0
    while True:
        total += term
        if any(abs(a + k) < 1e-12 for a in a_list):
            break
        term *= (a_list[0] + k) * (a_list[1] + k) * (a_list[2] + k)
        term /= (b_list[0] + k) * (b_list[1] + k) * (k + 1.0)
        k += 1
        if k > 500:
            break
    return total


def test_w_endpoints_match_hypergeometric_sums():
    for two_j in range(1, 10):
        j = two_j / 2
        pref = j * (two_j + 1) / 2 ** (two_j + 1)
        c_j = pref * _hyp3f2_terminating([1.5, 0.5 - j, 1 - j], [2.0, 2.0])
        d_j = pref * (2 * _hyp3f2_terminating([1.0, 0.5 - j, 1 - j], [2.0, 1.5])
                      - _hyp3f2_terminating([1.0, 0.5 - j, 1 - j], [2.0, 2.0]))
        assert coherent_pair_slope(two_j) == pytest.approx(c_j, abs=1e-10)
        assert coherent_pair_cap(two_j) == pytest.approx(d_j, abs=1e-10)


def test_w_endpoint_limits():
    # the slope constant climbs to 2/pi and the cap to 1; the cap approaches
    # like 2/sqrt(pi N), so the gap is still ~0.18 at 2j = 40
    slopes = [coherent_pair_slope(two_j) for two_j in range(1, 41)]
    caps = [coherent_pair_cap(two_j) for two_j in range(1, 41)]
    assert all(b > a for a, b in zip(slopes, slopes[1:]))
    assert all(b > a for a, b in zip(caps, caps[1:]))
    assert slopes[-1] < 2 / np.pi < slopes[-1] + 0.02
    assert caps[-1] < 1.0
    n = 41
    assert 1.0 - caps[-1] == pytest.approx(2 / np.sqrt(np.pi * n), rel=0.1)


def test_a_uv_series_agreement():
    # the raw tail decays like s^(-3/2), so 1e4 terms alone stop near 1e-2;
    # Richardson extrapolation in powers of S^(-1/2) over the same 1e4 terms
    # recovers the limit to better than 1e-10
    def extrapolated(u, v, total=10_000):
        counts = [total // 16, total // 8, total // 4, total // 2, total]
        sums = [a_uv_series(u, v, terms=c) for c in counts]
        powers = (0.5, 1.5, 2.5, 3.5)
        m = np.array([[1.0] + [c ** (-e) for e in powers] for c in counts])
        return float(np.linalg.solve(m, np.array(sums))[0])

    for u in range(7):
        for v in range(7):
            limit = a_uv(u, v)
            assert extrapolated(u, v) == pytest.approx(limit, abs=1e-10)
            # raw partial sums increase toward the limit from below
            p1, p2 = a_uv_series(u, v, 100), a_uv_series(u, v, 10_000)
            assert p1 < p2 < limit


def test_coherent_pair_distance_values():
    assert coherent_pair_distance(3, 0.0) == 0.0
    for xi in (0.5, 1.5, 3.0):
        assert coherent_pair_distance(2, xi) == pytest.approx(
            (3 * np.pi / 8) * np.sin(xi / 2), abs=1e-14)
    assert coherent_pair_distance(1, np.pi) == pytest.approx(np.pi / 4, abs=1e-14)
    with pytest.raises(ValidationError):
        coherent_pair_distance(2, 4.0)


def test_coherent_pair_bounds_and_semiclassics():
    xis = np.linspace(0.1, np.pi, 12)
    prev = None
    for two_j in range(1, 41):
        c0, c1 = coherent_pair_slope(two_j), coherent_pair_cap(two_j)
        vals = np.array([coherent_pair_distance(two_j, x) for x in xis])
        sin_half = np.sin(xis / 2)
        assert np.all(vals <= np.pi * c1 * sin_half + 1e-12)
        assert np.all(vals >= np.pi * c0 * sin_half - 1e-12)
        # semiclassical condition: never exceeds the geodesic angle,
        # and approaches it monotonically in j
        assert np.all(vals <= xis + 1e-12)
        if prev is not None:
            assert np.all(vals >= prev - 1e-12)
        prev = vals
    # antipodal gap closes like 2 sqrt(pi/N)
    assert np.pi - prev[-1] == pytest.approx(2 * np.sqrt(np.pi / 41), rel=0.1)
    # small angles are already nearly classical at 2j = 40
    assert prev[0] >= 0.98 * xis[0]


def test_small_angle_slope():
    xi = 1e-4
    for two_j in (1, 2, 5, 9):
        expect = 0.5 * np.pi * coherent_pair_slope(two_j) * xi
        got = coherent_pair_distance(two_j, xi)
        assert got == pytest.approx(expect, rel=1e-6)


def test_mixture_line_distance_endpoints():
    for two_j in (1, 3):
        assert mixture_line_distance(two_j, 1.0, 0.0) == pytest.approx(
            pole_distance(two_j))
        assert mixture_line_distance(two_j, 0.5, 0.5) == 0.0


def test_coherent_pair_consistency_with_meridian_reduction():
    for two_j in (1, 2, 3):
        for xi in (0.8, 2.0):
            r1 = named_state(f"coh:{(np.pi - xi) / 2},0", two_j)
            r2 = named_state(f"coh:{(np.pi + xi) / 2},0", two_j)
            assert monge_prop6(r1, r2, two_j) == pytest.approx(
                coherent_pair_distance(two_j, xi), abs=1e-9)


# ---------------------------------------------------------------------------
# L1 upper bound

def test_prop2_upper_bound():
    f_plus = husimi(named_state("plus", 1), 1)
    f_minus = husimi(named_state("minus", 1), 1)
    assert prop2_upper_bound(f_plus, f_plus) == pytest.approx(0.0, abs=1e-12)
    # the integrand |H1 - H2| = 2|cos(theta)| has a kink at the equator,
    # so plain grid quadrature carries ~1e-4 error there
    bound = prop2_upper_bound(f_plus, f_minus)
    assert bound == pytest.approx(np.pi / 2, abs=1e-3)
    assert bound >= np.pi / 4  # dominates the exact transport value
    for two_j in (1, 2, 3):
        f1 = husimi(named_state("plus", two_j), two_j)
        f2 = husimi(named_state("star", two_j), two_j)
        assert prop2_upper_bound(f1, f2) >= coherent_to_star(two_j)

import numpy as np
import pytest

from mongesphere.errors import ValidationError
from mongesphere.husimi import husimi
from mongesphere.qstate import named_state
from mongesphere.sphere import (SpherePoint, SphereGrid, build_grid, geodesic,
                                meridian_cdf)


def test_geodesic_examples():
    north = SpherePoint(0.0, 0.0)
    south = SpherePoint(np.pi, 1.3)  # pole phi is canonicalized away
    assert geodesic(north, south) == pytest.approx(np.pi, abs=1e-15)
    p = SpherePoint(1.1, 2.2)
    assert geodesic(p, p) == 0.0
    a = SpherePoint(np.pi / 2, 0.0)
    b = SpherePoint(np.pi / 2, np.pi / 2)
    assert geodesic(a, b) == pytest.approx(np.pi / 2, abs=1e-14)


def test_geodesic_is_metric_on_random_triples():
    rng = np.random.default_rng(42)
    pts = [SpherePoint(t, p) for t, p in
           zip(np.arccos(rng.uniform(-1, 1, 300)), rng.uniform(0, 2 * np.pi, 300))]
    worst = 0.0
    for _ in range(10_000):
        a, b, c = (pts[k] for k in rng.integers(0, 300, 3))
        dab, dba = geodesic(a, b), geodesic(b, a)
        assert dab == dba
        worst = min(worst, geodesic(a, c) + geodesic(c, b) - dab)
    assert worst >= -1e-12


def test_point_canonicalization_and_validation():
    p = SpherePoint(1.0, 2 * np.pi + 0.5)
    assert p.phi == pytest.approx(0.5)
    assert SpherePoint(0.0, 2.7).phi == 0.0
    with pytest.raises(ValidationError):
        SpherePoint(-0.1, 0.0)
    with pytest.raises(ValidationError):
        SpherePoint(np.pi + 0.1, 0.0)


def test_gauss_product_grid_construction():
    g = build_grid("gauss-product", 8)
    assert g.size == 8 * 16 == 128
    assert g.weight.sum() == pytest.approx(1.0, abs=1e-14)
    assert g.integrate(np.ones(g.size)) == pytest.approx(1.0, abs=1e-14)
    assert g.integrate(np.cos(g.theta)) == pytest.approx(0.0, abs=1e-12)


def test_fibonacci_grid():
    g = build_grid("fibonacci", 500)
    assert g.size == 500
    assert np.allclose(g.weight, 1 / 500)
    assert g.weight.sum() == pytest.approx(1.0, abs=1e-12)
    # equal-weight lattice integrates smooth functions decently
    assert g.integrate(np.cos(g.theta)) == pytest.approx(0.0, abs=1e-2)


def test_build_grid_validation():
    with pytest.raises(ValidationError):
        build_grid("icosahedral", 5)
    with pytest.raises(ValidationError):
        build_grid("gauss-product", 1)


def test_quadrature_exactness():
    # order-q nodes integrate cos^d(theta) x exp(i k phi) exactly for
    # d <= 2q-1 and |k| < phi-count / 2
    rng = np.random.default_rng(1)
    q, p = 12, 24
    g = build_grid("gauss-product", q, p)
    x = np.cos(g.theta)
    for _ in range(40):
        d = int(rng.integers(0, 2 * q))
        k = int(rng.integers(-(p // 2 - 1), p // 2))
        vals = x ** d * np.exp(1j * k * g.phi)
        got = np.dot(g.weight, vals)
        if k != 0:
            expected = 0.0
        else:
            expected = (1.0 + (-1.0) ** d) / (2.0 * (d + 1.0))
        assert abs(got - expected) < 1e-12


def test_grid_weight_normalization_across_kinds():
    for kind, res in (("gauss-product", 16), ("gauss-product", 33),
                      ("fibonacci", 100), ("fibonacci", 1001)):
        g = build_grid(kind, res)
        assert abs(g.weight.sum() - 1.0) < 1e-12


def test_duplicate_node_detection():
    theta = np.array([1.0, 1.0, 2.0])
    phi = np.array([0.5, 0.5 + 1e-12, 0.5])
    with pytest.raises(ValidationError):
        SphereGrid(theta, phi, np.full(3, 1 / 3))


def test_grid_csv_roundtrip():
    g = build_grid("gauss-product", 4, 8)
    lines = g.to_csv().strip().split("\n")
    assert lines[0] == "theta,phi,weight"
    theta0, phi0, w0 = (float(x) for x in lines[1].split(","))
    assert theta0 == g.theta[0] and phi0 == g.phi[0] and w0 == g.weight[0]


def test_meridian_cdf_uniform_density():
    f = lambda th, ph: np.ones_like(th)
    for phi in (0.0, 1.0, 4.0):
        assert meridian_cdf(f, phi, np.pi) == pytest.approx(1.0, abs=1e-13)
    assert meridian_cdf(f, 0.3, np.pi / 2) == pytest.approx(0.5, abs=1e-13)
    assert meridian_cdf(f, 0.0, 0.0) == 0.0


def test_meridian_cdf_monotone_and_husimi_case():
    # pole state at j=1/2: full meridian integral is 1 for every phi
    field = husimi(named_state("plus", 1), 1)
    for phi in (0.0, 2.0):
        assert meridian_cdf(field.values, phi, np.pi) == pytest.approx(1.0, abs=1e-12)
    ts = np.linspace(0, np.pi, 30)
    vals = [meridian_cdf(field.values, 1.0, t) for t in ts]
    assert all(b - a >= -1e-12 for a, b in zip(vals, vals[1:]))


def test_meridian_cdf_rejects_negative_density():
    with pytest.raises(ValidationError):
        meridian_cdf(lambda th, ph: -np.ones_like(th), 0.0, 1.0)

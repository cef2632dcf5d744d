"""Closed-form Monge distances and exact one-dimensional reductions.

Covers the transport distance between rotationally symmetric states via the
cumulative-distribution (Salvemini) integral, the meridian reduction for
ordered cumulative functions, the Bloch-ball formula at N=2, closed forms for
angular-momentum eigenstates and coherent pairs, and the L1 upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import PathRefusal, SolverError, ValidationError
from .husimi import HusimiField, husimi
from .qstate import DensityMatrix, validate_two_j
from .sphere import SphereGrid, default_grid

PHI_SYMMETRY_TOL = 1e-8
PROP6_TOL = 1e-8


def _log_binom(n: float, k: float) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


# ---------------------------------------------------------------------------
# 1-d transport

def salvemini(cdf1, cdf2, lo: float, hi: float, tol: float = 1e-10) -> float:
    """L1 distance between two cumulative distribution functions on [lo, hi]."""
    val, err = quad(lambda x: abs(cdf1(x) - cdf2(x)), lo, hi, limit=400,
                    epsabs=tol, epsrel=tol)
    if not np.isfinite(val) or err > 1e-6 * (1.0 + abs(val)):
        raise SolverError(f"cdf quadrature did not converge (err {err:.2e})")
    return float(val)


def _phi_variation(field: HusimiField, n_theta: int = 32, n_phi: int = 16) -> float:
    thetas = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    tt = np.repeat(thetas, n_phi)
    pp = np.tile(phis, n_theta)
    vals = field.values(tt, pp).reshape(n_theta, n_phi)
    return float(np.max(vals.max(axis=1) - vals.min(axis=1)))


def radial_cdf(field: HusimiField, order: int = 96):
    """Cumulative colatitude marginal F(t) = int_0^t H(theta) sin(theta)/2 dtheta.

    Only meaningful for phi-independent fields; evaluates along phi = 0.
    Returns a vectorized callable on [0, pi].
    """
    x, w = leggauss(order)

    def cdf(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        nodes = 0.5 * t_arr[:, None] * (x[None, :] + 1.0)
        flat = nodes.ravel()
        vals = field.values(flat, np.zeros_like(flat)).reshape(nodes.shape)
        integ = 0.5 * (0.5 * t_arr) * np.sum(w[None, :] * vals * np.sin(nodes), axis=1)
        return integ if np.ndim(t) else float(integ[0])

    return cdf


def monge_symmetric(rho1: DensityMatrix, rho2: DensityMatrix, two_j: int,
                    order: int = 96, tol: float = PHI_SYMMETRY_TOL) -> float:
    """Transport distance for rotationally symmetric Husimi fields.

    Refuses with :class:`PathRefusal` when either field varies with phi
    beyond ``tol``; callers should fall back to the numeric solver.
    """
    two_j = validate_two_j(two_j)
    f1 = husimi(rho1, two_j, validate=False)
    f2 = husimi(rho2, two_j, validate=False)
    var = max(_phi_variation(f1), _phi_variation(f2))
    if var > tol:
        raise PathRefusal(
            f"Husimi field depends on phi (max variation {var:.2e} > {tol:.0e})")
    cdf1 = radial_cdf(f1, order=order)
    cdf2 = radial_cdf(f2, order=order)
    return _integrate_abs_diff(cdf1, cdf2, order=order)


def _integrate_abs_diff(cdf1, cdf2, order: int = 96, scan: int = 512) -> float:
    """int_0^pi |F1 - F2| via sign-segmented Gauss-Legendre quadrature."""
    ts = np.linspace(0.0, np.pi, scan + 1)
    g = cdf1(ts) - cdf2(ts)

    def diff(t):
        return cdf1(float(t)) - cdf2(float(t))

    cuts = [0.0]
    for k in range(scan):
        if g[k] == 0.0 and 0 < k:
            cuts.append(ts[k])
        elif g[k] * g[k + 1] < 0.0:
            cuts.append(float(brentq(diff, ts[k], ts[k + 1], xtol=1e-14)))
    cuts.append(np.pi)
    cuts = sorted(set(cuts))
    x, w = leggauss(order)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        nodes = 0.5 * (b - a) * (x + 1.0) + a
        seg = 0.5 * (b - a) * np.dot(w, cdf1(nodes) - cdf2(nodes))
        total += abs(seg)
    return float(total)


# ---------------------------------------------------------------------------
# meridian reduction (ordered cumulative functions)

def _meridian_table(field: HusimiField, t_nodes: np.ndarray, phis: np.ndarray,
                    inner_order: int = 96) -> np.ndarray:
    """F(t_k, phi_l) = (1/2) int_0^{t_k} H(theta, phi_l) sin(theta) dtheta."""
    x, w = leggauss(inner_order)
    theta = 0.5 * t_nodes[:, None] * (x[None, :] + 1.0)      # (nt, ni)
    nt, ni = theta.shape
    nphi = phis.size
    tt = np.repeat(theta.ravel(), nphi)
    pp = np.tile(phis, nt * ni)
    vals = field.values(tt, pp).reshape(nt, ni, nphi)
    integrand = vals * np.sin(theta)[:, :, None]
    return 0.5 * (0.5 * t_nodes)[:, None] * np.einsum("i,kil->kl", w, integrand)


def monge_prop6(rho1: DensityMatrix, rho2: DensityMatrix, two_j: int,
                check_points: int = 64, tol: float = PROP6_TOL,
                order: int = 96) -> float:
    """Meridian-by-meridian transport value for ordered cumulative functions.

    Requires (1) equal total meridian masses F1(pi, phi) = F2(pi, phi) and
    (2) F1 >= F2 everywhere (either ordering of the arguments).  Both are
    verified on a dense (t, phi) sample; violation raises PathRefusal naming
    the failed assumption.
    """
    two_j = validate_two_j(two_j)
    f1 = husimi(rho1, two_j, validate=False)
    f2 = husimi(rho2, two_j, validate=False)

    t_sample = np.pi * (np.arange(1, check_points + 1)) / check_points
    phi_sample = 2.0 * np.pi * np.arange(check_points) / check_points
    tab1 = _meridian_table(f1, t_sample, phi_sample, inner_order=order)
    tab2 = _meridian_table(f2, t_sample, phi_sample, inner_order=order)

    end_gap = float(np.max(np.abs(tab1[-1] - tab2[-1])))
    if end_gap > tol:
        raise PathRefusal(
            f"assumption 1 violated: meridian masses differ by {end_gap:.2e}")
    diff = tab1 - tab2
    if diff.min() >= -tol:
        sign = 1.0
    elif diff.max() <= tol:
        sign = -1.0
    else:
        raise PathRefusal(
            "assumption 2 violated: cumulative meridian functions cross "
            f"(min {diff.min():.2e}, max {diff.max():.2e})")

    # (1/2pi) * int dphi int_0^pi (F1 - F2) dt with product quadrature
    n_phi = max(128, 2 * two_j + 8)
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    x, w = leggauss(order)
    t_nodes = 0.5 * np.pi * (x + 1.0)
    g1 = _meridian_table(f1, t_nodes, phis, inner_order=order)
    g2 = _meridian_table(f2, t_nodes, phis, inner_order=order)
    phi_avg = np.mean(g1 - g2, axis=1)
    value = 0.5 * np.pi * float(np.dot(w, phi_avg))
    return sign * value


# ---------------------------------------------------------------------------
# Bloch ball, N = 2

_PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def bloch_vector(rho: DensityMatrix) -> np.ndarray:
    """Vector v with rho = I/2 + sigma . v (radius 1/2 for pure states)."""
    if rho.dim != 2:
        raise ValidationError("Bloch decomposition requires N = 2")
    return np.array([0.5 * np.trace(rho.mat @ s).real for s in _PAULI])


def monge_bloch(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """(pi/4) |v1 - v2|: the transport metric is Euclidean on the Bloch ball."""
    v1 = bloch_vector(rho1)
    v2 = bloch_vector(rho2)
    return float(0.25 * np.pi * np.linalg.norm(v1 - v2))


# ---------------------------------------------------------------------------
# closed forms for Jz eigenstates and mixtures of the pole states

def eigenstate_gap(two_j: int, two_m: int) -> float:
    """Distance pi binom(2(N-n), N-n) binom(2n, n) 2^(-2N) between |j,m> and |j,m-1>."""
    two_j = validate_two_j(two_j)
    two_m = int(two_m)
    if (two_j - two_m) % 2 != 0 or not (-two_j + 2 <= two_m <= two_j):
        raise ValidationError(f"2m={two_m} out of range for a gap at 2j={two_j}")
    n_dim = two_j + 1
    n = (two_j + two_m) // 2
    lg = (_log_binom(2 * (n_dim - n), n_dim - n) + _log_binom(2 * n, n)
          - 2.0 * n_dim * math.log(2.0))
    return float(np.pi * math.exp(lg))


def eigenstate_distance(two_j: int, two_m1: int, two_m2: int) -> float:
    """Sum of gaps between |j,m1> and |j,m2> along the eigenstate metric line."""
    two_j = validate_two_j(two_j)
    for two_m in (two_m1, two_m2):
        if (two_j - two_m) % 2 != 0 or abs(two_m) > two_j:
            raise ValidationError(f"2m={two_m} invalid for 2j={two_j}")
    lo, hi = sorted((two_m1, two_m2))
    return float(sum(eigenstate_gap(two_j, tm) for tm in range(lo + 2, hi + 1, 2)))


def pole_distance(two_j: int) -> float:
    """pi (1 - binom(2N, N) 2^(1-2N)): distance between the two pole states."""
    two_j = validate_two_j(two_j)
    n_dim = two_j + 1
    return float(np.pi * (1.0 - math.exp(
        _log_binom(2 * n_dim, n_dim) + (1.0 - 2.0 * n_dim) * math.log(2.0))))


def coherent_to_star(two_j: int) -> float:
    """Distance of any coherent state from the maximally mixed state."""
    return 0.5 * pole_distance(two_j)


def mixture_line_distance(two_j: int, a: float, b: float) -> float:
    """|a - b| times the pole distance: the pole mixtures form a metric line."""
    for x in (a, b):
        if not 0.0 <= x <= 1.0:
            raise ValidationError(f"mixture weight {x} outside [0, 1]")
    return abs(a - b) * pole_distance(two_j)


def zero_state_to_star(j: int) -> float:
    """Distance of |j,0> from the maximally mixed state (integer j only).

    Partial sum sum_{k=1}^{j} (2k-1)!!/((2k+1) (2k)!!); tends to pi/2 - 1.
    """
    j = int(j)
    if j < 1:
        raise ValidationError("integer j >= 1 required")
    ks = np.arange(1, j + 1, dtype=float)
    terms = np.exp(gammaln(2 * ks + 1) - 2 * gammaln(ks + 1) - 2 * ks * math.log(2.0))
    return float(np.sum(terms / (2.0 * ks + 1.0)))


# ---------------------------------------------------------------------------
# coherent pairs: the sine polynomial

def a_uv(u: int, v: int) -> float:
    """Finite form 2^(2u+1)/((2u+1) binom(2u,u)) - sum_{s<=v} binom(2s,s)/((u+1+s) 4^s)."""
    if u < 0 or v < 0:
        raise ValidationError("indices must be nonnegative")
    lead = math.exp((2 * u + 1) * math.log(2.0) - _log_binom(2 * u, u)) / (2 * u + 1)
    s = np.arange(v + 1, dtype=float)
    tail = np.exp(gammaln(2 * s + 1) - 2 * gammaln(s + 1) - 2 * s * math.log(2.0))
    return float(lead - np.sum(tail / (u + 1 + s)))


def a_uv_series(u: int, v: int, terms: int = 10_000) -> float:
    """Tail-series evaluation sum_{s>v} binom(2s,s)/((u+1+s) 4^s); test oracle."""
    s = np.arange(v + 1, v + 1 + terms, dtype=float)
    vals = np.exp(gammaln(2 * s + 1) - 2 * gammaln(s + 1) - 2 * s * math.log(2.0))
    return float(np.sum(vals / (u + 1 + s)))


def s_juv(two_j: int, u: int, v: int) -> float:
    """(2j)! / ((2j-2(u+v)-1)! u! v! (u+v+1)! 4^(u+v)), defined for u+v < j."""
    if 2 * (u + v) >= two_j:
        raise ValidationError("symmetric coefficient requires u + v < j")
    lg = (gammaln(two_j + 1) - gammaln(two_j - 2 * (u + v))
          - gammaln(u + 1) - gammaln(v + 1) - gammaln(u + v + 2)
          - (u + v) * math.log(4.0))
    return float(math.exp(lg))


@dataclass(frozen=True)
class WPolynomial:
    """Coefficients (ascending, monomial basis) of the coherent-pair polynomial."""

    two_j: int
    coeffs: tuple[float, ...]

    def __call__(self, x: float) -> float:
        return float(npoly.polyval(x, np.asarray(self.coeffs)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


_W_CACHE: dict[int, WPolynomial] = {}


def build_w_polynomial(two_j: int) -> WPolynomial:
    """Assemble the polynomial from the double sum over u + v < j.

    Every coefficient comes out positive and the degree is floor(j - 1/2);
    both are asserted at build time.
    """
    two_j = validate_two_j(two_j)
    cached = _W_CACHE.get(two_j)
    if cached is not None:
        return cached
    degree = (two_j - 1) // 2
    coeffs = np.zeros(degree + 1)
    prefactor = (two_j + 1) * math.exp(-(two_j + 2) * math.log(2.0))  # (2j+1)/4^(j+1)
    for u in range(degree + 1):
        v = 0
        while 2 * (u + v) < two_j:
            weight = prefactor * s_juv(two_j, u, v) * a_uv(u, v)
            # expand x^u (1-x)^v into monomials
            for t in range(v + 1):
                sign = -1.0 if t % 2 else 1.0
                coeffs[u + t] += weight * sign * math.exp(_log_binom(v, t))
            v += 1
    if np.any(coeffs <= 0.0):
        raise SolverError(f"polynomial coefficients not all positive at 2j={two_j}")
    poly = WPolynomial(two_j, tuple(float(c) for c in coeffs))
    _W_CACHE[two_j] = poly
    return poly


def coherent_pair_distance(two_j: int, xi: float) -> float:
    """pi sin(xi/2) W(sin^2(xi/2)) for coherent states an angle xi apart."""
    two_j = validate_two_j(two_j)
    if not 0.0 <= xi <= np.pi + 1e-12:
        raise ValidationError(f"angle {xi} outside [0, pi]")
    xi = min(float(xi), np.pi)
    w = build_w_polynomial(two_j)
    s = math.sin(0.5 * xi)
    return float(np.pi * s * w(s * s))


def coherent_pair_slope(two_j: int) -> float:
    """W(0): small-angle constant with C ~ (pi/2) W(0) xi."""
    return build_w_polynomial(two_j)(0.0)


def coherent_pair_cap(two_j: int) -> float:
    """W(1): antipodal constant; pi W(1) is the pole-to-pole distance."""
    return build_w_polynomial(two_j)(1.0)


# ---------------------------------------------------------------------------
# L1 upper bound

def prop2_upper_bound(field1: HusimiField, field2: HusimiField,
                      grid: SphereGrid | None = None) -> float:
    """(pi/2) int |H1 - H2| dmu: diameter/2 times the L1 distance."""
    if field1.two_j != field2.two_j:
        raise ValidationError("fields must share the same j")
    g = grid if grid is not None else default_grid()
    l1 = g.integrate(np.abs(field1.on_grid(g) - field2.on_grid(g)))
    return float(0.5 * np.pi * l1)

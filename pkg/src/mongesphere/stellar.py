"""Stellar representation of pure states and the discrete Monge distance.

A pure spin-j state is encoded by the N-1 = 2j zeros of its Husimi density.
In the stereographic variable gamma = tan(theta/2) exp(i phi) the zeros are
the roots of the polynomial with coefficients conj(psi_k) sqrt(binom(2j, k)),
k = j - m; missing leading coefficients correspond to zeros at gamma =
infinity, i.e. the south pole.  The discrete distance between two states is
the optimal assignment cost between their root multisets under geodesic cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linear_sum_assignment
from scipy.special import gammaln

from .errors import ValidationError
from .husimi import coherent_matrix
from .qstate import (PureState, basis_state, haar_pure, rotation_x, rotation_y,
                     validate_two_j)
from .sphere import geodesic_matrix, unit_vectors

# Deflation keeps strictly to near-machine zeros: a relative leading
# coefficient as small as 1e-13 still pins 2j roots well away from the pole
# (coherent states near the opposite pole), and the cluster refinement below
# restores full accuracy that the raw companion eigenvalues lack.
LEADING_COEFF_TOL = 1e-15
CLUSTER_RADIUS = 0.25
MIN_CLUSTER_RADIUS = 0.01
HUGE_ROOT = 1e6


@dataclass(frozen=True, eq=False)
class StellarRoots:
    """Multiset of the 2j Husimi zeros of a pure state (with multiplicity)."""

    two_j: int
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        if self.theta.shape != (self.two_j,) or self.phi.shape != (self.two_j,):
            raise ValidationError("root arrays must have length 2j")


def _husimi_poly(psi: PureState, two_j: int) -> np.ndarray:
    """Ascending coefficients of the zero polynomial in gamma."""
    k = np.arange(two_j + 1)
    lb = 0.5 * (gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1))
    return psi.amplitudes.conj() * np.exp(lb)


def _newton_polish(coeffs: np.ndarray, z: complex, steps: int = 1) -> complex:
    if not np.isfinite(z):
        return z
    dcoeffs = npoly.polyder(coeffs)
    for _ in range(steps):
        pv = npoly.polyval(z, coeffs)
        dv = npoly.polyval(z, dcoeffs)
        if dv == 0:
            return z
        step = pv / dv
        z2 = z - step
        if abs(npoly.polyval(z2, coeffs)) <= abs(pv):
            z = z2
        else:
            return z
    return z


def _polish_cluster(coeffs: np.ndarray, members: np.ndarray) -> complex | None:
    """Refine a suspected k-fold root to the simple root of the (k-1)-th derivative.

    The cluster centroid of companion eigenvalues is first-order accurate even
    when the individual roots scatter like eps^(1/k); Newton on the deflated
    derivative then restores full precision.  Returns None when the residuals
    are inconsistent with an exact multiple root (genuinely close simple
    roots), in which case the caller keeps the raw values.
    """
    k = members.size
    z = complex(np.mean(members))
    q = coeffs
    for _ in range(k - 1):
        q = npoly.polyder(q)
    dq = npoly.polyder(q)
    for _ in range(12):
        qv = npoly.polyval(z, q)
        dv = npoly.polyval(z, dq)
        if dv == 0:
            break
        step = qv / dv
        z = z - step
        if abs(step) < 1e-15 * (1.0 + abs(z)):
            break
    # residual consistency: p, p', ..., p^(k-1) must all vanish at z
    az = max(1.0, abs(z))
    deriv = coeffs
    for _ in range(k):
        scale = float(npoly.polyval(az, np.abs(deriv)))
        if abs(npoly.polyval(z, deriv)) > 1e-7 * max(scale, 1e-300):
            return None
        deriv = npoly.polyder(deriv)
    return z


def _group_by_distance(gammas: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage grouping of roots by geodesic proximity on the sphere."""
    n = gammas.size
    theta = 2.0 * np.arctan(np.abs(gammas))
    phi = np.angle(gammas) % (2.0 * np.pi)
    dist = geodesic_matrix(theta, phi, theta, phi)
    label = np.arange(n)

    def find(v):
        while label[v] != v:
            label[v] = label[label[v]]
            v = label[v]
        return v

    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < radius:
                label[find(i)] = find(j)
    roots = np.array([find(i) for i in range(n)])
    return [np.flatnonzero(roots == r) for r in np.unique(roots)]


def _refine_group(gammas: np.ndarray, members: np.ndarray, coeffs: np.ndarray,
                  radius: float, out: np.ndarray) -> None:
    if members.size == 1:
        g = gammas[members[0]]
        if abs(g) < HUGE_ROOT:
            out[members[0]] = _newton_polish(coeffs, g)
        return
    vals = gammas[members]
    if np.mean(np.abs(vals)) <= 1.0:
        z = _polish_cluster(coeffs, vals)
        if z is not None:
            out[members] = z
            return
    else:
        # work in the inverted variable w = 1/gamma near the south pole
        z = _polish_cluster(coeffs[::-1], 1.0 / vals)
        if z is not None:
            if z == 0:
                out[members] = complex(np.nan)  # marker: exact south pole
            else:
                out[members] = 1.0 / z
            return
    if radius > MIN_CLUSTER_RADIUS:
        # not a single multiple root: split at half radius and retry
        subgroups = _group_by_distance(vals, 0.5 * radius)
        if len(subgroups) > 1:
            for sub in subgroups:
                _refine_group(gammas, members[sub], coeffs, 0.5 * radius, out)
            return
    for k, idx in enumerate(members):
        if abs(vals[k]) < HUGE_ROOT:
            out[idx] = _newton_polish(coeffs, vals[k])


def _cluster_roots(gammas: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Group companion roots by geodesic proximity and refine multiple roots."""
    out = gammas.astype(complex).copy()
    if gammas.size == 0:
        return out
    if gammas.size == 1:
        return np.array([_newton_polish(coeffs, gammas[0])])
    for members in _group_by_distance(gammas, CLUSTER_RADIUS):
        _refine_group(gammas, members, coeffs, CLUSTER_RADIUS, out)
    return out


def stellar_roots(psi: PureState, two_j: int) -> StellarRoots:
    """Husimi zeros of a pure state, found as companion-matrix eigenvalues.

    Near-zero leading coefficients are deflated before the eigenvalue
    computation; the corresponding south-pole zeros re-enter the cluster
    refinement as points at infinity so that an almost-degenerate leading
    coefficient (coherent states near the north pole) is still resolved
    against the full, undeflated polynomial.
    """
    two_j = validate_two_j(two_j)
    if psi.dim != two_j + 1:
        raise ValidationError(f"state dimension {psi.dim} != 2j+1")
    coeffs = _husimi_poly(psi, two_j)
    scale = np.abs(coeffs).max()
    coeffs = coeffs / scale
    thresh = LEADING_COEFF_TOL
    degree = two_j
    n_south = 0
    while degree > 0 and abs(coeffs[degree]) < thresh:
        degree -= 1
        n_south += 1
    if degree >= 1:
        finite = np.roots(coeffs[:degree + 1][::-1])
    else:
        finite = np.empty(0, dtype=complex)
    gammas = np.concatenate([finite, np.full(n_south, complex(np.inf))])
    gammas = _cluster_roots(gammas, coeffs)

    theta = np.empty(two_j)
    phi = np.empty(two_j)
    for idx, g in enumerate(gammas):
        if np.isnan(g) or np.isinf(g):
            theta[idx] = np.pi
            phi[idx] = 0.0
            continue
        theta[idx] = 2.0 * np.arctan(abs(g))
        phi[idx] = (np.angle(g) % (2.0 * np.pi)) if abs(g) > 0 else 0.0
        if np.sin(theta[idx]) < 1e-12:
            phi[idx] = 0.0
    return StellarRoots(two_j, theta, phi)


def roots_to_state(roots: StellarRoots) -> PureState:
    """Rebuild the pure state (up to global phase) from its zero multiset."""
    two_j = roots.two_j
    south = roots.theta > np.pi - 1e-12
    finite = np.flatnonzero(~south)
    gammas = np.tan(0.5 * roots.theta[finite]) * np.exp(1j * roots.phi[finite])
    poly = npoly.polyfromroots(gammas) if finite.size else np.array([1.0 + 0j])
    k = np.arange(two_j + 1)
    lb = 0.5 * (gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1))
    amp = np.zeros(two_j + 1, dtype=complex)
    amp[:poly.size] = poly.conj() / np.exp(lb[:poly.size])
    return PureState(amp / np.linalg.norm(amp))


def simplified_monge(psi1: PureState, psi2: PureState, two_j: int) -> float:
    """Optimal assignment cost between the two zero multisets, geodesic ground cost."""
    r1 = stellar_roots(psi1, two_j)
    r2 = stellar_roots(psi2, two_j)
    return assignment_distance(r1, r2)


def assignment_distance(r1: StellarRoots, r2: StellarRoots) -> float:
    if r1.two_j != r2.two_j:
        raise ValidationError("root multisets have different sizes")
    cost = geodesic_matrix(r1.theta, r1.phi, r2.theta, r2.phi)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / r1.two_j)


def rotated_basis_state(two_j: int, two_m: int, axis: str) -> PureState:
    """Jz eigenstate rotated so it becomes an eigenstate of Jy or Jx."""
    psi = basis_state(two_j, two_m)
    if axis == "z":
        return psi
    if axis == "y":
        u = rotation_x(two_j, -0.5 * np.pi)
        return PureState(u @ psi.amplitudes)
    if axis == "x":
        u = rotation_y(two_j, 0.5 * np.pi)
        return PureState(u @ psi.amplitudes)
    raise ValidationError(f"unknown axis {axis!r}")


def cross_basis_distance(two_j: int, two_m1: int, two_m2: int,
                         axes: str = "z-y") -> float:
    """Discrete distance between eigenstates of different spin components."""
    parts = axes.split("-")
    if len(parts) != 2 or parts[0] != "z" or parts[1] not in ("x", "y", "z"):
        raise ValidationError(f"axes must be 'z-y', 'z-x' or 'z-z', got {axes!r}")
    psi1 = basis_state(two_j, two_m1)
    psi2 = rotated_basis_state(two_j, two_m2, parts[1])
    return simplified_monge(psi1, psi2, two_j)


# ---------------------------------------------------------------------------
# random-state statistics

def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def random_state_distance_stats(two_j: int, reference: PureState,
                                samples: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the discrete distance to a reference."""
    two_j = validate_two_j(two_j)
    if samples < 100:
        raise ValidationError("need at least 100 samples")
    ref_roots = stellar_roots(reference, two_j)
    vals = np.empty(samples)
    for i in range(samples):
        psi = haar_pure(_sample_rng(seed, i), two_j + 1)
        vals[i] = assignment_distance(stellar_roots(psi, two_j), ref_roots)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(samples))
    return mean, stderr


def random_pair_scaling(two_j_list, samples: int, seed: int = 0):
    """Mean discrete distance between independent random pairs per dimension.

    Returns (rows, slope): rows of (N, mean, stderr) and the fitted slope of
    log(mean) against log(N).
    """
    two_j_list = [validate_two_j(t) for t in two_j_list]
    if len(two_j_list) < 2:
        raise ValidationError("need at least two j values to fit a slope")
    rows = []
    for t_idx, two_j in enumerate(two_j_list):
        vals = np.empty(samples)
        for i in range(samples):
            rng = _sample_rng(seed + 7919 * t_idx, i)
            psi1 = haar_pure(rng, two_j + 1)
            psi2 = haar_pure(rng, two_j + 1)
            vals[i] = simplified_monge(psi1, psi2, two_j)
        rows.append((two_j + 1, float(vals.mean()),
                     float(vals.std(ddof=1) / np.sqrt(samples))))
    ns = np.log([r[0] for r in rows])
    ms = np.log([r[1] for r in rows])
    slope = float(np.polyfit(ns, ms, 1)[0])
    return rows, slope

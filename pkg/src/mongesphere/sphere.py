"""Geometry of the unit sphere S^2.

Geodesic metric, quadrature grids normalized to total measure 1
(d mu = sin(theta) dtheta dphi / 4pi), and meridian cumulative integrals.
All colatitudes theta are in [0, pi], longitudes phi in [0, 2pi).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ValidationError

POLE_TOL = 1e-12
_grid_counter = itertools.count()


def canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    """Validate theta, wrap phi into [0, 2pi), and zero phi at the poles."""
    theta = float(theta)
    phi = float(phi)
    if not np.isfinite(theta) or not 0.0 <= theta <= np.pi:
        raise ValidationError(f"colatitude must lie in [0, pi], got {theta}")
    if not np.isfinite(phi):
        raise ValidationError(f"longitude must be finite, got {phi}")
    phi = phi % (2.0 * np.pi)
    if np.sin(theta) < POLE_TOL:
        phi = 0.0
    return theta, phi


@dataclass(frozen=True)
class SpherePoint:
    theta: float
    phi: float

    def __post_init__(self):
        t, p = canonical_angles(self.theta, self.phi)
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "phi", p)

    def unit_vector(self) -> np.ndarray:
        return unit_vectors(np.array([self.theta]), np.array([self.phi]))[0]


def unit_vectors(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Cartesian unit vectors, shape (n, 3), for arrays of angles."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def geodesic(a: SpherePoint, b: SpherePoint) -> float:
    """Great-circle distance in [0, pi]."""
    d = float(np.dot(a.unit_vector(), b.unit_vector()))
    return float(np.arccos(np.clip(d, -1.0, 1.0)))


def geodesic_matrix(theta_a, phi_a, theta_b, phi_b) -> np.ndarray:
    """Pairwise great-circle distances, shape (len(a), len(b))."""
    xa = unit_vectors(np.asarray(theta_a), np.asarray(phi_a))
    xb = unit_vectors(np.asarray(theta_b), np.asarray(phi_b))
    dots = np.clip(xa @ xb.T, -1.0, 1.0)
    return np.arccos(dots)


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Weighted node set on S^2 with weights summing to 1."""

    theta: np.ndarray
    phi: np.ndarray
    weight: np.ndarray
    kind: str = "custom"
    token: int = field(default_factory=lambda: next(_grid_counter))

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        weight = np.asarray(self.weight, dtype=float)
        if not (theta.shape == phi.shape == weight.shape) or theta.ndim != 1:
            raise ValidationError("grid arrays must be 1-d and equally long")
        if theta.size < 2:
            raise ValidationError("grid needs at least 2 nodes")
        if np.any(weight <= 0.0):
            raise ValidationError("grid weights must be positive")
        if abs(weight.sum() - 1.0) > 1e-12:
            raise ValidationError(
                f"grid weights must sum to 1, got {weight.sum()!r}")
        if np.any(theta < 0.0) or np.any(theta > np.pi):
            raise ValidationError("grid colatitudes outside [0, pi]")
        phi = np.mod(phi, 2.0 * np.pi)
        phi = np.where(np.sin(theta) < POLE_TOL, 0.0, phi)
        _check_no_duplicates(theta, phi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "weight", weight)

    @property
    def size(self) -> int:
        return self.theta.size

    def points(self) -> np.ndarray:
        return unit_vectors(self.theta, self.phi)

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of node samples against the unit measure."""
        return float(np.dot(self.weight, np.asarray(values, dtype=float)))

    def to_csv(self) -> str:
        lines = ["theta,phi,weight"]
        for t, p, w in zip(self.theta, self.phi, self.weight):
            lines.append(f"{float(t)!r},{float(p)!r},{float(w)!r}")
        return "\n".join(lines) + "\n"


def _check_no_duplicates(theta: np.ndarray, phi: np.ndarray) -> None:
    # bucket by rounded cartesian coordinates; only bucket collisions are
    # checked pairwise, which keeps construction O(n) for regular grids
    x = unit_vectors(theta, phi)
    key = np.round(x / 2e-9).astype(np.int64)
    buckets: dict[tuple, list[int]] = {}
    for idx, k in enumerate(map(tuple, key)):
        buckets.setdefault(k, []).append(idx)
    for idxs in buckets.values():
        if len(idxs) > 1:
            for i, j in itertools.combinations(idxs, 2):
                d = np.arccos(np.clip(np.dot(x[i], x[j]), -1.0, 1.0))
                if d < 1e-9:
                    raise ValidationError(
                        f"duplicate grid nodes {i} and {j} within 1e-9")


def build_grid(kind: str, resolution: int, phi_count: int | None = None) -> SphereGrid:
    """Construct a quadrature grid.

    ``gauss-product``: Gauss-Legendre nodes in cos(theta) of order
    ``resolution`` crossed with ``phi_count`` (default ``2 * resolution``)
    uniform longitudes, product weights.  ``fibonacci``: ``resolution``
    equal-weight nodes on a Fibonacci lattice.
    """
    if resolution < 2:
        raise ValidationError("grid resolution must be >= 2")
    if kind == "gauss-product":
        q = int(resolution)
        p = int(phi_count) if phi_count is not None else 2 * q
        if p < 1:
            raise ValidationError("phi count must be positive")
        x, wq = leggauss(q)
        thetas = np.arccos(x[::-1])  # ascending colatitude
        wq = wq[::-1] / 2.0
        phis = 2.0 * np.pi * np.arange(p) / p
        theta = np.repeat(thetas, p)
        phi = np.tile(phis, q)
        weight = np.repeat(wq / p, p)
        return SphereGrid(theta, phi, weight, kind="gauss-product")
    if kind == "fibonacci":
        n = int(resolution)
        i = np.arange(n)
        z = 1.0 - (2.0 * i + 1.0) / n
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        phi = (2.0 * np.pi * np.mod(i / golden, 1.0))
        theta = np.arccos(z)
        weight = np.full(n, 1.0 / n)
        return SphereGrid(theta, phi, weight, kind="fibonacci")
    raise ValidationError(f"unsupported grid kind {kind!r}")


_DEFAULT_GRID: SphereGrid | None = None


def default_grid() -> SphereGrid:
    """Shared gauss-product grid of theta-order 64 x 128 longitudes."""
    global _DEFAULT_GRID
    if _DEFAULT_GRID is None:
        _DEFAULT_GRID = build_grid("gauss-product", 64, 128)
    return _DEFAULT_GRID


def meridian_cdf(f, phi: float, t: float, order: int = 96) -> float:
    """Cumulative meridian integral (1/2) * int_0^t f(theta, phi) sin(theta) dtheta.

    ``f`` maps (theta array, phi array) to nonnegative density samples.
    """
    if not 0.0 <= t <= np.pi + 1e-12:
        raise ValidationError(f"meridian upper limit must lie in [0, pi], got {t}")
    t = min(float(t), np.pi)
    if t == 0.0:
        return 0.0
    x, w = leggauss(order)
    nodes = 0.5 * t * (x + 1.0)
    vals = np.asarray(f(nodes, np.full_like(nodes, phi)), dtype=float)
    if np.any(vals < -1e-9):
        raise ValidationError("meridian integrand must be nonnegative")
    return float(0.5 * (0.5 * t) * np.sum(w * vals * np.sin(nodes)))

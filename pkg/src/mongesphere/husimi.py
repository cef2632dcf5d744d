"""Spin coherent states, Husimi representations, and Wehrl entropy.

The coherent state pointing at (theta, phi) expands in the descending-m
basis with components

    <j,m | theta,phi> = sin^(j-m)(theta/2) cos^(j+m)(theta/2)
                        exp(i (j-m) phi) sqrt(binom(2j, j-m)),

and the Husimi density of a state rho is H(eta) = N <eta|rho|eta> with
N = 2j+1, normalized to integral 1 against the unit sphere measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ValidationError
from .qstate import DensityMatrix, PureState, haar_pure, validate_two_j
from .sphere import SphereGrid, SpherePoint, default_grid

NORMALIZATION_TOL = 1e-10


def _log_binom(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def coherent_matrix(two_j: int, theta, phi) -> np.ndarray:
    """Rows of coherent-state amplitudes, shape (n_points, 2j+1).

    Half-integer powers are evaluated through logarithms of binomials so the
    construction stays finite well past j ~ 10 where factorials overflow.
    """
    two_j = validate_two_j(two_j)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    k = np.arange(two_j + 1)          # k = j - m
    half = 0.5 * theta[:, None]
    s = np.sin(half)
    c = np.cos(half)
    lb = 0.5 * _log_binom(two_j, k)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = lb + k[None, :] * np.log(s) + (two_j - k)[None, :] * np.log(c)
        mag = np.where(np.isneginf(logmag), 0.0, np.exp(logmag))
    # exact poles: sin or cos vanishes and 0^0 must read as 1
    north = s[:, 0] == 0.0
    south = c[:, 0] == 0.0
    if north.any():
        mag[north] = 0.0
        mag[north, 0] = 1.0
    if south.any():
        mag[south] = 0.0
        mag[south, -1] = 1.0
    mag = np.nan_to_num(mag, nan=0.0)
    return mag * np.exp(1j * k[None, :] * phi[:, None])


def coherent_amplitudes(two_j: int, theta: float, phi: float) -> PureState:
    """Coherent state |theta, phi> as a normalized vector."""
    row = coherent_matrix(two_j, [theta], [phi])[0]
    return PureState(row / np.linalg.norm(row))


@dataclass(frozen=True, eq=False)
class HusimiField:
    """Evaluable Husimi density of a density matrix on the sphere."""

    rho: DensityMatrix
    two_j: int

    def values(self, theta, phi) -> np.ndarray:
        a = coherent_matrix(self.two_j, theta, phi)
        tmp = a.conj() @ self.rho.mat
        vals = (self.two_j + 1) * np.real(np.sum(tmp * a, axis=1))
        return vals

    def at(self, point: SpherePoint) -> float:
        return float(self.values([point.theta], [point.phi])[0])

    def on_grid(self, grid: SphereGrid) -> np.ndarray:
        return self.values(grid.theta, grid.phi)


def husimi(rho: DensityMatrix, two_j: int, validate: bool = True,
           grid: SphereGrid | None = None) -> HusimiField:
    """Husimi field of ``rho``; optionally checks the unit-mass invariant."""
    two_j = validate_two_j(two_j)
    if rho.dim != two_j + 1:
        raise ValidationError(
            f"state dimension {rho.dim} does not match 2j+1 = {two_j + 1}")
    field = HusimiField(rho, two_j)
    if validate:
        g = grid if grid is not None else default_grid()
        total = g.integrate(field.on_grid(g))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(
                f"Husimi normalization {total!r} deviates from 1")
    return field


def pure_husimi_on_grid(amp_matrix: np.ndarray, psi: np.ndarray, two_j: int) -> np.ndarray:
    """Husimi samples of a pure state given a precomputed amplitude matrix."""
    return (two_j + 1) * np.abs(amp_matrix.conj() @ psi) ** 2


def wehrl_entropy(rho: DensityMatrix, two_j: int,
                  grid: SphereGrid | None = None) -> float:
    """Boltzmann-Gibbs entropy -int H ln H dmu of the Husimi density.

    The integrand uses the continuous extension 0 ln 0 = 0; with the unit
    sphere measure the entropy is <= 0, equal to 0 for the maximally mixed
    state.
    """
    field = husimi(rho, two_j, validate=False)
    g = grid if grid is not None else default_grid()
    h = field.on_grid(g)
    if np.any(h < -1e-9):
        raise ValidationError("Husimi density significantly negative on grid")
    h = np.clip(h, 0.0, None)
    return float(-g.integrate(entropy_integrand(h)))


def entropy_integrand(h: np.ndarray) -> np.ndarray:
    out = np.zeros_like(h)
    pos = h > 0.0
    out[pos] = h[pos] * np.log(h[pos])
    return out


def wehrl_entropy_pure_batch(psis: np.ndarray, two_j: int,
                             grid: SphereGrid | None = None) -> np.ndarray:
    """Wehrl entropies of a batch of pure states (rows of ``psis``)."""
    g = grid if grid is not None else default_grid()
    a = coherent_matrix(two_j, g.theta, g.phi)
    out = np.empty(psis.shape[0])
    for i, psi in enumerate(psis):
        h = pure_husimi_on_grid(a, psi, two_j)
        out[i] = -g.integrate(entropy_integrand(np.clip(h, 0.0, None)))
    return out


def coherent_wehrl_minimum(dim: int) -> float:
    """(N-1)/N - ln N, the coherent-state Wehrl entropy."""
    return (dim - 1) / dim - np.log(dim)


def mean_wehrl(dim: int) -> float:
    """Haar average of the Wehrl entropy: -ln N + harmonic sum over 2..N."""
    if dim < 1:
        raise ValidationError("dimension must be >= 1")
    if dim == 1:
        return 0.0
    harmonic = float(np.sum(1.0 / np.arange(2, dim + 1, dtype=float)))
    return harmonic - float(np.log(dim))


def sample_haar_pure(rng: np.random.Generator, dim: int) -> PureState:
    return haar_pure(rng, dim)

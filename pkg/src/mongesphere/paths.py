"""Fastest-applicable-path selection for the Husimi transport distance.

The order is: recognized closed form, rotationally-symmetric reduction,
ordered-meridian reduction, and finally the numeric solver.  The fired path
is always reported so every printed number can be traced to the formula that
produced it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PathRefusal
from .monge_analytic import (coherent_pair_distance, coherent_to_star,
                             eigenstate_distance, mixture_line_distance,
                             monge_bloch, monge_prop6, monge_symmetric,
                             zero_state_to_star)
from .ot_numeric import MongeBracket, monge_numeric
from .qstate import (DensityMatrix, jx_matrix, jy_matrix, jz_matrix,
                     validate_two_j)

DETECT_TOL = 1e-12


@dataclass(frozen=True)
class MongeResult:
    value: float
    path: str
    bracket: MongeBracket | None = None
    refusals: tuple[str, ...] = ()


class _StateShape:
    """Cheap structural fingerprint of a density matrix."""

    def __init__(self, rho: DensityMatrix, two_j: int):
        self.rho = rho
        n = rho.dim
        scale = max(1.0, float(np.linalg.norm(rho.mat)))
        self.is_star = bool(np.linalg.norm(rho.mat - np.eye(n) / n) <= DETECT_TOL * scale)
        diag = np.diag(rho.mat).real
        off = rho.mat - np.diag(np.diag(rho.mat))
        self.is_diagonal = bool(np.linalg.norm(off) <= DETECT_TOL * scale)
        self.pole_weight = None
        if self.is_diagonal and np.all(diag[1:-1] <= DETECT_TOL):
            self.pole_weight = float(diag[0])
        self.two_m = None
        if self.is_diagonal:
            k = int(np.argmax(diag))
            if diag[k] >= 1.0 - DETECT_TOL:
                self.two_m = two_j - 2 * k
        evals = rho.eigvals()
        self.is_pure = bool(evals[-1] >= 1.0 - 1e-10)
        self.direction = None
        if self.is_pure:
            jvec = np.array([np.trace(rho.mat @ op).real for op in
                             (jx_matrix(two_j), jy_matrix(two_j), jz_matrix(two_j))])
            norm = float(np.linalg.norm(jvec))
            if norm >= 0.5 * two_j * (1.0 - DETECT_TOL):
                self.direction = jvec / norm


def _closed_form(s1: _StateShape, s2: _StateShape, two_j: int) -> MongeResult | None:
    n = two_j + 1
    if np.linalg.norm(s1.rho.mat - s2.rho.mat) <= 1e-13 * n:
        return MongeResult(0.0, "closed-form:identical")
    if n == 2:
        return MongeResult(monge_bloch(s1.rho, s2.rho), "closed-form:bloch")
    for a, b in ((s1, s2), (s2, s1)):
        if a.direction is not None and b.is_star:
            return MongeResult(coherent_to_star(two_j), "closed-form:coherent-star")
        if a.two_m == 0 and b.is_star and two_j % 2 == 0:
            return MongeResult(zero_state_to_star(two_j // 2),
                               "closed-form:equator-eigenstate-star")
    if s1.direction is not None and s2.direction is not None:
        cosxi = float(np.clip(np.dot(s1.direction, s2.direction), -1.0, 1.0))
        xi = float(np.arccos(cosxi))
        return MongeResult(coherent_pair_distance(two_j, xi),
                           "closed-form:coherent-pair")
    if s1.two_m is not None and s2.two_m is not None:
        return MongeResult(eigenstate_distance(two_j, s1.two_m, s2.two_m),
                           "closed-form:eigenstate-line")
    if s1.pole_weight is not None and s2.pole_weight is not None:
        return MongeResult(
            mixture_line_distance(two_j, s1.pole_weight, s2.pole_weight),
            "closed-form:pole-mixture-line")
    return None


def monge_auto(rho1: DensityMatrix, rho2: DensityMatrix, two_j: int, *,
               allow_numeric: bool = True, resolution=None) -> MongeResult:
    """Dispatch along closed form -> symmetric reduction -> meridian reduction -> numeric."""
    two_j = validate_two_j(two_j)
    s1 = _StateShape(rho1, two_j)
    s2 = _StateShape(rho2, two_j)
    hit = _closed_form(s1, s2, two_j)
    if hit is not None:
        return hit
    refusals = []
    try:
        return MongeResult(monge_symmetric(rho1, rho2, two_j), "prop5")
    except PathRefusal as exc:
        refusals.append(f"prop5: {exc.diagnostic}")
    try:
        return MongeResult(monge_prop6(rho1, rho2, two_j), "prop6",
                           refusals=tuple(refusals))
    except PathRefusal as exc:
        refusals.append(f"prop6: {exc.diagnostic}")
    if not allow_numeric:
        raise PathRefusal("; ".join(refusals))
    bracket = monge_numeric(rho1, rho2, two_j, resolution)
    return MongeResult(bracket.estimate, "numeric", bracket, tuple(refusals))

"""Density matrices, pure states, standard metric distances, kicked dynamics.

Basis convention throughout: the canonical basis of the N = 2j+1 dimensional
space is |j,m> with m descending, so index 0 is m = +j and index N-1 is
m = -j.  All angular momentum matrices below follow that ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-10
PSD_TOL = 1e-9


def _as_complex_matrix(mat) -> np.ndarray:
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    mat: np.ndarray

    def __post_init__(self):
        a = _as_complex_matrix(self.mat)
        scale = max(1.0, float(np.linalg.norm(a)))
        if np.linalg.norm(a - a.conj().T) > HERM_TOL * scale:
            raise ValidationError("density matrix is not Hermitian")
        if abs(a.trace() - 1.0) > TRACE_TOL * scale:
            raise ValidationError(f"density matrix trace {a.trace():.3g} != 1")
        evals = np.linalg.eigvalsh(a)
        if evals.min() < -PSD_TOL * scale:
            raise ValidationError(
                f"density matrix has negative eigenvalue {evals.min():.3g}")
        a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        object.__setattr__(self, "mat", a)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def is_pure(self, tol: float = 1e-10) -> bool:
        return bool(self.eigvals().max() >= 1.0 - tol)

    def to_pure(self, tol: float = 1e-10) -> "PureState":
        w, v = np.linalg.eigh(self.mat)
        if w[-1] < 1.0 - tol:
            raise ValidationError("state is not pure")
        return PureState(v[:, -1])

    def to_json(self) -> str:
        return json.dumps({
            "dim": self.dim,
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        })

    @staticmethod
    def from_json(text: str) -> "DensityMatrix":
        try:
            obj = json.loads(text)
            dim = int(obj["dim"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed density-matrix JSON: {exc}") from exc
        if re.shape != (dim, dim) or im.shape != (dim, dim):
            raise ValidationError("density-matrix JSON has inconsistent shapes")
        return DensityMatrix(re + 1j * im)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector in the canonical descending-m basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 1:
            raise ValidationError("pure state must be a nonempty vector")
        n = np.linalg.norm(a)
        if abs(n - 1.0) > NORM_TOL:
            raise ValidationError(f"pure state norm {n!r} != 1")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def to_density(self) -> DensityMatrix:
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()))

    def overlap(self, other: "PureState") -> complex:
        _check_dims(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_dims(a, b) -> None:
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")


def validate_two_j(two_j: int) -> int:
    two_j = int(two_j)
    if two_j < 1:
        raise ValidationError("2j must be a positive integer")
    return two_j


# ---------------------------------------------------------------------------
# angular momentum matrices

def jz_matrix(two_j: int) -> np.ndarray:
    two_j = validate_two_j(two_j)
    m = (two_j - 2 * np.arange(two_j + 1)) / 2.0
    return np.diag(m).astype(complex)


def jminus_matrix(two_j: int) -> np.ndarray:
    two_j = validate_two_j(two_j)
    k = np.arange(two_j)
    sub = np.sqrt((two_j - k) * (k + 1.0))
    return np.diag(sub, -1).astype(complex)


def jplus_matrix(two_j: int) -> np.ndarray:
    return jminus_matrix(two_j).conj().T


def jx_matrix(two_j: int) -> np.ndarray:
    jm = jminus_matrix(two_j)
    return 0.5 * (jm + jm.conj().T)


def jy_matrix(two_j: int) -> np.ndarray:
    jm = jminus_matrix(two_j)
    return 0.5j * (jm - jm.conj().T)


def rotation_z(two_j: int, alpha: float) -> np.ndarray:
    """exp(-i alpha Jz), diagonal in the canonical basis."""
    m = (two_j - 2 * np.arange(two_j + 1)) / 2.0
    return np.diag(np.exp(-1j * alpha * m))


def rotation_y(two_j: int, alpha: float) -> np.ndarray:
    """exp(-i alpha Jy) via eigendecomposition."""
    return unitary_from_hermitian(-alpha * jy_matrix(two_j))


def rotation_x(two_j: int, alpha: float) -> np.ndarray:
    return unitary_from_hermitian(-alpha * jx_matrix(two_j))


def unitary_from_hermitian(h: np.ndarray) -> np.ndarray:
    """exp(i H) for Hermitian H."""
    h = _as_complex_matrix(h)
    scale = max(1.0, float(np.linalg.norm(h)))
    if np.linalg.norm(h - h.conj().T) > HERM_TOL * scale:
        raise ValidationError("generator is not Hermitian")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


# ---------------------------------------------------------------------------
# standard distances

def _ordered_pair(rho1: DensityMatrix, rho2: DensityMatrix):
    # fix an argument order from the raw bytes so d(a,b) == d(b,a) bitwise
    if rho1.mat.tobytes() <= rho2.mat.tobytes():
        return rho1, rho2
    return rho2, rho1


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """tr sqrt((rho1 - rho2)^2): sum of absolute eigenvalues of the difference."""
    _check_dims(rho1, rho2)
    rho1, rho2 = _ordered_pair(rho1, rho2)
    w = np.linalg.eigvalsh(rho1.mat - rho2.mat)
    return float(np.abs(w).sum())


def hs_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Frobenius norm sqrt(tr[(rho1 - rho2)^2])."""
    _check_dims(rho1, rho2)
    rho1, rho2 = _ordered_pair(rho1, rho2)
    return float(np.linalg.norm(rho1.mat - rho2.mat))


def bures_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """sqrt(2 (1 - tr[(sqrt(rho1) rho2 sqrt(rho1))^(1/2)]))."""
    _check_dims(rho1, rho2)
    rho1, rho2 = _ordered_pair(rho1, rho2)
    w1, v1 = np.linalg.eigh(rho1.mat)
    sqrt1 = (v1 * np.sqrt(np.clip(w1, 0.0, None))) @ v1.conj().T
    inner = sqrt1 @ rho2.mat @ sqrt1
    w = np.linalg.eigvalsh(inner)
    # rounding makes the PSD product indefinite at scale eps; everything
    # below the tolerance is noise and must not leak through the sqrt
    w = np.where(w < PSD_TOL, 0.0, w)
    fidelity_root = np.sqrt(w).sum()
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - fidelity_root))))


def fubini_study(phi1: PureState, phi2: PureState) -> float:
    """Geodesic distance 2 arccos sqrt(p) with p the transition probability."""
    _check_dims(phi1, phi2)
    p = abs(phi1.overlap(phi2)) ** 2
    return float(2.0 * np.arccos(np.sqrt(np.clip(p, 0.0, 1.0))))


def kicked_step(rho: DensityMatrix, h: np.ndarray) -> DensityMatrix:
    """One period of the kicked dynamics rho -> exp(iH) rho exp(-iH)."""
    h = _as_complex_matrix(h)
    if h.shape[0] != rho.dim:
        raise ValidationError("Hamiltonian dimension mismatch")
    u = unitary_from_hermitian(h)
    return DensityMatrix(u @ rho.mat @ u.conj().T)


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    return DensityMatrix(u @ rho.mat @ u.conj().T)


# ---------------------------------------------------------------------------
# random states

def haar_pure(rng: np.random.Generator, dim: int) -> PureState:
    """Haar-random pure state: normalized i.i.d. complex Gaussian vector."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def random_mixed(rng: np.random.Generator, dim: int) -> DensityMatrix:
    """Random full-rank state G G^dagger / tr, G a complex Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = g @ g.conj().T
    return DensityMatrix(a / a.trace())


# ---------------------------------------------------------------------------
# named-state mini-language

def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim)


def basis_state(two_j: int, two_m: int) -> PureState:
    two_j = validate_two_j(two_j)
    two_m = int(two_m)
    if abs(two_m) > two_j or (two_j - two_m) % 2 != 0:
        raise ValidationError(f"invalid 2m={two_m} for 2j={two_j}")
    amp = np.zeros(two_j + 1, dtype=complex)
    amp[(two_j - two_m) // 2] = 1.0
    return PureState(amp)


def pole_mixture(two_j: int, a: float) -> DensityMatrix:
    """a |j,j><j,j| + (1-a) |j,-j><j,-j|."""
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"mixture weight must lie in [0, 1], got {a}")
    n = validate_two_j(two_j) + 1
    d = np.zeros(n)
    d[0] = a
    d[-1] = 1.0 - a
    return DensityMatrix(np.diag(d))


def _parse_half_integer(text: str) -> int:
    """Parse j or m given as '3/2', '1.5' or '2'; returns the doubled value."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            num, den = int(num), int(den)
            if den == 2:
                return num
            if den == 1:
                return 2 * num
            raise ValueError(f"denominator must be 1 or 2, got {den}")
        val = float(text)
    except ValueError as exc:
        raise ValidationError(f"cannot parse half-integer {text!r}: {exc}") from exc
    doubled = round(2.0 * val)
    if abs(2.0 * val - doubled) > 1e-9:
        raise ValidationError(f"{text!r} is not a half-integer")
    return int(doubled)


def named_state(descriptor: str, two_j: int) -> DensityMatrix:
    """Build a state from the CLI mini-language.

    Descriptors: ``plus``, ``minus``, ``star``, ``mix:a``, ``jm:m``,
    ``coh:theta,phi``, ``json:<path>``.
    """
    pure = named_pure_state(descriptor, two_j)
    if pure is not None:
        return pure.to_density()
    two_j = validate_two_j(two_j)
    if descriptor == "star":
        return maximally_mixed(two_j + 1)
    if descriptor.startswith("mix:"):
        try:
            a = float(descriptor[4:])
        except ValueError as exc:
            raise ValidationError(f"bad mixture weight in {descriptor!r}") from exc
        return pole_mixture(two_j, a)
    if descriptor.startswith("json:"):
        path = descriptor[5:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return DensityMatrix.from_json(fh.read())
        except OSError as exc:
            raise ValidationError(f"cannot read {path!r}: {exc}") from exc
    raise ValidationError(f"unknown state descriptor {descriptor!r}")


def named_pure_state(descriptor: str, two_j: int) -> PureState | None:
    """Pure-state descriptors; returns None when the descriptor is mixed."""
    from .husimi import coherent_amplitudes  # local import to avoid a cycle

    two_j = validate_two_j(two_j)
    if descriptor == "plus":
        return basis_state(two_j, two_j)
    if descriptor == "minus":
        return basis_state(two_j, -two_j)
    if descriptor.startswith("jm:"):
        return basis_state(two_j, _parse_half_integer(descriptor[3:]))
    if descriptor.startswith("coh:"):
        parts = descriptor[4:].split(",")
        if len(parts) != 2:
            raise ValidationError(f"coherent descriptor needs theta,phi: {descriptor!r}")
        try:
            theta, phi = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ValidationError(f"bad coherent angles in {descriptor!r}") from exc
        if not 0.0 <= theta <= np.pi:
            raise ValidationError(f"coherent colatitude {theta} outside [0, pi]")
        return coherent_amplitudes(two_j, theta, phi)
    if descriptor.startswith("mix:"):
        try:
            a = float(descriptor[4:])
        except ValueError as exc:
            raise ValidationError(f"bad mixture weight in {descriptor!r}") from exc
        if a == 1.0:
            return basis_state(two_j, two_j)
        if a == 0.0:
            return basis_state(two_j, -two_j)
        return None
    return None

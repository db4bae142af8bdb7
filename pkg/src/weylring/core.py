"""Single-excitation model of a qubit exchanging one photon with a lossy
resonator: Hamiltonian construction, analytic biorthogonal eigensystem,
parameter-space geometry, and the ring of exceptional points.

Basis ordering for all 2x2 matrices and state vectors is
(|e,0>, |g,1>): qubit excited with empty resonator first.

The effective non-Hermitian generator in this subspace is

    H = [[delta, conj(coupling)],
         [coupling, -i*kappa/2]]

with the qubit-resonator detuning ``delta``, the complex exchange
coupling ``coupling`` and the photon decay rate ``kappa``.  The model
point maps onto a fictitious magnetic field B with
bx = Re(coupling), by = Im(coupling), bz = delta/2; the exceptional
points form a ring of radius kappa/4 in the bz = 0 plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EPProximityError

#: relative discriminant magnitude below which the point counts as "on"
#: the exceptional ring (left-vector norms would exceed ~1e6 in doubles)
EP_DISCRIMINANT_RTOL = 1e-12


def _require_finite(**values):
    for name, v in values.items():
        if not np.all(np.isfinite(np.atleast_1d(np.asarray(v, dtype=complex)).view(float))):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class SystemParams:
    """One model point: complex coupling, real detuning, photon decay rate.

    All three are angular frequencies in rad/us; ``kappa >= 0``.
    """

    coupling: complex
    detuning: float
    kappa: float

    def __post_init__(self):
        _require_finite(coupling=self.coupling, detuning=self.detuning, kappa=self.kappa)
        object.__setattr__(self, "coupling", complex(self.coupling))
        object.__setattr__(self, "detuning", float(self.detuning))
        object.__setattr__(self, "kappa", float(self.kappa))
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


@dataclass(frozen=True)
class BVector:
    """Fictitious-field components (rad/us): bx = Re(coupling),
    by = Im(coupling), bz = detuning/2."""

    bx: float
    by: float
    bz: float

    def __post_init__(self):
        _require_finite(bx=self.bx, by=self.by, bz=self.bz)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz], dtype=float)


def params_from_b(b: BVector, kappa: float) -> SystemParams:
    """Model point from field components: coupling = bx + i*by, detuning = 2*bz."""
    return SystemParams(coupling=b.bx + 1j * b.by, detuning=2.0 * b.bz, kappa=kappa)


def b_from_params(p: SystemParams) -> BVector:
    """Inverse of :func:`params_from_b` (exact round trip)."""
    return BVector(bx=p.coupling.real, by=p.coupling.imag, bz=p.detuning / 2.0)


@dataclass(frozen=True)
class SingleExcState:
    """Pure state in the single-excitation subspace span{|e,0>, |g,1>}."""

    c_e0: complex
    c_g1: complex
    normalized: bool = True

    def __post_init__(self):
        _require_finite(c_e0=self.c_e0, c_g1=self.c_g1)
        object.__setattr__(self, "c_e0", complex(self.c_e0))
        object.__setattr__(self, "c_g1", complex(self.c_g1))
        if self.normalized:
            n = abs(self.c_e0) ** 2 + abs(self.c_g1) ** 2
            if abs(n - 1.0) > 1e-12:
                raise ValueError(f"state marked normalized but |psi|^2 = {n!r}")

    @classmethod
    def from_vector(cls, v, normalized: bool = True) -> "SingleExcState":
        v = np.asarray(v, dtype=complex)
        return cls(c_e0=v[0], c_g1=v[1], normalized=normalized)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c_e0, self.c_g1], dtype=complex)

    def overlap(self, other: "SingleExcState") -> complex:
        """Hermitian inner product <self|other>."""
        return np.conj(self.c_e0) * other.c_e0 + np.conj(self.c_g1) * other.c_g1

    @property
    def population_e0(self) -> float:
        return abs(self.c_e0) ** 2

    def unit(self) -> "SingleExcState":
        n = math.sqrt(abs(self.c_e0) ** 2 + abs(self.c_g1) ** 2)
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return SingleExcState(self.c_e0 / n, self.c_g1 / n, normalized=True)


EXCITED = SingleExcState(1.0, 0.0)
PHOTON = SingleExcState(0.0, 1.0)


def hamiltonian_matrix(p: SystemParams) -> np.ndarray:
    """2x2 generator [[delta, conj(coupling)], [coupling, -i*kappa/2]]."""
    return np.array(
        [
            [p.detuning, np.conj(p.coupling)],
            [p.coupling, -0.5j * p.kappa],
        ],
        dtype=complex,
    )


def discriminant(p: SystemParams) -> complex:
    """|coupling|^2 + (2*delta + i*kappa)^2 / 16.

    Vanishes exactly on second-order exceptional points; equals
    ((E1 - E2)/2)^2 for the two eigenenergies.
    """
    return abs(p.coupling) ** 2 + (2.0 * p.detuning + 1j * p.kappa) ** 2 / 16.0


def ep_distance(p: SystemParams) -> float:
    """Parameter-space distance from the exceptional ring
    (radius kappa/4 in the bz = 0 plane)."""
    return math.hypot(abs(p.coupling) - p.kappa / 4.0, p.detuning / 2.0)


@dataclass(frozen=True)
class WerGeometry:
    """Ring of exceptional points: radius kappa/4 in the bz = 0 plane."""

    kappa: float
    radius: float
    plane: str = "bz=0"

    def ring_point(self, angle: float) -> BVector:
        """A point on the ring at azimuthal angle ``angle``."""
        return BVector(self.radius * math.cos(angle), self.radius * math.sin(angle), 0.0)


def wer_geometry(kappa: float) -> WerGeometry:
    """Exceptional-ring geometry for decay rate ``kappa > 0``."""
    if not (kappa > 0):
        raise ValueError(f"kappa must be > 0, got {kappa!r}")
    return WerGeometry(kappa=float(kappa), radius=float(kappa) / 4.0)


@dataclass(frozen=True)
class BiorthEigensystem:
    """Paired eigenenergies with unit-norm right eigenvectors and the
    matching left co-vectors.

    Mode 1 takes the '+' branch of the principal square root of the
    discriminant; this labeling is local and is not continuous along
    parameter paths that wind around exceptional points.

    Left co-vectors are stored as rows acting by a plain (unconjugated)
    dot product on ket coefficients, so ``u1_l @ u1_r.vector == 1``
    exactly up to floating point: they are the rows of the inverse of the
    right-eigenvector matrix, which enforces biorthonormality.
    """

    e1: complex
    e2: complex
    u1_r: SingleExcState
    u2_r: SingleExcState
    u1_l: np.ndarray
    u2_l: np.ndarray

    @property
    def energies(self) -> np.ndarray:
        return np.array([self.e1, self.e2], dtype=complex)

    @property
    def right_matrix(self) -> np.ndarray:
        """2x2 matrix with right eigenvectors as columns."""
        return np.column_stack([self.u1_r.vector, self.u2_r.vector])

    @property
    def left_matrix(self) -> np.ndarray:
        """2x2 matrix with left co-vectors as rows (inverse of right_matrix)."""
        return np.vstack([self.u1_l, self.u2_l])


def eigensystem_arrays(coupling, detuning, kappa):
    """Vectorized biorthogonal eigensystem over arrays of model points.

    Parameters
    ----------
    coupling, detuning : array_like (broadcastable)
        Complex coupling and real detuning per point.
    kappa : float
        Common decay rate.

    Returns
    -------
    energies : ndarray, shape (..., 2)
    right : ndarray, shape (..., 2, 2)
        Unit-norm right eigenvectors as columns, ``right[..., :, n]``.
    left : ndarray, shape (..., 2, 2)
        Left co-vector rows, ``left[..., n, :]``; rows of the inverse of
        ``right``, so biorthonormality holds to machine precision.

    Raises
    ------
    EPProximityError
        If any point has |discriminant| < 1e-12 * kappa**2.
    """
    lam = np.asarray(coupling, dtype=complex)
    delta = np.asarray(detuning, dtype=float)
    lam, delta = np.broadcast_arrays(lam, delta)
    kappa = float(kappa)

    mean = (2.0 * delta - 1j * kappa) / 4.0
    dis = np.abs(lam) ** 2 + (2.0 * delta + 1j * kappa) ** 2 / 16.0
    tol = EP_DISCRIMINANT_RTOL * kappa**2
    bad = np.abs(dis) < tol
    if np.any(bad):
        raise EPProximityError(
            f"{int(np.count_nonzero(bad))} point(s) within the exceptional-point band "
            f"(|discriminant| < {tol:.3e})"
        )
    root = np.sqrt(dis)  # principal branch
    e = np.stack([mean + root, mean - root], axis=-1)

    # right eigenvector for mode n: (conj(lam), e_n - delta) normalized
    num_e0 = np.broadcast_to(np.conj(lam)[..., None], e.shape).copy()
    num_g1 = e - delta[..., None]
    norm = np.sqrt(np.abs(num_e0) ** 2 + np.abs(num_g1) ** 2)

    # decoupled points (lam == 0): the generator is diagonal and the formula
    # degenerates to (0, 0) for the mode with e_n == delta, so assign the
    # basis states directly (mode nearer the qubit branch takes |e,0>)
    dec = lam == 0
    if np.any(dec):
        mode1_qubit = np.abs(e[..., 0] - delta) <= np.abs(e[..., 1] - delta)
        on_e0 = np.stack([mode1_qubit, ~mode1_qubit], axis=-1) & dec[..., None]
        on_g1 = np.stack([~mode1_qubit, mode1_qubit], axis=-1) & dec[..., None]
        num_e0[on_e0] = 1.0
        num_g1[on_e0] = 0.0
        num_e0[on_g1] = 0.0
        num_g1[on_g1] = 1.0
        norm = np.sqrt(np.abs(num_e0) ** 2 + np.abs(num_g1) ** 2)

    right = np.stack([num_e0 / norm, num_g1 / norm], axis=-2)  # (..., component, mode)

    det = right[..., 0, 0] * right[..., 1, 1] - right[..., 0, 1] * right[..., 1, 0]
    left = np.empty_like(right)
    left[..., 0, 0] = right[..., 1, 1] / det
    left[..., 0, 1] = -right[..., 0, 1] / det
    left[..., 1, 0] = -right[..., 1, 0] / det
    left[..., 1, 1] = right[..., 0, 0] / det
    return e, right, left


def eigensystem(p: SystemParams) -> BiorthEigensystem:
    """Analytic biorthogonal eigensystem at one model point.

    Energies are (2*delta - i*kappa)/4 +/- sqrt(discriminant) with the
    principal square root; mode 1 takes '+'.  Right eigenvectors are the
    normalized (conj(coupling), E_n - delta) pairs; left co-vectors come
    from inverting the right-eigenvector matrix.

    Raises
    ------
    EPProximityError
        Within 1e-12 * kappa**2 of the exceptional ring, where left
        vectors diverge by self-orthogonality.
    """
    e, right, left = eigensystem_arrays(p.coupling, p.detuning, p.kappa)
    return BiorthEigensystem(
        e1=complex(e[0]),
        e2=complex(e[1]),
        u1_r=SingleExcState.from_vector(right[:, 0]),
        u2_r=SingleExcState.from_vector(right[:, 1]),
        u1_l=left[0, :].copy(),
        u2_l=left[1, :].copy(),
    )

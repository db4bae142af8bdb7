"""Synthetic measurement layer: state-mapping damping correction,
two-qubit embedding, projective sampling, density-matrix reconstruction,
and postselection onto the single-excitation subspace.

The readout chain maps the qubit-resonator state onto an ancilla-qubit
pair: |e,0> -> |e_a, g> and |g,1> -> |g_a, e>.  During the transfer the
photon keeps decaying, which damps the |g,1> amplitude; the channel here
models that damping and its exact inversion.

Two-qubit basis ordering is (|gg>, |ge>, |eg>, |ee>) with the ancilla
first, and the Pauli convention is Z|g> = +|g>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import SingleExcState
from .errors import PostselectionError

TWO_QUBIT_BASIS = ("gg", "ge", "eg", "ee")

# single-qubit Paulis in the (|g>, |e>) ordering, Z|g> = +|g>
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

#: the 15 observable labels, (i, j) over {I,X,Y,Z}^2 without II
PAULI_LABELS = tuple(a + b for a, b in product("IXYZ", repeat=2) if a + b != "II")

#: the 9 product measurement settings
MEASUREMENT_SETTINGS = tuple(a + b for a, b in product("XYZ", repeat=2))


def _pauli_matrix(label: str) -> np.ndarray:
    return np.kron(PAULI[label[0]], PAULI[label[1]])


@dataclass(frozen=True)
class MappingDelays:
    """Durations of the two state-transfer stages and the photon decay rate.

    ``t1`` covers the qubit-to-ancilla mapping, ``t2`` the
    resonator-to-qubit mapping (us); ``kappa`` in rad/us.
    """

    t1: float
    t2: float
    kappa: float

    def __post_init__(self):
        if self.t1 < 0 or self.t2 < 0 or self.kappa < 0:
            raise ValueError("t1, t2 and kappa must all be >= 0")

    @property
    def amplitude_factor(self) -> float:
        """Damping factor applied to the photon-branch amplitude."""
        return math.exp(-self.kappa * (self.t1 / 2.0 + self.t2 / 4.0))


def mapping_transmission(state: SingleExcState, d: MappingDelays) -> float:
    """Norm factor Z = |alpha|^2 + |beta|^2 * exp(-kappa*(t1 + t2/2))."""
    g = d.amplitude_factor
    return abs(state.c_e0) ** 2 + abs(state.c_g1) ** 2 * g * g


def apply_mapping_channel(state: SingleExcState, d: MappingDelays) -> SingleExcState:
    """Postselected state after the damped transfer.

    alpha' = alpha / sqrt(Z), beta' = beta * exp(-kappa*(t1/2 + t2/4)) / sqrt(Z)
    with Z the transmission; preserves normalization and the relative
    phase arg(beta/alpha) exactly.
    """
    g = d.amplitude_factor
    z = mapping_transmission(state, d)
    return SingleExcState(state.c_e0 / math.sqrt(z), state.c_g1 * g / math.sqrt(z))


def invert_mapping_correction(state: SingleExcState, d: MappingDelays) -> SingleExcState:
    """Undo :func:`apply_mapping_channel` (exact round trip up to phase)."""
    g = d.amplitude_factor
    a = state.c_e0
    b = state.c_g1 / g
    n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return SingleExcState(a / n, b / n)


def apply_mapping_density(rho: np.ndarray, d: MappingDelays) -> np.ndarray:
    """Mapping channel on a 2x2 single-excitation density matrix."""
    k = np.diag([1.0, d.amplitude_factor])
    out = k @ np.asarray(rho, dtype=complex) @ k
    return out / np.trace(out).real


def invert_mapping_density(rho: np.ndarray, d: MappingDelays) -> np.ndarray:
    """Inverse mapping channel on a 2x2 density matrix."""
    k = np.diag([1.0, 1.0 / d.amplitude_factor])
    out = k @ np.asarray(rho, dtype=complex) @ k
    return out / np.trace(out).real


def embed_two_qubit(state: SingleExcState) -> np.ndarray:
    """Projector onto alpha|eg> + beta|ge> in the two-qubit basis."""
    psi = np.zeros(4, dtype=complex)
    psi[2] = state.c_e0  # |e_a, g>
    psi[1] = state.c_g1  # |g_a, e>
    return np.outer(psi, psi.conj())


def two_qubit_from_triple(rho3: np.ndarray) -> np.ndarray:
    """Two-qubit state from a triple-basis (|g,0>,|e,0>,|g,1>) density.

    The transfer sends |g,0> -> |gg>, |e,0> -> |eg>, |g,1> -> |ge>; the
    |ee> row/column stays empty.
    """
    rho3 = np.asarray(rho3, dtype=complex)
    idx = [0, 2, 1]  # triple position of (gg, ge, eg)
    out = np.zeros((4, 4), dtype=complex)
    out[:3, :3] = rho3[np.ix_(idx, idx)]
    return out


def synthetic_output_state(state: SingleExcState, survival: float, d: MappingDelays) -> np.ndarray:
    """Full pre-postselection two-qubit state seen by the tomography.

    The conditional single-excitation state arrives with weight
    survival * transmission; every lost record piles up in |gg>.
    """
    if not 0.0 <= survival <= 1.0 + 1e-12:
        raise ValueError("survival must lie in [0, 1]")
    w = survival * mapping_transmission(state, d)
    rho = w * embed_two_qubit(apply_mapping_channel(state, d))
    rho[0, 0] += 1.0 - w
    return rho


def validate_two_qubit_density(rho: np.ndarray) -> np.ndarray:
    """Check Hermiticity (1e-10), unit trace (1e-10) and positivity (-1e-8)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ValueError("density matrix is not Hermitian within 1e-10")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError("density matrix trace differs from 1 by more than 1e-10")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -1e-8:
        raise ValueError("density matrix has an eigenvalue below -1e-8")
    return rho


def pauli_expectations(rho: np.ndarray) -> np.ndarray:
    """The 15 real expectation values <sigma_i x sigma_j>, (i,j) != (I,I),
    ordered as in :data:`PAULI_LABELS`."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(_pauli_matrix(lbl) @ rho).real for lbl in PAULI_LABELS])


def _setting_projectors(setting: str):
    """Rank-1 projectors for the four +/- outcome pairs of a product setting."""
    vecs = []
    for axis in setting:
        w, v = np.linalg.eigh(PAULI[axis])
        order = np.argsort(w)[::-1]  # outcomes (+1, -1)
        vecs.append(v[:, order])
    projs = []
    for i in range(2):
        for k in range(2):
            psi = np.kron(vecs[0][:, i], vecs[1][:, k])
            projs.append(np.outer(psi, psi.conj()))
    return projs  # outcome order (++, +-, -+, --)

#: outcome sign products per setting row: s1, s2, s1*s2 for (++, +-, -+, --)
_OUTCOME_SIGNS = np.array(
    [[+1, +1, +1], [+1, -1, -1], [-1, +1, -1], [-1, -1, +1]], dtype=float
)


def born_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Probabilities of the (++, +-, -+, --) outcomes of a product setting."""
    if setting not in MEASUREMENT_SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    p = np.array([np.trace(pr @ rho).real for pr in _setting_projectors(setting)])
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_counts(rho: np.ndarray, setting: str, shots: int, rng_seed: int) -> np.ndarray:
    """Multinomial outcome counts for one product-basis setting."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = born_probabilities(rho, setting)
    rng = np.random.default_rng(rng_seed)
    return rng.multinomial(shots, p)


def expectations_from_counts(counts_by_setting: dict) -> np.ndarray:
    """Estimate the 15 Pauli expectations from counts over the 9 settings.

    Two-body terms come from the matching setting; one-body terms average
    the marginals of the three settings that measure that axis.
    """
    missing = [s for s in MEASUREMENT_SETTINGS if s not in counts_by_setting]
    if missing:
        raise ValueError(f"incomplete basis set, missing settings: {missing}")
    est = {}
    singles = {lbl: [] for lbl in PAULI_LABELS if "I" in lbl}
    for setting in MEASUREMENT_SETTINGS:
        c = np.asarray(counts_by_setting[setting], dtype=float)
        if c.shape != (4,) or c.sum() <= 0:
            raise ValueError(f"counts for {setting!r} must be 4 nonnegative numbers")
        freq = c / c.sum()
        s1, s2, s12 = _OUTCOME_SIGNS.T @ freq
        est[setting] = s12
        singles[setting[0] + "I"].append(s1)
        singles["I" + setting[1]].append(s2)
    for lbl, vals in singles.items():
        est[lbl] = float(np.mean(vals))
    return np.array([est[lbl] for lbl in PAULI_LABELS])


def reconstruct_density(counts_by_setting: dict | None = None, expectations=None) -> np.ndarray:
    """Two-qubit density matrix by linear inversion plus physicality projection.

    Accepts either counts over the 9 product settings or the 15 exact
    expectation values.  Linear inversion is followed by clipping
    negative eigenvalues at zero and renormalizing the trace, the
    closest-PSD projection in the clipped eigenbasis.
    """
    if (counts_by_setting is None) == (expectations is None):
        raise ValueError("pass exactly one of counts_by_setting or expectations")
    if expectations is None:
        expectations = expectations_from_counts(counts_by_setting)
    expectations = np.asarray(expectations, dtype=float)
    if expectations.shape != (15,):
        raise ValueError("expected 15 expectation values")
    rho = np.eye(4, dtype=complex)
    for lbl, val in zip(PAULI_LABELS, expectations):
        rho += val * _pauli_matrix(lbl)
    rho /= 4.0
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("reconstruction produced a null state")
    rho = (v * w) @ v.conj().T
    return rho / np.trace(rho).real


def density_to_json(rho: np.ndarray) -> list:
    """Row-major [re, im] pairs, the JSON wire format for 4x4 densities."""
    rho = np.asarray(rho, dtype=complex)
    return [[z.real, z.imag] for z in rho.reshape(-1)]


def density_from_json(payload) -> np.ndarray:
    """Inverse of :func:`density_to_json`."""
    flat = np.array([complex(re, im) for re, im in payload])
    n = int(math.isqrt(flat.size))
    if n * n != flat.size:
        raise ValueError("payload length is not a perfect square")
    return flat.reshape(n, n)


def project_single_excitation(rho: np.ndarray):
    """Normalized (|e_a g>, |g_a e>) block and the postselection probability.

    The block ordering matches :class:`~weylring.core.SingleExcState`:
    index 0 <-> |eg> <-> |e,0> and index 1 <-> |ge> <-> |g,1>.
    """
    rho = np.asarray(rho, dtype=complex)
    block = rho[np.ix_([2, 1], [2, 1])]
    weight = float(np.trace(block).real)
    if weight <= 1e-6:
        raise PostselectionError(f"single-excitation weight {weight:.3e} <= 1e-6")
    return block / weight, weight

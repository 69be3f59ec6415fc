"""Noiseless statevector core: state construction, gates, encodings, measurement.

Convention: qubit 0 is the most significant bit of the basis index, so for two
qubits the amplitude order is |00>, |01>, |10>, |11>. Gates act in place on the
amplitude array through strided views (never via full 2^Q x 2^Q matrices) and
return the state, so calls can be chained.

The private ``_*`` kernels operate on bare complex arrays whose *last* axis is
the 2^Q state dimension; any leading axes are independent batch entries, and
rotation angles broadcast against them. The public functions wrap a single
:class:`StateVector`, which is the shape the rest of the package exposes.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DegenerateInputError

MAX_QUBITS = 24
DEGENERATE_NORM = 1e-12


class StateVector:
    """Pure state of ``num_qubits`` qubits as 2^Q complex amplitudes."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray):
        self.num_qubits = num_qubits
        self.amplitudes = amplitudes

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


# ---------------------------------------------------------------------------
# array kernels


def _qubit_view(amps: np.ndarray, num_qubits: int, qubit: int) -> np.ndarray:
    """Reshape so the chosen qubit sits alone on axis -2."""
    lead = amps.shape[:-1]
    return amps.reshape(*lead, 1 << qubit, 2, 1 << (num_qubits - qubit - 1))


def _ry(amps: np.ndarray, num_qubits: int, qubit: int, theta) -> np.ndarray:
    v = _qubit_view(amps, num_qubits, qubit)
    half = 0.5 * np.asarray(theta, dtype=np.float64)
    c = np.cos(half)[..., None, None]
    s = np.sin(half)[..., None, None]
    a = v[..., 0, :]
    b = v[..., 1, :]
    top = c * a - s * b
    v[..., 1, :] = s * a + c * b
    v[..., 0, :] = top
    return amps


def _cnot(amps: np.ndarray, num_qubits: int, control: int, target: int) -> np.ndarray:
    lead = amps.shape[:-1]
    lo, hi = (control, target) if control < target else (target, control)
    v = amps.reshape(
        *lead, 1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (num_qubits - hi - 1)
    )
    if control < target:
        one_a = (Ellipsis, 1, slice(None), 0, slice(None))
        one_b = (Ellipsis, 1, slice(None), 1, slice(None))
    else:
        one_a = (Ellipsis, 0, slice(None), 1, slice(None))
        one_b = (Ellipsis, 1, slice(None), 1, slice(None))
    tmp = v[one_a].copy()
    v[one_a] = v[one_b]
    v[one_b] = tmp
    return amps


def _pauli(amps: np.ndarray, num_qubits: int, qubit: int, which: str) -> np.ndarray:
    v = _qubit_view(amps, num_qubits, qubit)
    if which == "Z":
        v[..., 1, :] *= -1.0
        return amps
    a = v[..., 0, :].copy()
    b = v[..., 1, :]
    if which == "X":
        v[..., 0, :] = b
        v[..., 1, :] = a
    elif which == "Y":
        v[..., 0, :] = -1j * b
        v[..., 1, :] = 1j * a
    else:
        raise ConfigurationError(f"unknown Pauli label {which!r}, expected X, Y, or Z")
    return amps


def _z_expectation(amps: np.ndarray, num_qubits: int, qubit: int):
    v = _qubit_view(amps, num_qubits, qubit)
    pr = v.real**2 + v.imag**2
    return pr[..., 0, :].sum(axis=(-2, -1)) - pr[..., 1, :].sum(axis=(-2, -1))


def _all_z_expectations(amps: np.ndarray, num_qubits: int) -> np.ndarray:
    """<Z_q> for every qubit, stacked on the last axis."""
    return np.stack(
        [_z_expectation(amps, num_qubits, q) for q in range(num_qubits)], axis=-1
    )


def _zero_amplitudes(num_qubits: int, lead: tuple[int, ...] = ()) -> np.ndarray:
    amps = np.zeros((*lead, 1 << num_qubits), dtype=np.complex128)
    amps[..., 0] = 1.0
    return amps


# ---------------------------------------------------------------------------
# public single-state operations


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise ConfigurationError(
            f"qubit index {qubit} out of range for {state.num_qubits} qubits"
        )


def zero_state(num_qubits: int) -> StateVector:
    """|0...0> on ``num_qubits`` qubits."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    return StateVector(num_qubits, _zero_amplitudes(num_qubits))


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    """Rotate ``qubit`` about Y by ``theta`` radians (in place)."""
    _check_qubit(state, qubit)
    _ry(state.amplitudes, state.num_qubits, qubit, theta)
    return state


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` where ``control`` is 1 (in place)."""
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ConfigurationError(f"control and target coincide at qubit {control}")
    _cnot(state.amplitudes, state.num_qubits, control, target)
    return state


def apply_pauli(state: StateVector, qubit: int, which: str) -> StateVector:
    """Apply Pauli X, Y, or Z to ``qubit`` (in place)."""
    _check_qubit(state, qubit)
    _pauli(state.amplitudes, state.num_qubits, qubit, which)
    return state


def amplitude_encode(x, num_qubits: int) -> StateVector:
    """Load a real vector as normalized amplitudes, zero-padded to 2^Q.

    The state is written directly (no preparation circuit). Vectors with norm
    below ``DEGENERATE_NORM`` are rejected rather than silently normalized.
    """
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ConfigurationError(f"expected a non-empty 1-D vector, got shape {x.shape}")
    dim = 1 << num_qubits
    if x.size > dim:
        raise ConfigurationError(
            f"vector of length {x.size} does not fit in {num_qubits} qubits (max {dim})"
        )
    nrm = float(np.linalg.norm(x))
    if nrm < DEGENERATE_NORM:
        raise DegenerateInputError(
            f"input norm {nrm:.3e} is below {DEGENERATE_NORM:.0e}; refusing to normalize"
        )
    amps = np.zeros(dim, dtype=np.complex128)
    amps[: x.size] = x / nrm
    return StateVector(num_qubits, amps)


def angle_encode(state: StateVector, angles) -> StateVector:
    """Apply RY(angles[i]) to qubit i for all i (in place, composable mid-circuit)."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (state.num_qubits,):
        raise ConfigurationError(
            f"need one angle per qubit: got {angles.shape}, expected ({state.num_qubits},)"
        )
    for q in range(state.num_qubits):
        _ry(state.amplitudes, state.num_qubits, q, angles[q])
    return state


def z_expectation(state: StateVector, qubit: int) -> float:
    """<Z> on ``qubit``: sum of |a_i|^2 signed by the qubit's bit value."""
    _check_qubit(state, qubit)
    return float(_z_expectation(state.amplitudes, state.num_qubits, qubit))


def probabilities(state: StateVector) -> np.ndarray:
    """Elementwise squared magnitudes of the amplitudes."""
    a = state.amplitudes
    return a.real**2 + a.imag**2

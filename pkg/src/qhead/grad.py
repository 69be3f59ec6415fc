"""Circuit evaluation and differentiation over gate lists.

Three gradient routes with different trade-offs:

* parameter-shift: exact for RY-parameterized circuits, two shifted
  evaluations per angle, and the only route that remains valid when a noise
  trajectory or finite shots are attached;
* adjoint reverse accumulation: one backward sweep, noiseless circuits only;
* central finite differences: O(h^2) oracle used for cross-checking.

Shifted evaluations are batched: all parameter rows run through the gate list
at once on a (rows, 2^Q) amplitude array, chunked to bound peak memory.
"""
from __future__ import annotations

import math

import numpy as np

from . import noise as noise_mod
from .ansatz import CNOT, DATA, ENCODE, PAULI, RY, GateList, expand_encoding, parameter_slot_count
from .errors import ConfigurationError, UnsupportedModeError
from .simcore import (
    MAX_QUBITS,
    _all_z_expectations,
    _cnot,
    _pauli,
    _ry,
    _z_expectation,
    _zero_amplitudes,
)

# cap on amplitudes held at once during batched evaluation (~64 MB complex128)
_CHUNK_ELEMENTS = 1 << 22


def run_gates(amps: np.ndarray, circuit: GateList, params=None, latent=None) -> np.ndarray:
    """Execute an expanded gate list in place on ``amps`` (last axis = state).

    ``params`` and ``latent`` may carry leading batch axes matching ``amps``;
    angles broadcast row-wise.
    """
    n = circuit.num_qubits
    for g in circuit.gates:
        kind = g[0]
        if kind == RY:
            _ry(amps, n, g[1], params[..., g[2]])
        elif kind == CNOT:
            _cnot(amps, n, g[1], g[2])
        elif kind == DATA:
            _ry(amps, n, g[1], latent[..., g[2]])
        elif kind == PAULI:
            _pauli(amps, n, g[1], g[2])
        elif kind == ENCODE:
            raise ConfigurationError("encoding steps must be expanded before execution")
        else:
            raise ConfigurationError(f"unknown gate record {g!r}")
    return amps


def _prepare(circuit: GateList, params, latent):
    """Validate shapes and expand any encoding steps against ``latent``."""
    if not 1 <= circuit.num_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"register width must be in [1, {MAX_QUBITS}] for simulation, "
            f"got {circuit.num_qubits}"
        )
    params = np.asarray(params if params is not None else [], dtype=np.float64)
    if params.ndim != 1:
        raise ConfigurationError(f"params must be a 1-D vector, got shape {params.shape}")
    if latent is not None:
        latent = np.asarray(latent, dtype=np.float64)
        if latent.ndim != 1:
            raise ConfigurationError(f"latent must be a 1-D vector, got shape {latent.shape}")
    q = circuit.num_qubits
    if any(g[0] == ENCODE for g in circuit.gates):
        if latent is None:
            raise ConfigurationError("circuit has encoding steps but no latent vector given")
        if latent.size == 0 or latent.size % q:
            raise ConfigurationError(
                f"latent length {latent.size} is not a multiple of the register width {q}"
            )
        circuit = expand_encoding(circuit, latent.size // q)
    n_slots = parameter_slot_count(circuit)
    if params.size != n_slots:
        raise ConfigurationError(
            f"circuit has {n_slots} parameter slots but got {params.size} parameters"
        )
    data_idx = [g[2] for g in circuit.gates if g[0] == DATA]
    if data_idx:
        if latent is None:
            raise ConfigurationError("circuit reads latent values but no latent vector given")
        if max(data_idx) >= latent.size:
            raise ConfigurationError(
                f"latent index {max(data_idx)} out of range for length {latent.size}"
            )
    return circuit, params, latent


def lift_data_slots(circuit: GateList) -> tuple[GateList, np.ndarray]:
    """Rewrite data records as fresh parameter slots appended after the real ones.

    Returns the rewritten list and, per new slot, the latent index it reads.
    Callers evaluate with ``concat(params, latent[occurrences])``; this is what
    lets the shift rule act on each encoding-gate occurrence individually.
    """
    base = parameter_slot_count(circuit)
    gates: list[tuple] = []
    occurrences: list[int] = []
    for g in circuit.gates:
        if g[0] == DATA:
            gates.append((RY, g[1], base + len(occurrences)))
            occurrences.append(g[2])
        else:
            gates.append(g)
    return GateList(circuit.num_qubits, gates), np.asarray(occurrences, dtype=np.intp)


def _batch_expectations(circuit, rows, latent, measured, initial=None) -> np.ndarray:
    """<Z_measured> for each parameter row; rows shape (R, P)."""
    n = circuit.num_qubits
    dim = 1 << n
    n_rows = rows.shape[0]
    out = np.empty(n_rows, dtype=np.float64)
    step = max(1, _CHUNK_ELEMENTS // dim)
    for start in range(0, n_rows, step):
        stop = min(start + step, n_rows)
        if initial is None:
            amps = _zero_amplitudes(n, (stop - start,))
        else:
            amps = np.tile(initial, (stop - start, 1))
        run_gates(amps, circuit, rows[start:stop], latent)
        out[start:stop] = _z_expectation(amps, n, measured)
    return out


def _batch_all_z(circuit, rows, latent, initial=None) -> np.ndarray:
    """Per-qubit <Z> for each parameter row; shape (rows, num_qubits)."""
    n = circuit.num_qubits
    dim = 1 << n
    n_rows = rows.shape[0]
    out = np.empty((n_rows, n), dtype=np.float64)
    step = max(1, _CHUNK_ELEMENTS // dim)
    for start in range(0, n_rows, step):
        stop = min(start + step, n_rows)
        if initial is None:
            amps = _zero_amplitudes(n, (stop - start,))
        else:
            amps = np.tile(initial, (stop - start, 1))
        run_gates(amps, circuit, rows[start:stop], latent)
        out[start:stop] = _all_z_expectations(amps, n)
    return out


def _shift_rows(params: np.ndarray, delta: float) -> np.ndarray:
    """(2P, P) matrix: +delta on the diagonal for the first P rows, -delta after."""
    p = params.size
    rows = np.tile(params, (2 * p, 1))
    rows[np.arange(p), np.arange(p)] += delta
    rows[p + np.arange(p), np.arange(p)] -= delta
    return rows


def _paired_shift_values(circuit, params, latent, measured, delta, initial=None):
    """E(theta_j + delta), E(theta_j - delta) for every parameter j."""
    p = params.size
    if p == 0:
        empty = np.zeros(0)
        return empty, empty
    vals = _batch_expectations(circuit, _shift_rows(params, delta), latent, measured, initial)
    return vals[:p], vals[p:]


def evaluate_expectation(circuit: GateList, params, latent=None, measured: int = 0,
                         initial: np.ndarray | None = None) -> float:
    """Noiseless, infinite-shot <Z> on ``measured`` after running from |0...0>.

    ``initial`` substitutes a caller-prepared starting state (e.g. an
    amplitude-encoded input) for |0...0>.
    """
    circuit, params, latent = _prepare(circuit, params, latent)
    if not 0 <= measured < circuit.num_qubits:
        raise ConfigurationError(f"measured qubit {measured} out of range")
    amps = _zero_amplitudes(circuit.num_qubits) if initial is None else initial.copy()
    run_gates(amps, circuit, params, latent)
    return float(_z_expectation(amps, circuit.num_qubits, measured))


def trajectory_expectation(circuit: GateList, params, latent=None, noise=None,
                           rng: np.random.Generator | None = None, measured: int = 0) -> float:
    """<Z> for one sampled Pauli-insertion trajectory (still infinite shots)."""
    circuit, params, latent = _prepare(circuit, params, latent)
    if noise is not None and (noise.p1q > 0 or noise.p2q > 0):
        if rng is None:
            raise ConfigurationError("an rng stream is required for gate-noise trajectories")
        circuit = noise_mod.sample_pauli_insertions(circuit, noise, rng)
    amps = _zero_amplitudes(circuit.num_qubits)
    run_gates(amps, circuit, params, latent)
    return float(_z_expectation(amps, circuit.num_qubits, measured))


def parameter_shift_gradient(circuit: GateList, params, latent=None, measured: int = 0,
                             noise=None, rng: np.random.Generator | None = None,
                             initial: np.ndarray | None = None) -> np.ndarray:
    """d<Z>/d(params) via [E(theta + pi/2) - E(theta - pi/2)] / 2 per angle.

    With a noise model attached, one Pauli trajectory is drawn and shared by
    every shifted evaluation, and finite-shot sampling reuses one normal draw
    per +/- pair (common random numbers).
    """
    circuit, params, latent = _prepare(circuit, params, latent)
    run_list = circuit
    noisy = noise is not None and not noise.is_noiseless
    if noisy and (noise.p1q > 0 or noise.p2q > 0):
        if rng is None:
            raise ConfigurationError("an rng stream is required for noisy gradients")
        run_list = noise_mod.sample_pauli_insertions(circuit, noise, rng)
    plus, minus = _paired_shift_values(run_list, params, latent, measured, math.pi / 2, initial)
    if noisy and noise.shots is not None and params.size:
        if rng is None:
            raise ConfigurationError("an rng stream is required for noisy gradients")
        eps = rng.standard_normal(params.size)
        plus = noise_mod.gaussian_shot_estimate(plus, noise.shots, eps)
        minus = noise_mod.gaussian_shot_estimate(minus, noise.shots, eps)
    return (plus - minus) / 2.0


def finite_difference_oracle(circuit: GateList, params, latent=None, measured: int = 0,
                             h: float = 1e-4, initial: np.ndarray | None = None) -> np.ndarray:
    """Central differences [E(theta+h) - E(theta-h)] / (2h), noiseless."""
    if h <= 0:
        raise ConfigurationError(f"step size must be positive, got {h}")
    circuit, params, latent = _prepare(circuit, params, latent)
    plus, minus = _paired_shift_values(circuit, params, latent, measured, h, initial)
    return (plus - minus) / (2.0 * h)


def adjoint_observable_gradients(circuit: GateList, params, latent=None,
                                 z_weights=None, measured: int = 0,
                                 initial: np.ndarray | None = None):
    """One reverse sweep for E = <psi| O |psi| with O = sum_j w_j Z_j.

    Returns (gradient wrt params, gradient wrt latent). ``z_weights`` defaults
    to the indicator of ``measured``. Noiseless circuits only; each RY is
    un-applied while a cotangent state accumulates Re<lambda|dU|psi>.
    """
    circuit, params, latent = _prepare(circuit, params, latent)
    n = circuit.num_qubits
    dim = 1 << n
    if z_weights is None:
        z_weights = np.zeros(n)
        z_weights[measured] = 1.0
    z_weights = np.asarray(z_weights, dtype=np.float64)
    if z_weights.shape != (n,):
        raise ConfigurationError(f"z_weights must have shape ({n},), got {z_weights.shape}")

    psi = _zero_amplitudes(n) if initial is None else initial.copy()
    run_gates(psi, circuit, params, latent)

    idx = np.arange(dim)
    diag = np.zeros(dim)
    for j in range(n):
        if z_weights[j] != 0.0:
            diag += z_weights[j] * (1.0 - 2.0 * ((idx >> (n - 1 - j)) & 1))
    lam = diag * psi

    grad_params = np.zeros(params.size)
    grad_latent = np.zeros(latent.size if latent is not None else 0)
    for g in reversed(circuit.gates):
        kind = g[0]
        if kind == CNOT:
            _cnot(psi, n, g[1], g[2])
            _cnot(lam, n, g[1], g[2])
        elif kind == PAULI:
            _pauli(psi, n, g[1], g[2])
            _pauli(lam, n, g[1], g[2])
        elif kind in (RY, DATA):
            theta = params[g[2]] if kind == RY else latent[g[2]]
            _ry(psi, n, g[1], -theta)
            shifted = psi.copy()
            # dRY/dtheta = RY(theta + pi) / 2; the 1/2 cancels against 2*Re(...)
            _ry(shifted, n, g[1], theta + math.pi)
            contrib = float(np.vdot(lam, shifted).real)
            if kind == RY:
                grad_params[g[2]] += contrib
            else:
                grad_latent[g[2]] += contrib
            _ry(lam, n, g[1], -theta)
        else:
            raise ConfigurationError(f"unknown gate record {g!r}")
    return grad_params, grad_latent


def adjoint_gradient(circuit: GateList, params, latent=None, measured: int = 0,
                     noise=None, initial: np.ndarray | None = None) -> np.ndarray:
    """Adjoint-mode d<Z>/d(params); matches the shift rule on noiseless circuits."""
    if noise is not None and not noise.is_noiseless:
        raise UnsupportedModeError("adjoint differentiation supports noiseless evaluation only")
    grad_params, _ = adjoint_observable_gradients(
        circuit, params, latent, measured=measured, initial=initial
    )
    return grad_params


def parameter_shift_jacobian(circuit: GateList, params, latent=None,
                             initial: np.ndarray | None = None) -> np.ndarray:
    """d<Z_q>/d(theta_p) for every qubit q, shape (num_qubits, P). Noiseless."""
    circuit, params, latent = _prepare(circuit, params, latent)
    p = params.size
    if p == 0:
        return np.zeros((circuit.num_qubits, 0))
    vals = _batch_all_z(circuit, _shift_rows(params, math.pi / 2), latent, initial)
    return (vals[:p] - vals[p:]).T / 2.0

"""Statevector basics: states, gates, encodings, and measurement.

The register convention: qubit 0 is the most significant bit of the basis
index, so a 2-qubit register orders amplitudes |00>, |01>, |10>, |11>.
"""
import math

import numpy as np

from qhead.simcore import (
    amplitude_encode,
    angle_encode,
    apply_cnot,
    apply_pauli,
    apply_ry,
    probabilities,
    z_expectation,
    zero_state,
)

# |0> rotated about Y: amplitudes trace the cos/sin half-angle circle
state = zero_state(1)
apply_ry(state, 0, math.pi / 3)
print("RY(pi/3)|0> amplitudes:", np.round(state.amplitudes, 4))
print("<Z> =", round(z_expectation(state, 0), 4), "== cos(pi/3) =", round(math.cos(math.pi / 3), 4))

# entangle two qubits: H-like rotation then CNOT gives a Bell-ish pair
pair = zero_state(2)
apply_ry(pair, 0, math.pi / 2)
apply_cnot(pair, 0, 1)
print("\nafter RY(pi/2) on qubit 0 and CNOT(0 -> 1):")
print("amplitudes:", np.round(pair.amplitudes, 4))
print("probabilities:", np.round(probabilities(pair), 4))
print("<Z_0> =", round(z_expectation(pair, 0), 12), " <Z_1> =", round(z_expectation(pair, 1), 12))

# Pauli insertions are plain gates on the state
apply_pauli(pair, 1, "X")
print("after X on qubit 1:", np.round(pair.amplitudes, 4))

# amplitude encoding loads a classical vector directly as the state
vec = np.array([3.0, 4.0])
encoded = amplitude_encode(vec, 1)
print("\namplitude_encode([3, 4]):", encoded.amplitudes.real)

# a 768-dim embedding needs 10 qubits (1024 amplitudes, zero-padded)
embedding = np.random.default_rng(0).standard_normal(768)
wide = amplitude_encode(embedding, 10)
print("768-dim embedding ->", wide.amplitudes.shape[0], "amplitudes,",
      "norm", round(wide.norm(), 12))

# angle encoding rotates each qubit by one latent value; it composes, which
# is what re-uploading relies on
latent = [0.4, -1.1, 0.9]
reg = zero_state(3)
angle_encode(reg, latent)
angle_encode(reg, latent)  # second upload of the same values
print("\ntwo angle-encoding passes of", latent)
print("per-qubit <Z>:", [round(z_expectation(reg, q), 4) for q in range(3)])

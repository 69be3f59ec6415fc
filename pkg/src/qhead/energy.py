"""Inference-energy estimates for running the re-uploading circuit on a QPU
versus statevector simulation on a GPU, and the qubit count where they cross.

With gate counts SQ (single-qubit) and TQ (two-qubit) for an Nq-qubit circuit:

    E_qpu = Nq * (SQ * t_1q + TQ * t_2q) * shots * P_qpu / 1000   [kJ]
    E_gpu = 2^Nq * (SQ * 4 + TQ * 8) / F_gpu * P_gpu / 1000       [kJ]

Per-gate statevector updates cost 4 (single-qubit) or 8 (two-qubit) floating
point operations per amplitude; GPU communication overhead is taken as zero,
which flatters the GPU and makes the crossover estimate conservative.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ansatz import CircuitSpec, gate_counts
from .errors import ConfigurationError


@dataclass(frozen=True)
class EnergyConstants:
    qpu_watts_per_qubit: float = 300.0
    t_1q_seconds: float = 1e-4
    t_2q_seconds: float = 1e-5
    shots: int = 8000
    gpu_watts: float = 700.0
    gpu_flops: float = 3.4e13

    def __post_init__(self):
        for name in ("qpu_watts_per_qubit", "t_1q_seconds", "t_2q_seconds",
                     "shots", "gpu_watts", "gpu_flops"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")


DEFAULT_CONSTANTS = EnergyConstants()


def qpu_energy_kj(spec: CircuitSpec, constants: EnergyConstants = DEFAULT_CONSTANTS) -> float:
    single, two = gate_counts(spec)
    seconds = single * constants.t_1q_seconds + two * constants.t_2q_seconds
    return spec.qubits * seconds * constants.shots * constants.qpu_watts_per_qubit / 1000.0


def gpu_energy_kj(spec: CircuitSpec, constants: EnergyConstants = DEFAULT_CONSTANTS) -> float:
    single, two = gate_counts(spec)
    flops = (1 << spec.qubits) * (single * 4 + two * 8)
    return flops / constants.gpu_flops * constants.gpu_watts / 1000.0


def _family_spec(qubits: int, main_layers: int, reupload_count: int,
                 reupload_layers: int) -> CircuitSpec:
    return CircuitSpec(
        qubits=qubits,
        connectivity=1,
        main_layers=main_layers,
        reupload_count=reupload_count,
        reupload_layers=reupload_layers,
    )


def crossover_curve(constants: EnergyConstants = DEFAULT_CONSTANTS,
                    qubit_range=range(2, 61), main_layers: int = 2,
                    reupload_count: int = 4, reupload_layers: int = 1):
    """Rows of (qubits, e_qpu_kj, e_gpu_kj) over the scanned widths."""
    rows = []
    for q in qubit_range:
        spec = _family_spec(q, main_layers, reupload_count, reupload_layers)
        rows.append((q, qpu_energy_kj(spec, constants), gpu_energy_kj(spec, constants)))
    return rows


def find_crossover(constants: EnergyConstants = DEFAULT_CONSTANTS,
                   qubit_range=range(2, 61), main_layers: int = 2,
                   reupload_count: int = 4, reupload_layers: int = 1) -> int | None:
    """Smallest scanned qubit count where GPU energy meets or exceeds QPU energy."""
    for q, e_qpu, e_gpu in crossover_curve(
        constants, qubit_range, main_layers, reupload_count, reupload_layers
    ):
        if e_gpu >= e_qpu:
            return q
    return None

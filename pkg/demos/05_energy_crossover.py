"""Where QPU inference becomes cheaper than GPU statevector simulation.

QPU energy grows quadratically with width (linear gate count times per-qubit
power); GPU statevector cost grows as 2^Q. The scan uses the standard circuit
family (M=2, R=4, N=1) and prints both the default constants and the
alternative reading that reuses the QPU power figure in the GPU formula.
"""
from qhead.energy import DEFAULT_CONSTANTS, EnergyConstants, crossover_curve, find_crossover

rows = crossover_curve()
print("qubits   E_qpu [kJ]      E_gpu [kJ]")
for q, e_qpu, e_gpu in rows:
    if q % 4 == 0 or 44 <= q <= 48:
        marker = "  <-- crossover region" if 44 <= q <= 48 else ""
        print(f"{q:4d} {e_qpu:14.1f} {e_gpu:15.1f}{marker}")

print(f"\ncrossover with default constants: {find_crossover()} qubits")

ten_x_gpu = EnergyConstants(gpu_flops=DEFAULT_CONSTANTS.gpu_flops * 10)
print(f"with a 10x faster GPU           : {find_crossover(ten_x_gpu)} qubits "
      f"(shifts by ~log2(10) ~= 3)")

qpu_power_in_gpu_formula = EnergyConstants(gpu_watts=300.0)
print(f"GPU formula at 300 W instead    : {find_crossover(qpu_power_in_gpu_formula)} qubits")

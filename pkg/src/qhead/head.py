"""The hybrid classification head.

Pipeline: E parallel simulated encoders (amplitude encoding plus an exact
trainable circuit, measured qubit-wise) produce a latent vector in
[-1, 1]^(E*Qc); the re-uploading circuit loads it by angle encoding, runs
under optional gate/shot noise, and is measured on qubit 0; a final linear
layer maps concat(latent, z) to class logits (no separate bias column). The
encoders are always evaluated exactly; noise applies to the re-uploading
circuit only. When the latent is longer than the circuit width, each encoding
step applies stacked rotation passes, one per width-sized latent slice.

Gradients: analytic linear-layer terms chain with parameter-shift gradients of
the noisy circuit (one shared Pauli trajectory, and one normal draw per +/-
pair, as common random numbers) and an adjoint sweep through the exact
encoders. With no noise attached the circuit gradient also uses the adjoint
fast path; both routes agree to 1e-8 and are cross-checked in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import noise as noise_mod
from . import seeding
from .ansatz import RY, CircuitSpec, GateList, assemble_head_circuit, build_block, count_parameters, expand_encoding
from .errors import ConfigurationError
from .grad import (
    _batch_expectations,
    adjoint_observable_gradients,
    evaluate_expectation,
    lift_data_slots,
    parameter_shift_jacobian,
    run_gates,
)
from .simcore import (
    MAX_QUBITS,
    _all_z_expectations,
    _z_expectation,
    _zero_amplitudes,
    amplitude_encode,
)
from .trainer import cross_entropy_loss


@dataclass(frozen=True)
class EncoderConfig:
    """Shape of the encoder stage: E parallel circuits of Qc qubits each."""

    num_encoders: int = 1
    encoder_qubits: int = 10
    encoder_layers: int = 27
    connectivity: int = 1
    extra_rotation: bool = True  # one additional trainable rotation per encoder

    def __post_init__(self):
        if self.num_encoders < 1:
            raise ConfigurationError(f"need at least one encoder, got {self.num_encoders}")
        if self.encoder_qubits < 1:
            raise ConfigurationError(f"encoder qubits must be >= 1, got {self.encoder_qubits}")
        if self.encoder_layers < 0:
            raise ConfigurationError(f"encoder layers must be >= 0, got {self.encoder_layers}")
        if self.encoder_layers > 0 and not 1 <= self.connectivity < self.encoder_qubits:
            raise ConfigurationError(
                f"encoder connectivity must satisfy 1 <= C < Qc, got {self.connectivity}"
            )

    @property
    def params_per_encoder(self) -> int:
        return self.encoder_layers * self.encoder_qubits + int(self.extra_rotation)

    @property
    def latent_dim(self) -> int:
        return self.num_encoders * self.encoder_qubits


@dataclass
class HeadParams:
    """All trainable values: per-encoder angles, circuit angles, linear weights."""

    theta_c: list[np.ndarray]
    theta_q: np.ndarray
    linear: np.ndarray | None


# ---------------------------------------------------------------------------
# encoder stage (always exact)


def encoder_circuit(config: EncoderConfig) -> GateList:
    """Trainable circuit of one encoder (runs after amplitude encoding)."""
    block = build_block(config.encoder_qubits, config.connectivity, config.encoder_layers)
    gates = list(block.gates)
    if config.extra_rotation:
        gates.append((RY, 0, config.encoder_layers * config.encoder_qubits))
    return GateList(config.encoder_qubits, gates)


def encoder_forward(x, theta_c, config: EncoderConfig) -> np.ndarray:
    """Latent of one encoder: exact per-qubit <Z> (no shots, no gate noise)."""
    theta_c = np.asarray(theta_c, dtype=np.float64)
    if theta_c.shape != (config.params_per_encoder,):
        raise ConfigurationError(
            f"encoder expects {config.params_per_encoder} parameters, got shape {theta_c.shape}"
        )
    state = amplitude_encode(x, config.encoder_qubits)
    run_gates(state.amplitudes, encoder_circuit(config), theta_c, None)
    return _all_z_expectations(state.amplitudes, config.encoder_qubits)


def encoder_backward(x, theta_c, config: EncoderConfig, dlatent,
                     method: str = "adjoint") -> np.ndarray:
    """Gradient of dlatent . latent(x, theta_c) w.r.t. theta_c.

    "adjoint" backpropagates the weighted-Z observable in one reverse sweep;
    "shift" forms the full shift-rule Jacobian first. They agree to solver
    precision; adjoint is the fast default.
    """
    theta_c = np.asarray(theta_c, dtype=np.float64)
    dlatent = np.asarray(dlatent, dtype=np.float64)
    circuit = encoder_circuit(config)
    initial = amplitude_encode(x, config.encoder_qubits).amplitudes
    if method == "adjoint":
        grads, _ = adjoint_observable_gradients(
            circuit, theta_c, z_weights=dlatent, initial=initial
        )
        return grads
    if method == "shift":
        jac = parameter_shift_jacobian(circuit, theta_c, initial=initial)
        return jac.T @ dlatent
    raise ConfigurationError(f"unknown encoder gradient method {method!r}")


def multi_encoder_forward(x, theta_c_list, config: EncoderConfig) -> np.ndarray:
    """Concatenated latents of E independent encoders reading the same input."""
    if len(theta_c_list) != config.num_encoders:
        raise ConfigurationError(
            f"expected {config.num_encoders} parameter vectors, got {len(theta_c_list)}"
        )
    return np.concatenate([encoder_forward(x, t, config) for t in theta_c_list])


# ---------------------------------------------------------------------------
# re-uploading circuit stage (noise lives here)


@dataclass
class _PqcPlan:
    """Precomputed circuit structure for one (spec, latent length) pairing."""

    spec: CircuitSpec
    expanded: GateList
    lifted: GateList
    occurrences: np.ndarray
    n_params: int
    latent_dim: int


def _plan_pqc(spec: CircuitSpec, latent_dim: int) -> _PqcPlan:
    spec.validate()
    if spec.qubits > MAX_QUBITS:
        raise ConfigurationError(
            f"circuits wider than {MAX_QUBITS} qubits cannot be simulated, "
            f"got {spec.qubits}"
        )
    if latent_dim <= 0 or latent_dim % spec.qubits:
        raise ConfigurationError(
            f"latent length {latent_dim} is not a positive multiple of the circuit "
            f"width {spec.qubits}"
        )
    expanded = expand_encoding(assemble_head_circuit(spec), latent_dim // spec.qubits)
    lifted, occurrences = lift_data_slots(expanded)
    return _PqcPlan(spec, expanded, lifted, occurrences, count_parameters(spec), latent_dim)


def _pqc_value(plan: _PqcPlan, theta_q: np.ndarray, latent: np.ndarray,
               noise: noise_mod.NoiseModel | None, rng_traj, rng_shot) -> float:
    if theta_q.shape != (plan.n_params,):
        raise ConfigurationError(
            f"circuit expects {plan.n_params} parameters, got shape {theta_q.shape}"
        )
    if noise is None or noise.is_noiseless:
        return evaluate_expectation(plan.expanded, theta_q, latent, 0)
    run_list = plan.expanded
    if noise.p1q > 0 or noise.p2q > 0:
        if rng_traj is None:
            raise ConfigurationError("an rng stream is required for gate-noise trajectories")
        run_list = noise_mod.sample_pauli_insertions(plan.expanded, noise, rng_traj)
    amps = _zero_amplitudes(plan.spec.qubits)
    run_gates(amps, run_list, theta_q, latent)
    z = float(_z_expectation(amps, plan.spec.qubits, 0))
    if noise.shots is not None:
        if rng_shot is None:
            raise ConfigurationError("an rng stream is required for shot sampling")
        z = float(noise_mod.shot_sample_expectation(z, noise.shots, rng_shot).estimate)
    return z


def _pqc_value_and_grads(plan: _PqcPlan, theta_q: np.ndarray, latent: np.ndarray,
                         noise: noise_mod.NoiseModel | None, rng_traj, rng_shot):
    """(z estimate, dz/dtheta_q, dz/dlatent) sharing one trajectory and CRN shots."""
    if theta_q.shape != (plan.n_params,):
        raise ConfigurationError(
            f"circuit expects {plan.n_params} parameters, got shape {theta_q.shape}"
        )
    if noise is None or noise.is_noiseless:
        z = evaluate_expectation(plan.expanded, theta_q, latent, 0)
        gtheta, glatent = adjoint_observable_gradients(plan.expanded, theta_q, latent, measured=0)
        return z, gtheta, glatent

    p, k = plan.n_params, plan.occurrences.size
    ext = np.concatenate([theta_q, latent[plan.occurrences]])
    run_list = plan.lifted
    if noise.p1q > 0 or noise.p2q > 0:
        if rng_traj is None:
            raise ConfigurationError("an rng stream is required for gate-noise trajectories")
        run_list = noise_mod.sample_pauli_insertions(plan.lifted, noise, rng_traj)
    total = p + k
    rows = np.tile(ext, (1 + 2 * total, 1))
    rows[1 + np.arange(total), np.arange(total)] += math.pi / 2
    rows[1 + total + np.arange(total), np.arange(total)] -= math.pi / 2
    vals = _batch_expectations(run_list, rows, None, 0)
    if noise.shots is not None:
        if rng_shot is None:
            raise ConfigurationError("an rng stream is required for shot sampling")
        eps0 = rng_shot.standard_normal()
        eps = rng_shot.standard_normal(total)
        z = float(noise_mod.gaussian_shot_estimate(vals[0], noise.shots, eps0))
        plus = noise_mod.gaussian_shot_estimate(vals[1 : 1 + total], noise.shots, eps)
        minus = noise_mod.gaussian_shot_estimate(vals[1 + total :], noise.shots, eps)
    else:
        z = float(vals[0])
        plus, minus = vals[1 : 1 + total], vals[1 + total :]
    g_ext = (plus - minus) / 2.0
    gtheta = g_ext[:p]
    glatent = np.zeros(plan.latent_dim)
    np.add.at(glatent, plan.occurrences, g_ext[p:])
    return z, gtheta, glatent


def pqc_forward(latent, theta_q, spec: CircuitSpec,
                noise: noise_mod.NoiseModel | None = None,
                rng: np.random.Generator | None = None) -> float:
    """Measured-qubit <Z> estimate of the re-uploading circuit.

    Draws one gate-noise trajectory and then one shot sample from ``rng`` when
    the noise model calls for them; otherwise reduces exactly to the noiseless
    expectation.
    """
    latent = np.asarray(latent, dtype=np.float64)
    theta_q = np.asarray(theta_q, dtype=np.float64)
    plan = _plan_pqc(spec, latent.size)
    return _pqc_value(plan, theta_q, latent, noise, rng, rng)


# ---------------------------------------------------------------------------
# readout and full head


def linear_logits(latent, z_meas: float, weights: np.ndarray) -> np.ndarray:
    """Logits = W @ concat(latent, z); W has shape (classes, latent_dim + 1)."""
    latent = np.asarray(latent, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != latent.size + 1:
        raise ConfigurationError(
            f"weights shape {weights.shape} does not match latent length {latent.size} + 1"
        )
    return weights @ np.append(latent, z_meas)


def head_forward(x, params: HeadParams, encoder_config: EncoderConfig, spec: CircuitSpec,
                 noise: noise_mod.NoiseModel | None = None,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Class logits for one input; with no linear layer they are (z, -z)."""
    latent = multi_encoder_forward(x, params.theta_c, encoder_config)
    z = pqc_forward(latent, params.theta_q, spec, noise, rng)
    if params.linear is None:
        return np.array([z, -z])
    return linear_logits(latent, z, params.linear)


def count_head_parameters(encoder_config: EncoderConfig, spec: CircuitSpec,
                          num_classes: int = 2, final_linear: bool = True) -> int:
    """Exact trainable-parameter total for the hybrid head."""
    total = encoder_config.num_encoders * encoder_config.params_per_encoder
    total += count_parameters(spec)
    if final_linear:
        total += (encoder_config.latent_dim + 1) * num_classes
    return total


def init_head_params(encoder_config: EncoderConfig, spec: CircuitSpec,
                     num_classes: int = 2, rng: np.random.Generator | None = None,
                     final_linear: bool = True) -> HeadParams:
    """Angles uniform in [-pi, pi); linear weights small normal."""
    rng = rng if rng is not None else np.random.default_rng(0)
    theta_c = [
        rng.uniform(-math.pi, math.pi, encoder_config.params_per_encoder)
        for _ in range(encoder_config.num_encoders)
    ]
    theta_q = rng.uniform(-math.pi, math.pi, count_parameters(spec))
    linear = None
    if final_linear:
        linear = 0.1 * rng.standard_normal((num_classes, encoder_config.latent_dim + 1))
    return HeadParams(theta_c=theta_c, theta_q=theta_q, linear=linear)


# ---------------------------------------------------------------------------
# trainer-facing model


class QuantumEncoder:
    """E parallel simulated encoders with trainable angles."""

    def __init__(self, config: EncoderConfig, rng: np.random.Generator | None = None,
                 theta: list[np.ndarray] | None = None, grad_method: str = "adjoint"):
        self.config = config
        self.grad_method = grad_method
        if theta is not None:
            if len(theta) != config.num_encoders:
                raise ConfigurationError(
                    f"expected {config.num_encoders} parameter vectors, got {len(theta)}"
                )
            self.theta = [np.asarray(t, dtype=np.float64) for t in theta]
        else:
            if rng is None:
                raise ConfigurationError("either theta or an rng must be provided")
            self.theta = [
                rng.uniform(-math.pi, math.pi, config.params_per_encoder)
                for _ in range(config.num_encoders)
            ]

    @property
    def latent_dim(self) -> int:
        return self.config.latent_dim

    def parameter_arrays(self) -> dict[str, np.ndarray]:
        return {f"encoder_{i}": t for i, t in enumerate(self.theta)}

    def forward(self, x) -> np.ndarray:
        return multi_encoder_forward(x, self.theta, self.config)

    def backward(self, x, dlatent) -> dict[str, np.ndarray]:
        q = self.config.encoder_qubits
        grads = {}
        for i, t in enumerate(self.theta):
            grads[f"encoder_{i}"] = encoder_backward(
                x, t, self.config, dlatent[i * q : (i + 1) * q], method=self.grad_method
            )
        return grads


class HybridHead:
    """Trainable hybrid head: encoder object + noisy circuit + linear readout.

    The encoder is pluggable: a :class:`QuantumEncoder` by default, or any
    object with ``latent_dim``, ``forward``, ``backward`` and
    ``parameter_arrays`` (the MLP encoder ablation uses this).
    """

    def __init__(self, encoder, spec: CircuitSpec, num_classes: int = 2,
                 final_linear: bool = True, rng: np.random.Generator | None = None,
                 theta_q: np.ndarray | None = None, linear: np.ndarray | None = None):
        if not final_linear and num_classes != 2:
            raise ConfigurationError("dropping the final linear layer requires 2 classes")
        self.encoder = encoder
        self.spec = spec
        self.num_classes = num_classes
        self.final_linear = final_linear
        self.plan = _plan_pqc(spec, encoder.latent_dim)
        if theta_q is not None:
            self.theta_q = np.asarray(theta_q, dtype=np.float64)
            if self.theta_q.shape != (self.plan.n_params,):
                raise ConfigurationError(
                    f"circuit expects {self.plan.n_params} parameters, got "
                    f"shape {self.theta_q.shape}"
                )
        else:
            if rng is None:
                raise ConfigurationError("either theta_q or an rng must be provided")
            self.theta_q = rng.uniform(-math.pi, math.pi, self.plan.n_params)
        if final_linear:
            if linear is not None:
                self.linear = np.asarray(linear, dtype=np.float64)
                if self.linear.shape != (num_classes, encoder.latent_dim + 1):
                    raise ConfigurationError(
                        f"linear weights must have shape "
                        f"({num_classes}, {encoder.latent_dim + 1}), got {self.linear.shape}"
                    )
            else:
                if rng is None:
                    raise ConfigurationError("either linear weights or an rng must be provided")
                self.linear = 0.1 * rng.standard_normal((num_classes, encoder.latent_dim + 1))
        else:
            self.linear = None

    @classmethod
    def from_params(cls, params: HeadParams, encoder_config: EncoderConfig,
                    spec: CircuitSpec, num_classes: int = 2) -> "HybridHead":
        encoder = QuantumEncoder(encoder_config, theta=params.theta_c)
        return cls(
            encoder, spec, num_classes=num_classes,
            final_linear=params.linear is not None,
            theta_q=params.theta_q, linear=params.linear,
        )

    def parameter_arrays(self) -> dict[str, np.ndarray]:
        arrays = dict(self.encoder.parameter_arrays())
        arrays["pqc"] = self.theta_q
        if self.linear is not None:
            arrays["linear"] = self.linear
        return arrays

    def load_parameter_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        """Copy values into the live parameter arrays (shapes must match)."""
        own = self.parameter_arrays()
        if set(own) != set(arrays):
            raise ConfigurationError(
                f"parameter names {sorted(arrays)} do not match model {sorted(own)}"
            )
        for key, live in own.items():
            incoming = np.asarray(arrays[key], dtype=np.float64)
            if incoming.shape != live.shape:
                raise ConfigurationError(
                    f"array {key!r} has shape {incoming.shape}, expected {live.shape}"
                )
            live[...] = incoming

    def _streams(self, noise, seed_path, sample_index):
        noisy = noise is not None and not noise.is_noiseless
        if not noisy:
            return None, None
        traj = seeding.stream(noise.seed, seeding.TRAJECTORY, *seed_path, sample_index)
        shot = seeding.stream(noise.seed, seeding.SHOTS, *seed_path, sample_index)
        return traj, shot

    def _sample_logits(self, x, noise, rng_traj, rng_shot):
        latent = self.encoder.forward(x)
        z = _pqc_value(self.plan, self.theta_q, latent, noise, rng_traj, rng_shot)
        if self.linear is None:
            return np.array([z, -z])
        return linear_logits(latent, z, self.linear)

    def predict_logits(self, X, noise=None, seed_path: tuple[int, ...] = ()) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), self.num_classes))
        for i, x in enumerate(X):
            rng_traj, rng_shot = self._streams(noise, seed_path, i)
            out[i] = self._sample_logits(x, noise, rng_traj, rng_shot)
        return out

    def _sample_loss_and_grads(self, x, label, noise, rng_traj, rng_shot):
        latent = self.encoder.forward(x)
        z, dz_dtheta, dz_dlatent = _pqc_value_and_grads(
            self.plan, self.theta_q, latent, noise, rng_traj, rng_shot
        )
        grads: dict[str, np.ndarray] = {}
        if self.linear is not None:
            feat = np.append(latent, z)
            logits = self.linear @ feat
            loss, dlogits = cross_entropy_loss(logits, label)
            grads["linear"] = np.outer(dlogits, feat)
            dfeat = self.linear.T @ dlogits
            dlatent_direct = dfeat[:-1]
            dz = float(dfeat[-1])
        else:
            logits = np.array([z, -z])
            loss, dlogits = cross_entropy_loss(logits, label)
            dz = float(dlogits[0] - dlogits[1])
            dlatent_direct = np.zeros(self.encoder.latent_dim)
        grads["pqc"] = dz * dz_dtheta
        dlatent = dlatent_direct + dz * dz_dlatent
        grads.update(self.encoder.backward(x, dlatent))
        return loss, grads

    def batch_loss_and_gradients(self, X, y, noise=None,
                                 seed_path: tuple[int, ...] = ()):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        totals = {k: np.zeros_like(v) for k, v in self.parameter_arrays().items()}
        total_loss = 0.0
        for i in range(len(X)):
            rng_traj, rng_shot = self._streams(noise, seed_path, i)
            loss, grads = self._sample_loss_and_grads(X[i], int(y[i]), noise, rng_traj, rng_shot)
            total_loss += loss
            for key, g in grads.items():
                totals[key] += g
        scale = 1.0 / max(len(X), 1)
        return total_loss * scale, {k: v * scale for k, v in totals.items()}


def head_gradient(X, labels, params: HeadParams, encoder_config: EncoderConfig,
                  spec: CircuitSpec, num_classes: int = 2, noise=None,
                  seed_path: tuple[int, ...] = ()):
    """Batch-mean loss and gradients in HeadParams shape (functional wrapper)."""
    model = HybridHead.from_params(params, encoder_config, spec, num_classes)
    loss, grads = model.batch_loss_and_gradients(X, labels, noise=noise, seed_path=seed_path)
    theta_c = [grads[f"encoder_{i}"] for i in range(encoder_config.num_encoders)]
    return loss, HeadParams(
        theta_c=theta_c, theta_q=grads["pqc"], linear=grads.get("linear")
    )


def build_hybrid_head(encoder_config: EncoderConfig, spec: CircuitSpec,
                      num_classes: int = 2, final_linear: bool = True,
                      seed: int = 0) -> HybridHead:
    """Fresh head with all parameters drawn from the PARAM_INIT stream of ``seed``."""
    rng = seeding.stream(seed, seeding.PARAM_INIT)
    encoder = QuantumEncoder(encoder_config, rng)
    return HybridHead(encoder, spec, num_classes=num_classes,
                      final_linear=final_linear, rng=rng)

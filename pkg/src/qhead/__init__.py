"""Hybrid quantum-classical classification heads on a statevector simulator.

Simulated quantum encoders compress embedding vectors into Pauli-Z latents, a
data re-uploading circuit classifies them under configurable gate and shot
noise, and everything trains end to end with exact or parameter-shift
gradients. Classical baselines, an inference-energy estimator, and a
reproducible experiment CLI round out the package.
"""

from .ansatz import (
    CircuitSpec,
    GateList,
    assemble_head_circuit,
    build_block,
    build_entangling_layer,
    count_parameters,
    expand_encoding,
    gate_counts,
)
from .baselines import LogisticModel, MlpConfig, MlpEncoder, MlpHead, logistic_train, mlp_head_train
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig, config_from_mapping, parse_flat, serialize_flat
from .datasets import (
    EmbeddingDataset,
    append_anchor_feature,
    load_embeddings,
    make_count_splits,
    make_benchmark_splits,
    pca_project,
    pool_to_dim,
    save_embeddings_binary,
    save_embeddings_csv,
    synthetic_clusters,
)
from .energy import EnergyConstants, crossover_curve, find_crossover, gpu_energy_kj, qpu_energy_kj
from .errors import (
    ConfigurationError,
    DataError,
    DataFormatError,
    DegenerateInputError,
    UnsupportedModeError,
)
from .grad import (
    adjoint_gradient,
    evaluate_expectation,
    finite_difference_oracle,
    parameter_shift_gradient,
)
from .head import (
    EncoderConfig,
    HeadParams,
    HybridHead,
    QuantumEncoder,
    build_hybrid_head,
    count_head_parameters,
    encoder_forward,
    head_forward,
    head_gradient,
    init_head_params,
    linear_logits,
    multi_encoder_forward,
    pqc_forward,
)
from .noise import (
    NoiseModel,
    ShotSample,
    depolarizing_reference_expectation,
    multinomial_oracle,
    sample_pauli_insertions,
    shot_sample_expectation,
)
from .simcore import (
    StateVector,
    amplitude_encode,
    angle_encode,
    apply_cnot,
    apply_pauli,
    apply_ry,
    probabilities,
    z_expectation,
    zero_state,
)
from .trainer import TrainConfig, TrainReport, cross_entropy_loss, evaluate, train

__version__ = "0.1.0"

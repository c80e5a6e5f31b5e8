"""Deterministic Kerr-type oscillator gates synthesized from repeated qubit couplings."""

from .channels import LossSpec, conditional_evolve, deterministic_step, evolve, loss_kraus
from .fockcore import (
    DensityMatrix,
    FockError,
    FockSpace,
    Ket,
    OperatorMatrix,
    coherent_ket,
    ladder_ops,
    pauli,
    tensor,
)
from .gatesynth import (
    GateSpec,
    KerrSpec,
    conditional_ops,
    geometric_cycle,
    repeated_conditional,
    target_unitary,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "FockError",
    "FockSpace",
    "GateSpec",
    "Ket",
    "KerrSpec",
    "LossSpec",
    "OperatorMatrix",
    "coherent_ket",
    "conditional_evolve",
    "conditional_ops",
    "deterministic_step",
    "evolve",
    "geometric_cycle",
    "ladder_ops",
    "loss_kraus",
    "pauli",
    "repeated_conditional",
    "target_unitary",
    "tensor",
]

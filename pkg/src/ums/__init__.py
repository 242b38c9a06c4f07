"""Synthesis of multiport linear-optical interferometers from fixed mixing
layers and tunable phase layers."""

__version__ = "0.1.0"

from .architectures import (
    LayeredArchitecture,
    MZIMesh,
    WaveguideArray,
    dft_matrix,
    make_variant,
    transfer,
)
from .linalg import RngSeed, fidelity, haar_random_unitary, nearest_unitary
from .optimizer import OptimizerConfig, SynthesisResult, synthesize

__all__ = [
    "LayeredArchitecture",
    "MZIMesh",
    "OptimizerConfig",
    "RngSeed",
    "SynthesisResult",
    "WaveguideArray",
    "dft_matrix",
    "fidelity",
    "haar_random_unitary",
    "make_variant",
    "nearest_unitary",
    "synthesize",
    "transfer",
]

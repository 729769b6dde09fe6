"""Desk-scale GSMem covert-channel lab: simulate B-ASK memory-bus emissions
and detect them with six small classifiers."""

from ._accel import USE_NUMBA
from .channel import (EmissionTrace, ModulationConfig, NoiseModel, Payload, amplify,
                      apply_noise, bit_error_rate, demodulate, encode_payload, modulate)
from .dataset import Dataset, FeatureVector, GeneratorConfig, Label, LabeledSample

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA", "EmissionTrace", "ModulationConfig", "NoiseModel", "Payload",
    "amplify", "apply_noise", "bit_error_rate", "demodulate", "encode_payload",
    "modulate", "Dataset", "FeatureVector", "GeneratorConfig", "Label", "LabeledSample",
]

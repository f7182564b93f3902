"""Quantum and classical kicked rotor with periodically sign-flipped kicks."""
from .params import (
    DistributionRecord,
    EnergyRecord,
    NumericalError,
    ParameterError,
    QuantumState,
    RotorParams,
    Variant,
    validate,
)

__version__ = "0.1.0"

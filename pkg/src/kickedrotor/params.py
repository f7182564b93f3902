"""Shared parameter and record types for kicked-rotor simulations.

All quantities are dimensionless: ``k`` is the kick strength, ``tau`` the
effective Planck constant and ``kappa = k * tau`` the classical
stochasticity parameter. The angular-momentum grid is stored in natural
order, i.e. storage index 0 holds ``m = -m_max``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

__all__ = [
    "ParameterError",
    "NumericalError",
    "Variant",
    "RotorParams",
    "QuantumState",
    "DistributionRecord",
    "EnergyRecord",
    "validate",
    "m_grid",
    "index_of",
]


class ParameterError(ValueError):
    """Raised for physically or structurally invalid parameters."""


class NumericalError(RuntimeError):
    """Raised when a computation produces non-finite or unusable output."""


class Variant(str, Enum):
    PLAIN_KR = "PLAIN_KR"
    MKR_SIGN_FLIP = "MKR_SIGN_FLIP"
    MKR_D_OPERATOR = "MKR_D_OPERATOR"
    MKR_TIME_DELAY = "MKR_TIME_DELAY"

    @property
    def is_modified(self) -> bool:
        return self is not Variant.PLAIN_KR


@dataclass(frozen=True)
class RotorParams:
    """Kicked-rotor parameters.

    ``M=None`` stands for an infinite sign-flip period, i.e. the plain
    kicked rotor; it serializes as ``"inf"``.
    """

    k: float
    tau: float
    M: Optional[int] = None
    variant: Variant = Variant.PLAIN_KR

    @property
    def kappa(self) -> float:
        return self.k * self.tau

    @classmethod
    def from_kappa(cls, kappa: float, M: Optional[int] = None,
                   variant: Variant = Variant.PLAIN_KR) -> "RotorParams":
        """Classical parameterization: the map only depends on kappa, so tau=1."""
        return validate(cls(k=float(kappa), tau=1.0, M=M, variant=variant))

    @property
    def flip_period(self) -> Optional[int]:
        """Sign-flip period actually used by the dynamics (None for plain KR)."""
        return self.M if self.variant.is_modified else None

    def replace(self, **changes) -> "RotorParams":
        d = {"k": self.k, "tau": self.tau, "M": self.M, "variant": self.variant}
        d.update(changes)
        return validate(RotorParams(**d))

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "tau": self.tau,
            "M": "inf" if self.M is None else self.M,
            "variant": self.variant.value,
            "kappa": self.kappa,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RotorParams":
        # kappa is derived; any value present in the input is ignored
        missing = {"k", "tau"} - set(d)
        if missing:
            raise ParameterError(f"missing keys: {sorted(missing)}")
        return validate(cls(k=d["k"], tau=d["tau"], M=_parse_M(d.get("M")),
                            variant=d.get("variant", Variant.PLAIN_KR)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RotorParams":
        return cls.from_dict(json.loads(text))

    def to_keyvalue(self) -> str:
        d = self.to_dict()
        return "\n".join(f"{key}={_kv_format(d[key])}" for key in
                         ("k", "tau", "M", "variant", "kappa")) + "\n"

    @classmethod
    def from_keyvalue(cls, text: str) -> "RotorParams":
        d = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"malformed line: {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            d[key] = value
        for key in ("k", "tau"):
            if key in d:
                d[key] = float(d[key])
        return cls.from_dict(d)

    def header(self) -> str:
        """One-line ``key=value`` summary for file headers."""
        d = self.to_dict()
        return " ".join(f"{key}={_kv_format(d[key])}" for key in
                        ("k", "tau", "M", "variant", "kappa"))


def _kv_format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_M(value) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "none", ""):
            return None
        value = float(value)
    if isinstance(value, float):
        if math.isinf(value):
            return None
        if not value.is_integer():
            raise ParameterError(f"M must be an integer, got {value}")
        value = int(value)
    return value


def validate(params: RotorParams) -> RotorParams:
    """Check and normalize ``params``; idempotent."""
    try:
        k = float(params.k)
        tau = float(params.tau)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"k and tau must be real numbers: {exc}") from None
    if not (math.isfinite(k) and math.isfinite(tau)):
        raise ParameterError("k and tau must be finite")
    if k < 0:
        raise ParameterError("k must be non-negative")
    if tau <= 0:
        raise ParameterError("tau must be positive")
    M = _parse_M(params.M)
    if M is not None and M < 1:
        raise ParameterError("M must be >= 1")
    try:
        variant = Variant(params.variant)
    except ValueError:
        raise ParameterError(f"unknown variant {params.variant!r}") from None
    if variant.is_modified and M is None:
        raise ParameterError(f"{variant.value} needs a finite sign-flip period M")
    return RotorParams(k=k, tau=tau, M=M, variant=variant)


def m_grid(m_max: int) -> np.ndarray:
    """Angular-momentum values of the storage grid, ``-m_max .. m_max-1``."""
    return np.arange(-m_max, m_max)


def index_of(m, m_max: int):
    """Storage index of angular momentum ``m``."""
    idx = np.asarray(m) + m_max
    if np.any(idx < 0) or np.any(idx >= 2 * m_max):
        raise IndexError(f"m={m} outside grid of half-width {m_max}")
    return idx if idx.ndim else int(idx)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class QuantumState:
    """Rotor wavefunction in the angular-momentum basis."""

    amplitudes: np.ndarray
    m_max: int
    kick_index: int = 0

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes, dtype=complex))
        if amps.shape != (2 * self.m_max,):
            raise ValueError(f"expected {2 * self.m_max} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, m: int = 0, m_max: int = 2048) -> "QuantumState":
        c = np.zeros(2 * m_max, dtype=complex)
        c[index_of(m, m_max)] = 1.0
        return cls(c, m_max)

    @classmethod
    def from_coefficients(cls, coeffs: dict, m_max: int,
                          normalize: bool = True) -> "QuantumState":
        """Build a state from ``{m: C_m}``."""
        c = np.zeros(2 * m_max, dtype=complex)
        for m, value in coeffs.items():
            c[index_of(m, m_max)] = value
        if normalize:
            c /= np.linalg.norm(c)
        return cls(c, m_max)

    @property
    def m(self) -> np.ndarray:
        return m_grid(self.m_max)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def with_amplitudes(self, amplitudes, kicks: int = 0) -> "QuantumState":
        return QuantumState(amplitudes, self.m_max, self.kick_index + kicks)


@dataclass(frozen=True)
class DistributionRecord:
    """Momentum distribution P(m) captured at one kick."""

    p: np.ndarray
    kick_index: int
    params: Optional[RotorParams] = None
    m_max: int = field(default=0)

    def __post_init__(self):
        p = _frozen(np.asarray(self.p, dtype=float))
        if p.ndim != 1 or p.size % 2:
            raise ValueError("P(m) must be a 1-D array of even length")
        if np.any(p < 0):
            raise ValueError("P(m) must be non-negative")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "m_max", p.size // 2)

    @property
    def m(self) -> np.ndarray:
        return m_grid(self.m_max)

    def total(self) -> float:
        return float(self.p.sum())


@dataclass(frozen=True)
class EnergyRecord:
    kick_index: int
    e_tilde: float

    def __post_init__(self):
        if self.e_tilde < 0:
            raise ValueError("scaled energy cannot be negative")

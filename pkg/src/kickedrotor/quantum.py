"""Split-step propagation of the quantum kicked rotor and its sign-modified variant.

One kick cycle is ``c <- exp(i tau m^2 / 2) * FFT[exp(-i s k cos theta) * IFFT[c]]``.
Amplitudes live on ``m = -m_max .. m_max-1`` in natural order and the angle
grid is ``theta_l = pi + 2 pi l / N`` with ``N = 2 m_max``. With that offset
the circular convolution produced by the transform pair has kernel
``i^(m1-m2) J_(m1-m2)(k)``, i.e. exactly the Bessel matrix elements, and no
reordering of the amplitude vector is needed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .params import (
    DistributionRecord,
    EnergyRecord,
    NumericalError,
    QuantumState,
    RotorParams,
    Variant,
    m_grid,
    validate,
)

__all__ = [
    "BasisOverflowWarning",
    "EDGE_THRESHOLD",
    "kick_sign",
    "Propagator",
    "PropagationSchedule",
    "EvolutionResult",
    "apply_kick",
    "apply_free",
    "apply_d_operator",
    "evolve",
    "scaled_energy",
    "momentum_distribution",
]

EDGE_THRESHOLD = 1e-16


class BasisOverflowWarning(RuntimeWarning):
    """Probability reached the edge of the momentum grid."""


def kick_sign(n, M: Optional[int]):
    """Sign of kick ``n`` (0-based): +1 for ``n mod 2M < M``, else -1.

    ``M=None`` means no sign modulation.
    """
    if M is None:
        return 1 if np.ndim(n) == 0 else np.ones(np.shape(n), dtype=int)
    s = np.where(np.mod(n, 2 * M) < M, 1, -1)
    return int(s) if s.ndim == 0 else s


def _angle_cos(N: int) -> np.ndarray:
    # cos(pi + 2 pi l / N), built from the mirrored index so that
    # cos_l == cos_{N-l} bit-exactly (keeps parity exact)
    l = np.arange(N)
    mirrored = np.minimum(l, N - l)
    return -np.cos(2.0 * np.pi * mirrored / N)


def _free_phase(m_max: int, tau: float) -> np.ndarray:
    m = m_grid(m_max).astype(float)
    return np.exp(0.5j * tau * m * m)


def _parity(m_max: int) -> np.ndarray:
    return np.where(m_grid(m_max) % 2 == 0, 1.0, -1.0)


class Propagator:
    """Cached phase tables for repeated kick cycles on a fixed grid.

    Works along axis 0, so a ``(2 m_max, ncol)`` block of column vectors
    can be advanced together.
    """

    def __init__(self, params: RotorParams, m_max: int):
        if m_max < 1:
            raise ValueError("m_max must be positive")
        self.params = validate(params)
        self.m_max = int(m_max)
        self.N = 2 * self.m_max
        cos_t = _angle_cos(self.N)
        self.kick_plus = np.exp(-1j * self.params.k * cos_t)
        self.kick_minus = self.kick_plus.conj()
        self.free = _free_phase(self.m_max, self.params.tau)
        self.parity = _parity(self.m_max)
        self.m = m_grid(self.m_max)
        self._m2 = self.m.astype(float) ** 2

    def _bcast(self, vec, arr):
        return vec if arr.ndim == 1 else vec[:, None]

    def kick(self, c: np.ndarray, sign: int = 1) -> np.ndarray:
        """Kick only; returns a new array (input is left intact)."""
        g = self.kick_plus if sign > 0 else self.kick_minus
        psi = sfft.ifft(c, axis=0)
        psi *= self._bcast(g, psi)
        return sfft.fft(psi, axis=0, overwrite_x=True)

    def step(self, c: np.ndarray, sign: int = 1) -> np.ndarray:
        """One full cycle, kick then free evolution."""
        out = self.kick(c, sign)
        out *= self._bcast(self.free, out)
        return out

    def apply_d(self, c: np.ndarray) -> np.ndarray:
        return c * self._bcast(self.parity, c)

    def energy(self, c: np.ndarray) -> float:
        p = c.real ** 2 + c.imag ** 2
        return 0.5 * self.params.tau ** 2 * float(np.dot(self._m2, p))

    @staticmethod
    def edge_probability(c: np.ndarray) -> float:
        return float(max(abs(c[0]) ** 2, abs(c[-1]) ** 2))


def apply_kick(state: QuantumState, k: float, sign: int = 1) -> QuantumState:
    """Multiply by ``exp(-i sign k cos theta)`` in the angle representation.

    Warns with :class:`BasisOverflowWarning` when the result has edge
    probability above ``EDGE_THRESHOLD``. ``kick_index`` is not changed;
    only :func:`evolve` counts full cycles.
    """
    if abs(sign) != 1:
        raise ValueError("sign must be +1 or -1")
    prop = Propagator(RotorParams(k=k, tau=1.0), state.m_max)
    c = prop.kick(state.amplitudes, sign)
    if prop.edge_probability(c) > EDGE_THRESHOLD:
        warnings.warn("probability at the grid edge exceeds "
                      f"{EDGE_THRESHOLD:g} after kick", BasisOverflowWarning,
                      stacklevel=2)
    return state.with_amplitudes(c)


def apply_free(state: QuantumState, tau: float) -> QuantumState:
    """Free evolution ``C_m <- exp(i tau m^2 / 2) C_m``."""
    return state.with_amplitudes(state.amplitudes * _free_phase(state.m_max, tau))


def apply_d_operator(state: QuantumState) -> QuantumState:
    """``C_m <- (-1)^m C_m``."""
    return state.with_amplitudes(state.amplitudes * _parity(state.m_max))


def scaled_energy(state: QuantumState, tau: float) -> float:
    """``(tau^2 / 2) sum_m m^2 |C_m|^2``."""
    m = state.m.astype(float)
    return 0.5 * tau ** 2 * float(np.sum(m * m * np.abs(state.amplitudes) ** 2))


def momentum_distribution(state: QuantumState,
                          params: Optional[RotorParams] = None) -> DistributionRecord:
    return DistributionRecord(np.abs(state.amplitudes) ** 2, state.kick_index, params)


def _sorted_unique(kicks: Iterable[int], n_kicks: int, name: str) -> tuple:
    ks = tuple(int(k) for k in kicks)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    if ks and (ks[0] < 0 or ks[-1] > n_kicks):
        raise ValueError(f"{name} must lie in [0, n_kicks]")
    return ks


@dataclass(frozen=True)
class PropagationSchedule:
    """How many kicks to apply and when to capture records.

    Kick numbers are relative to the start of the run; kick 0 is the
    initial state. ``energy_kicks`` defaults to ``record_kicks``.
    """

    n_kicks: int
    record_kicks: Sequence[int] = ()
    energy_kicks: Optional[Sequence[int]] = None

    def __post_init__(self):
        if self.n_kicks < 0:
            raise ValueError("n_kicks must be non-negative")
        rec = _sorted_unique(self.record_kicks, self.n_kicks, "record_kicks")
        object.__setattr__(self, "record_kicks", rec)
        en = rec if self.energy_kicks is None else _sorted_unique(
            self.energy_kicks, self.n_kicks, "energy_kicks")
        object.__setattr__(self, "energy_kicks", en)

    @classmethod
    def every(cls, n_kicks: int, record_every: Optional[int] = None,
              energy_every: Optional[int] = 1) -> "PropagationSchedule":
        """Distributions every ``record_every`` kicks (final kick always),
        energies every ``energy_every`` kicks."""
        def ladder(step):
            if not step:
                return [n_kicks]
            ks = list(range(0, n_kicks + 1, step))
            if ks[-1] != n_kicks:
                ks.append(n_kicks)
            return ks
        return cls(n_kicks, ladder(record_every), ladder(energy_every))


@dataclass
class EvolutionResult:
    final: QuantumState
    distributions: List[DistributionRecord] = field(default_factory=list)
    energies: List[EnergyRecord] = field(default_factory=list)
    overflow_kick: Optional[int] = None
    max_edge_probability: float = 0.0

    def __iter__(self):
        return iter((self.final, self.distributions, self.energies))

    def energy_array(self) -> np.ndarray:
        """``(kick, e_tilde)`` pairs as an ``(n, 2)`` array."""
        return np.array([(e.kick_index, e.e_tilde) for e in self.energies],
                        dtype=float).reshape(-1, 2)


def evolve(state: QuantumState, params: RotorParams,
           schedule: PropagationSchedule,
           propagator: Optional[Propagator] = None) -> EvolutionResult:
    """Apply ``schedule.n_kicks`` kick cycles.

    Variants
    --------
    PLAIN_KR
        every kick has sign +1.
    MKR_SIGN_FLIP
        kick ``n`` has sign ``kick_sign(n, M)``.
    MKR_D_OPERATOR
        sign +1, and ``(-1)^m`` is applied after the free evolution of
        every M-th kick.
    MKR_TIME_DELAY
        as above but with an extra free evolution of ``tau = 2 pi``.

    Kick numbering continues from ``state.kick_index``. The first kick
    whose edge probability exceeds ``EDGE_THRESHOLD`` is reported in the
    result and as a :class:`BasisOverflowWarning`.
    """
    params = validate(params)
    prop = propagator or Propagator(params, state.m_max)
    if prop.m_max != state.m_max:
        raise ValueError("propagator grid does not match the state")
    variant = params.variant
    M = params.M
    delay = _free_phase(state.m_max, 2.0 * np.pi) if variant is Variant.MKR_TIME_DELAY else None

    flip = variant is Variant.MKR_SIGN_FLIP
    c = np.array(state.amplitudes, dtype=complex)
    start = state.kick_index
    rec = set(schedule.record_kicks)
    ener = set(schedule.energy_kicks)
    result = EvolutionResult(final=state)

    def capture(j, c):
        kick = start + j
        if j in rec:
            result.distributions.append(DistributionRecord(
                c.real ** 2 + c.imag ** 2, kick, params))
        if j in ener:
            result.energies.append(EnergyRecord(kick, prop.energy(c)))

    capture(0, c)
    for j in range(1, schedule.n_kicks + 1):
        n = start + j - 1  # 0-based global index of this kick
        sign = (1 if n % (2 * M) < M else -1) if flip else 1
        c = prop.step(c, sign)
        if M is not None and (n + 1) % M == 0:
            if variant is Variant.MKR_D_OPERATOR:
                c *= prop.parity
            elif variant is Variant.MKR_TIME_DELAY:
                c *= delay
        edge = prop.edge_probability(c)
        if edge > result.max_edge_probability:
            result.max_edge_probability = edge
            if edge > EDGE_THRESHOLD and result.overflow_kick is None:
                result.overflow_kick = start + j
        capture(j, c)

    if not np.all(np.isfinite(c)):
        raise NumericalError("non-finite amplitudes during propagation")
    if result.overflow_kick is not None:
        warnings.warn(f"edge probability exceeded {EDGE_THRESHOLD:g} first at "
                      f"kick {result.overflow_kick} (m_max={state.m_max})",
                      BasisOverflowWarning, stacklevel=2)
    result.final = QuantumState(c, state.m_max, start + schedule.n_kicks)
    return result

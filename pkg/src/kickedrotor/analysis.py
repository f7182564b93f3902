"""Lineshape analysis of momentum distributions and energy time series."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .params import DistributionRecord, EnergyRecord

__all__ = [
    "FitError",
    "LineshapeFit",
    "NonexponentialResult",
    "SaturationResult",
    "fit_localization_length",
    "symmetrized_profile",
    "coarse_profile",
    "detect_nonexponential",
    "saturation_check",
    "max_probability_ratio",
]


class FitError(ValueError):
    """Not enough usable points for the requested fit."""


@dataclass(frozen=True)
class LineshapeFit:
    """Exponential fit ``P ~ exp(-|m| / l)``.

    ``two_scale`` is ``(l_inner, l_outer, m_break)`` when a broken-line fit
    was made.
    """

    l: float
    fit_range: Tuple[int, int]
    residual: float
    two_scale: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if not self.l > 0:
            raise FitError(f"non-positive localization length {self.l}")
        if not self.fit_range[0] < self.fit_range[1]:
            raise FitError(f"empty fit range {self.fit_range}")


def _as_arrays(dist) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(dist, DistributionRecord):
        return dist.m, dist.p
    p = np.asarray(dist, dtype=float)
    half = p.size // 2
    return np.arange(-half, p.size - half), p


def _line(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef, y - A @ coef


def fit_localization_length(dist, floor: float = 1e-15, m_lo: int = 3,
                            min_points: int = 10) -> LineshapeFit:
    """Least-squares line through ``ln P`` against ``|m|``, per side.

    Each side uses ``m_lo <= |m| <= m_hi`` where ``m_hi`` is the largest
    ``|m|`` on that side with ``P > floor``; points at or below the floor
    are skipped. The default ``m_lo=3`` drops the five central states.
    The two slopes are averaged and ``l = -1 / slope``.
    """
    m, p = _as_arrays(dist)
    slopes, resid, his = [], [], []
    for side in (1, -1):
        sel = (side * m >= m_lo) & (p > floor)
        if np.count_nonzero(sel) < min_points:
            raise FitError(f"fewer than {min_points} points above {floor:g} "
                           f"on the {'positive' if side > 0 else 'negative'} side")
        x = np.abs(m[sel]).astype(float)
        coef, r = _line(x, np.log(p[sel]))
        slopes.append(coef[1])
        resid.append(r)
        his.append(int(x.max()))
    slope = float(np.mean(slopes))
    if slope >= 0:
        raise FitError("profile does not decay")
    rms = float(np.sqrt(np.mean(np.concatenate(resid) ** 2)))
    return LineshapeFit(-1.0 / slope, (m_lo, max(his)), rms)


def symmetrized_profile(dist, m_lo: int = 5) -> Tuple[np.ndarray, np.ndarray]:
    """``(|m|, (P(m) + P(-m)) / 2)`` for ``|m| >= m_lo``."""
    m, p = _as_arrays(dist)
    top = min(-m[0], m[-1])
    mm = np.arange(m_lo, top + 1)
    zero = -m[0]
    return mm, 0.5 * (p[zero + mm] + p[zero - mm])


def coarse_profile(dist, floor: float = 1e-22, n_bins: int = 32,
                   m_lo: int = 5) -> Tuple[np.ndarray, np.ndarray]:
    """Bin-averaged symmetric profile ``(mean |m|, ln mean P)``.

    The range runs from ``m_lo`` to the largest ``|m|`` whose symmetrized
    probability exceeds ``floor`` and is cut into ``n_bins`` groups of
    (nearly) equal size. Averaging ``P`` before taking the log keeps the
    near-zero interference minima from dominating.
    """
    mm, ps = symmetrized_profile(dist, m_lo)
    above = np.nonzero(ps > floor)[0]
    if above.size == 0:
        raise FitError(f"no points above {floor:g}")
    mm, ps = mm[: above[-1] + 1], ps[: above[-1] + 1]
    n_bins = min(n_bins, mm.size)
    xs = np.array([c.mean() for c in np.array_split(mm.astype(float), n_bins)])
    ys = np.array([c.mean() for c in np.array_split(ps, n_bins)])
    if np.any(ys <= 0):
        raise FitError("empty bins in the profile")
    return xs, np.log(ys)


@dataclass(frozen=True)
class NonexponentialResult:
    is_nonexponential: bool
    fit: LineshapeFit
    residual_ratio: float
    length_ratio: float

    def __bool__(self):
        return self.is_nonexponential


def detect_nonexponential(dist, floor: float = 1e-22, n_bins: int = 32,
                          m_lo: int = 5, min_bins: int = 3,
                          residual_factor: float = 2.0,
                          length_factor: float = 2.0) -> NonexponentialResult:
    """Compare one line with a continuous broken line on the coarse profile.

    The breakpoint is scanned over bin centres with at least ``min_bins``
    bins on each side. The profile counts as nonexponential when the
    broken line lowers the RMS residual by ``residual_factor`` or more and
    the inner decay length is at least ``length_factor`` times the outer
    one (both slopes negative).
    """
    x, y = coarse_profile(dist, floor, n_bins, m_lo)
    if x.size < 2 * min_bins + 1:
        raise FitError("too few bins for a two-segment fit")
    coef, r = _line(x, y)
    r1 = float(np.sqrt(np.mean(r ** 2)))
    best = None
    for b in range(min_bins - 1, x.size - min_bins):
        xb = x[b]
        A = np.column_stack([np.ones_like(x), x, np.maximum(0.0, x - xb)])
        c, *_ = np.linalg.lstsq(A, y, rcond=None)
        r2 = float(np.sqrt(np.mean((y - A @ c) ** 2)))
        if best is None or r2 < best[0]:
            best = (r2, c[1], c[1] + c[2], xb)
    r2, s_in, s_out, xb = best
    ratio_r = r1 / r2 if r2 > 0 else np.inf
    if s_in < 0 and s_out < 0:
        l_in, l_out = -1.0 / s_in, -1.0 / s_out
        ratio_l = l_in / l_out
    else:
        l_in = l_out = np.nan
        ratio_l = np.nan
    flag = bool(ratio_r >= residual_factor and s_in < 0 and s_out < 0
                and ratio_l >= length_factor)
    if coef[1] >= 0:
        raise FitError("profile does not decay")
    fit = LineshapeFit(-1.0 / coef[1], (int(m_lo), int(round(x[-1]))), r1,
                       (l_in, l_out, float(xb)))
    return NonexponentialResult(flag, fit, float(ratio_r), float(ratio_l))


@dataclass(frozen=True)
class SaturationResult:
    saturated: bool
    ratio: float

    def __bool__(self):
        return self.saturated


def _window_mean(kicks, values, window):
    lo, hi = window
    sel = (kicks >= lo) & (kicks <= hi)
    if not np.any(sel):
        raise ValueError(f"no energy records in window {window}")
    return float(values[sel].mean())


def saturation_check(energies: Sequence[EnergyRecord], window_a: Tuple[int, int],
                     window_b: Tuple[int, int], band=(0.8, 1.25)) -> SaturationResult:
    """``ratio = mean(E over window_b) / mean(E over window_a)``.

    Windows are inclusive ``(first_kick, last_kick)`` ranges.
    """
    kicks = np.array([e.kick_index for e in energies])
    vals = np.array([e.e_tilde for e in energies], dtype=float)
    a = _window_mean(kicks, vals, window_a)
    b = _window_mean(kicks, vals, window_b)
    ratio = b / a if a > 0 else np.inf
    return SaturationResult(bool(band[0] <= ratio <= band[1]), float(ratio))


def max_probability_ratio(num, den, floor: float = 1e-15) -> Tuple[float, int]:
    """Largest ``P_num(m) / P_den(m)`` over ``m`` where both exceed ``floor``.

    Returns ``(ratio, m)``; ``(nan, 0)`` if no such ``m`` exists.
    """
    m, pn = _as_arrays(num)
    _, pd = _as_arrays(den)
    sel = (pn > floor) & (pd > floor)
    if not np.any(sel):
        return float("nan"), 0
    r = np.where(sel, pn / np.where(sel, pd, 1.0), -np.inf)
    i = int(np.argmax(r))
    return float(r[i]), int(m[i])

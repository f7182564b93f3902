"""Integer-order Bessel functions J_n(x) for a whole range of orders.

Miller's backward recurrence, normalized with J_0 + 2 sum J_{2n} = 1.
The downward sweep grows like prod(2n/x) and overflows long before the
orders we need, so the running pair is rescaled by an exact power of two
whenever it gets large and each stored value remembers its scale.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_jn", "bessel_j"]

_RESCALE_AT = 2.0 ** 600
_RESCALE_EXP = 600
_SMALL_X = 1e-6


def _start_order(n_max: int, x: float) -> int:
    top = max(n_max, int(math.ceil(x)))
    return top + int(math.sqrt(160.0 * (top + 1))) + 20


def _series(x: float, n_max: int) -> np.ndarray:
    # two-term series, relative error ~ (x/2)^4 which is < 1e-24 here
    n = np.arange(n_max + 1, dtype=float)
    half = 0.5 * x
    log_lead = n * math.log(half) - np.array([math.lgamma(v + 1.0) for v in n])
    lead = np.exp(log_lead)
    return lead * (1.0 - half * half / (n + 1.0))


def bessel_jn(x: float, n_max: int) -> np.ndarray:
    """Return ``J_n(x)`` for ``n = 0 .. n_max``.

    Parameters
    ----------
    x : float
        Real argument; negative values use ``J_n(-x) = (-1)^n J_n(x)``.
    n_max : int
        Highest order required.

    Returns
    -------
    ndarray of shape (n_max + 1,)
        Values that fall below the double-precision range underflow to 0.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    out = np.zeros(n_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    sign_flip = x < 0
    ax = abs(x)

    if ax < _SMALL_X:
        out = _series(ax, n_max)
    else:
        top = _start_order(n_max, ax)
        vals = np.empty(top + 1)
        scale = np.empty(top + 1, dtype=np.int64)
        count = 0
        above, cur = 0.0, 1.0
        vals[top], scale[top] = cur, 0
        two_over_x = 2.0 / ax
        for n in range(top, 0, -1):
            below = n * two_over_x * cur - above
            above, cur = cur, below
            if abs(cur) > _RESCALE_AT:
                above = math.ldexp(above, -_RESCALE_EXP)
                cur = math.ldexp(cur, -_RESCALE_EXP)
                count += 1
            vals[n - 1] = cur
            scale[n - 1] = count
        # bring everything to the scale of n=0
        shift = -_RESCALE_EXP * (count - scale)
        # anything shifted past -2000 underflows anyway
        vals = np.ldexp(vals, np.maximum(shift, -2000).astype(np.int32))
        norm = vals[0] + 2.0 * vals[2::2].sum()
        out = vals[: n_max + 1] / norm

    if sign_flip:
        out[1::2] *= -1.0
    return out


def bessel_j(n, x: float):
    """``J_n(x)`` for integer order(s) ``n`` of either sign."""
    n_arr = np.asarray(n, dtype=np.int64)
    table = bessel_jn(x, int(np.abs(n_arr).max(initial=0)))
    vals = table[np.abs(n_arr)]
    odd_negative = (n_arr < 0) & (n_arr % 2 == 1)
    vals = np.where(odd_negative, -vals, vals)
    return vals if vals.ndim else float(vals)

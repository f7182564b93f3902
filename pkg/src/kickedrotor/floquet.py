"""Floquet matrices of the kicked rotor and of the sign-modified rotor.

The one-kick matrix has elements
``F[m1, m2] = exp(i tau m1^2 / 2) * i^(m1-m2) * J_(m1-m2)(k)``. The M-kick
modified matrix ``D F^M`` (``D = diag((-1)^m)``) is built column by column
by propagating basis vectors rather than by dense matrix powers.

Three ways to propagate columns are offered:

``"spectral"``
    the FFT kernel of :mod:`kickedrotor.quantum` on a periodic grid. Fast,
    but every element carries an absolute round-off floor near 1e-17.
``"banded"``
    sparse banded Bessel convolution on the open (non-periodic) grid.
    Small elements keep relative accuracy, which matters when the
    band edge is defined by a cutoff such as 1e-20.
``"dense"``
    explicit matrix power; only for small oracle checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.special import entr

from .bessel import bessel_jn
from .params import NumericalError, RotorParams, validate
from .quantum import Propagator

__all__ = [
    "DiagonalizationError",
    "FloquetMatrix",
    "EigenstateSet",
    "build_kr_matrix",
    "build_mkr_matrix",
    "mkr_matrix",
    "mkr_columns",
    "central_columns",
    "strip_d",
    "truncate",
    "diagonalize",
    "shannon_entropy_avg",
    "band_width",
    "spectrum_sweep",
]

_I_POW = np.array([1.0, 1j, -1.0, -1j])
DEFAULT_ALPHA = 0.96


class DiagonalizationError(NumericalError):
    def __init__(self, message: str, meta: dict):
        super().__init__(f"{message} ({meta})")
        self.meta = meta


@dataclass(frozen=True)
class FloquetMatrix:
    """Matrix elements with the angular momenta labelling rows and columns.

    ``tag`` is one of ``"KR"``, ``"KR^M"`` or ``"MKR"``.
    """

    elements: np.ndarray
    row_m: np.ndarray
    col_m: np.ndarray
    params: RotorParams
    tag: str = "KR"
    M: int = 1

    @property
    def shape(self):
        return self.elements.shape

    @property
    def meta(self) -> dict:
        return {"tag": self.tag, "M": self.M, "shape": self.shape,
                "params": self.params.to_dict()}


@dataclass(frozen=True)
class EigenstateSet:
    """Eigenvectors are the columns of ``vectors``."""

    vectors: np.ndarray
    values: np.ndarray

    @property
    def d(self) -> int:
        return self.vectors.shape[0]


def _centered_m(n: int) -> np.ndarray:
    return np.arange(-(n // 2), -(n // 2) + n)


def _kernel(k: float, nu: np.ndarray) -> np.ndarray:
    """``i^nu J_nu(k)`` for integer offsets ``nu`` of either sign."""
    table = bessel_jn(k, int(np.abs(nu).max(initial=0)))
    j = table[np.abs(nu)]
    j = np.where((nu < 0) & (nu % 2 == 1), -j, j)
    return _I_POW[np.mod(nu, 4)] * j


def build_kr_matrix(params: RotorParams, ambient_dim: int,
                    sign: int = 1) -> FloquetMatrix:
    """Dense one-kick matrix on ``m in [-n/2, n/2)``.

    ``sign=-1`` gives the matrix with the kick potential reversed.
    """
    params = validate(params)
    if ambient_dim < 2:
        raise ValueError("ambient_dim must be >= 2")
    m = _centered_m(ambient_dim)
    nu = m[:, None] - m[None, :]
    free = np.exp(0.5j * params.tau * m.astype(float) ** 2)
    el = free[:, None] * _kernel(sign * params.k, nu)
    return FloquetMatrix(el, m, m.copy(), params, "KR", 1)


def _banded_operator(params: RotorParams, n: int, kernel_floor: float):
    jn = np.abs(bessel_jn(params.k, n - 1))
    keep = np.nonzero(jn > kernel_floor)[0]
    width = int(keep.max()) if keep.size else 0
    nu = np.arange(-width, width + 1)
    vals = _kernel(params.k, nu)
    # element (m1, m2) sits on diagonal offset m2 - m1 = -nu
    diags = [np.full(n - abs(v), vals[i]) for i, v in enumerate(nu)]
    return sp.diags(diags, offsets=-nu, shape=(n, n), format="csr")


def _propagate_columns(params: RotorParams, n: int, col_idx: np.ndarray,
                       M: int, method: str, row_sel: slice,
                       kernel_floor: float, chunk: int = 256) -> np.ndarray:
    m = _centered_m(n)
    rows = m[row_sel]
    out = np.empty((rows.size, col_idx.size), dtype=complex)
    if method == "spectral":
        if n % 2:
            raise ValueError("spectral propagation needs an even ambient_dim")
        prop = Propagator(params, n // 2)
        advance = prop.step
    elif method == "banded":
        K = _banded_operator(params, n, kernel_floor)
        free = np.exp(0.5j * params.tau * m.astype(float) ** 2)[:, None]

        def advance(c):
            return free * (K @ c)
    else:
        raise ValueError(f"unknown method {method!r}")
    for lo in range(0, col_idx.size, chunk):
        idx = col_idx[lo:lo + chunk]
        block = np.zeros((n, idx.size), dtype=complex)
        block[idx, np.arange(idx.size)] = 1.0
        for _ in range(M):
            block = advance(block)
        out[:, lo:lo + chunk] = block[row_sel]
    return out


def _apply_d_rows(el: np.ndarray, row_m: np.ndarray) -> np.ndarray:
    return el * np.where(row_m % 2 == 0, 1.0, -1.0)[:, None]


def mkr_columns(params: RotorParams, ambient_dim: int, M: int,
                columns: Optional[Sequence[int]] = None,
                method: str = "spectral", kernel_floor: float = 1e-40,
                apply_d: bool = True) -> FloquetMatrix:
    """Selected columns of ``D F^M`` with all ``ambient_dim`` rows.

    Parameters
    ----------
    columns : sequence of int, optional
        Angular momenta of the columns to build (default: all).
    method : {"spectral", "banded"}
    kernel_floor : float
        Bessel terms with ``|J_nu(k)|`` at or below this are dropped by the
        banded method.
    apply_d : bool
        If False the result is the bare ``F^M`` (tag ``"KR^M"``).
    """
    params = validate(params)
    if M < 1:
        raise ValueError("M must be >= 1")
    m = _centered_m(ambient_dim)
    cols = m if columns is None else np.asarray(columns, dtype=int)
    col_idx = cols - m[0]
    if np.any(col_idx < 0) or np.any(col_idx >= ambient_dim):
        raise ValueError("requested columns outside the ambient grid")
    el = _propagate_columns(params, ambient_dim, col_idx, M, method,
                            slice(None), kernel_floor)
    if apply_d:
        el = _apply_d_rows(el, m)
    return FloquetMatrix(el, m, cols.copy(), params,
                         "MKR" if apply_d else "KR^M", M)


def build_mkr_matrix(kr: FloquetMatrix, M: int,
                     columns: Optional[Sequence[int]] = None,
                     method: str = "spectral",
                     kernel_floor: float = 1e-40,
                     apply_d: bool = True) -> FloquetMatrix:
    """``D F^M`` on the ambient grid of ``kr``.

    ``kr`` comes from :func:`build_kr_matrix`. Its elements are only used
    by ``method="dense"`` (explicit matrix power, small sizes only); the
    other methods propagate basis vectors, see :func:`mkr_columns`.
    """
    if method != "dense":
        return mkr_columns(kr.params, len(kr.row_m), M, columns, method,
                           kernel_floor, apply_d)
    if M < 1:
        raise ValueError("M must be >= 1")
    m = kr.row_m
    cols = m if columns is None else np.asarray(columns, dtype=int)
    el = np.linalg.matrix_power(kr.elements, M)[:, cols - m[0]]
    if apply_d:
        el = _apply_d_rows(el, m)
    return FloquetMatrix(el, m.copy(), cols.copy(), kr.params,
                         "MKR" if apply_d else "KR^M", M)


def mkr_matrix(params: RotorParams, ambient_dim: int, M: int,
               d: Optional[int] = None, method: str = "spectral",
               kernel_floor: float = 1e-40) -> FloquetMatrix:
    """``D F^M`` built in the ambient basis and truncated to the central
    ``d x d`` block without holding the full ambient matrix."""
    params = validate(params)
    d = ambient_dim if d is None else d
    if d > ambient_dim:
        raise ValueError("d must not exceed ambient_dim")
    m = _centered_m(ambient_dim)
    lo = int(np.searchsorted(m, -(d // 2)))
    sel = slice(lo, lo + d)
    col_idx = np.arange(lo, lo + d)
    el = _propagate_columns(params, ambient_dim, col_idx, M, method, sel,
                            kernel_floor)
    rows = m[sel]
    el = _apply_d_rows(el, rows)
    return FloquetMatrix(el, rows.copy(), rows.copy(), params, "MKR", M)


def strip_d(matrix: FloquetMatrix) -> FloquetMatrix:
    """Remove the ``(-1)^m1`` row factor (``D`` is its own inverse)."""
    el = _apply_d_rows(matrix.elements, matrix.row_m)
    tag = "KR^M" if matrix.tag == "MKR" else matrix.tag
    return FloquetMatrix(el, matrix.row_m, matrix.col_m, matrix.params, tag, matrix.M)


def truncate(matrix: FloquetMatrix, d: int) -> FloquetMatrix:
    """Central ``d x d`` block, ``m in [-(d//2), -(d//2) + d)``."""
    if d < 1:
        raise ValueError("d must be positive")
    if d > min(matrix.shape):
        raise ValueError(f"d={d} exceeds matrix dimension {matrix.shape}")
    want = _centered_m(d)
    r = np.searchsorted(matrix.row_m, want[0])
    c = np.searchsorted(matrix.col_m, want[0])
    if (not np.array_equal(matrix.row_m[r:r + d], want)
            or not np.array_equal(matrix.col_m[c:c + d], want)):
        raise ValueError("matrix does not contain the central block")
    el = matrix.elements[r:r + d, c:c + d].copy()
    return FloquetMatrix(el, want, want.copy(), matrix.params, matrix.tag, matrix.M)


def diagonalize(matrix: FloquetMatrix) -> EigenstateSet:
    """Full non-Hermitian eigendecomposition with unit-norm eigenvectors."""
    a = matrix.elements
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DiagonalizationError("matrix must be square", matrix.meta)
    try:
        vals, vecs = scipy.linalg.eig(a, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DiagonalizationError(f"eigensolver failed: {exc}", matrix.meta) from exc
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(vecs))):
        raise DiagonalizationError("eigensolver returned non-finite output", matrix.meta)
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    return EigenstateSet(vecs, vals)


def shannon_entropy_avg(eigs: EigenstateSet, alpha: float = DEFAULT_ALPHA) -> float:
    """``(2 / (alpha d)) sum_j exp(-sum_m p_jm ln p_jm)``, ``p_jm = |<m|phi_j>|^2``.

    ``d`` is the vector length; all eigenvectors in ``eigs`` are summed.
    """
    v = np.asarray(eigs.vectors)
    if v.ndim != 2 or v.shape[1] < 1:
        raise ValueError("need at least one eigenvector")
    p = np.abs(v) ** 2
    p /= p.sum(axis=0)
    h = entr(p).sum(axis=0)
    return float(2.0 / (alpha * v.shape[0]) * np.exp(h).sum())


def band_width(matrix: FloquetMatrix, cutoff: float, aggregate: str = "mean",
               along: str = "row") -> float:
    """Band half-width at magnitude ``cutoff``.

    For every line (row, or column with ``along="column"``) whose label lies
    in the central half of the ambient range, the half-width is the largest
    ``|m1 - m2|`` with ``|element| > cutoff`` (0 if none). The line values
    are combined with ``aggregate`` (``"mean"`` or ``"max"``).
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    if along == "row":
        a, line_m, other_m = matrix.elements, matrix.row_m, matrix.col_m
        ambient = matrix.col_m
    elif along == "column":
        a, line_m, other_m = matrix.elements.T, matrix.col_m, matrix.row_m
        ambient = matrix.row_m
    else:
        raise ValueError("along must be 'row' or 'column'")
    centre = 0.5 * (ambient[0] + ambient[-1])
    quarter = 0.25 * (ambient[-1] - ambient[0] + 1)
    lines = np.nonzero(np.abs(line_m - centre) < quarter)[0]
    if lines.size == 0:
        raise ValueError("no lines in the central half of the matrix")
    dist = np.abs(line_m[lines, None] - other_m[None, :])
    big = np.abs(a[lines]) > cutoff
    w = np.where(big, dist, 0).max(axis=1)
    if aggregate == "mean":
        return float(w.mean())
    if aggregate == "max":
        return float(w.max())
    raise ValueError("aggregate must be 'mean' or 'max'")


def central_columns(count: int = 32, spacing: int = 16) -> np.ndarray:
    """Column labels spread symmetrically around m = 0."""
    half = count // 2
    return np.arange(-half, count - half) * spacing


def spectrum_sweep(params: RotorParams, M_values: Sequence[int],
                   ambient_dim: int = 4096, d: int = 1024,
                   alpha: float = DEFAULT_ALPHA, cutoff: float = 1e-20,
                   entropy_method: str = "spectral",
                   band_method: str = "banded", band_columns: int = 32,
                   band_spacing: int = 16, kernel_floor: float = 1e-40,
                   progress=None) -> list:
    """Entropy and band width of ``D F^M`` for each ``M``.

    Returns a list of dicts with keys ``M``, ``S``, ``b``.
    """
    params = validate(params)
    cols = central_columns(band_columns, band_spacing)
    cols = cols[np.abs(cols) < ambient_dim // 4]  # band_width only reads the central half
    out = []
    for M in M_values:
        trunc = mkr_matrix(params, ambient_dim, M, d, method=entropy_method,
                           kernel_floor=kernel_floor)
        S = shannon_entropy_avg(diagonalize(trunc), alpha)
        band = mkr_columns(params, ambient_dim, M, cols, method=band_method,
                           kernel_floor=kernel_floor)
        b = band_width(band, cutoff, along="column")
        row = {"M": int(M), "S": S, "b": b}
        out.append(row)
        if progress is not None:
            progress(row)
    return out

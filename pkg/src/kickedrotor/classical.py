"""Classical standard map and its periodically sign-flipped version.

One step of the map is

    L <- L + s * kappa * sin(theta)
    theta <- (theta + L) mod 2 pi

with ``s = kick_sign(n, M)``. ``L`` is kept unwrapped so that drifts and
energies use the true momentum; sections fold it into ``[0, 2 pi)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import fsolve

__all__ = [
    "ClassicalEnsemble",
    "uniform_ensemble",
    "disk_seeds",
    "std_map_step",
    "mkr_map_evolve",
    "evolve_with_energy",
    "poincare_section",
    "mean_energy",
    "IslandReport",
    "detect_transporting_island",
    "find_periodic_orbit",
    "find_transporting_islands",
    "jacobian_determinant",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ClassicalEnsemble:
    """Phase-space points ``(L, theta)``; ``L`` is unwrapped."""

    theta: np.ndarray
    unwrapped_L: np.ndarray
    kick_index: int = 0

    def __post_init__(self):
        theta = np.mod(np.atleast_1d(np.asarray(self.theta, dtype=float)), TWO_PI)
        L = np.atleast_1d(np.asarray(self.unwrapped_L, dtype=float))
        if theta.shape != L.shape:
            raise ValueError("theta and L must have the same shape")
        theta.flags.writeable = False
        L.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "unwrapped_L", L)

    @classmethod
    def from_points(cls, points, kick_index: int = 0) -> "ClassicalEnsemble":
        """From an iterable of ``(L, theta)`` pairs."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(pts[:, 1], pts[:, 0], kick_index)

    @property
    def L_folded(self) -> np.ndarray:
        return np.mod(self.unwrapped_L, TWO_PI)

    @property
    def points(self) -> np.ndarray:
        """``(n, 2)`` array of ``(L mod 2 pi, theta)``."""
        return np.column_stack([self.L_folded, self.theta])

    def __len__(self):
        return self.theta.size


def uniform_ensemble(n: int, L0: float = 0.0, seed: Optional[int] = None,
                     L_spread: float = 0.0) -> ClassicalEnsemble:
    """``theta`` uniform on ``[0, 2 pi)``; ``L`` uniform on ``L0 +- L_spread``."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, TWO_PI, n)
    L = np.full(n, float(L0))
    if L_spread:
        L += rng.uniform(-L_spread, L_spread, n)
    return ClassicalEnsemble(theta, L)


def disk_seeds(center: Tuple[float, float], radius: float, n: int,
               seed: Optional[int] = 0) -> ClassicalEnsemble:
    """``n`` points uniform in a disk of ``radius`` around ``(L, theta)``."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    phi = rng.uniform(0.0, TWO_PI, n)
    return ClassicalEnsemble(center[1] + r * np.sin(phi), center[0] + r * np.cos(phi))


def _step(L, theta, kappa, sign):
    L = L + sign * kappa * np.sin(theta)
    # fold L first: fmod is exact, while theta + L loses bits once |L| is large
    theta = np.mod(theta + np.mod(L, TWO_PI), TWO_PI)
    return L, theta


def std_map_step(ensemble: ClassicalEnsemble, kappa: float, sign: int = 1) -> ClassicalEnsemble:
    if abs(sign) != 1:
        raise ValueError("sign must be +1 or -1")
    L, theta = _step(ensemble.unwrapped_L, ensemble.theta, kappa, sign)
    return ClassicalEnsemble(theta, L, ensemble.kick_index + 1)


def _run(ensemble, kappa, M, n_kicks, every=None, hook=None):
    L = np.array(ensemble.unwrapped_L)
    theta = np.array(ensemble.theta)
    n0 = ensemble.kick_index
    for j in range(n_kicks):
        n = n0 + j
        sign = 1 if M is None else (1 if n % (2 * M) < M else -1)
        L, theta = _step(L, theta, kappa, sign)
        if hook is not None and (every is None or (n + 1) % every == 0):
            hook(n + 1, L, theta)
    return ClassicalEnsemble(theta, L, n0 + n_kicks)


def mkr_map_evolve(ensemble: ClassicalEnsemble, kappa: float, M: Optional[int],
                   n_kicks: int) -> ClassicalEnsemble:
    """``n_kicks`` steps with sign ``kick_sign(n, M)``; ``M=None`` is the
    standard map. The sign follows the ensemble's global kick count."""
    if M is not None and M < 1:
        raise ValueError("M must be >= 1")
    return _run(ensemble, kappa, M, n_kicks)


def mean_energy(ensemble: ClassicalEnsemble) -> float:
    """``<L^2> / 2`` over the unwrapped momenta."""
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    L = ensemble.unwrapped_L
    return float(0.5 * np.mean(L * L))


def evolve_with_energy(ensemble: ClassicalEnsemble, kappa: float, M: Optional[int],
                       record_kicks: Sequence[int]):
    """Evolve to ``max(record_kicks)`` and return ``(final, kicks, energies)``.

    Kick numbers are absolute (same counter as ``ensemble.kick_index``).
    """
    wanted = sorted(set(int(k) for k in record_kicks))
    if not wanted or wanted[0] < ensemble.kick_index:
        raise ValueError("record_kicks must be >= the current kick index")
    kicks, energies = [], []
    if wanted[0] == ensemble.kick_index:
        kicks.append(wanted[0])
        energies.append(mean_energy(ensemble))
    wanted_set = set(wanted)

    def hook(n, L, theta):
        if n in wanted_set:
            kicks.append(n)
            energies.append(float(0.5 * np.mean(L * L)))

    final = _run(ensemble, kappa, M, wanted[-1] - ensemble.kick_index, hook=hook)
    return final, np.array(kicks), np.array(energies)


def poincare_section(kappa: float, M: Optional[int], seeds, n_kicks: int,
                     window: Optional[Tuple[float, float, float, float]] = None,
                     stride: Optional[int] = None) -> np.ndarray:
    """Folded ``(L mod 2 pi, theta)`` points visited by the seeds.

    Parameters
    ----------
    seeds : ClassicalEnsemble or iterable of (L, theta)
    stride : int, optional
        Keep every ``stride``-th kick. Defaults to the map period: 1 for the
        standard map and ``2 M`` for the sign-flipped map.
    window : (L_lo, L_hi, theta_lo, theta_hi), optional
        Keep only points inside this rectangle (folded coordinates).

    Returns
    -------
    ndarray of shape (n, 2)
    """
    if n_kicks < 1:
        raise ValueError("n_kicks must be >= 1")
    if not isinstance(seeds, ClassicalEnsemble):
        seeds = ClassicalEnsemble.from_points(seeds)
    if stride is None:
        stride = 1 if M is None else 2 * M
    chunks = []

    def hook(n, L, theta):
        chunks.append(np.column_stack([np.mod(L, TWO_PI), theta]))

    _run(seeds, kappa, M, n_kicks, every=stride, hook=hook)
    pts = np.concatenate(chunks) if chunks else np.empty((0, 2))
    if window is not None:
        l0, l1, t0, t1 = window
        keep = ((pts[:, 0] >= l0) & (pts[:, 0] <= l1)
                & (pts[:, 1] >= t0) & (pts[:, 1] <= t1))
        pts = pts[keep]
    return pts


@dataclass(frozen=True)
class IslandReport:
    drift_per_kick: float
    is_transporting: bool
    concentration: float


def _circular_concentration(angles: np.ndarray) -> float:
    return float(np.abs(np.mean(np.exp(1j * angles))))


def detect_transporting_island(kappa: float, M: Optional[int],
                               seed: Tuple[float, float], n_kicks: int = 1000,
                               min_drift: float = 0.5,
                               min_concentration: float = 0.9) -> IslandReport:
    """Classify one trajectory started at ``seed = (L, theta)``.

    The drift is the unwrapped momentum gain per kick. The orbit counts as
    an island when its stroboscopic samples (every map period) stay
    concentrated in both ``theta`` and folded ``L``: the mean resultant
    length of each set of angles must exceed ``min_concentration``.
    """
    if n_kicks < 100:
        raise ValueError("n_kicks must be >= 100")
    period = 1 if M is None else 2 * M
    samples = []
    start = ClassicalEnsemble.from_points([seed])

    def hook(n, L, theta):
        samples.append((L[0], theta[0]))

    final = _run(start, kappa, M, n_kicks, every=period, hook=hook)
    drift = float((final.unwrapped_L[0] - start.unwrapped_L[0]) / n_kicks)
    s = np.array(samples)
    conc = min(_circular_concentration(s[:, 1]), _circular_concentration(s[:, 0]))
    return IslandReport(drift, bool(abs(drift) > min_drift and conc > min_concentration), conc)


def _wrap(x):
    return np.mod(x + np.pi, TWO_PI) - np.pi


def find_periodic_orbit(kappa: float, M: Optional[int], guess: Tuple[float, float],
                        period: Optional[int] = None, jump: float = 0.0,
                        start_kick: int = 0) -> Tuple[float, float]:
    """Solve for ``(L, theta)`` returning to itself after ``period`` kicks
    with momentum raised by ``jump`` (angle compared modulo 2 pi)."""
    period = (1 if M is None else 2 * M) if period is None else period

    def resid(x):
        ens = ClassicalEnsemble([x[1]], [x[0]], start_kick)
        out = _run(ens, kappa, M, period)
        return [out.unwrapped_L[0] - x[0] - jump, _wrap(out.theta[0] - x[1])]

    sol, info, ier, msg = fsolve(resid, guess, full_output=True, xtol=1e-13)
    if ier != 1 or np.max(np.abs(resid(sol))) > 1e-9:
        raise RuntimeError(f"periodic orbit search failed: {msg}")
    return float(sol[0]), float(np.mod(sol[1], TWO_PI))


def find_transporting_islands(kappa: float, M: Optional[int], L: float = np.pi,
                              n_theta: int = 720, n_kicks: int = 200) -> list:
    """Locate transporting islands crossing the line ``L = const``.

    Seeds along the line are classified with
    :func:`detect_transporting_island`; each run of neighbouring
    transporting seeds with a common drift is refined to the periodic
    orbit at its centre. Returns ``[((L, theta), drift_per_kick), ...]``
    sorted by ``theta``.
    """
    period = 1 if M is None else 2 * M
    thetas = (np.arange(n_theta) + 0.5) * TWO_PI / n_theta
    reps = [detect_transporting_island(kappa, M, (L, t), n_kicks) for t in thetas]
    hits = [(t, r.drift_per_kick) for t, r in zip(thetas, reps) if r.is_transporting]
    groups = []
    for t, d in hits:
        if groups and abs(groups[-1][-1][1] - d) < 0.5 and t - groups[-1][-1][0] < 2.5 * TWO_PI / n_theta:
            groups[-1].append((t, d))
        else:
            groups.append([(t, d)])
    islands = []
    for g in groups:
        ts = np.array([t for t, _ in g])
        drift = float(np.median([d for _, d in g]))
        # momentum gained per map period is a multiple of pi for these orbits
        jump = np.round(drift * period / np.pi) * np.pi
        try:
            centre = find_periodic_orbit(kappa, M, (L, float(np.median(ts))), period, jump)
        except RuntimeError:
            continue
        if any(abs(_wrap(centre[1] - c[1])) < 1e-6 and abs(centre[0] - c[0]) < 1e-6
               for c, _ in islands):
            continue
        islands.append((centre, float(jump / period)))
    return sorted(islands, key=lambda x: x[0][1])


def jacobian_determinant(L, theta, kappa: float, sign: int = 1,
                         h: float = 1e-5) -> np.ndarray:
    """Determinant of one map step by central finite differences.

    Angle differences are wrapped, so points near the fold are fine.
    """
    L = np.asarray(L, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Lp, tp = _step(L + h, theta, kappa, sign)
    Lm, tm = _step(L - h, theta, kappa, sign)
    a11 = (Lp - Lm) / (2 * h)
    a21 = _wrap(tp - tm) / (2 * h)
    Lp, tp = _step(L, theta + h, kappa, sign)
    Lm, tm = _step(L, theta - h, kappa, sign)
    a12 = (Lp - Lm) / (2 * h)
    a22 = _wrap(tp - tm) / (2 * h)
    return a11 * a22 - a12 * a21

"""Experiment configuration and the runners behind the command line."""
from __future__ import annotations

import dataclasses
import itertools
import json
import logging
import math
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import analysis, classical, floquet, quantum
from .io import read_csv, write_csv, write_manifest
from .params import QuantumState, RotorParams, Variant

__all__ = ["Mode", "ConfigError", "ExperimentConfig", "config_from_dict", "run"]

log = logging.getLogger("kickedrotor")


class ConfigError(ValueError):
    pass


class Mode(str, Enum):
    EVOLVE = "EVOLVE"
    SPECTRUM = "SPECTRUM"
    CLASSICAL = "CLASSICAL"
    FIT = "FIT"
    SWEEP = "SWEEP"


@dataclass
class ExperimentConfig:
    mode: Mode = Mode.EVOLVE
    params: RotorParams = field(default_factory=lambda: RotorParams(4.0, 2.0))
    kicks: int = 1000
    mmax: int = 2048
    record_every: Optional[int] = None
    energy_every: int = 1
    out: str = "out"
    prefix: str = ""
    seed: int = 0
    # SPECTRUM
    ambient: int = 4096
    d: int = 1024
    M_values: List[int] = field(default_factory=lambda: [2, 5, 10, 20, 50, 100, 200])
    alpha: float = 0.96
    cutoff: float = 1e-20
    # CLASSICAL
    n_seeds: int = 60
    n_points: int = 0
    window: Optional[List[float]] = None
    # FIT
    input: Optional[str] = None
    floor: float = 1e-15
    nonexp_floor: float = 1e-22
    # SWEEP
    sweep: dict = field(default_factory=dict)
    workers: int = 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["mode"] = self.mode.value
        d.pop("params")
        d.update({k: v for k, v in self.params.to_dict().items() if k != "kappa"})
        return d

    def file(self, name: str) -> Path:
        return Path(self.out) / f"{self.prefix}{name}"

    def header(self) -> str:
        return (f"{self.params.header()} kicks={self.kicks} m_max={self.mmax} "
                f"mode={self.mode.value}")


_PARAM_KEYS = {"k", "tau", "M", "variant", "kappa"}


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build a validated config from a flat JSON-style dict.

    ``M`` without ``variant`` selects ``MKR_SIGN_FLIP``; ``kappa`` (if
    given instead of ``k``) sets ``k = kappa`` and ``tau = 1``.
    """
    doc = {k: v for k, v in doc.items() if v is not None}
    names = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"params"}
    unknown = set(doc) - names - _PARAM_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    p = {}
    if "kappa" in doc and "k" not in doc:
        p["k"], p["tau"] = float(doc["kappa"]), 1.0
    for key in ("k", "tau", "M", "variant"):
        if key in doc:
            p[key] = doc[key]
    p.setdefault("k", 4.0)
    p.setdefault("tau", 2.0)
    M = p.get("M")
    finite_M = M is not None and str(M).lower() not in ("inf", "infinity", "none")
    if "variant" not in p:
        p["variant"] = Variant.MKR_SIGN_FLIP if finite_M else Variant.PLAIN_KR
    try:
        params = RotorParams.from_dict(p)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    kw = {k: v for k, v in doc.items() if k in names}
    try:
        cfg = ExperimentConfig(params=params, **kw)
        cfg.mode = cfg.mode if isinstance(cfg.mode, Mode) else Mode(str(cfg.mode).upper())
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    _check(cfg)
    return cfg


def _check(cfg: ExperimentConfig):
    if cfg.kicks < 0:
        raise ConfigError("kicks must be non-negative")
    if cfg.mmax < 8:
        raise ConfigError("mmax must be at least 8")
    if cfg.record_every is not None and cfg.record_every < 1:
        raise ConfigError("record_every must be positive")
    if cfg.energy_every < 1:
        raise ConfigError("energy_every must be positive")
    if cfg.mode is Mode.SPECTRUM:
        if not cfg.M_values or any(int(M) < 1 for M in cfg.M_values):
            raise ConfigError("M_values must be a nonempty list of positive integers")
        if not 1 <= cfg.d <= cfg.ambient or cfg.ambient % 2:
            raise ConfigError("need 1 <= d <= ambient with even ambient")
    if cfg.mode is Mode.FIT and not cfg.input:
        raise ConfigError("FIT mode needs an input file")
    if cfg.mode is Mode.SWEEP:
        if not cfg.sweep or any(not v for v in cfg.sweep.values()):
            raise ConfigError("sweep ranges must be nonempty")
        bad = set(cfg.sweep) - {"k", "tau", "M"}
        if bad:
            raise ConfigError(f"cannot sweep over {sorted(bad)}")
        if cfg.workers < 1:
            raise ConfigError("workers must be >= 1")
    _check_writable(cfg.out)


def _check_writable(out: str):
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise ConfigError(f"output directory {out!r} is not writable: {exc}") from None


# --------------------------------------------------------------------------
# runners

def _fit_row(p: RotorParams, cfg: ExperimentConfig, dist, kicks: int) -> list:
    M = "inf" if p.flip_period is None else p.flip_period
    try:
        l = analysis.fit_localization_length(dist, cfg.floor).l
    except analysis.FitError as exc:
        log.warning("exponential fit failed: %s", exc)
        l = math.nan
    try:
        ne = analysis.detect_nonexponential(dist, cfg.nonexp_floor)
        l_in, l_out, _ = ne.fit.two_scale
        resid, flag = ne.fit.residual, ne.is_nonexponential
    except analysis.FitError as exc:
        log.warning("two-segment fit failed: %s", exc)
        l_in = l_out = resid = math.nan
        flag = False
    return [p.k, p.tau, M, kicks, l, l_in, l_out, resid, flag]


FIT_COLUMNS = ["k", "tau", "M", "kicks", "l", "l_inner", "l_outer", "residual",
               "is_nonexponential"]


def run_evolve(cfg: ExperimentConfig) -> dict:
    sched = quantum.PropagationSchedule.every(cfg.kicks, cfg.record_every, cfg.energy_every)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", quantum.BasisOverflowWarning)
        res = quantum.evolve(QuantumState.basis(0, cfg.mmax), cfg.params, sched)
    if res.overflow_kick is not None:
        log.warning("basis overflow: edge probability above %g first at kick %d",
                    quantum.EDGE_THRESHOLD, res.overflow_kick)
    head = cfg.header()
    outputs = [write_csv(cfg.file("energy.csv"), head, ["kick", "e_tilde"],
                         ((e.kick_index, e.e_tilde) for e in res.energies))]
    m = res.final.m
    for rec in res.distributions:
        name = "pm_final.csv" if rec.kick_index == cfg.kicks else f"pm_{rec.kick_index:07d}.csv"
        outputs.append(write_csv(cfg.file(name), f"{head} kick={rec.kick_index}",
                                 ["m", "P"], zip(m, rec.p)))
    row = _fit_row(cfg.params, cfg, res.distributions[-1], cfg.kicks)
    outputs.append(write_csv(cfg.file("fit.csv"), head, FIT_COLUMNS, [row]))
    return {"outputs": outputs, "overflow_kick": res.overflow_kick,
            "fit": dict(zip(FIT_COLUMNS, row)),
            "final_energy": res.energies[-1].e_tilde if res.energies else None}


def run_spectrum(cfg: ExperimentConfig) -> dict:
    head = f"{cfg.params.header()} ambient={cfg.ambient} d={cfg.d} alpha={cfg.alpha!r} cutoff={cfg.cutoff!r}"
    rows = floquet.spectrum_sweep(
        cfg.params, [int(M) for M in cfg.M_values], cfg.ambient, cfg.d, cfg.alpha,
        cfg.cutoff, progress=lambda r: log.info("M=%d S=%.6g b=%.6g", r["M"], r["S"], r["b"]))
    outputs = [
        write_csv(cfg.file("entropy.csv"), head, ["M", "S_MKR"], ((r["M"], r["S"]) for r in rows)),
        write_csv(cfg.file("bandwidth.csv"), head, ["M", "b_MKR"], ((r["M"], r["b"]) for r in rows)),
    ]
    return {"outputs": outputs}


def run_classical(cfg: ExperimentConfig) -> dict:
    kappa = cfg.params.kappa
    M = cfg.params.flip_period
    head = f"kappa={kappa!r} M={'inf' if M is None else M} kicks={cfg.kicks} seed={cfg.seed}"
    rng = np.random.default_rng(cfg.seed)
    seeds = classical.ClassicalEnsemble(rng.uniform(0, 2 * np.pi, cfg.n_seeds),
                                        rng.uniform(0, 2 * np.pi, cfg.n_seeds))
    pts = classical.poincare_section(kappa, M, seeds, max(cfg.kicks, 1),
                                     window=cfg.window)
    outputs = [write_csv(cfg.file("section.csv"), head, ["theta", "L_folded"],
                         ((t, L) for L, t in pts))]
    if cfg.n_points > 0:
        ens = classical.uniform_ensemble(cfg.n_points, seed=cfg.seed)
        kicks = np.unique(np.round(np.logspace(0, math.log10(max(cfg.kicks, 1)), 60)).astype(int))
        _, ks, es = classical.evolve_with_energy(ens, kappa, M, np.concatenate([[0], kicks]))
        outputs.append(write_csv(cfg.file("diffusion.csv"), head + f" n_points={cfg.n_points}",
                                 ["kick", "mean_energy"], zip(ks, es)))
    return {"outputs": outputs}


def run_fit(cfg: ExperimentConfig) -> dict:
    try:
        meta, cols, data = read_csv(cfg.input)
    except (OSError, ValueError, StopIteration) as exc:
        raise ConfigError(f"cannot read {cfg.input}: {exc}") from None
    if cols[:2] != ["m", "P"]:
        raise ConfigError(f"{cfg.input}: expected columns m,P")
    m = data[:, 0].astype(int)
    if m.size % 2 or m[0] != -(m.size // 2) or np.any(np.diff(m) != 1):
        raise ConfigError(f"{cfg.input}: m column must run from -m_max to m_max-1")
    fields = _meta_fields(meta)
    kicks = int(fields.get("kick", cfg.kicks))
    try:
        params = RotorParams.from_dict(fields)
    except (ValueError, TypeError):
        params = cfg.params
    row = _fit_row(params, cfg, data[:, 1], kicks)
    out = write_csv(cfg.file("fit.csv"), f"source={cfg.input} {meta}", FIT_COLUMNS, [row])
    return {"outputs": [out], "fit": dict(zip(FIT_COLUMNS, row))}


def _meta_fields(meta: str) -> dict:
    """``key=value`` tokens of a CSV metadata line (numbers converted)."""
    out = {}
    for tok in meta.split():
        if "=" not in tok:
            continue
        key, value = tok.split("=", 1)
        try:
            out[key] = float(value) if key in ("k", "tau") else value
        except ValueError:
            out[key] = value
    return out


def _sweep_worker(doc: dict) -> dict:
    cfg = config_from_dict(doc)
    info = run_evolve(cfg)
    return {"outputs": [os.fspath(p) for p in info["outputs"]],
            "fit": [info["fit"][c] for c in FIT_COLUMNS],
            "overflow_kick": info["overflow_kick"]}


def run_sweep(cfg: ExperimentConfig) -> dict:
    base = cfg.to_dict()
    for key in ("sweep", "workers", "mode"):
        base.pop(key)
    keys = sorted(cfg.sweep)
    docs = []
    for i, combo in enumerate(itertools.product(*(cfg.sweep[k] for k in keys))):
        doc = dict(base, mode="EVOLVE", out=os.path.join(cfg.out, f"run_{i:03d}"))
        doc.update(dict(zip(keys, combo)))
        if "M" in keys:
            doc.pop("variant", None)
        docs.append(doc)
    for doc in docs:  # fail fast on bad combinations
        config_from_dict(doc)
    if cfg.workers == 1:
        results = [_sweep_worker(d) for d in docs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_worker, docs))
    rows = [r["fit"] for r in results]
    summary = write_csv(cfg.file("sweep.csv"), f"sweep={json.dumps(cfg.sweep, sort_keys=True)}",
                        FIT_COLUMNS, rows)
    outputs = [p for r in results for p in r["outputs"]] + [summary]
    return {"outputs": outputs}


_RUNNERS = {Mode.EVOLVE: run_evolve, Mode.SPECTRUM: run_spectrum,
            Mode.CLASSICAL: run_classical, Mode.FIT: run_fit, Mode.SWEEP: run_sweep}


def run(cfg: ExperimentConfig) -> dict:
    """Run one experiment and write its manifest; returns runner info."""
    _check(cfg)
    log.info("running %s: %s", cfg.mode.value, cfg.header())
    info = _RUNNERS[cfg.mode](cfg)
    extra = {k: v for k, v in info.items() if k != "outputs"}
    manifest = write_manifest(cfg.file("manifest.json"), cfg.to_dict(), info["outputs"], extra)
    info["manifest"] = manifest
    return info

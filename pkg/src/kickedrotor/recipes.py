"""Preset experiments for each figure, at desk scale ("ci") or full scale ("paper")."""
from __future__ import annotations

import os
from typing import Dict, List

from .experiment import ExperimentConfig, config_from_dict

__all__ = ["RECIPES", "recipe_configs"]


def _evolve(out, name, k, tau, M, kicks, mmax, record_every=None, energy_every=1):
    return {"mode": "EVOLVE", "k": k, "tau": tau, "M": M, "kicks": kicks, "mmax": mmax,
            "record_every": record_every, "energy_every": energy_every,
            "out": os.path.join(out, name)}


def fig1(out: str, scale: str) -> List[dict]:
    # localization lineshapes and energy curves, k=4, tau=2, M=50
    if scale == "paper":
        kicks, every = 400_000, 10
        return [_evolve(out, "kr", 4.0, 2.0, "inf", kicks, 2048, energy_every=every),
                _evolve(out, "mkr_M50", 4.0, 2.0, 50, kicks, 8192, energy_every=every)]
    kicks = 20_000
    return [_evolve(out, "kr", 4.0, 2.0, "inf", kicks, 2048),
            _evolve(out, "mkr_M50", 4.0, 2.0, 50, kicks, 4096)]


def fig2(out: str, scale: str) -> List[dict]:
    if scale == "paper":
        Ms = [1, 2, 5, 10, 20, 30, 50, 75, 100, 150, 200, 300, 400]
        return [{"mode": "SPECTRUM", "k": 4.0, "tau": 2.0, "ambient": 16384, "d": 2700,
                 "M_values": Ms, "out": out}]
    return [{"mode": "SPECTRUM", "k": 4.0, "tau": 2.0, "ambient": 4096, "d": 1024,
             "M_values": [2, 5, 10, 20, 50, 100, 200], "out": out}]


def _portraits(out, kappa, scale):
    kicks, seeds = (4000, 200) if scale == "paper" else (400, 60)
    return [{"mode": "CLASSICAL", "kappa": kappa, "M": M, "kicks": kicks,
             "n_seeds": seeds, "n_points": 2000 if scale == "paper" else 500,
             "out": os.path.join(out, name)}
            for name, M in (("kr", "inf"), ("mkr_M2", 2))]


def fig3(out: str, scale: str) -> List[dict]:
    return _portraits(out, 5.0, scale)


def fig4(out: str, scale: str) -> List[dict]:
    return _portraits(out, 10.0, scale)


def _energy_control(out, k, scale):
    mmax = 8192 if scale == "paper" else (4096 if k <= 5 else 8192)
    return [_evolve(out, name, k, 1.0, M, 1500, mmax)
            for name, M in (("kr", "inf"), ("mkr_M2", 2), ("mkr_M3", 3))]


def fig5(out: str, scale: str) -> List[dict]:
    return _energy_control(out, 5.0, scale)


def fig6(out: str, scale: str) -> List[dict]:
    return _energy_control(out, 10.0, scale)


PDIS_SETS = [(1.0, 5.0), (2.0, 5.0), (1.0, 5.7), (2.0, 6.0), (2.00001, 5.0)]


def fig7(out: str, scale: str) -> List[dict]:
    mmax = 8192 if scale == "paper" else 4096
    docs = []
    for tau, k in PDIS_SETS:
        for name, M in (("kr", "inf"), ("mkr_M2", 2)):
            docs.append(_evolve(out, f"tau{tau!r}_k{k!r}_{name}", k, tau, M, 8000, mmax,
                                energy_every=100))
    return docs


RECIPES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4,
           "fig5": fig5, "fig6": fig6, "fig7": fig7}


def recipe_configs(name: str, out: str, scale: str = "ci") -> List[ExperimentConfig]:
    if name not in RECIPES:
        raise KeyError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}")
    if scale not in ("ci", "paper"):
        raise ValueError("scale must be 'ci' or 'paper'")
    return [config_from_dict(d) for d in RECIPES[name](out, scale)]

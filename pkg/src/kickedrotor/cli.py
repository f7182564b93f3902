"""Command-line front end.

Examples
--------
    kickedrotor run --mode EVOLVE --k 4 --tau 2 --M 50 --kicks 10000 --out out/mkr
    kickedrotor run config.json --kicks 2000
    kickedrotor recipe fig5 --scale ci --out out/fig5

Exit status: 0 on success, 1 for configuration errors, 2 for numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiment import ConfigError, config_from_dict, run
from .params import NumericalError, ParameterError
from .recipes import RECIPES, recipe_configs

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("kickedrotor")

# flag name -> config key
_OVERRIDES = {
    "mode": "mode", "k": "k", "tau": "tau", "kappa": "kappa", "M": "M",
    "kicks": "kicks", "mmax": "mmax", "variant": "variant", "seed": "seed",
    "out": "out", "record_every": "record_every", "energy_every": "energy_every",
    "prefix": "prefix", "input": "input", "workers": "workers",
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kickedrotor", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a config file and/or flags")
    r.add_argument("config", nargs="?", help="JSON config file")
    r.add_argument("--mode", choices=["EVOLVE", "SPECTRUM", "CLASSICAL", "FIT", "SWEEP"])
    r.add_argument("--k", type=float)
    r.add_argument("--tau", type=float)
    r.add_argument("--kappa", type=float, help="classical parameter; sets k=kappa, tau=1")
    r.add_argument("--M", help="sign-flip period (integer or 'inf')")
    r.add_argument("--kicks", type=int)
    r.add_argument("--mmax", type=int)
    r.add_argument("--variant", choices=["PLAIN_KR", "MKR_SIGN_FLIP",
                                         "MKR_D_OPERATOR", "MKR_TIME_DELAY"])
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--prefix")
    r.add_argument("--record-every", dest="record_every", type=int)
    r.add_argument("--energy-every", dest="energy_every", type=int)
    r.add_argument("--input", help="P(m) CSV for FIT mode")
    r.add_argument("--workers", type=int)

    rc = sub.add_parser("recipe", help="run a preset figure reproduction")
    rc.add_argument("name", choices=sorted(RECIPES))
    rc.add_argument("--scale", choices=["ci", "paper"], default="ci")
    rc.add_argument("--out", default=None)

    sub.add_parser("list", help="list recipes")
    return ap


def _load_config(args) -> dict:
    doc = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    for flag, key in _OVERRIDES.items():
        v = getattr(args, flag, None)
        if v is not None:
            doc[key] = v
    if args.kappa is not None:
        doc.pop("k", None)
        doc.pop("tau", None)
    return doc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "list":
            for name in sorted(RECIPES):
                print(name)
            return EXIT_OK
        if args.command == "recipe":
            configs = recipe_configs(args.name, args.out or f"out/{args.name}", args.scale)
        else:
            configs = [config_from_dict(_load_config(args))]
    except (ConfigError, ParameterError, KeyError, ValueError, TypeError) as exc:
        print(f"kickedrotor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        for cfg in configs:
            info = run(cfg)
            print(info["manifest"])
    except ConfigError as exc:
        print(f"kickedrotor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"kickedrotor: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

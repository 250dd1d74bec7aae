"""Command-line front end.

    veriell run --problem emden --n 10 --method fixed-point --out results/
    veriell compare --configs runs.json --out results/

Artifacts per run: certificate JSON (one per method), candidate-box CSV,
summary CSV and a plot-grid sample of the approximate solution.  Exit codes:
0 all requested verifications succeeded, 1 some verification inconclusive or
failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

from .blocks import PolyNonlinearity
from .certificate import (
    certificate_to_json,
    write_certificate,
    write_grid_csv,
    write_summary,
    write_wh_csv,
)
from .constants import ConstantProvider
from .linalg import InconclusiveError
from .verify import verify_problem

USAGE_ERROR = 2
INCONCLUSIVE = 1

_METHODS = ("fixed-point", "kantorovich", "in-classic")


@dataclass
class RunConfig:
    problem: str = "emden"
    f_coeffs: Optional[list[float]] = None
    n: int = 10
    method: str = "fixed-point"           # or kantorovich | in-classic | all
    variant: str = "schur"                # or schur-alt
    constants: Optional[str] = None       # constants table/override file
    out: Optional[str] = None
    grid: int = 101
    seed: int = 0                         # property-suite seed (recorded only)

    def validate(self):
        if self.n < 1:
            raise ValueError("degree N must be >= 1")
        if self.method not in _METHODS + ("all",):
            raise ValueError(f"unknown method {self.method!r}")
        if self.variant not in ("schur", "schur-alt"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.problem == "poly":
            if not self.f_coeffs:
                raise ValueError("poly problem needs --f-coeffs")
        elif self.problem != "emden":
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.grid < 2:
            raise ValueError("grid must be >= 2")

    def nonlinearity(self) -> PolyNonlinearity:
        if self.problem == "emden":
            return PolyNonlinearity.emden()
        return PolyNonlinearity.from_list(self.f_coeffs)

    def methods(self) -> list[str]:
        return list(_METHODS) if self.method == "all" else [self.method]

    @staticmethod
    def from_file(path) -> "RunConfig":
        with open(path) as fh:
            obj = json.load(fh)
        return RunConfig(**obj)


def _constants_for(config: RunConfig) -> ConstantProvider:
    if config.constants:
        return ConstantProvider.from_file(config.constants)
    return ConstantProvider()


def run(config: RunConfig) -> tuple[int, list]:
    """Execute one configuration; write artifacts; return (exit_code, certs)."""
    try:
        config.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR, []
    constants = _constants_for(config)
    f = config.nonlinearity()
    try:
        result = verify_problem(f, config.n, config.methods(),
                                constants=constants, variant=config.variant)
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return INCONCLUSIVE, []
    cfg_echo = asdict(config)
    cfg_echo.pop("out")  # artifact location is not semantic configuration
    for cert in result.certificates:
        cert.config = cfg_echo
    if config.out:
        outdir = Path(config.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for cert in result.certificates:
            write_certificate(cert, outdir / f"certificate-{cert.method}.json")
            if cert.wh is not None:
                write_wh_csv(cert, outdir / f"wh-{cert.method}.csv")
        write_summary(result.certificates, outdir / "summary.csv")
        write_grid_csv(result.uhat, outdir / "grid.csv", grid=config.grid)
    for cert in result.certificates:
        line = f"{cert.method}: {cert.status}"
        if cert.rho is not None:
            line += f"  rho <= {cert.rho.hi:.17g}"
        if cert.alpha is not None:
            line += f"  alpha <= {cert.alpha.hi:.17g}"
        if cert.sup_wh is not None:
            line += f"  sup||W_h|| <= {cert.sup_wh.hi:.17g}"
        print(line)
    ok = all(c.verified for c in result.certificates)
    return (0 if ok else INCONCLUSIVE), result.certificates


def compare(configs: list[RunConfig], out_path) -> int:
    """Run several configurations and emit one CSV row per run."""
    import csv
    if len(configs) < 2:
        print("error: compare needs at least 2 configs", file=sys.stderr)
        return USAGE_ERROR
    rows = []
    worst = 0
    for config in configs:
        try:
            config.validate()
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        t0 = time.perf_counter()
        constants = _constants_for(config)
        try:
            result = verify_problem(config.nonlinearity(), config.n,
                                    config.methods(), constants=constants,
                                    variant=config.variant)
        except InconclusiveError as exc:
            print(f"inconclusive: {exc}", file=sys.stderr)
            worst = max(worst, INCONCLUSIVE)
            continue
        wall = time.perf_counter() - t0
        for cert in result.certificates:
            bounds = cert.bounds
            rows.append({
                "N": config.n,
                "method": cert.method,
                "status": cert.status,
                "kappa": _hex_to_dec(bounds.get("kappa")),
                "K_T": _hex_to_dec(bounds.get("K_T")),
                "delta_perp": _hex_to_dec(bounds.get("delta_perp")),
                "alpha": repr(cert.alpha.hi) if cert.alpha else "",
                "rho": repr(cert.rho.hi) if cert.rho else "",
                "wall_time_s": f"{wall:.3f}",
            })
            if not cert.verified:
                worst = max(worst, INCONCLUSIVE)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows else
                                ["N", "method", "status"])
        writer.writeheader()
        writer.writerows(rows)
    return worst


def _hex_to_dec(pair) -> str:
    if not pair:
        return ""
    return repr(float.fromhex(pair[1]))


def _add_run_flags(sub):
    sub.add_argument("--problem", default=None, choices=["emden", "poly"])
    sub.add_argument("--f-coeffs", default=None,
                     help="comma-separated polynomial coefficients c0,c1,c2,...")
    sub.add_argument("--n", type=int, default=None, help="spectral degree N")
    sub.add_argument("--method", default=None,
                     choices=list(_METHODS) + ["all"])
    sub.add_argument("--variant", default=None, choices=["schur", "schur-alt"])
    sub.add_argument("--constants", default=None,
                     help="JSON file with constant overrides")
    sub.add_argument("--out", default=None, help="artifact output directory")
    sub.add_argument("--grid", type=int, default=None, help="plot grid size")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--config", default=None, help="JSON config file")


def _merge_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    for name in ("problem", "n", "method", "variant", "constants",
                 "out", "grid", "seed"):
        val = getattr(args, name)
        if val is not None:
            setattr(config, name, val)
    if args.f_coeffs is not None:
        config.f_coeffs = [float(x) for x in args.f_coeffs.split(",")]
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="veriell",
        description="verified existence proofs for -Lap(u) = f(u) on the unit square")
    subs = parser.add_subparsers(dest="command")
    runp = subs.add_parser("run", help="verify one configuration")
    _add_run_flags(runp)
    cmpp = subs.add_parser("compare", help="verify several configurations")
    cmpp.add_argument("--configs", required=True,
                      help="JSON file: list of run-config objects")
    cmpp.add_argument("--out", default="compare.csv", help="output CSV path")
    args = parser.parse_args(argv)

    if args.command == "compare":
        try:
            with open(args.configs) as fh:
                objs = json.load(fh)
            configs = [RunConfig(**obj) for obj in objs]
        except (OSError, TypeError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        return compare(configs, args.out)
    if args.command == "run" or args.command is None:
        if args.command is None:
            parser.print_help()
            return USAGE_ERROR
        try:
            config = _merge_config(args)
        except (OSError, TypeError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        code, _ = run(config)
        return code
    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

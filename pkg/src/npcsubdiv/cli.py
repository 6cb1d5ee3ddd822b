"""Command-line front end: file I/O, reports, reproducible runs.

One binary with subcommands; every run emits a self-describing report whose
payload is deterministic for a fixed config and seed (timing and version
metadata live outside the payload).  Numeric output keeps full precision so
golden files stay meaningful.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import (DomainError, NumericError, ResourceError, SolverError,
                     StructuralError)
from .grid import GridData, grid_from_json, grid_to_json, random_grid
from .linear import cascade, contractivity_certificate
from .markov import kernel_row, lp_moment, nonassociativity_gap, simulate_chain
from .masks import Mask, mask_from_json, validate_mask
from .spaces import KINDS, TRIPOD, SpaceDescriptor
from .subdivision import (approximation_error, convergence_diagnostic,
                          geodesic_sampler, iterate)

__all__ = ["RunConfig", "Report", "run", "main"]

COMMANDS = ("validate", "cascade", "certify", "subdivide", "diagnose",
            "chain", "lp", "gap", "approx")
CSV_COMMANDS = ("cascade", "subdivide", "lp")  # series-valued outputs only
APPROX_H_SWEEP = (0.2, 0.1, 0.05)


@dataclass
class RunConfig:
    """Echoable description of one CLI invocation."""

    command: str
    mask: str | None = None
    data: str | None = None
    space: str | None = None
    levels: int | None = None
    steps: int | None = None
    trials: int | None = None
    seed: int = 0
    p: float | None = None
    start: tuple | None = None
    index: tuple | None = None
    cap: int | None = None
    out: str | None = None
    format: str = "json"
    mode: str | None = None  # chain only: "exact" or "mc"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise DomainError(f"unknown format {self.format!r}")
        if self.format == "csv" and self.command not in CSV_COMMANDS:
            raise DomainError(
                f"csv output is only available for {', '.join(CSV_COMMANDS)}")


@dataclass
class Report:
    config: dict
    payload: dict
    versions: dict
    duration_s: float


# -- input parsing ---------------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise StructuralError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StructuralError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _need(config: RunConfig, attr: str):
    value = getattr(config, attr)
    if value is None:
        raise DomainError(f"command {config.command!r} requires --{attr}")
    return value


def _mask_of(config: RunConfig) -> Mask:
    return mask_from_json(_load_json(_need(config, "mask")))


def _data_of(config: RunConfig) -> GridData:
    return grid_from_json(_load_json(_need(config, "data")))


def parse_space(text: str) -> SpaceDescriptor:
    """'kind:dim' as in spd:2 or hyperboloid:3; bare 'tripod' is allowed."""
    kind, _, dim = text.partition(":")
    if kind not in KINDS:
        raise DomainError(f"unknown space kind {kind!r}; expected one of {KINDS}")
    if dim == "" and kind == TRIPOD:
        return SpaceDescriptor(kind=kind, dim=1)
    try:
        return SpaceDescriptor(kind=kind, dim=int(dim))
    except ValueError as exc:
        raise DomainError(f"bad space {text!r}; expected kind:dim") from exc


def parse_lattice(text: str) -> tuple:
    """Comma-separated integers: '1' or '0,-2'."""
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise DomainError(f"bad lattice point {text!r}") from exc


# -- payload builders ------------------------------------------------------------

def _sorted_probs(probs: dict) -> list:
    return [{"j": list(j), "p": probs[j]} for j in sorted(probs)]


def _box(lo, hi) -> dict:
    return {"lo": list(lo), "hi": list(hi)}


def _cmd_validate(config: RunConfig):
    report = validate_mask(_mask_of(config))
    payload = {
        "sum_rule_ok": report.sum_rule_ok,
        "residual": report.residual,
        "coset_residuals": [{"parity": list(p), "residual": r}
                            for p, r in sorted(report.coset_residuals.items())],
        "nonnegative_ok": report.nonnegative_ok,
        "support_box": _box(*report.support_box),
        "notes": list(report.notes),
    }
    if report.univariate_zhou is not None:
        payload["zhou"] = asdict(report.univariate_zhou)
    return payload


def _cmd_cascade(config: RunConfig):
    samples = cascade(_mask_of(config), _need(config, "levels"))
    return {
        "level": samples.level,
        "eps_n": samples.eps_n,
        "support": _box(*samples.support),
        "samples": [{"index": list(i), "value": v}
                    for i, v in sorted(samples.items())],
    }


def _cmd_certify(config: RunConfig):
    cap = config.cap if config.cap is not None else 8
    cert = contractivity_certificate(_mask_of(config), cap)
    return {
        "found": cert.found,
        "level": cert.level,
        "n0": cert.n0,
        "alpha_n": cert.alpha_n,
        "eps_n": cert.eps_n,
        "M": cert.M,
        "gamma_n": cert.gamma_n,
        "gauge_half_widths": [float(c) for c in cert.gauge.half_widths],
    }


def _cmd_subdivide(config: RunConfig):
    trace = iterate(_mask_of(config), _data_of(config), _need(config, "levels"))
    return {
        "levels": len(trace.levels) - 1,
        "interiors": [_box(*b) for b in trace.interiors],
        "d_inf_series": list(trace.d_inf_series),
        "gauge_series": list(trace.gauge_series),
        "final": grid_to_json(trace.levels[-1]),
    }


def _cmd_diagnose(config: RunConfig):
    mask = _mask_of(config)
    n_max = config.levels if config.levels is not None else 4
    runs = []
    if config.data is not None:
        runs.append(_data_of(config))
    else:
        descriptor = parse_space(_need(config, "space"))
        mlo, mhi = mask.support_box()
        width = max(h - l for l, h in zip(mlo, mhi)) + 6
        trials = config.trials if config.trials is not None else 8
        for trial in range(trials):
            rng = np.random.default_rng([config.seed, trial])
            runs.append(random_grid(descriptor, (0,) * mask.dim,
                                    (width,) * mask.dim, rng))
    reports = [convergence_diagnostic(mask, x, n_max) for x in runs]
    verdicts = [r.verdict for r in reports]
    return {
        "n_max": n_max,
        "trials": len(runs),
        "verdicts": verdicts,
        "cauchy_series": [list(r.cauchy_series) for r in reports],
        "verdict": ("converging" if all(v == "converging" for v in verdicts)
                    else "inconclusive"),
    }


def _cmd_chain(config: RunConfig):
    mask = _mask_of(config)
    start = _need(config, "start")
    steps = _need(config, "steps")
    if config.mode == "mc":
        trials = config.trials if config.trials is not None else 100000
        freq = simulate_chain(mask, start, steps, trials, config.seed)
        return {"mode": "mc", "start": list(start), "steps": steps,
                "trials": trials, "seed": config.seed,
                "freq": _sorted_probs(freq)}
    row = kernel_row(mask, start, steps)
    return {"mode": "exact", "start": list(row.start), "steps": row.steps,
            "probs": _sorted_probs(row.probs)}


def _cmd_lp(config: RunConfig):
    mask = _mask_of(config)
    start = _need(config, "start")
    p = config.p if config.p is not None else 1.0
    center = config.index if config.index is not None else (0,) * mask.dim
    max_steps = config.steps if config.steps is not None else 8
    curve = [{"n": n, "moment": lp_moment(mask, start, n, p, center)}
             for n in range(1, max_steps + 1)]
    return {"start": list(start), "p": p, "center": list(center),
            "curve": curve}


def _cmd_gap(config: RunConfig):
    gap = nonassociativity_gap(_mask_of(config), _data_of(config),
                               _need(config, "index"), _need(config, "steps"))
    return {"index": list(config.index), "steps": config.steps, "gap": gap}


def _cmd_approx(config: RunConfig):
    mask = _mask_of(config)
    descriptor = parse_space(config.space if config.space is not None
                             else "hyperboloid:2")
    level = config.levels if config.levels is not None else 5
    radius = max(math.sqrt(sum(ik * ik for ik in idx))
                 for idx, _ in mask.nonzero_items())
    sampler = geodesic_sampler(descriptor, config.seed)
    checks = []
    for h in APPROX_H_SWEEP:
        chk = approximation_error(mask, sampler, lipschitz=1.0,
                                  support_radius=radius, h=h, n=level)
        checks.append({"h": chk.h, "sup_err": chk.sup_err,
                       "bound": chk.bound, "ok": chk.ok})
    return {"space": f"{descriptor.kind}:{descriptor.dim}", "level": level,
            "lipschitz": 1.0, "support_radius": radius, "checks": checks}


_HANDLERS = {
    "validate": _cmd_validate,
    "cascade": _cmd_cascade,
    "certify": _cmd_certify,
    "subdivide": _cmd_subdivide,
    "diagnose": _cmd_diagnose,
    "chain": _cmd_chain,
    "lp": _cmd_lp,
    "gap": _cmd_gap,
    "approx": _cmd_approx,
}


def run(config: RunConfig) -> Report:
    """Dispatches to the owning module; payload is deterministic per config."""
    started = time.perf_counter()
    payload = _HANDLERS[config.command](config)
    duration = time.perf_counter() - started
    config_echo = asdict(config)
    for key in ("start", "index"):
        if config_echo[key] is not None:
            config_echo[key] = list(config_echo[key])
    versions = {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    return Report(config=config_echo, payload=payload,
                  versions=versions, duration_s=duration)


# -- serialization ---------------------------------------------------------------

def _series_rows(command: str, payload: dict):
    if command == "cascade":
        header = ("index", "value")
        rows = [(" ".join(str(c) for c in entry["index"]), entry["value"])
                for entry in payload["samples"]]
    elif command == "lp":
        header = ("n", "moment")
        rows = [(entry["n"], entry["moment"]) for entry in payload["curve"]]
    else:  # subdivide: the contraction series
        header = ("n", "d_inf", "gauge_D")
        rows = list(zip(range(len(payload["d_inf_series"])),
                        payload["d_inf_series"], payload["gauge_series"]))
    return header, rows


def render_report(report: Report, command: str, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header, rows = _series_rows(command, report.payload)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(c) if isinstance(c, float) else c
                             for c in row])
        return buf.getvalue()
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npcsubdiv",
        description="Barycentric subdivision schemes on Hadamard spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, *, mask=False, data=False, space=False,
            levels=False, steps=False, trials=False, p=False, start=False,
            index=False, cap=False):
        cmd = sub.add_parser(name, help=help_text)
        if mask:
            cmd.add_argument("--mask", required=True,
                             help="mask JSON file")
        if data:
            cmd.add_argument("--data", required=(name in ("subdivide", "gap")),
                             help="grid data JSON file")
        if space:
            cmd.add_argument("--space", help="backend as kind:dim, e.g. spd:2")
        if levels:
            cmd.add_argument("--levels", "--level", dest="levels", type=int,
                             help="refinement depth")
        if steps:
            flags = ("--steps", "--max-steps") if name == "lp" else ("--steps",)
            cmd.add_argument(*flags, dest="steps", type=int,
                             help="chain step count")
        if trials:
            cmd.add_argument("--trials", type=int, help="number of trials")
        if p:
            cmd.add_argument("--p", type=float, help="moment exponent (>= 1)")
        if start:
            cmd.add_argument("--start", type=parse_lattice,
                             help="start state, comma-separated integers")
        if index:
            cmd.add_argument("--index", type=parse_lattice,
                             help="lattice index, comma-separated integers")
        if cap:
            cmd.add_argument("--cap", type=int, help="certificate level cap")
        cmd.add_argument("--seed", type=int, default=0)
        cmd.add_argument("--out", help="output file (default: stdout)")
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
        return cmd

    add("validate", "check a mask: nonnegativity, sum rule, screens",
        mask=True)
    add("cascade", "refinable-function samples of a mask", mask=True,
        levels=True)
    add("certify", "contractivity certificate for a mask", mask=True, cap=True)
    add("subdivide", "run the scheme on grid data", mask=True, data=True,
        levels=True)
    add("diagnose", "convergence diagnostic on given or random data",
        mask=True, data=True, space=True, levels=True, trials=True)
    chain = add("chain", "characteristic-chain marginal, exact or Monte Carlo",
                mask=True, steps=True, trials=True, start=True)
    mode = chain.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true",
                      help="exact kernel row (default)")
    mode.add_argument("--mc", nargs="?", const="", metavar="trials=N",
                      help="Monte Carlo marginal; optional trials=N")
    add("lp", "L^p moment curve of the chain", mask=True, steps=True, p=True,
        start=True, index=True)
    add("gap", "nested vs one-shot barycenter gap", mask=True, data=True,
        steps=True, index=True)
    add("approx", "sampled-geodesic approximation bound check", mask=True,
        space=True, levels=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    mode = None
    if args.command == "chain":
        mode = "mc" if args.mc is not None else "exact"
        if args.mc:  # the literal trials=N form
            key, _, value = args.mc.partition("=")
            if key != "trials" or not value.isdigit():
                raise DomainError(f"bad --mc argument {args.mc!r}")
            args.trials = int(value)
    fields = ("mask", "data", "space", "levels", "steps", "trials", "p",
              "start", "index", "cap", "out")
    kwargs = {f: getattr(args, f, None) for f in fields}
    return RunConfig(command=args.command, seed=args.seed,
                     format=args.format, mode=mode, **kwargs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
        text = render_report(report, config.command, config.format)
        if config.out is not None:
            with open(config.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (StructuralError, DomainError, NumericError, ResourceError,
            SolverError, OSError) as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(error, indent=2), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

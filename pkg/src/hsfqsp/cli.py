"""Command-line experiment runner.

Usage::

    hsfqsp SUBCOMMAND [--config PATH] [--set key=value ...] [--out PATH]

Subcommands: fragment, response, transition, compare, stroboscopic, ensemble.
Exit codes: 0 success, 2 config error, 3 capacity error, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import ast
import csv
import hashlib
import io
import json
import math
import operator
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .bdg import (
    correlation_from_pattern,
    evolve_correlation,
    neel_transition_probability,
    sectors,
    sigma_z_from_correlation,
    single_particle_unitary,
)
from .evolve import (
    DENSE_DIM,
    DimensionTooLarge,
    apply_drive,
    drive_operators,
    floquet_unitary,
    return_probability,
    schedule_from_phases,
)
from .fock import Pseudospin, charges, encode_pseudospin, format_pseudospin, parse_pseudospin
from .fragment import (
    DEFAULT_MAX_DIM,
    CapacityError,
    RegionKind,
    build_fragment,
    partition_regions,
    region_strings,
)
from .observables import (
    diagonal_ensemble_profile,
    krylov_profile,
    sigma_z_profile,
    stroboscopic_run,
    time_average,
)
from .qsp import bb1_phases, compose_qsp, trivial_phases

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_VERIFY = 4

COMPARE_PROB_TOL = 1e-10
COMPARE_SIGMA_TOL = 1e-9


class ConfigError(ValueError):
    pass


class VerificationError(RuntimeError):
    def __init__(self, message: str, output: str):
        super().__init__(message)
        self.output = output


DEFAULTS = {
    "seed": "ududududududud",
    "J": "1",
    "h": "1",
    "t_prime": "-pi/2",
    "sequence": "bb1",
    "sequences": "trivial;bb1",
    "cycles": "30",
    "burn_in": "0",
    "grid": "201",
    "axis": "x",
    "response_mode": "dense",
    "dense_dim": str(DENSE_DIM),
    "max_dim": str(DEFAULT_MAX_DIM),
    "diag_ensemble": "auto",
    "workers": "1",
}
# keys that never change results and stay out of the config hash
_EXECUTION_KEYS = {"out", "workers"}
_OPTIONAL_KEYS = {"L", "N", "seeds", "out"}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def parse_number(text: str) -> float:
    """Arithmetic expression over numbers and ``pi`` (e.g. ``-pi/2``)."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"cannot parse number {text!r}") from None


def parse_phases(text: str) -> np.ndarray:
    name = text.strip().lower()
    if name == "trivial":
        return trivial_phases()
    if name == "bb1":
        return bb1_phases()
    items = [t for t in name.strip("[]()").replace(" ", ",").split(",") if t]
    if not items:
        raise ValueError(f"empty phase sequence {text!r}")
    return np.array([parse_number(t) for t in items])


def read_config_text(text: str, source: str = "<config>", origins: dict | None = None) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    ``origins`` (if given) records ``source:line`` per key for later
    diagnostics.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key not in DEFAULTS and key not in _OPTIONAL_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
        if origins is not None:
            origins[key] = f"{source}:{lineno}"
    return out


@dataclass
class ExperimentConfig:
    raw: dict[str, str]
    seed: tuple[Pseudospin, ...]
    seeds: list[tuple[Pseudospin, ...]]
    N: int
    J: float
    h: float
    t_prime: float
    phases: np.ndarray
    sequences: list[tuple[str, np.ndarray]]
    cycles: int
    burn_in: int
    grid: int
    axis: str
    response_mode: str
    dense_dim: int
    max_dim: int
    diag_ensemble: str
    workers: int
    out: str | None

    @property
    def L(self) -> int:
        return 2 * len(self.seed)

    def schedule(self):
        return schedule_from_phases(self.phases, self.J, self.h, self.t_prime)

    def canonical(self) -> str:
        return "".join(f"{k}={self.raw[k]}\n" for k in sorted(self.raw) if k not in _EXECUTION_KEYS)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def load_config(path: str | None = None, overrides: list[str] = (), out: str | None = None) -> ExperimentConfig:
    raw = dict(DEFAULTS)
    origins: dict[str, str] = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        raw.update(read_config_text(text, path, origins))
    for k, item in enumerate(overrides, start=1):
        raw.update(read_config_text(item, f"--set #{k}", origins))
    if out is not None:
        raw["out"] = out
    return resolve_config(raw, origins)


def resolve_config(raw: dict[str, str], origins: dict[str, str] | None = None) -> ExperimentConfig:
    origins = origins or {}

    def where(key):
        return f"{origins[key]}: " if key in origins else ""

    def field(key, conv):
        try:
            return conv(raw[key])
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{where(key)}bad value for {key!r}: {exc}") from None

    def count(text):
        v = int(text)
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    seed = field("seed", parse_pseudospin)
    if not seed:
        raise ConfigError("seed must be non-empty")
    if "seeds" in raw:
        try:
            seeds = [parse_pseudospin(s) for s in raw["seeds"].split(";") if s.strip()]
        except ValueError as exc:
            raise ConfigError(f"{where('seeds')}bad value for 'seeds': {exc}") from None
    else:
        seeds = [seed]
    if "L" in raw and field("L", int) != 2 * len(seed):
        raise ConfigError(
            f"{where('L')}L={raw['L']} does not match seed of {len(seed)} pseudospins (L = {2 * len(seed)})"
        )
    N = field("N", int) if "N" in raw else len(seed)

    sequences = []
    for name in (s.strip() for s in raw["sequences"].split(";")):
        if name:
            try:
                sequences.append((name, parse_phases(name)))
            except ValueError as exc:
                raise ConfigError(f"{where('sequences')}bad value for 'sequences': {exc}") from None

    axis = raw["axis"].strip()
    if axis not in ("x", "a"):
        raise ConfigError(f"{where('axis')}axis must be 'x' or 'a', got {axis!r}")
    mode = raw["response_mode"].strip()
    if mode not in ("dense", "sectors"):
        raise ConfigError(
            f"{where('response_mode')}response_mode must be 'dense' or 'sectors', got {mode!r}"
        )
    diag = raw["diag_ensemble"].strip()
    if diag not in ("auto", "on", "off"):
        raise ConfigError(f"{where('diag_ensemble')}diag_ensemble must be auto/on/off, got {diag!r}")

    h = field("h", parse_number)
    if h == 0:
        raise ConfigError(f"{where('h')}h must be nonzero")
    return ExperimentConfig(
        raw=raw,
        seed=seed,
        seeds=seeds,
        N=N,
        J=field("J", parse_number),
        h=h,
        t_prime=field("t_prime", parse_number),
        phases=field("sequence", parse_phases),
        sequences=sequences,
        cycles=field("cycles", count),
        burn_in=field("burn_in", count),
        grid=field("grid", count),
        axis=axis,
        response_mode=mode,
        dense_dim=field("dense_dim", count),
        max_dim=field("max_dim", count),
        diag_ensemble=diag,
        workers=max(1, field("workers", int)),
        out=raw.get("out"),
    )


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else repr(float(x))
    return str(x)


def write_csv(command: str, cfg: ExperimentConfig, header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# hsfqsp {__version__}\n")
    buf.write(f"# command {command}\n")
    buf.write(f"# config_sha256 {cfg.digest()}\n")
    for line in cfg.canonical().splitlines():
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------- fragment


def _census_row(args):
    symbols, max_dim = args
    basis = build_fragment(encode_pseudospin(symbols), max_dim)
    q = charges(basis.state(0))
    kinds = "|".join(f"{r.start}-{r.stop}:{r.kind.value}" for r in partition_regions(symbols))
    return (format_pseudospin(symbols), basis.dim, q.n_tot, q.c_com, q.n_even, q.n_odd, kinds)


def run_fragment(cfg: ExperimentConfig) -> str:
    jobs = [(s, cfg.max_dim) for s in cfg.seeds]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_census_row, jobs))
    else:
        rows = [_census_row(j) for j in jobs]
    header = ["seed", "dimension", "n_tot", "c_com", "n_even", "n_odd", "classification"]
    return write_csv("fragment", cfg, header, rows)


# ---------------------------------------------------------------- response


def _qsp_columns(sequences, a):
    row = []
    for _, phases in sequences:
        u = compose_qsp(phases, a)
        row += [abs(u[0, 0]) ** 2, abs(u[0, 1]) ** 2]
    return row


def run_response(cfg: ExperimentConfig) -> str:
    names = [n for n, _ in cfg.sequences]
    cols = [c for n in names for c in (f"P2_{n}", f"Q2_{n}")]
    rows = []
    if cfg.response_mode == "sectors":
        header = ["lambda", "x", "a"] + cols
        for s in sectors(cfg.N, cfg.J, cfg.t_prime):
            rows.append([s.index, s.momentum, s.signal] + _qsp_columns(cfg.sequences, s.signal))
    elif cfg.axis == "x":
        header = ["x", "a"] + cols
        for x in np.linspace(0.0, np.pi, cfg.grid):
            a = float(np.clip(np.cos(2 * cfg.J * cfg.t_prime * np.cos(x)), -1.0, 1.0))
            rows.append([x, a] + _qsp_columns(cfg.sequences, a))
    else:
        header = ["a"] + cols
        for a in np.linspace(-1.0, 1.0, cfg.grid):
            rows.append([a] + _qsp_columns(cfg.sequences, a))
    return write_csv("response", cfg, header, rows)


# ---------------------------------------------------------------- transition


def run_transition(cfg: ExperimentConfig) -> str:
    try:
        secs = sectors(cfg.N, cfg.J, cfg.t_prime)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = []
    cumulative = 1.0
    for s in secs:
        p2 = abs(compose_qsp(cfg.phases, s.signal)[0, 0]) ** 2
        cumulative *= p2
        rows.append([s.index, s.momentum, s.signal, p2, cumulative])
    return write_csv("transition", cfg, ["lambda", "x", "a", "P2", "cumulative"], rows)


# ---------------------------------------------------------------- compare


def _neel_like(symbols) -> bool:
    return all(a != b for a, b in zip(symbols, symbols[1:])) and len(symbols) % 2 == 0


def compare_report(cfg: ExperimentConfig) -> dict:
    """ED versus free-fermion predictions for a seed built from Neel regions."""
    symbols = cfg.seed
    regions = partition_regions(symbols)
    active = [r for r in regions if r.kind is not RegionKind.FROZEN_WALL]
    texts = region_strings(symbols, active)
    for r, text in zip(active, texts):
        if r.kind is not RegionKind.INTEGRABLE:
            raise ConfigError(
                f"seed {format_pseudospin(symbols)!r}: region {r.start}-{r.stop} ({text!r}) contains fractons; "
                "no analytic free-fermion reference exists for nonintegrable sectors"
            )
        if not _neel_like(parse_pseudospin(text)):
            raise ConfigError(
                f"region {r.start}-{r.stop} ({text!r}) is not an even-length alternating u/d pattern; "
                "the product formula covers Neel-type regions only"
            )

    schedule = cfg.schedule()
    ed_prob = return_probability(encode_pseudospin(symbols), schedule, max_dim=cfg.max_dim)
    analytic = 1.0
    for text in texts:
        analytic *= neel_transition_probability(len(text), cfg.phases, cfg.J, cfg.t_prime)

    # stroboscopic sigma^z: ED on the full fragment, correlation matrices per region
    basis = build_fragment(encode_pseudospin(symbols), cfg.max_dim)
    ops = drive_operators(basis)
    v = basis.basis_vector(encode_pseudospin(symbols).bits)
    corr = []
    for r, text in zip(active, texts):
        u = single_particle_unitary(schedule, len(text), offset=r.start - 1)
        corr.append((r, u, correlation_from_pattern(text)))
    max_err = 0.0
    for _ in range(cfg.cycles):
        v = apply_drive(schedule, basis, v, ops, cfg.dense_dim)
        ed = sigma_z_profile(v, basis)
        pred = np.zeros(len(symbols))
        for k, (r, u, C) in enumerate(corr):
            C = evolve_correlation(C, u)
            corr[k] = (r, u, C)
            pred[r.start - 1 : r.stop] = sigma_z_from_correlation(C)
        max_err = max(max_err, float(np.max(np.abs(ed - pred))))

    diff = abs(ed_prob - analytic)
    return {
        "version": __version__,
        "config_sha256": cfg.digest(),
        "seed": format_pseudospin(symbols),
        "regions": [f"{r.start}-{r.stop}" for r in active],
        "fragment_dim": basis.dim,
        "ed_transition_probability": ed_prob,
        "analytic_transition_probability": analytic,
        "abs_difference": diff,
        "sigma_z_cycles": cfg.cycles,
        "sigma_z_max_abs_error": max_err,
        "passed": bool(diff < COMPARE_PROB_TOL and max_err < COMPARE_SIGMA_TOL),
    }


def run_compare(cfg: ExperimentConfig) -> str:
    report = compare_report(cfg)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if not report["passed"]:
        raise VerificationError(
            f"ED and analytic results disagree (prob diff {report['abs_difference']:.3e}, "
            f"sigma^z error {report['sigma_z_max_abs_error']:.3e})",
            text,
        )
    return text


# ---------------------------------------------------------------- thermalization


@dataclass
class ThermalizationResult:
    record: object
    final: np.ndarray
    time_avg: np.ndarray
    diag_ensemble: np.ndarray | None
    krylov: np.ndarray
    dim: int


def run_thermalization(cfg: ExperimentConfig) -> ThermalizationResult:
    seed = encode_pseudospin(cfg.seed)
    basis = build_fragment(seed, cfg.max_dim)
    ops = drive_operators(basis)
    schedule = cfg.schedule()
    record = stroboscopic_run(seed, schedule, cfg.cycles, basis=basis, operators=ops, dense_dim=cfg.dense_dim)
    if cfg.cycles and cfg.burn_in >= cfg.cycles:
        raise ConfigError(f"burn_in {cfg.burn_in} must be below cycles {cfg.cycles}")
    diag = None
    if cfg.diag_ensemble != "off":
        try:
            U = floquet_unitary(schedule, basis, ops, cfg.dense_dim)
            diag = diagonal_ensemble_profile(U, basis.basis_vector(seed.bits), basis)
        except DimensionTooLarge:
            if cfg.diag_ensemble == "on":
                raise CapacityError(basis.dim, cfg.dense_dim) from None
    return ThermalizationResult(
        record, record.final, time_average(record, cfg.burn_in), diag, krylov_profile(basis), basis.dim
    )


def run_stroboscopic(cfg: ExperimentConfig) -> str:
    seed = encode_pseudospin(cfg.seed)
    basis = build_fragment(seed, cfg.max_dim)
    record = stroboscopic_run(seed, cfg.schedule(), cfg.cycles, basis=basis, dense_dim=cfg.dense_dim)
    return write_csv("stroboscopic", cfg, ["l", "m", "sigma_z"], record.rows())


def run_ensemble(cfg: ExperimentConfig) -> str:
    res = run_thermalization(cfg)
    rows = []
    for m in range(len(cfg.seed)):
        diag = res.diag_ensemble[m] if res.diag_ensemble is not None else float("nan")
        rows.append([m + 1, res.final[m], res.time_avg[m], diag, res.krylov[m]])
    return write_csv("ensemble", cfg, ["m", "final", "time_avg", "diag_ensemble", "krylov_avg"], rows)


COMMANDS: dict[str, Callable[[ExperimentConfig], str]] = {
    "fragment": run_fragment,
    "response": run_response,
    "transition": run_transition,
    "compare": run_compare,
    "stroboscopic": run_stroboscopic,
    "ensemble": run_ensemble,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsfqsp", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides")
    parser.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides, args.out)
        text = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"hsfqsp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"hsfqsp: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except VerificationError as exc:
        _emit(exc.output, args.out)
        print(f"hsfqsp: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    _emit(text, cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

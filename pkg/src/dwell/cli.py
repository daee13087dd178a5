"""Experiment runner: parameter sweeps emitted as plot-ready tables.

Each experiment writes one CSV (or JSON) file per figure panel into the
output directory.  CSV files start with '#'-prefixed metadata lines (the
timestamp line is informational; the data section is byte-reproducible
for a fixed config), then a header row and the data rows.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

import dwell
from dwell.basis import sector_basis
from dwell.dynamics import QuenchSpec, quench_evolve, quenched_open_run
from dwell.entanglement import (
    bec_negativity_closed_form,
    eof_bound,
    negativity_pair,
)
from dwell.operators import ModelParams, hamiltonian
from dwell.spectral import DensityMatrix, gibbs_state, ground_state

EXPERIMENTS = ("thermal", "bec-scaling", "quench", "dephasing", "loss", "eof")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class ConfigError(Exception):
    """Invalid experiment configuration; message names the offending key."""


@dataclass
class ExperimentConfig:
    experiment: str = ""
    n: list = field(default_factory=list)
    beta: list = field(default_factory=lambda: [0.0, 1.0, 2.0, 5.0, 10.0])
    j_over_u: list = field(default_factory=list)
    gamma: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    j0: float = None
    u0: float = None
    je: float = None
    ue: float = None
    t_max: float = None
    samples: int = 401
    mode: str = "ground"
    method: str = "exact"
    n_as_dimension: bool = False
    seed: int = 0
    out: str = "dwell_out"
    format: str = "csv"


_DEFAULT_GRIDS = {
    "thermal": dict(n=[1, 2, 3, 4, 5], j_over_u=list(np.linspace(0, 20, 41))),
    "bec-scaling": dict(n=list(range(1, 101))),
    "quench": dict(n=[1, 2, 3, 4, 5], j0=0.1, u0=1.0, je=1.0, ue=1.0,
                   t_max=50.0, samples=1001),
    "dephasing": dict(n=[1, 2, 3, 4, 5], j0=0.1, u0=1.0, je=1.0, ue=1.0),
    "loss": dict(n=[1, 2, 3, 4, 5], j0=1.0, u0=1.0, je=0.1, ue=1.0),
    "eof": dict(n=[1, 5, 20, 100], j_over_u=list(np.linspace(0, 4, 81))),
}


def build_config(experiment: str, file_cfg: dict, overrides: dict) -> ExperimentConfig:
    """Merge defaults <- config file <- command-line overrides."""
    cfg = ExperimentConfig(experiment=experiment)
    for key, val in _DEFAULT_GRIDS.get(experiment, {}).items():
        setattr(cfg, key, val)
    known = {f.name for f in fields(ExperimentConfig)}
    for source, name in ((file_cfg, "config file"), (overrides, "command line")):
        for key, val in source.items():
            if key not in known:
                raise ConfigError(f"{name}: unknown key {key!r}")
            if val is not None:
                setattr(cfg, key, val)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: {cfg.experiment!r} not one of {EXPERIMENTS}")
    if not cfg.n:
        raise ConfigError("n: particle-number list must be non-empty")
    for i, n in enumerate(cfg.n):
        if int(n) != n or n < 1:
            raise ConfigError(f"n[{i}]: {n!r} is not a positive integer")
    if cfg.experiment == "thermal":
        if not cfg.beta:
            raise ConfigError("beta: grid must be non-empty")
        if any(b < 0 for b in cfg.beta):
            raise ConfigError("beta: inverse temperatures must be >= 0")
    if cfg.experiment in ("thermal", "eof") and not cfg.j_over_u:
        raise ConfigError("j_over_u: grid must be non-empty")
    if cfg.experiment == "bec-scaling" and len(cfg.n) < 5:
        raise ConfigError("n: bec-scaling needs at least 5 particle numbers")
    if cfg.experiment in ("dephasing", "loss"):
        if not cfg.gamma:
            raise ConfigError("gamma: grid must be non-empty")
        if any(g <= 0 for g in cfg.gamma):
            raise ConfigError("gamma: rates must be positive")
        if cfg.mode not in ("ground", "quench"):
            raise ConfigError(f"mode: {cfg.mode!r} not 'ground' or 'quench'")
        if cfg.method not in ("exact", "rk4"):
            raise ConfigError(f"method: {cfg.method!r} not 'exact' or 'rk4'")
    if cfg.experiment in ("quench", "dephasing", "loss"):
        if cfg.t_max is not None and cfg.t_max <= 0:
            raise ConfigError("t_max: must be positive")
        if cfg.samples < 2:
            raise ConfigError("samples: need at least two")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format: {cfg.format!r} not 'csv' or 'json'")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _config_echo(cfg: ExperimentConfig) -> str:
    return json.dumps(
        {f.name: getattr(cfg, f.name) for f in fields(ExperimentConfig)},
        sort_keys=True,
        default=float,
    )


def write_table(path: Path, cfg: ExperimentConfig, columns, rows, extra_meta=None):
    """Write one panel; rows are tuples matching the column order."""
    meta = {
        "tool": "dwell",
        "version": dwell.__version__,
        "experiment": cfg.experiment,
        "config": _config_echo(cfg),
    }
    meta.update(extra_meta or {})
    timestamp = datetime.now(timezone.utc).isoformat()
    if cfg.format == "csv":
        lines = [f"# {k}: {_fmt(v)}" for k, v in meta.items()]
        lines.append(f"# generated: {timestamp}")
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
    else:
        meta["generated"] = timestamp
        payload = {
            "meta": meta,
            "rows": [dict(zip(columns, row)) for row in rows],
        }
        path.write_text(json.dumps(payload, indent=1, default=float) + "\n")


def run_thermal(cfg: ExperimentConfig, outdir: Path) -> list:
    rows = []
    for n in sorted(int(v) for v in cfg.n):
        basis = sector_basis(n)
        asymptote = bec_negativity_closed_form(n)
        for beta in sorted(cfg.beta):
            for j in sorted(cfg.j_over_u):
                rho = gibbs_state(hamiltonian(basis, ModelParams(j, 1.0)), beta)
                neg = negativity_pair(rho).value
                rows.append((n, float(beta), float(j), neg, asymptote))
    path = outdir / f"thermal.{cfg.format}"
    write_table(path, cfg, ("n", "beta", "j_over_u", "negativity", "bec_asymptote"), rows)
    return [path]


def fit_power_law(ns, values):
    """Slope of log negativity vs log N, weighted by the value.

    The weighting keeps the fit anchored to the large-N trend; an
    unweighted fit over-counts the strongly curved small-N points.
    """
    logs = np.log(np.asarray(ns, dtype=float))
    logv = np.log(np.asarray(values, dtype=float))
    coeffs, residuals, *_ = np.polyfit(logs, logv, 1, w=np.asarray(values), full=True)
    residual = float(residuals[0]) if len(residuals) else 0.0
    return float(coeffs[0]), residual


def run_bec_scaling(cfg: ExperimentConfig, outdir: Path) -> list:
    ns = sorted(int(v) for v in cfg.n)
    values = [bec_negativity_closed_form(n) for n in ns]
    alpha, residual = fit_power_law(ns, values)
    rows = list(zip(ns, values))
    path = outdir / f"bec_scaling.{cfg.format}"
    write_table(
        path, cfg, ("n", "bec_negativity"), rows,
        extra_meta={"fit_alpha": alpha, "fit_residual": residual},
    )
    return [path]


def run_quench(cfg: ExperimentConfig, outdir: Path) -> list:
    paths = []
    for n in sorted(int(v) for v in cfg.n):
        spec = QuenchSpec(cfg.j0, cfg.u0, cfg.je, cfg.ue, cfg.t_max, cfg.samples)
        ts = quench_evolve(spec, n)
        basis = sector_basis(n)
        gs_e, _ = ground_state(hamiltonian(basis, ModelParams(cfg.je, cfg.ue)))
        gs_neg = negativity_pair(DensityMatrix.from_pure(basis, gs_e)).value
        rows = [
            (t, ne, na, en, gs_neg)
            for t, ne, na, en in zip(
                ts.times,
                ts.channel("negativity"),
                ts.channel("negativity_avg"),
                ts.channel("energy"),
            )
        ]
        path = outdir / f"quench_N{n}.{cfg.format}"
        write_table(
            path, cfg,
            ("time", "negativity", "negativity_avg", "energy", "gs_negativity_ref"),
            rows,
        )
        paths.append(path)
    return paths


def run_dissipative(cfg: ExperimentConfig, outdir: Path) -> list:
    channel = cfg.experiment
    paths = []
    for n in sorted(int(v) for v in cfg.n):
        for gamma in sorted(cfg.gamma):
            t_max = cfg.t_max if cfg.t_max is not None else 20.0 / gamma
            if cfg.mode == "ground":
                spec = QuenchSpec(cfg.je, cfg.ue, cfg.je, cfg.ue, t_max, cfg.samples)
            else:
                spec = QuenchSpec(cfg.j0, cfg.u0, cfg.je, cfg.ue, t_max, cfg.samples)
            ts = quenched_open_run(spec, channel, gamma, n, method=cfg.method)
            names = ["negativity", "negativity_avg", "energy", "trace", "purity"]
            if channel == "loss":
                names.append("particle_number")
                names.extend(f"pop_N{m}" for m in range(n, -1, -1))
                names.extend(f"neg_N{m}" for m in range(n, -1, -1))
            columns = ["time"] + names
            data = [ts.times] + [ts.channel(name) for name in names]
            rows = list(zip(*data))
            tag = _fmt(float(gamma)).replace(".", "p")
            path = outdir / f"{channel}_N{n}_gamma{tag}.{cfg.format}"
            write_table(path, cfg, columns, rows)
            paths.append(path)
    return paths


def run_eof(cfg: ExperimentConfig, outdir: Path) -> list:
    rows = []
    for n in sorted(int(v) for v in cfg.n):
        basis = sector_basis(n)
        for j in sorted(cfg.j_over_u):
            psi, _ = ground_state(hamiltonian(basis, ModelParams(j, 1.0)))
            rho = DensityMatrix.from_pure(basis, psi)
            neg = negativity_pair(rho).value
            report = eof_bound(rho, n_as_dimension=cfg.n_as_dimension)
            rows.append(
                (n, float(j), neg, report.F, report.G, report.s, report.bound)
            )
    path = outdir / f"eof.{cfg.format}"
    write_table(
        path, cfg, ("n", "j_over_u", "negativity", "F", "G", "s", "bound"), rows
    )
    return [path]


_RUNNERS = {
    "thermal": run_thermal,
    "bec-scaling": run_bec_scaling,
    "quench": run_quench,
    "dephasing": run_dissipative,
    "loss": run_dissipative,
    "eof": run_eof,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dwell",
        description="Two-well Bose-Hubbard entanglement experiments",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--n", type=int, nargs="+", help="particle numbers")
    parser.add_argument("--beta", type=float, nargs="+", help="inverse temperatures")
    parser.add_argument("--j-over-u", dest="j_over_u", type=float, nargs="+")
    parser.add_argument("--gamma", type=float, nargs="+", help="dissipation rates")
    parser.add_argument("--j0", type=float, help="pre-quench hopping")
    parser.add_argument("--u0", type=float, help="pre-quench interaction")
    parser.add_argument("--je", type=float, help="evolution hopping")
    parser.add_argument("--ue", type=float, help="evolution interaction")
    parser.add_argument("--t-max", dest="t_max", type=float)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--mode", choices=("ground", "quench"))
    parser.add_argument("--method", choices=("exact", "rk4"))
    parser.add_argument("--n-as-dimension", dest="n_as_dimension",
                        action="store_const", const=True)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_cfg = {}
        if args.config:
            try:
                file_cfg = json.loads(Path(args.config).read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
                )
            if not isinstance(file_cfg, dict):
                raise ConfigError(f"{args.config}: top level must be a JSON object")
            file_cfg.pop("experiment", None)
        overrides = {
            k: v for k, v in vars(args).items()
            if k not in ("experiment", "config") and v is not None
        }
        cfg = build_config(args.experiment, file_cfg, overrides)
    except ConfigError as exc:
        print(f"dwell: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        outdir = Path(cfg.out)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = _RUNNERS[cfg.experiment](cfg, outdir)
    except OSError as exc:
        print(f"dwell: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"dwell: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

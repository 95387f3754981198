"""Command-line interface.

Every command reads its parameters from flags and, optionally, from a
``--config`` file of ``key = value`` lines; flags win. A previous JSON or CSV
output can serve as the config file, since each output embeds the resolved
parameters that produced it.

Exit codes: 0 success, 2 usage, 3 solver failure (also for a scan with failed
rows, which is still written), 4 not an engine, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import UNITS, __version__
from .bethe import GasSpec, enumerate_states
from .cycle import (
    MATCH_RTOL,
    TbaCycleSpec,
    _solve_cycle,
    default_threads,
    density_scan,
    phase_map,
)
from .errors import EngineError
from .gibbs import CycleSpec, gibbs_ensemble, run_finite_cycle, strong_coupling_efficiency
from .luttinger import (
    anyon_effective_coupling,
    optimal_xi,
    optimal_xi_small_kappa,
    sound_velocity_tba,
    spinor_effective_coupling,
    tll_efficiency,
    tll_work,
    TllParams,
)
from .tba import GridConfig, thermo_state

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_NOT_ENGINE, EXIT_IO = 0, 2, 3, 4, 5

REQUIRED = object()


@dataclass(frozen=True)
class Param:
    name: str
    type: Callable[[Any], Any]
    default: Any = REQUIRED
    help: str = ""
    choices: Optional[tuple] = None

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


def _positive_int(v):
    i = int(v)
    if i < 1:
        raise ValueError(f"expected a positive integer, got {v!r}")
    return i


_GRID = [
    Param("nodes_per_panel", _positive_int, 16, "Gauss-Legendre nodes per panel"),
    Param("tol", float, 1e-12, "dressed-energy Newton tolerance"),
    Param("quad_tol", float, 1e-13, "adaptive quadrature tolerance"),
]
_FINITE = [
    Param("particles", _positive_int, help="particle number N"),
    Param("length", float, 1.0, "box length L"),
]
_FINITE_TOL = [
    Param("cutoff", float, 1e-8, "relative Boltzmann-weight cutoff"),
    Param("tol", float, 1e-12, "Bethe-equation residual tolerance"),
]
_CYCLE = [
    Param("ca", float, help="coupling c_A on the cold isochore"),
    Param("cb", float, help="coupling c_B on the hot isochore"),
    Param("ta", float, help="cold reservoir temperature T_A"),
    Param("tc", float, help="hot reservoir temperature T_C"),
]

COMMANDS: dict[str, tuple[str, list[Param], str]] = {
    "spectrum": (
        "Bethe eigenstates of N bosons in a box with Gibbs weights",
        _FINITE + [
            Param("c", float, help="coupling"),
            Param("t", float, help="temperature"),
        ] + _FINITE_TOL + [Param("max_states", _positive_int, 1_000_000, "enumeration cap")],
        "csv",
    ),
    "finite-cycle": ("Interaction-driven cycle for N bosons in a box", _FINITE + _CYCLE + _FINITE_TOL, "json"),
    "tba": (
        "Yang-Yang thermodynamics at one (c, mu, T) point",
        [Param("c", float, help="coupling"), Param("mu", float, help="chemical potential"),
         Param("t", float, help="temperature")] + _GRID,
        "json",
    ),
    "tba-cycle": (
        "Cycle of the infinite gas at fixed density",
        _CYCLE + [Param("density", float, help="density n"), Param("length", float, 1.0, "length L")] + _GRID,
        "json",
    ),
    "density-scan": (
        "Efficiency and work per particle over a density grid",
        _CYCLE + [
            Param("n_min", float, help="smallest density"),
            Param("n_max", float, help="largest density"),
            Param("n_count", _positive_int, help="number of densities"),
            Param("spacing", str, "linear", "density spacing", ("linear", "log")),
            Param("length", float, 1.0, "length L"),
        ] + _GRID,
        "csv",
    ),
    "phase-map": (
        "Specific heat at fixed density on a (mu, T) grid",
        [
            Param("c", float, help="coupling"),
            Param("mu_min", float), Param("mu_max", float), Param("mu_count", _positive_int),
            Param("t_min", float), Param("t_max", float), Param("t_count", _positive_int),
        ] + _GRID,
        "csv",
    ),
    "tll": (
        "Luttinger-liquid efficiency, work and optimal velocity ratio",
        [
            Param("kappa", float, help="T_A / T_C"),
            Param("v_s_a", float, None, "sound velocity at c_A"),
            Param("v_s_b", float, None, "sound velocity at c_B"),
            Param("density", float, None, "density; with --ca/--cb, velocities come from the TBA"),
            Param("ca", float, None, "coupling c_A"),
            Param("cb", float, None, "coupling c_B"),
            Param("tc", float, 1.0, "hot reservoir temperature T_C"),
            Param("length", float, 1.0, "length L"),
        ],
        "json",
    ),
    "coupling-map": (
        "Effective Lieb-Liniger coupling of anyonic or spinor gases",
        [
            Param("kind", str, help="mapping", choices=("anyon", "spinor")),
            Param("c_tilde", float, None, "anyon coupling"),
            Param("theta", float, None, "statistics angle in [0, pi)"),
            Param("c_o", float, None, "odd-channel coupling"),
            Param("c_e", float, None, "even-channel coupling"),
            Param("spin_corr", float, None, "<S_i . S_j> in [-3/4, 1/4]"),
        ],
        "json",
    ),
}

CSV_COLUMNS = {
    "spectrum": ("index", "quantum_numbers", "energy", "weight"),
    "density-scan": ("n", "eta", "work_per_particle"),
    "phase-map": ("mu", "T", "specific_heat", "density", "entropy_density"),
}


@dataclass
class RunConfig:
    command: str
    parameters: dict
    output_path: Optional[str] = None
    format: str = "json"
    threads: int = 1


@dataclass
class Outcome:
    """What a command produced: a result mapping or a table, plus its exit code."""

    result: Optional[dict] = None
    rows: Optional[list] = None
    notes: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK


class UsageError(Exception):
    pass


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="idqhe",
        description="Interaction-driven quantum heat engine with a Lieb-Liniger working medium "
                    f"(units {UNITS}).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    subparsers = {}
    for name, (help_text, params, default_format) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        for prm in params:
            default = "required" if prm.default is REQUIRED else prm.default
            p.add_argument(prm.flag, dest=prm.name, default=None, choices=prm.choices,
                           help=f"{prm.help} (default: {default})".strip())
        p.add_argument("--config", help="key = value file, or a previous output of this command")
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help=f"output format (default: {default_format})")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for scans (default: $IDQHE_THREADS or 1)")
        subparsers[name] = p
    return parser, subparsers


def load_config(path: str) -> tuple[Optional[str], dict]:
    """Read ``key = value`` pairs from a config file or a previous output.

    Returns the command recorded in the file (or None) and the raw values.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return data.get("command"), {k: v for k, v in data.get("parameters", {}).items() if v is not None}
    lines = text.splitlines()
    from_output = any(line.startswith("# param ") for line in lines)
    command = None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if from_output:
            if line.startswith("# command = "):
                command = line.split("=", 1)[1].strip()
            if not line.startswith("# param "):
                continue
            line = line[len("# param "):]
        elif not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "command":
            command = value
            continue
        values[key] = value
    return command, values


def parse_config(argv: Optional[list] = None) -> RunConfig:
    """Resolve flags, config file and defaults into a RunConfig.

    Usage problems exit through argparse with status 2 and a message naming
    the offending parameter.
    """
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    name = args.command
    sub = subparsers[name]
    _, params, default_format = COMMANDS[name]
    known = {p.name: p for p in params}
    file_values = {}
    if args.config:
        try:
            file_command, file_values = load_config(args.config)
        except (OSError, ValueError, UsageError) as exc:
            sub.error(f"cannot read config {args.config}: {exc}")
        if file_command is not None and file_command != name:
            sub.error(f"config {args.config} is for command {file_command!r}, not {name!r}")
        unknown = sorted(set(file_values) - set(known))
        if unknown:
            sub.error(f"unknown config key(s) for {name}: {', '.join(unknown)}")
    resolved = {}
    for prm in params:
        raw = getattr(args, prm.name)
        if raw is None:
            raw = file_values.get(prm.name)
        if raw is None:
            if prm.default is REQUIRED:
                sub.error(f"missing required parameter {prm.flag}")
            resolved[prm.name] = prm.default
            continue
        try:
            value = prm.type(raw)
        except (TypeError, ValueError):
            sub.error(f"invalid value for {prm.flag}: {raw!r}")
        if prm.choices and value not in prm.choices:
            sub.error(f"{prm.flag} must be one of {', '.join(prm.choices)}")
        resolved[prm.name] = value
    fmt = args.format or default_format
    if fmt == "csv" and name not in CSV_COLUMNS:
        sub.error(f"{name} produces a single record; use --format json")
    try:
        threads = args.threads if args.threads is not None else default_threads()
    except ValueError as exc:
        sub.error(str(exc))
    if threads < 1:
        sub.error("--threads must be >= 1")
    return RunConfig(name, resolved, args.output, fmt, threads)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _grid(p: dict) -> GridConfig:
    return GridConfig(nodes_per_panel=p["nodes_per_panel"], tol=p["tol"], quad_tol=p["quad_tol"])


def _cycle_dict(res) -> dict:
    return {"Q2": res.Q2, "Q4": res.Q4, "W": res.work, "eta": res.efficiency, "T_B": res.T_B, "T_D": res.T_D}


def _run_spectrum(p, cfg):
    gas = GasSpec(p["particles"], p["length"], p["c"])
    states = enumerate_states(gas, p["t"], p["cutoff"], p["tol"], p["max_states"])
    ens = gibbs_ensemble(states, p["t"])
    rows = [
        (i, " ".join(map(str, s.quantum_numbers.values)), s.energy, float(w))
        for i, (s, w) in enumerate(zip(states, ens.probabilities))
    ]
    return Outcome(
        result={"log_partition_function": ens.log_partition_function, "state_count": len(states)},
        rows=rows, tolerances={"bethe_tol": p["tol"], "weight_cutoff": p["cutoff"]},
    )


def _run_finite_cycle(p, cfg):
    gas = GasSpec(p["particles"], p["length"])
    spec = CycleSpec(gas, p["ca"], p["cb"], p["ta"], p["tc"])
    res = run_finite_cycle(spec, p["cutoff"], p["tol"])
    out = _cycle_dict(res)
    out["eta_strong_coupling"] = strong_coupling_efficiency(p["ca"], p["cb"], gas)
    return Outcome(result=out, tolerances={"bethe_tol": p["tol"], "weight_cutoff": p["cutoff"]})


def _run_tba(p, cfg):
    grid = _grid(p)
    st = thermo_state(p["c"], p["mu"], p["t"], grid)
    return Outcome(
        result={
            "pressure": st.pressure,
            "density": st.density,
            "entropy_density": st.entropy_density,
            "energy_density": st.energy_density,
            "specific_heat": st.heat_capacity,
            "dn_dmu": st.dn_dmu,
            "dn_dT": st.dn_dT,
            "ds_dT": st.ds_dT,
        },
        tolerances=grid.as_dict(),
    )


def _tba_tolerances(grid):
    return {**grid.as_dict(), "density_rtol": 1e-13, "entropy_match_rtol": MATCH_RTOL}


def _run_tba_cycle(p, cfg):
    grid = _grid(p)
    spec = TbaCycleSpec(p["ca"], p["cb"], p["ta"], p["tc"], p["density"], p["length"])
    res, corners = _solve_cycle(spec, grid)
    out = _cycle_dict(res)
    out["corners"] = [
        {"label": c.label, "c": c.coupling, "mu": c.chemical_potential, "T": c.temperature,
         "entropy_density": c.entropy_density, "energy_density": c.energy_density}
        for c in corners
    ]
    return Outcome(result=out, tolerances=_tba_tolerances(grid))


def _run_density_scan(p, cfg):
    if not 0 < p["n_min"] <= p["n_max"]:
        raise ValueError("need 0 < n_min <= n_max")
    if p["spacing"] == "log":
        ns = np.geomspace(p["n_min"], p["n_max"], p["n_count"])
    else:
        ns = np.linspace(p["n_min"], p["n_max"], p["n_count"])
    grid = _grid(p)
    rows = density_scan(p["ca"], p["cb"], p["ta"], p["tc"], ns, p["length"], grid, cfg.threads)
    out = Outcome(rows=[(r.density, r.efficiency, r.work_per_particle) for r in rows],
                  tolerances=_tba_tolerances(grid))
    for r in rows:
        if r.error:
            out.notes.append(f"missing row n={r.density!r}: {r.error}")
            out.exit_code = EXIT_SOLVER
    return out


def _run_phase_map(p, cfg):
    mus = np.linspace(p["mu_min"], p["mu_max"], p["mu_count"])
    Ts = np.linspace(p["t_min"], p["t_max"], p["t_count"])
    grid = _grid(p)
    cells = phase_map(p["c"], mus, Ts, grid, cfg.threads)
    out = Outcome(
        rows=[(c.chemical_potential, c.temperature, c.specific_heat, c.density, c.entropy_density) for c in cells],
        tolerances=grid.as_dict(),
    )
    out.notes.append("row order: T outer, mu inner")
    for c in cells:
        if c.error:
            out.notes.append(f"missing cell mu={c.chemical_potential!r} T={c.temperature!r}: {c.error}")
            out.exit_code = EXIT_SOLVER
    return out


def _run_tll(p, cfg):
    kappa = p["kappa"]
    out = {"kappa": kappa, "xi_c": optimal_xi(kappa), "xi_c_small_kappa": optimal_xi_small_kappa(kappa)}
    vA, vB = p["v_s_a"], p["v_s_b"]
    tolerances = {}
    if vA is None and vB is None and None not in (p["density"], p["ca"], p["cb"]):
        vA = sound_velocity_tba(p["density"], p["ca"])
        vB = sound_velocity_tba(p["density"], p["cb"])
        tolerances = {"sound_velocity_rel_step": 1e-4, "sound_velocity_temperature": 1e-4 * p["density"] ** 2}
    elif (vA is None) != (vB is None):
        raise ValueError("give both --v-s-a and --v-s-b, or --density with --ca and --cb")
    if vA is not None:
        prm = TllParams(vA, vB, kappa)
        out.update({
            "v_s_A": vA, "v_s_B": vB, "xi": prm.xi, "is_engine": prm.is_engine,
            "eta": tll_efficiency(prm), "W": tll_work(vB, p["tc"], kappa, prm.xi, p["length"]),
            "W_max": tll_work(vB, p["tc"], kappa, out["xi_c"], p["length"]),
        })
    return Outcome(result=out, tolerances=tolerances)


def _run_coupling_map(p, cfg):
    if p["kind"] == "anyon":
        need = ("c_tilde", "theta")
    else:
        need = ("c_o", "c_e", "spin_corr")
    missing = [n for n in need if p[n] is None]
    if missing:
        raise ValueError("missing required parameter " + ", ".join("--" + n.replace("_", "-") for n in missing))
    if p["kind"] == "anyon":
        c = anyon_effective_coupling(p["c_tilde"], p["theta"])
    else:
        c = spinor_effective_coupling(p["c_o"], p["c_e"], p["spin_corr"])
    return Outcome(result={"kind": p["kind"], "c": c})


RUNNERS = {
    "spectrum": _run_spectrum,
    "finite-cycle": _run_finite_cycle,
    "tba": _run_tba,
    "tba-cycle": _run_tba_cycle,
    "density-scan": _run_density_scan,
    "phase-map": _run_phase_map,
    "tll": _run_tll,
    "coupling-map": _run_coupling_map,
}


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def render_json(cfg: RunConfig, outcome: Outcome) -> str:
    doc = {
        "tool": "idqhe",
        "version": __version__,
        "command": cfg.command,
        "units": UNITS,
        "parameters": cfg.parameters,
        "tolerances": outcome.tolerances,
    }
    if outcome.result is not None:
        doc["result"] = outcome.result
    if outcome.rows is not None:
        doc["columns"] = list(CSV_COLUMNS[cfg.command])
        doc["rows"] = outcome.rows
    if outcome.notes:
        doc["notes"] = outcome.notes
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def _csv_field(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.12g" % v


def render_csv(cfg: RunConfig, outcome: Outcome) -> str:
    lines = [
        f"# tool = idqhe {__version__}",
        f"# command = {cfg.command}",
        f"# units = {UNITS}",
    ]
    lines += [f"# param {k} = {v!r}" if isinstance(v, float) else f"# param {k} = {v}"
              for k, v in cfg.parameters.items() if v is not None]
    lines += [f"# tolerance {k} = {v!r}" for k, v in outcome.tolerances.items()]
    lines += [f"# note {n}" for n in outcome.notes]
    lines.append(",".join(CSV_COLUMNS[cfg.command]))
    lines += [",".join(_csv_field(v) for v in row) for row in outcome.rows]
    return "\n".join(lines) + "\n"


def execute(cfg: RunConfig) -> tuple[str, int]:
    """Run the configured command; returns the serialised output and the exit code."""
    outcome = RUNNERS[cfg.command](cfg.parameters, cfg)
    text = render_csv(cfg, outcome) if cfg.format == "csv" else render_json(cfg, outcome)
    return text, outcome.exit_code


def main(argv: Optional[list] = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if not isinstance(exc.code, str) else EXIT_USAGE
    try:
        text, code = execute(cfg)
    except EngineError as exc:
        print(f"idqhe {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"idqhe {cfg.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"idqhe {cfg.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if code != EXIT_OK:
        print(f"idqhe {cfg.command}: some rows failed; see the notes in the output", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

"""``tsvf-lab`` command line front end.

Commands::

    tsvf-lab scenario three-box --format json
    tsvf-lab counterfactual --world threebox.world --time 5 --obs P_A
    tsvf-lab weak-value --scenario all-plus --obs s_xi
    tsvf-lab pointer --scenario all-plus --obs s_xi --widths 0.01,0.1,1,10,50 --format csv

Exit status is 0 on success, 1 for usage errors and 2 for domain errors
(the error class name is printed on stderr). Output is deterministic: JSON
keys are sorted and every float is written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import scenarios
from .errors import TSVFError
from .pointer import DEFAULT_POINTS, PointerConfig, coupling_sweep, pointer_distribution
from .qcore import SX, SY, SZ, S_XI, HermitianOperator
from .tsvf import oracle_for, weak_value
from .worlds import bracketing_records, bracketing_tsv, counterfactual, load_world

COMMANDS = ("scenario", "counterfactual", "weak-value", "pointer")

_BUILTIN = {
    "P_A": scenarios.box_projector("A"),
    "P_B": scenarios.box_projector("B"),
    "P_C": scenarios.box_projector("C"),
    "s_x": SX,
    "s_y": SY,
    "s_z": SZ,
    "s_xi": S_XI,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    scenario: Optional[str] = None
    world: Optional[str] = None
    time: Optional[int] = None
    obs: Optional[str] = None
    output: Optional[str] = None
    format: str = "json"
    widths: list = field(default_factory=list)
    coupling: float = 1.0
    points: int = DEFAULT_POINTS
    density: bool = False
    shots: Optional[int] = None
    seed: int = 0
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}")
        need = {
            "scenario": ("scenario",),
            "counterfactual": ("world", "time", "obs"),
            "weak-value": ("obs",),
            "pointer": ("scenario", "obs", "widths"),
        }[self.command]
        missing = [n for n in need if getattr(self, n) in (None, [])]
        if missing:
            raise UsageError(f"{self.command}: missing --{', --'.join(missing)}")
        if self.command == "weak-value" and (self.scenario is None) == (self.world is None):
            raise UsageError("weak-value: give exactly one of --scenario or --world")
        if self.command == "weak-value" and self.world is not None and self.time is None:
            raise UsageError("weak-value: --world needs --time")
        if self.density and len(self.widths) != 1:
            raise UsageError("pointer --density needs exactly one width")


def format_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(x, ".17g")


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{dump_json(k)}: {dump_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dump_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return "" if v is None else str(v)


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj, key=str):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}" if prefix else str(i))
    else:
        yield prefix, obj


def _emit(cfg, payload, table=None):
    if cfg.format == "json":
        return dump_json(payload) + "\n"
    if table is None:
        table = (["key", "value"], list(_flatten(payload)))
    return dump_csv(*table)


def _lookup_observable(name, world=None) -> HermitianOperator:
    if world is not None and name in world.observables:
        return world.observables[name]
    if name in _BUILTIN:
        return _BUILTIN[name]
    raise UsageError(f"unknown observable {name!r}")


def _scenario_observable(cfg):
    if cfg.scenario not in ("three-box", "three-box-trivial", "all-plus"):
        raise UsageError(f"scenario {cfg.scenario!r} has no single two-state vector")
    try:
        return scenarios.scenario_observable(cfg.scenario, cfg.obs)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _distribution(dist):
    return {format_float(v): p for v, p in dist.pairs}


def _run_scenario(cfg):
    if cfg.scenario not in scenarios.SCENARIOS:
        raise UsageError(f"unknown scenario {cfg.scenario!r}; choose from {', '.join(scenarios.SCENARIOS)}")
    return _emit(cfg, scenarios.scenario_report(cfg.scenario))


def _run_counterfactual(cfg):
    world = load_world(cfg.world)
    op = _lookup_observable(cfg.obs, world)
    dist = counterfactual(world, cfg.time, op)
    first, last = bracketing_records(world, cfg.time)
    payload = {
        "obs": cfg.obs,
        "time": cfg.time,
        "t1": first.time,
        "t2": last.time,
        "distribution": _distribution(dist),
        "element_of_reality": next((v for v, p in dist.pairs if p >= 1.0 - cfg.tolerance), None),
    }
    if cfg.shots:
        payload["oracle"] = _distribution(oracle_for(bracketing_tsv(world, cfg.time), op, cfg.shots, cfg.seed))
        payload["shots"] = cfg.shots
        payload["seed"] = cfg.seed
    table = (["eigenvalue", "probability"], list(dist.pairs))
    return _emit(cfg, payload, table)


def _run_weak_value(cfg):
    if cfg.world is not None:
        world = load_world(cfg.world)
        tsv = bracketing_tsv(world, cfg.time)
        op = _lookup_observable(cfg.obs, world)
        source = {"world": cfg.world, "time": cfg.time}
    else:
        op = _scenario_observable(cfg)
        tsv = scenarios.scenario_tsv(cfg.scenario)
        source = {"scenario": cfg.scenario}
    w = weak_value(tsv, op)
    payload = {"obs": cfg.obs, "re": w.real, "im": w.imag, **source}
    return _emit(cfg, payload, (["obs", "re", "im"], [(cfg.obs, w.real, w.imag)]))


def _run_pointer(cfg):
    op = _scenario_observable(cfg)
    tsv = scenarios.scenario_tsv(cfg.scenario)
    g = cfg.coupling
    # widths on the command line are in units of |coupling|
    widths = [w * abs(g) for w in cfg.widths]
    if cfg.density:
        d = pointer_distribution(tsv, op, PointerConfig(widths[0], g), n_points=cfg.points)
        payload = {"x": d.x, "density": d.density,
                   "post_selection_probability": d.post_selection_probability}
        return _emit(cfg, payload, (["x", "density"], list(zip(d.x, d.density))))
    entries = coupling_sweep(tsv, op, widths, coupling=g, n_points=cfg.points)
    rows = [tuple(e) for e in entries]
    payload = {
        "scenario": cfg.scenario,
        "obs": cfg.obs,
        "coupling": g,
        "sweep": [{"width": w, "center": c, "post_selection_probability": p} for w, c, p in rows],
    }
    return _emit(cfg, payload, (["width", "center", "psel_prob"], rows))


_HANDLERS = {
    "scenario": _run_scenario,
    "counterfactual": _run_counterfactual,
    "weak-value": _run_weak_value,
    "pointer": _run_pointer,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute ``cfg``; write the artifact to ``cfg.output`` or ``stdout``."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        text = _HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except OSError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except TSVFError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 2
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _widths(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad width list {text!r}") from None
    if not values or any(not (v > 0) for v in values):
        raise argparse.ArgumentTypeError("widths must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsvf-lab", description="Pre- and post-selected quantum systems.",
                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", help="write to this file instead of stdout")

    p = sub.add_parser("scenario", help="report a built-in scenario", allow_abbrev=False)
    p.add_argument("scenario", choices=scenarios.SCENARIOS)
    common(p)

    p = sub.add_parser("counterfactual", help="query a world file", allow_abbrev=False)
    p.add_argument("--world", required=True)
    p.add_argument("--time", type=int, required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--shots", type=int, help="also run the sequential Monte Carlo oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10,
                   help="certainty tolerance for the reported element of reality")
    common(p)

    p = sub.add_parser("weak-value", help="weak value of an observable", allow_abbrev=False)
    p.add_argument("--scenario")
    p.add_argument("--world")
    p.add_argument("--time", type=int)
    p.add_argument("--obs", required=True)
    common(p)

    p = sub.add_parser("pointer", help="von Neumann pointer sweep", allow_abbrev=False)
    p.add_argument("--scenario", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--widths", type=_widths, required=True,
                   help="comma-separated pointer widths in units of the coupling")
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--density", action="store_true",
                   help="emit the (x, density) curve for a single width")
    common(p)
    return parser


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    return RunConfig(**ns)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

"""Measurement-record worlds and time-symmetric counterfactual queries.

A world is the time-ordered list of measurement results on a system. A
counterfactual query asks what an alternative measurement at time ``t``
would have yielded, keeping every other record fixed. When complete
measurements bracket ``t`` with nothing in between, the answer is the ABL
distribution for the pair of states those records fix.

World files are UTF-8, line oriented, with ``#`` comments::

    dim 3
    obs B_pre  -0.1666 0.8333 0.3333  ...   # N*N entries, row-major
    record 0  B_pre  1
    record 10 B_post 1

Complex entries are written ``1.5``, ``2i``, ``0.5+1e-3i`` or ``0.5-2i`` with
no spaces inside a literal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np

from .errors import (
    InterveningRecord,
    NoBracketingCompleteMeasurements,
    NotHermitianError,
    RecordAtQueryTime,
    WorldFileError,
)
from .qcore import HermitianOperator, as_operator, eigenstate, spectral
from .tsvf import OutcomeDistribution, TwoStateVector, abl

OUTCOME_TOL = 1e-8

_FLOAT = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>[+-]?{_FLOAT})$"
    rf"|^(?P<im>[+-]?{_FLOAT})i$"
    rf"|^(?P<re2>[+-]?{_FLOAT})(?P<sign>[+-])(?P<im2>{_FLOAT})i$"
)
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class MeasurementRecord:
    time: int
    obs_name: str
    observable: HermitianOperator
    outcome: float
    complete: bool = field(init=False)

    def __post_init__(self):
        dec = spectral(self.observable)
        if dec.index_of(self.outcome, OUTCOME_TOL) is None:
            raise ValueError(
                f"outcome {self.outcome!r} is not an eigenvalue of {self.obs_name} "
                f"(eigenvalues {np.round(dec.eigenvalues, 12).tolist()})"
            )
        object.__setattr__(self, "complete", all(p.rank == 1 for p in dec.projectors))

    def state(self):
        """The state fixed by this record (complete records only)."""
        if not self.complete:
            raise ValueError(f"record at t={self.time} is not a complete measurement")
        return eigenstate(self.observable, self.outcome, OUTCOME_TOL)


@dataclass(frozen=True)
class World:
    dim: int
    records: tuple
    observables: Mapping[str, HermitianOperator] = field(default_factory=dict)

    def __post_init__(self):
        records = tuple(sorted(self.records, key=lambda r: r.time))
        times = [r.time for r in records]
        if len(set(times)) != len(times):
            raise ValueError("two records share a timestamp")
        for r in records:
            if r.observable.dim != self.dim:
                raise ValueError(f"record at t={r.time} has dim {r.observable.dim}, world dim {self.dim}")
        obs = dict(self.observables)
        for r in records:
            obs.setdefault(r.obs_name, r.observable)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "observables", obs)

    def __eq__(self, other):
        if not isinstance(other, World):
            return NotImplemented
        return (self.dim == other.dim and self.records == other.records
                and self.observables == other.observables)

    def __hash__(self):
        return hash((self.dim, self.records))

    def with_record(self, time, obs_name, outcome, observable=None) -> "World":
        """New world with one extra record; ``observable`` defaults to a declared one."""
        op = as_operator(observable) if observable is not None else self.observables[obs_name]
        rec = MeasurementRecord(int(time), obs_name, op, float(outcome))
        obs = dict(self.observables)
        obs.setdefault(obs_name, op)
        return World(self.dim, self.records + (rec,), obs)


def bracketing_records(world: World, t: int):
    """Complete records immediately before and after ``t``.

    Raises
    ------
    NoBracketingCompleteMeasurements
        If there is no complete record on one side of ``t``.
    InterveningRecord
        If another record lies strictly between the bracketing pair.
    """
    if any(r.time == t for r in world.records):
        raise RecordAtQueryTime(f"a record already exists at t={t}")
    before = [r for r in world.records if r.time < t and r.complete]
    after = [r for r in world.records if r.time > t and r.complete]
    if not before or not after:
        side = "before" if not before else "after"
        raise NoBracketingCompleteMeasurements(f"no complete measurement {side} t={t}")
    first, last = before[-1], after[0]
    between = [r for r in world.records if first.time < r.time < last.time]
    if between:
        times = ", ".join(str(r.time) for r in between)
        raise InterveningRecord(f"records at t={times} lie between t1={first.time} and t2={last.time}")
    return first, last


def bracketing_tsv(world: World, t: int) -> TwoStateVector:
    first, last = bracketing_records(world, t)
    return TwoStateVector(first.state(), last.state())


def counterfactual(world: World, t: int, observable) -> OutcomeDistribution:
    """Distribution of results had ``observable`` been measured at time ``t``."""
    return abl(bracketing_tsv(world, t), as_operator(observable))


def parse_complex(token: str) -> complex:
    m = _COMPLEX_RE.match(token)
    if m is None:
        raise ValueError(f"bad complex literal {token!r}")
    if m.group("re") is not None:
        return complex(float(m.group("re")), 0.0)
    if m.group("im") is not None:
        return complex(0.0, float(m.group("im")))
    im = float(m.group("im2"))
    return complex(float(m.group("re2")), -im if m.group("sign") == "-" else im)


def format_complex(z: complex) -> str:
    re_, im = float(np.real(z)), float(np.imag(z))
    if im == 0.0:
        return repr(re_)
    sign = "-" if np.signbit(im) else "+"
    return f"{re_!r}{sign}{abs(im)!r}i"


def parse_world(text: str) -> World:
    """Parse a world file.

    Raises
    ------
    WorldFileError
        On syntax errors, non-Hermitian observables, outcomes that are not
        eigenvalues, duplicate timestamps or unknown observable names. The
        message carries the 1-based line number.
    """
    dim = None
    observables = {}
    records = []
    seen_times = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "dim":
            if dim is not None:
                raise WorldFileError("dim declared twice", lineno)
            if len(tokens) != 2:
                raise WorldFileError("expected 'dim N'", lineno)
            try:
                dim = int(tokens[1])
            except ValueError:
                raise WorldFileError(f"bad dimension {tokens[1]!r}", lineno) from None
            if not 1 <= dim <= 64:
                raise WorldFileError(f"dimension {dim} out of range 1..64", lineno)
        elif kw == "obs":
            if dim is None:
                raise WorldFileError("'obs' before 'dim'", lineno)
            if len(tokens) < 2 or not _NAME_RE.match(tokens[1]):
                raise WorldFileError("expected 'obs <name> <entries>'", lineno)
            name = tokens[1]
            if name in observables:
                raise WorldFileError(f"observable {name!r} defined twice", lineno)
            entries = tokens[2:]
            if len(entries) != dim * dim:
                raise WorldFileError(f"observable {name!r} needs {dim * dim} entries, got {len(entries)}", lineno)
            try:
                values = [parse_complex(tok) for tok in entries]
            except ValueError as exc:
                raise WorldFileError(str(exc), lineno) from None
            try:
                observables[name] = HermitianOperator(np.array(values).reshape(dim, dim))
            except NotHermitianError as exc:
                raise WorldFileError(f"observable {name!r}: {exc}", lineno) from None
        elif kw == "record":
            if len(tokens) != 4:
                raise WorldFileError("expected 'record <time> <obs-name> <outcome>'", lineno)
            try:
                time = int(tokens[1])
            except ValueError:
                raise WorldFileError(f"bad timestamp {tokens[1]!r}", lineno) from None
            name = tokens[2]
            if name not in observables:
                raise WorldFileError(f"unknown observable {name!r}", lineno)
            try:
                outcome = float(tokens[3])
            except ValueError:
                raise WorldFileError(f"bad outcome {tokens[3]!r}", lineno) from None
            if time in seen_times:
                raise WorldFileError(f"duplicate timestamp {time} (first at line {seen_times[time]})", lineno)
            seen_times[time] = lineno
            try:
                records.append(MeasurementRecord(time, name, observables[name], outcome))
            except ValueError as exc:
                raise WorldFileError(str(exc), lineno) from None
        else:
            raise WorldFileError(f"unknown keyword {kw!r}", lineno)
    if dim is None:
        raise WorldFileError("missing 'dim' declaration")
    return World(dim, tuple(records), observables)


def serialize_world(world: World) -> str:
    lines = [f"dim {world.dim}"]
    for name in sorted(world.observables):
        entries = " ".join(format_complex(z) for z in world.observables[name].matrix.reshape(-1))
        lines.append(f"obs {name} {entries}")
    for r in world.records:
        lines.append(f"record {r.time} {r.obs_name} {r.outcome!r}")
    return "\n".join(lines) + "\n"


def load_world(path) -> World:
    with open(path, encoding="utf-8") as fh:
        return parse_world(fh.read())


def example_world_path(name: str = "threebox.world"):
    """Filesystem path of a world file shipped with the package."""
    return resources.files("tsvf_lab") / "data" / name

"""Worked pre/post-selection examples.

* the three-box paradox and its trivial two-box variant,
* the spin raffle (Mean King problem): a particle entangled with an ancilla
  lets the participant name the result of an s_x, s_y or s_z measurement
  after the fact,
* the all-plus branch of the raffle and its weak values,
* a discrete shutter toy in which a probe scatters off a three-box particle
  as if it occupied both A and B.

Basis conventions: boxes are ordered A, B, C. Composite spin systems are
particle (x) ancilla. The shutter probe is path (a, b) x flag (in, refl).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ValidationFailed, VanishingPostSelection
from .qcore import (
    SX,
    SY,
    SZ,
    S_XI,
    HermitianOperator,
    Projector,
    StateVector,
    basis_state,
    embed,
    inner,
    spectral,
    tensor,
)
from .tsvf import (
    CERTAINTY_TOL,
    TwoStateVector,
    abl,
    element_of_reality,
    weak_value,
)

BOXES = ("A", "B", "C")
SPIN_HALF = 0.5
PARTICLE = 0
KING_FACTORS = (2, 2)
DIRECTIONS = ("x", "y", "z")
SPINS = {"x": SX, "y": SY, "z": SZ}


def box_projector(box: str) -> Projector:
    """``|box><box|``; outcome 1 means the particle was found in ``box``."""
    return basis_state(3, BOXES.index(box)).projector()


def three_box() -> TwoStateVector:
    return TwoStateVector(StateVector([1, 1, 1]), StateVector([1, 1, -1]))


def three_box_trivial() -> TwoStateVector:
    """Pre-selected in A and B, post-selected in B and C."""
    return TwoStateVector(StateVector([1, 1, 0]), StateVector([0, 1, 1]))


@dataclass(frozen=True)
class RaffleAnswer:
    s_x: float
    s_y: float
    s_z: float

    def __post_init__(self):
        for name in ("s_x", "s_y", "s_z"):
            if abs(getattr(self, name)) != SPIN_HALF:
                raise ValueError(f"{name} must be +-1/2, got {getattr(self, name)!r}")

    def get(self, direction: str) -> float:
        return getattr(self, f"s_{direction}")


@dataclass(frozen=True)
class KingProtocol:
    """Initial particle-ancilla state, final measurement basis and answer table."""

    initial: StateVector
    final_basis: tuple
    answer_map: Mapping[int, RaffleAnswer]

    def __post_init__(self):
        basis = tuple(self.final_basis)
        object.__setattr__(self, "final_basis", basis)
        if self.initial.dim != 4 or len(basis) != 4 or any(b.dim != 4 for b in basis):
            raise ValueError("king protocol needs a dim-4 initial state and four dim-4 final states")
        gram = np.array([[inner(a, b) for b in basis] for a in basis])
        dev = np.max(np.abs(gram - np.eye(4)))
        if dev > 1e-10:
            raise ValueError(f"final basis is not orthonormal (deviation {dev:.3g})")
        answers = dict(self.answer_map)
        if sorted(answers) != [0, 1, 2, 3]:
            raise ValueError("answer_map must assign an answer to each of the 4 final outcomes")
        if len(set(answers.values())) != 4:
            raise ValueError("answer_map answers must be distinct")
        object.__setattr__(self, "answer_map", answers)

    def outcome_for(self, answer: RaffleAnswer) -> int:
        for k, a in self.answer_map.items():
            if a == answer:
                return k
        raise KeyError(answer)


def _spin_branch_projector(direction, value) -> Projector:
    return spectral(SPINS[direction]).projector_for(value)


def build_king_protocol() -> KingProtocol:
    """Construct the raffle-winning protocol.

    The ancilla starts maximally entangled with the particle. For an answer
    ``(a_x, a_y, a_z)`` the matching final state must be orthogonal to each
    branch ``(P[s_d = -a_d] (x) 1)|initial>``, so that seeing it rules out
    every wrong statement. Three constraints in four dimensions leave a
    single state; the four answers with ``a_x * a_y * a_z > 0`` give mutually
    orthogonal states. :func:`validate_king_protocol` checks the result.
    """
    initial = StateVector([1, 0, 0, 1])
    signs = [s for s in itertools.product((1, -1), repeat=3) if np.prod(s) > 0]
    basis, answers = [], {}
    for k, sign in enumerate(signs):
        answer = RaffleAnswer(*(SPIN_HALF * s for s in sign))
        forbidden = np.array([
            embed(_spin_branch_projector(d, -answer.get(d)), PARTICLE, KING_FACTORS).apply(initial)
            for d in DIRECTIONS
        ])
        # rows of conj(forbidden) @ v are the overlaps <branch|v>
        _, _, vh = np.linalg.svd(forbidden.conj())
        vec = vh[-1].conj()
        overlap = np.vdot(vec, initial.amps)
        vec = vec * (abs(overlap) / overlap)
        basis.append(StateVector(vec))
        answers[k] = answer
    return KingProtocol(initial, tuple(basis), answers)


@dataclass
class KingReport:
    wins: int
    total: int
    cases: list = field(default_factory=list)
    direction_totals: dict = field(default_factory=dict)
    outcome_weights: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "wins": self.wins,
            "total": self.total,
            "cases": self.cases,
            "direction_totals": self.direction_totals,
            "outcome_weights": self.outcome_weights,
        }


def validate_king_protocol(p: KingProtocol, tol=CERTAINTY_TOL) -> KingReport:
    """Play every raffle case and check the participant's statement.

    For each direction the king measures ``s_d`` on the particle; for each
    final outcome ``k`` the joint probabilities of the king's two results are
    computed by direct state-vector projection. Outcome ``k`` wins if it is
    impossible or if it pins the king's result to ``answer_map[k]``. The
    same verdict is cross-checked through :func:`element_of_reality`.

    Raises
    ------
    ValidationFailed
        Listing every ``(direction, outcome)`` pair that loses.
    """
    violations, cases = [], []
    totals = {}
    for d in DIRECTIONS:
        totals[d] = 0.0
        for k, final in enumerate(p.final_basis):
            joint = {}
            for r in (SPIN_HALF, -SPIN_HALF):
                branch = embed(_spin_branch_projector(d, r), PARTICLE, KING_FACTORS).apply(p.initial)
                joint[r] = float(abs(np.vdot(final.amps, branch)) ** 2)
            totals[d] += sum(joint.values())
            claim = p.answer_map[k].get(d)
            weight = sum(joint.values())
            if weight == 0.0:
                determined, certain = None, None
            else:
                determined = [r for r, q in joint.items() if q / weight >= 1.0 - tol]
                determined = determined[0] if determined else None
                try:
                    certain = element_of_reality(
                        TwoStateVector(p.initial, final), embed(SPINS[d], PARTICLE, KING_FACTORS), tol
                    )
                except VanishingPostSelection:
                    certain = None
            won = weight == 0.0 or (
                determined == claim and certain is not None and abs(certain - claim) <= 1e-8
            )
            cases.append({
                "direction": d,
                "outcome": k,
                "claim": claim,
                "king_result": determined,
                "probabilities": {str(r): q for r, q in joint.items()},
                "win": won,
            })
            if not won:
                violations.append((d, k, claim, determined))
    if violations:
        raise ValidationFailed(violations)
    weights = [float(abs(inner(f, p.initial)) ** 2) for f in p.final_basis]
    return KingReport(len(cases), len(cases), cases, totals, weights)


def all_plus_tsv(protocol: KingProtocol = None) -> TwoStateVector:
    """Raffle branch in which the participant claims +1/2 in all three directions."""
    protocol = protocol or build_king_protocol()
    validate_king_protocol(protocol)
    k = protocol.outcome_for(RaffleAnswer(SPIN_HALF, SPIN_HALF, SPIN_HALF))
    return TwoStateVector(protocol.initial, protocol.final_basis[k])


# Shutter toy. Probe basis index = 2 * path + flag.
PROBE_LABELS = ("a_in", "a_refl", "b_in", "b_refl")
_PROBE_INDEX = {label: i for i, label in enumerate(PROBE_LABELS)}


def shutter_unitary() -> np.ndarray:
    """Flip the probe flag on path a when the particle is in A, on b when in B.

    Implemented as a swap of the in/refl flags so that the map is unitary.
    """
    u = np.eye(12, dtype=complex)
    for box, path in (("A", "a"), ("B", "b")):
        i = 4 * BOXES.index(box) + _PROBE_INDEX[f"{path}_in"]
        j = 4 * BOXES.index(box) + _PROBE_INDEX[f"{path}_refl"]
        u[[i, j]] = u[[j, i]]
    return u


@dataclass
class ShutterReport:
    probe_state: StateVector
    reflection_probability: float
    post_selection_probability: float

    def to_dict(self) -> dict:
        amps = self.probe_state.amps
        return {
            "probe_state": {lab: [float(a.real), float(a.imag)] for lab, a in zip(PROBE_LABELS, amps)},
            "reflection_probability": self.reflection_probability,
            "post_selection_probability": self.post_selection_probability,
        }


def shutter_scattering(post: StateVector = None, interact: bool = True) -> ShutterReport:
    """Scatter a two-path probe off the three-box particle and post-select.

    Parameters
    ----------
    post : StateVector, optional
        Post-selection of the box particle; defaults to (A + B - C)/sqrt3.
    interact : bool
        With False the interaction is replaced by the identity.
    """
    tsv = three_box()
    post = tsv.post if post is None else post
    probe0 = StateVector([1, 0, 1, 0])
    state = tensor(tsv.pre, probe0).amps
    if interact:
        state = shutter_unitary() @ state
    # <post| (x) 1 applied to the joint state
    probe = post.amps.conj() @ state.reshape(3, 4)
    psel = float(np.real(np.vdot(probe, probe)))
    if psel == 0.0:
        raise VanishingPostSelection("probe post-selection has zero probability")
    probe_state = StateVector(probe)
    refl = sum(abs(probe_state.amps[_PROBE_INDEX[f"{p}_refl"]]) ** 2 for p in "ab")
    return ShutterReport(probe_state, float(refl), psel)


def _weak_values(tsv, ops):
    out = {}
    for name, op in ops.items():
        w = weak_value(tsv, op)
        out[name] = [w.real, w.imag]
    return out


def _box_report(tsv):
    ops = {f"P_{b}": box_projector(b) for b in BOXES}
    report = {}
    for name, op in ops.items():
        report[f"p_{name[2]}"] = abl(tsv, op).prob(1.0)
    report["weak_values"] = _weak_values(tsv, ops)
    report["elements_of_reality"] = {name: element_of_reality(tsv, op) for name, op in ops.items()}
    return report


def scenario_tsv(name: str) -> TwoStateVector:
    if name == "three-box":
        return three_box()
    if name == "three-box-trivial":
        return three_box_trivial()
    if name == "all-plus":
        return all_plus_tsv()
    raise KeyError(f"scenario {name!r} has no single two-state vector")


def scenario_observable(scenario: str, obs: str) -> HermitianOperator:
    """Built-in observable by name, acting on the scenario's full space.

    Spin observables are placed on the particle factor for the raffle
    scenarios.
    """
    if obs in ("P_A", "P_B", "P_C"):
        if scenario not in ("three-box", "three-box-trivial"):
            raise KeyError(f"{obs} is only defined for the box scenarios")
        return box_projector(obs[2])
    spins = {"s_x": SX, "s_y": SY, "s_z": SZ, "s_xi": S_XI}
    if obs in spins:
        if scenario != "all-plus":
            raise KeyError(f"{obs} is only defined for the all-plus scenario")
        return embed(spins[obs], PARTICLE, KING_FACTORS)
    raise KeyError(f"unknown observable {obs!r}")


def scenario_report(name: str) -> dict:
    """Machine-readable summary of a scenario."""
    if name in ("three-box", "three-box-trivial"):
        return {"scenario": name, **_box_report(scenario_tsv(name))}
    if name == "mean-king":
        return {"scenario": name, **validate_king_protocol(build_king_protocol()).to_dict()}
    if name == "all-plus":
        tsv = all_plus_tsv()
        ops = {o: scenario_observable(name, o) for o in ("s_x", "s_y", "s_z", "s_xi")}
        return {
            "scenario": name,
            "weak_values": _weak_values(tsv, ops),
            "elements_of_reality": {
                o: element_of_reality(tsv, ops[o]) for o in ("s_x", "s_y", "s_z")
            },
            "post_selection_probability": abs(tsv.overlap()) ** 2,
        }
    if name == "shutter":
        return {"scenario": name, **shutter_scattering().to_dict()}
    raise KeyError(f"unknown scenario {name!r}")


SCENARIOS = ("three-box", "three-box-trivial", "mean-king", "all-plus", "shutter")

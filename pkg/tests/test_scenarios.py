import itertools

import numpy as np
import pytest

from tsvf_lab.errors import ValidationFailed
from tsvf_lab.qcore import SX, SY, SZ, S_XI, StateVector, basis_state, embed, inner
from tsvf_lab.scenarios import (
    KING_FACTORS, PARTICLE, KingProtocol, RaffleAnswer, all_plus_tsv, box_projector,
    build_king_protocol, scenario_observable, scenario_report, shutter_scattering,
    shutter_unitary, three_box, three_box_trivial, validate_king_protocol, SCENARIOS,
)
from tsvf_lab.tsvf import abl, element_of_reality, oracle_for, weak_value, weak_value_local


@pytest.fixture(scope="module")
def protocol():
    return build_king_protocol()


def test_three_box_states():
    tsv = three_box()
    np.testing.assert_allclose(tsv.pre.amps, np.ones(3) / np.sqrt(3))
    np.testing.assert_allclose(tsv.post.amps, np.array([1, 1, -1]) / np.sqrt(3))


@pytest.mark.parametrize("box", ["A", "B"])
def test_three_box_certain_search(box):
    assert abl(three_box(), box_projector(box)).prob(1.0) == pytest.approx(1.0, abs=1e-12)


def test_three_box_weak_values():
    tsv = three_box()
    total = box_projector("A") + box_projector("B") + box_projector("C")
    assert weak_value(tsv, total) == pytest.approx(1.0, abs=1e-12)
    assert [weak_value(tsv, box_projector(b)).real for b in "ABC"] == pytest.approx([1, 1, -1])


def test_three_box_trivial():
    tsv = three_box_trivial()
    assert abl(tsv, box_projector("B")).prob(1.0) == pytest.approx(1.0, abs=1e-12)
    # <post|A> = 0, so a search of A certainly comes up empty
    assert abl(tsv, box_projector("A")).prob(0.0) == pytest.approx(1.0, abs=1e-12)
    assert element_of_reality(tsv, box_projector("A")) == 0.0
    assert element_of_reality(tsv, box_projector("C")) == 0.0
    assert weak_value(tsv, box_projector("B")) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("tsv_factory, box", [(three_box, "A"), (three_box, "B"), (three_box_trivial, "B")])
def test_certainty_confirmed_by_oracle(tsv_factory, box):
    dist = oracle_for(tsv_factory(), box_projector(box), shots=100_000, seed=0)
    assert dist.prob(1.0) == 1.0
    assert dist.samples > 0


def test_raffle_answer_validation():
    with pytest.raises(ValueError):
        RaffleAnswer(0.5, 0.5, 0.3)


def test_king_protocol_wins_every_case(protocol):
    report = validate_king_protocol(protocol)
    assert (report.wins, report.total) == (12, 12)
    assert all(c["win"] for c in report.cases)


def test_king_outcome_weights_are_quarter(protocol):
    for final in protocol.final_basis:
        assert abs(inner(final, protocol.initial)) ** 2 == pytest.approx(0.25, abs=1e-12)


def test_king_initial_state_is_maximally_entangled(protocol):
    m = protocol.initial.amps.reshape(2, 2)
    reduced = m @ m.conj().T
    np.testing.assert_allclose(reduced, np.eye(2) / 2, atol=1e-15)


def test_king_direction_totals(protocol):
    report = validate_king_protocol(protocol)
    for total in report.direction_totals.values():
        assert total == pytest.approx(1.0, abs=1e-10)


def test_exactly_one_all_plus_outcome(protocol):
    plus = RaffleAnswer(0.5, 0.5, 0.5)
    assert sum(a == plus for a in protocol.answer_map.values()) == 1


def test_king_brute_force_determinedness(protocol):
    """Independent re-check: project the state by hand for each case."""
    halves = {"x": SX, "y": SY, "z": SZ}
    for d, (k, final) in itertools.product("xyz", enumerate(protocol.final_basis)):
        vals, vecs = np.linalg.eigh(halves[d].matrix)
        probs = {}
        for v, e in zip(vals, vecs.T):
            branch = np.kron(np.outer(e, e.conj()), np.eye(2)) @ protocol.initial.amps
            probs[round(v, 9)] = abs(np.vdot(final.amps, branch)) ** 2
        claim = protocol.answer_map[k].get(d)
        assert probs[-claim] < 1e-20
        assert probs[claim] > 0.1


def test_computational_basis_fails_validation(protocol):
    basis = tuple(basis_state(4, k) for k in range(4))
    bad = KingProtocol(protocol.initial, basis, protocol.answer_map)
    with pytest.raises(ValidationFailed) as info:
        validate_king_protocol(bad)
    assert any(v[0] == "x" for v in info.value.violations)


def test_duplicate_answers_rejected(protocol):
    answers = dict(protocol.answer_map)
    answers[1] = answers[0]
    with pytest.raises(ValueError):
        KingProtocol(protocol.initial, protocol.final_basis, answers)


def test_non_orthonormal_basis_rejected(protocol):
    basis = (protocol.final_basis[0],) * 4
    with pytest.raises(ValueError):
        KingProtocol(protocol.initial, basis, protocol.answer_map)


def test_all_plus_weak_values():
    tsv = all_plus_tsv()
    for op in (SX, SY, SZ):
        assert abs(weak_value_local(tsv, op, PARTICLE, KING_FACTORS) - 0.5) < 1e-10
    assert abs(weak_value_local(tsv, S_XI, PARTICLE, KING_FACTORS) - np.sqrt(3) / 2) < 1e-10


def test_all_plus_elements_of_reality():
    tsv = all_plus_tsv()
    for op in (SX, SY, SZ):
        assert element_of_reality(tsv, embed(op, PARTICLE, KING_FACTORS)) == pytest.approx(0.5)


def test_all_plus_weak_value_linearity():
    tsv = all_plus_tsv()
    parts = sum(weak_value_local(tsv, op, PARTICLE, KING_FACTORS) for op in (SX, SY, SZ))
    assert abs(parts - np.sqrt(3) * weak_value_local(tsv, S_XI, PARTICLE, KING_FACTORS)) < 1e-10


def _shutter_by_hand(post, interact=True):
    """Dictionary-based state bookkeeping, independent of the matrix route."""
    amp = {}
    for box in "ABC":
        for path in "ab":
            flag = "in"
            if interact and (box, path) in (("A", "a"), ("B", "b")):
                flag = "refl"
            amp[(box, path, flag)] = amp.get((box, path, flag), 0) + 1 / np.sqrt(3) / np.sqrt(2)
    probe = {}
    for (box, path, flag), a in amp.items():
        probe[(path, flag)] = probe.get((path, flag), 0) + np.conj(post["ABC".index(box)]) * a
    return probe


def test_shutter_matches_hand_computation():
    post = np.array([1, 1, -1]) / np.sqrt(3)
    probe = _shutter_by_hand(post)
    psel = sum(abs(v) ** 2 for v in probe.values())
    assert psel == pytest.approx(1 / 9, abs=1e-15)
    report = shutter_scattering()
    assert report.post_selection_probability == pytest.approx(psel, abs=1e-12)
    assert report.reflection_probability == pytest.approx(1.0, abs=1e-12)
    assert report.probe_state.allclose(StateVector([0, 1, 0, 1]), atol=1e-12, up_to_phase=True)


def test_shutter_without_interaction():
    report = shutter_scattering(interact=False)
    probe = _shutter_by_hand(np.array([1, 1, -1]) / np.sqrt(3), interact=False)
    assert report.post_selection_probability == pytest.approx(abs(inner(three_box().post, three_box().pre)) ** 2)
    assert report.post_selection_probability == pytest.approx(sum(abs(v) ** 2 for v in probe.values()))
    assert report.reflection_probability == pytest.approx(0.0, abs=1e-15)
    assert report.probe_state.allclose(StateVector([1, 0, 1, 0]), up_to_phase=True)


def test_shutter_unitary_and_phase_invariance():
    u = shutter_unitary()
    np.testing.assert_allclose(u.conj().T @ u, np.eye(12), atol=1e-12)
    base = shutter_scattering()
    phased = shutter_scattering(post=StateVector(np.exp(0.7j) * three_box().post.amps))
    assert phased.post_selection_probability == pytest.approx(base.post_selection_probability, abs=1e-15)
    assert phased.reflection_probability == pytest.approx(base.reflection_probability, abs=1e-15)
    assert phased.probe_state.allclose(base.probe_state, up_to_phase=True)


def test_scenario_observable_lookup():
    assert scenario_observable("all-plus", "s_xi").dim == 4
    with pytest.raises(KeyError):
        scenario_observable("three-box", "s_x")
    with pytest.raises(KeyError):
        scenario_observable("all-plus", "P_A")


@pytest.mark.parametrize("name", SCENARIOS)
def test_every_scenario_reports(name):
    report = scenario_report(name)
    assert report["scenario"] == name


def test_three_box_report_values():
    r = scenario_report("three-box")
    assert r["p_A"] == pytest.approx(1.0, abs=1e-12)
    assert r["p_B"] == pytest.approx(1.0, abs=1e-12)
    assert [r["weak_values"][k][0] for k in ("P_A", "P_B", "P_C")] == pytest.approx([1, 1, -1])

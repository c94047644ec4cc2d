import math
from dataclasses import replace
from fractions import Fraction
from itertools import product

import pytest
from scipy.stats import chisquare

from lagrange_ca.config import DEFAULT_COUPLING
from lagrange_ca.engine.loop import StopCondition, run
from lagrange_ca.engine.objects import PathMember, PathRow, PwCollection
from lagrange_ca.engine.rng import GeneratorState
from lagrange_ca.errors import ContractViolation, UnknownParticleTypeError
from lagrange_ca.interaction.channels import BINDING, TOPOLOGY, enumerate_channels, instantiate_templates
from lagrange_ca.interaction.operators import apply_combine, apply_split, pair_momenta, transfer_grid
from lagrange_ca.interaction.pipeline import (
    Candidate,
    ChannelResult,
    MergedGroup,
    detect_interaction,
    form_interaction_object,
    interact,
    merge_channels,
    perform_interaction,
    select_interaction_cell,
    select_out_group,
)
from lagrange_ca.interaction.rules import COMBINE, ELECTRON, PHOTON, POSITRON, SPLIT, rule_table
from lagrange_ca.interaction.settings import CANCELLED, NO_CHANNEL, PROCESSED, InteractionSettings

QED = rule_table("qed")
G = DEFAULT_COUPLING


def _rule(name):
    return next(r for r in QED if r.name == name)


def _meeting(granularity=4, signs="", electron_paths="", photon_type="photon"):
    """Electron at rest in cell 10 and a particle arriving from cell 12."""
    return f"""
[lagrangian]
source = 1/2*m*d(x,t)^2

[grid]
extent = 64
dx = 1

[run]
dt = 0.5
ticks = 4
seed = 7

[particle e1]
type = electron
x = 10
momentum = 0
{electron_paths}

[particle g1]
type = {photon_type}
x = 12
momentum = -1

[interaction]
pairs = e1:g1
granularity = {granularity}
{signs}
"""


# ---------------------------------------------------------------------------
# Channel enumeration
# ---------------------------------------------------------------------------
def test_electron_photon_has_two_channels():
    channels = enumerate_channels((ELECTRON, PHOTON), QED)
    assert sorted(c.template for c in channels) == [1, 2]
    assert [str(c) for c in channels] == [
        "combine(e-,γ)→e-; split(e-)→(e-,γ)",
        "split(e-)→(e-,γ); combine(e-,γ)→e-",
    ]


def test_photon_pair_has_no_channel():
    assert enumerate_channels((PHOTON, PHOTON), QED) == []


def test_electron_positron_under_both_equivalences():
    assert len(enumerate_channels((ELECTRON, POSITRON), QED, BINDING)) == 5
    assert len(enumerate_channels((ELECTRON, POSITRON), QED, TOPOLOGY)) == 3


def _oracle(in_types):
    """Brute force over every (template, split, combine) triple."""
    found = set()
    for split, combine in product(QED, QED):
        if not (split.enabled and combine.enabled and split.kind == SPLIT and combine.kind == COMBINE):
            continue
        if combine.accepts(*in_types) and split.inputs[0] == combine.outputs[0]:
            found.add((1, split.name, combine.name))
        for template, side, child in ((2, 0, 0), (3, 0, 1), (4, 1, 0), (5, 1, 1)):
            if split.inputs[0] != in_types[side] or not split.on_shell_parent:
                continue
            if combine.accepts(split.outputs[child], in_types[1 - side]):
                found.add((template, split.name, combine.name))
    return found


@pytest.mark.parametrize("in_types", list(product((ELECTRON, POSITRON, PHOTON), repeat=2)))
def test_enumeration_matches_brute_force(in_types):
    channels = instantiate_templates(in_types, QED)
    assert {(c.template, c.split_rule.name, c.combine_rule.name) for c in channels} == _oracle(in_types)
    for channel in channels:
        # one split and one combine, two particles in and two out
        assert channel.split_rule.kind == SPLIT and channel.combine_rule.kind == COMBINE
        assert len(channel.out_types) == 2


def test_type_outside_table_is_rejected():
    with pytest.raises(UnknownParticleTypeError):
        enumerate_channels((ELECTRON, "muon"), QED)
    assert enumerate_channels(("muon", PHOTON), rule_table("qed-mu"))


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------
def test_transfer_grid_is_symmetric():
    grid = transfer_grid(Fraction(-1), 4)
    assert grid == [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(3, 2)]
    assert transfer_grid(Fraction(5), 1) == [Fraction(0)]


def test_split_spreads_over_granularity():
    row = PathRow((PathMember(ELECTRON, 3.0, Fraction(2), 1),), 1.0)
    rows = apply_split(row, 0, _rule("emit-e-"), 4)
    assert len(rows) == 4
    assert [r.members[0].p for r in rows] == pair_momenta(Fraction(2), 4)
    for r in rows:
        electron, photon = r.members
        assert electron.p + photon.p == 2
        assert (electron.ptype, photon.ptype) == (ELECTRON, PHOTON)
        assert electron.sigma == photon.sigma == 1
        assert r.amplitude == pytest.approx(G / 2)


def test_split_with_single_alternative():
    row = PathRow((PathMember(PHOTON, 0.0, Fraction(4), 1),), 1.0)
    (only,) = apply_split(row, 0, _rule("pair-e"), 1)
    assert [m.p for m in only.members] == [2, 2]
    assert [m.sigma for m in only.members] == [1, -1]


def test_split_rejects_wrong_parent():
    row = PathRow((PathMember(PHOTON, 0.0, Fraction(0), 1),), 1.0)
    with pytest.raises(ContractViolation):
        apply_split(row, 0, _rule("emit-e-"), 2)


def test_combine_fuses_momenta():
    row = PathRow(
        (PathMember(PHOTON, 5.0, Fraction(2), -1), PathMember(ELECTRON, 5.0, Fraction(1), 1)),
        0.5,
    )
    fused = apply_combine(row, (0, 1), _rule("absorb-e-"))
    (member,) = fused.members
    assert member.ptype == ELECTRON
    assert member.p == 3
    assert member.sigma == 1
    assert fused.amplitude == pytest.approx(0.5 * G)


def test_combine_rejects_unmatched_types():
    row = PathRow((PathMember(PHOTON, 0, Fraction(0), 1), PathMember(PHOTON, 0, Fraction(0), 1)), 1.0)
    with pytest.raises(ContractViolation):
        apply_combine(row, (0, 1), _rule("absorb-e-"))


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------
def test_cell_selection_statistics():
    rng = GeneratorState.from_seed(2024)
    candidates = [Candidate(1, ("a", "b"), 1.0), Candidate(2, ("a", "b"), 3.0)]
    trials = 100_000
    hits = sum(select_interaction_cell(candidates, rng).cell == 1 for _ in range(trials))
    assert abs(hits / trials - 0.25) <= 0.015
    assert chisquare([hits, trials - hits], [trials / 4, 3 * trials / 4]).pvalue > 0.01


def test_zero_weight_candidates_are_never_drawn():
    rng = GeneratorState.from_seed(1)
    candidates = [Candidate(0, ("a", "b"), 0.0), Candidate(4, ("a", "b"), 2.0)]
    assert {select_interaction_cell(candidates, rng).cell for _ in range(100)} == {4}


def test_out_group_draw_follows_source_weight():
    rng = GeneratorState.from_seed(5)
    row = PathRow((PathMember(ELECTRON, 0, Fraction(0), 1),), 1.0)
    heavy = MergedGroup(((ELECTRON, 1),), PwCollection((row,), source_weight=0.8))
    light = MergedGroup(((PHOTON, 1),), PwCollection((row,), source_weight=0.2))
    trials = 20_000
    hits = sum(select_out_group([heavy, light], rng) is heavy for _ in range(trials))
    assert abs(hits / trials - 0.8) <= 0.015


def test_single_group_takes_no_draw():
    rng = GeneratorState.from_seed(5)
    row = PathRow((PathMember(ELECTRON, 0, Fraction(0), 1),), 1.0)
    only = MergedGroup(((ELECTRON, 1),), PwCollection((row,)))
    assert select_out_group([only], rng) is only
    assert rng.draws == 0


# ---------------------------------------------------------------------------
# Detection and merging
# ---------------------------------------------------------------------------
OVERLAP = """
[lagrangian]
source = 1/2*m*d(x,t)^2

[grid]
extent = 32
dx = 1

[run]
dt = 0.5
ticks = 1

[particle a]
type = electron
x = 10
paths = 5
spread = 4

[particle b]
type = photon
x = 10
paths = 5
spread = 4

[interaction]
granularity = 2
"""


def test_overlap_yields_one_candidate_per_cell(make_state):
    candidates = detect_interaction(make_state(OVERLAP))
    assert [c.cell for c in candidates] == [8, 9, 10, 11, 12]
    assert {c.pair for c in candidates} == {("a", "b")}
    # each path carries |1/√5|², the joint weight is the product
    assert [c.weight for c in candidates] == pytest.approx([0.04] * 5)


def test_types_outside_table_never_become_candidates(make_state):
    state = make_state(OVERLAP.replace("type = photon\n", ""))
    assert state.particles["b"].ptype == "generic"
    assert detect_interaction(state) == []
    final = run(state, StopCondition(max_ticks=4)).final
    assert final.tick == 4
    assert not final.events
    assert set(final.particles) == {"a", "b"}


def _result(channel, amplitudes):
    rows = tuple(
        PathRow((PathMember(ELECTRON, 0, Fraction(j), 1), PathMember(PHOTON, 0, Fraction(-j), 1)), a)
        for j, a in enumerate(amplitudes)
    )
    return ChannelResult(channel, rows)


def test_equal_channels_add_and_renormalize():
    channel = enumerate_channels((ELECTRON, PHOTON), QED)[0]
    results = [_result(channel, [0.3, 0.4]), _result(channel, [0.3, 0.4])]
    (group,) = merge_channels(results, InteractionSettings())
    assert group.collection.source_weight == pytest.approx(4 * 0.25)
    assert [r.amplitude for r in group.collection.rows] == pytest.approx([0.6, 0.8])


def test_mismatched_path_sets_are_rejected():
    first, second = enumerate_channels((ELECTRON, PHOTON), QED)
    with pytest.raises(ContractViolation):
        merge_channels([_result(first, [0.3, 0.4]), _result(second, [0.5])], InteractionSettings())


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------
def _arrived(make_state, text):
    record = run(make_state(text), StopCondition(max_ticks=4))
    return record.final


def test_electron_photon_end_to_end(make_state):
    final = _arrived(make_state, _meeting(granularity=8))
    (event,) = final.events
    assert event.status == PROCESSED
    assert event.cell == 10
    assert event.out_types == (ELECTRON, PHOTON)
    assert set(final.particles) == {"pw0", "pw1"}

    electron, photon = final.particles["pw0"], final.particles["pw1"]
    assert electron.partner == "pw1" and photon.partner == "pw0"
    assert electron.paths is photon.paths
    table = electron.paths
    assert len(table.rows) == 8
    assert table.norm() == pytest.approx(1.0, abs=1e-9)
    for row in table.rows:
        assert sum(Fraction(m.p) for m in row.members) == -1


def test_merge_renormalizes_group(make_state):
    final = _arrived(make_state, _meeting(granularity=4))
    table = final.particles["pw0"].paths
    assert [abs(r.amplitude) ** 2 for r in table.rows] == pytest.approx([0.25] * 4)


def test_opposite_signs_cancel(make_state):
    final = _arrived(make_state, _meeting(signs="signs = 1:2=-1"))
    (event,) = final.events
    assert event.status == CANCELLED
    assert set(final.particles) == {"e1", "g1"}


def test_interaction_draws_from_its_own_generator(make_state):
    state = make_state(_meeting().replace("x = 12\n", "x = 10\n"))
    after = interact(state)
    assert after.events[0].status == PROCESSED
    assert after.rng.draws >= 1
    assert state.rng.draws == 0
    perform_interaction(state, "e1", "g1", 10)
    assert state.rng.draws == 0


def test_pair_without_channel_leaves_state(make_state):
    text = _meeting(photon_type="photon").replace("type = electron", "type = photon")
    final = _arrived(make_state, text)
    (event,) = final.events
    assert event.status == NO_CHANNEL
    assert set(final.particles) == {"e1", "g1"}


def test_collapse_discards_paths_outside_cell(make_state):
    spread = "paths = 2\nspread = 20"
    state = make_state(_meeting(electron_paths=spread).replace("x = 10\n", "x = 20\n", 1))
    # paths sit at x = 10 and x = 30; the photon is moved onto cell 10
    photon = state.particles["g1"]
    moved = PwCollection(tuple(
        replace(r, members=(replace(r.members[0], x=10.0),)) for r in photon.paths.rows
    ))
    state = replace(state, particles={**state.particles, "g1": replace(photon, paths=moved)})

    obj = form_interaction_object(state, "e1", "g1", 10)
    assert obj.discarded == {"e1": 1, "g1": 0}
    after = perform_interaction(state, "e1", "g1", 10)
    assert "e1" not in after.particles
    for pw in after.particles.values():
        assert {after.grid.cell_of(m.x) for m in pw.members()} == {10}


def test_distinct_in_states_share_an_out_state(make_state):
    def collide(far_x):
        state = make_state(_meeting(electron_paths="paths = 2\nspread = 20"))
        electron = state.particles["e1"]
        rows = (
            replace(electron.paths.rows[0], members=(replace(electron.paths.rows[0].members[0], x=10.0),)),
            replace(electron.paths.rows[1], members=(replace(electron.paths.rows[1].members[0], x=far_x),)),
        )
        photon = state.particles["g1"]
        photon_rows = tuple(replace(r, members=(replace(r.members[0], x=10.0),)) for r in photon.paths.rows)
        particles = {
            "e1": replace(electron, paths=PwCollection(rows)),
            "g1": replace(photon, paths=PwCollection(photon_rows)),
        }
        return perform_interaction(replace(state, particles=particles), "e1", "g1", 10)

    first, second = collide(30.0), collide(50.0)
    assert first.particles["pw0"].paths.rows == second.particles["pw0"].paths.rows

"""
Interaction pipeline run once per tick after all objects have moved.

  0. detect candidate (cell, pair) overlaps and draw one of them
  1. form the interaction object from the paths covering that cell
  2. process every channel on the object's rows and merge them
  3. draw one out group and install its two out particle waves

Everything the in-objects carried outside the interaction cell is
discarded: distinct in-states can collapse to the same out-state.
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations

import numpy as np

from lagrange_ca.config import DEFAULT_HBAR, PARTICLE_MASSES
from lagrange_ca.engine.kinematics import energy_of
from lagrange_ca.engine.objects import FieldState, ParticleWave, PathMember, PathRow, PwCollection
from lagrange_ca.engine.rng import GeneratorState
from lagrange_ca.engine.state import SystemState, build_occupancy, cell_weights
from lagrange_ca.errors import ContractViolation
from lagrange_ca.interaction.channels import InteractionChannel, enumerate_channels
from lagrange_ca.interaction.operators import (
    DEFAULT_AMPLITUDE_RULE,
    AmplitudeRule,
    apply_combine,
    apply_split,
    pair_momenta,
)
from lagrange_ca.interaction.rules import rule_table, symbol, type_index, vocabulary
from lagrange_ca.interaction.settings import (
    CANCELLED,
    NO_CHANNEL,
    PROCESSED,
    InteractionEvent,
    InteractionSettings,
)
from lagrange_ca.stencils.differences import spatial_derivatives

logger = logging.getLogger(__name__)

GroupKey = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class Candidate:
    cell: int
    pair: tuple[str, str]
    weight: float


@dataclass(frozen=True)
class InteractionObject:
    cell: int
    position: tuple[float, ...]
    tick: int
    in_ids: tuple[str, str]
    in_types: tuple[str, str]
    rows: tuple[PathRow, ...]
    # rows of each in-object that did not cover the cell
    discarded: dict[str, int] = field(default_factory=dict)
    lifetime: int = 0


@dataclass(frozen=True)
class ChannelResult:
    channel: InteractionChannel
    rows: tuple[PathRow, ...]


@dataclass(frozen=True)
class MergedGroup:
    key: GroupKey
    collection: PwCollection


# ---------------------------------------------------------------------------
# Step 0: detection and selection
# ---------------------------------------------------------------------------
def eligible_pairs(state: SystemState) -> list[tuple[str, str]]:
    """Declared pairs whose objects both exist; every pair when none is declared.

    Objects whose type the rule table does not know never interact.
    """
    settings = state.dynamics.interaction
    known = vocabulary(rule_table(settings.rule_table))
    usable = [i for i in state.object_ids() if state.object(i).ptype in known]
    if not settings.pairs:
        return list(combinations(usable, 2))
    return [pair for pair in settings.pairs if set(pair) <= set(usable) and pair[0] != pair[1]]


def detect_interaction(state: SystemState) -> list[Candidate]:
    """All (cell, pair) overlaps with joint weight w1·w2, sorted by (cell, pair)."""
    if state.grid is None:
        return []
    threshold = state.dynamics.interaction.occupancy_threshold
    candidates = []
    for first, second in eligible_pairs(state):
        w1 = cell_weights(state.object(first), state.grid, threshold)
        w2 = cell_weights(state.object(second), state.grid, threshold)
        for cell in sorted(w1.keys() & w2.keys()):
            candidates.append(Candidate(cell, (first, second), w1[cell] * w2[cell]))
    return sorted(candidates, key=lambda c: (c.cell, c.pair))


def select_interaction_cell(candidates: list[Candidate], rng: GeneratorState) -> Candidate:
    """One weighted draw; a draw landing on a cumulative boundary takes the lower entry."""
    usable = [c for c in candidates if c.weight > 0 and math.isfinite(c.weight)]
    if not usable:
        raise ContractViolation("no candidate cell carries positive weight")
    cumulative = np.cumsum([c.weight for c in usable])
    target = rng.uniform() * cumulative[-1]
    index = int(np.searchsorted(cumulative, target, side="left"))
    return usable[min(index, len(usable) - 1)]


# ---------------------------------------------------------------------------
# Step 1: interaction object
# ---------------------------------------------------------------------------
def local_momentum(f: FieldState, cell: int, dx: float, boundary: str, hbar: float) -> float:
    """ħ·Im(ψ*∂ψ/∂x)/|ψ|² at one cell."""
    first, _ = spatial_derivatives(f.psi, dx, boundary)
    psi = f.psi.ravel()[cell]
    density = abs(psi) ** 2
    if density == 0:
        return 0.0
    return float(hbar * (np.conj(psi) * first.ravel()[cell]).imag / density)


def _in_rows(state: SystemState, object_id: str, cell: int) -> tuple[list[PathMember], list[complex], int]:
    """Members and amplitudes of the object's paths covering `cell`, plus the discard count."""
    obj = state.object(object_id)
    position = state.grid.position_of(cell)[0]
    threshold = state.dynamics.interaction.occupancy_threshold

    if isinstance(obj, FieldState):
        if abs(obj.psi.ravel()[cell]) <= threshold:
            raise ContractViolation(f"cell {cell} is outside the support of '{object_id}'")
        hbar = state.dynamics.constants.get("hbar", DEFAULT_HBAR)
        p = local_momentum(obj, cell, state.grid.dx, state.grid.boundary, hbar)
        member = PathMember(obj.ptype, position, Fraction(p), obj.spin, state.t)
        return [member], [1.0 + 0j], 0

    members, amplitudes = [], []
    for row, m in zip(obj.paths.rows, obj.members()):
        if state.grid.cell_of(m.x) == cell and abs(row.amplitude) > threshold:
            members.append(PathMember(m.ptype, position, Fraction(m.p), m.sigma, state.t))
            amplitudes.append(row.amplitude)
    if not members:
        raise ContractViolation(f"cell {cell} is outside the support of '{object_id}'")
    return members, amplitudes, len(obj.paths.rows) - len(members)


def _shares_table(state: SystemState, first: str, second: str) -> bool:
    a, b = state.particles.get(first), state.particles.get(second)
    return a is not None and b is not None and a.partner == second and b.partner == first


def form_interaction_object(state: SystemState, first: str, second: str, cell: int) -> InteractionObject:
    """Reduce both in-objects to their attribute values at the interaction cell."""
    if state.grid is None:
        raise ContractViolation("interactions need a grid")
    position = state.grid.position_of(cell)

    if _shares_table(state, first, second):
        a, b = state.particles[first], state.particles[second]
        threshold = state.dynamics.interaction.occupancy_threshold
        rows, kept = [], 0
        for row in a.paths.rows:
            ma, mb = row.members[a.column], row.members[b.column]
            if (
                state.grid.cell_of(ma.x) == cell
                and state.grid.cell_of(mb.x) == cell
                and abs(row.amplitude) > threshold
            ):
                reduced = tuple(
                    PathMember(m.ptype, position[0], Fraction(m.p), m.sigma, state.t) for m in (ma, mb)
                )
                rows.append(PathRow(reduced, row.amplitude))
                kept += 1
        if not rows:
            raise ContractViolation(f"cell {cell} is not covered jointly by '{first}' and '{second}'")
        dropped = len(a.paths.rows) - kept
        discarded = {first: dropped, second: dropped}
    else:
        m1, a1, d1 = _in_rows(state, first, cell)
        m2, a2, d2 = _in_rows(state, second, cell)
        rows = [PathRow((x, y), u * v) for x, u in zip(m1, a1) for y, v in zip(m2, a2)]
        discarded = {first: d1, second: d2}

    collection = PwCollection(tuple(rows)).normalized()
    if collection.norm() == 0:
        raise ContractViolation("interaction object has zero weight")
    in_types = (state.object(first).ptype, state.object(second).ptype)
    return InteractionObject(cell, position, state.tick, (first, second), in_types, collection.rows, discarded)


# ---------------------------------------------------------------------------
# Step 2: channels
# ---------------------------------------------------------------------------
def _canonical(row: PathRow) -> PathRow:
    members = tuple(sorted(row.members, key=lambda m: (type_index(m.ptype), m.sigma, m.p)))
    return PathRow(members, row.amplitude)


def _run_channel(
    channel: InteractionChannel,
    row: PathRow,
    settings: InteractionSettings,
    amplitude_rule: AmplitudeRule,
) -> list[PathRow]:
    n, window, g = settings.granularity, settings.window, settings.coupling
    total = Fraction(row.members[0].p) + Fraction(row.members[1].p)

    if channel.template == 1:
        fused = apply_combine(row, (0, 1), channel.combine_rule, coupling=g, amplitude_rule=amplitude_rule)
        out = apply_split(fused, 0, channel.split_rule, n, coupling=g, window=window, amplitude_rule=amplitude_rule)
        return [_canonical(r) for r in out]

    side, child = channel.split_side, channel.combined_child
    free = pair_momenta(total, n, window)
    parent_p = Fraction(row.members[side].p)
    # the child that leaves freely lands on the shared grid
    first_momenta = [parent_p - q for q in free] if child == 0 else free
    split_rows = apply_split(
        row, side, channel.split_rule, n,
        coupling=g, window=window, first_momenta=first_momenta, amplitude_rule=amplitude_rule,
    )
    fed = side + child
    other = 2 if side == 0 else 0
    return [
        _canonical(apply_combine(r, (fed, other), channel.combine_rule, coupling=g, amplitude_rule=amplitude_rule))
        for r in split_rows
    ]


def process_channels(
    obj: InteractionObject,
    channels: list[InteractionChannel],
    settings: InteractionSettings,
    amplitude_rule: AmplitudeRule = DEFAULT_AMPLITUDE_RULE,
) -> list[ChannelResult]:
    """Apply each channel's operator pair to every row of the object."""
    if not channels:
        raise ContractViolation("process_channels needs at least one channel")
    results = []
    for channel in channels:
        rows = [out for row in obj.rows for out in _run_channel(channel, row, settings, amplitude_rule)]
        results.append(ChannelResult(channel, tuple(rows)))
    return results


def group_key(row: PathRow) -> GroupKey:
    return tuple((m.ptype, m.sigma) for m in row.members)


def row_key(row: PathRow) -> tuple[Fraction, ...]:
    return tuple(Fraction(m.p) for m in row.members)


def merge_channels(results: list[ChannelResult], settings: InteractionSettings) -> list[MergedGroup]:
    """Signed row-wise sums per out group, pruned and renormalized.

    An empty list means the channels cancelled completely.
    """
    by_group: dict[GroupKey, dict[int, dict[tuple, PathRow]]] = defaultdict(dict)
    reference: dict[GroupKey, int] = {}
    for index, result in enumerate(results):
        for row in result.rows:
            key = group_key(row)
            reference.setdefault(key, result.channel.template)
            by_group[key].setdefault(index, {})
            table = by_group[key][index]
            rk = row_key(row)
            if rk in table:
                table[rk] = replace(table[rk], amplitude=table[rk].amplitude + row.amplitude)
            else:
                table[rk] = row

    merged = []
    for key in sorted(by_group, key=lambda k: tuple((type_index(t), s) for t, s in k)):
        tables = by_group[key]
        key_sets = {frozenset(t) for t in tables.values()}
        if len(key_sets) != 1:
            raise ContractViolation(f"channels disagree on the path set of out group {key}")

        sums: dict[tuple, PathRow] = {}
        for index, table in tables.items():
            sign = settings.sign_between(reference[key], results[index].channel.template)
            for rk, row in table.items():
                if rk in sums:
                    sums[rk] = replace(sums[rk], amplitude=sums[rk].amplitude + sign * row.amplitude)
                else:
                    sums[rk] = replace(row, amplitude=sign * row.amplitude)

        kept = tuple(sums[rk] for rk in sorted(sums) if abs(sums[rk].amplitude) >= settings.prune_threshold)
        if not kept:
            continue
        weight = math.fsum(abs(r.amplitude) ** 2 for r in kept)
        merged.append(MergedGroup(key, PwCollection(kept, source_weight=weight).normalized()))
    return merged


# ---------------------------------------------------------------------------
# Step 3: out particle waves
# ---------------------------------------------------------------------------
def select_out_group(groups: list[MergedGroup], rng: GeneratorState) -> MergedGroup:
    """Draw one out group by its pre-normalization weight (no draw for a single group)."""
    if not groups:
        raise ContractViolation("no out group to select")
    if len(groups) == 1:
        return groups[0]
    cumulative = np.cumsum([g.collection.source_weight for g in groups])
    index = int(np.searchsorted(cumulative, rng.uniform() * cumulative[-1], side="left"))
    return groups[min(index, len(groups) - 1)]


def _residual(obj: InteractionObject, collection: PwCollection) -> float:
    """Largest |E_in − E_out| over out rows, matched to in-rows by total momentum."""
    def energy(row: PathRow) -> float:
        return math.fsum(energy_of(float(m.p), PARTICLE_MASSES.get(m.ptype, 1.0)) for m in row.members)

    incoming = {sum(row_key(row)): energy(row) for row in obj.rows}
    worst = 0.0
    for row in collection.rows:
        e_in = incoming.get(sum(row_key(row)))
        if e_in is not None:
            worst = max(worst, abs(e_in - energy(row)))
    return worst


def _release_partner(state: SystemState, collapsed: str, cell: int, particles: dict) -> None:
    """Give the partner of a collapsed in-pw its own table built from the covering rows."""
    pw = state.particles.get(collapsed)
    if pw is None or pw.partner is None or pw.partner not in particles:
        return
    partner = particles[pw.partner]
    rows = [
        PathRow((row.members[partner.column],), row.amplitude)
        for row in pw.paths.rows
        if state.grid.cell_of(row.members[pw.column].x) == cell
    ]
    table = PwCollection(tuple(rows)).normalized()
    particles[partner.id] = replace(partner, paths=table, column=0, partner=None)


def generate_out_pw(state: SystemState, obj: InteractionObject, group: MergedGroup) -> tuple[SystemState, tuple[str, str]]:
    """Remove the in-objects and install two out particle waves sharing one table."""
    fields = {k: v for k, v in state.fields.items() if k not in obj.in_ids}
    particles = {k: v for k, v in state.particles.items() if k not in obj.in_ids}
    for collapsed in obj.in_ids:
        _release_partner(state, collapsed, obj.cell, particles)

    relativistic = any(
        state.particles[i].relativistic for i in obj.in_ids if i in state.particles
    )
    out_ids = (f"pw{state.next_id}", f"pw{state.next_id + 1}")
    table = group.collection
    for column, (out_id, (ptype, _)) in enumerate(zip(out_ids, group.key)):
        mass = PARTICLE_MASSES.get(ptype, 1.0)
        partner = out_ids[1 - column]
        particles[out_id] = ParticleWave(
            out_id, ptype, mass, table, column, relativistic and mass > 0, 0.0, partner
        )

    threshold = state.dynamics.interaction.occupancy_threshold
    new_state = replace(
        state,
        fields=fields,
        particles=particles,
        occupancy=build_occupancy(state.grid, fields, particles, threshold),
        next_id=state.next_id + 2,
    )
    return new_state, out_ids


def _record(state: SystemState, event: InteractionEvent) -> SystemState:
    return replace(state, events=(*state.events, event))


def perform_interaction(
    state: SystemState,
    first: str,
    second: str,
    cell: int,
    amplitude_rule: AmplitudeRule = DEFAULT_AMPLITUDE_RULE,
) -> SystemState:
    """Steps 1-3 for one selected (cell, pair) within the current tick."""
    state = replace(state, rng=state.rng.copy())
    settings = state.dynamics.interaction
    obj = form_interaction_object(state, first, second, cell)
    base = dict(
        tick=state.tick, t=state.t, cell=cell, position=obj.position,
        in_ids=obj.in_ids, in_types=obj.in_types,
    )
    names = f"({symbol(obj.in_types[0])}, {symbol(obj.in_types[1])})"

    channels = enumerate_channels(obj.in_types, rule_table(settings.rule_table), settings.equivalence)
    if not channels:
        logger.warning("[Interaction] No channel for %s at cell %d; state unchanged", names, cell)
        return _record(state, InteractionEvent(status=NO_CHANNEL, **base))

    results = process_channels(obj, channels, settings, amplitude_rule)
    groups = merge_channels(results, settings)
    if not groups:
        logger.warning("[Interaction] Channels cancelled for %s at cell %d; in-state restored", names, cell)
        return _record(state, InteractionEvent(status=CANCELLED, channels=len(channels), **base))

    group = select_out_group(groups, state.rng)
    new_state, out_ids = generate_out_pw(state, obj, group)
    event = InteractionEvent(
        status=PROCESSED,
        out_ids=out_ids,
        out_types=tuple(t for t, _ in group.key),
        channels=len(channels),
        rows=len(group.collection.rows),
        energy_residual=_residual(obj, group.collection),
        **base,
    )
    logger.info(
        "[Interaction] %s at cell %d → (%s) via %d channel(s), %d row(s)",
        names, cell, ", ".join(symbol(t) for t in event.out_types), len(channels), event.rows,
    )
    return _record(new_state, event)


def interact(state: SystemState) -> SystemState:
    """At most one interaction per tick."""
    candidates = [c for c in detect_interaction(state) if c.weight > 0]
    if not candidates:
        return state
    state = replace(state, rng=state.rng.copy())
    chosen = select_interaction_cell(candidates, state.rng)
    return perform_interaction(state, chosen.pair[0], chosen.pair[1], chosen.cell)

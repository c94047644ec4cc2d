"""
split() and combine() on path rows.

Momenta are exact fractions. A split emits N alternatives on a uniform
grid of momentum transfers, so every row conserves momentum exactly.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import replace
from fractions import Fraction
from typing import Protocol

from lagrange_ca.config import DEFAULT_COUPLING, DEFAULT_MOMENTUM_WINDOW
from lagrange_ca.engine.objects import PathMember, PathRow
from lagrange_ca.errors import ContractViolation
from lagrange_ca.interaction.rules import COMBINE, SPLIT, VertexRule, split_spins


class AmplitudeRule(Protocol):
    def split(self, amplitude: complex, rule: VertexRule, granularity: int, coupling: float) -> complex: ...

    def combine(self, amplitude: complex, rule: VertexRule, coupling: float) -> complex: ...


class UniformCouplingRule:
    """Coupling per vertex; a split spreads it uniformly over its N alternatives."""

    def split(self, amplitude: complex, rule: VertexRule, granularity: int, coupling: float) -> complex:
        return amplitude * coupling * rule.coupling_scale / math.sqrt(granularity)

    def combine(self, amplitude: complex, rule: VertexRule, coupling: float) -> complex:
        return amplitude * coupling * rule.coupling_scale


DEFAULT_AMPLITUDE_RULE = UniformCouplingRule()


def transfer_grid(total: Fraction, granularity: int, window: Fraction = DEFAULT_MOMENTUM_WINDOW) -> list[Fraction]:
    """q_j = −Q + (2j+1)·Q/N with Q = |total| + window, j = 0..N−1."""
    if granularity < 1:
        raise ValueError("path granularity must be at least 1")
    span = abs(total) + window
    return [-span + Fraction(2 * j + 1) * span / granularity for j in range(granularity)]


def pair_momenta(total: Fraction, granularity: int, window: Fraction = DEFAULT_MOMENTUM_WINDOW) -> list[Fraction]:
    """First-member momenta total/2 + q_j; the partner carries total minus that."""
    return [total / 2 + q for q in transfer_grid(total, granularity, window)]


def apply_split(
    row: PathRow,
    slot: int,
    rule: VertexRule,
    granularity: int,
    *,
    coupling: float = DEFAULT_COUPLING,
    window: Fraction = DEFAULT_MOMENTUM_WINDOW,
    first_momenta: Sequence[Fraction] | None = None,
    amplitude_rule: AmplitudeRule = DEFAULT_AMPLITUDE_RULE,
) -> list[PathRow]:
    """Replace row.members[slot] by the rule's two children, once per grid point.

    Without `first_momenta` the first child takes p/2 + q_j around the
    parent's momentum p.
    """
    if rule.kind != SPLIT:
        raise ContractViolation(f"{rule.name} is not a split rule")
    parent = row.members[slot]
    if parent.ptype != rule.inputs[0]:
        raise ContractViolation(f"{rule} cannot split a {parent.ptype}")
    p = Fraction(parent.p)
    if first_momenta is None:
        first_momenta = pair_momenta(p, granularity, window)
    elif len(first_momenta) != granularity:
        raise ContractViolation("momentum grid size differs from the path granularity")

    sigma_first, sigma_second = split_spins(parent.ptype, parent.sigma)
    amplitude = amplitude_rule.split(row.amplitude, rule, granularity, coupling)
    rows = []
    for k in first_momenta:
        first = PathMember(rule.outputs[0], parent.x, k, sigma_first, parent.t)
        second = PathMember(rule.outputs[1], parent.x, p - k, sigma_second, parent.t)
        members = (*row.members[:slot], first, second, *row.members[slot + 1:])
        rows.append(PathRow(members, amplitude))
    return rows


def apply_combine(
    row: PathRow,
    slots: tuple[int, int],
    rule: VertexRule,
    *,
    coupling: float = DEFAULT_COUPLING,
    amplitude_rule: AmplitudeRule = DEFAULT_AMPLITUDE_RULE,
) -> PathRow:
    """Fuse two members into the rule's output, placed at the lower slot."""
    if rule.kind != COMBINE:
        raise ContractViolation(f"{rule.name} is not a combine rule")
    i, j = slots
    a, b = row.members[i], row.members[j]
    if not rule.accepts(a.ptype, b.ptype):
        raise ContractViolation(f"{rule} cannot combine {a.ptype} with {b.ptype}")

    lead = a if a.ptype == rule.inputs[0] else b
    fused = PathMember(rule.outputs[0], lead.x, Fraction(a.p) + Fraction(b.p), lead.sigma, lead.t)
    low, high = sorted((i, j))
    members = list(row.members)
    members[low] = fused
    del members[high]
    return replace(row, members=tuple(members), amplitude=amplitude_rule.combine(row.amplitude, rule, coupling))

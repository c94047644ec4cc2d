"""
Interaction channels.

A channel pairs exactly one split with one combine and maps two in-types
to two out-types. Five templates exist:

  1. combine(a, b) → c, then split(c)
  2. split(a) → (a1, a2), combine(a1, b)      out: a2, c
  3. split(a) → (a1, a2), combine(a2, b)      out: a1, c
  4. split(b) → (b1, b2), combine(a, b1)      out: c, b2
  5. split(b) → (b1, b2), combine(a, b2)      out: c, b1

Templates 2-5 may only split an in-particle when the rule allows an
on-shell parent.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

from lagrange_ca.config import DEFAULT_EQUIVALENCE
from lagrange_ca.errors import UnknownParticleTypeError
from lagrange_ca.interaction.rules import COMBINE, SPLIT, VertexRule, symbol, vocabulary

logger = logging.getLogger(__name__)

TEMPLATES = (1, 2, 3, 4, 5)
BINDING = "binding"
TOPOLOGY = "topology"
EQUIVALENCES = (BINDING, TOPOLOGY)


@dataclass(frozen=True)
class InteractionChannel:
    template: int
    in_types: tuple[str, str]
    split_rule: VertexRule
    combine_rule: VertexRule
    out_types: tuple[str, str]
    # which split child feeds the combine (0 or 1); unused by template 1
    combined_child: int = 0

    @property
    def split_side(self) -> int | None:
        """Index of the in-particle that is split (None for template 1)."""
        return {1: None, 2: 0, 3: 0, 4: 1, 5: 1}[self.template]

    def binding_key(self) -> tuple:
        """Rule sequence with the operand roles each rule is bound to."""
        if self.template == 1:
            return (
                ("combine", self.combine_rule.name, "in0", "in1"),
                ("split", self.split_rule.name, "virtual"),
            )
        side = self.split_side
        child_type = self.split_rule.outputs[self.combined_child]
        return (
            ("split", self.split_rule.name, f"in{side}"),
            ("combine", self.combine_rule.name, f"child-of-in{side}:{child_type}", f"in{1 - side}"),
        )

    def topology_key(self) -> frozenset:
        """Multiset of vertices, each identified by the external legs it carries."""
        a, b = self.in_types
        if self.template == 1:
            vertices = [
                (("in", a), ("in", b)),
                tuple(("out", t) for t in self.split_rule.outputs),
            ]
        else:
            side = self.split_side
            split_in = self.in_types[side]
            other_in = self.in_types[1 - side]
            free_child = self.split_rule.outputs[1 - self.combined_child]
            vertices = [
                (("in", split_in), ("out", free_child)),
                (("in", other_in), ("out", self.combine_rule.outputs[0])),
            ]
        return frozenset(Counter(tuple(sorted(v)) for v in vertices).items())

    def __str__(self) -> str:
        split_text = str(self.split_rule)
        combine_text = str(self.combine_rule)
        if self.template == 1:
            return f"{combine_text}; {split_text}"
        return f"{split_text}; {combine_text}"

    def describe(self) -> str:
        outs = ", ".join(symbol(t) for t in self.out_types)
        return f"[{self.template}] {self} ⇒ ({outs})"


def _splits(rules, parent: str, *, in_particle: bool) -> list[VertexRule]:
    return [
        r for r in rules
        if r.enabled and r.kind == SPLIT and r.inputs[0] == parent
        and (r.on_shell_parent or not in_particle)
    ]


def _combines(rules, first: str, second: str) -> list[VertexRule]:
    return [r for r in rules if r.enabled and r.kind == COMBINE and r.accepts(first, second)]


def instantiate_templates(in_types: tuple[str, str], rules) -> list[InteractionChannel]:
    """Every template binding allowed by the rule table, before deduplication."""
    a, b = in_types
    channels: list[InteractionChannel] = []

    for combine in _combines(rules, a, b):
        virtual = combine.outputs[0]
        for split in _splits(rules, virtual, in_particle=False):
            channels.append(InteractionChannel(1, in_types, split, combine, split.outputs))

    for template, side, child in ((2, 0, 0), (3, 0, 1), (4, 1, 0), (5, 1, 1)):
        split_in, other_in = in_types[side], in_types[1 - side]
        for split in _splits(rules, split_in, in_particle=True):
            fed, free = split.outputs[child], split.outputs[1 - child]
            for combine in _combines(rules, fed, other_in):
                produced = combine.outputs[0]
                outs = (free, produced) if side == 0 else (produced, free)
                channels.append(InteractionChannel(template, in_types, split, combine, outs, child))
    return channels


def enumerate_channels(
    in_types: tuple[str, str],
    rules: tuple[VertexRule, ...],
    equivalence: str = DEFAULT_EQUIVALENCE,
) -> list[InteractionChannel]:
    """Channels for an in-type pair, deduplicated under the equivalence relation."""
    known = vocabulary(rules)
    for ptype in in_types:
        if ptype not in known:
            raise UnknownParticleTypeError(f"particle type '{ptype}' is not in the rule table")
    if equivalence not in EQUIVALENCES:
        raise ValueError(f"unknown channel equivalence '{equivalence}'")

    seen: set = set()
    channels: list[InteractionChannel] = []
    for channel in instantiate_templates(tuple(in_types), rules):
        key = channel.binding_key() if equivalence == BINDING else channel.topology_key()
        if key in seen:
            continue
        seen.add(key)
        channels.append(channel)

    logger.debug(
        "%d channel(s) for (%s, %s) under %s equivalence",
        len(channels), symbol(in_types[0]), symbol(in_types[1]), equivalence,
    )
    return channels

"""
Channel listing for a pair of particle types.

Provides:
  - list_channels() – every channel two types can take under a rule table
"""
from __future__ import annotations

import logging

from lagrange_ca.config import DEFAULT_EQUIVALENCE, DEFAULT_RULE_TABLE
from lagrange_ca.interaction.channels import enumerate_channels
from lagrange_ca.interaction.rules import canonical_type, rule_table, symbol

logger = logging.getLogger(__name__)


def list_channels(
    first: str,
    second: str,
    rules: str = DEFAULT_RULE_TABLE,
    equivalence: str = DEFAULT_EQUIVALENCE,
) -> dict:
    """
    Channels for (first, second); names may be full type names or symbols.

    Raises UnknownParticleTypeError for a type outside the rule table and
    ValueError for an unknown table or equivalence.
    """
    in_types = (canonical_type(first), canonical_type(second))
    channels = enumerate_channels(in_types, rule_table(rules), equivalence)
    logger.info(
        "[Channels] (%s, %s) under %s/%s → %d channel(s)",
        symbol(in_types[0]), symbol(in_types[1]), rules, equivalence, len(channels),
    )
    return {
        "in_types": list(in_types),
        "rules": rules,
        "equivalence": equivalence,
        "channels": [str(channel) for channel in channels],
        "details": [
            {
                "template": channel.template,
                "split": str(channel.split_rule),
                "combine": str(channel.combine_rule),
                "out_types": list(channel.out_types),
                "text": channel.describe(),
            }
            for channel in channels
        ],
    }

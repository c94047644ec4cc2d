"""
Seeded generator state.

Wraps numpy's PCG64 bit generator: a fixed, published algorithm, so a
seed reproduces the same draw sequence on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class GeneratorState:
    seed: int
    generator: np.random.Generator = field(repr=False)
    draws: int = 0

    @classmethod
    def from_seed(cls, seed: int) -> "GeneratorState":
        return cls(seed, np.random.Generator(np.random.PCG64(seed)))

    def uniform(self) -> float:
        """One draw from [0, 1)."""
        self.draws += 1
        return float(self.generator.random())

    def copy(self) -> "GeneratorState":
        bit_generator = np.random.PCG64(self.seed)
        bit_generator.state = self.generator.bit_generator.state
        return GeneratorState(self.seed, np.random.Generator(bit_generator), self.draws)

    def export(self) -> dict:
        state = self.generator.bit_generator.state
        return {
            "seed": self.seed,
            "draws": self.draws,
            "algorithm": state["bit_generator"],
            "state": int(state["state"]["state"]),
            "inc": int(state["state"]["inc"]),
        }

from pathlib import Path

import pytest

from lagrange_ca.engine.setup import init_state
from lagrange_ca.scenario.loader import parse_scenario_text

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIOS


@pytest.fixture
def make_state():
    """Scenario text → initial SystemState."""

    def build(text: str):
        return init_state(parse_scenario_text(text))

    return build

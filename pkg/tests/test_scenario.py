import hashlib
import io

import pytest

from lagrange_ca.engine.loop import StopCondition, run
from lagrange_ca.engine.setup import derive_equation, init_state, resolve_timestep
from lagrange_ca.errors import ScenarioError
from lagrange_ca.scenario.loader import compute_digest, load_scenario, parse_scenario_text
from lagrange_ca.scenario.validator import ERROR, WARNING, has_errors, validate_scenario
from lagrange_ca.scenario.writer import EVENT_HEADER, PLOT_HEADER, SNAPSHOT_HEADER, write_record, write_scenario

WAVE = """
[lagrangian]
source = 1/2*d(psi,t)^2 - 1/2*v^2*d(psi,x)^2

[constants]
v = 1

[grid]
extent = 64
dx = 1

[run]
dt = {dt}
ticks = 10
{extra}

[field psi]
profile = gaussian
center = 32
width = 4
"""

SCHRODINGER = """
[lagrangian]
eom = d(psi,t) = i*hbar/(2*m)*d2(psi,x)

[constants]
m = 1

[grid]
extent = 64
dx = 0.1

[run]
dt = {dt}
ticks = 10

[field packet]
width = 1
center = 3
"""


def _diagnostics(text):
    scenario = parse_scenario_text(text, "test.scn")
    return validate_scenario(scenario, derive_equation(scenario))


def _messages(diagnostics, level):
    return [d.message for d in diagnostics if d.level == level]


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------
def test_load_oscillator_file(scenario_dir):
    scenario = load_scenario(scenario_dir / "oscillator.scn")
    assert scenario.constants == {"m": 1.0, "k": 1.0}
    (ball,) = scenario.particles
    assert (ball.id, ball.x, ball.velocity) == ("ball", 1.0, 0.0)
    assert scenario.run.ticks == 1000
    assert scenario.run.seed == 0
    assert scenario.digest == compute_digest((scenario_dir / "oscillator.scn").read_bytes())


def test_values_keep_their_line(scenario_dir):
    path = scenario_dir / "oscillator.scn"
    scenario = load_scenario(path)
    assert scenario.where("particle ball.x") == (str(path), 15)
    assert scenario.where("run.dt") == (str(path), 10)


def test_multiline_lagrangian_is_joined(scenario_dir):
    scenario = load_scenario(scenario_dir / "class1_wave.scn")
    assert "\n" in scenario.lagrangian.source
    assert derive_equation(scenario).kind == "field"


def test_commas_inside_lagrangian_are_kept():
    text = (
        "[lagrangian]\nsource = 1/2*m*d(x,t)^2 - V(x)\n"
        "[potential]\nkind = harmonic\ncenter = 2\nstrength = 1\n"
        "[field f]\nsource = a, b\n"
        "[grid]\nextent = 8, 8\ndx = 1\n"
    )
    scenario = parse_scenario_text(text)
    assert scenario.lagrangian.source == "1/2*m*d(x,t)^2 - V(x)"
    assert scenario.potential.center == 2.0
    assert scenario.fields[0].source == ["a", "b"]
    assert scenario.grid.extent == [8, 8]


def test_digest_is_truncated_sha256():
    data = b"[lagrangian]\nsource = 1/2*m*d(x,t)^2\n"
    assert compute_digest(data) == hashlib.sha256(data).hexdigest()[:16]


def test_fields_need_a_grid():
    text = "[lagrangian]\nsource = 1/2*d(psi,t)^2\n[field f]\nprofile = constant\n"
    with pytest.raises(ScenarioError):
        parse_scenario_text(text)


def test_malformed_line_reports_its_number():
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text("[lagrangian]\nsource = 1/2*m*d(x,t)^2\nthis is not a key\n", "bad.scn")
    (diagnostic,) = info.value.diagnostics
    assert (diagnostic.file, diagnostic.line) == ("bad.scn", 3)


def test_invalid_value_points_at_its_line():
    text = "[lagrangian]\nsource = 1/2*m*d(x,t)^2\n[run]\ndt = -1\nticks = 2\n"
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "neg.scn")
    assert info.value.diagnostics[0].line == 4


def test_unknown_key_only_warns():
    text = "[lagrangian]\nsource = 1/2*m*d(x,t)^2\n[run]\nticks = 2\ncolour = blue\n"
    scenario = parse_scenario_text(text)
    (warning,) = scenario.warnings
    assert warning.level == "warning" and warning.line == 5


def test_duplicate_ids_are_rejected():
    text = "[lagrangian]\nsource = 1/2*m*d(x,t)^2\n[particle a]\nx = 1\n[particle a]\nx = 2\n"
    with pytest.raises(ScenarioError):
        parse_scenario_text(text)


@pytest.mark.parametrize(
    "name",
    ["oscillator.scn", "wave_pulse.scn", "class1_wave.scn", "schrodinger_packet.scn", "electron_photon.scn"],
)
def test_written_scenario_loads_back_equal(scenario_dir, name):
    scenario = load_scenario(scenario_dir / name)
    sink = io.StringIO()
    write_scenario(scenario, sink)
    again = parse_scenario_text(sink.getvalue())
    assert again.model_dump() == scenario.model_dump()


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------
def test_cfl_violation_is_an_error():
    diagnostics = _diagnostics(WAVE.format(dt=2, extra=""))
    (message,) = _messages(diagnostics, ERROR)
    assert "CFL" in message
    assert [d.line for d in diagnostics if d.level == ERROR] == [13]


def test_allow_unstable_downgrades_cfl():
    diagnostics = _diagnostics(WAVE.format(dt=2, extra="allow_unstable = true"))
    assert not has_errors(diagnostics)
    assert any("CFL" in m for m in _messages(diagnostics, WARNING))


def test_stable_wave_passes():
    assert _diagnostics(WAVE.format(dt=0.5, extra="")) == []


def test_schrodinger_ratio_guard():
    # ħΔt/(2mΔx²) = 0.05 is within the guard, 0.2 is not
    assert _messages(_diagnostics(SCHRODINGER.format(dt=0.001)), WARNING) == []
    warned = _messages(_diagnostics(SCHRODINGER.format(dt=0.004)), WARNING)
    assert len(warned) == 1 and "0.2" in warned[0]


def test_unknown_interaction_object(scenario_dir):
    text = (scenario_dir / "electron_photon.scn").read_text().replace("pairs = e1:g1", "pairs = e1:ghost")
    errors = _messages(_diagnostics(text), ERROR)
    assert any("ghost" in m for m in errors)


def test_implicit_pairs_warn_about_untyped_objects():
    text = (
        "[lagrangian]\nsource = 1/2*m*d(x,t)^2\n[grid]\nextent = 32\ndx = 1\n[run]\ndt = 0.5\nticks = 2\n"
        "[particle e1]\ntype = electron\nx = 10\n[particle q1]\nx = 12\n[interaction]\ngranularity = 2\n"
    )
    diagnostics = _diagnostics(text)
    assert not has_errors(diagnostics)
    assert any("'q1'" in m and "will not interact" in m for m in _messages(diagnostics, WARNING))


def test_missing_timestep_for_particles():
    text = "[lagrangian]\nsource = 1/2*m*d(x,t)^2\n[run]\nticks = 2\n[particle p]\nx = 0\n"
    errors = _messages(_diagnostics(text), ERROR)
    assert errors == ["run.dt is required for this scenario"]


def test_potential_needs_a_binding():
    text = "[lagrangian]\nsource = 1/2*m*d(x,t)^2 - V(x)\n[run]\ndt = 0.1\nticks = 2\n[particle p]\nx = 0\n"
    errors = [d for d in _diagnostics(text) if d.level == ERROR]
    assert len(errors) == 1
    assert "[potential]" in errors[0].message and errors[0].line == 2
    assert _messages(_diagnostics(text.replace("[run]", "[constants]\nF = 2\n[run]")), ERROR) == []


def test_default_timestep_from_cfl():
    scenario = parse_scenario_text(WAVE.format(dt=0.5, extra="").replace("dt = 0.5\n", ""))
    assert resolve_timestep(scenario, derive_equation(scenario)) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------
def test_record_files(tmp_path, scenario_dir):
    scenario = load_scenario(scenario_dir / "free_particle.scn")
    record = run(init_state(scenario), StopCondition(max_ticks=20), snapshot_every=10, digest=scenario.digest)
    written = write_record(record, tmp_path)
    assert sorted(p.name for p in written) == ["events.csv", "plot.csv", "record.json", "snapshots.csv"]

    snapshot_lines = (tmp_path / "snapshots.csv").read_text().splitlines()
    assert snapshot_lines[0] == ",".join(SNAPSHOT_HEADER)
    assert len(snapshot_lines) == 1 + 3
    assert (tmp_path / "plot.csv").read_text().splitlines()[0] == ",".join(PLOT_HEADER)
    assert (tmp_path / "events.csv").read_text().splitlines() == [",".join(EVENT_HEADER)]

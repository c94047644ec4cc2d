import math

import numpy as np
import pytest

from lagrange_ca.engine.grid import CellGrid
from lagrange_ca.engine.kinematics import proper_timestep, velocity_of
from lagrange_ca.engine.loop import StopCondition, run, tick
from lagrange_ca.engine.objects import PathMember, PathRow, PwCollection
from lagrange_ca.engine.rng import GeneratorState
from lagrange_ca.engine.state import map_object_to_cells, objects_at_cell, occupancy_is_consistent
from lagrange_ca.errors import InputError, UnknownObjectError

TWO_PARTICLES = """
[lagrangian]
source = 1/2*m*d(x,t)^2

[grid]
extent = 20
dx = 1

[run]
dt = 0.5
ticks = 10

[particle a]
x = 3
momentum = 1

[particle b]
x = 3.2
momentum = 0
paths = 2
spread = 4
"""

OSCILLATOR = """
[lagrangian]
source = 1/2*m*d(x,t)^2 - 1/2*k*x^2

[constants]
m = 1
k = 1

[run]
dt = 0.006283185307179587
ticks = 10000

[particle ball]
x = 1
velocity = 0
"""

CONSTANT_FORCE = """
[lagrangian]
source = 1/2*m*d(x,t)^2 + F*x

[constants]
m = 1
F = 2

[run]
dt = 0.001
ticks = 1000

[particle p]
x = 0
velocity = 0
"""


def _member(state, pid):
    return state.particles[pid].members()[0]


# ---------------------------------------------------------------------------
# Grid geometry
# ---------------------------------------------------------------------------
def test_cell_lookup_wraps_on_periodic_grid():
    grid = CellGrid((10,), 1.0)
    assert grid.cell_of(3.4) == 3
    assert grid.cell_of(3.6) == 4
    assert grid.cell_of(-0.6) == 9
    assert grid.cell_of(10.2) == 0


def test_fixed_grid_reflects_particles():
    grid = CellGrid((10,), 1.0, "fixed")
    assert grid.confine(-0.5) == (0.5, True)
    assert grid.confine(9.5) == (8.5, True)
    assert grid.confine(4.0) == (4.0, False)


def test_grid_rejects_tiny_extent():
    with pytest.raises(ValueError):
        CellGrid((2,), 1.0)


# ---------------------------------------------------------------------------
# Occupancy
# ---------------------------------------------------------------------------
def test_occupancy_indexes_every_path(make_state):
    state = make_state(TWO_PARTICLES)
    assert objects_at_cell(3, state) == frozenset({"a"})
    assert objects_at_cell(1, state) == frozenset({"b"})
    assert objects_at_cell(5, state) == frozenset({"b"})
    assert map_object_to_cells("b", state) == frozenset({1, 5})
    assert occupancy_is_consistent(state)


def test_occupancy_stays_consistent_after_ticks(make_state):
    state = make_state(TWO_PARTICLES)
    for _ in range(5):
        state = tick(state)
        assert occupancy_is_consistent(state)
    assert objects_at_cell(state.grid.cell_of(3 + 2.5), state) >= {"a"}


def test_cell_outside_grid_is_rejected(make_state):
    state = make_state(TWO_PARTICLES)
    with pytest.raises(UnknownObjectError):
        objects_at_cell(20, state)
    with pytest.raises(UnknownObjectError):
        state.object("nobody")


# ---------------------------------------------------------------------------
# Kinematics
# ---------------------------------------------------------------------------
def test_proper_time_matches_lorentz_factor():
    assert proper_timestep(0.0, 1.0, 0.1, relativistic=True) == pytest.approx(0.1)
    # p = √3·mc gives γ = 2
    assert proper_timestep(math.sqrt(3), 1.0, 0.1, relativistic=True) == pytest.approx(0.05)
    assert proper_timestep(math.sqrt(3), 1.0, 0.1, relativistic=False) == 0.1


def test_massless_proper_time_is_rejected():
    with pytest.raises(InputError):
        proper_timestep(1.0, 0.0, 0.1, relativistic=True)


def test_relativistic_velocity_stays_below_c():
    assert velocity_of(1e6, 1.0, relativistic=True) < 1.0
    assert velocity_of(-2.0, 0.0, relativistic=False) == -1.0


# ---------------------------------------------------------------------------
# Tick semantics
# ---------------------------------------------------------------------------
def test_tick_returns_new_state_and_leaves_old_one(make_state):
    state = make_state(TWO_PARTICLES)
    after = tick(state)
    assert state.tick == 0 and state.t == 0.0
    assert after.tick == 1 and after.t == pytest.approx(0.5)
    assert _member(state, "a").x == 3
    assert _member(after, "a").x == pytest.approx(3.5)


def test_vacuum_grid_ticks(make_state):
    text = "[lagrangian]\nsource = 1/2*m*d(x,t)^2\n[grid]\nextent = 8\ndx = 1\n[run]\ndt = 0.1\nticks = 3\n"
    state = make_state(text)
    for _ in range(3):
        state = tick(state)
    assert state.tick == 3
    assert state.t == pytest.approx(0.3)
    assert state.occupancy == {}


def test_free_particle_moves_uniformly(make_state):
    state = make_state(TWO_PARTICLES)
    for _ in range(4):
        state = tick(state)
    assert _member(state, "a").x == pytest.approx(5.0)
    assert float(_member(state, "a").p) == pytest.approx(1.0)


def test_constant_force_from_rest(make_state):
    state = make_state(CONSTANT_FORCE)
    record = run(state, StopCondition(max_ticks=1000), snapshot_every=1000)
    x = _member(record.final, "p").x
    assert record.final.t == pytest.approx(1.0)
    assert abs(x - 1.0) <= 5e-3


def test_oscillator_zero_crossings_and_energy(make_state):
    state = make_state(OSCILLATOR)
    dt = state.dynamics.dt
    xs, vs = [], []
    for _ in range(10000):
        state = tick(state)
        m = _member(state, "ball")
        xs.append(m.x)
        vs.append(float(m.p))

    xs = np.array(xs)
    vs = np.array(vs)
    times = dt * np.arange(1, len(xs) + 1)
    crossings = []
    for i in np.flatnonzero(np.sign(xs[:-1]) != np.sign(xs[1:])):
        frac = xs[i] / (xs[i] - xs[i + 1])
        crossings.append(times[i] + frac * dt)
    gaps = np.diff(crossings)
    assert len(crossings) >= 19
    assert np.all(np.abs(gaps - math.pi) <= 2 * dt)

    energy = 0.5 * vs**2 + 0.5 * xs**2
    assert np.max(np.abs(energy - 0.5)) / 0.5 < 0.01


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------
def test_snapshot_count_follows_cadence(make_state):
    state = make_state(TWO_PARTICLES)
    record = run(state, StopCondition(max_ticks=10), snapshot_every=3)
    assert record.ticks == 10
    assert [s.tick for s in record.snapshots] == [0, 3, 6, 9]
    assert len(record.snapshots) == 10 // 3 + 1


def test_run_stops_at_max_time(make_state):
    state = make_state(TWO_PARTICLES)
    record = run(state, StopCondition(max_time=2.0))
    assert record.ticks == 4
    assert record.final.t == pytest.approx(2.0)


def test_stop_condition_needs_a_limit():
    with pytest.raises(InputError):
        StopCondition()


def test_bad_snapshot_cadence(make_state):
    with pytest.raises(InputError):
        run(make_state(TWO_PARTICLES), StopCondition(max_ticks=1), snapshot_every=0)


# ---------------------------------------------------------------------------
# Generator state
# ---------------------------------------------------------------------------
def test_generator_copy_replays_draws():
    rng = GeneratorState.from_seed(11)
    rng.uniform()
    twin = rng.copy()
    assert [rng.uniform() for _ in range(5)] == [twin.uniform() for _ in range(5)]
    assert rng.draws == 6


def test_same_seed_same_sequence():
    a = GeneratorState.from_seed(3)
    b = GeneratorState.from_seed(3)
    assert [a.uniform() for _ in range(10)] == [b.uniform() for _ in range(10)]
    assert a.export() == b.export()


def _table(*amplitudes):
    return PwCollection(tuple(PathRow((PathMember("electron", float(j), 0.0, 1),), a) for j, a in enumerate(amplitudes)))


def test_normalized_scales_to_unit_weight():
    table = _table(3.0, 4.0j).normalized()
    assert [r.amplitude for r in table.rows] == pytest.approx([0.6, 0.8j])
    assert table.norm() == pytest.approx(1.0)


def test_unit_table_is_left_untouched():
    table = _table(0.6, 0.8 + 1e-12)
    assert table.normalized() is table

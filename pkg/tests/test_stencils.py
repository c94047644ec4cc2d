import math
from dataclasses import replace

import numpy as np
import pytest

from lagrange_ca.dsl import euler_lagrange, parse, parse_equation
from lagrange_ca.engine.loop import tick
from lagrange_ca.engine.profiles import build_profile
from lagrange_ca.errors import NoTemplateError
from lagrange_ca.scenario.models import FieldSpec
from lagrange_ca.stencils.differences import spatial_derivatives
from lagrange_ca.stencils.program import FIELD_1ST_T, FIELD_2ND_T, PARTICLE_2ND, compile_stencil

WAVE_TEMPLATE = """
[lagrangian]
source = 1/2*d(psi,t)^2 - 1/2*v^2*d(psi,x)^2

[constants]
v = 1

[grid]
extent = {n}
dx = {dx}

[run]
dt = {dt}
ticks = 1

[field pulse]
profile = gaussian
center = {center}
width = {width}
init = shifted_right
"""

PACKET = """
[lagrangian]
eom = d(psi,t) = i*hbar/(2*m)*d2(psi,x) - i/hbar*V(x)*psi

[constants]
m = 1

[potential]
kind = zero

[grid]
extent = 512
dx = 0.1

[run]
dt = 0.0002
ticks = 1

[field packet]
profile = gaussian
center = 20
width = 2
wavenumber = 2
amplitude = 0.5311259660135985
"""

WELL = """
[lagrangian]
eom = d(psi,t) = i*hbar/(2*m)*d2(psi,x)

[constants]
m = 1

[grid]
extent = 32
dx = {dx}
boundary = fixed

[run]
dt = {dt}
ticks = 1

[field ground]
profile = eigenmode
"""


def _wave(make_state, n=1024, dx=1.0, dt=0.5, center=256, width=20):
    return make_state(WAVE_TEMPLATE.format(n=n, dx=dx, dt=dt, center=center, width=width))


def _advance(state, steps):
    for _ in range(steps):
        state = tick(state)
    return state


def _expected_x(state, fid):
    psi = state.fields[fid].psi
    x = state.grid.coordinates[0]
    density = np.abs(psi) ** 2
    return float(np.sum(x * density) / np.sum(density))


# ---------------------------------------------------------------------------
# Stencil compilation
# ---------------------------------------------------------------------------
def test_families_follow_time_order():
    assert compile_stencil(parse_equation("d2(x,t) = -k/m*x")).family == PARTICLE_2ND
    assert compile_stencil(parse_equation("d2(psi,t) = v^2*d2(psi,x)")).family == FIELD_2ND_T
    schrodinger = compile_stencil(parse_equation("d(psi,t) = i*hbar/(2*m)*d2(psi,x)"))
    assert schrodinger.family == FIELD_1ST_T
    assert len(schrodinger.steps) == 6


def test_wave_schedule_reads_in_difference_units():
    program = compile_stencil(euler_lagrange(parse("1/2*d(psi,t)^2 - 1/2*v^2*d(psi,x)^2")))
    assert [step.number for step in program.steps] == [1, 2, 3, 4, 5]
    assert program.steps[0].text == "t(j+1) = t(j) + Δt"
    assert program.steps[2].text.startswith("Δ²ψdx = ")
    assert program.steps[3].text == "Δ²ψdt = v²·Δ²ψdx"
    assert program.describe()[4] == "5. ψ(t+Δt) = Δ²ψdt·Δt·Δt + 2ψ(t) − ψ(t−Δt)"


def test_schrodinger_schedule_steps():
    program = compile_stencil(parse_equation("d(psi,t) = i*hbar/(2*m)*d2(psi,x)"))
    texts = [step.text for step in program.steps]
    assert texts[3].startswith("Δψdt = ") and "Δ²ψdx" in texts[3] and "ħ" in texts[3]
    assert texts[4].startswith("Δψdt = Δψdt + Δ²ψdt·Δt")
    assert texts[5] == "ψ(t+Δt) = ψ(t) + Δψdt·Δt"


def test_first_order_particle_has_no_template():
    with pytest.raises(NoTemplateError):
        compile_stencil(parse_equation("d(x,t) = x"))


# ---------------------------------------------------------------------------
# Spatial differences
# ---------------------------------------------------------------------------
def test_central_differences_on_sine():
    n = 200
    dx = 2 * math.pi / n
    x = np.arange(n) * dx
    first, second = spatial_derivatives(np.sin(x), dx, "periodic")
    np.testing.assert_allclose(first, np.cos(x), atol=dx**2)
    np.testing.assert_allclose(second, -np.sin(x), atol=dx**2)


def test_fixed_boundary_pins_ghost_cells():
    lattice = np.ones(5)
    first, second = spatial_derivatives(lattice, 0.5, "fixed")
    assert second[0] == pytest.approx(-1 / 0.25)
    assert second[2] == 0
    assert first[0] == pytest.approx(1.0)
    assert first[-1] == pytest.approx(-1.0)


def test_laplacian_sums_axes_in_2d():
    lattice = np.zeros((5, 5))
    lattice[2, 2] = 1.0
    _, second = spatial_derivatives(lattice, 1.0, "periodic")
    assert second[2, 2] == -4
    assert second[1, 2] == second[2, 1] == 1


# ---------------------------------------------------------------------------
# Second-order fields
# ---------------------------------------------------------------------------
def test_wave_pulse_transport(make_state):
    state = _advance(_wave(make_state), 100)
    peak = int(np.argmax(np.abs(state.fields["pulse"].psi)))
    # d'Alembert: the pulse moves v·t = 50 cells
    assert abs(peak - 306) <= 1


def _discrete_energy(state, fid, v=1.0):
    f = state.fields[fid]
    dt, dx = state.dynamics.dt, state.grid.dx
    now, before = f.psi.real, f.prev.real
    kinetic = 0.5 * np.sum(((now - before) / dt) ** 2)
    potential = 0.5 * v**2 * np.sum((np.roll(now, -1) - now) * (np.roll(before, -1) - before)) / dx**2
    return (kinetic + potential) * dx


def test_wave_energy_is_conserved(make_state):
    state = _advance(_wave(make_state), 1)
    start = _discrete_energy(state, "pulse")
    state = _advance(state, 1000)
    assert abs(_discrete_energy(state, "pulse") - start) / start < 0.005


def _transport_error(make_state, n, dx):
    length = n * dx
    steps = int(round(32 / (0.5 * dx)))
    state = _advance(_wave(make_state, n=n, dx=dx, dt=0.5 * dx, center=length / 2, width=8), steps)
    spec = FieldSpec(id="pulse", profile="gaussian", center=[length / 2], width=8, init="shifted_right")
    exact = build_profile(spec, state.grid, offset=state.t)
    return math.sqrt(np.sum(np.abs(state.fields["pulse"].psi - exact) ** 2) * dx)


def test_halving_resolution_reduces_error(make_state):
    coarse = _transport_error(make_state, 256, 1.0)
    fine = _transport_error(make_state, 512, 0.5)
    assert coarse / fine >= 3


def test_source_term_drives_third_field(make_state):
    text = """
[lagrangian]
source = 1/2*d(psi,t)^2 - 1/2*v^2*d(psi,x)^2

[constants]
v = 1

[grid]
extent = 16
dx = 1

[run]
dt = 0.5
ticks = 1

[field a]
profile = constant
value = 1

[field b]
profile = constant
value = 2

[field out]
profile = constant
value = 0
source = a, b
source_coupling = 0.5
"""
    state = tick(make_state(text))
    # Δ²ψdt = b·ψa·ψb = 1, so ψ(Δt) = Δt² on a flat lattice
    np.testing.assert_allclose(state.fields["out"].psi.real, 0.25)
    np.testing.assert_allclose(state.fields["a"].psi.real, 1.0)


# ---------------------------------------------------------------------------
# First-order fields
# ---------------------------------------------------------------------------
def test_packet_follows_classical_velocity(make_state):
    state = make_state(PACKET)
    x0 = _expected_x(state, "packet")
    state = _advance(state, 2000)
    slope = (_expected_x(state, "packet") - x0) / state.t
    assert slope == pytest.approx(2.0, rel=0.02)


def test_norm_growth_per_step_is_bounded(make_state):
    state = make_state(PACKET)
    dt, dx = state.dynamics.dt, state.grid.dx
    before = state.fields["packet"].norm(dx)
    after = tick(state).fields["packet"].norm(dx)
    largest_rate = 0.5 * 4 / dx**2
    assert before <= after <= before * (1 + (largest_rate * dt) ** 2) + 1e-12


def test_literal_mode_matches_corrected_on_first_step(make_state):
    corrected = make_state(PACKET)
    literal = replace(corrected, dynamics=replace(corrected.dynamics, mode="literal"))
    one_c, one_l = tick(corrected), tick(literal)
    np.testing.assert_array_equal(one_c.fields["packet"].psi, one_l.fields["packet"].psi)
    assert not np.array_equal(tick(one_c).fields["packet"].psi, tick(one_l).fields["packet"].psi)


def test_infinite_well_ground_frequency(make_state):
    dx = 1 / 33
    dt = 0.04 * dx**2  # ħΔt/(2mΔx²) = 0.02
    state = make_state(WELL.format(dx=repr(dx), dt=repr(dt)))
    mid = 16
    start = state.fields["ground"].psi[mid]
    steps = 1000
    state = _advance(state, steps)
    phase = np.angle(state.fields["ground"].psi[mid] / start)
    frequency = -phase / (steps * dt)
    assert frequency == pytest.approx(math.pi**2 / 2, rel=0.02)

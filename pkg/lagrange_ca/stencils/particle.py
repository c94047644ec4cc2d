"""Semi-implicit (symplectic) Euler update for particle paths."""
from __future__ import annotations

from collections.abc import Callable

from lagrange_ca.dsl.polynomial import BoundPolynomial
from lagrange_ca.engine.kinematics import momentum_of, velocity_of
from lagrange_ca.engine.objects import ParticleWave, PathMember


def particle_step(
    pw: ParticleWave,
    dtau: float,
    rhs: BoundPolynomial | None,
    *,
    potential_gradient: Callable[[float], float] | None = None,
    confine: Callable[[float], tuple[float, bool]] | None = None,
    c: float = 1.0,
    t: float | None = None,
) -> ParticleWave:
    """Advance every path of pw by one proper-time step.

    Step 1 evaluates ẍ from the right-hand side, step 2 updates ẋ, step 3
    moves x with the new ẋ. Massless paths move at ±c without acceleration.
    """
    members = []
    for member in pw.members():
        v = velocity_of(float(member.p), pw.mass, pw.relativistic, c)
        if pw.mass > 0 and rhs is not None:
            bindings = {"x": member.x, "d(x,t)": v}
            if "d(V,x)" in rhs.variables:
                bindings["d(V,x)"] = potential_gradient(member.x) if potential_gradient else 0.0
            v = v + float(rhs(bindings).real) * dtau
        x = member.x + v * dtau
        reflected = False
        if confine is not None:
            x, reflected = confine(x)
        if pw.mass > 0:
            p = momentum_of(-v if reflected else v, pw.mass, pw.relativistic, c)
        else:
            p = -member.p if reflected else member.p
        members.append(PathMember(member.ptype, x, p, member.sigma, member.t if t is None else t))

    paths = pw.paths.with_column(pw.column, members)
    return ParticleWave(
        pw.id, pw.ptype, pw.mass, paths, pw.column, pw.relativistic, pw.tau + dtau, pw.partner
    )

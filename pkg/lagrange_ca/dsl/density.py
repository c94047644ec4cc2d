"""
Structural checks on a field Lagrangian density.

Five requirements are reported: the first four are decided from the
expression tree, the fifth (invariance under the Lorentz group) is always
reported as not checked.
"""
from __future__ import annotations

from dataclasses import dataclass

from lagrange_ca.dsl.euler_lagrange import FIELD_KEYS
from lagrange_ca.dsl.expr import Expr, is_dynamic_key, leaves

PASS = "pass"
FAIL = "fail"
NOT_CHECKED = "not-checked"


@dataclass(frozen=True)
class RequirementFlag:
    number: int
    name: str
    status: str
    detail: str = ""


@dataclass(frozen=True)
class DensityCheckReport:
    flags: tuple[RequirementFlag, ...]

    @property
    def passed(self) -> bool:
        return all(flag.status != FAIL for flag in self.flags)

    def lines(self) -> list[str]:
        out = []
        for flag in self.flags:
            line = f"requirement {flag.number} ({flag.name}): {flag.status}"
            out.append(f"{line} - {flag.detail}" if flag.detail else line)
        return out


def _flag(number: int, name: str, offenders: list[str]) -> RequirementFlag:
    if offenders:
        return RequirementFlag(number, name, FAIL, ", ".join(offenders))
    return RequirementFlag(number, name, PASS)


def check_density_requirements(lagrangian: Expr) -> DensityCheckReport:
    keys = sorted(leaves(lagrangian))
    foreign = [k for k in keys if is_dynamic_key(k) and k not in FIELD_KEYS and k != "x"]
    coordinates = [k for k in keys if k == "x"]
    second_order = [k for k in keys if k.startswith("d2(")]
    complex_parts = [k for k in keys if k == "i"]

    return DensityCheckReport((
        _flag(1, "depends only on fields and their derivatives", foreign),
        _flag(2, "no explicit coordinate dependence", coordinates),
        _flag(3, "at most first-order derivatives", second_order),
        _flag(4, "real-valued", complex_parts),
        RequirementFlag(5, "Lorentz invariance", NOT_CHECKED),
    ))

"""
Vertex rule tables.

Each QED vertex variant is written as a split (one entity in, two out) or a
combine (two in, one out). The vacuum variants are listed but disabled.
"""
from __future__ import annotations

from dataclasses import dataclass

from lagrange_ca.errors import UnknownParticleTypeError

SPLIT = "split"
COMBINE = "combine"
VACUUM = "vacuum"

ELECTRON = "electron"
POSITRON = "positron"
PHOTON = "photon"
MUON = "muon"
ANTIMUON = "antimuon"

# Canonical member order inside a path row
TYPE_ORDER = (ELECTRON, POSITRON, PHOTON, MUON, ANTIMUON)

SYMBOLS = {
    ELECTRON: "e-",
    POSITRON: "e+",
    PHOTON: "γ",
    MUON: "μ-",
    ANTIMUON: "μ+",
}

TYPE_ALIASES = {
    "electron": ELECTRON, "e-": ELECTRON, "e": ELECTRON,
    "positron": POSITRON, "e+": POSITRON,
    "photon": PHOTON, "gamma": PHOTON, "γ": PHOTON,
    "muon": MUON, "mu-": MUON, "μ-": MUON,
    "antimuon": ANTIMUON, "mu+": ANTIMUON, "μ+": ANTIMUON,
}

BOSONS = frozenset({PHOTON})


@dataclass(frozen=True)
class VertexRule:
    name: str
    kind: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    coupling_scale: float = 1.0
    enabled: bool = True
    # False: the split may act only on a virtual entity, never on an in-particle
    on_shell_parent: bool = True
    sign: str = "+"

    def accepts(self, *types: str) -> bool:
        return sorted(types) == sorted(self.inputs)

    def __str__(self) -> str:
        ins = ",".join(symbol(t) for t in self.inputs) or "vacuum"
        outs = ",".join(symbol(t) for t in self.outputs) or "vacuum"
        if len(self.outputs) != 1:
            outs = f"({outs})"
        return f"{self.kind}({ins})→{outs}"


def _split(name: str, parent: str, first: str, second: str, *, on_shell: bool = True) -> VertexRule:
    return VertexRule(name, SPLIT, (parent,), (first, second), on_shell_parent=on_shell)


def _combine(name: str, first: str, second: str, result: str) -> VertexRule:
    return VertexRule(name, COMBINE, (first, second), (result,))


_QED = (
    _combine("absorb-e-", ELECTRON, PHOTON, ELECTRON),
    _combine("absorb-e+", POSITRON, PHOTON, POSITRON),
    _combine("annihilate-e", ELECTRON, POSITRON, PHOTON),
    _split("pair-e", PHOTON, ELECTRON, POSITRON, on_shell=False),
    _split("emit-e-", ELECTRON, ELECTRON, PHOTON),
    _split("emit-e+", POSITRON, POSITRON, PHOTON),
    VertexRule("vacuum-create-e", VACUUM, (), (ELECTRON, POSITRON, PHOTON), enabled=False),
    VertexRule("vacuum-absorb-e", VACUUM, (ELECTRON, POSITRON, PHOTON), (), enabled=False),
)

_MUON = (
    _combine("absorb-mu-", MUON, PHOTON, MUON),
    _combine("absorb-mu+", ANTIMUON, PHOTON, ANTIMUON),
    _combine("annihilate-mu", MUON, ANTIMUON, PHOTON),
    _split("pair-mu", PHOTON, MUON, ANTIMUON, on_shell=False),
    _split("emit-mu-", MUON, MUON, PHOTON),
    _split("emit-mu+", ANTIMUON, ANTIMUON, PHOTON),
)

RULE_TABLES: dict[str, tuple[VertexRule, ...]] = {
    "qed": _QED,
    "qed-mu": _QED + _MUON,
}


def rule_table(name: str) -> tuple[VertexRule, ...]:
    try:
        return RULE_TABLES[name]
    except KeyError:
        raise ValueError(f"unknown rule table '{name}' (choose from {', '.join(RULE_TABLES)})")


def vocabulary(rules: tuple[VertexRule, ...]) -> frozenset[str]:
    return frozenset(
        t for rule in rules if rule.enabled for t in (*rule.inputs, *rule.outputs)
    )


def canonical_type(name: str) -> str:
    try:
        return TYPE_ALIASES[name.strip().lower() if name.isascii() else name.strip()]
    except KeyError:
        raise UnknownParticleTypeError(f"unknown particle type '{name}'")


def symbol(ptype: str) -> str:
    return SYMBOLS.get(ptype, ptype)


def type_index(ptype: str) -> int:
    return TYPE_ORDER.index(ptype) if ptype in TYPE_ORDER else len(TYPE_ORDER)


def split_spins(parent: str, sigma: int) -> tuple[int, int]:
    """A boson splits into opposite spins; a fermion keeps its spin on both children."""
    if parent in BOSONS:
        return sigma, -sigma
    return sigma, sigma

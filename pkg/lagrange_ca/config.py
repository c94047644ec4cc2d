"""
Configuration for the lagrange-ca simulation engine.

Engine defaults live here. Per-run settings come from scenario files and
CLI flags; only the HTTP server reads the environment.
"""
import math
import os
from fractions import Fraction

# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------
DEFAULT_SEED = 0

# ---------------------------------------------------------------------------
# Units  (natural units unless a scenario overrides them)
# ---------------------------------------------------------------------------
DEFAULT_HBAR = 1.0
DEFAULT_C = 1.0

# Rest masses per particle type, natural units (electron = 1)
PARTICLE_MASSES: dict[str, float] = {
    "electron": 1.0,
    "positron": 1.0,
    "photon": 0.0,
    "muon": 206.7682830,
    "antimuon": 206.7682830,
    "generic": 1.0,
}

# ---------------------------------------------------------------------------
# Stability guards
# ---------------------------------------------------------------------------
CFL_LIMIT = 1.0               # v·Δt/Δx above this is rejected
DEFAULT_CFL = 0.5             # used to pick Δt when a wave scenario omits it
SCHRODINGER_WARN_RATIO = 0.1  # ħΔt/(2mΔx²) above this only warns
DEFAULT_SCHRODINGER_RATIO = 0.05  # used to pick Δt when a first-order scenario omits it
NORM_DIVERGENCE_FACTOR = 10.0 # first-order fields abort past this × initial norm

# ---------------------------------------------------------------------------
# Interaction
# ---------------------------------------------------------------------------
DEFAULT_GRANULARITY = 8
DEFAULT_MOMENTUM_WINDOW = Fraction(1)
DEFAULT_COUPLING = math.sqrt(4 * math.pi / 137.035999)
DEFAULT_RULE_TABLE = "qed"
DEFAULT_EQUIVALENCE = "binding"
OCCUPANCY_THRESHOLD = 1e-6    # |ψ| or |amplitude| below this does not occupy a cell
PRUNE_THRESHOLD = 1e-12       # merged rows below this magnitude are dropped
NORMALIZATION_TOLERANCE = 1e-9

# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------
SNAPSHOT_DIGITS = 17
FLOAT_FORMAT = f".{SNAPSHOT_DIGITS}g"
DEFAULT_SNAPSHOT_EVERY = 1

# ---------------------------------------------------------------------------
# HTTP server
# ---------------------------------------------------------------------------
API_HOST = os.getenv("LAGRANGE_CA_HOST", "127.0.0.1")
API_PORT = int(os.getenv("LAGRANGE_CA_PORT", "8000"))
# comma-separated browser origins allowed to call the API; empty disables CORS
CORS_ORIGINS = [o.strip() for o in os.getenv("LAGRANGE_CA_CORS_ORIGINS", "").split(",") if o.strip()]

"""
API routes: all endpoint definitions.
Every route delegates to a service module.
"""
import asyncio
import logging
from functools import partial
from typing import Any

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field, model_validator

from lagrange_ca import __version__
from lagrange_ca.config import DEFAULT_EQUIVALENCE, DEFAULT_RULE_TABLE
from lagrange_ca.errors import ScenarioError, SimulationError
from lagrange_ca.interaction.channels import EQUIVALENCES
from lagrange_ca.interaction.rules import RULE_TABLES, TYPE_ORDER
from lagrange_ca.services.channel_service import list_channels
from lagrange_ca.services.derive_service import derive_from_scenario, derive_from_source
from lagrange_ca.services.run_service import run_scenario_text, validate_text

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api")


# ---------------------------------------------------------------------------
# Pydantic models
# ---------------------------------------------------------------------------
class DeriveRequest(BaseModel):
    source: str | None = Field(default=None, description="Lagrangian text, e.g. 1/2*m*d(x,t)^2 - 1/2*k*x^2")
    scenario_text: str | None = Field(default=None, description="Full scenario file contents")
    constants: list[str] = Field(default=[])
    is_equation: bool = Field(default=False, description="source is already an equation of motion")

    @model_validator(mode="after")
    def _one_input(self):
        if (self.source is None) == (self.scenario_text is None):
            raise ValueError("give exactly one of source or scenario_text")
        return self


class DeriveResponse(BaseModel):
    eom: str
    kind: str
    family: str
    parameters: list[dict]
    steps: list[str]
    density_report: list[str] | None = None


class ChannelsRequest(BaseModel):
    type1: str = Field(..., description="e.g. electron, e-, photon, gamma")
    type2: str
    rules: str = Field(default=DEFAULT_RULE_TABLE)
    equivalence: str = Field(default=DEFAULT_EQUIVALENCE)


class ChannelsResponse(BaseModel):
    in_types: list[str]
    rules: str
    equivalence: str
    channels: list[str]
    details: list[dict]


class ValidateRequest(BaseModel):
    scenario_text: str


class ValidateResponse(BaseModel):
    ok: bool
    diagnostics: list[dict]


class RunRequest(BaseModel):
    scenario_text: str
    overrides: dict[str, Any] = Field(default={})


class RunResponse(BaseModel):
    digest: str
    seed: int
    overrides: dict[str, Any]
    summary: dict[str, Any]
    events: list[dict]


class StatusResponse(BaseModel):
    version: str
    rule_tables: list[str]
    equivalences: list[str]
    particle_types: list[str]


class ErrorDetail(BaseModel):
    status: str = "error"
    message: str
    diagnostics: list[str] | None = None
    tick: int | None = None


class ErrorResponse(BaseModel):
    detail: ErrorDetail


ERROR_RESPONSES = {400: {"model": ErrorResponse}, 500: {"model": ErrorResponse}}


def _error(status_code: int, message: str, **extra) -> HTTPException:
    detail = ErrorDetail(message=message, **extra)
    return HTTPException(status_code=status_code, detail=detail.model_dump(exclude_none=True))


def _bad_input(exc: Exception) -> HTTPException:
    if isinstance(exc, ScenarioError):
        return _error(400, str(exc), diagnostics=[str(d) for d in exc.diagnostics])
    return _error(400, str(exc))


# ---------------------------------------------------------------------------
# Derive
# ---------------------------------------------------------------------------
@router.post("/derive", response_model=DeriveResponse, responses=ERROR_RESPONSES)
async def derive(req: DeriveRequest):
    """Lagrangian → equation of motion, stencil steps and density report."""
    try:
        loop = asyncio.get_running_loop()
        if req.scenario_text is not None:
            call = partial(derive_from_scenario, req.scenario_text)
        else:
            call = partial(derive_from_source, req.source, req.constants, is_equation=req.is_equation)
        result = await loop.run_in_executor(None, call)
        return DeriveResponse(**result)
    except ValueError as e:
        raise _bad_input(e)
    except Exception as e:
        logger.exception("Derivation failed")
        raise _error(500, str(e))


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------
@router.post("/channels", response_model=ChannelsResponse, responses=ERROR_RESPONSES)
async def channels(req: ChannelsRequest):
    """Enumerate interaction channels for an in-type pair."""
    try:
        result = list_channels(req.type1, req.type2, req.rules, req.equivalence)
        return ChannelsResponse(**result)
    except ValueError as e:
        raise _bad_input(e)
    except Exception as e:
        logger.exception("Channel enumeration failed")
        raise _error(500, str(e))


# ---------------------------------------------------------------------------
# Validate
# ---------------------------------------------------------------------------
@router.post("/validate", response_model=ValidateResponse, responses=ERROR_RESPONSES)
async def validate(req: ValidateRequest):
    """Static checks on scenario text; always 200 with the diagnostics."""
    try:
        loop = asyncio.get_running_loop()
        result = await loop.run_in_executor(None, partial(validate_text, req.scenario_text))
        return ValidateResponse(**result)
    except Exception as e:
        logger.exception("Validation failed")
        raise _error(500, str(e))


# ---------------------------------------------------------------------------
# Run
# ---------------------------------------------------------------------------
@router.post("/run", response_model=RunResponse, responses=ERROR_RESPONSES)
async def run(req: RunRequest):
    """Run a scenario to its stop condition and return the summary and events."""
    try:
        loop = asyncio.get_running_loop()
        result = await loop.run_in_executor(None, partial(run_scenario_text, req.scenario_text, req.overrides))
        return RunResponse(**result)
    except ValueError as e:
        raise _bad_input(e)
    except SimulationError as e:
        logger.error("Run aborted: %s", e)
        raise _error(500, str(e), tick=e.tick)
    except Exception as e:
        logger.exception("Run failed")
        raise _error(500, str(e))


# ---------------------------------------------------------------------------
# Status
# ---------------------------------------------------------------------------
@router.get("/status", response_model=StatusResponse)
async def get_status():
    """Version plus the rule tables, equivalences and particle types on offer."""
    return StatusResponse(
        version=__version__,
        rule_tables=sorted(RULE_TABLES),
        equivalences=list(EQUIVALENCES),
        particle_types=list(TYPE_ORDER),
    )

"""
FastAPI application: thin entry point for the simulator's HTTP API.

App creation, CORS middleware, and router mounting only.
All route handlers live in lagrange_ca.api.routes.
"""
import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from lagrange_ca import __version__
from lagrange_ca.api.routes import router as api_router
from lagrange_ca.config import CORS_ORIGINS

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s  %(levelname)s  %(message)s",
)
logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# App
# ---------------------------------------------------------------------------
app = FastAPI(title="lagrange-ca", version=__version__)

# ---------------------------------------------------------------------------
# CORS: only the configured origins (not wildcard)
# ---------------------------------------------------------------------------
if CORS_ORIGINS:
    app.add_middleware(
        CORSMiddleware,
        allow_origins=CORS_ORIGINS,
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

# ---------------------------------------------------------------------------
# Mount API router
# ---------------------------------------------------------------------------
app.include_router(api_router)

logger.info("lagrange-ca API v%s ready", __version__)

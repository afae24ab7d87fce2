"""Bandit-MIPS API: FastAPI entry point.

Registers middleware, the experiments router and lifecycle hooks.
"""

import logging
import os
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from core.observability import configure_logging, setup_otel

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------

CORS_ORIGINS = os.getenv(
    "CORS_ORIGINS", "http://localhost:3000,http://localhost:3001"
).split(",")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# Lifespan
# ---------------------------------------------------------------------------

@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application startup/shutdown hooks."""
    configure_logging(LOG_LEVEL)
    setup_otel(service_name="bandit-mips")
    logger.info("bandit-mips API started")
    yield
    logger.info("bandit-mips API shutting down")


# ---------------------------------------------------------------------------
# App
# ---------------------------------------------------------------------------

app = FastAPI(
    title="Bandit-MIPS",
    description="Sublinear-time linear bandits via adaptive approximate maximum inner product search",
    version=VERSION,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# ---------------------------------------------------------------------------
# Routers
# ---------------------------------------------------------------------------

from harness.router import router as experiments_router  # noqa: E402

app.include_router(experiments_router, prefix="/api/experiments", tags=["Experiments"])


# ---------------------------------------------------------------------------
# Health & root
# ---------------------------------------------------------------------------

@app.get("/health")
async def health():
    return {"status": "healthy", "version": VERSION}


@app.get("/")
async def root():
    return {
        "name": "Bandit-MIPS",
        "version": VERSION,
        "docs": "/docs",
        "algorithms": ["oful", "oful-exact", "lints", "lints-exact"],
    }

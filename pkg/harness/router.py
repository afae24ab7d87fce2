"""Experiments API router: run configurations and evaluate regret ceilings.

Mounted by api.main under /api/experiments.
"""
from __future__ import annotations
from typing import Literal, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from core.guardrails.invariants import InvariantViolation

from .config import RunConfig
from .runner import RunSummary, compare_bound, evaluate_bound, run_repetitions

router = APIRouter()


class RunResponse(BaseModel):
    summaries: list[RunSummary]
    within_bound: list[bool]


class BoundRequest(BaseModel):
    family: Literal["oful", "lints"] = "oful"
    d: int = Field(ge=1)
    T: int = Field(ge=1)
    delta: float = Field(gt=0.0, lt=1.0)
    eta: float = Field(default=0.0, ge=0.0, lt=1.0)


class BoundResponse(BaseModel):
    family: str
    bound: float
    beta: float
    gamma: Optional[float] = None


# ============================================================================
# Endpoints
# ============================================================================

@router.post("/run", response_model=RunResponse)
def run_config(cfg: RunConfig):
    """Run every repetition of a configuration and return the summary rows.

    Results are not written to disk; cfg.out is ignored here.
    """
    try:
        results = run_repetitions(cfg.model_copy(update={"out": None}))
    except InvariantViolation as exc:
        raise HTTPException(status_code=500, detail=f"invariant violation: {exc}")
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return RunResponse(
        summaries=[r.summary for r in results],
        within_bound=[compare_bound(r.trace, cfg).within for r in results],
    )


@router.post("/bound", response_model=BoundResponse)
async def bound(request: BoundRequest):
    value, b, g = evaluate_bound(request.family, request.d, request.T, request.delta, request.eta)
    return BoundResponse(family=request.family, bound=value, beta=b, gamma=g)

from importlib import metadata

from fastapi import APIRouter, Request
from pydantic import BaseModel

router = APIRouter()


class HealthResponse(BaseModel):
    """Service version and default step budget."""

    version: str
    max_steps: int


@router.get("/health", response_model=HealthResponse)
def health_check(request: Request) -> HealthResponse:
    """
    Reports the running version and the step budget of `/programs/run`.

    :param request: incoming request.
    :returns: service status.
    """
    return HealthResponse(
        version=metadata.version("lrp"),
        max_steps=request.app.state.max_steps,
    )

from typing import List

from fastapi import APIRouter, Request
from loguru import logger

from lrp.lang.ast import pretty, pretty_type
from lrp.lang.pipeline import check_source, render_delta, run_source, transform_source
from lrp.lang.runtime import Transition, format_transition
from lrp.web.api.programs.schema import (
    CheckResponse,
    ErrorResponse,
    ProgramRequest,
    RunRequest,
    RunResponse,
    TransformResponse,
)

router = APIRouter(responses={422: {"model": ErrorResponse}})


@router.post("/check", response_model=CheckResponse)
def check_program(request: ProgramRequest) -> CheckResponse:
    """
    Type-checks a program.

    :param request: program to check.
    :returns: the program's type.
    """
    logger.info("check request, {} characters", len(request.source))
    _, program_type = check_source(request.source)
    return CheckResponse(type=pretty_type(program_type))


@router.post("/transform", response_model=TransformResponse)
def transform_program(request: ProgramRequest) -> TransformResponse:
    """
    Transforms a program into its property-free form.

    :param request: program to transform.
    :returns: transformed expression, type and functional context.
    """
    logger.info("transform request, {} characters", len(request.source))
    _, result = transform_source(request.source)
    return TransformResponse(
        expr=pretty(result.expr),
        type=pretty_type(result.type),
        delta=render_delta(result.delta),
    )


@router.post("/run", response_model=RunResponse)
def run_program(request: RunRequest, http_request: Request) -> RunResponse:
    """
    Runs a program to its value.

    :param request: program and run options.
    :param http_request: incoming request, for the configured step budget.
    :returns: value, step count and optionally the trace.
    """
    logger.info("run request, {} characters", len(request.source))
    trace: List[str] = []

    def record(transition: Transition) -> None:
        trace.append(format_transition(transition))

    max_steps = request.max_steps
    if max_steps is None:
        max_steps = http_request.app.state.max_steps
    outcome = run_source(
        request.source,
        max_steps=max_steps,
        observer=record if request.trace else None,
    )
    return RunResponse(
        value=str(outcome.value),
        steps=outcome.steps,
        trace=trace if request.trace else None,
    )

"""Whole-program entry points shared by the command line and the HTTP API."""

from typing import List, Optional, Tuple

from loguru import logger

from lrp.lang.ast import Expr, FuncCtx, Type, pretty_mono, pretty_raw, pretty_type
from lrp.lang.ir import IrDocument, from_document, to_document
from lrp.lang.parser import parse_program
from lrp.lang.runtime import RunOutcome, StepObserver, ready, run_counted
from lrp.lang.transformer import TransformResult, transform_program
from lrp.lang.typechecker import check_program
from lrp.settings import settings


def check_source(source: str) -> Tuple[Expr, Type]:
    """
    Parse and type-check a program.

    :param source: program text.
    :return: parsed program and its type.
    """
    program = parse_program(source)
    program_type = check_program(program)
    logger.debug("program checked at {}", pretty_type(program_type))
    return program, program_type


def transform_source(source: str) -> Tuple[Type, TransformResult]:
    """
    Parse, check and transform a program.

    :param source: program text.
    :return: checked type and transformation result.
    """
    program, program_type = check_source(source)
    result = transform_program(program)
    logger.debug(
        "program transformed with {} monomorphization(s)",
        len(result.delta.monos),
    )
    return program_type, result


def render_delta(delta: FuncCtx) -> List[str]:
    """One line per functional context entry, raw entries first."""
    return [pretty_raw(entry) for entry in delta.raw.values()] + [
        pretty_mono(mono) for mono in delta.monos.values()
    ]


def emit_document(source: str) -> IrDocument:
    """
    Produce the IR of a program that is ready to run.

    :param source: program text.
    :raises ExecutionError: R-UNREADY for programs the runtime refuses.
    :return: IR document.
    """
    program_type, result = transform_source(source)
    ready(program_type, result)
    return to_document(result)


def run_source(
    source: str,
    max_steps: Optional[int] = None,
    observer: Optional[StepObserver] = None,
) -> RunOutcome:
    """
    Run a program through the whole pipeline.

    :param source: program text.
    :param max_steps: transition budget, settings default when omitted.
    :param observer: receives every runtime transition.
    :return: final value and step count.
    """
    program_type, result = transform_source(source)
    phi, expr = ready(program_type, result)
    budget = settings.max_steps if max_steps is None else max_steps
    return run_counted(phi, expr, budget, observer)


def run_document(
    doc: IrDocument,
    max_steps: Optional[int] = None,
    observer: Optional[StepObserver] = None,
) -> RunOutcome:
    """Run a previously emitted IR document."""
    result = from_document(doc)
    phi, expr = ready(result.type, result)
    budget = settings.max_steps if max_steps is None else max_steps
    return run_counted(phi, expr, budget, observer)

"""Command line: check, transform, run and serve programs."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import uvicorn
from loguru import logger

from lrp.lang.ast import pretty, pretty_type
from lrp.lang.errors import LanguageError
from lrp.lang.ir import dumps, loads
from lrp.lang.pipeline import (
    check_source,
    emit_document,
    render_delta,
    run_document,
    run_source,
    transform_source,
)
from lrp.lang.runtime import Transition, format_transition
from lrp.log import configure_logging
from lrp.settings import LogLevel, settings

EXIT_OK = 0
EXIT_LANGUAGE = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}") from None


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for the check, transform, run and serve commands."""
    parser = _Parser(prog="lrp", description="Propertied types toolchain.")
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="log pipeline stages at DEBUG",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="type-check a program")
    check.add_argument("path", type=Path)

    transform = commands.add_parser("transform", help="show the transformed program")
    transform.add_argument("path", type=Path)
    transform.add_argument("--emit", choices=("text", "json"), default="text")

    run = commands.add_parser("run", help="evaluate a program")
    run.add_argument("path", type=Path)
    run.add_argument("--trace", action="store_true", help="trace steps to stderr")
    run.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--from-ir", action="store_true", help="path holds IR JSON")

    commands.add_parser("serve", help="start the HTTP API")
    return parser


def _trace(transition: Transition) -> None:
    print(format_transition(transition), file=sys.stderr)  # noqa: T201


def cmd_check(path: Path) -> int:
    """Print `OK: <type>` for a well-typed file."""
    _, program_type = check_source(path.read_text(encoding="utf-8"))
    print(f"OK: {pretty_type(program_type)}")  # noqa: T201
    return EXIT_OK


def cmd_transform(path: Path, emit: str) -> int:
    """
    Print the transformed program.

    :param path: source file.
    :param emit: `text` for the pretty form with Δ, `json` for IR.
    :return: exit code.
    """
    source = path.read_text(encoding="utf-8")
    if emit == "json":
        print(dumps(emit_document(source)))  # noqa: T201
        return EXIT_OK
    _, result = transform_source(source)
    print(pretty(result.expr))  # noqa: T201
    for line in render_delta(result.delta):
        print(line)  # noqa: T201
    return EXIT_OK


def cmd_run(path: Path, trace: bool, max_steps: Optional[int], from_ir: bool) -> int:
    """Evaluate a source or IR file and print its value."""
    text = path.read_text(encoding="utf-8")
    observer = _trace if trace else None
    if from_ir:
        outcome = run_document(loads(text), max_steps, observer)
    else:
        outcome = run_source(text, max_steps, observer)
    logger.debug("run finished after {} steps", outcome.steps)
    print(outcome.value)  # noqa: T201
    return EXIT_OK


def serve() -> int:
    """Run the HTTP API under uvicorn with the configured settings."""
    uvicorn.run(
        "lrp.web.application:get_app",
        workers=settings.workers_count,
        host=settings.host,
        port=settings.port,
        reload=settings.reload,
        log_level=settings.log_level.value.lower(),
        factory=True,
    )
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entrypoint of the application.

    :param argv: arguments without the program name, sys.argv when omitted.
    :return: 0 on success, 1 on a language error, 2 on usage or I/O errors.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)  # noqa: T201
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    configure_logging(LogLevel.DEBUG if args.verbose else None)
    try:
        if args.command == "check":
            return cmd_check(args.path)
        if args.command == "transform":
            return cmd_transform(args.path, args.emit)
        if args.command == "run":
            if args.max_steps is not None and args.max_steps < 0:
                message = "lrp: error: --max-steps must be >= 0"
                print(message, file=sys.stderr)  # noqa: T201
                return EXIT_USAGE
            return cmd_run(args.path, args.trace, args.max_steps, args.from_ir)
        return serve()
    except LanguageError as exc:
        print(exc.render(), file=sys.stderr)  # noqa: T201
        return EXIT_LANGUAGE
    except (OSError, UnicodeDecodeError) as exc:
        print(f"lrp: error: {exc}", file=sys.stderr)  # noqa: T201
        return EXIT_USAGE


def main_entry() -> None:
    """Console script wrapper turning the result of main into the exit status."""
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

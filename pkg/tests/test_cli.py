from pathlib import Path
from typing import Callable, List

import pytest
import ujson

from lrp.__main__ import main
from lrp.log import configure_logging


def write(tmp_path: Path, text: str, name: str = "program.lrp") -> str:
    """Write a scratch file and return its path as a string."""
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_check(
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """
    A well-typed program prints its type.

    :param program_path: listing locator.
    :param capsys: output capture.
    """
    assert main(["check", str(program_path("captured_var"))]) == 0
    assert capsys.readouterr().out == "OK: int\n"


def test_check_type_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Type errors exit with 1 and print the diagnostic."""
    assert main(["check", write(tmp_path, "1 2")]) == 1
    assert capsys.readouterr().err.startswith("error[E-NOT-FUNC]: ")


def test_check_parse_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Parse errors end with their position."""
    assert main(["check", write(tmp_path, "let x = in 1")]) == 1
    assert capsys.readouterr().err.strip().endswith("at 1:9")


def test_missing_file(tmp_path: Path) -> None:
    """Unreadable paths exit with 2."""
    assert main(["check", str(tmp_path / "missing.lrp")]) == 2
    assert main(["run", str(tmp_path / "missing.lrp")]) == 2


def test_undecodable_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Files that are not UTF-8 exit with 2 instead of a traceback."""
    path = tmp_path / "latin.lrp"
    path.write_bytes(b"\xff\xfe 1")
    assert main(["check", str(path)]) == 2
    assert main(["run", str(path)]) == 2
    assert capsys.readouterr().err.startswith("lrp: error: ")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["transform", "x.lrp", "--emit", "xml"],
        ["run", "x.lrp", "--max-steps", "-1"],
    ],
)
def test_usage_errors(argv: List[str]) -> None:
    """
    Malformed command lines exit with 2.

    :param argv: arguments.
    """
    assert main(argv) == 2


def test_transform_text(
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """The text form prints the program, then one Δ entry per line."""
    assert main(["transform", str(program_path("captured_var"))]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "let y = 5 in f[1] 1",
        "f :: x : int . x + y : int",
        "f[1] ▷ x : int . x + y : int",
    ]
    assert main(["transform", str(program_path("compiled_prop"))]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "let y = 5 in f[1] y"
    assert "f[1] ▷ x : int . let c = 5 in c + 1 : int" in lines


def test_transform_json(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """`--emit json` prints an IR document."""
    assert main(["transform", write(tmp_path, "5"), "--emit", "json"]) == 0
    doc = ujson.loads(capsys.readouterr().out)
    assert doc["version"] == 1
    assert doc["monos"] == []


def test_transform_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Transformation errors exit with 1."""
    source = (
        "func g z : int with if-has z c : int bind-as b in b else 0 in "
        "let v = 3 in g set(1, c, v)"
    )
    assert main(["transform", write(tmp_path, source)]) == 1
    assert "T-SPLICE-SCOPE" in capsys.readouterr().err


@pytest.mark.parametrize(
    ("name", "value"),
    [("captured_var", "6"), ("compiled_prop", "6")],
)
def test_run(
    name: str,
    value: str,
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """
    Listings print their value.

    :param name: listing name.
    :param value: printed value.
    :param program_path: listing locator.
    :param capsys: output capture.
    """
    assert main(["run", str(program_path(name))]) == 0
    assert capsys.readouterr().out == f"{value}\n"


def test_run_unready(
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """A propertied program is refused by the ready gate."""
    assert main(["run", str(program_path("unready"))]) == 1
    assert capsys.readouterr().err.startswith("error[R-UNREADY]")


def test_run_trace(
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """The trace goes to stderr, one transition per line."""
    assert main(["run", "--trace", str(program_path("captured_var"))]) == 0
    captured = capsys.readouterr()
    assert captured.out == "6\n"
    trace = captured.err.splitlines()
    assert len(trace) == 7
    assert trace[0] == (
        "⟨⟩ ; let y = 5 in f[1] 1  --Let-1-->  ⟨y ↪ 5⟩ ; drop y after f[1] 1"
    )


def test_run_max_steps(
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Exhausting the step budget is a language error."""
    assert main(["run", "--max-steps", "3", str(program_path("captured_var"))]) == 1
    assert "R-MAX-STEPS" in capsys.readouterr().err


@pytest.mark.parametrize(
    "name",
    ["captured_var", "compiled_prop", "shadowed", "higher_order"],
)
def test_run_from_ir(
    name: str,
    tmp_path: Path,
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """
    Running emitted IR prints what running the source prints.

    :param name: listing name.
    :param tmp_path: scratch directory.
    :param program_path: listing locator.
    :param capsys: output capture.
    """
    source = str(program_path(name))
    assert main(["run", source]) == 0
    direct = capsys.readouterr().out
    assert main(["transform", "--emit", "json", source]) == 0
    ir_path = write(tmp_path, capsys.readouterr().out, "program.json")
    assert main(["run", "--from-ir", ir_path]) == 0
    assert capsys.readouterr().out == direct


def test_run_bad_ir(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """A document of an unknown version is rejected."""
    assert main(["run", "--from-ir", write(tmp_path, '{"version": 7}')]) == 1
    assert capsys.readouterr().err.startswith("error[IR-LOAD]")


def test_verbose_logs_stages(
    program_path: Callable[[str], Path],
    capsys: pytest.CaptureFixture[str],
) -> None:
    """`-v` turns on DEBUG stage logs on stderr without touching stdout."""
    try:
        assert main(["-v", "check", str(program_path("captured_var"))]) == 0
        captured = capsys.readouterr()
    finally:
        configure_logging()
    assert captured.out == "OK: int\n"
    assert "program checked at int" in captured.err

from typing import Callable

import pytest
import ujson

from lrp.lang.ast import INT, IntLit, PropertiedVal
from lrp.lang.errors import ExecutionError, IrError
from lrp.lang.ir import (
    IntNode,
    IrDocument,
    dumps,
    encode_expr,
    from_document,
    loads,
    to_document,
)
from lrp.lang.pipeline import emit_document, run_document, run_source


def test_literal_document() -> None:
    """A literal program serializes to a document without monomorphizations."""
    doc = emit_document("5")
    assert doc.monos == []
    assert doc.expr == IntNode(value=5)
    assert ujson.loads(dumps(doc)) == {
        "version": 1,
        "expr": {"k": "int", "value": 5},
        "monos": [],
        "program_type": {"k": "int"},
    }


@pytest.mark.parametrize(
    "name",
    ["captured_var", "compiled_prop", "shadowed", "higher_order"],
)
def test_document_runs_like_source(
    name: str,
    program_source: Callable[[str], str],
) -> None:
    """
    Running the emitted IR gives the same value as running the source.

    :param name: listing name.
    :param program_source: listing reader.
    """
    source = program_source(name)
    doc = loads(dumps(emit_document(source)))
    assert run_document(doc).value == run_source(source).value


def test_document_keeps_monomorphizations(program_source: Callable[[str], str]) -> None:
    """Decoding restores the monomorphizations but no raw entries."""
    doc = emit_document(program_source("captured_var"))
    result = from_document(doc)
    assert list(result.delta.monos) == [("f", 1)]
    assert result.delta.monos[("f", 1)].param_type == INT
    assert result.delta.raw == {}
    assert to_document(result) == doc


def test_unready_program_has_no_document(program_source: Callable[[str], str]) -> None:
    """A propertied program is refused before it is encoded."""
    with pytest.raises(ExecutionError) as info:
        emit_document(program_source("unready"))
    assert info.value.code == "R-UNREADY"


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        "{}",
        '{"version": 2, "expr": {"k": "int", "value": 1}, '
        '"program_type": {"k": "int"}}',
        '{"version": 1, "expr": {"k": "nope"}, "program_type": {"k": "int"}}',
        '{"version": 1, "expr": {"k": "mono", "fname": "f", "index": 0}, '
        '"program_type": {"k": "int"}}',
    ],
)
def test_load_errors(text: str) -> None:
    """
    Malformed documents are rejected with IR-LOAD.

    :param text: document text.
    """
    with pytest.raises(IrError) as info:
        loads(text)
    assert info.value.code == "IR-LOAD"


def test_duplicate_monomorphization() -> None:
    """Two entries for the same monomorphization are rejected."""
    entry = {
        "name": "f",
        "index": 1,
        "param": "x",
        "param_type": {"k": "int"},
        "body": {"k": "var", "name": "x"},
        "result_type": {"k": "int"},
    }
    doc = IrDocument.model_validate(
        {
            "expr": {"k": "int", "value": 1},
            "monos": [entry, entry],
            "program_type": {"k": "int"},
        },
    )
    with pytest.raises(IrError, match="duplicate"):
        from_document(doc)


def test_compile_time_nodes_are_not_encoded() -> None:
    """Propertied values have no IR form."""
    with pytest.raises(IrError):
        encode_expr(PropertiedVal(IntLit(1)))

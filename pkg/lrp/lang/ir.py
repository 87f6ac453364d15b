"""
JSON intermediate representation of ready programs.

Expressions are tagged records discriminated by `k`; only runtime nodes
can be encoded since everything else is transformed away.
"""

from typing import Annotated, List, Literal, Union

import ujson
from pydantic import BaseModel, Field, ValidationError

from lrp.lang.ast import (
    App,
    ArrowType,
    DropAfter,
    Expr,
    FuncCtx,
    IntLit,
    IntType,
    Let,
    Minus,
    MonoFunc,
    MonoRef,
    Plus,
    RetrieveAfter,
    Type,
    UnitLit,
    UnitType,
    Var,
    pretty,
    pretty_type,
)
from lrp.lang.errors import IrError
from lrp.lang.transformer import TransformResult

IR_VERSION = 1


class IntTypeNode(BaseModel):
    """`int`."""

    k: Literal["int"] = "int"


class UnitTypeNode(BaseModel):
    """`unit`."""

    k: Literal["unit"] = "unit"


class ArrowTypeNode(BaseModel):
    """Function type."""

    k: Literal["arrow"] = "arrow"
    domain: "TypeNode"
    codomain: "TypeNode"


TypeNode = Annotated[
    Union[IntTypeNode, UnitTypeNode, ArrowTypeNode],
    Field(discriminator="k"),
]


class IntNode(BaseModel):
    """Integer literal."""

    k: Literal["int"] = "int"
    value: int


class UnitNode(BaseModel):
    """`()`."""

    k: Literal["unit"] = "unit"


class VarNode(BaseModel):
    """Variable."""

    k: Literal["var"] = "var"
    name: str


class AppNode(BaseModel):
    """Application of a monomorphization."""

    k: Literal["app"] = "app"
    fn: "ExprNode"
    arg: "ExprNode"


class PlusNode(BaseModel):
    """Addition."""

    k: Literal["plus"] = "plus"
    left: "ExprNode"
    right: "ExprNode"


class MinusNode(BaseModel):
    """Subtraction."""

    k: Literal["minus"] = "minus"
    left: "ExprNode"
    right: "ExprNode"


class LetNode(BaseModel):
    """Let binding."""

    k: Literal["let"] = "let"
    name: str
    bound: "ExprNode"
    body: "ExprNode"


class MonoNode(BaseModel):
    """Monomorphization reference `fname[index]`."""

    k: Literal["mono"] = "mono"
    fname: str
    index: int = Field(ge=1)


class DropNode(BaseModel):
    """Pending removal of a binding."""

    k: Literal["drop"] = "drop"
    name: str
    body: "ExprNode"


class RetrieveNode(BaseModel):
    """Pending restore of a shadowed binding."""

    k: Literal["retrieve"] = "retrieve"
    name: str
    saved: "ExprNode"
    body: "ExprNode"


ExprNode = Annotated[
    Union[
        IntNode,
        UnitNode,
        VarNode,
        AppNode,
        PlusNode,
        MinusNode,
        LetNode,
        MonoNode,
        DropNode,
        RetrieveNode,
    ],
    Field(discriminator="k"),
]


class MonoEntry(BaseModel):
    """One monomorphization of the functional context."""

    name: str
    index: int = Field(ge=1)
    param: str
    param_type: TypeNode
    body: ExprNode
    result_type: TypeNode


class IrDocument(BaseModel):
    """A ready program: its expression, monomorphizations and type."""

    version: Literal[1] = IR_VERSION
    expr: ExprNode
    monos: List[MonoEntry] = []
    program_type: TypeNode


for _model in (
    ArrowTypeNode,
    AppNode,
    PlusNode,
    MinusNode,
    LetNode,
    DropNode,
    RetrieveNode,
    MonoEntry,
    IrDocument,
):
    _model.model_rebuild()


def encode_type(t: Type) -> TypeNode:
    """Encode a runtime type; propertied types have no encoding."""
    if isinstance(t, IntType):
        return IntTypeNode()
    if isinstance(t, UnitType):
        return UnitTypeNode()
    if isinstance(t, ArrowType):
        return ArrowTypeNode(
            domain=encode_type(t.domain),
            codomain=encode_type(t.codomain),
        )
    raise IrError(f"type {pretty_type(t)} has no IR encoding")


def decode_type(node: TypeNode) -> Type:
    """Inverse of encode_type."""
    if isinstance(node, IntTypeNode):
        return IntType()
    if isinstance(node, UnitTypeNode):
        return UnitType()
    return ArrowType(decode_type(node.domain), decode_type(node.codomain))


def encode_expr(e: Expr) -> ExprNode:  # noqa: C901, PLR0911
    """
    Encode a runtime expression.

    :param e: expression made of runtime nodes only.
    :raises IrError: on compile-time or surface-only nodes.
    :return: IR node.
    """
    match e:
        case IntLit(value=value):
            return IntNode(value=value)
        case UnitLit():
            return UnitNode()
        case Var(name=name):
            return VarNode(name=name)
        case App(fn=fn, arg=arg):
            return AppNode(fn=encode_expr(fn), arg=encode_expr(arg))
        case Plus(left=left, right=right):
            return PlusNode(left=encode_expr(left), right=encode_expr(right))
        case Minus(left=left, right=right):
            return MinusNode(left=encode_expr(left), right=encode_expr(right))
        case Let(name=name, bound=bound, body=body):
            return LetNode(name=name, bound=encode_expr(bound), body=encode_expr(body))
        case MonoRef(fname=fname, index=index):
            return MonoNode(fname=fname, index=index)
        case DropAfter(name=name, body=body):
            return DropNode(name=name, body=encode_expr(body))
        case RetrieveAfter(name=name, saved=saved, body=body):
            return RetrieveNode(
                name=name,
                saved=encode_expr(saved),
                body=encode_expr(body),
            )
    raise IrError(f"{pretty(e)} has no IR encoding")


def decode_expr(node: ExprNode) -> Expr:  # noqa: C901, PLR0911
    """Inverse of encode_expr."""
    match node:
        case IntNode(value=value):
            return IntLit(value)
        case UnitNode():
            return UnitLit()
        case VarNode(name=name):
            return Var(name)
        case AppNode(fn=fn, arg=arg):
            return App(decode_expr(fn), decode_expr(arg))
        case PlusNode(left=left, right=right):
            return Plus(decode_expr(left), decode_expr(right))
        case MinusNode(left=left, right=right):
            return Minus(decode_expr(left), decode_expr(right))
        case LetNode(name=name, bound=bound, body=body):
            return Let(name, decode_expr(bound), decode_expr(body))
        case MonoNode(fname=fname, index=index):
            return MonoRef(fname, index)
        case DropNode(name=name, body=body):
            return DropAfter(name, decode_expr(body))
        case RetrieveNode(name=name, saved=saved, body=body):
            return RetrieveAfter(name, decode_expr(saved), decode_expr(body))
    raise IrError(f"unknown IR node {node!r}")


def to_document(tr: TransformResult) -> IrDocument:
    """Serialize the runtime part of a transformation result."""
    return IrDocument(
        expr=encode_expr(tr.expr),
        monos=[
            MonoEntry(
                name=mono.name,
                index=mono.index,
                param=mono.param,
                param_type=encode_type(mono.param_type),
                body=encode_expr(mono.body),
                result_type=encode_type(mono.result_type),
            )
            for mono in tr.delta.monos.values()
        ],
        program_type=encode_type(tr.type),
    )


def from_document(doc: IrDocument) -> TransformResult:
    """
    Rebuild a transformation result from IR.

    The functional context only holds monomorphizations; raw functions
    are not part of the IR.
    """
    delta = FuncCtx()
    for entry in doc.monos:
        mono = MonoFunc(
            entry.name,
            entry.index,
            entry.param,
            decode_type(entry.param_type),
            decode_expr(entry.body),
            decode_type(entry.result_type),
        )
        if delta.lookup_mono(mono.name, mono.index) is not None:
            raise IrError(f"duplicate monomorphization {mono.name}[{mono.index}]")
        monos = dict(delta.monos)
        monos[(mono.name, mono.index)] = mono
        delta = FuncCtx(delta.raw, monos, delta.cache)
    return TransformResult(delta, decode_expr(doc.expr), decode_type(doc.program_type))


def dumps(doc: IrDocument) -> str:
    """Serialize a document as indented JSON."""
    return ujson.dumps(doc.model_dump(), ensure_ascii=False, indent=2)


def loads(text: str) -> IrDocument:
    """
    Parse and validate an IR document.

    :param text: JSON text.
    :raises IrError: on malformed JSON, unknown version or bad shape.
    :return: validated document.
    """
    try:
        raw = ujson.loads(text)
    except ValueError as exc:
        raise IrError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise IrError("IR document must be a JSON object")
    if raw.get("version") != IR_VERSION:
        raise IrError(
            f"unsupported IR version {raw.get('version')!r}, expected {IR_VERSION}",
        )
    try:
        return IrDocument.model_validate(raw)
    except ValidationError as exc:
        raise IrError(f"malformed IR document: {exc.error_count()} problem(s)") from exc

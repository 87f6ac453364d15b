"""Types, expressions and contexts shared by every stage of the pipeline."""

from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Generic,
    Iterator,
    Mapping,
    Optional,
    Tuple,
    TypeVar,
    Union,
)

from lrp.lang.errors import Position, TypeCheckError, TypeErrorCode

T = TypeVar("T")
U = TypeVar("U")


# Types


class Type:
    """Base class of every type."""

    __slots__ = ()


@dataclass(frozen=True)
class IntType(Type):
    """64-bit signed integers."""


@dataclass(frozen=True)
class UnitType(Type):
    """The single-value type of `()`."""


@dataclass(frozen=True)
class ArrowType(Type):
    """Function type `domain -> codomain`."""

    domain: Type
    codomain: Type


@dataclass(frozen=True)
class Property:
    """A named compile-time attribute `name ↪ expr[type]`."""

    name: str
    expr: "Expr"
    type: Type

    def __post_init__(self) -> None:
        if isinstance(self.type, PropertiedType):
            raise TypeCheckError(
                TypeErrorCode.MISMATCH,
                f"property {self.name} cannot carry a propertied type",
            )


@dataclass(frozen=True)
class PropertiedType(Type):
    """
    A base type paired with an ordered list of properties.

    The base is never propertied itself and property names are unique.
    """

    base: Type
    props: Tuple[Property, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.base, PropertiedType):
            raise TypeCheckError(
                TypeErrorCode.MISMATCH,
                "the base of a propertied type cannot be propertied",
            )
        seen = set()
        for prop in self.props:
            if prop.name in seen:
                raise TypeCheckError(
                    TypeErrorCode.DUP_PROP,
                    f"duplicate property {prop.name}",
                )
            seen.add(prop.name)

    def find(self, name: str) -> Optional[Property]:
        """
        Look a property up by name.

        :param name: property name.
        :return: the property or None.
        """
        for prop in self.props:
            if prop.name == name:
                return prop
        return None

    def without(self, name: str) -> "PropertiedType":
        """
        Drop a property, preserving the order of the rest.

        :param name: property to remove.
        :return: new propertied type.
        """
        return PropertiedType(
            self.base,
            tuple(prop for prop in self.props if prop.name != name),
        )

    def with_prop(self, prop: Property) -> "PropertiedType":
        """
        Update a property in place or append it when absent.

        :param prop: property to store.
        :return: new propertied type.
        """
        if self.find(prop.name) is None:
            return PropertiedType(self.base, (*self.props, prop))
        return PropertiedType(
            self.base,
            tuple(prop if old.name == prop.name else old for old in self.props),
        )


INT = IntType()
UNIT = UnitType()


def is_arrow(t: Type) -> bool:
    """Whether t is a function type, properties not looked through."""
    return isinstance(t, ArrowType)


def is_propertied(t: Type) -> bool:
    """Whether t carries a property list, possibly empty."""
    return isinstance(t, PropertiedType)


def base_of(t: Type) -> Type:
    """Strip the properties off a type."""
    return t.base if isinstance(t, PropertiedType) else t


# Expressions


class Expr:
    """Base class of every expression node."""

    __slots__ = ()


def _pos() -> Any:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit(Expr):
    """
    Integer literal.

    The parser only yields non-negative values. Negative ones are runtime
    results; source programs spell them `0 - n`.
    """

    value: int
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class UnitLit(Expr):
    """The unit value `()`."""

    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Var(Expr):
    """Variable or function name."""

    name: str
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Func(Expr):
    """`func fname param : param_type with body in cont`."""

    fname: str
    param: str
    param_type: Type
    body: Expr
    cont: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Let(Expr):
    """`let name = bound in body`."""

    name: str
    bound: Expr
    body: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class IfHas(Expr):
    """Branch on whether `scrutinee` carries `prop` at `prop_type`."""

    scrutinee: str
    prop: str
    prop_type: Type
    bind_as: str
    then_branch: Expr
    else_branch: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class SetProp(Expr):
    """Attach or update a property, moving it to the front."""

    target: Expr
    prop: str
    value: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class GetProp(Expr):
    """Read a property's expression."""

    target: Expr
    prop: str
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class EraseProp(Expr):
    """Drop a property from the list."""

    target: Expr
    prop: str
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Extract(Expr):
    """Underlying value of a propertied expression."""

    target: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class App(Expr):
    """Application; the callee must name a function."""

    fn: Expr
    arg: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Plus(Expr):
    """Integer addition."""

    left: Expr
    right: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Minus(Expr):
    """Integer subtraction."""

    left: Expr
    right: Expr
    pos: Optional[Position] = _pos()


# Internal nodes, never produced by the parser.


@dataclass(frozen=True)
class PropertiedVal(Expr):
    """A value paired with its properties, which live in its type."""

    underlying: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class MonoRef(Expr):
    """Reference to the monomorphization `fname[index]`."""

    fname: str
    index: int
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class DropAfter(Expr):
    """Remove the binding of `name` once body is a value."""

    name: str
    body: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class RetrieveAfter(Expr):
    """Restore `name` to `saved` once body is a value."""

    name: str
    saved: Expr
    body: Expr
    pos: Optional[Position] = _pos()


INTERNAL_NODES = (PropertiedVal, MonoRef, DropAfter, RetrieveAfter)


# Environments


class Scope(Generic[T]):
    """
    Persistent identifier map with shadowing insert.

    Extending never mutates the receiver, so scopes can be shared freely
    between branches and threads.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping[str, T]] = None) -> None:
        self._entries: Dict[str, T] = dict(entries or {})

    def extend(self, name: str, value: T) -> "Scope[T]":
        """
        Bind a name, shadowing any previous binding.

        :param name: identifier.
        :param value: what the identifier is bound to.
        :return: extended scope.
        """
        entries = dict(self._entries)
        entries.pop(name, None)
        entries[name] = value
        return Scope(entries)

    def lookup(self, name: str) -> Optional[T]:
        """Innermost binding of a name, None when unbound."""
        return self._entries.get(name)

    def map(self, fn: Callable[[T], U]) -> "Scope[U]":
        """Scope with every bound value transformed."""
        return Scope({name: fn(value) for name, value in self._entries.items()})

    def names(self) -> FrozenSet[str]:
        """Bound names."""
        return frozenset(self._entries)

    def items(self) -> Iterator[Tuple[str, T]]:
        """Bindings in insertion order."""
        return iter(self._entries.items())

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"Scope({self._entries!r})"


# Functional context


@dataclass(frozen=True)
class ByArgType:
    """Monomorphization key for value arguments."""

    fname: str
    arg_type: Type


@dataclass(frozen=True)
class ByArgFunc:
    """Monomorphization key for function arguments."""

    fname: str
    passed: str
    # set when the passed function carries properties
    arg_type: Optional[Type] = None


MonoKey = Union[ByArgType, ByArgFunc]


@dataclass(frozen=True)
class RawFunc:
    """A raw function entry `f :: x : T1 . M : T2`."""

    name: str
    param: str
    param_type: Type
    body: Expr
    result_type: Type
    # lexical scope of the definition, used when monomorphizing
    scope: Optional[Scope[Any]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class MonoFunc:
    """A monomorphization `f[n] ▷ x : T1 . M' : T2`."""

    name: str
    index: int
    param: str
    param_type: Type
    body: Expr
    result_type: Type

    @property
    def signature(self) -> ArrowType:
        """Arrow type of the monomorphization."""
        return ArrowType(self.param_type, self.result_type)


@dataclass(frozen=True)
class FuncCtx:
    """
    The functional context: raw functions, their monomorphizations and the
    key cache that decides whether a monomorphization can be reused.

    Instances are never mutated; every update returns a new context.
    """

    raw: Mapping[str, RawFunc] = field(default_factory=dict)
    monos: Mapping[Tuple[str, int], MonoFunc] = field(default_factory=dict)
    cache: Mapping[MonoKey, Tuple[str, int]] = field(default_factory=dict)

    def with_raw(self, entry: RawFunc) -> "FuncCtx":
        """Context with a raw entry added, replacing one of the same name."""
        raw = dict(self.raw)
        raw[entry.name] = entry
        return FuncCtx(raw, self.monos, self.cache)

    def with_mono(self, mono: MonoFunc, key: MonoKey) -> "FuncCtx":
        """Context with a monomorphization registered under its key."""
        monos = dict(self.monos)
        monos[(mono.name, mono.index)] = mono
        cache = dict(self.cache)
        cache[key] = (mono.name, mono.index)
        return FuncCtx(self.raw, monos, cache)

    def lookup_raw(self, name: str) -> Optional[RawFunc]:
        """Raw entry of a function name."""
        return self.raw.get(name)

    def lookup_mono(self, name: str, index: int) -> Optional[MonoFunc]:
        """Monomorphization `name[index]`, None when absent."""
        return self.monos.get((name, index))

    def indices(self, name: str) -> FrozenSet[int]:
        """Indices already used by monomorphizations of a function."""
        return frozenset(index for fname, index in self.monos if fname == name)


# Structural operations


def type_equal(a: Type, b: Type) -> bool:
    """Structural, order-sensitive type equality."""
    return a == b


def expr_equal(a: Expr, b: Expr) -> bool:
    """Syntactic equality; positions are ignored, names compared literally."""
    return a == b


def children(e: Expr) -> Tuple[Expr, ...]:  # noqa: C901
    """
    Direct subexpressions of a node, in evaluation order.

    :param e: expression.
    :return: tuple of child expressions.
    """
    match e:
        case Func(body=body, cont=cont):
            return (body, cont)
        case Let(bound=bound, body=body):
            return (bound, body)
        case IfHas(then_branch=then_branch, else_branch=else_branch):
            return (then_branch, else_branch)
        case SetProp(target=target, value=value):
            return (target, value)
        case GetProp(target=target) | EraseProp(target=target) | Extract(
            target=target,
        ):
            return (target,)
        case App(fn=fn, arg=arg):
            return (fn, arg)
        case Plus(left=left, right=right) | Minus(left=left, right=right):
            return (left, right)
        case PropertiedVal(underlying=underlying):
            return (underlying,)
        case DropAfter(body=body):
            return (body,)
        case RetrieveAfter(saved=saved, body=body):
            return (saved, body)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of an expression tree."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def annotations(e: Expr) -> Iterator[Type]:
    """Every type written inside an expression tree."""
    for node in walk(e):
        if isinstance(node, Func):
            yield node.param_type
        elif isinstance(node, IfHas):
            yield node.prop_type


def free_vars(e: Expr) -> FrozenSet[str]:  # noqa: C901
    """
    Free identifiers of an expression.

    :param e: expression.
    :return: set of names not bound inside e.
    """
    match e:
        case Var(name=name):
            return frozenset({name})
        case Func(fname=fname, param=param, body=body, cont=cont):
            return (free_vars(body) - {param}) | (free_vars(cont) - {fname})
        case Let(name=name, bound=bound, body=body):
            return free_vars(bound) | (free_vars(body) - {name})
        case IfHas(
            scrutinee=scrutinee,
            bind_as=bind_as,
            then_branch=then_branch,
            else_branch=else_branch,
        ):
            return (
                frozenset({scrutinee})
                | (free_vars(then_branch) - {bind_as})
                | free_vars(else_branch)
            )
        case DropAfter(name=name, body=body):
            return free_vars(body) - {name}
        case RetrieveAfter(name=name, saved=saved, body=body):
            return free_vars(saved) | (free_vars(body) - {name})
    result: FrozenSet[str] = frozenset()
    for child in children(e):
        result |= free_vars(child)
    return result


# Pretty printing

_EXPR, _ARITH, _APP, _ATOM = range(4)


def pretty_type(t: Type, prec: int = 0) -> str:
    """
    Render a type in concrete syntax.

    :param t: type.
    :param prec: 1 when the type sits left of an arrow.
    :return: text.
    """
    match t:
        case IntType():
            return "int"
        case UnitType():
            return "unit"
        case ArrowType(domain=domain, codomain=codomain):
            text = f"{pretty_type(domain, 1)} -> {pretty_type(codomain)}"
            return f"({text})" if prec > 0 else text
        case PropertiedType(base=base, props=props):
            inner = ", ".join(
                f"{prop.name} ↪ {pretty(prop.expr)}[{pretty_type(prop.type)}]"
                for prop in props
            )
            return f"[{pretty_type(base)}]⟨{inner}⟩"
    raise ValueError(f"unknown type {t!r}")


def _level(e: Expr) -> int:
    if isinstance(e, (Func, Let, IfHas, DropAfter, RetrieveAfter)):
        return _EXPR
    if isinstance(e, (Plus, Minus)):
        return _ARITH
    if isinstance(e, App):
        return _APP
    return _ATOM


def pretty(e: Expr, prec: int = _EXPR) -> str:
    """
    Render an expression in concrete syntax.

    Surface expressions re-parse to an equal tree. A negative IntLit,
    which only arises at runtime, prints as `-n` and does not re-parse.

    :param e: expression.
    :param prec: binding strength required by the context.
    :return: text.
    """
    text = _render(e)
    if _level(e) < prec:
        return f"({text})"
    return text


def _render(e: Expr) -> str:  # noqa: C901
    match e:
        case IntLit(value=value):
            return str(value)
        case UnitLit():
            return "()"
        case Var(name=name):
            return name
        case MonoRef(fname=fname, index=index):
            return f"{fname}[{index}]"
        case PropertiedVal(underlying=underlying):
            return f"propertied[{pretty(underlying)}]"
        case Extract(target=target):
            return f"extract({pretty(target)})"
        case SetProp(target=target, prop=prop, value=value):
            return f"set({pretty(target)}, {prop}, {pretty(value)})"
        case GetProp(target=target, prop=prop):
            return f"get({pretty(target)}, {prop})"
        case EraseProp(target=target, prop=prop):
            return f"erase({pretty(target)}, {prop})"
        case App(fn=fn, arg=arg):
            return f"{pretty(fn, _APP)} {pretty(arg, _ATOM)}"
        case Plus(left=left, right=right):
            return f"{pretty(left, _ARITH)} + {pretty(right, _APP)}"
        case Minus(left=left, right=right):
            return f"{pretty(left, _ARITH)} - {pretty(right, _APP)}"
        case Func(fname=fname, param=param, param_type=ptype, body=body, cont=cont):
            return (
                f"func {fname} {param} : {pretty_type(ptype)} with "
                f"{pretty(body)} in {pretty(cont)}"
            )
        case Let(name=name, bound=bound, body=body):
            return f"let {name} = {pretty(bound)} in {pretty(body)}"
        case IfHas():
            return (
                f"if-has {e.scrutinee} {e.prop} : {pretty_type(e.prop_type)} "
                f"bind-as {e.bind_as} in {pretty(e.then_branch)} "
                f"else {pretty(e.else_branch)}"
            )
        case DropAfter(name=name, body=body):
            return f"drop {name} after {pretty(body)}"
        case RetrieveAfter(name=name, saved=saved, body=body):
            return f"retrieve {name} = {pretty(saved)} after {pretty(body)}"
    raise ValueError(f"unknown expression {e!r}")


def pretty_raw(entry: RawFunc) -> str:
    """Render a raw Δ entry, e.g. `f :: x : int . x + y : int`."""
    return (
        f"{entry.name} :: {entry.param} : {pretty_type(entry.param_type)} . "
        f"{pretty(entry.body)} : {pretty_type(entry.result_type)}"
    )


def pretty_mono(mono: MonoFunc) -> str:
    """Render a monomorphization, e.g. `f[1] ▷ x : int . x + y : int`."""
    return (
        f"{mono.name}[{mono.index}] ▷ {mono.param} : "
        f"{pretty_type(mono.param_type)} . {pretty(mono.body)} : "
        f"{pretty_type(mono.result_type)}"
    )

"""Ready gate and small-step execution over ⟨σ; e⟩ configurations."""

from dataclasses import dataclass
from typing import (
    AbstractSet,
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

from loguru import logger

from lrp.lang.ast import (
    App,
    DropAfter,
    Expr,
    IntLit,
    Let,
    Minus,
    MonoFunc,
    MonoRef,
    Plus,
    PropertiedType,
    PropertiedVal,
    RetrieveAfter,
    Type,
    UnitLit,
    Var,
    children,
    pretty,
    pretty_type,
    type_equal,
    walk,
)
from lrp.lang.errors import ExecutionError, RuntimeErrorCode
from lrp.lang.transformer import TransformResult

MIN_INT = -(2**63)
MAX_INT = 2**63 - 1
DEFAULT_MAX_STEPS = 1_000_000


@dataclass(frozen=True)
class RuntimeFunc:
    """Type-erased monomorphization `f[n] :: x ⊗ M`."""

    param: str
    body: Expr


RuntimeCtx = Mapping[Tuple[str, int], RuntimeFunc]


@dataclass(frozen=True)
class IntV:
    """Integer result."""

    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class UnitV:
    """Unit result."""

    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class FuncV:
    """A function result, named by its monomorphization."""

    fname: str
    index: int

    def __str__(self) -> str:
        return f"{self.fname}[{self.index}]"


Value = Union[IntV, UnitV, FuncV]


@dataclass(frozen=True)
class Store:
    """Ordered variable bindings; lookup sees the most recent one."""

    bindings: Tuple[Tuple[str, Expr], ...] = ()

    def lookup(self, name: str) -> Optional[Expr]:
        """Most recent value bound to name."""
        for bound, value in reversed(self.bindings):
            if bound == name:
                return value
        return None

    def bind(self, name: str, value: Expr) -> "Store":
        """Append a binding; earlier ones of the same name stay."""
        return Store((*self.bindings, (name, value)))

    def _latest(self, name: str) -> int:
        for position in range(len(self.bindings) - 1, -1, -1):
            if self.bindings[position][0] == name:
                return position
        raise ExecutionError(RuntimeErrorCode.STUCK, f"{name} is not bound")

    def replace(self, name: str, value: Expr) -> "Store":
        """Overwrite the most recent binding of name in place."""
        position = self._latest(name)
        bindings = list(self.bindings)
        bindings[position] = (name, value)
        return Store(tuple(bindings))

    def drop(self, name: str) -> "Store":
        """Remove the most recent binding of name."""
        position = self._latest(name)
        return Store(self.bindings[:position] + self.bindings[position + 1 :])

    def __len__(self) -> int:
        return len(self.bindings)

    def __str__(self) -> str:
        inner = " , ".join(
            f"{name} ↪ {pretty(value)}" for name, value in self.bindings
        )
        return f"⟨{inner}⟩"


class Transition(NamedTuple):
    """One step of the machine, labelled with the rule that fired."""

    store: Store
    expr: Expr
    rule: str
    next_store: Store
    next_expr: Expr


StepObserver = Callable[[Transition], None]


class RunOutcome(NamedTuple):
    """Final value and the number of steps taken."""

    value: Value
    steps: int


def _stuck(message: str) -> ExecutionError:
    return ExecutionError(RuntimeErrorCode.STUCK, message)


def _unready(message: str) -> ExecutionError:
    return ExecutionError(RuntimeErrorCode.UNREADY, message)


def build_runtime_ctx(monos: Iterable[MonoFunc]) -> Dict[Tuple[str, int], RuntimeFunc]:
    """Erase the types of monomorphizations."""
    return {
        (mono.name, mono.index): RuntimeFunc(mono.param, mono.body) for mono in monos
    }


def _raw_references(
    e: Expr,
    raw_names: AbstractSet[str],
    bound: FrozenSet[str] = frozenset(),
) -> Iterator[str]:
    match e:
        case Var(name=name) if name in raw_names and name not in bound:
            yield name
        case Let(name=name, bound=value, body=body):
            yield from _raw_references(value, raw_names, bound)
            yield from _raw_references(body, raw_names, bound | {name})
        case _:
            for child in children(e):
                yield from _raw_references(child, raw_names, bound)


def validate_program(
    phi: RuntimeCtx,
    e: Expr,
    raw_names: AbstractSet[str] = frozenset(),
) -> None:
    """
    Reject programs the machine cannot execute.

    Every application must call a known monomorphization and no
    compile-time node may survive. A raw function name that is not
    shadowed by a binder means a function was passed before it had a
    runtime value.

    :param phi: runtime context.
    :param e: program expression.
    :param raw_names: names of the raw functions of the transformation.
    :raises ExecutionError: R-UNREADY.
    """
    scoped: List[Tuple[Expr, FrozenSet[str]]] = [(e, frozenset())]
    scoped.extend((func.body, frozenset({func.param})) for func in phi.values())
    for body, params in scoped:
        name = next(_raw_references(body, raw_names, params), None)
        if name is not None:
            raise _unready(f"function {name} is passed but was never compiled")
    for body in (e, *(func.body for func in phi.values())):
        for node in walk(body):
            if isinstance(node, PropertiedVal):
                raise _unready(f"propertied value {pretty(node)} reached the runtime")
            if isinstance(node, MonoRef) and (node.fname, node.index) not in phi:
                raise _unready(f"{pretty(node)} has no runtime entry")
            if isinstance(node, App) and not isinstance(node.fn, MonoRef):
                raise _unready(f"application of unresolved function {pretty(node.fn)}")


def ready(
    checked_type: Type,
    tr: TransformResult,
) -> Tuple[Dict[Tuple[str, int], RuntimeFunc], Expr]:
    """
    Grant a transformed program its runtime context.

    :param checked_type: type assigned by check_program.
    :param tr: transformation result.
    :raises ExecutionError: R-UNREADY when the program still has a
        propertied type or its shape cannot run.
    :return: runtime context and the program expression.
    """
    if isinstance(tr.type, PropertiedType):
        raise _unready(
            f"program has the propertied type {pretty_type(tr.type)} and cannot run",
        )
    if not type_equal(checked_type, tr.type):
        raise _unready(
            f"transformed type {pretty_type(tr.type)} differs from checked type "
            f"{pretty_type(checked_type)}",
        )
    phi = build_runtime_ctx(tr.delta.monos.values())
    validate_program(phi, tr.expr, frozenset(tr.delta.raw))
    return phi, tr.expr


def is_value(phi: RuntimeCtx, e: Expr) -> bool:
    """Literals and references to runtime entries are values."""
    if isinstance(e, (IntLit, UnitLit)):
        return True
    return isinstance(e, MonoRef) and (e.fname, e.index) in phi


def to_value(e: Expr) -> Value:
    """Read a value expression back as a Value."""
    if isinstance(e, IntLit):
        return IntV(e.value)
    if isinstance(e, UnitLit):
        return UnitV()
    if isinstance(e, MonoRef):
        return FuncV(e.fname, e.index)
    raise _stuck(f"{pretty(e)} is not a value")


def checked_int(value: int) -> IntLit:
    """Wrap an arithmetic result, trapping 64-bit overflow."""
    if not MIN_INT <= value <= MAX_INT:
        raise ExecutionError(
            RuntimeErrorCode.OVERFLOW,
            f"integer overflow: {value} does not fit in 64 bits",
        )
    return IntLit(value)


def _bind(
    sigma: Store,
    name: str,
    value: Expr,
    body: Expr,
    family: str,
) -> Tuple[Store, Expr, str]:
    previous = sigma.lookup(name)
    if previous is None:
        return sigma.bind(name, value), DropAfter(name, body), f"{family}-1"
    return (
        sigma.replace(name, value),
        RetrieveAfter(name, previous, body),
        f"{family}-2",
    )


def _step(  # noqa: C901, PLR0911
    phi: RuntimeCtx,
    sigma: Store,
    e: Expr,
) -> Tuple[Store, Expr, str]:
    match e:
        case Var(name=name):
            found = sigma.lookup(name)
            if found is None:
                raise _stuck(f"variable {name} is not bound")
            return sigma, found, "Var"
        case App(fn=fn, arg=arg):
            if not is_value(phi, fn):
                sigma, fn, rule = _step(phi, sigma, fn)
                return sigma, App(fn, arg), rule
            if not is_value(phi, arg):
                sigma, arg, rule = _step(phi, sigma, arg)
                return sigma, App(fn, arg), rule
            if not isinstance(fn, MonoRef):
                raise _stuck(f"cannot apply {pretty(fn)}")
            func = phi[(fn.fname, fn.index)]
            if isinstance(arg, MonoRef):
                return sigma, func.body, "App-With-Func"
            return _bind(sigma, func.param, arg, func.body, "App")
        case Plus(left=left, right=right) | Minus(left=left, right=right):
            node = type(e)
            if not is_value(phi, left):
                sigma, left, rule = _step(phi, sigma, left)
                return sigma, node(left, right), rule
            if not is_value(phi, right):
                sigma, right, rule = _step(phi, sigma, right)
                return sigma, node(left, right), rule
            if not (isinstance(left, IntLit) and isinstance(right, IntLit)):
                raise _stuck(f"arithmetic on non-integers in {pretty(e)}")
            if isinstance(e, Plus):
                return sigma, checked_int(left.value + right.value), "Plus"
            return sigma, checked_int(left.value - right.value), "Minus"
        case Let(name=name, bound=bound, body=body):
            if not is_value(phi, bound):
                sigma, bound, rule = _step(phi, sigma, bound)
                return sigma, Let(name, bound, body), rule
            return _bind(sigma, name, bound, body, "Let")
        case DropAfter(name=name, body=body):
            if not is_value(phi, body):
                sigma, body, rule = _step(phi, sigma, body)
                return sigma, DropAfter(name, body), rule
            return sigma.drop(name), body, "Drop-After-2"
        case RetrieveAfter(name=name, saved=saved, body=body):
            if not is_value(phi, body):
                sigma, body, rule = _step(phi, sigma, body)
                return sigma, RetrieveAfter(name, saved, body), rule
            return sigma.replace(name, saved), body, "Retrieve-After-2"
    raise _stuck(f"no rule applies to {pretty(e)}")


def step(phi: RuntimeCtx, sigma: Store, e: Expr) -> Tuple[Store, Expr]:
    """
    Perform exactly one transition.

    :param phi: runtime context.
    :param sigma: current store.
    :param e: expression that is not a value.
    :raises ExecutionError: R-STUCK or R-OVERFLOW.
    :return: successor configuration.
    """
    next_store, next_expr, _ = _step(phi, sigma, e)
    return next_store, next_expr


def run_counted(
    phi: RuntimeCtx,
    e: Expr,
    max_steps: int = DEFAULT_MAX_STEPS,
    observer: Optional[StepObserver] = None,
) -> RunOutcome:
    """
    Execute a ready program to a value.

    :param phi: runtime context.
    :param e: program expression.
    :param max_steps: transition budget.
    :param observer: receives every transition.
    :raises ExecutionError: R-MAX-STEPS, R-STUCK or R-OVERFLOW.
    :return: final value and the number of steps taken.
    """
    sigma = Store()
    steps = 0
    while not is_value(phi, e):
        if steps >= max_steps:
            raise ExecutionError(
                RuntimeErrorCode.MAX_STEPS,
                f"no value after {max_steps} steps",
            )
        next_store, next_expr, rule = _step(phi, sigma, e)
        if observer is not None:
            observer(Transition(sigma, e, rule, next_store, next_expr))
        sigma, e = next_store, next_expr
        steps += 1
    if len(sigma):
        raise _stuck(f"store {sigma} is not empty at the end of the run")
    logger.debug("evaluated to {} in {} steps", pretty(e), steps)
    return RunOutcome(to_value(e), steps)


def run(
    phi: RuntimeCtx,
    e: Expr,
    max_steps: int = DEFAULT_MAX_STEPS,
    observer: Optional[StepObserver] = None,
) -> Value:
    """Evaluate to a value; see run_counted."""
    return run_counted(phi, e, max_steps, observer).value


def format_transition(transition: Transition) -> str:
    """Render a transition as `⟨σ⟩ ; e  --RULE-->  ⟨σ′⟩ ; e′`."""
    return (
        f"{transition.store} ; {pretty(transition.expr)}  "
        f"--{transition.rule}-->  "
        f"{transition.next_store} ; {pretty(transition.next_expr)}"
    )

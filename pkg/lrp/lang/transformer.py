"""
Compile-time transformation.

Evaluates every type-property construct, monomorphizes functions into the
functional context and leaves a property-free program for the runtime.
"""

from dataclasses import dataclass
from typing import Callable, FrozenSet, Mapping, Optional, Set, Tuple, Union

from loguru import logger

from lrp.lang.ast import (
    INT,
    UNIT,
    App,
    ArrowType,
    ByArgFunc,
    ByArgType,
    EraseProp,
    Expr,
    Extract,
    Func,
    FuncCtx,
    GetProp,
    IfHas,
    IntLit,
    Let,
    Minus,
    MonoFunc,
    MonoKey,
    MonoRef,
    Plus,
    Property,
    PropertiedType,
    PropertiedVal,
    RawFunc,
    Scope,
    SetProp,
    Type,
    UnitLit,
    Var,
    free_vars,
    is_arrow,
    pretty,
    pretty_type,
    type_equal,
    walk,
)
from lrp.lang.errors import LanguageError, TransformError, TransformErrorCode
from lrp.lang.typechecker import TypeChecker


@dataclass(frozen=True)
class Plain:
    """
    The variable stays in the output at the given type.

    `name` is the runtime name when the binder was renamed.
    """

    type: Type
    name: Optional[str] = None


@dataclass(frozen=True)
class Rewrite:
    """The variable is replaced by an already transformed expression."""

    replacement: Expr
    type: Type


Binding = Union[Plain, Rewrite]
RuleObserver = Callable[[str], None]


def _runtime_name(name: str, binding: Binding) -> Optional[str]:
    if isinstance(binding, Plain):
        return binding.name or name
    replacement = binding.replacement
    if isinstance(replacement, PropertiedVal):
        replacement = replacement.underlying
    return replacement.name if isinstance(replacement, Var) else None


def _fixed(binding: Binding) -> Callable[[str], Binding]:
    return lambda _param: binding


def _plain(param_type: Type) -> Callable[[str], Binding]:
    return lambda param: Plain(param_type, param)


def _rebound(param_type: Type) -> Callable[[str], Binding]:
    return lambda param: Rewrite(PropertiedVal(Var(param)), param_type)


class TransformEnv(Scope[Binding]):
    """
    Bindings of the transformation judgment.

    Besides the visible bindings it remembers every runtime name whose
    binder encloses the current position, shadowed ones included.
    """

    __slots__ = ("live",)

    def __init__(
        self,
        entries: Optional[Mapping[str, Binding]] = None,
        live: FrozenSet[str] = frozenset(),
    ) -> None:
        super().__init__(entries)
        self.live = live

    def extend(self, name: str, value: Binding) -> "TransformEnv":
        """Bind a name and record its runtime name as live."""
        entries = dict(self.items())
        entries.pop(name, None)
        entries[name] = value
        runtime = _runtime_name(name, value)
        live = self.live if runtime is None else self.live | {runtime}
        return TransformEnv(entries, live)

    @classmethod
    def of(cls, scope: Scope[Binding]) -> "TransformEnv":
        """Adopt a plain scope, treating its bindings as live."""
        if isinstance(scope, TransformEnv):
            return scope
        env = cls()
        for name, binding in scope.items():
            env = env.extend(name, binding)
        return env


def identifiers(e: Expr) -> FrozenSet[str]:
    """Every identifier written in a program, bound or free."""
    names: Set[str] = set()
    for node in walk(e):
        match node:
            case Var(name=name):
                names.add(name)
            case Let(name=name):
                names.add(name)
            case Func(fname=fname, param=param):
                names.update((fname, param))
            case IfHas(scrutinee=scrutinee, bind_as=bind_as):
                names.update((scrutinee, bind_as))
    return frozenset(names)


def captured_names(e: Expr) -> FrozenSet[str]:
    """
    Names that code may read away from their binder.

    These are the free variables of function bodies and of property
    payloads: both run (or are spliced) where the dynamic store may hold a
    later binding of the same name.
    """
    names: Set[str] = set()
    for node in walk(e):
        match node:
            case Func(param=param, body=body):
                names |= free_vars(body) - {param}
            case SetProp(value=value):
                names |= free_vars(value)
    return frozenset(names)


@dataclass(frozen=True)
class TransformResult:
    """Outcome of the transformation judgment: Δ, output expression and its type."""

    delta: FuncCtx
    expr: Expr
    type: Type


def fresh_index(delta: FuncCtx, fname: str) -> int:
    """
    Smallest unused monomorphization index for a function.

    :param delta: functional context.
    :param fname: function name.
    :return: natural number >= 1.
    """
    used = delta.indices(fname)
    index = 1
    while index in used:
        index += 1
    return index


def mono_lookup(delta: FuncCtx, key: MonoKey) -> Optional[Tuple[str, int]]:
    """Find an existing monomorphization registered under an equal key."""
    return delta.cache.get(key)


def _fresh_raw_name(delta: FuncCtx, fname: str) -> str:
    name = fname
    while name in delta.raw:
        name += "'"
    return name


def _internal(message: str) -> TransformError:
    return TransformError(TransformErrorCode.INTERNAL, message)


def _underlying(result: TransformResult) -> Expr:
    if not isinstance(result.expr, PropertiedVal):
        raise _internal(
            f"propertied expression {pretty(result.expr)} is not a propertied value",
        )
    return result.expr.underlying


def _typing_env(env: TransformEnv) -> Scope[Type]:
    return env.map(lambda binding: binding.type)


def _yields_code(env: TransformEnv, e: IfHas) -> bool:
    """Whether an if-has evaluates to a function or a propertied value."""
    try:
        result = TypeChecker().infer(_typing_env(env), e)
    except LanguageError as exc:
        raise _internal(f"cannot type if-has on {e.scrutinee}: {exc.message}") from exc
    return is_arrow(result) or isinstance(result, PropertiedType)


class Transformer:
    """
    The transformation judgment as a syntax-directed pass.

    Binders of captured names get a runtime name no other binder uses, so
    the dynamically scoped store resolves them like lexical scope would.
    The observer only sees the label of every rule fired.

    :param observer: optional callback receiving rule labels.
    :param captured: names read by function bodies or property payloads.
    :param source_names: identifiers of the source, never reused as
        runtime names.
    """

    def __init__(
        self,
        observer: Optional[RuleObserver] = None,
        captured: FrozenSet[str] = frozenset(),
        source_names: FrozenSet[str] = frozenset(),
    ) -> None:
        self.observer = observer
        self.captured = captured
        self.source_names = source_names
        self.binders: Set[str] = set()

    def _binder(self, name: str) -> str:
        if name not in self.captured:
            return name
        fresh = name
        while fresh in self.binders or (
            fresh != name and fresh in self.source_names
        ):
            fresh += "'"
        self.binders.add(fresh)
        return fresh

    def _fire(self, rule: str) -> None:
        if self.observer is not None:
            self.observer(rule)

    def transform(  # noqa: C901, PLR0911
        self,
        env: TransformEnv,
        delta: FuncCtx,
        e: Expr,
    ) -> TransformResult:
        """
        Transform one expression.

        :param env: bindings of the variables in scope.
        :param delta: functional context threaded through the pass.
        :param e: expression that type-checks under env.
        :raises TransformError: when a rule's premise cannot be met.
        :return: new context, transformed expression and its type.
        """
        env = TransformEnv.of(env)
        match e:
            case IntLit():
                self._fire("R-V-Int")
                return TransformResult(delta, e, INT)
            case UnitLit():
                self._fire("R-V-Unit")
                return TransformResult(delta, e, UNIT)
            case MonoRef(fname=fname, index=index):
                mono = delta.lookup_mono(fname, index)
                if mono is None:
                    raise TransformError(
                        TransformErrorCode.UNKNOWN_FUNC,
                        f"unknown monomorphization {fname}[{index}]",
                    )
                self._fire("R-V-Func")
                return TransformResult(delta, e, mono.signature)
            case Var():
                return self._var(env, delta, e)
            case Func():
                return self._func(env, delta, e)
            case SetProp():
                return self._set(env, delta, e)
            case GetProp():
                return self._get(env, delta, e)
            case Extract(target=target):
                inner = self.transform(env, delta, target)
                if not isinstance(inner.type, PropertiedType):
                    raise _internal(f"extract of non-propertied {pretty(target)}")
                self._fire("R-Ext")
                return TransformResult(inner.delta, _underlying(inner), inner.type.base)
            case EraseProp(target=target, prop=prop):
                inner = self.transform(env, delta, target)
                found = self._find_prop(inner, prop)
                self._fire("R-Erase")
                return TransformResult(
                    inner.delta,
                    inner.expr,
                    found[0].without(prop),
                )
            case IfHas():
                return self._if_has(env, delta, e)
            case Let():
                return self._let(env, delta, e)
            case Plus() | Minus():
                return self._arith(env, delta, e)
            case App():
                return self._app(env, delta, e)
        raise _internal(f"cannot transform {type(e).__name__}")

    def _var(self, env: TransformEnv, delta: FuncCtx, e: Var) -> TransformResult:
        binding = env.lookup(e.name)
        if binding is None:
            raise _internal(f"unbound variable {e.name}")
        self._fire("R-S-Var")
        if isinstance(binding, Rewrite):
            return TransformResult(delta, binding.replacement, binding.type)
        if binding.name is not None and binding.name != e.name:
            return TransformResult(delta, Var(binding.name, e.pos), binding.type)
        return TransformResult(delta, e, binding.type)

    def _func(self, env: TransformEnv, delta: FuncCtx, e: Func) -> TransformResult:
        try:
            result_type = TypeChecker().infer(
                _typing_env(env).extend(e.param, e.param_type),
                e.body,
            )
        except LanguageError as exc:
            raise _internal(f"cannot type body of {e.fname}: {exc.message}") from exc
        name = _fresh_raw_name(delta, e.fname)
        entry = RawFunc(name, e.param, e.param_type, e.body, result_type, scope=env)
        arrow = ArrowType(e.param_type, result_type)
        binding: Binding = (
            Plain(arrow) if name == e.fname else Rewrite(Var(name), arrow)
        )
        self._fire("R-Func")
        return self.transform(
            env.extend(e.fname, binding),
            delta.with_raw(entry),
            e.cont,
        )

    def _set(self, env: TransformEnv, delta: FuncCtx, e: SetProp) -> TransformResult:
        target = self.transform(env, delta, e.target)
        value = self.transform(env, target.delta, e.value)
        if isinstance(value.type, PropertiedType):
            raise _internal(f"property {e.prop} holds a propertied value")
        prop = Property(e.prop, value.expr, value.type)
        if not isinstance(target.type, PropertiedType):
            self._fire("R-Set-1")
            return TransformResult(
                value.delta,
                PropertiedVal(target.expr),
                PropertiedType(target.type, (prop,)),
            )
        self._fire("R-Set-3" if target.type.find(e.prop) else "R-Set-2")
        _underlying(target)
        return TransformResult(value.delta, target.expr, target.type.with_prop(prop))

    def _find_prop(
        self,
        result: TransformResult,
        name: str,
    ) -> Tuple[PropertiedType, Property]:
        if isinstance(result.type, PropertiedType):
            prop = result.type.find(name)
            if prop is not None:
                return result.type, prop
        raise TransformError(
            TransformErrorCode.NO_PROP,
            f"{pretty_type(result.type)} has no property {name}",
        )

    def _splice(self, env: TransformEnv, delta: FuncCtx, prop: Property) -> Expr:
        """
        Hand out a stored property expression at its use site.

        Stored expressions are already transformed, so their variables are
        runtime names. Each must still have its binder around the use site;
        function references name functional context entries.
        """
        escaping = sorted(
            name
            for name in free_vars(prop.expr)
            if name not in env.live and name not in delta.raw
        )
        if escaping:
            raise TransformError(
                TransformErrorCode.SPLICE_SCOPE,
                f"property {prop.name} refers to {', '.join(escaping)}, "
                "which is not bound where it is used",
            )
        return prop.expr

    def _get(self, env: TransformEnv, delta: FuncCtx, e: GetProp) -> TransformResult:
        target = self.transform(env, delta, e.target)
        _, prop = self._find_prop(target, e.prop)
        self._fire("R-Get")
        return TransformResult(
            target.delta,
            self._splice(env, target.delta, prop),
            prop.type,
        )

    def _if_has(self, env: TransformEnv, delta: FuncCtx, e: IfHas) -> TransformResult:
        scrutinee = self.transform(env, delta, Var(e.scrutinee))
        delta = scrutinee.delta
        if not isinstance(scrutinee.type, PropertiedType):
            self._fire("R-If-Has-1")
            wrapped = Rewrite(
                PropertiedVal(scrutinee.expr),
                PropertiedType(scrutinee.type),
            )
            return self.transform(
                env.extend(e.scrutinee, wrapped),
                delta,
                e.else_branch,
            )
        prop = scrutinee.type.find(e.prop)
        if prop is None:
            self._fire("R-If-Has-2")
            return self.transform(env, delta, e.else_branch)
        if not type_equal(prop.type, e.prop_type):
            self._fire("R-If-Has-3")
            return self.transform(env, delta, e.else_branch)
        spliced = self._splice(env, delta, prop)
        if not (is_arrow(prop.type) or _yields_code(env, e)):
            self._fire("R-If-Has-4")
            name = self._binder(e.bind_as)
            plain_env = env.extend(e.bind_as, Plain(prop.type, name))
            branch = self.transform(plain_env, delta, e.then_branch)
            return TransformResult(
                branch.delta,
                Let(name, spliced, branch.expr),
                branch.type,
            )
        self._fire("R-If-Has-5")
        rewrite_env = env.extend(e.bind_as, Rewrite(spliced, prop.type))
        return self.transform(rewrite_env, delta, e.then_branch)

    def _let(self, env: TransformEnv, delta: FuncCtx, e: Let) -> TransformResult:
        bound = self.transform(env, delta, e.bound)
        if isinstance(bound.type, PropertiedType):
            underlying = _underlying(bound)
            if is_arrow(bound.type.base):
                self._fire("R-Let-Prop-2")
                return self.transform(
                    env.extend(e.name, Rewrite(bound.expr, bound.type)),
                    bound.delta,
                    e.body,
                )
            self._fire("R-Let-Prop-1")
            name = self._binder(e.name)
            rebound = Rewrite(PropertiedVal(Var(name)), bound.type)
            body = self.transform(env.extend(e.name, rebound), bound.delta, e.body)
            node = Let(name, underlying, body.expr)
            return TransformResult(body.delta, node, body.type)
        if is_arrow(bound.type):
            self._fire("R-Let-Func")
            return self.transform(
                env.extend(e.name, Rewrite(bound.expr, bound.type)),
                bound.delta,
                e.body,
            )
        self._fire("R-P-Let")
        name = self._binder(e.name)
        scoped = env.extend(e.name, Plain(bound.type, name))
        body = self.transform(scoped, bound.delta, e.body)
        node = Let(name, bound.expr, body.expr)
        return TransformResult(body.delta, node, body.type)

    def _arith(
        self,
        env: TransformEnv,
        delta: FuncCtx,
        e: Union[Plus, Minus],
    ) -> TransformResult:
        left = self.transform(env, delta, e.left)
        right = self.transform(env, left.delta, e.right)
        left_wrapped = isinstance(left.type, PropertiedType)
        right_wrapped = isinstance(right.type, PropertiedType)
        rule = "R-P-Plus" if isinstance(e, Plus) else "R-P-Minus"
        if left_wrapped and right_wrapped:
            rule += "-1"
        elif left_wrapped:
            rule += "-2"
        elif right_wrapped:
            rule += "-3"
        self._fire(rule)
        left_expr = _underlying(left) if left_wrapped else left.expr
        right_expr = _underlying(right) if right_wrapped else right.expr
        node = Plus if isinstance(e, Plus) else Minus
        return TransformResult(right.delta, node(left_expr, right_expr), INT)

    def _resolve(self, delta: FuncCtx, expr: Expr) -> Union[RawFunc, MonoRef]:
        if isinstance(expr, MonoRef) and delta.lookup_mono(expr.fname, expr.index):
            return expr
        if isinstance(expr, Var):
            entry = delta.lookup_raw(expr.name)
            if entry is not None:
                return entry
        raise TransformError(
            TransformErrorCode.UNKNOWN_FUNC,
            f"{pretty(expr)} does not name a known function",
        )

    def _app(self, env: TransformEnv, delta: FuncCtx, e: App) -> TransformResult:
        if isinstance(e.fn, MonoRef):
            return self._app_compiled(env, delta, e.fn, e.arg)
        callee = self.transform(env, delta, e.fn)
        if not isinstance(callee.type, ArrowType):
            raise TransformError(
                TransformErrorCode.UNKNOWN_FUNC,
                f"cannot apply {pretty(callee.expr)}"
                f" of type {pretty_type(callee.type)}",
            )
        entry = self._resolve(callee.delta, callee.expr)
        if isinstance(entry, MonoRef):
            return self._app_compiled(env, callee.delta, entry, e.arg)
        arg = self.transform(env, callee.delta, e.arg)
        delta = arg.delta

        key: MonoKey
        binding: Callable[[str], Binding]
        passed: Optional[Expr] = None
        if is_arrow(arg.type):
            passed = arg.expr
            key = ByArgFunc(entry.name, pretty(passed))
            binding = _fixed(Rewrite(passed, arg.type))
            family = "Func"
        elif isinstance(arg.type, PropertiedType) and is_arrow(arg.type.base):
            passed = _underlying(arg)
            key = ByArgFunc(entry.name, pretty(passed), arg.type)
            binding = _fixed(Rewrite(arg.expr, arg.type))
            family = "Prop-2"
        elif isinstance(arg.type, PropertiedType):
            key = ByArgType(entry.name, arg.type)
            binding = _rebound(arg.type)
            family = "Prop-1"
        else:
            key = ByArgType(entry.name, arg.type)
            binding = _plain(arg.type)
            family = ""

        cached = mono_lookup(delta, key)
        stage = "Ready" if cached is not None else "Compile"
        self._fire(f"R-App-{stage}-{family}" if family else f"R-App-{stage}")
        delta, index = self._monomorphize(delta, entry, key, binding)

        if passed is not None:
            delta, emitted = self.materialize(delta, passed)
        elif isinstance(arg.type, PropertiedType):
            emitted = _underlying(arg)
        else:
            emitted = arg.expr
        return TransformResult(
            delta,
            App(MonoRef(entry.name, index), emitted),
            entry.result_type,
        )

    def _app_compiled(
        self,
        env: TransformEnv,
        delta: FuncCtx,
        callee: MonoRef,
        arg_expr: Expr,
    ) -> TransformResult:
        mono = delta.lookup_mono(callee.fname, callee.index)
        if mono is None:
            raise TransformError(
                TransformErrorCode.UNKNOWN_FUNC,
                f"unknown monomorphization {pretty(callee)}",
            )
        arg = self.transform(env, delta, arg_expr)
        self._fire("R-App-Compiled")
        emitted = _underlying(arg) if isinstance(arg.type, PropertiedType) else arg.expr
        return TransformResult(arg.delta, App(callee, emitted), mono.result_type)

    def _monomorphize(
        self,
        delta: FuncCtx,
        entry: RawFunc,
        key: MonoKey,
        binding: Callable[[str], Binding],
    ) -> Tuple[FuncCtx, int]:
        cached = mono_lookup(delta, key)
        if cached is not None:
            return delta, cached[1]
        scope = TransformEnv.of(entry.scope if entry.scope is not None else Scope())
        param = self._binder(entry.param)
        scope = scope.extend(entry.param, binding(param))
        body = self.transform(scope, delta, entry.body)
        if not type_equal(body.type, entry.result_type):
            raise _internal(
                f"body of {entry.name} transformed to {pretty_type(body.type)}, "
                f"expected {pretty_type(entry.result_type)}",
            )
        index = fresh_index(body.delta, entry.name)
        mono = MonoFunc(
            entry.name,
            index,
            param,
            entry.param_type,
            body.expr,
            entry.result_type,
        )
        logger.debug("monomorphized {}[{}] for {}", entry.name, index, key)
        return body.delta.with_mono(mono, key), index

    def materialize(self, delta: FuncCtx, ref: Expr) -> Tuple[FuncCtx, Expr]:
        """
        Turn a function reference into a runtime value.

        A raw function is represented by its monomorphization at the
        declared parameter type. A higher-order function that was never
        monomorphized has no such value and stays a raw name, which
        `ready` rejects.

        :param delta: functional context.
        :param ref: function name or monomorphization reference.
        :return: context and the reference's MonoRef, or the raw name.
        """
        entry = self._resolve(delta, ref)
        if isinstance(entry, MonoRef):
            return delta, entry
        if is_arrow(entry.param_type):
            existing = sorted(delta.indices(entry.name))
            if not existing:
                logger.debug("{} has no monomorphization to pass", entry.name)
                return delta, Var(entry.name)
            return delta, MonoRef(entry.name, existing[0])
        delta, index = self._monomorphize(
            delta,
            entry,
            ByArgType(entry.name, entry.param_type),
            _plain(entry.param_type),
        )
        return delta, MonoRef(entry.name, index)


def transform(env: Scope[Binding], delta: FuncCtx, e: Expr) -> TransformResult:
    """
    Transform an expression under given contexts.

    Captured names are collected from the expression and from the bodies
    of the raw functions already in delta.
    """
    captured = set(captured_names(e))
    source_names = set(identifiers(e))
    for entry in delta.raw.values():
        captured |= captured_names(entry.body) | (free_vars(entry.body) - {entry.param})
        source_names |= identifiers(entry.body) | {entry.param}
    transformer = Transformer(
        captured=frozenset(captured),
        source_names=frozenset(source_names),
    )
    return transformer.transform(TransformEnv.of(env), delta, e)


def transform_program(
    e: Expr,
    observer: Optional[RuleObserver] = None,
) -> TransformResult:
    """
    Transform a checked program under empty contexts.

    A function-typed program result is materialized to a MonoRef when
    it has one.

    :param e: program accepted by check_program.
    :param observer: optional rule observer.
    :return: transformation result.
    """
    transformer = Transformer(observer, captured_names(e), identifiers(e))
    result = transformer.transform(TransformEnv(), FuncCtx(), e)
    if is_arrow(result.type):
        delta, ref = transformer.materialize(result.delta, result.expr)
        result = TransformResult(delta, ref, result.type)
    return result

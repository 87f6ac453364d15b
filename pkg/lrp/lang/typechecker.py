"""Syntax-directed type inference over a persistent environment."""

from typing import Optional

from lrp.lang.ast import (
    INT,
    UNIT,
    App,
    ArrowType,
    DropAfter,
    EraseProp,
    Expr,
    Extract,
    Func,
    FuncCtx,
    GetProp,
    IfHas,
    IntLit,
    IntType,
    Let,
    Minus,
    MonoRef,
    Plus,
    Property,
    PropertiedType,
    RetrieveAfter,
    Scope,
    SetProp,
    Type,
    UnitLit,
    Var,
    is_arrow,
    pretty_type,
    type_equal,
)
from lrp.lang.errors import TypeCheckError, TypeErrorCode

TypingEnv = Scope[Type]


def _fail(code: TypeErrorCode, message: str, e: Expr) -> TypeCheckError:
    return TypeCheckError(code, message, getattr(e, "pos", None))


class TypeChecker:
    """
    Type inference for expressions.

    With a functional context the checker also accepts the internal
    runtime nodes: MonoRef is typed from the context, drop/retrieve are
    typed as their bodies.

    :param delta: functional context enabling the runtime extension.
    """

    def __init__(self, delta: Optional[FuncCtx] = None) -> None:
        self.delta = delta

    def wf_type(self, env: TypingEnv, t: Type) -> None:
        """
        Check that a type is well formed.

        :param env: typing environment for property expressions.
        :param t: type to check.
        :raises TypeCheckError: E-DUP-PROP or E-MISMATCH.
        """
        if isinstance(t, ArrowType):
            self.wf_type(env, t.domain)
            self.wf_type(env, t.codomain)
            return
        if not isinstance(t, PropertiedType):
            return
        self.wf_type(env, t.base)
        seen = set()
        for prop in t.props:
            if prop.name in seen:
                raise TypeCheckError(
                    TypeErrorCode.DUP_PROP,
                    f"duplicate property {prop.name}",
                )
            seen.add(prop.name)
            actual = self.infer(env, prop.expr)
            if not type_equal(actual, prop.type):
                raise _fail(
                    TypeErrorCode.MISMATCH,
                    f"property {prop.name} declared {pretty_type(prop.type)} "
                    f"but its expression has type {pretty_type(actual)}",
                    prop.expr,
                )

    def infer(self, env: TypingEnv, e: Expr) -> Type:  # noqa: C901, PLR0911
        """
        Infer the type of an expression.

        :param env: typing environment.
        :param e: expression.
        :raises TypeCheckError: when e is ill-typed.
        :return: the unique type of e.
        """
        match e:
            case IntLit():
                return INT
            case UnitLit():
                return UNIT
            case Var(name=name):
                found = env.lookup(name)
                if found is None:
                    raise _fail(
                        TypeErrorCode.UNDEF_VAR,
                        f"undefined variable {name}",
                        e,
                    )
                return found
            case Func():
                return self._infer_func(env, e)
            case Let():
                return self._infer_let(env, e)
            case IfHas():
                return self._infer_if_has(env, e)
            case SetProp():
                return self._infer_set(env, e)
            case GetProp(target=target, prop=prop):
                target_type = self._require_propertied(env, target, e)
                return self._require_prop(target_type, prop, e).type
            case EraseProp(target=target, prop=prop):
                target_type = self._require_propertied(env, target, e)
                self._require_prop(target_type, prop, e)
                return target_type.without(prop)
            case Extract(target=target):
                return self._require_propertied(env, target, e).base
            case App():
                return self._infer_app(env, e)
            case Plus(left=left, right=right) | Minus(left=left, right=right):
                self._require_int(env, left)
                self._require_int(env, right)
                return INT
            case MonoRef(fname=fname, index=index) if self.delta is not None:
                mono = self.delta.lookup_mono(fname, index)
                if mono is None:
                    raise _fail(
                        TypeErrorCode.UNDEF_VAR,
                        f"unknown monomorphization {fname}[{index}]",
                        e,
                    )
                return mono.signature
            case DropAfter(body=body) if self.delta is not None:
                return self.infer(env, body)
            case RetrieveAfter(saved=saved, body=body) if self.delta is not None:
                self.infer(env, saved)
                return self.infer(env, body)
        raise _fail(
            TypeErrorCode.MISMATCH,
            f"{type(e).__name__} is not a source expression",
            e,
        )

    def _infer_func(self, env: TypingEnv, e: Func) -> Type:
        self.wf_type(env, e.param_type)
        plain = self.infer(env.extend(e.param, e.param_type), e.body)
        wrapped = self.infer(
            env.extend(e.param, PropertiedType(e.param_type)),
            e.body,
        )
        if not type_equal(plain, wrapped):
            raise _fail(
                TypeErrorCode.MISMATCH,
                f"body of {e.fname} has type {pretty_type(plain)} for a plain "
                f"argument but {pretty_type(wrapped)} for a propertied one",
                e,
            )
        self._check_result(plain, f"function {e.fname}", e)
        return self.infer(env.extend(e.fname, ArrowType(e.param_type, plain)), e.cont)

    def _infer_let(self, env: TypingEnv, e: Let) -> Type:
        bound = self.infer(env, e.bound)
        result = self.infer(env.extend(e.name, bound), e.body)
        self._check_result(result, f"let {e.name}", e)
        return result

    def _check_result(self, t: Type, what: str, e: Expr) -> None:
        if isinstance(t, PropertiedType):
            raise _fail(
                TypeErrorCode.RET_PROPERTIED,
                f"{what} cannot return the propertied type {pretty_type(t)}",
                e,
            )
        if is_arrow(t):
            raise _fail(
                TypeErrorCode.RET_FUNC,
                f"{what} cannot return the function type {pretty_type(t)}",
                e,
            )

    def _infer_if_has(self, env: TypingEnv, e: IfHas) -> Type:
        scrutinee = env.lookup(e.scrutinee)
        if scrutinee is None:
            raise _fail(
                TypeErrorCode.IFHAS_SCRUTINEE,
                f"if-has scrutinee {e.scrutinee} is not bound",
                e,
            )
        self.wf_type(env, e.prop_type)
        if isinstance(scrutinee, PropertiedType):
            rest = scrutinee.without(e.prop)
        else:
            rest = PropertiedType(scrutinee)
        binding = Property(e.prop, Var(e.bind_as), e.prop_type)
        then_env = env.extend(e.bind_as, e.prop_type).extend(
            e.scrutinee,
            rest.with_prop(binding),
        )
        then_type = self.infer(then_env, e.then_branch)
        else_type = self.infer(env.extend(e.scrutinee, rest), e.else_branch)
        if not type_equal(then_type, else_type):
            raise _fail(
                TypeErrorCode.MISMATCH,
                f"if-has branches disagree: {pretty_type(then_type)} "
                f"versus {pretty_type(else_type)}",
                e,
            )
        return then_type

    def _infer_set(self, env: TypingEnv, e: SetProp) -> Type:
        target = self.infer(env, e.target)
        payload = self.infer(env, e.value)
        if isinstance(payload, PropertiedType):
            raise _fail(
                TypeErrorCode.MISMATCH,
                f"property {e.prop} cannot hold a value of propertied type "
                f"{pretty_type(payload)}",
                e.value,
            )
        prop = Property(e.prop, e.value, payload)
        if isinstance(target, PropertiedType):
            return target.with_prop(prop)
        return PropertiedType(target, (prop,))

    def _infer_app(self, env: TypingEnv, e: App) -> Type:
        callee = self.infer(env, e.fn)
        if not isinstance(callee, ArrowType):
            raise _fail(
                TypeErrorCode.NOT_FUNC,
                f"cannot apply a value of type {pretty_type(callee)}",
                e,
            )
        arg = self.infer(env, e.arg)
        accepted = type_equal(arg, callee.domain) or (
            isinstance(arg, PropertiedType) and type_equal(arg.base, callee.domain)
        )
        if not accepted:
            raise _fail(
                TypeErrorCode.MISMATCH,
                f"argument has type {pretty_type(arg)}, expected "
                f"{pretty_type(callee.domain)}",
                e.arg,
            )
        return callee.codomain

    def _require_int(self, env: TypingEnv, e: Expr) -> None:
        t = self.infer(env, e)
        if isinstance(t, PropertiedType):
            t = t.base
        if not isinstance(t, IntType):
            raise _fail(
                TypeErrorCode.MISMATCH,
                f"arithmetic operand has type {pretty_type(t)}, expected int",
                e,
            )

    def _require_propertied(
        self,
        env: TypingEnv,
        target: Expr,
        e: Expr,
    ) -> PropertiedType:
        t = self.infer(env, target)
        if not isinstance(t, PropertiedType):
            raise _fail(
                TypeErrorCode.NOT_PROPERTIED,
                f"expected a propertied value, found {pretty_type(t)}",
                e,
            )
        return t

    def _require_prop(
        self,
        target: PropertiedType,
        name: str,
        e: Expr,
    ) -> Property:
        prop = target.find(name)
        if prop is None:
            raise _fail(TypeErrorCode.NO_PROP, f"no property {name}", e)
        return prop


def wf_type(env: TypingEnv, t: Type) -> None:
    """Check that every property expression inside t types at its annotation."""
    TypeChecker().wf_type(env, t)


def infer(env: TypingEnv, e: Expr) -> Type:
    """Type an expression under env, without a functional context."""
    return TypeChecker().infer(env, e)


def check_program(e: Expr) -> Type:
    """
    Type a closed program.

    :param e: parsed program.
    :raises TypeCheckError: on the first type error.
    :return: the program's type.
    """
    return TypeChecker().infer(Scope(), e)

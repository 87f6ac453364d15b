"""
Reference evaluator for ready programs.

Calls are inlined into lets, then the program is reduced by
substitution. Nothing is shared with the small-step machine.
"""

from typing import Mapping, Tuple

from lrp.lang.ast import (
    App,
    Expr,
    IntLit,
    Let,
    Minus,
    MonoFunc,
    MonoRef,
    Plus,
    UnitLit,
    Var,
    pretty,
)
from lrp.lang.errors import ExecutionError, RuntimeErrorCode
from lrp.lang.runtime import MAX_INT, MIN_INT, Value, to_value
from lrp.lang.transformer import TransformResult

Monos = Mapping[Tuple[str, int], MonoFunc]


def _stuck(message: str) -> ExecutionError:
    return ExecutionError(RuntimeErrorCode.STUCK, message)


def inline(monos: Monos, e: Expr) -> Expr:
    """
    Replace every call `f[n] a` by `let x = a in body`.

    A function argument binds nothing: the callee body never mentions
    its parameter in that case.

    :param monos: monomorphizations by (name, index).
    :param e: runtime expression.
    :return: call-free expression.
    """
    match e:
        case App(fn=MonoRef(fname=fname, index=index), arg=arg):
            mono = monos.get((fname, index))
            if mono is None:
                raise _stuck(f"unknown monomorphization {fname}[{index}]")
            body = inline(monos, mono.body)
            if isinstance(arg, MonoRef):
                return body
            return Let(mono.param, inline(monos, arg), body)
        case App():
            raise _stuck(f"application of unresolved function {pretty(e.fn)}")
        case Plus(left=left, right=right):
            return Plus(inline(monos, left), inline(monos, right))
        case Minus(left=left, right=right):
            return Minus(inline(monos, left), inline(monos, right))
        case Let(name=name, bound=bound, body=body):
            return Let(name, inline(monos, bound), inline(monos, body))
    return e


def substitute(e: Expr, name: str, value: Expr) -> Expr:
    """Capture-free for closed values: no renaming is ever needed."""
    match e:
        case Var(name=found) if found == name:
            return value
        case Plus(left=left, right=right):
            return Plus(substitute(left, name, value), substitute(right, name, value))
        case Minus(left=left, right=right):
            return Minus(substitute(left, name, value), substitute(right, name, value))
        case Let(name=bound_name, bound=bound, body=body):
            bound = substitute(bound, name, value)
            if bound_name != name:
                body = substitute(body, name, value)
            return Let(bound_name, bound, body)
    return e


def _arith(value: int) -> IntLit:
    if not MIN_INT <= value <= MAX_INT:
        raise ExecutionError(RuntimeErrorCode.OVERFLOW, f"integer overflow: {value}")
    return IntLit(value)


def evaluate(e: Expr) -> Expr:
    """Big-step reduction of a call-free expression to a value."""
    match e:
        case IntLit() | UnitLit() | MonoRef():
            return e
        case Var(name=name):
            raise _stuck(f"free variable {name}")
        case Plus(left=left, right=right) | Minus(left=left, right=right):
            lhs, rhs = evaluate(left), evaluate(right)
            if not (isinstance(lhs, IntLit) and isinstance(rhs, IntLit)):
                raise _stuck(f"arithmetic on non-integers in {pretty(e)}")
            if isinstance(e, Plus):
                return _arith(lhs.value + rhs.value)
            return _arith(lhs.value - rhs.value)
        case Let(name=name, bound=bound, body=body):
            return evaluate(substitute(body, name, evaluate(bound)))
    raise _stuck(f"cannot evaluate {pretty(e)}")


def oracle_eval(tr: TransformResult) -> Value:
    """
    Evaluate a transformed program independently of the runtime.

    :param tr: transformation result of a ready program.
    :raises ExecutionError: R-STUCK or R-OVERFLOW.
    :return: the program's value.
    """
    monos = dict(tr.delta.monos)
    return to_value(evaluate(inline(monos, tr.expr)))

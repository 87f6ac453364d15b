"""Typing of runtime configurations ⟨σ; e⟩."""

from lrp.lang.ast import Expr, FuncCtx, Scope, Type
from lrp.lang.runtime import Store
from lrp.lang.typechecker import TypeChecker, TypingEnv


def store_env(checker: TypeChecker, sigma: Store) -> TypingEnv:
    """Type every stored value; later bindings shadow earlier ones."""
    env: TypingEnv = Scope()
    for name, value in sigma.bindings:
        env = env.extend(name, checker.infer(Scope(), value))
    return env


def configuration_type(delta: FuncCtx, sigma: Store, e: Expr) -> Type:
    """
    Type a configuration under the runtime extension of the checker.

    :param delta: functional context of the program.
    :param sigma: store.
    :param e: expression being executed.
    :raises TypeCheckError: when the configuration is ill-typed.
    :return: type of e.
    """
    checker = TypeChecker(delta)
    return checker.infer(store_env(checker, sigma), e)

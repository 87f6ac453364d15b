from typing import Callable, List

import pytest

from lrp.lang.ast import INT, App, DropAfter, IntLit, Let, MonoRef, Plus, Var, pretty
from lrp.lang.errors import ExecutionError
from lrp.lang.pipeline import run_source, transform_source
from lrp.lang.runtime import (
    FuncV,
    IntV,
    RuntimeFunc,
    Store,
    Transition,
    UnitV,
    format_transition,
    is_value,
    ready,
    run,
    run_counted,
    step,
)
from lrp.lang.transformer import TransformResult


def rules_of(source: str) -> List[str]:
    """Machine rules fired while running a program."""
    fired: List[str] = []
    run_source(source, observer=lambda transition: fired.append(transition.rule))
    return fired


@pytest.mark.parametrize(
    ("name", "value"),
    [
        ("captured_var", IntV(6)),
        ("compiled_prop", IntV(6)),
        ("shadowed", IntV(3)),
        ("higher_order", IntV(6)),
    ],
)
def test_listings(name: str, value: IntV, program_source: Callable[[str], str]) -> None:
    """
    Listings evaluate to their expected values.

    :param name: listing name.
    :param value: expected value.
    :param program_source: listing reader.
    """
    assert run_source(program_source(name)).value == value


def test_captured_var_trace(program_source: Callable[[str], str]) -> None:
    """
    The first configurations show the dynamically scoped store.

    :param program_source: listing reader.
    """
    transitions: List[Transition] = []
    outcome = run_source(program_source("captured_var"), observer=transitions.append)
    assert outcome.steps == 7
    assert [transition.rule for transition in transitions] == [
        "Let-1",
        "App-1",
        "Var",
        "Var",
        "Plus",
        "Drop-After-2",
        "Drop-After-2",
    ]
    assert format_transition(transitions[0]) == (
        "⟨⟩ ; let y = 5 in f[1] 1  --Let-1-->  ⟨y ↪ 5⟩ ; drop y after f[1] 1"
    )
    assert str(transitions[1].next_store) == "⟨y ↪ 5 , x ↪ 1⟩"
    assert pretty(transitions[1].next_expr) == "drop y after drop x after x + y"
    assert len(transitions[-1].next_store) == 0


def test_compiled_prop_rules(program_source: Callable[[str], str]) -> None:
    """Only the let introduced by if-has remains to run inside the call."""
    assert rules_of(program_source("compiled_prop")) == [
        "Let-1",
        "Var",
        "App-1",
        "Let-1",
        "Var",
        "Plus",
        "Drop-After-2",
        "Drop-After-2",
        "Drop-After-2",
    ]


def test_shadowing_let_retrieves() -> None:
    """An inner let of the same name restores the outer value afterwards."""
    assert rules_of("let x = 1 in let x = 2 in x") == [
        "Let-1",
        "Let-2",
        "Var",
        "Retrieve-After-2",
        "Drop-After-2",
    ]


def test_parameter_shadowing_retrieves() -> None:
    """A parameter that shadows a let restores it after the call."""
    source = "let x = 10 in func f x : int with x + 1 in f 2 + x"
    assert "App-2" in rules_of(source)
    assert run_source(source).value == IntV(13)


def test_function_argument_binds_nothing(program_source: Callable[[str], str]) -> None:
    """Calls with a function argument leave the store alone."""
    assert "App-With-Func" in rules_of(program_source("higher_order"))


def test_values() -> None:
    """Final expressions read back as values."""
    assert run_source("()").value == UnitV()
    assert run_source("0 - 7").value == IntV(-7)
    assert run_source("func f x : int with x + 0 in f").value == FuncV("f", 1)
    assert str(FuncV("f", 1)) == "f[1]"


def test_is_value() -> None:
    """References are values only when the runtime context has them."""
    phi = {("f", 1): RuntimeFunc("x", Plus(Var("x"), IntLit(1)))}
    assert is_value(phi, IntLit(3))
    assert is_value(phi, MonoRef("f", 1))
    assert not is_value(phi, MonoRef("g", 1))
    assert not is_value(phi, Var("x"))


def test_step() -> None:
    """A call binds the parameter and schedules its removal."""
    phi = {("f", 1): RuntimeFunc("x", Plus(Var("x"), IntLit(1)))}
    sigma, expr = step(phi, Store(), App(MonoRef("f", 1), IntLit(2)))
    assert sigma == Store((("x", IntLit(2)),))
    assert expr == DropAfter("x", Plus(Var("x"), IntLit(1)))


def test_step_on_value_is_stuck() -> None:
    """Values do not step."""
    with pytest.raises(ExecutionError) as info:
        step({}, Store(), IntLit(1))
    assert info.value.code == "R-STUCK"


def test_unbound_variable_is_stuck() -> None:
    """Reading a name missing from the store is stuck."""
    with pytest.raises(ExecutionError) as info:
        run({}, Var("x"))
    assert info.value.code == "R-STUCK"


def test_overflow() -> None:
    """Results outside 64 bits are trapped."""
    with pytest.raises(ExecutionError) as info:
        run_source("9223372036854775807 + 1")
    assert info.value.code == "R-OVERFLOW"
    with pytest.raises(ExecutionError):
        run_source("0 - 9223372036854775807 - 2")


def test_max_steps() -> None:
    """The step budget counts transitions."""
    with pytest.raises(ExecutionError) as info:
        run_source("1 + 2", max_steps=0)
    assert info.value.code == "R-MAX-STEPS"
    assert run_counted({}, Plus(IntLit(1), IntLit(2)), max_steps=1).steps == 1


def test_unready_propertied_program(program_source: Callable[[str], str]) -> None:
    """A program of propertied type never runs."""
    with pytest.raises(ExecutionError) as info:
        run_source(program_source("unready"))
    assert info.value.code == "R-UNREADY"


def test_ready_builds_runtime_context(program_source: Callable[[str], str]) -> None:
    """Ready erases parameter types from the monomorphizations."""
    program_type, result = transform_source(program_source("compiled_prop"))
    phi, expr = ready(program_type, result)
    assert pretty(expr) == "let y = 5 in f[1] y"
    assert list(phi) == [("f", 1)]
    assert phi[("f", 1)].param == "x"
    assert pretty(phi[("f", 1)].body) == "let c = 5 in c + 1"


def test_ready_rejects_unresolved_application() -> None:
    """Applying a variable cannot run."""
    result = TransformResult(
        delta=transform_source("0")[1].delta,
        expr=Let("g", IntLit(1), App(Var("g"), IntLit(1))),
        type=INT,
    )
    with pytest.raises(ExecutionError) as info:
        ready(INT, result)
    assert info.value.code == "R-UNREADY"


def test_ready_rejects_uncompiled_function_argument() -> None:
    """A higher-order function passed without a monomorphization cannot run."""
    with pytest.raises(ExecutionError) as info:
        run_source(
            "func h k : int -> int with 0 in "
            "func g q : (int -> int) -> int with 1 in g h",
        )
    assert info.value.code == "R-UNREADY"
    assert "h" in info.value.message


@pytest.mark.parametrize(
    ("source", "value"),
    [
        ("let y = 5 in func f x : int with x + y in let y = () in f 1", IntV(6)),
        (
            "let y = 5 in func f x : int with x + y in "
            "func g y : int with f y in g 100",
            IntV(105),
        ),
        ("let z = 1 in let v = set(0, c, z) in let z = 100 in get(v, c)", IntV(1)),
        (
            "let y' = 7 in let y = 5 in func f x : int with x + y in "
            "let y = 1 in f y'",
            IntV(12),
        ),
    ],
)
def test_captured_names_resolve_lexically(source: str, value: IntV) -> None:
    """
    Later bindings of a name do not leak into bodies and payloads that read it.

    :param source: program rebinding a captured name.
    :param value: value under lexical scope.
    """
    assert run_source(source).value == value

from typing import Callable, List, Tuple

import pytest

from lrp.lang.ast import (
    INT,
    UNIT,
    App,
    ByArgType,
    FuncCtx,
    IntLit,
    MonoFunc,
    MonoRef,
    PropertiedType,
    Scope,
    Var,
    pretty,
)
from lrp.lang.errors import TransformError
from lrp.lang.parser import parse_program
from lrp.lang.pipeline import render_delta
from lrp.lang.transformer import (
    TransformResult,
    TransformEnv,
    Transformer,
    fresh_index,
    mono_lookup,
    transform,
    transform_program,
)
from lrp.lang.typechecker import check_program


def run_transform(source: str) -> Tuple[TransformResult, List[str]]:
    """
    Check and transform a program, recording the rules fired.

    :param source: program text.
    :return: result and rule labels in firing order.
    """
    program = parse_program(source)
    check_program(program)
    fired: List[str] = []
    return transform_program(program, fired.append), fired


def test_captured_var(program_source: Callable[[str], str]) -> None:
    """
    The function is compiled once for an int argument.

    :param program_source: listing reader.
    """
    result, fired = run_transform(program_source("captured_var"))
    assert pretty(result.expr) == "let y = 5 in f[1] 1"
    assert result.type == INT
    assert render_delta(result.delta) == [
        "f :: x : int . x + y : int",
        "f[1] ▷ x : int . x + y : int",
    ]
    assert fired == [
        "R-V-Int",
        "R-P-Let",
        "R-Func",
        "R-S-Var",
        "R-V-Int",
        "R-App-Compile",
        "R-S-Var",
        "R-S-Var",
        "R-P-Plus",
    ]


def test_compiled_prop(program_source: Callable[[str], str]) -> None:
    """
    The if-has inside the body is decided by the argument's type.

    :param program_source: listing reader.
    """
    result, fired = run_transform(program_source("compiled_prop"))
    assert pretty(result.expr) == "let y = 5 in f[1] y"
    expected = "f[1] ▷ x : int . let c = 5 in c + 1 : int"
    assert render_delta(result.delta)[1] == expected
    assert "R-Let-Prop-1" in fired
    assert "R-App-Compile-Prop-1" in fired
    assert "R-If-Has-4" in fired


def test_monomorphization_reused() -> None:
    """Equal argument types share one monomorphization."""
    result, fired = run_transform("func f x : int with x + 1 in f 1 + f 2")
    assert pretty(result.expr) == "f[1] 1 + f[1] 2"
    assert list(result.delta.monos) == [("f", 1)]
    assert fired.count("R-App-Compile") == 1
    assert fired.count("R-App-Ready") == 1


def test_monomorphization_per_argument_type() -> None:
    """A propertied argument gets its own monomorphization."""
    result, fired = run_transform("func f x : int with x + 1 in f 1 + f set(2, c, 3)")
    assert pretty(result.expr) == "f[1] 1 + f[2] 2"
    assert list(result.delta.monos) == [("f", 1), ("f", 2)]
    assert pretty(result.delta.monos[("f", 2)].body) == "x + 1"
    assert "R-P-Plus-2" in fired


def test_same_propertied_argument_reuses() -> None:
    """The same propertied argument twice compiles once."""
    result, fired = run_transform(
        "func f x : int with x + 1 in let y = set(2, c, 3) in let a = f y in f y",
    )
    assert list(result.delta.monos) == [("f", 1)]
    assert "R-App-Ready-Prop-1" in fired


def test_shadowed_function_is_primed(program_source: Callable[[str], str]) -> None:
    """A redefined function keeps the earlier entry reachable."""
    result, _ = run_transform(program_source("shadowed"))
    assert pretty(result.expr) == "f'[1] 1"
    assert render_delta(result.delta) == [
        "f :: x : int . x + 1 : int",
        "f' :: x : int . x + 2 : int",
        "f'[1] ▷ x : int . x + 2 : int",
    ]


def test_propertied_function_argument(program_source: Callable[[str], str]) -> None:
    """
    A propertied function argument is resolved inside the callee body.

    :param program_source: listing reader.
    """
    result, fired = run_transform(program_source("higher_order"))
    assert pretty(result.expr) == "h[1] f[1]"
    assert pretty(result.delta.monos[("h", 1)].body) == "let t = 5 in f[1] t"
    assert list(result.delta.monos) == [("f", 1), ("h", 1)]
    assert "R-App-Compile-Prop-2" in fired


def test_function_argument_without_properties() -> None:
    """A plain function argument takes the else branch of if-has."""
    result, fired = run_transform(
        "func f x : int with x + 1 in "
        "func h k : int -> int with "
        "if-has k tag : int bind-as t in 0 else extract(k) 2 in h f",
    )
    assert pretty(result.expr) == "h[1] f[1]"
    assert pretty(result.delta.monos[("h", 1)].body) == "f[1] 2"
    assert "R-App-Compile-Func" in fired
    assert "R-If-Has-1" in fired


@pytest.mark.parametrize(
    ("source", "expected", "rule"),
    [
        (
            "let v = 1 in if-has v c : int bind-as b in b else extract(v)",
            "let v = 1 in v",
            "R-If-Has-1",
        ),
        (
            "let v = set(1, d, 2) in if-has v c : int bind-as b in b else extract(v)",
            "let v = 1 in v",
            "R-If-Has-2",
        ),
        (
            "let v = set(1, c, ()) in if-has v c : int bind-as b in b else extract(v)",
            "let v = 1 in v",
            "R-If-Has-3",
        ),
        (
            "let v = set(1, c, 2 + 3) in if-has v c : int bind-as b in b else 0",
            "let v = 1 in let b = 2 + 3 in b",
            "R-If-Has-4",
        ),
        (
            "func f x : int with x + 1 in let v = set(0, g, f) in "
            "if-has v g : int -> int bind-as h in h 2 else 0",
            "let v = 0 in f[1] 2",
            "R-If-Has-5",
        ),
    ],
)
def test_if_has(source: str, expected: str, rule: str) -> None:
    """
    Only the branch selected by the scrutinee's type survives.

    :param source: program.
    :param expected: pretty transformed expression.
    :param rule: if-has rule that must fire.
    """
    result, fired = run_transform(source)
    assert pretty(result.expr) == expected
    assert rule in fired


@pytest.mark.parametrize(
    ("source", "expected", "rule"),
    [
        ("get(set(1, c, 2 + 3), c)", "2 + 3", "R-Get"),
        ("extract(set(set(1, c, 2), d, ()))", "1", "R-Set-2"),
        ("extract(set(set(1, c, 2), c, 3))", "1", "R-Set-3"),
        ("extract(erase(set(1, c, 2), c))", "1", "R-Erase"),
        ("set(1, c, 1) + set(2, d, ())", "1 + 2", "R-P-Plus-1"),
        ("3 - set(2, d, ())", "3 - 2", "R-P-Minus-3"),
        ("func f x : int with x + 0 in let g = f in g 4", "f[1] 4", "R-Let-Func"),
        (
            "func f x : int with x + 0 in let g = set(f, c, 1) in extract(g) 4",
            "f[1] 4",
            "R-Let-Prop-2",
        ),
    ],
)
def test_property_constructs(source: str, expected: str, rule: str) -> None:
    """
    Property constructs leave only their underlying values behind.

    :param source: program.
    :param expected: pretty transformed expression.
    :param rule: rule that must fire.
    """
    result, fired = run_transform(source)
    assert pretty(result.expr) == expected
    assert rule in fired


def test_propertied_program_type() -> None:
    """A bare set transforms to a propertied value."""
    result, _ = run_transform("set(5, c, 5)")
    assert isinstance(result.type, PropertiedType)
    assert pretty(result.expr) == "propertied[5]"


def test_function_result_is_materialized() -> None:
    """A function-typed program ends in a reference."""
    result, _ = run_transform("func f x : int with x + 0 in f")
    assert result.expr == MonoRef("f", 1)


def test_fresh_index() -> None:
    """The smallest unused index is taken, gaps included."""
    delta = FuncCtx()
    assert fresh_index(delta, "f") == 1
    for index in (1, 3):
        mono = MonoFunc("f", index, "x", INT, Var("x"), INT)
        delta = delta.with_mono(mono, ByArgType(f"f{index}", INT))
    assert fresh_index(delta, "f") == 2
    assert fresh_index(delta, "g") == 1


def test_mono_lookup() -> None:
    """Lookup goes by key equality."""
    mono = MonoFunc("f", 1, "x", INT, Var("x"), INT)
    delta = FuncCtx().with_mono(mono, ByArgType("f", INT))
    assert mono_lookup(delta, ByArgType("f", INT)) == ("f", 1)
    assert mono_lookup(delta, ByArgType("f", UNIT)) is None


def test_app_compiled() -> None:
    """An application of an existing monomorphization only transforms the argument."""
    mono = MonoFunc("f", 1, "x", INT, Var("x"), INT)
    delta = FuncCtx().with_mono(mono, ByArgType("f", INT))
    fired: List[str] = []
    result = Transformer(fired.append).transform(
        TransformEnv(),
        delta,
        App(MonoRef("f", 1), IntLit(4)),
    )
    assert result.expr == App(MonoRef("f", 1), IntLit(4))
    assert result.type == INT
    assert result.delta == delta
    assert fired == ["R-V-Int", "R-App-Compiled"]


def test_unknown_monomorphization() -> None:
    """Applying a missing monomorphization fails."""
    with pytest.raises(TransformError) as info:
        transform(Scope(), FuncCtx(), App(MonoRef("g", 1), IntLit(1)))
    assert info.value.code == "T-UNKNOWN-FUNC"


def test_higher_order_function_without_value() -> None:
    """A higher-order function never compiled is passed by its raw name."""
    result, fired = run_transform(
        "func h k : int -> int with 0 in "
        "func g q : (int -> int) -> int with 1 in g h",
    )
    assert pretty(result.expr) == "g[1] h"
    assert list(result.delta.monos) == [("g", 1)]
    assert "R-App-Compile-Func" in fired


def test_later_binders_of_captured_names_are_renamed() -> None:
    """A let after the definition does not rebind what the body reads."""
    result, _ = run_transform(
        "let y = 5 in func f x : int with x + y in let y = () in f 1",
    )
    assert pretty(result.expr) == "let y = 5 in let y' = () in f[1] 1"
    assert pretty(result.delta.monos[("f", 1)].body) == "x + y"


def test_captured_parameter_is_renamed() -> None:
    """A parameter named like a captured variable gets a runtime name of its own."""
    result, _ = run_transform(
        "let y = 5 in func f x : int with x + y in "
        "func g y : int with f y in g 100",
    )
    mono = result.delta.monos[("g", 1)]
    assert mono.param == "y'"
    assert pretty(mono.body) == "f[1] y'"
    assert pretty(result.delta.monos[("f", 1)].body) == "x + y"


def test_uncaptured_binders_keep_their_names() -> None:
    """Names no body reads are left alone."""
    result, _ = run_transform("let x = 1 in let x = 2 in x")
    assert pretty(result.expr) == "let x = 1 in let x = 2 in x"


def test_renaming_avoids_source_names() -> None:
    """Generated names skip identifiers the program already uses."""
    result, _ = run_transform(
        "let y' = 7 in let y = 5 in func f x : int with x + y in "
        "let y = 1 in f y'",
    )
    assert pretty(result.expr) == "let y' = 7 in let y = 5 in let y'' = 1 in f[1] y'"


def test_spliced_payload_keeps_its_binding() -> None:
    """A payload read after its variable is shadowed still sees the old binding."""
    result, _ = run_transform(
        "let z = 1 in let v = set(0, c, z) in let z = 100 in get(v, c)",
    )
    assert pretty(result.expr) == "let z = 1 in let v = 0 in let z' = 100 in z"


def test_payload_differences_give_separate_monos() -> None:
    """Arguments differing only in a payload compile separately."""
    result, fired = run_transform(
        "func f x : int with x + 1 in f set(1, c, 5) + f set(1, c, 6)",
    )
    assert list(result.delta.monos) == [("f", 1), ("f", 2)]
    assert pretty(result.expr) == "f[1] 1 + f[2] 1"
    assert fired.count("R-App-Compile-Prop-1") == 2


def test_if_has_branch_transformed_once() -> None:
    """A then-branch of propertied type is transformed in a single pass."""
    result, fired = run_transform(
        "let v = set(1, c, 2) in "
        "extract(if-has v c : int bind-as b in set(b, d, 1) else set(0, d, 1))",
    )
    assert pretty(result.expr) == "let v = 1 in 2"
    assert fired.count("R-Set-1") == 2
    assert fired.count("R-If-Has-5") == 1
    assert "R-If-Has-4" not in fired


def test_splice_out_of_scope() -> None:
    """A stored expression cannot be used where its variables are unbound."""
    with pytest.raises(TransformError) as info:
        run_transform(
            "func g z : int with if-has z c : int bind-as b in b else 0 in "
            "let v = 3 in g set(1, c, v)",
        )
    assert info.value.code == "T-SPLICE-SCOPE"


def test_deterministic() -> None:
    """Transforming twice gives equal results."""
    source = "func f x : int with x + 1 in f 1 + f set(2, c, 3)"
    first, _ = run_transform(source)
    second, _ = run_transform(source)
    assert first.expr == second.expr
    assert first.delta.monos == second.delta.monos

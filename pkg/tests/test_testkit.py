from typing import Callable

import pytest
from pydantic import ValidationError

from lrp.lang.ast import INT, IntLit, Let, MonoRef, Plus, UnitLit, Var
from lrp.lang.errors import ExecutionError
from lrp.lang.parser import parse_program
from lrp.lang.pipeline import transform_source
from lrp.lang.runtime import IntV, Store
from lrp.lang.typechecker import check_program
from lrp.testkit.erasure import erasure_violations
from lrp.testkit.generator import GenConfig, gen_well_typed
from lrp.testkit.oracle import evaluate, inline, oracle_eval, substitute
from lrp.testkit.strategies import corpus
from lrp.testkit.configurations import configuration_type


def test_generation_is_deterministic() -> None:
    """Equal seeds give equal programs."""
    assert gen_well_typed(GenConfig(seed=42)) == gen_well_typed(GenConfig(seed=42))


def test_zero_depth_is_a_literal() -> None:
    """Without a depth budget only literals are generated."""
    for seed in range(20):
        program = gen_well_typed(GenConfig(seed=seed, max_depth=0))
        assert isinstance(program, (IntLit, UnitLit))


def test_generated_programs_check() -> None:
    """Every generated program is accepted by the checker."""
    for program in corpus(50):
        check_program(program)


def test_config_defaults_and_freezing() -> None:
    """Defaults come from settings and configurations are immutable."""
    cfg = GenConfig()
    assert cfg.max_depth == 5
    assert cfg.int_range == (-16, 16)
    with pytest.raises(ValidationError):
        cfg.seed = 3  # type: ignore[misc]
    with pytest.raises(ValidationError):
        GenConfig(max_props=0)


@pytest.mark.parametrize(("name", "value"), [("captured_var", 6), ("compiled_prop", 6)])
def test_oracle_on_listings(
    name: str,
    value: int,
    program_source: Callable[[str], str],
) -> None:
    """
    The oracle agrees with the listings' known values.

    :param name: listing name.
    :param value: expected value.
    :param program_source: listing reader.
    """
    _, result = transform_source(program_source(name))
    assert oracle_eval(result) == IntV(value)


def test_inline_captured_var(program_source: Callable[[str], str]) -> None:
    """Calls are replaced by lets of the parameter around the body."""
    _, result = transform_source(program_source("captured_var"))
    inlined = inline(result.delta.monos, result.expr)
    assert inlined == Let("y", IntLit(5), Let("x", IntLit(1), Plus(Var("x"), Var("y"))))


def test_function_argument_is_not_bound(program_source: Callable[[str], str]) -> None:
    """A function argument is passed as a reference, not bound."""
    _, result = transform_source(program_source("higher_order"))
    assert result.expr.arg == MonoRef("f", 1)  # type: ignore[attr-defined]
    assert oracle_eval(result) == IntV(6)


def test_substitution_respects_shadowing() -> None:
    """Substitution stops at a let that rebinds the name."""
    program = parse_program("x + (let x = 2 in x)")
    assert evaluate(substitute(program, "x", IntLit(1))) == IntLit(3)


def test_oracle_overflow() -> None:
    """The oracle traps overflow like the machine."""
    _, result = transform_source("9223372036854775807 + 1")
    with pytest.raises(ExecutionError) as info:
        oracle_eval(result)
    assert info.value.code == "R-OVERFLOW"


def test_configuration_type(program_source: Callable[[str], str]) -> None:
    """Stored values type the variables of a configuration."""
    _, result = transform_source(program_source("captured_var"))
    sigma = Store((("y", IntLit(5)), ("x", IntLit(1))))
    assert configuration_type(result.delta, sigma, parse_program("x + y")) == INT
    assert configuration_type(result.delta, Store(), result.expr) == INT


def test_erasure_violations(program_source: Callable[[str], str]) -> None:
    """Only programs that keep properties are reported."""
    _, result = transform_source(program_source("compiled_prop"))
    assert erasure_violations(result) == []
    _, propertied = transform_source(program_source("unready"))
    assert erasure_violations(propertied)

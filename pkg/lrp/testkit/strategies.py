"""Hypothesis strategies over generated programs."""

from typing import Any, List

from hypothesis import strategies as st

from lrp.lang.ast import Expr
from lrp.testkit.generator import GenConfig, gen_well_typed

SEEDS = st.integers(min_value=0, max_value=2**63 - 1)


def gen_configs(**overrides: Any) -> st.SearchStrategy[GenConfig]:
    """Generator configurations differing only in their seed."""
    return st.builds(lambda seed: GenConfig(seed=seed, **overrides), SEEDS)


def well_typed_programs(**overrides: Any) -> st.SearchStrategy[Expr]:
    """Closed programs accepted by check_program, one per drawn seed."""
    return gen_configs(**overrides).map(gen_well_typed)


def corpus(size: int, **overrides: Any) -> List[Expr]:
    """Deterministic corpus: the programs for seeds 0 .. size - 1."""
    return [gen_well_typed(GenConfig(seed=seed, **overrides)) for seed in range(size)]

"""Type-directed generator of closed, well-typed programs."""

import random
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from lrp.lang.ast import (
    INT,
    UNIT,
    App,
    ArrowType,
    EraseProp,
    Expr,
    Extract,
    Func,
    GetProp,
    IfHas,
    IntLit,
    Let,
    Minus,
    Plus,
    SetProp,
    Type,
    UnitLit,
    Var,
)
from lrp.lang.errors import LanguageError
from lrp.lang.typechecker import check_program
from lrp.settings import settings

PROP_NAMES = ("c", "d", "q", "r")
MAX_ATTEMPTS = 8

Props = Tuple[Tuple[str, Type], ...]


class GenConfig(BaseModel):
    """Knobs of the program generator; generation is a pure function of them."""

    model_config = ConfigDict(frozen=True)

    seed: int = 0
    max_depth: int = Field(default_factory=lambda: settings.gen_max_depth, ge=0)
    max_funcs: int = Field(default_factory=lambda: settings.gen_max_funcs, ge=0)
    max_props: int = Field(default_factory=lambda: settings.gen_max_props, ge=1)
    int_range: Tuple[int, int] = Field(
        default_factory=lambda: (settings.gen_int_min, settings.gen_int_max),
    )


@dataclass(frozen=True)
class _Slot:
    """
    What the generator knows about a name in scope.

    kinds: `value` (exactly `type`), `poly` (a parameter, typed both as
    `type` and as `[type]⟨⟩`), `props` (propertied over `type` with at
    least `props`), `func` (a defined function).
    """

    name: str
    kind: str
    type: Type
    props: Props = ()
    shadowable: bool = False

    def prop_type(self, name: str) -> Optional[Type]:
        for prop, prop_type in self.props:
            if prop == name:
                return prop_type
        return None


Ctx = Tuple[_Slot, ...]
Option = Tuple[float, Callable[[], Expr]]


def _with_prop(props: Props, name: str, prop_type: Type) -> Props:
    if any(prop == name for prop, _ in props):
        return tuple(
            (prop, prop_type if prop == name else old) for prop, old in props
        )
    return (*props, (name, prop_type))


def _without_prop(props: Props, name: str) -> Props:
    return tuple((prop, old) for prop, old in props if prop != name)


def _first_order(t: Type) -> bool:
    return isinstance(t, ArrowType) and not isinstance(t.domain, ArrowType)


class ProgramGenerator:
    """
    Builds a program for a target type, then an inhabitant for every
    subterm, tracking what each name in scope may be used for.

    Binder names are unique, except for lets that deliberately shadow an
    earlier value, possibly at another type, and parameters that reuse
    such a name.
    """

    def __init__(self, cfg: GenConfig) -> None:
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.counters: Dict[str, int] = {}
        self.funcs = 0
        self.prop_names = PROP_NAMES[: min(cfg.max_props, len(PROP_NAMES))]

    def fresh(self, prefix: str) -> str:
        """Next unused name with the given prefix."""
        count = self.counters.get(prefix, 0)
        self.counters[prefix] = count + 1
        return f"{prefix}{count}"

    def _choose(self, options: Sequence[Option]) -> Expr:
        weights = [weight for weight, _ in options]
        _, build = self.rng.choices(list(options), weights=weights)[0]
        return build()

    # scope queries

    @staticmethod
    def visible(ctx: Ctx) -> List[_Slot]:
        """Slots not hidden by a later one of the same name, innermost first."""
        seen = set()
        slots = []
        for slot in reversed(ctx):
            if slot.name not in seen:
                seen.add(slot.name)
                slots.append(slot)
        return slots

    def _slots(self, ctx: Ctx, kind: str, t: Optional[Type] = None) -> List[_Slot]:
        return [
            slot
            for slot in self.visible(ctx)
            if slot.kind == kind and (t is None or slot.type == t)
        ]

    def _arrow_types(self, ctx: Ctx) -> List[Type]:
        found: List[Type] = []
        for slot in self.visible(ctx):
            if slot.kind in {"func", "value"} and _first_order(slot.type):
                if slot.type not in found:
                    found.append(slot.type)
        return found

    def _fref_options(self, ctx: Ctx, arrow: Type) -> List[Callable[[], Expr]]:
        options: List[Callable[[], Expr]] = []
        for slot in self.visible(ctx):
            if slot.kind in {"func", "value"} and slot.type == arrow:
                options.append(lambda name=slot.name: Var(name))
            elif slot.kind == "props" and slot.type == arrow:
                options.append(lambda name=slot.name: Extract(Var(name)))
            if slot.kind == "props":
                for prop, prop_type in slot.props:
                    if prop_type == arrow:
                        options.append(
                            lambda name=slot.name, prop=prop: GetProp(Var(name), prop),
                        )
        return options

    def _has_arg(self, ctx: Ctx, domain: Type) -> bool:
        if not isinstance(domain, ArrowType):
            return True
        if self._fref_options(ctx, domain):
            return True
        return any(
            slot.kind == "poly" and slot.type == domain for slot in self.visible(ctx)
        )

    # leaves

    def literal(self, t: Type) -> Expr:
        """A constant of type t; negative integers are spelled `0 - n`."""
        if t == UNIT:
            return UnitLit()
        low, high = self.cfg.int_range
        value = self.rng.randint(low, high)
        if value < 0:
            return Minus(IntLit(0), IntLit(-value))
        return IntLit(value)

    def leaf(self, ctx: Ctx, t: Type) -> Expr:
        """A variable of type t when one is visible, otherwise a constant."""
        candidates = self._slots(ctx, "value", t)
        if candidates and self.rng.random() < 0.4:
            return Var(self.rng.choice(candidates).name)
        return self.literal(t)

    def program(self) -> Expr:
        """A closed program of type int, or occasionally unit."""
        target = UNIT if self.rng.random() < 0.1 else INT
        if self.cfg.max_depth == 0:
            if target == UNIT:
                return UnitLit()
            return IntLit(self.rng.randint(0, max(0, self.cfg.int_range[1])))
        return self.expr((), target, self.cfg.max_depth)

    # expressions of a base type

    def expr(self, ctx: Ctx, t: Type, depth: int) -> Expr:  # noqa: C901
        """
        Generate an expression of type int or unit.

        :param ctx: names in scope.
        :param t: INT or UNIT.
        :param depth: remaining nesting budget.
        :return: expression typed exactly t.
        """
        if depth <= 0:
            return self.leaf(ctx, t)
        options: List[Option] = [
            (2, lambda: self.leaf(ctx, t)),
            (3, lambda: self.let(ctx, t, depth)),
            (1, lambda: self.inline_get(ctx, t, depth)),
            (1, lambda: Extract(self.prop_expr(ctx, t, depth - 1)[0])),
        ]
        if t == INT:
            options.append((3, lambda: self.arith(ctx, depth)))
        if self.funcs < self.cfg.max_funcs:
            options.append((2, lambda: self.func(ctx, t, depth)))
        if self._callees(ctx, t):
            options.append((4, lambda: self.app(ctx, t, depth)))
        if self._scrutinees(ctx):
            options.append((3, lambda: self.if_has(ctx, t, depth)))
        getters = [
            (slot, prop)
            for slot in self._slots(ctx, "props")
            for prop, prop_type in slot.props
            if prop_type == t
        ]
        if getters:
            slot, prop = self.rng.choice(getters)
            options.append(
                (2, lambda name=slot.name, prop=prop: GetProp(Var(name), prop)),
            )
        extractable = self._slots(ctx, "props", t)
        if extractable:
            target = self.rng.choice(extractable).name
            options.append((2, lambda: Extract(Var(target))))
        shadowable = [
            slot for slot in self._slots(ctx, "value") if slot.shadowable
        ]
        if shadowable:
            options.append((1, lambda: self.shadow(ctx, t, depth, shadowable)))
        return self._choose(options)

    def operand(self, ctx: Ctx, depth: int) -> Expr:
        """An arithmetic operand, possibly propertied."""
        options: List[Option] = [(4, lambda: self.expr(ctx, INT, depth - 1))]
        wrapped = self._slots(ctx, "poly", INT) + self._slots(ctx, "props", INT)
        if wrapped:
            options.append((2, lambda: Var(self.rng.choice(wrapped).name)))
        options.append((1, lambda: self.prop_expr(ctx, INT, depth - 1)[0]))
        return self._choose(options)

    def arith(self, ctx: Ctx, depth: int) -> Expr:
        """Addition or subtraction."""
        left = self.operand(ctx, depth)
        right = self.operand(ctx, depth)
        return Plus(left, right) if self.rng.random() < 0.6 else Minus(left, right)

    def let(self, ctx: Ctx, t: Type, depth: int) -> Expr:
        """A let with a fresh name."""
        name = self.fresh("v")
        bound, slot = self.bound(ctx, name, depth - 1)
        body = self.expr((*ctx, slot), t, depth - 1)
        return Let(name, bound, body)

    def bound(self, ctx: Ctx, name: str, depth: int) -> Tuple[Expr, _Slot]:
        """Generate a let-bound expression and describe the new name."""
        kind = self.rng.choices(
            ["int", "unit", "props", "func", "poly"],
            weights=[4, 1, 3, 1, 1],
        )[0]
        arrows = self._arrow_types(ctx)
        polys = self._slots(ctx, "poly")
        if kind == "func" and arrows:
            arrow = self.rng.choice(arrows)
            ref = self.rng.choice(self._fref_options(ctx, arrow))()
            return ref, _Slot(name, "value", arrow)
        if kind == "poly" and polys:
            source = self.rng.choice(polys)
            return Var(source.name), _Slot(name, "poly", source.type)
        if kind == "props":
            base = self._prop_base(ctx)
            expr, props = self.prop_expr(ctx, base, depth)
            return expr, _Slot(name, "props", base, props)
        t = UNIT if kind == "unit" else INT
        return self.expr(ctx, t, depth), _Slot(name, "value", t, shadowable=True)

    def shadow(self, ctx: Ctx, t: Type, depth: int, slots: List[_Slot]) -> Expr:
        """A let that rebinds a visible value name, possibly at another type."""
        slot = replace(self.rng.choice(slots), type=self.rng.choice([INT, UNIT]))
        bound = self.expr(ctx, slot.type, depth - 1)
        body = self.expr((*ctx, slot), t, depth - 1)
        return Let(slot.name, bound, body)

    # functions

    def func(self, ctx: Ctx, t: Type, depth: int) -> Expr:
        """A function definition followed by a continuation of type t."""
        self.funcs += 1
        fname = self.fresh("f")
        param_choices: List[Tuple[float, Type]] = [(4, INT), (1, UNIT)]
        param_choices += [(2, arrow) for arrow in self._arrow_types(ctx)]
        param_type = self.rng.choices(
            [choice for _, choice in param_choices],
            weights=[weight for weight, _ in param_choices],
        )[0]
        result_type = UNIT if self.rng.random() < 0.2 else INT
        reusable = [slot.name for slot in self._slots(ctx, "value") if slot.shadowable]
        if param_type in (INT, UNIT) and reusable and self.rng.random() < 0.15:
            param = self.rng.choice(reusable)
        else:
            param = self.fresh("p")
        body = self.expr(
            (*ctx, _Slot(param, "poly", param_type)),
            result_type,
            depth - 1,
        )
        arrow = ArrowType(param_type, result_type)
        cont = self.expr((*ctx, _Slot(fname, "func", arrow)), t, depth - 1)
        return Func(fname, param, param_type, body, cont)

    def _callees(self, ctx: Ctx, t: Type) -> List[Tuple[Callable[[], Expr], ArrowType]]:
        callees: List[Tuple[Callable[[], Expr], ArrowType]] = []
        for slot in self.visible(ctx):
            arrow = slot.type
            if slot.kind in {"func", "value"} and isinstance(arrow, ArrowType):
                callees.append((lambda name=slot.name: Var(name), arrow))
            elif slot.kind == "props" and isinstance(arrow, ArrowType):
                callees.append((lambda name=slot.name: Extract(Var(name)), arrow))
            if slot.kind == "props":
                for prop, prop_type in slot.props:
                    if isinstance(prop_type, ArrowType):
                        callees.append(
                            (
                                lambda name=slot.name, prop=prop: GetProp(
                                    Var(name),
                                    prop,
                                ),
                                prop_type,
                            ),
                        )
        return [
            (build, arrow)
            for build, arrow in callees
            if arrow.codomain == t and self._has_arg(ctx, arrow.domain)
        ]

    def app(self, ctx: Ctx, t: Type, depth: int) -> Expr:
        """A call of a visible function returning t."""
        build, arrow = self.rng.choice(self._callees(ctx, t))
        return App(build(), self.arg(ctx, arrow.domain, depth - 1))

    def arg(self, ctx: Ctx, domain: Type, depth: int) -> Expr:
        """Generate an argument accepted by a parameter of type `domain`."""
        polys = self._slots(ctx, "poly", domain)
        wrapped = self._slots(ctx, "props", domain)
        options: List[Option] = []
        if polys:
            options.append((1, lambda: Var(self.rng.choice(polys).name)))
        if wrapped:
            options.append((1, lambda: Var(self.rng.choice(wrapped).name)))
        if isinstance(domain, ArrowType):
            refs = self._fref_options(ctx, domain)
            if refs:
                options.append((3, lambda: self.rng.choice(refs)()))
                options.append((1, lambda: self.prop_expr(ctx, domain, depth)[0]))
        else:
            options.append((3, lambda: self.expr(ctx, domain, depth)))
            options.append((1, lambda: self.prop_expr(ctx, domain, depth)[0]))
        return self._choose(options)

    # properties

    def _prop_base(self, ctx: Ctx) -> Type:
        choices: List[Type] = [INT, INT, INT, UNIT]
        choices += self._arrow_types(ctx)
        return self.rng.choice(choices)

    def _base_value(self, ctx: Ctx, base: Type, depth: int) -> Expr:
        if isinstance(base, ArrowType):
            return self.rng.choice(self._fref_options(ctx, base))()
        polys = self._slots(ctx, "poly", base)
        if polys and self.rng.random() < 0.3:
            return Var(self.rng.choice(polys).name)
        return self.expr(ctx, base, depth)

    def payload(self, ctx: Ctx) -> Tuple[Expr, Type]:
        """A closed property expression; only function names may occur free."""
        kinds = [(4, INT), (1, UNIT)]
        kinds += [
            (1, slot.type)
            for slot in self._slots(ctx, "func")
            if _first_order(slot.type)
        ]
        payload_type = self.rng.choices(
            [kind for _, kind in kinds],
            weights=[weight for weight, _ in kinds],
        )[0]
        return self.payload_of(ctx, payload_type), payload_type

    def payload_of(self, ctx: Ctx, payload_type: Type) -> Expr:
        """A property payload of the given type."""
        if isinstance(payload_type, ArrowType):
            funcs = self._slots(ctx, "func", payload_type)
            return Var(self.rng.choice(funcs).name)
        calls = [
            slot
            for slot in self._slots(ctx, "func")
            if _first_order(slot.type) and slot.type.codomain == payload_type
        ]
        roll = self.rng.random()
        if calls and roll < 0.2:
            callee = self.rng.choice(calls)
            return App(Var(callee.name), self.literal(callee.type.domain))
        if payload_type == INT and roll < 0.4:
            return Plus(self.literal(INT), self.literal(INT))
        return self.literal(payload_type)

    def _prop_name(self, props: Props) -> str:
        if len(props) >= len(self.prop_names):
            return self.rng.choice([prop for prop, _ in props])
        return self.rng.choice(self.prop_names)

    def prop_expr(self, ctx: Ctx, base: Type, depth: int) -> Tuple[Expr, Props]:
        """
        Generate a propertied expression over `base`.

        :return: the expression and the properties it is known to carry.
        """
        options: List[Tuple[float, Callable[[], Tuple[Expr, Props]]]] = [
            (3, lambda: self._set_fresh(ctx, base, depth)),
        ]
        wrapped = self._slots(ctx, "props", base)
        if wrapped:
            slot = self.rng.choice(wrapped)
            options.append((2, lambda: (Var(slot.name), slot.props)))
            options.append((1, lambda: self._set_on(ctx, Var(slot.name), slot.props)))
        if depth > 0:
            options.append(
                (2, lambda: self._set_on(ctx, *self.prop_expr(ctx, base, depth - 1))),
            )
            options.append(
                (1, lambda: self._erase(*self.prop_expr(ctx, base, depth - 1))),
            )
        weights = [weight for weight, _ in options]
        _, build = self.rng.choices(options, weights=weights)[0]
        return build()

    def _set_fresh(self, ctx: Ctx, base: Type, depth: int) -> Tuple[Expr, Props]:
        target = self._base_value(ctx, base, depth - 1)
        return self._set_on(ctx, target, ())

    def _set_on(self, ctx: Ctx, target: Expr, props: Props) -> Tuple[Expr, Props]:
        name = self._prop_name(props)
        value, value_type = self.payload(ctx)
        return SetProp(target, name, value), _with_prop(props, name, value_type)

    def _erase(self, target: Expr, props: Props) -> Tuple[Expr, Props]:
        if not props:
            return target, props
        name = self.rng.choice([prop for prop, _ in props])
        return EraseProp(target, name), _without_prop(props, name)

    def inline_get(self, ctx: Ctx, t: Type, depth: int) -> Expr:
        """`get` of a property set in place."""
        target, props = self.prop_expr(ctx, self._prop_base(ctx), depth - 1)
        name = self._prop_name(props)
        return GetProp(SetProp(target, name, self.payload_of(ctx, t)), name)

    # if-has

    def _scrutinees(self, ctx: Ctx) -> List[_Slot]:
        return [
            slot
            for slot in self.visible(ctx)
            if slot.kind in {"poly", "props"}
            or (slot.kind == "value" and not isinstance(slot.type, ArrowType))
        ]

    def if_has(self, ctx: Ctx, t: Type, depth: int) -> Expr:
        """An if-has on a visible scrutinee."""
        scrutinee = self.rng.choice(self._scrutinees(ctx))
        known = [prop for prop, _ in scrutinee.props]
        if known and self.rng.random() < 0.6:
            prop = self.rng.choice(known)
        else:
            prop = self.rng.choice(self.prop_names)
        prop_type = scrutinee.prop_type(prop)
        if prop_type is None or self.rng.random() < 0.3:
            prop_type = self.rng.choice([INT, INT, UNIT, *self._arrow_types(ctx)])
        bind_as = self.fresh("b")
        base = replace(scrutinee, kind="props", shadowable=False)
        then_ctx = (
            *ctx,
            _Slot(bind_as, "value", prop_type),
            replace(base, props=_with_prop(scrutinee.props, prop, prop_type)),
        )
        else_ctx = (*ctx, replace(base, props=_without_prop(scrutinee.props, prop)))
        return IfHas(
            scrutinee.name,
            prop,
            prop_type,
            bind_as,
            self.expr(then_ctx, t, depth - 1),
            self.expr(else_ctx, t, depth - 1),
        )


def gen_well_typed(cfg: GenConfig) -> Expr:
    """
    Generate a closed program accepted by check_program.

    Dead ends are regenerated from derived seeds; after a bounded number
    of attempts the generator falls back to a literal.

    :param cfg: generator configuration.
    :return: surface expression.
    """
    for attempt in range(MAX_ATTEMPTS):
        seed = cfg.seed if attempt == 0 else hash((cfg.seed, attempt)) & (2**63 - 1)
        program = ProgramGenerator(cfg.model_copy(update={"seed": seed})).program()
        try:
            check_program(program)
        except LanguageError:
            continue
        return program
    return IntLit(0)

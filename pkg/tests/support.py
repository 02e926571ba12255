"""Hypothesis strategies for randomly shaped descriptors and instances."""

from __future__ import annotations

from dataclasses import dataclass

from hypothesis import strategies as st

from simscript import (
    Kind,
    TypeDescriptor,
    attr_field,
    array_field,
    compound_field,
    element_of,
)
from simscript.values import I64_MAX, I64_MIN

SCALARS = (Kind.INT, Kind.FLOAT, Kind.BOOL, Kind.TEXT)

scalar_values = {
    Kind.INT: st.integers(I64_MIN, I64_MAX),
    Kind.FLOAT: st.floats(allow_nan=False, allow_infinity=False, width=64),
    Kind.BOOL: st.booleans(),
    Kind.TEXT: st.text(max_size=12),
}


@dataclass
class FieldPlan:
    name: str
    kind: Kind
    element: "FieldPlan | None" = None
    inner: "list[FieldPlan] | None" = None


class Obj:
    """Attribute bag standing in for a user model object."""

    def __init__(self, **kwargs):
        self.__dict__.update(kwargs)


def _names(n: int) -> list[str]:
    return [f"m{i}" for i in range(n)]


@st.composite
def field_plans(draw, name: str, depth: int) -> FieldPlan:
    kinds = list(SCALARS) + ([Kind.ARRAY, Kind.COMPOUND] if depth > 0 else [])
    kind = draw(st.sampled_from(kinds))
    if kind is Kind.ARRAY:
        element = draw(field_plans("item", depth - 1))
        return FieldPlan(name, kind, element=element)
    if kind is Kind.COMPOUND:
        inner = draw(plan_lists(depth - 1))
        return FieldPlan(name, kind, inner=inner)
    return FieldPlan(name, kind)


@st.composite
def plan_lists(draw, depth: int) -> list[FieldPlan]:
    count = draw(st.integers(min_value=0, max_value=4))
    return [draw(field_plans(name, depth)) for name in _names(count)]


@st.composite
def descriptor_plans(draw) -> list[FieldPlan]:
    return draw(plan_lists(depth=2))


def build_descriptor(type_name: str, plans: list[FieldPlan]) -> TypeDescriptor:
    fields = []
    for plan in plans:
        fields.append(_build_field(plan))
    return TypeDescriptor(type_name, fields=fields)


def _build_field(plan: FieldPlan):
    if plan.kind is Kind.ARRAY:
        assert plan.element is not None
        elem = _build_element(plan.element)
        factory = None
        if plan.element.kind is Kind.COMPOUND:
            inner_plans = plan.element.inner or []
            factory = lambda ip=inner_plans: default_instance(ip)
        return array_field(plan.name, elem, factory=factory)
    if plan.kind is Kind.COMPOUND:
        inner = build_descriptor(f"{plan.name}_t", plan.inner or [])
        return compound_field(plan.name, inner)
    return attr_field(plan.name, plan.kind)


def _build_element(plan: FieldPlan):
    if plan.kind is Kind.COMPOUND:
        return element_of(Kind.COMPOUND, inner=build_descriptor("elem_t", plan.inner or []))
    if plan.kind is Kind.ARRAY:
        assert plan.element is not None
        return element_of(Kind.ARRAY, element=_build_element(plan.element))
    return element_of(plan.kind)


def default_instance(plans: list[FieldPlan]) -> Obj:
    obj = Obj()
    for plan in plans:
        setattr(obj, plan.name, _default_value(plan))
    return obj


def _default_value(plan: FieldPlan):
    if plan.kind is Kind.INT:
        return 0
    if plan.kind is Kind.FLOAT:
        return 0.0
    if plan.kind is Kind.BOOL:
        return False
    if plan.kind is Kind.TEXT:
        return ""
    if plan.kind is Kind.ARRAY:
        return []
    return default_instance(plan.inner or [])


@st.composite
def instance_values(draw, plans: list[FieldPlan]) -> Obj:
    obj = Obj()
    for plan in plans:
        setattr(obj, plan.name, draw(_value_strategy(plan)))
    return obj


def _value_strategy(plan: FieldPlan):
    if plan.kind in SCALARS:
        return scalar_values[plan.kind]
    if plan.kind is Kind.ARRAY:
        assert plan.element is not None
        return st.lists(_value_strategy(plan.element), max_size=4)
    return instance_values(plan.inner or [])


@st.composite
def described_instances(draw) -> tuple[TypeDescriptor, Obj, list[FieldPlan]]:
    plans = draw(descriptor_plans())
    descriptor = build_descriptor("fuzz_t", plans)
    instance = draw(instance_values(plans))
    return descriptor, instance, plans

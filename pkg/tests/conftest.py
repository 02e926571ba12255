import pytest

from simscript import Kind, Registry, TypeDescriptor, attr_field, method
from simscript.demo import DemoModel, register_demo


class BasicModel:
    """Two-field test model matching the canonical docs example."""

    def __init__(self):
        self.tstep = 0
        self.foo = 0.0

    def step(self):
        self.tstep += 1

    def average_something(self):
        return self.foo / max(self.tstep, 1)


def basic_descriptor() -> TypeDescriptor:
    return TypeDescriptor(
        "model_t",
        fields=[attr_field("tstep", Kind.INT), attr_field("foo", Kind.FLOAT)],
        methods=[
            method("step", lambda m: m.step(), arity=0, returns_value=False),
            method("average_something", lambda m: m.average_something(),
                   arity=0, returns_value=True),
        ],
    )


@pytest.fixture
def basic_registry() -> tuple[Registry, BasicModel]:
    registry = Registry()
    instance = BasicModel()
    registry.register_root("model", basic_descriptor(), instance)
    return registry, instance


@pytest.fixture
def demo_registry() -> tuple[Registry, DemoModel]:
    registry = Registry()
    return registry, register_demo(registry)

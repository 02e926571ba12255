"""Shippable example models.

`DemoModel` is the minimal scripted model (a step counter, one float
parameter, and an embedded RNG state so checkpoints capture everything).
`EcoCell` agents live on a graph and move population to neighbors under
an integer-exact migration rule, optionally with logistic growth; both
are deterministic so framework behavior is bit-testable.
"""

from __future__ import annotations

from typing import Callable

from .descriptor import (
    Kind,
    Registry,
    TypeDescriptor,
    attr_field,
    computed_field,
    element_of,
    method,
)
from .graph import GREEDY_BFS, ROUND_ROBIN, AgentGraph, BspEngine, partition, random_graph
from .runtime import Runtime

_MASK64 = (1 << 64) - 1
_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407


def lcg_next(state: int) -> int:
    """One 64-bit linear-congruential step, kept in signed-64 range."""
    u = ((state & _MASK64) * _LCG_MULT + _LCG_INC) & _MASK64
    return u - (1 << 64) if u >= (1 << 63) else u


class DemoModel:
    """The basic scripted model: tstep, foo, and checkpointable RNG state."""

    def __init__(self) -> None:
        self.tstep = 0
        self.foo = 0.0
        self.rng_state = 0

    def step(self) -> None:
        self.tstep += 1
        self.foo += 1.0 / self.tstep
        self.rng_state = lcg_next(self.rng_state)

    def average_something(self) -> float:
        return self.foo / max(self.tstep, 1)


def demo_descriptor() -> TypeDescriptor:
    return TypeDescriptor(
        "demo_model",
        fields=[
            attr_field("tstep", Kind.INT),
            attr_field("foo", Kind.FLOAT),
            attr_field("rng_state", Kind.INT),
        ],
        methods=[
            method("step", lambda m: m.step(), arity=0, returns_value=False),
            method("average_something", lambda m: m.average_something(),
                   arity=0, returns_value=True),
        ],
    )


def register_demo(registry: Registry, name: str = "model") -> DemoModel:
    model = DemoModel()
    registry.register_root(name, demo_descriptor(), model)
    return model


# --- graph ecology model ------------------------------------------------------

class EcoCell:
    def __init__(self, population: int = 0, capacity: int = 100):
        self.population = population
        self.capacity = capacity

    def __repr__(self) -> str:
        return f"EcoCell(population={self.population}, capacity={self.capacity})"


def eco_cell_descriptor() -> TypeDescriptor:
    return TypeDescriptor(
        "eco_cell",
        fields=[
            attr_field("population", Kind.INT),
            attr_field("capacity", Kind.INT),
        ],
    )


def make_eco_update(graph: AgentGraph, growth: bool = False) -> Callable:
    """Migration rule: a cell keeps ceil(p/2); the moving half splits evenly
    (integer division) among its neighbors and the remainder stays home.
    With growth enabled, logistic birth floor(p*(c-p)/(10*c)) is added to
    the post-migration population.  Total population is conserved exactly
    in migration-only mode."""
    degrees = {aid: graph.degree(aid) for aid in graph.agents}

    def update(aid: int, cell: EcoCell, neighbors: list[tuple[int, EcoCell]]) -> EcoCell:
        p = cell.population
        keep = (p + 1) // 2
        moving = p // 2
        deg = degrees[aid]
        share = moving // deg if deg else 0
        stay = moving - share * deg
        inflow = 0
        for nid, ncell in neighbors:
            ndeg = degrees[nid]
            if ndeg:
                inflow += (ncell.population // 2) // ndeg
        pop = keep + stay + inflow
        if growth:
            c = cell.capacity
            pop += (pop * (c - pop)) // (10 * c)
            if pop < 0:
                pop = 0
        return EcoCell(pop, cell.capacity)

    return update


def default_eco_graph(n: int = 64, seed: int = 42) -> AgentGraph:
    """The stock ecology world: a seeded random graph with varied populations."""
    return random_graph(n, edge_prob=0.1, seed=seed,
                        init=lambda i: EcoCell(population=(i * 17 + 3) % 50))


class EcoSimulation:
    """Rank-0 controller for the graph ecology model.

    Holds the round counter and the BSP engine; its descriptor exposes the
    agents as a computed array so browsing and the auto-generated
    checkpoint/restart commands work on the distributed state (gathered and
    scattered in global agent-id order through worker messages).
    """

    def __init__(self, runtime: Runtime, graph: AgentGraph | None = None,
                 method: str = ROUND_ROBIN, growth: bool = False):
        self.tstep = 0
        self.runtime = runtime
        self.growth = growth
        self.method = method
        self.engine: BspEngine | None = None
        self._attach(graph if graph is not None else default_eco_graph())

    def _attach(self, graph: AgentGraph) -> None:
        for aid, state in graph.agents.items():
            if state is None:  # topology-only input, e.g. an edge-list file
                graph.agents[aid] = EcoCell(population=(aid * 17 + 3) % 50)
        part = partition(graph, self.runtime.n_workers, self.method)
        self.engine = BspEngine(graph, part, self.runtime, make_eco_update(graph, self.growth),
                                eco_cell_descriptor(), EcoCell)
        self.engine.distribute()

    def step(self) -> None:
        assert self.engine is not None
        self.engine.step(1)
        self.tstep += 1

    def total_population(self) -> int:
        assert self.engine is not None
        return sum(cell.population for _, cell in self.engine.gather())

    def load_graph(self, path: str) -> None:
        self.tstep = 0
        self._attach(AgentGraph.load(path))

    def agent_states(self) -> list[EcoCell]:
        assert self.engine is not None
        return [cell for _, cell in self.engine.gather()]

    def set_agent_states(self, cells: list[EcoCell]) -> None:
        assert self.engine is not None
        self.engine.scatter(cells)


def eco_descriptor() -> TypeDescriptor:
    return TypeDescriptor(
        "eco_sim",
        fields=[
            attr_field("tstep", Kind.INT),
            computed_field(
                "agents", Kind.ARRAY,
                get=lambda sim: sim.agent_states(),
                set=lambda sim, cells: sim.set_agent_states(cells),
                element=element_of(Kind.COMPOUND, inner=eco_cell_descriptor()),
                factory=EcoCell,
            ),
        ],
        methods=[
            method("step", lambda sim: sim.step(), arity=0, returns_value=False),
            method("total_population", lambda sim: sim.total_population(),
                   arity=0, returns_value=True),
            method("load_graph", lambda sim, path: sim.load_graph(path),
                   arity=1, returns_value=False),
        ],
    )


def register_eco(registry: Registry, runtime: Runtime, name: str = "eco",
                 graph: AgentGraph | None = None, method: str = ROUND_ROBIN,
                 growth: bool = False) -> EcoSimulation:
    sim = EcoSimulation(runtime, graph=graph, method=method, growth=growth)
    registry.register_root(name, eco_descriptor(), sim)
    return sim


__all__ = [
    "DemoModel", "demo_descriptor", "register_demo", "lcg_next",
    "EcoCell", "eco_cell_descriptor", "make_eco_update", "default_eco_graph",
    "EcoSimulation", "eco_descriptor", "register_eco",
    "ROUND_ROBIN", "GREEDY_BFS",
]

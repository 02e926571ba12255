"""simscript: a scriptable agent-based simulation framework.

Register a model once through a descriptor and get runtime scripting of
its fields and methods, binary checkpoint/restart, a live object browser
over HTTP, streaming plot series, and bulk-synchronous parallel execution
of agents distributed over a graph.

>>> from simscript import Registry, Environment, eval_script
>>> from simscript.demo import register_demo
>>> registry = Registry()
>>> model = register_demo(registry)
>>> env = Environment(registry=registry)
>>> eval_script("model.tstep 0\\nwhile {[model.tstep]<5} {model.step}", env)
''
>>> model.tstep
5
"""

from .descriptor import (
    Entry,
    FieldDescriptor,
    Kind,
    MethodDescriptor,
    ObjectPath,
    Registry,
    TypeDescriptor,
    attr_field,
    array_field,
    canonical_descriptor_string,
    compound_field,
    computed_field,
    element_of,
    method,
)
from .checkpoint import (
    checkpoint_bytes,
    fnv1a64,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
    write_checkpoint,
)
from .expr import eval_expr
from .graph import (
    GREEDY_BFS,
    ROUND_ROBIN,
    AgentGraph,
    BspEngine,
    Partition,
    partition,
    random_graph,
    rebalance,
)
from .runtime import Runtime, SeriesStore, WorkerContext, spawn_workers
from .script import Environment, ScriptExit, eval_script, substitute, tokenize
from .service import ControlService, StepQueue
from . import errors

__version__ = "0.1.0"

__all__ = [
    "Registry", "TypeDescriptor", "FieldDescriptor", "MethodDescriptor",
    "ObjectPath", "Kind", "Entry",
    "attr_field", "array_field", "compound_field", "computed_field",
    "element_of", "method", "canonical_descriptor_string",
    "fnv1a64", "write_checkpoint", "read_checkpoint",
    "save_checkpoint", "load_checkpoint", "checkpoint_bytes",
    "eval_expr",
    "AgentGraph", "Partition", "partition", "rebalance", "random_graph",
    "BspEngine", "ROUND_ROBIN", "GREEDY_BFS",
    "Runtime", "WorkerContext", "SeriesStore", "spawn_workers",
    "Environment", "ScriptExit", "eval_script", "substitute", "tokenize",
    "ControlService", "StepQueue",
    "errors",
]

"""Model descriptors and the path registry.

A model author describes their model object once as a :class:`TypeDescriptor`
(named fields and methods, nesting allowed) and registers a live instance
under a root name.  Everything else in the framework works off that
registration: dotted-path reads/writes, method invocation, browsing,
and binary checkpointing.  Registration also synthesizes two commands,
``<root>.checkpoint`` and ``<root>.restart``, both taking a file path.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator

from . import values
from .errors import (
    ArityMismatch,
    DuplicateRoot,
    FrameworkError,
    IndexOutOfRange,
    InvalidName,
    MethodPanicked,
    NotAScalar,
    PathNotFound,
)


class Kind(enum.Enum):
    INT = "Int"
    FLOAT = "Float"
    BOOL = "Bool"
    TEXT = "Text"
    ARRAY = "Array"
    COMPOUND = "Compound"


SCALAR_KINDS = frozenset({Kind.INT, Kind.FLOAT, Kind.BOOL, Kind.TEXT})

Getter = Callable[[Any], Any]
Setter = Callable[[Any, Any], None]
# Invokers receive the live instance and the raw text arguments; they parse
# the arguments themselves and return rendered text (or None for void).
Invoker = Callable[[Any, list[str]], "str | None"]


@dataclass
class FieldDescriptor:
    name: str
    kind: Kind
    get: Getter | None = None
    set: Setter | None = None
    element: "FieldDescriptor | None" = None   # ARRAY: shape of one element
    inner: "TypeDescriptor | None" = None      # COMPOUND: nested descriptor
    factory: Callable[[], Any] | None = None   # ARRAY of COMPOUND: element constructor

    def __post_init__(self) -> None:
        if self.kind is Kind.ARRAY and self.element is None:
            raise InvalidName(f"array field {self.name!r} needs an element descriptor")
        if self.kind is Kind.COMPOUND and self.inner is None:
            raise InvalidName(f"compound field {self.name!r} needs an inner descriptor")


@dataclass
class MethodDescriptor:
    name: str
    arity: int
    returns_value: bool
    invoker: Invoker
    parallel: bool = False


@dataclass
class TypeDescriptor:
    type_name: str
    fields: list[FieldDescriptor] = field(default_factory=list)
    methods: list[MethodDescriptor] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for name in [f.name for f in self.fields] + [m.name for m in self.methods]:
            if not name or "." in name:
                raise InvalidName(f"bad member name {name!r} in {self.type_name!r}")
            if name in seen:
                raise InvalidName(f"duplicate member {name!r} in {self.type_name!r}")
            seen.add(name)

    def member_names(self) -> list[str]:
        return [f.name for f in self.fields] + [m.name for m in self.methods]


@dataclass(frozen=True)
class ObjectPath:
    """Dot-separated address of a member, e.g. ``model.agents.3.population``."""

    segments: tuple[str, ...]

    @staticmethod
    def parse(text: str) -> "ObjectPath":
        parts = text.split(".")
        if not text or any(p == "" for p in parts):
            raise InvalidName(f"invalid path {text!r}")
        return ObjectPath(tuple(parts))

    def __str__(self) -> str:
        return ".".join(self.segments)

    def child(self, segment: str) -> "ObjectPath":
        return ObjectPath(self.segments + (segment,))


def _as_path(path: "ObjectPath | str") -> ObjectPath:
    return path if isinstance(path, ObjectPath) else ObjectPath.parse(path)


# --- convenience constructors ------------------------------------------------

def attr_field(name: str, kind: Kind, attr: str | None = None) -> FieldDescriptor:
    """Scalar field backed by a plain instance attribute."""
    a = attr or name
    return FieldDescriptor(
        name, kind,
        get=lambda obj: getattr(obj, a),
        set=lambda obj, v: setattr(obj, a, v),
    )


def computed_field(name: str, kind: Kind, get: Getter, set: Setter | None = None,
                   **extra: Any) -> FieldDescriptor:
    """Field whose storage is mediated by explicit accessor callables."""
    return FieldDescriptor(name, kind, get=get, set=set, **extra)


def array_field(name: str, element: FieldDescriptor, attr: str | None = None,
                get: Getter | None = None, set: Setter | None = None,
                factory: Callable[[], Any] | None = None) -> FieldDescriptor:
    if get is None:
        a = attr or name
        get = lambda obj: getattr(obj, a)
        set = set or (lambda obj, v: setattr(obj, a, v))
    return FieldDescriptor(name, Kind.ARRAY, get=get, set=set,
                           element=element, factory=factory)


def compound_field(name: str, inner: TypeDescriptor, attr: str | None = None,
                   get: Getter | None = None, set: Setter | None = None) -> FieldDescriptor:
    if get is None:
        a = attr or name
        get = lambda obj: getattr(obj, a)
        set = set or (lambda obj, v: setattr(obj, a, v))
    return FieldDescriptor(name, Kind.COMPOUND, get=get, set=set, inner=inner)


def element_of(kind: Kind, inner: TypeDescriptor | None = None,
               element: "FieldDescriptor | None" = None) -> FieldDescriptor:
    """Descriptor for one array element (accessors are positional, not named)."""
    return FieldDescriptor("item", kind, inner=inner, element=element)


_RENDERERS = {
    int: values.render_int,
    float: values.render_float,
    bool: values.render_bool,
    str: lambda s: s,
}


def render_result(value: Any) -> str | None:
    """Render a native method return as a script value."""
    if value is None:
        return None
    if type(value) is bool:  # bool is an int subclass; check first
        return values.render_bool(value)
    return _RENDERERS[type(value)](value)


def method(name: str, fn: Callable[..., Any], arity: int, returns_value: bool,
           parallel: bool = False,
           arg_parsers: "list[Callable[[str], Any]] | None" = None) -> MethodDescriptor:
    """Wrap a native callable as a method descriptor.

    ``fn(instance, *args)`` is called with arguments parsed by ``arg_parsers``
    (raw text when omitted); its return value is rendered to text.
    """

    def invoker(instance: Any, args: list[str]) -> str | None:
        parsed = [p(a) for p, a in zip(arg_parsers, args)] if arg_parsers else args
        return render_result(fn(instance, *parsed))

    return MethodDescriptor(name, arity, returns_value, invoker, parallel=parallel)


# --- resolved nodes ----------------------------------------------------------

@dataclass
class Node:
    path: ObjectPath


@dataclass
class FieldNode(Node):
    """A resolved field location with read/write closures.

    Writes propagate back up through every accessor on the path, so fields
    reached through computed containers (e.g. a gathered agent array) are
    stored correctly, not just mutated on a transient copy.
    """

    descriptor: FieldDescriptor
    read: Callable[[], Any]
    write: Callable[[Any], None]
    writeback: Callable[[Any], None] = lambda v: None

    @property
    def kind(self) -> Kind:
        return self.descriptor.kind

    def is_scalar(self) -> bool:
        return self.kind in SCALAR_KINDS

    def get_text(self) -> str:
        if not self.is_scalar():
            raise NotAScalar(f"{self.path} is {self.kind.value}, not a scalar")
        v = self.read()
        if self.kind is Kind.INT:
            return values.render_int(v)
        if self.kind is Kind.FLOAT:
            return values.render_float(v)
        if self.kind is Kind.BOOL:
            return values.render_bool(v)
        return str(v)

    def set_text(self, text: str) -> None:
        if not self.is_scalar():
            raise NotAScalar(f"{self.path} is {self.kind.value}, not a scalar")
        if self.kind is Kind.INT:
            v: Any = values.parse_int(text)
        elif self.kind is Kind.FLOAT:
            v = values.parse_float(text)
        elif self.kind is Kind.BOOL:
            v = values.parse_bool(text)
        else:
            v = text
        self.write(v)


@dataclass
class MethodNode(Node):
    descriptor: MethodDescriptor
    instance: Callable[[], Any]

    def invoke(self, args: list[str]) -> str | None:
        md = self.descriptor
        if len(args) != md.arity:
            raise ArityMismatch(
                f"{self.path} takes {md.arity} argument(s), got {len(args)}")
        try:
            result = md.invoker(self.instance(), list(args))
        except FrameworkError:
            raise
        except Exception as exc:
            raise MethodPanicked(f"{self.path}: {exc}") from exc
        return result if md.returns_value else None


@dataclass
class CompoundNode(Node):
    descriptor: TypeDescriptor
    read: Callable[[], Any]
    writeback: Callable[[Any], None]
    is_root: bool = False
    registration: "Registration | None" = None


@dataclass
class Registration:
    """Receipt for one registered root."""

    name: str
    descriptor: TypeDescriptor
    instance: Any
    synthetic: list[MethodDescriptor]


@dataclass
class Entry:
    """One row of a browse listing: (name, node kind, cheap scalar preview)."""

    name: str
    path: str
    kind: str          # "root" | "compound" | "field" | "method"
    preview: str = ""
    arity: int | None = None


class Registry:
    """Maps dotted paths onto live, described model instances.

    The registry is frozen after registration (reads are safe from any
    thread); mutation of model state happens only through `set_value` /
    `invoke`, which the runtime funnels through a single owner context.
    """

    def __init__(self) -> None:
        self.roots: dict[str, Registration] = {}
        # Relative checkpoint/restart file arguments resolve against this.
        self.base_dir: Path | None = None

    # -- registration ---------------------------------------------------

    def register_root(self, name: str, descriptor: TypeDescriptor, instance: Any) -> Registration:
        if not name or "." in name:
            raise InvalidName(f"root name {name!r} must be a single non-empty segment")
        if name in self.roots:
            raise DuplicateRoot(f"root {name!r} already registered")
        synthetic = [
            MethodDescriptor("checkpoint", 1, False, self._checkpoint_invoker(name)),
            MethodDescriptor("restart", 1, False, self._restart_invoker(name)),
        ]
        for member in synthetic:
            if member.name in descriptor.member_names():
                raise InvalidName(
                    f"member {member.name!r} collides with a synthetic command")
        reg = Registration(name, descriptor, instance, synthetic)
        self.roots[name] = reg
        return reg

    def _resolve_file(self, arg: str) -> Path:
        p = Path(arg)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p

    def _checkpoint_invoker(self, root: str) -> Invoker:
        def invoker(_instance: Any, args: list[str]) -> None:
            from .checkpoint import save_checkpoint
            save_checkpoint(self, root, self._resolve_file(args[0]))
        return invoker

    def _restart_invoker(self, root: str) -> Invoker:
        def invoker(_instance: Any, args: list[str]) -> None:
            from .checkpoint import load_checkpoint
            load_checkpoint(self, root, self._resolve_file(args[0]))
        return invoker

    # -- resolution -------------------------------------------------------

    def resolve(self, path: "ObjectPath | str") -> Node:
        p = _as_path(path)
        reg = self.roots.get(p.segments[0])
        if reg is None:
            raise PathNotFound(f"no root named {p.segments[0]!r}")
        node: Node = CompoundNode(
            ObjectPath((reg.name,)), reg.descriptor,
            read=lambda inst=reg.instance: inst,
            writeback=lambda v: None,
            is_root=True, registration=reg,
        )
        for seg in p.segments[1:]:
            node = self._descend(node, seg)
        return node

    def _descend(self, node: Node, seg: str) -> Node:
        child = node.path.child(seg)
        if isinstance(node, CompoundNode):
            td = node.descriptor
            for fd in td.fields:
                if fd.name == seg:
                    return _field_node(child, fd, node.read, node.writeback)
            for md in td.methods:
                if md.name == seg:
                    return MethodNode(child, md, node.read)
            if node.is_root and node.registration is not None:
                for md in node.registration.synthetic:
                    if md.name == seg:
                        return MethodNode(child, md, node.read)
            raise PathNotFound(f"{node.path} has no member {seg!r}")
        if isinstance(node, FieldNode) and node.kind is Kind.ARRAY:
            if not seg.isdigit():
                raise PathNotFound(f"{node.path} is an array; {seg!r} is not an index")
            idx = int(seg)
            length = len(node.read())
            if idx >= length:
                raise IndexOutOfRange(f"{child}: index {idx} >= length {length}")
            return _element_node(child, node, idx)
        raise PathNotFound(f"{node.path} has no member {seg!r}")

    # -- browsing ---------------------------------------------------------

    def enumerate(self, path: "ObjectPath | str | None" = None) -> list[Entry]:
        if path is None or path == "":
            return [Entry(name, name, "root") for name in self.roots]
        node = self.resolve(path)
        if isinstance(node, CompoundNode):
            entries = [self._field_entry(node.path, fd, node.read)
                       for fd in node.descriptor.fields]
            entries += [Entry(md.name, str(node.path.child(md.name)), "method", arity=md.arity)
                        for md in node.descriptor.methods]
            if node.is_root and node.registration is not None:
                entries += [Entry(md.name, str(node.path.child(md.name)), "method",
                                  arity=md.arity)
                            for md in node.registration.synthetic]
            return entries
        if isinstance(node, FieldNode) and node.kind is Kind.ARRAY:
            assert node.descriptor.element is not None
            out = []
            for i in range(len(node.read())):
                child = node.path.child(str(i))
                elem = node.descriptor.element
                if elem.kind in SCALAR_KINDS:
                    sub = _element_node(child, node, i)
                    out.append(Entry(str(i), str(child), "field", preview=sub.get_text()))
                else:
                    out.append(Entry(str(i), str(child), "compound"))
            return out
        return []  # scalar fields and methods have no members

    def _field_entry(self, base: ObjectPath, fd: FieldDescriptor,
                     read: Callable[[], Any]) -> Entry:
        child = base.child(fd.name)
        if fd.kind in SCALAR_KINDS:
            sub = _field_node(child, fd, read, lambda v: None)
            return Entry(fd.name, str(child), "field", preview=sub.get_text())
        return Entry(fd.name, str(child), "compound")

    # -- scalar access and invocation --------------------------------------

    def get_value(self, path: "ObjectPath | str") -> str:
        node = self.resolve(path)
        if not isinstance(node, FieldNode):
            raise NotAScalar(f"{node.path} is not a scalar field")
        return node.get_text()

    def set_value(self, path: "ObjectPath | str", text: str) -> None:
        node = self.resolve(path)
        if not isinstance(node, FieldNode):
            raise NotAScalar(f"{node.path} is not a scalar field")
        node.set_text(text)

    def invoke(self, path: "ObjectPath | str", args: list[str]) -> str | None:
        node = self.resolve(path)
        if not isinstance(node, MethodNode):
            raise PathNotFound(f"{node.path} is not a method")
        return node.invoke(args)

    # -- walking ------------------------------------------------------------

    def walk_paths(self, root: str) -> Iterator[str]:
        """Yield the canonical path of every reachable field and method."""
        def rec(path: str) -> Iterator[str]:
            for e in self.enumerate(path):
                yield e.path
                if e.kind in ("compound", "root"):
                    yield from rec(e.path)
        reg = self.roots.get(root)
        if reg is None:
            raise PathNotFound(f"no root named {root!r}")
        yield from rec(root)


def _field_node(path: ObjectPath, fd: FieldDescriptor,
                parent_read: Callable[[], Any],
                parent_writeback: Callable[[Any], None]) -> Node:
    def read() -> Any:
        assert fd.get is not None
        return fd.get(parent_read())

    def write(v: Any) -> None:
        # Explicit store: the field must be writable.
        obj = parent_read()
        if fd.set is None:
            raise NotAScalar(f"{path} is read-only")
        fd.set(obj, v)
        parent_writeback(obj)

    def writeback(v: Any) -> None:
        # Lenient propagation after an in-place mutation below this field:
        # re-store through the accessor when one exists (computed containers
        # hand out copies), then keep propagating upward.
        obj = parent_read()
        if fd.set is not None:
            fd.set(obj, v)
        parent_writeback(obj)

    if fd.kind is Kind.COMPOUND:
        assert fd.inner is not None
        return CompoundNode(path, fd.inner, read=read, writeback=writeback)
    return FieldNode(path, fd, read=read, write=write, writeback=writeback)


def _element_node(path: ObjectPath, array_node: FieldNode, idx: int) -> Node:
    elem = array_node.descriptor.element
    assert elem is not None

    def read() -> Any:
        return array_node.read()[idx]

    def write(v: Any) -> None:
        seq = array_node.read()
        seq[idx] = v
        array_node.writeback(seq)

    if elem.kind is Kind.COMPOUND:
        assert elem.inner is not None
        return CompoundNode(path, elem.inner, read=read, writeback=write)
    return FieldNode(path, elem, read=read, write=write, writeback=write)


# --- canonical encoding -------------------------------------------------------

def canonical_descriptor_string(d: TypeDescriptor) -> str:
    """Deterministic text encoding of a descriptor's shape.

    Two descriptors are structurally equal exactly when their encodings are
    equal; the checkpoint fingerprint hashes this string.
    """
    parts = [d.type_name]
    for fd in d.fields:
        parts.append(f"f:{fd.name}:{_kind_code(fd)}")
    for md in d.methods:
        parts.append(f"m:{md.name}:{md.arity}:{1 if md.returns_value else 0}")
    return ";".join(parts)


def _kind_code(fd: FieldDescriptor) -> str:
    if fd.kind is Kind.ARRAY:
        assert fd.element is not None
        return f"Array({_kind_code(fd.element)})"
    if fd.kind is Kind.COMPOUND:
        assert fd.inner is not None
        return f"Compound({canonical_descriptor_string(fd.inner)})"
    return fd.kind.value

"""Binary snapshot and restore of registered model state.

Image layout (see docs/checkpoint-format.md, which is normative):

    magic   4 bytes       ASCII "ECLB"
    version u32 LE        1
    fprint  u64 LE        FNV-1a of the root's canonical descriptor string
    payload               fields depth-first in declaration order

Payload encoding per field kind: Int as signed 64-bit LE, Float as IEEE-754
binary64 LE, Bool as one byte (0/1), Text as u64 byte count + UTF-8 bytes,
Array as u64 element count + elements, Compound as its fields in order.
A failed restore never touches the model: the image is fully decoded before
any field is written.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Any, BinaryIO

from .descriptor import (
    FieldDescriptor,
    Kind,
    Registry,
    TypeDescriptor,
    canonical_descriptor_string,
)
from .errors import (
    BadMagic,
    TruncatedImage,
    TypeMismatch,
    UnregisteredRoot,
    UnsupportedVersion,
)

MAGIC = b"ECLB"
VERSION = 1
FILE_SUFFIX = ".eclb"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes | str) -> int:
    """Standard 64-bit FNV-1a: per-byte xor then multiply."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def descriptor_fingerprint(d: TypeDescriptor) -> int:
    return fnv1a64(canonical_descriptor_string(d))


# --- value codec ---------------------------------------------------------

def _encode_value(fd: FieldDescriptor, value: Any, out: bytearray) -> None:
    kind = fd.kind
    if kind is Kind.INT:
        out += struct.pack("<q", value)
    elif kind is Kind.FLOAT:
        out += struct.pack("<d", value)
    elif kind is Kind.BOOL:
        out += b"\x01" if value else b"\x00"
    elif kind is Kind.TEXT:
        raw = value.encode("utf-8")
        out += struct.pack("<Q", len(raw))
        out += raw
    elif kind is Kind.ARRAY:
        assert fd.element is not None
        out += struct.pack("<Q", len(value))
        for item in value:
            _encode_value(fd.element, item, out)
    else:  # COMPOUND
        assert fd.inner is not None
        _encode_fields(fd.inner, value, out)


def _encode_fields(td: TypeDescriptor, instance: Any, out: bytearray) -> None:
    for fd in td.fields:
        assert fd.get is not None
        _encode_value(fd, fd.get(instance), out)


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise TruncatedImage(
                f"image ends at byte {len(self.data)}, needed {self.offset + n}")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def _decode_value(fd: FieldDescriptor, r: _Reader) -> Any:
    kind = fd.kind
    if kind is Kind.INT:
        return struct.unpack("<q", r.take(8))[0]
    if kind is Kind.FLOAT:
        return struct.unpack("<d", r.take(8))[0]
    if kind is Kind.BOOL:
        return r.take(1) != b"\x00"
    if kind is Kind.TEXT:
        return r.take(r.u64()).decode("utf-8")
    if kind is Kind.ARRAY:
        assert fd.element is not None
        return [_decode_value(fd.element, r) for _ in range(r.u64())]
    assert fd.inner is not None
    return _decode_fields(fd.inner, r)


def _decode_fields(td: TypeDescriptor, r: _Reader) -> list[Any]:
    return [_decode_value(fd, r) for fd in td.fields]


def _apply_fields(td: TypeDescriptor, instance: Any, decoded: list[Any]) -> None:
    for fd, value in zip(td.fields, decoded):
        _apply_value(fd, instance, value)


def _apply_value(fd: FieldDescriptor, owner: Any, value: Any) -> None:
    if fd.kind is Kind.COMPOUND:
        assert fd.get is not None and fd.inner is not None
        sub = fd.get(owner)
        _apply_fields(fd.inner, sub, value)
        if fd.set is not None:
            fd.set(owner, sub)
        return
    if fd.kind is Kind.ARRAY:
        assert fd.get is not None and fd.set is not None and fd.element is not None
        fd.set(owner, _build_array(fd, value))
        return
    assert fd.set is not None
    fd.set(owner, value)


def _build_array(fd: FieldDescriptor, decoded: list[Any]) -> list[Any]:
    elem = fd.element
    assert elem is not None
    if elem.kind is Kind.COMPOUND:
        if fd.factory is None:
            raise TypeMismatch(
                f"array field {fd.name!r} has compound elements but no factory")
        out = []
        for item in decoded:
            assert elem.inner is not None
            inst = fd.factory()
            _apply_fields(elem.inner, inst, item)
            out.append(inst)
        return out
    if elem.kind is Kind.ARRAY:
        return [_build_array(elem, item) for item in decoded]
    return list(decoded)


# --- whole-object helpers (used for agent shipping between workers) -------

def encode_object(td: TypeDescriptor, instance: Any) -> bytes:
    """Serialize one described object's fields (no header)."""
    out = bytearray()
    _encode_fields(td, instance, out)
    return bytes(out)


def decode_object_into(td: TypeDescriptor, instance: Any, data: bytes) -> Any:
    """Overwrite a described object's fields from `encode_object` bytes."""
    r = _Reader(data)
    decoded = _decode_fields(td, r)
    if r.offset != len(data):
        raise TruncatedImage(f"{len(data) - r.offset} trailing bytes after object")
    _apply_fields(td, instance, decoded)
    return instance


# --- checkpoint images -----------------------------------------------------

def write_checkpoint(registry: Registry, root: str, sink: BinaryIO) -> int:
    """Emit a full image of the root's state; returns bytes written."""
    reg = registry.roots.get(root)
    if reg is None:
        raise UnregisteredRoot(f"no root named {root!r}")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    out += struct.pack("<Q", descriptor_fingerprint(reg.descriptor))
    _encode_fields(reg.descriptor, reg.instance, out)
    sink.write(bytes(out))
    sink.flush()
    return len(out)


def read_checkpoint(registry: Registry, root: str, source: BinaryIO) -> None:
    """Validate and apply an image; on any error the model is untouched."""
    reg = registry.roots.get(root)
    if reg is None:
        raise UnregisteredRoot(f"no root named {root!r}")
    data = source.read()
    r = _Reader(data)
    magic = r.take(4)
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, found {magic!r}")
    version = struct.unpack("<I", r.take(4))[0]
    if version != VERSION:
        raise UnsupportedVersion(f"image version {version}, supported {VERSION}")
    fprint = r.u64()
    expected = descriptor_fingerprint(reg.descriptor)
    if fprint != expected:
        raise TypeMismatch(
            f"image fingerprint {fprint:#018x} != descriptor {expected:#018x}")
    decoded = _decode_fields(reg.descriptor, r)
    if r.offset != len(data):
        raise TruncatedImage(f"{len(data) - r.offset} trailing bytes after payload")
    _apply_fields(reg.descriptor, reg.instance, decoded)


def checkpoint_bytes(registry: Registry, root: str) -> bytes:
    import io
    buf = io.BytesIO()
    write_checkpoint(registry, root, buf)
    return buf.getvalue()


def save_checkpoint(registry: Registry, root: str, path: Path | str) -> int:
    with open(path, "wb") as f:
        return write_checkpoint(registry, root, f)


def load_checkpoint(registry: Registry, root: str, path: Path | str) -> None:
    with open(path, "rb") as f:
        read_checkpoint(registry, root, f)

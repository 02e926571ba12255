import io
import struct

import pytest
from hypothesis import given, settings

from simscript import (
    Kind,
    Registry,
    TypeDescriptor,
    attr_field,
    array_field,
    checkpoint_bytes,
    element_of,
    fnv1a64,
    read_checkpoint,
    write_checkpoint,
)
from simscript.checkpoint import decode_object_into, encode_object
from simscript.errors import (
    BadMagic,
    TruncatedImage,
    TypeMismatch,
    UnregisteredRoot,
    UnsupportedVersion,
)

from .conftest import BasicModel, basic_descriptor
from .support import Obj, described_instances


# --- fnv1a64 ------------------------------------------------------------------

def test_fnv_offset_basis():
    assert fnv1a64(b"") == 0xCBF29CE484222325


def test_fnv_single_byte_hand_computed():
    # One round by definition: (basis xor byte) * prime mod 2^64.
    expected = ((0xCBF29CE484222325 ^ ord("a")) * 0x100000001B3) % 2**64
    assert fnv1a64("a") == expected
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C


def test_fnv_reference_implementation_agreement():
    def reference(data: bytes) -> int:
        h = 0xCBF29CE484222325
        for byte in data:
            h ^= byte
            h = (h * 0x100000001B3) % 2**64
        return h

    for sample in [b"", b"a", b"ab", b"hello world", bytes(range(256))]:
        assert fnv1a64(sample) == reference(sample)


def test_fnv_sensitive_to_suffix():
    samples = ["", "x", "model_t", "f:tstep:Int", "abcdef"]
    for s in samples:
        assert fnv1a64(s) != fnv1a64(s + "!")


# --- image layout -----------------------------------------------------------------

def make_model(tstep=0, foo=0.0):
    registry = Registry()
    instance = BasicModel()
    instance.tstep = tstep
    instance.foo = foo
    registry.register_root("model", basic_descriptor(), instance)
    return registry, instance


def test_image_is_32_bytes_for_two_scalar_fields():
    registry, _ = make_model(tstep=42, foo=0.5)
    image = checkpoint_bytes(registry, "model")
    assert len(image) == 32  # 4 magic + 4 version + 8 fingerprint + 8 + 8


def test_image_starts_with_magic():
    registry, _ = make_model()
    assert checkpoint_bytes(registry, "model")[:4] == b"ECLB"


def test_image_payload_layout():
    registry, _ = make_model(tstep=42, foo=0.5)
    image = checkpoint_bytes(registry, "model")
    assert struct.unpack_from("<I", image, 4)[0] == 1
    assert struct.unpack_from("<q", image, 16)[0] == 42
    assert struct.unpack_from("<d", image, 24)[0] == 0.5


def test_identical_state_gives_identical_images():
    r1, _ = make_model(tstep=7, foo=1.25)
    r2, _ = make_model(tstep=7, foo=1.25)
    assert checkpoint_bytes(r1, "model") == checkpoint_bytes(r2, "model")


def test_write_returns_byte_count():
    registry, _ = make_model()
    sink = io.BytesIO()
    assert write_checkpoint(registry, "model", sink) == len(sink.getvalue())


def test_unregistered_root():
    registry = Registry()
    with pytest.raises(UnregisteredRoot):
        write_checkpoint(registry, "ghost", io.BytesIO())
    with pytest.raises(UnregisteredRoot):
        read_checkpoint(registry, "ghost", io.BytesIO(b""))


# --- restore ------------------------------------------------------------------------

def test_round_trip_restores_every_field():
    registry, instance = make_model(tstep=77, foo=2.5)
    image = checkpoint_bytes(registry, "model")
    other_registry, other = make_model()
    read_checkpoint(other_registry, "model", io.BytesIO(image))
    assert other.tstep == 77
    assert other.foo == 2.5


def test_bad_magic():
    registry, _ = make_model()
    image = bytearray(checkpoint_bytes(registry, "model"))
    image[:4] = b"XXXX"
    with pytest.raises(BadMagic):
        read_checkpoint(registry, "model", io.BytesIO(bytes(image)))


def test_unsupported_version():
    registry, _ = make_model()
    image = bytearray(checkpoint_bytes(registry, "model"))
    struct.pack_into("<I", image, 4, 999)
    with pytest.raises(UnsupportedVersion):
        read_checkpoint(registry, "model", io.BytesIO(bytes(image)))


def test_type_mismatch_between_descriptors():
    registry, _ = make_model()
    image = checkpoint_bytes(registry, "model")

    other = Registry()
    td = TypeDescriptor("other_t", fields=[attr_field("a", Kind.INT),
                                           attr_field("b", Kind.FLOAT)])
    other.register_root("model", td, Obj(a=0, b=0.0))
    with pytest.raises(TypeMismatch):
        read_checkpoint(other, "model", io.BytesIO(image))


def test_truncated_image_leaves_state_unchanged():
    registry, instance = make_model(tstep=5, foo=1.5)
    image = checkpoint_bytes(registry, "model")
    instance.tstep = 5
    before = checkpoint_bytes(registry, "model")
    with pytest.raises(TruncatedImage):
        read_checkpoint(registry, "model", io.BytesIO(image[:10]))
    assert checkpoint_bytes(registry, "model") == before


def test_trailing_bytes_rejected_atomically():
    registry, instance = make_model(tstep=3, foo=0.25)
    image = checkpoint_bytes(registry, "model") + b"junk"
    before = checkpoint_bytes(registry, "model")
    with pytest.raises(TruncatedImage):
        read_checkpoint(registry, "model", io.BytesIO(image))
    assert checkpoint_bytes(registry, "model") == before


def test_every_failure_mode_is_atomic():
    registry, instance = make_model(tstep=9, foo=4.5)
    good = checkpoint_bytes(registry, "model")
    corruptions = [
        b"XXXX" + good[4:],                      # BadMagic
        good[:4] + struct.pack("<I", 2) + good[8:],  # UnsupportedVersion
        good[:8] + b"\x00" * 8 + good[16:],      # TypeMismatch
        good[:10],                               # TruncatedImage
        good + b"\x00",                          # trailing bytes
    ]
    for bad in corruptions:
        with pytest.raises(Exception):
            read_checkpoint(registry, "model", io.BytesIO(bad))
        assert checkpoint_bytes(registry, "model") == good


# --- rich structures -------------------------------------------------------------------

class Roster:
    def __init__(self):
        self.title = ""
        self.tags = []
        self.people = []


class Person:
    def __init__(self, name="", age=0):
        self.name = name
        self.age = age


def roster_descriptor():
    person_t = TypeDescriptor("person_t", fields=[
        attr_field("name", Kind.TEXT), attr_field("age", Kind.INT)])
    return TypeDescriptor("roster_t", fields=[
        attr_field("title", Kind.TEXT),
        array_field("tags", element_of(Kind.TEXT)),
        array_field("people", element_of(Kind.COMPOUND, inner=person_t), factory=Person),
    ])


def test_text_and_array_round_trip():
    registry = Registry()
    roster = Roster()
    roster.title = "naïve Δ title"
    roster.tags = ["a", "", "long tag"]
    roster.people = [Person("ada", 36), Person("grace", 45)]
    registry.register_root("r", roster_descriptor(), roster)
    image = checkpoint_bytes(registry, "r")

    other = Registry()
    fresh = Roster()
    other.register_root("r", roster_descriptor(), fresh)
    read_checkpoint(other, "r", io.BytesIO(image))
    assert fresh.title == roster.title
    assert fresh.tags == roster.tags
    assert [(p.name, p.age) for p in fresh.people] == [("ada", 36), ("grace", 45)]


def test_array_resize_across_restore():
    """Arrays are length-prefixed, so restore may grow or shrink them."""
    registry = Registry()
    roster = Roster()
    roster.people = [Person("solo", 1)]
    registry.register_root("r", roster_descriptor(), roster)
    image = checkpoint_bytes(registry, "r")

    other = Registry()
    fresh = Roster()
    fresh.people = [Person("a", 0), Person("b", 0), Person("c", 0)]
    other.register_root("r", roster_descriptor(), fresh)
    read_checkpoint(other, "r", io.BytesIO(image))
    assert [(p.name, p.age) for p in fresh.people] == [("solo", 1)]


def test_object_codec_round_trip():
    person_t = TypeDescriptor("person_t", fields=[
        attr_field("name", Kind.TEXT), attr_field("age", Kind.INT)])
    blob = encode_object(person_t, Person("x", 9))
    out = decode_object_into(person_t, Person(), blob)
    assert (out.name, out.age) == ("x", 9)


@settings(max_examples=50, deadline=None)
@given(described_instances())
def test_fuzzed_round_trip_preserves_all_values(desc_inst):
    descriptor, instance, plans = desc_inst
    registry = Registry()
    registry.register_root("r", descriptor, instance)
    image = checkpoint_bytes(registry, "r")

    from .support import default_instance
    other = Registry()
    other.register_root("r", descriptor, default_instance(plans))
    read_checkpoint(other, "r", io.BytesIO(image))
    assert checkpoint_bytes(other, "r") == image


# --- resume equivalence (module-level sample; acceptance runs the full set) ----------

def test_resume_equivalence_sample(tmp_path, demo_registry):
    from simscript.demo import register_demo

    registry, model = demo_registry
    for _ in range(100):
        model.step()
    oracle = checkpoint_bytes(registry, "model")

    part1 = Registry()
    m1 = register_demo(part1)
    for _ in range(40):
        m1.step()
    image = checkpoint_bytes(part1, "model")

    part2 = Registry()
    m2 = register_demo(part2)
    read_checkpoint(part2, "model", io.BytesIO(image))
    for _ in range(60):
        m2.step()
    assert checkpoint_bytes(part2, "model") == oracle

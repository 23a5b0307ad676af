"""Probe signature validation: arity, kinds, bounds, explicit-length pins."""

from __future__ import annotations

import random

import pytest

from probeable.signature import (
    ParamSpec,
    ProbeSignature,
    SignatureError,
    canonical_args,
)


@pytest.fixture
def array_sig() -> ProbeSignature:
    return ProbeSignature(params=(
        ParamSpec(name="arr", kind="int-array", max_length=5, min_value=-10, max_value=10),
        ParamSpec(name="n", kind="int", min_value=0, max_value=5, equals_length_of="arr"),
    ))


@pytest.fixture
def string_sig() -> ProbeSignature:
    return ProbeSignature(params=(ParamSpec(name="s", kind="string", max_length=8),))


class TestValidation:

    def test_accepts_conforming_args(self, array_sig):
        array_sig.validate(([1, 2, 3], 3))

    def test_arity_mismatch(self, array_sig):
        with pytest.raises(SignatureError):
            array_sig.validate(([1, 2], 2, 99))

    def test_wrong_kind(self, array_sig):
        with pytest.raises(SignatureError) as excinfo:
            array_sig.validate(("nope", 4))
        assert excinfo.value.param == "arr"

    def test_bool_is_not_an_int(self, array_sig):
        with pytest.raises(SignatureError):
            array_sig.validate(([1], True))
        with pytest.raises(SignatureError):
            array_sig.validate(([True], 1))

    def test_element_out_of_range(self, array_sig):
        with pytest.raises(SignatureError) as excinfo:
            array_sig.validate(([99], 1))
        assert excinfo.value.param == "arr"

    def test_array_too_long(self, array_sig):
        with pytest.raises(SignatureError):
            array_sig.validate(([0] * 6, 6))

    def test_length_pin_enforced(self, array_sig):
        with pytest.raises(SignatureError) as excinfo:
            array_sig.validate(([1, 2, 3], 2))
        assert excinfo.value.param == "n"

    def test_string_length_bound(self, string_sig):
        string_sig.validate(("12345678",))
        with pytest.raises(SignatureError):
            string_sig.validate(("123456789",))

    def test_string_must_be_printable_ascii(self, string_sig):
        with pytest.raises(SignatureError):
            string_sig.validate(("café",))
        with pytest.raises(SignatureError):
            string_sig.validate(("a\tb",))

    def test_conforms_is_non_raising(self, array_sig):
        assert array_sig.conforms(([1], 1))
        assert not array_sig.conforms(([1], 2))


class TestConstruction:

    def test_defaults_fill_in_bounds(self):
        arr = ParamSpec(name="a", kind="int-array")
        assert arr.max_length == 100
        s = ParamSpec(name="s", kind="string")
        assert s.max_length == 200

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            ParamSpec(name="x", kind="float")

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            ProbeSignature(params=(
                ParamSpec(name="x", kind="int"),
                ParamSpec(name="x", kind="int"),
            ))

    def test_length_pin_must_reference_an_array(self):
        with pytest.raises(ValueError):
            ProbeSignature(params=(
                ParamSpec(name="n", kind="int", equals_length_of="missing"),
            ))


class TestRandomArgs:

    def test_generated_args_always_conform(self, array_sig, string_sig):
        rng = random.Random(7)
        for _ in range(500):
            array_sig.validate(array_sig.random_args(rng))
            string_sig.validate(string_sig.random_args(rng))

    def test_deterministic_per_seed(self, array_sig):
        first = [array_sig.random_args(random.Random(3)) for _ in range(5)]
        second = [array_sig.random_args(random.Random(3)) for _ in range(5)]
        assert first == second


def test_canonical_args_normalises_sequences():
    assert canonical_args([[1, 2], 3, "x"]) == ((1, 2), 3, "x")
    assert canonical_args(((1, 2), 3, "x")) == canonical_args([[1, 2], 3, "x"])

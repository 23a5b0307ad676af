"""Typed probe signatures: the editable argument slots of a problem.

A signature is an ordered list of parameter specs. Every probe and every
instructor test input is validated against it before anything else touches
the arguments, so the reference oracles can assume conforming input.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

PARAM_KINDS = ("int", "int-array", "string")

# Conservative bounds applied when a problem document omits them; chosen so
# any conforming input keeps the reference oracles fast.
DEFAULT_INT_MIN = -1_000_000
DEFAULT_INT_MAX = 1_000_000
DEFAULT_ARRAY_MAX_LENGTH = 100
DEFAULT_STRING_MAX_LENGTH = 200


class SignatureError(ValueError):
    """A probe or test input does not conform to the signature."""

    def __init__(self, message: str, param: str | None = None):
        super().__init__(message)
        self.param = param


@dataclass(frozen=True)
class ParamSpec:
    """One argument slot: a name, a kind, and bounds.

    ``equals_length_of`` pins an int parameter to the length of a previously
    declared array parameter (the conventional explicit-length idiom), so a
    mismatch is rejected at the boundary instead of inside an oracle.
    """

    name: str
    kind: str
    min_value: int = DEFAULT_INT_MIN
    max_value: int = DEFAULT_INT_MAX
    max_length: int | None = None
    equals_length_of: str | None = None

    def __post_init__(self):
        if self.kind not in PARAM_KINDS:
            raise ValueError(f"unknown parameter kind {self.kind!r} for {self.name!r}")
        if self.min_value > self.max_value:
            raise ValueError(f"empty value range for parameter {self.name!r}")
        if self.kind == "int-array" and self.max_length is None:
            object.__setattr__(self, "max_length", DEFAULT_ARRAY_MAX_LENGTH)
        if self.kind == "string" and self.max_length is None:
            object.__setattr__(self, "max_length", DEFAULT_STRING_MAX_LENGTH)
        if self.max_length is not None and self.max_length < 0:
            raise ValueError(f"negative max_length for parameter {self.name!r}")


def _is_int(value) -> bool:
    # bool is an int subclass but is never a valid probe argument
    return isinstance(value, int) and not isinstance(value, bool)


def _is_printable_ascii(text: str) -> bool:
    return all(32 <= ord(c) <= 126 for c in text)


@dataclass(frozen=True)
class ProbeSignature:
    """Ordered parameter slots a probe must fill."""

    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        seen: set[str] = set()
        for p in self.params:
            if p.name in seen:
                raise ValueError(f"duplicate parameter name {p.name!r}")
            seen.add(p.name)
            if p.equals_length_of is not None:
                if p.kind != "int":
                    raise ValueError(
                        f"equals_length_of only applies to int parameters, not {p.name!r}"
                    )
                ref = next((q for q in self.params if q.name == p.equals_length_of), None)
                if ref is None or ref.kind != "int-array":
                    raise ValueError(
                        f"parameter {p.name!r} references unknown array "
                        f"{p.equals_length_of!r}"
                    )

    def validate(self, args) -> None:
        """Raise :class:`SignatureError` unless ``args`` conforms.

        Checks arity, per-parameter kind, value and length bounds, the
        printable-ASCII restriction on strings, and explicit-length pins.
        """
        args = tuple(args)
        if len(args) != len(self.params):
            raise SignatureError(
                f"expected {len(self.params)} arguments, got {len(args)}"
            )
        by_name = dict(zip((p.name for p in self.params), args))
        for spec, value in zip(self.params, args):
            if spec.kind == "int":
                if not _is_int(value):
                    raise SignatureError(
                        f"parameter {spec.name!r} must be an integer", param=spec.name
                    )
                if not spec.min_value <= value <= spec.max_value:
                    raise SignatureError(
                        f"parameter {spec.name!r} out of range "
                        f"[{spec.min_value}, {spec.max_value}]",
                        param=spec.name,
                    )
                if spec.equals_length_of is not None:
                    arr = by_name[spec.equals_length_of]
                    if isinstance(arr, (list, tuple)) and value != len(arr):
                        raise SignatureError(
                            f"parameter {spec.name!r} must equal the length of "
                            f"{spec.equals_length_of!r} ({len(arr)})",
                            param=spec.name,
                        )
            elif spec.kind == "int-array":
                if not isinstance(value, (list, tuple)):
                    raise SignatureError(
                        f"parameter {spec.name!r} must be an integer array",
                        param=spec.name,
                    )
                if len(value) > spec.max_length:
                    raise SignatureError(
                        f"parameter {spec.name!r} longer than {spec.max_length}",
                        param=spec.name,
                    )
                for elem in value:
                    if not _is_int(elem):
                        raise SignatureError(
                            f"parameter {spec.name!r} contains a non-integer",
                            param=spec.name,
                        )
                    if not spec.min_value <= elem <= spec.max_value:
                        raise SignatureError(
                            f"element of {spec.name!r} out of range "
                            f"[{spec.min_value}, {spec.max_value}]",
                            param=spec.name,
                        )
            elif spec.kind == "string":
                if not isinstance(value, str):
                    raise SignatureError(
                        f"parameter {spec.name!r} must be a string", param=spec.name
                    )
                if len(value) > spec.max_length:
                    raise SignatureError(
                        f"parameter {spec.name!r} longer than {spec.max_length}",
                        param=spec.name,
                    )
                if not _is_printable_ascii(value):
                    raise SignatureError(
                        f"parameter {spec.name!r} must be printable ASCII",
                        param=spec.name,
                    )

    def conforms(self, args) -> bool:
        try:
            self.validate(args)
        except SignatureError:
            return False
        return True

    def random_args(self, rng: random.Random) -> tuple:
        """Draw one conforming argument tuple (used by the simulator)."""
        values: dict[str, object] = {}
        for spec in self.params:
            if spec.kind == "int-array":
                length = rng.randint(0, min(spec.max_length, 12))
                values[spec.name] = [
                    rng.randint(max(spec.min_value, -999), min(spec.max_value, 999))
                    for _ in range(length)
                ]
        out = []
        for spec in self.params:
            if spec.kind == "int":
                if spec.equals_length_of is not None:
                    out.append(len(values[spec.equals_length_of]))
                else:
                    out.append(
                        rng.randint(max(spec.min_value, -999), min(spec.max_value, 999))
                    )
            elif spec.kind == "int-array":
                out.append(values[spec.name])
            else:
                length = rng.randint(0, min(spec.max_length, 16))
                out.append("".join(chr(rng.randint(32, 126)) for _ in range(length)))
        return tuple(out)


def canonical_args(args) -> tuple:
    """Normalize an argument sequence for structural comparison.

    Arrays become tuples so that ``[1, 2] == (1, 2)`` style differences
    between parsed documents and API payloads never matter.
    """
    out = []
    for value in args:
        if isinstance(value, (list, tuple)):
            out.append(tuple(value))
        else:
            out.append(value)
    return tuple(out)

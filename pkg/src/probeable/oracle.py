"""Probe oracles: the hidden reference solutions that answer test inputs.

Built-in oracles are plain functions over conforming arguments, registered
by name at import time. ``evaluate_probe`` is the single entry point the
service and CLI use: it validates the probe against the problem signature,
runs the reference solution, and reports whether the probe was the
instructor-provided default.

Outputs are canonical strings with no trailing newline; presentation layers
may append one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .signature import SignatureError, canonical_args


class UnknownProblemError(KeyError):
    """No problem with this id exists in the bank."""


class UnknownOracleError(KeyError):
    """oracle_ref does not resolve to a registered oracle."""


@dataclass(frozen=True)
class ProbeRequest:
    """A student-supplied test input for one problem."""

    problem_id: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", canonical_args(self.args))


@dataclass(frozen=True)
class Clarification:
    """The reference solution's output for one probe, as the student sees it."""

    output: str
    is_default: bool


def ref_count_between(arr, n, a, b) -> str:
    """Count array elements strictly between a and b, in either order.

    The bounds may be given in any order and are themselves excluded from
    the range; duplicate qualifying elements are counted individually.
    Requires ``n == len(arr)``.
    """
    lo, hi = (a, b) if a <= b else (b, a)
    return str(sum(1 for value in arr if lo < value < hi))


def ref_smallest_even(arr, n, *, sentinel: str = "NO EVENS", separator: str = " ",
                      index_base: int = 0) -> str:
    """Locate the smallest even value; print its positions, highest first.

    Every index holding the minimum even value is printed in strictly
    descending order, separated by ``separator``; when the array holds no
    even value the ``sentinel`` is printed instead. Requires ``n == len(arr)``.
    """
    evens = [value for value in arr if value % 2 == 0]
    if not evens:
        return sentinel
    smallest = min(evens)
    indices = [i + index_base for i in range(len(arr) - 1, -1, -1) if arr[i] == smallest]
    return separator.join(str(i) for i in indices)


def ref_first_vowel(s, *, no_vowel: str = "-") -> str:
    """Return the vowel present in ``s`` that comes first in a,e,i,o,u order.

    Matching is case-insensitive and the result is lowercase; position in
    the string is irrelevant. With no vowel present, returns ``no_vowel``.
    """
    lowered = s.lower()
    for vowel in "aeiou":
        if vowel in lowered:
            return vowel
    return no_vowel


_REGISTRY: dict[str, Callable[..., str]] = {}


def register_oracle(name: str, fn: Callable[..., str]) -> None:
    _REGISTRY[name] = fn


def resolve_oracle(name: str) -> Callable[..., str]:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownOracleError(name) from None


def registered_oracles() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


register_oracle("count_between", ref_count_between)
register_oracle("smallest_even", ref_smallest_even)
register_oracle("first_vowel", ref_first_vowel)


def run_reference(spec, args) -> str:
    """Apply a problem's reference oracle to already-validated arguments."""
    if spec.oracle_ref == "external":
        raise UnknownOracleError(
            "external oracle requires a sandbox runner; use external_oracle()"
        )
    fn = resolve_oracle(spec.oracle_ref)
    return fn(*args, **spec.oracle_options)


def evaluate_probe(bank, request: ProbeRequest) -> Clarification:
    """Answer one probe: validate, run the hidden solution, flag defaults.

    Raises :class:`UnknownProblemError` for an unknown problem id and
    :class:`SignatureError` (carrying the offending parameter) for
    non-conforming arguments.
    """
    spec = bank.get(request.problem_id)
    spec.signature.validate(request.args)
    output = run_reference(spec, request.args)
    is_default = canonical_args(request.args) == canonical_args(spec.default_probe)
    return Clarification(output=output, is_default=is_default)


def external_oracle(spec, profile, executor, reference_source: str) -> Callable[..., str]:
    """Build an oracle that runs an instructor-supplied reference program.

    The reference source is composed with the probe invocation exactly like
    a graded submission, executed in the sandbox, and its stdout (trailing
    newline stripped) becomes the clarification. Lets instructors supply
    reference programs in any language a runner profile supports instead of
    a built-in.
    """
    from .sandbox import compose_program, render_invocation

    def oracle(*args) -> str:
        invocation = render_invocation(profile, spec.entry_point, args)
        program = compose_program(profile, reference_source, invocation)
        result = executor.execute(profile, program)
        if result.status != "ok":
            raise RuntimeError(
                f"reference program for {spec.id} failed: {result.status}: "
                f"{result.stderr.strip()}"
            )
        return result.stdout.rstrip("\n")

    return oracle


__all__ = [
    "Clarification",
    "ProbeRequest",
    "SignatureError",
    "UnknownOracleError",
    "UnknownProblemError",
    "evaluate_probe",
    "external_oracle",
    "ref_count_between",
    "ref_first_vowel",
    "ref_smallest_even",
    "register_oracle",
    "registered_oracles",
    "resolve_oracle",
    "run_reference",
]

"""Problem bank: deliberately vague statements plus their hidden resolutions.

A problem document pairs the statement students see with everything they
don't: the reference oracle, the instructor test suite, the default probe
and the penalty policy. Documents are one-per-file JSON (``<bank>/<id>.problem``)
with an explicit schema version so instructors can author and diff them by
hand; runner profiles live alongside in ``<bank>/profiles/``.

``validate_problem`` replays every instructor test against the reference
oracle so an authoring mistake (a test whose expected output the hidden
solution would not produce) is caught before students ever see it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .oracle import run_reference
from .sandbox import (
    OutputPattern,
    RunnerProfile,
    profile_from_document,
    render_call,
)
from .signature import ParamSpec, ProbeSignature, canonical_args

SCHEMA_VERSION = 1

DEFAULT_PROBE_REMINDER = (
    "Reminder: submitting probes carries no penalty, and you may submit as "
    "many probes as you wish. Only incorrect code submissions are penalised."
)


class BankError(Exception):
    """A problem bank could not be loaded (parse failure, duplicate id, ...)."""


class UnknownProfileError(KeyError):
    """runner_profile_id does not resolve to a loaded profile."""


@dataclass(frozen=True)
class PenaltyPolicy:
    """Per-failing-submission score decrement with a floor.

    ``count_after_pass`` controls whether failing submissions made after a
    successful one still accrue penalty (they do by default).
    """

    increment: float = 0.05
    floor: float = 0.0
    probe_cost: float = 0.0
    count_after_pass: bool = True

    def __post_init__(self):
        if not 0.0 <= self.increment <= 1.0:
            raise ValueError("penalty increment must be within [0, 1]")
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError("penalty floor must be within [0, 1]")
        if self.probe_cost < 0.0:
            raise ValueError("probe cost must be non-negative")


@dataclass(frozen=True)
class TestCase:
    """One instructor test: arguments, expected-output pattern, visibility."""

    __test__ = False  # keep pytest from collecting the domain type

    args: tuple
    expected: OutputPattern
    visible_on_failure: bool = True

    def __post_init__(self):
        object.__setattr__(self, "args", canonical_args(self.args))


@dataclass(frozen=True)
class ProblemSpec:
    """One probeable problem: the vague statement and its hidden resolution."""

    id: str
    statement: str
    signature: ProbeSignature
    default_probe: tuple
    oracle_ref: str
    entry_point: str
    test_suite: tuple[TestCase, ...]
    framing: str = ""
    probe_reminder: str = DEFAULT_PROBE_REMINDER
    penalty: PenaltyPolicy = field(default_factory=PenaltyPolicy)
    runner_profile_id: str = "python3"
    oracle_options: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "default_probe", canonical_args(self.default_probe))
        object.__setattr__(self, "test_suite", tuple(self.test_suite))
        if not self.id:
            raise ValueError("problem id must be non-empty")
        if not self.test_suite:
            raise ValueError(f"{self.id}: test suite must be non-empty")
        self.signature.validate(self.default_probe)
        for index, test in enumerate(self.test_suite):
            try:
                self.signature.validate(test.args)
            except Exception as exc:
                raise ValueError(f"{self.id}: test {index} violates signature: {exc}") from exc


@dataclass(frozen=True)
class Mismatch:
    """A test whose literal/regex expectation disagrees with the oracle."""

    test_index: int
    input_call: str
    expected: str
    actual: str


@dataclass(frozen=True)
class ValidationReport:
    problem_id: str
    mismatches: tuple[Mismatch, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def validate_problem(spec: ProblemSpec) -> ValidationReport:
    """Check every instructor test against the reference oracle.

    Literal expectations must equal the oracle output exactly; regex
    expectations must accept it; wildcard tests can never mismatch.
    Raises :class:`~probeable.oracle.UnknownOracleError` when the spec's
    oracle_ref is not registered.
    """
    mismatches = []
    for index, test in enumerate(spec.test_suite):
        actual = run_reference(spec, test.args)
        if test.expected.kind == "wildcard":
            continue
        if test.expected.kind == "literal":
            agrees = actual == test.expected.body
        else:
            from .sandbox import match_output

            agrees = match_output(actual, test.expected)
        if not agrees:
            mismatches.append(
                Mismatch(
                    test_index=index,
                    input_call=render_call(spec.entry_point, test.args),
                    expected=test.expected.body,
                    actual=actual,
                )
            )
    return ValidationReport(problem_id=spec.id, mismatches=tuple(mismatches))


def render_statement(spec: ProblemSpec) -> str:
    """The full text shown to students: framing, statement, probe reminder."""
    parts = [part for part in (spec.framing, spec.statement, spec.probe_reminder) if part]
    return "\n\n".join(parts)


# --- document (de)serialization ---------------------------------------------


def _param_from_document(doc: dict) -> ParamSpec:
    kwargs = {"name": doc["name"], "kind": doc["kind"]}
    for key in ("min_value", "max_value", "max_length", "equals_length_of"):
        if key in doc:
            kwargs[key] = doc[key]
    return ParamSpec(**kwargs)


def _param_to_document(param: ParamSpec) -> dict:
    doc = {"name": param.name, "kind": param.kind}
    if param.kind in ("int", "int-array"):
        doc["min_value"] = param.min_value
        doc["max_value"] = param.max_value
    if param.max_length is not None:
        doc["max_length"] = param.max_length
    if param.equals_length_of is not None:
        doc["equals_length_of"] = param.equals_length_of
    return doc


def _pattern_from_document(doc) -> OutputPattern:
    if isinstance(doc, str):
        return OutputPattern.literal(doc)
    return OutputPattern(kind=doc["kind"], body=doc.get("body", ""))


def _pattern_to_document(pattern: OutputPattern) -> dict:
    return {"kind": pattern.kind, "body": pattern.body}


def problem_from_document(doc: dict, where: str = "<problem>") -> ProblemSpec:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise BankError(f"{where}: unsupported schema_version {version!r}")
    try:
        signature = ProbeSignature(
            params=tuple(_param_from_document(p) for p in doc["signature"]["params"])
        )
        tests = tuple(
            TestCase(
                args=tuple(t["input"]),
                expected=_pattern_from_document(t["expected"]),
                visible_on_failure=t.get("visible_on_failure", True),
            )
            for t in doc["tests"]
        )
        penalty_doc = doc.get("penalty", {})
        penalty = PenaltyPolicy(
            increment=penalty_doc.get("increment", 0.05),
            floor=penalty_doc.get("floor", 0.0),
            probe_cost=penalty_doc.get("probe_cost", 0.0),
            count_after_pass=penalty_doc.get("count_after_pass", True),
        )
        return ProblemSpec(
            id=doc["id"],
            statement=doc["statement"],
            framing=doc.get("framing", ""),
            probe_reminder=doc.get("probe_reminder", DEFAULT_PROBE_REMINDER),
            signature=signature,
            default_probe=tuple(doc["default_probe"]),
            oracle_ref=doc["oracle_ref"],
            entry_point=doc["entry_point"],
            test_suite=tests,
            penalty=penalty,
            runner_profile_id=doc.get("runner_profile", "python3"),
            oracle_options=dict(doc.get("oracle_options", {})),
        )
    except BankError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise BankError(f"{where}: malformed problem document: {exc}") from exc


def problem_to_document(spec: ProblemSpec) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "id": spec.id,
        "statement": spec.statement,
        "framing": spec.framing,
        "probe_reminder": spec.probe_reminder,
        "entry_point": spec.entry_point,
        "oracle_ref": spec.oracle_ref,
        "runner_profile": spec.runner_profile_id,
        "signature": {"params": [_param_to_document(p) for p in spec.signature.params]},
        "default_probe": [list(a) if isinstance(a, tuple) else a for a in spec.default_probe],
        "penalty": {
            "increment": spec.penalty.increment,
            "floor": spec.penalty.floor,
            "probe_cost": spec.penalty.probe_cost,
            "count_after_pass": spec.penalty.count_after_pass,
        },
        "tests": [
            {
                "input": [list(a) if isinstance(a, tuple) else a for a in t.args],
                "expected": _pattern_to_document(t.expected),
                "visible_on_failure": t.visible_on_failure,
            }
            for t in spec.test_suite
        ],
    }
    if spec.oracle_options:
        doc["oracle_options"] = dict(spec.oracle_options)
    return doc


def save_problem(spec: ProblemSpec, path: Path | str) -> None:
    Path(path).write_text(json.dumps(problem_to_document(spec), indent=2) + "\n")


def load_problem_bank(path: Path | str) -> list[ProblemSpec]:
    """Load every ``*.problem`` document under ``path``, rejecting duplicates.

    Returns specs ordered by filename; each one has already passed its
    structural invariants (default probe and test inputs conform to the
    signature, non-empty suite).
    """
    bank_dir = Path(path)
    if not bank_dir.is_dir():
        raise BankError(f"problem bank directory not found: {bank_dir}")
    specs: list[ProblemSpec] = []
    seen: dict[str, Path] = {}
    for doc_path in sorted(bank_dir.glob("*.problem")):
        try:
            doc = json.loads(doc_path.read_text())
        except json.JSONDecodeError as exc:
            raise BankError(f"{doc_path}: invalid JSON: {exc}") from exc
        spec = problem_from_document(doc, where=str(doc_path))
        if spec.id in seen:
            raise BankError(
                f"{doc_path}: duplicate problem id {spec.id!r} (also in {seen[spec.id]})"
            )
        seen[spec.id] = doc_path
        specs.append(spec)
    return specs


def load_runner_profiles(path: Path | str) -> dict[str, RunnerProfile]:
    """Load ``profiles/*.profile`` documents next to the problem bank."""
    profiles_dir = Path(path) / "profiles"
    profiles: dict[str, RunnerProfile] = {}
    if not profiles_dir.is_dir():
        return profiles
    for doc_path in sorted(profiles_dir.glob("*.profile")):
        try:
            doc = json.loads(doc_path.read_text())
        except json.JSONDecodeError as exc:
            raise BankError(f"{doc_path}: invalid JSON: {exc}") from exc
        profile = profile_from_document(doc, where=str(doc_path))
        if profile.id in profiles:
            raise BankError(f"{doc_path}: duplicate profile id {profile.id!r}")
        profiles[profile.id] = profile
    return profiles


class ProblemBank:
    """Immutable lookup over loaded problems and runner profiles.

    Loaded once at startup and never mutated, so request handlers may read
    it concurrently without locking.
    """

    def __init__(self, problems: list[ProblemSpec], profiles: dict[str, RunnerProfile] | None = None):
        self._problems = {spec.id: spec for spec in problems}
        self.profiles = dict(profiles or {})

    @classmethod
    def load(cls, path: Path | str) -> "ProblemBank":
        return cls(load_problem_bank(path), load_runner_profiles(path))

    def get(self, problem_id: str) -> ProblemSpec:
        from .oracle import UnknownProblemError

        try:
            return self._problems[problem_id]
        except KeyError:
            raise UnknownProblemError(problem_id) from None

    def profile_for(self, spec: ProblemSpec) -> RunnerProfile:
        try:
            return self.profiles[spec.runner_profile_id]
        except KeyError:
            raise UnknownProfileError(spec.runner_profile_id) from None

    def __contains__(self, problem_id: str) -> bool:
        return problem_id in self._problems

    def __iter__(self):
        return iter(self._problems.values())

    def __len__(self) -> int:
        return len(self._problems)

    @property
    def problem_ids(self) -> tuple[str, ...]:
        return tuple(self._problems)


def bundled_bank_path() -> Path:
    """Location of the bank shipped inside the package (P7, P8, P9)."""
    return Path(__file__).parent / "bank"

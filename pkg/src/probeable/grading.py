"""Grade code submissions and keep score under the incremental penalty.

Tests run in suite order and stop at the first failure, because only that
first failing test is ever disclosed to the student. A submission that
fails to compile fails every remaining test at once. Infrastructure faults
(missing toolchain) are deliberately not graded failures: they surface as
exceptions and are never logged as F.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction

from .attempt_log import AttemptEvent, EventStore, utc_now
from .problems import PenaltyPolicy, ProblemBank
from .sandbox import (
    SandboxExecutor,
    compose_program,
    match_output,
    normalize_output,
    render_call,
    render_invocation,
)


@dataclass(frozen=True)
class Submission:
    student_id: str
    problem_id: str
    source: str
    submitted_at: datetime = field(default_factory=utc_now)

    def __post_init__(self):
        if not self.source.strip():
            raise ValueError("submission source must be non-empty")


@dataclass(frozen=True)
class TestFailure:
    """Everything the student is shown about the one disclosed failing test."""

    __test__ = False  # keep pytest from collecting the domain type

    test_index: int
    input_call: str
    expected: str
    actual: str
    status: str  # wrong-output | compile-error | timeout | runtime-error | output-truncated


@dataclass(frozen=True)
class SubmissionOutcome:
    verdict: str  # "pass" | "fail"
    first_failure: TestFailure | None
    tests_passed: int
    tests_total: int
    failures: tuple[TestFailure, ...] = ()

    def __post_init__(self):
        if self.verdict not in ("pass", "fail"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if (self.verdict == "fail") != (self.first_failure is not None):
            raise ValueError("first_failure present iff verdict is fail")


@dataclass(frozen=True)
class PenaltyState:
    failing_count: int
    policy: PenaltyPolicy


def compute_final_score(state: PenaltyState) -> float:
    """max(floor, 1 - increment * failing_count), in exact decimal arithmetic.

    Fractions keep 0.05 * 2 at exactly 0.10 so reported scores are the
    round decimals students expect.
    """
    increment = Fraction(str(state.policy.increment))
    floor = Fraction(str(state.policy.floor))
    score = max(floor, Fraction(1) - increment * state.failing_count)
    return float(score)


def failing_count_from_symbols(symbols: str, policy: PenaltyPolicy) -> int:
    """Count penalised failures in a P/F/S string per the policy."""
    if policy.count_after_pass:
        return symbols.count("F")
    first_pass = symbols.find("S")
    prefix = symbols if first_pass < 0 else symbols[:first_pass]
    return prefix.count("F")


def _expected_text(pattern) -> str:
    if pattern.kind == "literal":
        return pattern.body
    if pattern.kind == "regex":
        return f"output matching /{pattern.body}/"
    return "(any output)"


def grade_submission(bank: ProblemBank, executor: SandboxExecutor, sub: Submission,
                     *, run_all: bool = False) -> SubmissionOutcome:
    """Run the suite in order, fail fast, disclose only the earliest failure.

    ``run_all`` is an instructor diagnostic: every test still runs and all
    failures are collected, but the outcome's ``first_failure`` stays the
    earliest one. Raises ToolchainMissingError (infrastructure, not an F)
    if the runner commands are absent.
    """
    spec = bank.get(sub.problem_id)
    profile = bank.profile_for(spec)
    failures: list[TestFailure] = []
    tests_passed = 0
    total = len(spec.test_suite)

    for index, test in enumerate(spec.test_suite):
        invocation = render_invocation(profile, spec.entry_point, test.args)
        program = compose_program(profile, sub.source, invocation)
        result = executor.execute(profile, program)

        if result.status == "compile-error":
            # the source can never pass anything that remains
            failures.append(TestFailure(
                test_index=index,
                input_call=render_call(spec.entry_point, test.args),
                expected=_expected_text(test.expected),
                actual=result.stderr.strip(),
                status="compile-error",
            ))
            break

        if result.status == "ok" and match_output(result.stdout, test.expected):
            tests_passed += 1
            continue
        if result.status == "output-truncated" and match_output(result.stdout, test.expected):
            tests_passed += 1
            continue

        status = "wrong-output" if result.status == "ok" else result.status
        failures.append(TestFailure(
            test_index=index,
            input_call=render_call(spec.entry_point, test.args),
            expected=_expected_text(test.expected),
            actual=normalize_output(result.stdout),
            status=status,
        ))
        if not run_all:
            break

    if failures:
        return SubmissionOutcome(
            verdict="fail",
            first_failure=failures[0],
            tests_passed=tests_passed,
            tests_total=total,
            failures=tuple(failures),
        )
    return SubmissionOutcome(
        verdict="pass", first_failure=None, tests_passed=tests_passed, tests_total=total
    )


def record_outcome(store: EventStore, sub: Submission, outcome: SubmissionOutcome) -> AttemptEvent:
    """Append the F or S event for a graded submission."""
    payload_ref = store.store_payload({
        "kind": "submission",
        "problem_id": sub.problem_id,
        "source": sub.source,
        "verdict": outcome.verdict,
    })
    kind = "S" if outcome.verdict == "pass" else "F"
    return store.append_event(
        sub.student_id, sub.problem_id, kind, payload_ref, at=sub.submitted_at
    )


def outcome_to_document(outcome: SubmissionOutcome, score: float) -> dict:
    """Serialize for the API: verdict, the one disclosed failure, the score."""
    doc = {
        "verdict": outcome.verdict,
        "tests_passed": outcome.tests_passed,
        "tests_total": outcome.tests_total,
        "score": score,
        "first_failure": None,
    }
    if outcome.first_failure is not None:
        failure = outcome.first_failure
        doc["first_failure"] = {
            "input": failure.input_call,
            "expected": failure.expected,
            "actual": failure.actual,
            "status": failure.status,
        }
    return doc

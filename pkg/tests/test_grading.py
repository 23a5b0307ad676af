"""Grading: suite order, first-failure disclosure, penalties, event recording."""

from __future__ import annotations

import pytest

from probeable.attempt_log import EventStore
from probeable.grading import (
    PenaltyState,
    Submission,
    SubmissionOutcome,
    TestFailure,
    compute_final_score,
    failing_count_from_symbols,
    grade_submission,
    outcome_to_document,
    record_outcome,
)
from probeable.problems import PenaltyPolicy
from probeable.sandbox import ToolchainMissingError

CORRECT_P7 = """\
def count_between(arr, n, a, b):
    lo, hi = min(a, b), max(a, b)
    return sum(1 for v in arr if lo < v < hi)
"""

# resolves the strict-exclusion ambiguity the wrong way
INCLUSIVE_P7 = """\
def count_between(arr, n, a, b):
    lo, hi = min(a, b), max(a, b)
    return sum(1 for v in arr if lo <= v <= hi)
"""

CORRECT_P9 = """\
def first_vowel(s):
    s = s.lower()
    for v in "aeiou":
        if v in s:
            return v
    return "-"
"""


class TestGradeSubmission:

    def test_correct_solution_passes(self, bank, executor):
        outcome = grade_submission(bank, executor, Submission("s1", "P7", CORRECT_P7))
        assert outcome.verdict == "pass"
        assert outcome.tests_passed == outcome.tests_total
        assert outcome.first_failure is None

    def test_inclusive_bounds_fails_on_strict_exclusion_test(self, bank, executor):
        outcome = grade_submission(bank, executor, Submission("s1", "P7", INCLUSIVE_P7))
        assert outcome.verdict == "fail"
        failure = outcome.first_failure
        assert failure is not None
        assert failure.input_call == "count_between([0, 5, 3], 3, 0, 5)"
        assert failure.expected == "1"
        assert failure.actual == "3"
        assert failure.status == "wrong-output"

    def test_compile_error_fails_with_status(self, bank, executor):
        outcome = grade_submission(bank, executor, Submission("s1", "P7", "def broken(:"))
        assert outcome.verdict == "fail"
        assert outcome.first_failure.status == "compile-error"
        assert outcome.tests_passed == 0

    def test_fail_fast_discloses_only_first_failure(self, bank, executor):
        outcome = grade_submission(bank, executor, Submission("s1", "P7", INCLUSIVE_P7))
        assert len(outcome.failures) == 1
        later_inputs = [
            f"count_between{tuple(t.args)}" for t in bank.get("P7").test_suite[2:]
        ]
        payload = outcome_to_document(outcome, score=0.95)
        assert all(call not in str(payload) for call in later_inputs)

    def test_run_all_collects_every_failure(self, bank, executor):
        outcome = grade_submission(
            bank, executor, Submission("s1", "P7", INCLUSIVE_P7), run_all=True
        )
        assert outcome.verdict == "fail"
        assert len(outcome.failures) >= 2
        assert outcome.first_failure == outcome.failures[0]

    def test_grading_is_idempotent(self, bank, executor):
        sub = Submission("s1", "P9", CORRECT_P9)
        first = grade_submission(bank, executor, sub)
        second = grade_submission(bank, executor, sub)
        assert first == second

    def test_toolchain_missing_is_not_a_graded_failure(self, bank, executor):
        from probeable.sandbox import RunnerProfile, ResourceLimits
        from probeable.problems import ProblemBank

        broken_profile = RunnerProfile(
            id="python3", language="python", source_filename="p.py",
            compose_template="{STUDENT_SOURCE}{TEST_INVOCATION}",
            invocation_template="", run_cmd="missing-binary-zz {SRCFILE}",
            limits=ResourceLimits(),
        )
        broken_bank = ProblemBank(list(bank), {"python3": broken_profile, "c": bank.profiles["c"]})
        with pytest.raises(ToolchainMissingError):
            grade_submission(broken_bank, executor, Submission("s1", "P7", CORRECT_P7))

    def test_empty_source_rejected(self):
        with pytest.raises(ValueError):
            Submission("s1", "P7", "   \n")


class TestFinalScore:

    @pytest.mark.parametrize("failing,expected", [
        (0, 1.00),
        (1, 0.95),
        (2, 0.90),
        (20, 0.00),
        (25, 0.00),
    ])
    def test_five_point_increments(self, failing, expected):
        state = PenaltyState(failing_count=failing, policy=PenaltyPolicy())
        assert compute_final_score(state) == expected

    def test_floor_clamps(self):
        policy = PenaltyPolicy(increment=0.05, floor=0.5)
        assert compute_final_score(PenaltyState(failing_count=20, policy=policy)) == 0.5

    def test_monotone_non_increasing(self):
        policy = PenaltyPolicy()
        scores = [
            compute_final_score(PenaltyState(failing_count=k, policy=policy))
            for k in range(30)
        ]
        assert all(a >= b for a, b in zip(scores, scores[1:]))
        assert all(0.0 <= s <= 1.0 for s in scores)

    def test_failing_count_honours_count_after_pass(self):
        always = PenaltyPolicy(count_after_pass=True)
        before_only = PenaltyPolicy(count_after_pass=False)
        assert failing_count_from_symbols("PFFSF", always) == 3
        assert failing_count_from_symbols("PFFSF", before_only) == 2
        assert failing_count_from_symbols("FFF", before_only) == 3


class TestRecordOutcome:

    def test_fail_then_pass_appends_f_then_s(self, bank, executor, tmp_path):
        store = EventStore(tmp_path / "log.jsonl")
        failing = grade_submission(bank, executor, Submission("s1", "P7", INCLUSIVE_P7))
        record_outcome(store, Submission("s1", "P7", INCLUSIVE_P7), failing)
        record_outcome(store, Submission("s1", "P7", INCLUSIVE_P7), failing)
        passing = grade_submission(bank, executor, Submission("s1", "P7", CORRECT_P7))
        record_outcome(store, Submission("s1", "P7", CORRECT_P7), passing)
        assert store.derive_sequence("s1", "P7").symbols == "FFS"

    def test_outcome_document_shape(self, bank, executor):
        outcome = grade_submission(bank, executor, Submission("s1", "P7", INCLUSIVE_P7))
        doc = outcome_to_document(outcome, score=0.95)
        assert doc["verdict"] == "fail"
        assert doc["score"] == 0.95
        assert doc["first_failure"] == {
            "input": "count_between([0, 5, 3], 3, 0, 5)",
            "expected": "1",
            "actual": "3",
            "status": "wrong-output",
        }


def test_outcome_invariant_enforced():
    with pytest.raises(ValueError):
        SubmissionOutcome(verdict="fail", first_failure=None, tests_passed=0, tests_total=3)
    with pytest.raises(ValueError):
        SubmissionOutcome(
            verdict="pass",
            first_failure=TestFailure(0, "f()", "1", "2", "wrong-output"),
            tests_passed=3,
            tests_total=3,
        )

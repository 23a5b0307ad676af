"""Probeable problems platform.

Deliberately vague programming tasks whose missing details students uncover
by submitting test inputs (probes) to a hidden reference solution, then
solving the task against instructor tests under an incremental penalty for
failing submissions. Everything a student does is an append-only P/F/S
event stream, which the analytics pipeline turns into cohort reports.
"""

__version__ = "0.1.0"

from .analytics import (
    CohortFilter,
    CohortReport,
    build_report,
    export_report,
    probe_code_ratio,
    probes_before_first_code,
)
from .attempt_log import AttemptEvent, AttemptSequence, EventStore, load_roster, mark_default
from .grading import (
    PenaltyState,
    Submission,
    SubmissionOutcome,
    compute_final_score,
    grade_submission,
    record_outcome,
)
from .oracle import Clarification, ProbeRequest, evaluate_probe
from .problems import (
    PenaltyPolicy,
    ProblemBank,
    ProblemSpec,
    TestCase,
    bundled_bank_path,
    load_problem_bank,
    render_statement,
    validate_problem,
)
from .sandbox import (
    ExecutionResult,
    OutputPattern,
    ResourceLimits,
    RunnerProfile,
    SandboxExecutor,
    compose_program,
    match_output,
)
from .signature import ParamSpec, ProbeSignature, SignatureError

__all__ = [
    "AttemptEvent",
    "AttemptSequence",
    "Clarification",
    "CohortFilter",
    "CohortReport",
    "EventStore",
    "ExecutionResult",
    "OutputPattern",
    "ParamSpec",
    "PenaltyPolicy",
    "PenaltyState",
    "ProbeRequest",
    "ProbeSignature",
    "ProblemBank",
    "ProblemSpec",
    "ResourceLimits",
    "RunnerProfile",
    "SandboxExecutor",
    "SignatureError",
    "Submission",
    "SubmissionOutcome",
    "TestCase",
    "build_report",
    "bundled_bank_path",
    "compose_program",
    "compute_final_score",
    "evaluate_probe",
    "export_report",
    "grade_submission",
    "load_problem_bank",
    "load_roster",
    "mark_default",
    "match_output",
    "probe_code_ratio",
    "probes_before_first_code",
    "record_outcome",
    "render_statement",
    "validate_problem",
]

"""HTTP front door: the student probe/submit loop and instructor analytics.

All bodies are JSON with documented field names; errors use one envelope,
``{"error": {"code", "message", "detail"}}``, with codes drawn from a
closed set (see README). Every successful probe or submission appends
exactly one event to the attempt log; error responses append none.
Submissions for the same (student, problem) are serialised: a concurrent
duplicate gets 409 so the F/S ordering the analytics depend on stays
unambiguous.
"""

from __future__ import annotations

import csv
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .analytics import CohortFilter, build_report, report_to_document
from .attempt_log import EventStore, StudentRecord
from .grading import (
    Submission,
    compute_final_score,
    PenaltyState,
    failing_count_from_symbols,
    grade_submission,
    outcome_to_document,
    record_outcome,
)
from .oracle import ProbeRequest, UnknownProblemError, evaluate_probe
from .problems import ProblemBank, render_statement, _param_to_document
from .sandbox import SandboxExecutor, ToolchainMissingError
from .signature import SignatureError

ERROR_CODES = (
    "bad_session",
    "forbidden",
    "unknown_problem",
    "bad_request",
    "signature_violation",
    "empty_source",
    "submission_in_flight",
    "sandbox_unavailable",
)


class ApiError(Exception):
    """Error reported to clients in the documented envelope."""

    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        assert code in ERROR_CODES
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        body = {"error": {"code": self.code, "message": self.message}}
        if self.detail is not None:
            body["error"]["detail"] = self.detail
        return JSONResponse(status_code=self.status, content=body)


@dataclass(frozen=True)
class SessionToken:
    token: str
    student_id: str
    role: str  # "student" | "instructor"
    issued_at: datetime
    expires_at: datetime

    def is_expired(self, now: datetime | None = None) -> bool:
        return (now or datetime.now(timezone.utc)) >= self.expires_at


class SessionStore:
    """Bearer tokens minted by the CLI from the roster; CSV-backed."""

    def __init__(self, tokens: dict[str, SessionToken] | None = None):
        self._tokens = dict(tokens or {})

    @classmethod
    def load(cls, path: Path | str) -> "SessionStore":
        tokens: dict[str, SessionToken] = {}
        path = Path(path)
        if path.exists():
            with open(path, newline="") as handle:
                for row in csv.DictReader(handle):
                    token = SessionToken(
                        token=row["token"],
                        student_id=row["student_id"],
                        role=row["role"],
                        issued_at=datetime.fromisoformat(row["issued_at"]),
                        expires_at=datetime.fromisoformat(row["expires_at"]),
                    )
                    tokens[token.token] = token
        return cls(tokens)

    def add(self, token: SessionToken) -> None:
        self._tokens[token.token] = token

    def lookup(self, token: str) -> SessionToken | None:
        return self._tokens.get(token)


def mint_token(store_path: Path | str, student_id: str, role: str = "student",
               ttl_hours: float = 720.0) -> SessionToken:
    """Create a token and append it to the CSV token file."""
    now = datetime.now(timezone.utc)
    token = SessionToken(
        token=secrets.token_urlsafe(24),
        student_id=student_id,
        role=role,
        issued_at=now,
        expires_at=now + timedelta(hours=ttl_hours),
    )
    path = Path(store_path)
    new_file = not path.exists()
    with open(path, "a", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if new_file:
            writer.writerow(["token", "student_id", "role", "issued_at", "expires_at"])
        writer.writerow([
            token.token, token.student_id, token.role,
            token.issued_at.isoformat(), token.expires_at.isoformat(),
        ])
    return token


class ProbeBody(BaseModel):
    args: list[Any]


class SubmissionBody(BaseModel):
    source: str


class _SubmissionLocks:
    """One non-reentrant lock per (student, problem); busy means 409."""

    def __init__(self):
        self._master = threading.Lock()
        self._locks: dict[tuple[str, str], threading.Lock] = {}

    def acquire(self, key: tuple[str, str]) -> threading.Lock:
        with self._master:
            lock = self._locks.setdefault(key, threading.Lock())
        if not lock.acquire(blocking=False):
            raise ApiError(
                409, "submission_in_flight",
                "another submission for this problem is still being graded",
            )
        return lock


def create_app(bank: ProblemBank, store: EventStore, sessions: SessionStore,
               executor: SandboxExecutor,
               roster: dict[str, StudentRecord] | None = None) -> FastAPI:
    app = FastAPI(title="probeable", docs_url=None, redoc_url=None)
    # the student console is a static page on another origin; tokens, not
    # cookies, carry identity, so a permissive CORS policy is safe here
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    roster = roster or {}
    locks = _SubmissionLocks()

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return ApiError(400, "bad_request", "malformed request body",
                        detail=exc.errors()).response()

    def authenticate(request: Request) -> SessionToken:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise ApiError(401, "bad_session", "missing bearer token")
        session = sessions.lookup(header.removeprefix("Bearer ").strip())
        if session is None or session.is_expired():
            raise ApiError(401, "bad_session", "unknown or expired session")
        return session

    def get_problem_or_404(problem_id: str):
        try:
            return bank.get(problem_id)
        except UnknownProblemError:
            raise ApiError(404, "unknown_problem", f"no problem {problem_id!r}")

    def current_score(spec, student_id: str) -> float:
        symbols = "".join(
            e.kind for e in store.events(student_id, spec.id) if e.kind in "FS"
        )
        failing = failing_count_from_symbols(symbols, spec.penalty)
        return compute_final_score(PenaltyState(failing_count=failing, policy=spec.penalty))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/problems/{problem_id}")
    def get_problem(problem_id: str, request: Request):
        session = authenticate(request)
        spec = get_problem_or_404(problem_id)
        return {
            "id": spec.id,
            "statement": render_statement(spec),
            "signature": {"params": [_param_to_document(p) for p in spec.signature.params]},
            "default_probe": [list(a) if isinstance(a, tuple) else a for a in spec.default_probe],
            "entry_point": spec.entry_point,
            "penalty_increment": spec.penalty.increment,
            "probe_count": store.count(session.student_id, spec.id, "P"),
            "score": current_score(spec, session.student_id),
        }

    @app.post("/problems/{problem_id}/probes")
    def post_probe(problem_id: str, body: ProbeBody, request: Request):
        session = authenticate(request)
        spec = get_problem_or_404(problem_id)
        probe = ProbeRequest(problem_id=spec.id, args=tuple(body.args))
        try:
            clarification = evaluate_probe(bank, probe)
        except SignatureError as exc:
            raise ApiError(422, "signature_violation", str(exc),
                           detail={"param": exc.param})
        payload_ref = store.store_payload({
            "kind": "probe",
            "problem_id": spec.id,
            "args": list(body.args),
        })
        store.append_event(
            session.student_id, spec.id, "P", payload_ref,
            is_default=clarification.is_default,
        )
        return {
            "output": clarification.output,
            "is_default": clarification.is_default,
            "probe_count": store.count(session.student_id, spec.id, "P"),
        }

    @app.post("/problems/{problem_id}/submissions")
    def post_submission(problem_id: str, body: SubmissionBody, request: Request):
        session = authenticate(request)
        spec = get_problem_or_404(problem_id)
        if not body.source.strip():
            raise ApiError(422, "empty_source", "submission source must be non-empty")
        lock = locks.acquire((session.student_id, spec.id))
        try:
            submission = Submission(
                student_id=session.student_id, problem_id=spec.id, source=body.source
            )
            try:
                outcome = grade_submission(bank, executor, submission)
            except ToolchainMissingError as exc:
                raise ApiError(503, "sandbox_unavailable", str(exc))
            record_outcome(store, submission, outcome)
            return outcome_to_document(outcome, current_score(spec, session.student_id))
        finally:
            lock.release()

    @app.get("/analytics/report")
    def analytics_report(request: Request,
                               ratio_threshold: str | None = None,
                               include_defaults: str | None = None,
                               exclude_bare_s: str | None = None,
                               exclude_no_code: str | None = None):
        session = authenticate(request)
        if session.role != "instructor":
            raise ApiError(403, "forbidden", "instructor credential required")
        try:
            flt = CohortFilter(
                exclude_default_probes=not _parse_bool(include_defaults, default=False),
                exclude_bare_s=_parse_bool(exclude_bare_s, default=True),
                exclude_no_code=_parse_bool(exclude_no_code, default=True),
                ratio_outlier_threshold=(
                    float(ratio_threshold) if ratio_threshold is not None
                    else CohortFilter().ratio_outlier_threshold
                ),
            )
        except ValueError as exc:
            raise ApiError(400, "bad_request", f"bad filter value: {exc}")
        report = build_report(store, roster, flt)
        return report_to_document(report)

    return app


def _parse_bool(raw: str | None, default: bool) -> bool:
    if raw is None:
        return default
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes"):
        return True
    if lowered in ("0", "false", "no"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")

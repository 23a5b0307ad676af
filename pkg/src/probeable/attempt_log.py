"""Append-only log of probes and code submissions, and its derived views.

Every probe (P), failing submission (F) and successful submission (S) is a
timestamped event keyed by (student, problem) with a dense per-key sequence
number. Storage is one JSON record per line; the in-memory index is rebuilt
by replaying the file on startup, so the log is the single source of truth
and is diff-able by hand.

Two record types share the file: ``payload`` records hold the stored probe
arguments or submission source, and ``event`` records reference them by id.
An event with a dangling payload reference is rejected.
"""

from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .oracle import ProbeRequest
from .signature import canonical_args

EVENT_KINDS = ("P", "F", "S")

LETTER_GRADES = ("A+", "A", "A-", "B+", "B", "B-", "C+", "C", "C-", "D+", "D", "D-")

CLASSIFICATIONS = ("valid", "bare_s", "no_code")


class LogError(Exception):
    pass


class DanglingPayloadError(LogError):
    """The event references a payload id that was never stored."""


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def truncate_to_millis(at: datetime) -> datetime:
    at = at.astimezone(timezone.utc)
    return at.replace(microsecond=(at.microsecond // 1000) * 1000)


def format_timestamp(at: datetime) -> str:
    """UTC, millisecond precision; ordering authority is seq_no, not this."""
    return at.astimezone(timezone.utc).isoformat(timespec="milliseconds")


def parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text)


@dataclass(frozen=True)
class AttemptEvent:
    student_id: str
    problem_id: str
    seq_no: int
    at: datetime
    kind: str
    is_default: bool
    payload_ref: str

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.is_default and self.kind != "P":
            raise ValueError("is_default only applies to probe events")


@dataclass(frozen=True)
class AttemptSequence:
    """The ordered P/F/S projection of one (student, problem) attempt."""

    student_id: str
    problem_id: str
    symbols: str
    classification: str


def classify_symbols(symbols: str) -> str:
    if symbols == "S":
        return "bare_s"
    if "F" not in symbols and "S" not in symbols:
        return "no_code"
    return "valid"


@dataclass(frozen=True)
class StudentRecord:
    student_id: str
    letter_grade: str

    def __post_init__(self):
        if self.letter_grade not in LETTER_GRADES:
            raise ValueError(f"unknown letter grade {self.letter_grade!r}")

    @property
    def category(self) -> str:
        return self.letter_grade[0]


def load_roster(path: Path | str) -> dict[str, StudentRecord]:
    """Read the out-of-band grade roster: CSV columns student_id,letter_grade."""
    roster: dict[str, StudentRecord] = {}
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"student_id", "letter_grade"} <= set(reader.fieldnames):
            raise LogError(f"{path}: roster must have columns student_id,letter_grade")
        for row in reader:
            record = StudentRecord(
                student_id=row["student_id"].strip(),
                letter_grade=row["letter_grade"].strip(),
            )
            roster[record.student_id] = record
    return roster


def save_roster(roster: dict[str, StudentRecord], path: Path | str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["student_id", "letter_grade"])
        for student_id in sorted(roster):
            writer.writerow([student_id, roster[student_id].letter_grade])


class EventStore:
    """Durable append-only store with a replay-built in-memory index.

    One serialized writer (an internal lock); readers get snapshot copies,
    so analytics can run while the service keeps appending.
    """

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._events: dict[tuple[str, str], list[AttemptEvent]] = {}
        self._payloads: dict[str, dict] = {}
        self._payload_counter = 0
        if self.path.exists():
            self._replay()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()

    def _replay(self) -> None:
        with open(self.path) as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise LogError(f"{self.path}:{line_no}: invalid JSON: {exc}") from exc
                if record.get("type") == "payload":
                    try:
                        self._payloads[record["ref"]] = record.get("data", {})
                    except KeyError as exc:
                        raise LogError(
                            f"{self.path}:{line_no}: payload record missing {exc}"
                        ) from exc
                    self._payload_counter += 1
                elif record.get("type") == "event":
                    try:
                        event = AttemptEvent(
                            student_id=record["student_id"],
                            problem_id=record["problem_id"],
                            seq_no=record["seq_no"],
                            at=parse_timestamp(record["at"]),
                            kind=record["kind"],
                            is_default=record.get("is_default", False),
                            payload_ref=record["payload_ref"],
                        )
                    except (KeyError, TypeError, ValueError) as exc:
                        raise LogError(
                            f"{self.path}:{line_no}: malformed event record: {exc}"
                        ) from exc
                    key = (event.student_id, event.problem_id)
                    expected = len(self._events.get(key, ())) + 1
                    if event.seq_no != expected:
                        raise LogError(
                            f"{self.path}:{line_no}: seq_no {event.seq_no} for {key}, "
                            f"expected {expected}"
                        )
                    if event.payload_ref not in self._payloads:
                        raise LogError(
                            f"{self.path}:{line_no}: dangling payload {event.payload_ref!r}"
                        )
                    self._events.setdefault(key, []).append(event)
                else:
                    raise LogError(f"{self.path}:{line_no}: unknown record type")

    def _write_line(self, record: dict) -> None:
        with open(self.path, "a") as handle:
            handle.write(json.dumps(record, separators=(",", ":")) + "\n")
            handle.flush()

    def store_payload(self, data: dict) -> str:
        """Persist one probe/submission payload; returns its reference id."""
        with self._lock:
            self._payload_counter += 1
            ref = f"pl{self._payload_counter:08d}"
            self._write_line({"type": "payload", "ref": ref, "data": data})
            self._payloads[ref] = data
            return ref

    def payload(self, ref: str) -> dict:
        with self._lock:
            try:
                return self._payloads[ref]
            except KeyError:
                raise DanglingPayloadError(ref) from None

    def append_event(self, student_id: str, problem_id: str, kind: str,
                     payload_ref: str, *, is_default: bool = False,
                     at: datetime | None = None) -> AttemptEvent:
        """Append one event; the per-key seq_no is assigned under the lock."""
        with self._lock:
            if payload_ref not in self._payloads:
                raise DanglingPayloadError(payload_ref)
            key = (student_id, problem_id)
            seq_no = len(self._events.get(key, ())) + 1
            event = AttemptEvent(
                student_id=student_id,
                problem_id=problem_id,
                seq_no=seq_no,
                at=truncate_to_millis(at or utc_now()),
                kind=kind,
                is_default=is_default,
                payload_ref=payload_ref,
            )
            self._write_line({
                "type": "event",
                "student_id": event.student_id,
                "problem_id": event.problem_id,
                "seq_no": event.seq_no,
                "at": format_timestamp(event.at),
                "kind": event.kind,
                "is_default": event.is_default,
                "payload_ref": event.payload_ref,
            })
            self._events.setdefault(key, []).append(event)
            return event

    def events(self, student_id: str, problem_id: str) -> list[AttemptEvent]:
        with self._lock:
            return list(self._events.get((student_id, problem_id), ()))

    def keys(self) -> list[tuple[str, str]]:
        with self._lock:
            return list(self._events)

    def count(self, student_id: str, problem_id: str, kind: str) -> int:
        return sum(1 for e in self.events(student_id, problem_id) if e.kind == kind)

    def derive_sequence(self, student_id: str, problem_id: str,
                        include_defaults: bool = False) -> AttemptSequence:
        """Project events to a P/F/S string, dropping default probes by default.

        No events yields an empty, ``no_code``-classified sequence.
        """
        symbols = []
        for event in self.events(student_id, problem_id):
            if event.kind == "P" and event.is_default and not include_defaults:
                continue
            symbols.append(event.kind)
        symbol_str = "".join(symbols)
        return AttemptSequence(
            student_id=student_id,
            problem_id=problem_id,
            symbols=symbol_str,
            classification=classify_symbols(symbol_str),
        )

    def derive_all(self, include_defaults: bool = False) -> list[AttemptSequence]:
        return [
            self.derive_sequence(student, problem, include_defaults)
            for student, problem in self.keys()
        ]


def mark_default(bank, probe: ProbeRequest) -> bool:
    """True iff the probe's arguments structurally equal the problem's default."""
    spec = bank.get(probe.problem_id)
    return canonical_args(probe.args) == canonical_args(spec.default_probe)

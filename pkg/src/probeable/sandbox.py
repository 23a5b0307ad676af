"""Process-level sandbox: compose, compile, run, and match untrusted code.

Each execution gets a private scratch directory that is removed afterwards;
wall-clock and output limits are enforced by killing the process group and
truncating captured streams. Isolation is process-level (scratch dir,
resource limits, closed stdin), which is adequate for a course-scale
deployment behind an instructor-run host; it is not a jail.

Command templates are profile documents, so any language with a
compile/run command pair can be graded.
"""

from __future__ import annotations

import json
import re
import shlex
import shutil
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

# Extra boundedness for child file writes; stdout is captured via a file, so
# this also hard-caps runaway printing between poll intervals.
_FSIZE_FACTOR = 64
_COMPILE_EXTRA_SECONDS = 10.0

EXECUTION_STATUSES = ("ok", "compile-error", "timeout", "runtime-error", "output-truncated")


class SandboxError(Exception):
    pass


class ToolchainMissingError(SandboxError):
    """The compile or run command's binary is not installed on this host."""


class MissingPlaceholderError(SandboxError):
    """A compose template lacks one of its two required placeholders."""


class PatternError(ValueError):
    """Malformed output pattern (bad regex body)."""


@dataclass(frozen=True)
class ResourceLimits:
    wall_clock: float = 5.0
    max_output: int = 64 * 1024
    max_processes: int = 1

    def __post_init__(self):
        if self.wall_clock <= 0 or self.max_output <= 0 or self.max_processes <= 0:
            raise ValueError("resource limits must be positive")


@dataclass(frozen=True)
class RunnerProfile:
    """How one language is wrapped, compiled and run.

    ``compose_template`` must contain {STUDENT_SOURCE} and {TEST_INVOCATION}
    exactly once each. Command strings may use {WORKDIR}, {SRCFILE} and
    {BINFILE}; an empty ``compile_cmd`` skips the compile step.
    """

    id: str
    language: str
    source_filename: str
    compose_template: str
    invocation_template: str
    run_cmd: str
    compile_cmd: str = ""
    arg_style: str = "python"
    limits: ResourceLimits = field(default_factory=ResourceLimits)

    def __post_init__(self):
        for placeholder in ("{STUDENT_SOURCE}", "{TEST_INVOCATION}"):
            if self.compose_template.count(placeholder) != 1:
                raise MissingPlaceholderError(
                    f"profile {self.id!r}: compose_template must contain "
                    f"{placeholder} exactly once"
                )
        if self.arg_style not in ("python", "c"):
            raise ValueError(f"unknown arg_style {self.arg_style!r}")


@dataclass(frozen=True)
class ExecutionResult:
    status: str
    stdout: str
    stderr: str
    duration: float


@dataclass(frozen=True)
class OutputPattern:
    """Expected-output matcher: a literal, a match-anything wildcard, or a regex."""

    kind: str
    body: str = ""

    def __post_init__(self):
        if self.kind not in ("literal", "wildcard", "regex"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "regex":
            try:
                re.compile(self.body)
            except re.error as exc:
                raise PatternError(f"bad regex pattern: {exc}") from exc

    @classmethod
    def literal(cls, body: str) -> "OutputPattern":
        return cls(kind="literal", body=body)

    @classmethod
    def wildcard(cls) -> "OutputPattern":
        return cls(kind="wildcard", body="*")

    @classmethod
    def regex(cls, body: str) -> "OutputPattern":
        return cls(kind="regex", body=body)


def normalize_output(text: str) -> str:
    """Canonical form for literal comparison.

    Strips trailing whitespace from every line and drops trailing blank
    lines, the usual autograder tolerance. Idempotent.
    """
    lines = [line.rstrip() for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


def match_output(actual: str, pattern: OutputPattern) -> bool:
    """True when the captured output satisfies the expected pattern.

    Wildcards match anything; literals compare after normalization; regexes
    must match the whole normalized output.
    """
    if pattern.kind == "wildcard":
        return True
    if pattern.kind == "literal":
        return normalize_output(actual) == normalize_output(pattern.body)
    try:
        compiled = re.compile(pattern.body)
    except re.error as exc:
        raise PatternError(f"bad regex pattern: {exc}") from exc
    return compiled.fullmatch(normalize_output(actual)) is not None


_PLACEHOLDER_SPLIT = re.compile(r"(\{STUDENT_SOURCE\}|\{TEST_INVOCATION\})")


def compose_program(profile: RunnerProfile, student_source: str, invocation: str) -> str:
    """Substitute the student's code and one test invocation into the template.

    Substitution is simultaneous and verbatim: placeholder-like text inside
    the student source is never re-expanded.
    """
    template = profile.compose_template
    for placeholder in ("{STUDENT_SOURCE}", "{TEST_INVOCATION}"):
        if template.count(placeholder) != 1:
            raise MissingPlaceholderError(
                f"compose_template must contain {placeholder} exactly once"
            )
    values = {"{STUDENT_SOURCE}": student_source, "{TEST_INVOCATION}": invocation}
    parts = _PLACEHOLDER_SPLIT.split(template)
    return "".join(values.get(part, part) for part in parts)


def render_literal(value, style: str = "python") -> str:
    """Render one argument value as a source-code literal."""
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        if style == "c":
            if not value:
                return "(int*)0"
            return "(int[]){" + ", ".join(str(v) for v in value) + "}"
        return "[" + ", ".join(str(v) for v in value) + "]"
    return str(value)


def render_invocation(profile: RunnerProfile, entry_point: str, args) -> str:
    """Render the per-test invocation line for this profile's language."""
    rendered = ", ".join(render_literal(a, profile.arg_style) for a in args)
    return (
        profile.invocation_template
        .replace("{ENTRY}", entry_point)
        .replace("{ARGS}", rendered)
    )


def render_call(entry_point: str, args) -> str:
    """Human-facing call syntax used in statements, reports and failure views."""
    return f"{entry_point}(" + ", ".join(render_literal(a) for a in args) + ")"


def _set_child_limits(limits: ResourceLimits):
    import resource

    def apply():
        cpu = max(1, int(limits.wall_clock) + 1)
        fsize = max(limits.max_output * _FSIZE_FACTOR, 1 << 20)
        for which, value in (
            (resource.RLIMIT_CPU, cpu),
            (resource.RLIMIT_FSIZE, fsize),
        ):
            try:
                resource.setrlimit(which, (value, value))
            except (ValueError, OSError):
                pass

    return apply


def _read_head(path: Path, limit: int) -> tuple[str, bool]:
    try:
        with open(path, "rb") as handle:
            data = handle.read(limit + 1)
    except FileNotFoundError:
        return "", False
    truncated = len(data) > limit
    return data[:limit].decode("utf-8", errors="replace"), truncated


class SandboxExecutor:
    """Runs composed programs; a semaphore bounds concurrent children."""

    def __init__(self, max_concurrent: int = 4):
        self._semaphore = threading.BoundedSemaphore(max_concurrent)

    def execute(self, profile: RunnerProfile, program: str) -> ExecutionResult:
        """Compile (if configured) and run one program under the profile limits.

        Returns within ``wall_clock`` plus a small slack; never raises for
        anything the program itself does. Raises
        :class:`ToolchainMissingError` when the configured commands are not
        installed, which callers must treat as an infrastructure fault, not
        a graded failure.
        """
        with self._semaphore:
            scratch = Path(tempfile.mkdtemp(prefix="probeable-run-"))
            try:
                return self._execute_in(scratch, profile, program)
            finally:
                shutil.rmtree(scratch, ignore_errors=True)

    def _execute_in(self, scratch: Path, profile: RunnerProfile, program: str) -> ExecutionResult:
        limits = profile.limits
        src = scratch / profile.source_filename
        src.write_text(program)
        substitutions = {
            "{WORKDIR}": str(scratch),
            "{SRCFILE}": str(src),
            "{BINFILE}": str(scratch / "program.bin"),
        }

        def argv_for(template: str) -> list[str]:
            argv = []
            for token in shlex.split(template):
                for key, value in substitutions.items():
                    token = token.replace(key, value)
                argv.append(token)
            return argv

        started = time.monotonic()
        if profile.compile_cmd:
            rc, timed_out, (out_text, _), err = self._run(
                argv_for(profile.compile_cmd), scratch, limits,
                timeout=limits.wall_clock + _COMPILE_EXTRA_SECONDS,
            )
            if timed_out or rc != 0:
                stderr = err if err.strip() else out_text
                if timed_out:
                    stderr = (stderr + "\ncompiler timed out").strip()
                return ExecutionResult(
                    status="compile-error", stdout="", stderr=stderr,
                    duration=time.monotonic() - started,
                )

        rc, timed_out, out, err = self._run(
            argv_for(profile.run_cmd), scratch, limits, timeout=limits.wall_clock
        )
        out_text, truncated = out
        duration = time.monotonic() - started
        if timed_out:
            status = "timeout"
        elif truncated:
            status = "output-truncated"
        elif rc != 0:
            status = "runtime-error"
        else:
            status = "ok"
        return ExecutionResult(status=status, stdout=out_text, stderr=err, duration=duration)

    def _run(self, argv: list[str], cwd: Path, limits: ResourceLimits, timeout: float):
        """Run one command; returns (rc, timed_out, (stdout, truncated), stderr)."""
        stdout_path = cwd / ".stdout"
        stderr_path = cwd / ".stderr"
        try:
            with open(stdout_path, "wb") as out_handle, open(stderr_path, "wb") as err_handle:
                proc = subprocess.Popen(
                    argv,
                    cwd=cwd,
                    stdin=subprocess.DEVNULL,
                    stdout=out_handle,
                    stderr=err_handle,
                    start_new_session=True,
                    preexec_fn=_set_child_limits(limits),
                )
                timed_out = False
                try:
                    rc = proc.wait(timeout=timeout)
                except subprocess.TimeoutExpired:
                    timed_out = True
                    _kill_process_group(proc)
                    rc = proc.wait()
        except FileNotFoundError as exc:
            raise ToolchainMissingError(f"command not found: {argv[0]}") from exc
        stdout = _read_head(stdout_path, limits.max_output)
        stderr, _ = _read_head(stderr_path, limits.max_output)
        return rc, timed_out, stdout, stderr


def _kill_process_group(proc: subprocess.Popen) -> None:
    import os
    import signal

    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def profile_from_document(doc: dict, where: str = "<profile>") -> RunnerProfile:
    try:
        limits_doc = doc.get("limits", {})
        limits = ResourceLimits(
            wall_clock=float(limits_doc.get("wall_clock", 5.0)),
            max_output=int(limits_doc.get("max_output", 64 * 1024)),
            max_processes=int(limits_doc.get("max_processes", 1)),
        )
        return RunnerProfile(
            id=doc["id"],
            language=doc.get("language", doc["id"]),
            source_filename=doc["source_filename"],
            compose_template=doc["compose_template"],
            invocation_template=doc["invocation_template"],
            compile_cmd=doc.get("compile_cmd", ""),
            run_cmd=doc["run_cmd"],
            arg_style=doc.get("arg_style", "python"),
            limits=limits,
        )
    except KeyError as exc:
        raise ValueError(f"{where}: missing profile field {exc}") from exc


def profile_to_document(profile: RunnerProfile) -> dict:
    return {
        "schema_version": 1,
        "id": profile.id,
        "language": profile.language,
        "source_filename": profile.source_filename,
        "arg_style": profile.arg_style,
        "compose_template": profile.compose_template,
        "invocation_template": profile.invocation_template,
        "compile_cmd": profile.compile_cmd,
        "run_cmd": profile.run_cmd,
        "limits": {
            "wall_clock": profile.limits.wall_clock,
            "max_output": profile.limits.max_output,
            "max_processes": profile.limits.max_processes,
        },
    }

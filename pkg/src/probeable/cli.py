"""Operator command line: validate banks, serve, simulate cohorts, analyze logs.

Exit codes: 0 full success, 1 failure (validation mismatch, log schema
violation), 2 unusable input (missing or unreadable paths, bad flags).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analytics import CohortFilter, build_report, export_report
from .attempt_log import EventStore, LogError, load_roster
from .oracle import UnknownOracleError
from .problems import BankError, ProblemBank, bundled_bank_path, validate_problem
from .sandbox import SandboxExecutor
from .service import SessionStore, create_app, mint_token
from .simulate import config_from_document, default_config, run_simulation

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _load_bank(path: str) -> ProblemBank:
    return ProblemBank.load(path)


def cmd_validate(args) -> int:
    try:
        bank = _load_bank(args.bank)
    except BankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    failures = 0
    for spec in bank:
        try:
            report = validate_problem(spec)
        except UnknownOracleError as exc:
            print(f"{spec.id}: unresolvable oracle_ref {exc}")
            failures += 1
            continue
        if report.ok:
            print(f"{spec.id}: OK ({len(spec.test_suite)} tests agree with the oracle)")
        else:
            failures += 1
            print(f"{spec.id}: {len(report.mismatches)} mismatch(es)")
            for m in report.mismatches:
                print(f"  test {m.test_index}: {m.input_call}")
                print(f"    expected: {m.expected}")
                print(f"    actual:   {m.actual}")
    return EXIT_OK if failures == 0 else EXIT_FAILURE


def cmd_simulate(args) -> int:
    try:
        bank = _load_bank(args.bank)
    except BankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.config:
        try:
            config = config_from_document(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            print(f"error: bad simulation config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if args.seed is not None:
            config = type(config)(categories=config.categories, seed=args.seed)
    else:
        config = default_config(seed=args.seed if args.seed is not None else 0)
    log_path = Path(args.log)
    if log_path.exists():
        print(f"error: refusing to overwrite existing log {log_path}", file=sys.stderr)
        return EXIT_USAGE
    summary = run_simulation(config, bank, log_path, args.roster)
    print(
        f"simulated {summary['students']} students, {summary['attempts']} attempts, "
        f"{summary['events']} events -> {args.log}, roster -> {args.roster}"
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    if not Path(args.log).exists():
        print(f"error: attempt log not found: {args.log}", file=sys.stderr)
        return EXIT_USAGE
    try:
        store = EventStore(args.log)
        roster = load_roster(args.roster) if args.roster else {}
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        flt = CohortFilter(
            exclude_default_probes=not args.include_defaults,
            ratio_outlier_threshold=args.ratio_threshold,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = build_report(store, roster, flt)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    documents = export_report(report, args.format)
    for name, content in documents.items():
        (out_dir / name).write_text(content)
    for g in report.problem_totals:
        print(
            f"{g.problem_id}: {g.raw_attempts} attempts, "
            f"{g.included} included ({g.excluded_bare_s} bare-S, "
            f"{g.excluded_no_code} no-code excluded), "
            f"success rate {g.success_rate:.4f}"
        )
    print(f"wrote {', '.join(sorted(documents))} to {out_dir}")
    return EXIT_OK


def cmd_token(args) -> int:
    role = "instructor" if args.instructor else "student"
    if role == "student":
        if not args.roster:
            print("error: --roster is required for student tokens", file=sys.stderr)
            return EXIT_USAGE
        try:
            roster = load_roster(args.roster)
        except (OSError, LogError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if args.student_id not in roster:
            print(f"error: {args.student_id!r} is not on the roster", file=sys.stderr)
            return EXIT_USAGE
    token = mint_token(args.tokens, args.student_id, role=role, ttl_hours=args.ttl_hours)
    print(token.token)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    try:
        bank = _load_bank(args.bank)
    except BankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    store = EventStore(args.log)
    sessions = SessionStore.load(args.tokens)
    roster = load_roster(args.roster) if args.roster else {}
    executor = SandboxExecutor(max_concurrent=args.sandbox_concurrency)
    app = create_app(bank, store, sessions, executor, roster=roster)
    host, _, port = args.bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probeable",
        description="Probeable problems platform: probe oracle, penalised "
                    "autograding, attempt logs and cohort analytics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check every problem's tests against its oracle")
    p_validate.add_argument("--bank", default=str(bundled_bank_path()),
                            help="problem bank directory (default: bundled bank)")
    p_validate.set_defaults(func=cmd_validate)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--bank", default=str(bundled_bank_path()))
    p_serve.add_argument("--log", required=True, help="attempt log path (created if missing)")
    p_serve.add_argument("--roster", default=None, help="grade roster CSV for analytics")
    p_serve.add_argument("--tokens", required=True, help="session token CSV")
    p_serve.add_argument("--bind", default="127.0.0.1:8601", help="host:port to listen on")
    p_serve.add_argument("--sandbox-concurrency", type=int, default=4)
    p_serve.set_defaults(func=cmd_serve)

    p_sim = sub.add_parser("simulate", help="generate a synthetic cohort log and roster")
    p_sim.add_argument("--bank", default=str(bundled_bank_path()))
    p_sim.add_argument("--log", required=True, help="output attempt log path")
    p_sim.add_argument("--roster", required=True, help="output roster CSV path")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--config", default=None, help="JSON simulation config")
    p_sim.set_defaults(func=cmd_simulate)

    p_analyze = sub.add_parser("analyze", help="build cohort reports from an attempt log")
    p_analyze.add_argument("--log", required=True)
    p_analyze.add_argument("--roster", default=None)
    p_analyze.add_argument("--out", required=True, help="output directory for report files")
    p_analyze.add_argument("--ratio-threshold", type=float, default=35.0)
    p_analyze.add_argument("--include-defaults", action="store_true",
                           help="keep default probes in derived sequences")
    p_analyze.add_argument("--format", choices=("csv", "structured-text"), default="csv")
    p_analyze.set_defaults(func=cmd_analyze)

    p_token = sub.add_parser("token", help="mint a session token")
    p_token.add_argument("--tokens", required=True, help="token CSV to append to")
    p_token.add_argument("--roster", default=None)
    p_token.add_argument("--student-id", required=True)
    p_token.add_argument("--instructor", action="store_true")
    p_token.add_argument("--ttl-hours", type=float, default=720.0)
    p_token.set_defaults(func=cmd_token)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Synthetic cohort generator for exercising the analytics pipeline.

The generative model is deliberately minimal: per category, each student
draws a number of pre-code probes from a clamped geometric distribution,
then submits code repeatedly, failing with a category-specific probability,
until success or a cap. A small share of attempts are planted bare-S and
probe-only attempts so the cleaning filters always have work to do. Runs
are byte-identical per seed (fixed timestamps, ordered iteration).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .attempt_log import EventStore, StudentRecord, save_roster
from .problems import ProblemBank

MAX_SUBMISSIONS_PER_ATTEMPT = 30
MAX_PRECODE_PROBES = 60

_CLOCK_START = datetime(2025, 1, 1, tzinfo=timezone.utc)

_GRADE_CYCLE = {
    "A": ("A+", "A", "A-"),
    "B": ("B+", "B", "B-"),
    "C": ("C+", "C", "C-"),
    "D": ("D+", "D", "D-"),
}


@dataclass(frozen=True)
class CategoryBehavior:
    """Probing propensity and submission quality for one grade category."""

    students: int
    mean_probes_before_code: float
    failure_prob: float
    default_probe_prob: float = 0.7
    followup_probe_prob: float = 0.3
    bare_s_prob: float = 0.01
    no_code_prob: float = 0.03

    def __post_init__(self):
        if self.students < 0:
            raise ValueError("student count must be non-negative")
        if self.mean_probes_before_code < 0:
            raise ValueError("mean probes must be non-negative")
        for name in ("failure_prob", "default_probe_prob", "followup_probe_prob",
                     "bare_s_prob", "no_code_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1]")


@dataclass(frozen=True)
class SimulationConfig:
    categories: dict[str, CategoryBehavior] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        for category in self.categories:
            if category not in _GRADE_CYCLE:
                raise ValueError(f"unknown category {category!r}")


def default_config(seed: int = 0) -> SimulationConfig:
    """Cohort whose probing propensity falls from A to D, echoing the
    pattern the analytics are meant to surface."""
    return SimulationConfig(
        categories={
            "A": CategoryBehavior(students=12, mean_probes_before_code=6.0, failure_prob=0.35),
            "B": CategoryBehavior(students=12, mean_probes_before_code=4.0, failure_prob=0.45),
            "C": CategoryBehavior(students=12, mean_probes_before_code=2.0, failure_prob=0.55),
            "D": CategoryBehavior(students=12, mean_probes_before_code=1.0, failure_prob=0.65),
        },
        seed=seed,
    )


def config_from_document(doc: dict) -> SimulationConfig:
    categories = {}
    for name, fields in doc.get("categories", {}).items():
        categories[name] = CategoryBehavior(**fields)
    return SimulationConfig(categories=categories, seed=doc.get("seed", 0))


def _geometric(rng: random.Random, mean: float, cap: int) -> int:
    """Failures-before-success draw with the given mean, clamped to [0, cap]."""
    if mean <= 0:
        return 0
    p = 1.0 / (1.0 + mean)
    count = 0
    while count < cap and rng.random() >= p:
        count += 1
    return count


def run_simulation(config: SimulationConfig, bank: ProblemBank,
                   log_path: Path | str, roster_path: Path | str) -> dict:
    """Generate one cohort's event log and roster; returns summary counts."""
    rng = random.Random(config.seed)
    store = EventStore(log_path)
    roster: dict[str, StudentRecord] = {}
    clock = _CLOCK_START
    events = 0

    def tick() -> datetime:
        nonlocal clock
        now = clock
        clock += timedelta(seconds=1)
        return now

    problems = [bank.get(pid) for pid in bank.problem_ids]
    for category in sorted(config.categories):
        behavior = config.categories[category]
        grades = _GRADE_CYCLE[category]
        for index in range(behavior.students):
            student_id = f"{category.lower()}{index + 1:03d}"
            roster[student_id] = StudentRecord(student_id, grades[index % len(grades)])
            for spec in problems:
                events += _simulate_attempt(rng, store, behavior, student_id, spec, tick)

    save_roster(roster, roster_path)
    return {"students": len(roster), "attempts": len(roster) * len(problems), "events": events}


def _simulate_attempt(rng, store, behavior, student_id, spec, tick) -> int:
    def probe(args, is_default=False):
        ref = store.store_payload({"kind": "probe", "args": [
            list(a) if isinstance(a, tuple) else a for a in args
        ]})
        store.append_event(student_id, spec.id, "P", ref, is_default=is_default, at=tick())

    def submission(kind):
        ref = store.store_payload({
            "kind": "submission", "source": "# simulated",
            "verdict": "pass" if kind == "S" else "fail",
        })
        store.append_event(student_id, spec.id, kind, ref, at=tick())

    events = 0
    roll = rng.random()
    if roll < behavior.bare_s_prob:
        submission("S")
        return 1
    if roll < behavior.bare_s_prob + behavior.no_code_prob:
        count = 1 + _geometric(rng, behavior.mean_probes_before_code, MAX_PRECODE_PROBES)
        for _ in range(count):
            probe(spec.signature.random_args(rng))
        return count

    if rng.random() < behavior.default_probe_prob:
        probe(spec.default_probe, is_default=True)
        events += 1
    pre_code = _geometric(rng, behavior.mean_probes_before_code, MAX_PRECODE_PROBES)
    for _ in range(pre_code):
        probe(spec.signature.random_args(rng))
    events += pre_code

    for _ in range(MAX_SUBMISSIONS_PER_ATTEMPT):
        if rng.random() < behavior.failure_prob:
            submission("F")
            events += 1
            if rng.random() < behavior.followup_probe_prob:
                probe(spec.signature.random_args(rng))
                events += 1
        else:
            submission("S")
            events += 1
            break
    return events

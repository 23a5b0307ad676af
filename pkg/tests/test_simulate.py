"""Simulator: determinism, config validation, and analytics compatibility."""

from __future__ import annotations

import pytest

from probeable.analytics import CohortFilter, build_report
from probeable.attempt_log import EventStore, load_roster
from probeable.simulate import (
    CategoryBehavior,
    SimulationConfig,
    config_from_document,
    default_config,
    run_simulation,
)


class TestConfig:

    def test_counts_must_be_non_negative(self):
        with pytest.raises(ValueError):
            CategoryBehavior(students=-1, mean_probes_before_code=2, failure_prob=0.5)

    def test_probabilities_bounded(self):
        with pytest.raises(ValueError):
            CategoryBehavior(students=1, mean_probes_before_code=2, failure_prob=1.5)

    def test_unknown_category_rejected(self):
        with pytest.raises(ValueError):
            SimulationConfig(categories={
                "E": CategoryBehavior(students=1, mean_probes_before_code=1, failure_prob=0.5)
            })

    def test_document_round_trip(self):
        doc = {
            "seed": 9,
            "categories": {
                "A": {"students": 3, "mean_probes_before_code": 5.0, "failure_prob": 0.3},
            },
        }
        config = config_from_document(doc)
        assert config.seed == 9
        assert config.categories["A"].students == 3


class TestRun:

    def test_same_seed_gives_byte_identical_logs(self, bank, tmp_path):
        config = default_config(seed=1)
        run_simulation(config, bank, tmp_path / "one.jsonl", tmp_path / "one.csv")
        run_simulation(config, bank, tmp_path / "two.jsonl", tmp_path / "two.csv")
        assert (tmp_path / "one.jsonl").read_bytes() == (tmp_path / "two.jsonl").read_bytes()
        assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()

    def test_different_seeds_differ(self, bank, tmp_path):
        run_simulation(default_config(seed=1), bank, tmp_path / "one.jsonl", tmp_path / "one.csv")
        run_simulation(default_config(seed=2), bank, tmp_path / "two.jsonl", tmp_path / "two.csv")
        assert (tmp_path / "one.jsonl").read_bytes() != (tmp_path / "two.jsonl").read_bytes()

    def test_zero_students_is_empty_log_with_roster_header(self, bank, tmp_path):
        config = SimulationConfig(categories={
            "A": CategoryBehavior(students=0, mean_probes_before_code=1, failure_prob=0.5)
        }, seed=0)
        summary = run_simulation(config, bank, tmp_path / "log.jsonl", tmp_path / "roster.csv")
        assert summary["students"] == 0
        assert (tmp_path / "log.jsonl").read_text() == ""
        assert (tmp_path / "roster.csv").read_bytes() == b"student_id,letter_grade\n"

    def test_simulated_log_replays_and_analyzes(self, bank, tmp_path):
        run_simulation(default_config(seed=4), bank, tmp_path / "log.jsonl", tmp_path / "roster.csv")
        store = EventStore(tmp_path / "log.jsonl")
        roster = load_roster(tmp_path / "roster.csv")
        report = build_report(store, roster, CohortFilter())
        assert {g.problem_id for g in report.problem_totals} == {"P7", "P8", "P9"}
        for g in report.problem_totals:
            assert g.raw_attempts == g.included + g.excluded_bare_s + g.excluded_no_code

    def test_probing_propensity_orders_cdf_at_zero(self, bank, tmp_path):
        # heavy probers (A) should be less likely to code without probing
        config = SimulationConfig(categories={
            "A": CategoryBehavior(students=30, mean_probes_before_code=10.0,
                                  failure_prob=0.4, default_probe_prob=0.0,
                                  bare_s_prob=0.0, no_code_prob=0.0),
            "D": CategoryBehavior(students=30, mean_probes_before_code=1.0,
                                  failure_prob=0.4, default_probe_prob=0.0,
                                  bare_s_prob=0.0, no_code_prob=0.0),
        }, seed=11)
        run_simulation(config, bank, tmp_path / "log.jsonl", tmp_path / "roster.csv")
        report = build_report(
            EventStore(tmp_path / "log.jsonl"),
            load_roster(tmp_path / "roster.csv"),
            CohortFilter(),
        )
        for problem in ("P7", "P8", "P9"):
            a_group = next(g for g in report.groups
                           if g.problem_id == problem and g.category == "A")
            d_group = next(g for g in report.groups
                           if g.problem_id == problem and g.category == "D")
            a_at_zero = dict(a_group.cdf_rows()).get(0, 0.0)
            d_at_zero = dict(d_group.cdf_rows()).get(0, 0.0)
            assert a_at_zero < d_at_zero

    def test_roster_covers_all_students(self, bank, tmp_path):
        run_simulation(default_config(seed=3), bank, tmp_path / "log.jsonl", tmp_path / "roster.csv")
        store = EventStore(tmp_path / "log.jsonl")
        roster = load_roster(tmp_path / "roster.csv")
        students_in_log = {student for student, _ in store.keys()}
        assert students_in_log <= set(roster)

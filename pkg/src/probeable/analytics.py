"""Cohort analytics over attempt sequences.

Reproduces the quantitative pipeline end to end: default probes are dropped
during sequence derivation, implausible bare-S attempts and attempts with
no code submission are excluded, and per grade category we compute the
probes-before-first-code distribution, the probe-per-code-submission ratio
summary (with outlier ratios removed from the summary statistics only),
and success rates.

Exports are stable CSV documents meant for external plotting:

    cdf.csv    problem,category,probe_count,cumulative_pct
    ratios.csv problem,category,min,q1,median,q3,max,outlier_frac,success_rate

Column order and number formatting are a compatibility contract; golden
files in the test suite pin them byte-for-byte.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from collections import Counter

from .attempt_log import AttemptSequence, EventStore, StudentRecord

CATEGORIES = ("A", "B", "C", "D")
UNKNOWN_CATEGORY = "U"
TOTAL_CATEGORY = "ALL"

DEFAULT_RATIO_OUTLIER_THRESHOLD = 35.0

_PCT_FMT = "{:.2f}"
_RATIO_FMT = "{:.4f}"


class InvalidSequenceError(ValueError):
    """Metric requested for a sequence filtered out of the cohort."""


def category_of(letter_grade: str) -> str:
    """Coarse grade category: the letter without its +/- qualifier."""
    if letter_grade and letter_grade[0] in CATEGORIES:
        return letter_grade[0]
    return UNKNOWN_CATEGORY


@dataclass(frozen=True)
class CohortFilter:
    """Data-cleaning switches, all defaulting to the published pipeline."""

    exclude_default_probes: bool = True
    exclude_bare_s: bool = True
    exclude_no_code: bool = True
    ratio_outlier_threshold: float = DEFAULT_RATIO_OUTLIER_THRESHOLD

    def __post_init__(self):
        if self.ratio_outlier_threshold <= 0:
            raise ValueError("ratio outlier threshold must be positive")


def probes_before_first_code(seq: AttemptSequence) -> int:
    """Number of probes submitted before the first code submission (F or S)."""
    if seq.classification != "valid":
        raise InvalidSequenceError(
            f"sequence is {seq.classification}, not part of the analysed cohort"
        )
    count = 0
    for symbol in seq.symbols:
        if symbol == "P":
            count += 1
        else:
            return count
    return count


def probe_code_ratio(seq: AttemptSequence) -> float:
    """Probes issued per code submission within one attempt."""
    if seq.classification != "valid":
        raise InvalidSequenceError(
            f"sequence is {seq.classification}, not part of the analysed cohort"
        )
    code = sum(1 for s in seq.symbols if s in "FS")
    probes = seq.symbols.count("P")
    return probes / code


def _pbc_or_none(symbols: str) -> int | None:
    count = 0
    for symbol in symbols:
        if symbol == "P":
            count += 1
        else:
            return count
    return None  # no code submission: undefined


def _ratio_or_none(symbols: str) -> float | None:
    code = sum(1 for s in symbols if s in "FS")
    if code == 0:
        return None
    return symbols.count("P") / code


@dataclass(frozen=True)
class FiveNumber:
    min: float
    q1: float
    median: float
    q3: float
    max: float


def _median(sorted_values: list[float]) -> float:
    n = len(sorted_values)
    mid = n // 2
    if n % 2:
        return sorted_values[mid]
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2


def five_number_summary(values) -> FiveNumber | None:
    """Min, quartiles and max using the median-of-halves convention.

    The lower/upper halves exclude the middle element when the count is
    odd; a single value is its own quartile. Pinned here so exported
    summaries (and the golden files) are stable.
    """
    data = sorted(values)
    if not data:
        return None
    med = _median(data)
    half = len(data) // 2
    lower = data[:half]
    upper = data[half + (len(data) % 2):]
    q1 = _median(lower) if lower else med
    q3 = _median(upper) if upper else med
    return FiveNumber(min=data[0], q1=q1, median=med, q3=q3, max=data[-1])


@dataclass(frozen=True)
class GroupStats:
    """Filtered statistics for one (problem, grade category) cell."""

    problem_id: str
    category: str
    raw_attempts: int
    excluded_bare_s: int
    excluded_no_code: int
    included: int
    successes: int
    pbc_histogram: dict[int, int]
    ratios: tuple[float, ...]
    ratio_summary: FiveNumber | None
    ratio_outliers: int

    @property
    def success_rate(self) -> float:
        return self.successes / self.included if self.included else 0.0

    @property
    def outlier_frac(self) -> float:
        return self.ratio_outliers / len(self.ratios) if self.ratios else 0.0

    def cdf_rows(self) -> list[tuple[int, float]]:
        """Cumulative percentage per probe count, 0 through the observed max."""
        total = sum(self.pbc_histogram.values())
        if total == 0:
            return []
        rows = []
        cumulative = 0
        for k in range(max(self.pbc_histogram) + 1):
            cumulative += self.pbc_histogram.get(k, 0)
            rows.append((k, 100.0 * cumulative / total))
        return rows


@dataclass(frozen=True)
class CohortReport:
    """Per-(problem, category) statistics plus per-problem totals.

    ``groups`` holds categories A through D only; attempts by students of
    unknown grade are counted in ``problem_totals`` (category ALL) but
    never partitioned.
    """

    filter: CohortFilter
    groups: tuple[GroupStats, ...]
    problem_totals: tuple[GroupStats, ...]


def _build_group(problem_id: str, category: str, sequences: list[AttemptSequence],
                 flt: CohortFilter) -> GroupStats:
    raw = len(sequences)
    bare_s = sum(1 for s in sequences if s.classification == "bare_s")
    no_code = sum(1 for s in sequences if s.classification == "no_code")
    included_seqs = [
        s for s in sequences
        if not (flt.exclude_bare_s and s.classification == "bare_s")
        and not (flt.exclude_no_code and s.classification == "no_code")
    ]
    histogram: Counter[int] = Counter()
    ratios: list[float] = []
    successes = 0
    for seq in included_seqs:
        if "S" in seq.symbols:
            successes += 1
        pbc = _pbc_or_none(seq.symbols)
        if pbc is not None:
            histogram[pbc] += 1
        ratio = _ratio_or_none(seq.symbols)
        if ratio is not None:
            ratios.append(ratio)
    non_outliers = [r for r in ratios if r <= flt.ratio_outlier_threshold]
    return GroupStats(
        problem_id=problem_id,
        category=category,
        raw_attempts=raw,
        excluded_bare_s=bare_s if flt.exclude_bare_s else 0,
        excluded_no_code=no_code if flt.exclude_no_code else 0,
        included=len(included_seqs),
        successes=successes,
        pbc_histogram=dict(sorted(histogram.items())),
        ratios=tuple(ratios),
        ratio_summary=five_number_summary(non_outliers),
        ratio_outliers=len(ratios) - len(non_outliers),
    )


def build_report(store: EventStore, roster: dict[str, StudentRecord],
                 flt: CohortFilter | None = None) -> CohortReport:
    """Run the full filtering pipeline over a log snapshot.

    Default probes are dropped while deriving each sequence (unless the
    filter keeps them), bare-S and no-code attempts are excluded from the
    cohort, and ratio outliers are removed from the ratio summary only:
    they still count toward every other statistic. An empty log produces a
    report with no groups, not an error.
    """
    flt = flt or CohortFilter()
    include_defaults = not flt.exclude_default_probes
    by_cell: dict[tuple[str, str], list[AttemptSequence]] = {}
    by_problem: dict[str, list[AttemptSequence]] = {}
    for student_id, problem_id in sorted(store.keys()):
        seq = store.derive_sequence(student_id, problem_id, include_defaults)
        record = roster.get(student_id)
        category = record.category if record else UNKNOWN_CATEGORY
        by_problem.setdefault(problem_id, []).append(seq)
        if category in CATEGORIES:
            by_cell.setdefault((problem_id, category), []).append(seq)
    groups = tuple(
        _build_group(problem_id, category, seqs, flt)
        for (problem_id, category), seqs in sorted(by_cell.items())
    )
    totals = tuple(
        _build_group(problem_id, TOTAL_CATEGORY, seqs, flt)
        for problem_id, seqs in sorted(by_problem.items())
    )
    return CohortReport(filter=flt, groups=groups, problem_totals=totals)


# --- export ------------------------------------------------------------------


def _cdf_csv(report: CohortReport) -> str:
    out = io.StringIO()
    out.write("problem,category,probe_count,cumulative_pct\n")
    for group in report.groups:
        for probe_count, pct in group.cdf_rows():
            out.write(
                f"{group.problem_id},{group.category},{probe_count},"
                f"{_PCT_FMT.format(pct)}\n"
            )
    return out.getvalue()


def _ratios_csv(report: CohortReport) -> str:
    out = io.StringIO()
    out.write("problem,category,min,q1,median,q3,max,outlier_frac,success_rate\n")
    for group in report.groups:
        summary = group.ratio_summary
        if summary is None:
            fields = ["", "", "", "", ""]
        else:
            fields = [
                _RATIO_FMT.format(v)
                for v in (summary.min, summary.q1, summary.median, summary.q3, summary.max)
            ]
        out.write(
            f"{group.problem_id},{group.category},{','.join(fields)},"
            f"{_RATIO_FMT.format(group.outlier_frac)},"
            f"{_RATIO_FMT.format(group.success_rate)}\n"
        )
    return out.getvalue()


def _group_to_document(group: GroupStats) -> dict:
    summary = group.ratio_summary
    return {
        "problem": group.problem_id,
        "category": group.category,
        "raw_attempts": group.raw_attempts,
        "excluded_bare_s": group.excluded_bare_s,
        "excluded_no_code": group.excluded_no_code,
        "included": group.included,
        "successes": group.successes,
        "success_rate": group.success_rate,
        "pbc_histogram": {str(k): v for k, v in group.pbc_histogram.items()},
        "cdf": [{"probe_count": k, "cumulative_pct": pct} for k, pct in group.cdf_rows()],
        "ratios": list(group.ratios),
        "ratio_summary": None if summary is None else {
            "min": summary.min, "q1": summary.q1, "median": summary.median,
            "q3": summary.q3, "max": summary.max,
        },
        "ratio_outliers": group.ratio_outliers,
        "outlier_frac": group.outlier_frac,
    }


def _group_from_document(doc: dict) -> GroupStats:
    summary_doc = doc.get("ratio_summary")
    return GroupStats(
        problem_id=doc["problem"],
        category=doc["category"],
        raw_attempts=doc["raw_attempts"],
        excluded_bare_s=doc["excluded_bare_s"],
        excluded_no_code=doc["excluded_no_code"],
        included=doc["included"],
        successes=doc["successes"],
        pbc_histogram={int(k): v for k, v in doc["pbc_histogram"].items()},
        ratios=tuple(doc["ratios"]),
        ratio_summary=None if summary_doc is None else FiveNumber(**summary_doc),
        ratio_outliers=doc["ratio_outliers"],
    )


def report_to_document(report: CohortReport) -> dict:
    return {
        "filter": {
            "exclude_default_probes": report.filter.exclude_default_probes,
            "exclude_bare_s": report.filter.exclude_bare_s,
            "exclude_no_code": report.filter.exclude_no_code,
            "ratio_outlier_threshold": report.filter.ratio_outlier_threshold,
        },
        "groups": [_group_to_document(g) for g in report.groups],
        "problem_totals": [_group_to_document(g) for g in report.problem_totals],
    }


def report_from_document(doc: dict) -> CohortReport:
    flt_doc = doc["filter"]
    return CohortReport(
        filter=CohortFilter(
            exclude_default_probes=flt_doc["exclude_default_probes"],
            exclude_bare_s=flt_doc["exclude_bare_s"],
            exclude_no_code=flt_doc["exclude_no_code"],
            ratio_outlier_threshold=flt_doc["ratio_outlier_threshold"],
        ),
        groups=tuple(_group_from_document(g) for g in doc["groups"]),
        problem_totals=tuple(_group_from_document(g) for g in doc["problem_totals"]),
    )


def export_report(report: CohortReport, format: str) -> dict[str, str]:
    """Render the report as named documents ready to write to disk.

    ``csv`` yields the two plotting files; ``structured-text`` yields a
    single JSON document that round-trips via :func:`report_from_document`.
    """
    if format == "csv":
        return {"cdf.csv": _cdf_csv(report), "ratios.csv": _ratios_csv(report)}
    if format == "structured-text":
        return {"report.json": json.dumps(report_to_document(report), indent=2) + "\n"}
    raise ValueError(f"unsupported export format {format!r}")

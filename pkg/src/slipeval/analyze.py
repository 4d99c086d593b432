"""Outcome-by-condition statistics: contingency tables, chi-square tests
of independence, percentage breakdowns, and audit step samples.

The chi-square statistic is the plain textbook sum of (observed -
expected)^2 / expected with no continuity correction, so values are
directly comparable to hand computations. Its p-value comes from an
internal survival function built on the regularized incomplete gamma
function (series expansion for small statistics, continued fraction
otherwise), accurate to well under 1e-8 over the df range used here.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .classify import ClassifiedError, Diagnostic, Outcome
from .corpus import ErrorRecord
from .errors import DegenerateTable, UnknownCondition, UnknownRecord

OUTCOME_LABELS = tuple(o.value for o in Outcome)

# Condition selectors: record -> row label (None = record lacks the
# attribute and is excluded), plus the canonical row order.
_CONDITIONS: dict[str, tuple[Callable[[ErrorRecord], str | None], tuple[str, ...]]] = {
    "error_class": (lambda r: r.error_class.value, ("sound", "word")),
    "sound_kind": (
        lambda r: r.sound_kind.value if r.sound_kind else None,
        ("substitution", "deletion", "addition"),
    ),
    "contextual": (lambda r: "true" if r.contextual else "false", ("true", "false")),
    "corrected": (lambda r: "true" if r.corrected else "false", ("true", "false")),
    "complete": (lambda r: "true" if r.complete else "false", ("true", "false")),
    "word_position": (
        lambda r: r.word_position.value if r.word_position else None,
        ("initial", "medial", "final"),
    ),
    "syllable_position": (
        lambda r: r.syllable_position.value if r.syllable_position else None,
        ("onset", "nucleus", "coda"),
    ),
}

CONDITION_NAMES = tuple(_CONDITIONS)


def _condition(name: str):
    try:
        return _CONDITIONS[name]
    except KeyError:
        raise UnknownCondition(
            f"unknown condition {name!r}; expected one of {CONDITION_NAMES}"
        ) from None


@dataclass(frozen=True)
class ContingencyTable:
    """Outcome counts per condition value. ``excluded`` counts records
    that lack the condition attribute and were left out."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    excluded: int = 0

    @property
    def row_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    @property
    def col_totals(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.counts)) if self.counts else ()

    @property
    def grand_total(self) -> int:
        return sum(self.row_totals)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float
    expected: tuple[tuple[float, ...], ...]
    low_expected_warning: bool  # some expected cell < 5
    insufficient_class_warning: bool  # some outcome column never occurred


@dataclass(frozen=True)
class ConditionBreakdown:
    """Per-value outcome percentages, plus percentage-point deltas between
    the two rows when the condition is binary (first row minus second)."""

    condition: str
    per_value: dict[str, tuple[float, float, float, int]]
    deltas: dict[str, float] | None


def tabulate(
    classified: Iterable[ClassifiedError],
    corpus: Iterable[ErrorRecord],
    condition: str,
) -> ContingencyTable:
    """Cross-tabulate outcomes against one condition.

    Rows are the condition's observed values in canonical order; columns
    are fixed (corrected, faithful, incorrect). Records lacking the
    attribute are excluded and counted.
    """
    getter, order = _condition(condition)
    by_id = {r.record_id: r for r in corpus}
    col_index = {o: i for i, o in enumerate(Outcome)}
    cells: dict[str, list[int]] = {}
    excluded = 0
    for c in classified:
        rec = by_id.get(c.record_id)
        if rec is None:
            raise UnknownRecord(f"classified record {c.record_id!r} not in corpus")
        value = getter(rec)
        if value is None:
            excluded += 1
            continue
        cells.setdefault(value, [0, 0, 0])[col_index[c.outcome]] += 1
    rows = tuple(v for v in order if v in cells)
    return ContingencyTable(
        row_labels=rows,
        col_labels=OUTCOME_LABELS,
        counts=tuple(tuple(cells[v]) for v in rows),
        excluded=excluded,
    )


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by series expansion."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(500):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction
    (modified Lentz algorithm)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi_square_survival(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution, Q(df/2, x/2).

    Monotonically decreasing in ``x`` for fixed ``df``; 1.0 at x = 0.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    if df < 1:
        raise ValueError("df must be >= 1")
    if x == 0:
        return 1.0
    a = 0.5 * df
    hx = 0.5 * x
    if x < df + 1:
        q = 1.0 - _lower_gamma_series(a, hx)
    else:
        q = _upper_gamma_cf(a, hx)
    return min(1.0, max(0.0, q))


def chi_square(t: ContingencyTable) -> ChiSquareResult:
    """Pearson chi-square test of independence on a contingency table.

    Expected counts are row_total * col_total / N. Cells in all-zero rows
    or columns carry no information: they are skipped and the degrees of
    freedom shrink accordingly (with a warning). DegenerateTable is raised
    when fewer than two informative rows or columns remain.
    """
    rows = len(t.counts)
    cols = len(t.col_labels)
    if rows < 2 or cols < 2:
        raise DegenerateTable(f"need at least a 2x2 table, got {rows}x{cols}")
    n = t.grand_total
    if n <= 0:
        raise DegenerateTable("table is empty")

    row_totals = t.row_totals
    col_totals = t.col_totals
    expected = tuple(
        tuple(rt * ct / n for ct in col_totals) for rt in row_totals
    )
    live_rows = sum(1 for rt in row_totals if rt > 0)
    live_cols = sum(1 for ct in col_totals if ct > 0)
    if live_rows < rows or live_cols < cols:
        warnings.warn(
            f"{rows - live_rows} empty row(s) and {cols - live_cols} empty "
            "column(s) dropped from the chi-square test"
        )
    if live_rows < 2 or live_cols < 2:
        raise DegenerateTable(
            "fewer than two informative rows/columns after dropping empty margins"
        )

    statistic = 0.0
    for i in range(rows):
        for j in range(cols):
            e = expected[i][j]
            if e > 0:
                o = t.counts[i][j]
                statistic += (o - e) ** 2 / e
    df = (live_rows - 1) * (live_cols - 1)
    return ChiSquareResult(
        statistic=statistic,
        df=df,
        p_value=chi_square_survival(statistic, df),
        expected=expected,
        low_expected_warning=any(e < 5 for row in expected for e in row),
        insufficient_class_warning=any(ct == 0 for ct in col_totals),
    )


def breakdown(
    classified: Iterable[ClassifiedError],
    corpus: Iterable[ErrorRecord],
    condition: str,
) -> ConditionBreakdown:
    """Outcome percentage triple per condition value; deltas when binary."""
    table = tabulate(classified, corpus, condition)
    per_value: dict[str, tuple[float, float, float, int]] = {}
    for label, row in zip(table.row_labels, table.counts):
        n = sum(row)
        pcts = tuple(100.0 * c / n for c in row) if n else (0.0, 0.0, 0.0)
        per_value[label] = (*pcts, n)
    deltas = None
    if len(table.row_labels) == 2:
        first, second = (per_value[v] for v in table.row_labels)
        deltas = {
            label: first[i] - second[i] for i, label in enumerate(OUTCOME_LABELS)
        }
    return ConditionBreakdown(condition, per_value, deltas)


def step_sample(classified: list[ClassifiedError], k: int) -> list[ClassifiedError]:
    """Every k-th result in record_id order (positions 0, k, 2k, ...),
    the deterministic subset used for human spot checks."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ordered = sorted(classified, key=lambda c: c.record_id)
    return ordered[::k]


def exclude_alignment_failures(
    classified: list[ClassifiedError],
) -> tuple[list[ClassifiedError], int]:
    """Split off results whose alignment failed; returns (kept, n_removed)."""
    kept = [c for c in classified if Diagnostic.ALIGNMENT_FAILED not in c.diagnostics]
    return kept, len(classified) - len(kept)


def _breakdown_csv(path: Path, b: ConditionBreakdown) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["condition_value", "n", "corrected_pct", "faithful_pct", "incorrect_pct"]
        )
        for value, (c_pct, f_pct, i_pct, n) in b.per_value.items():
            w.writerow([value, n, f"{c_pct:.2f}", f"{f_pct:.2f}", f"{i_pct:.2f}"])


def _plotdata_csv(path: Path, b: ConditionBreakdown) -> None:
    """Long-form stacked-percentage data, one row per (value, outcome)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["condition", "condition_value", "outcome", "pct", "n"])
        for value, (c_pct, f_pct, i_pct, n) in b.per_value.items():
            for label, pct in zip(OUTCOME_LABELS, (c_pct, f_pct, i_pct)):
                w.writerow([b.condition, value, label, f"{pct:.2f}", n])


def write_reports(
    classified: list[ClassifiedError],
    corpus: list[ErrorRecord],
    report_dir: str | Path,
    *,
    min_expected: float = 0.0,
    drop_alignment_failures: bool = False,
) -> list[Path]:
    """Write the full per-condition report set into ``report_dir``.

    Produces breakdown_<condition>.csv and plotdata_<condition>.csv per
    condition plus chi_square_summary.json. Tests whose expected counts
    fall below ``min_expected`` are still reported but marked excluded.
    Output bytes are deterministic for fixed inputs.
    """
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    total = len(classified)
    kept = classified
    n_failed = sum(
        1 for c in classified if Diagnostic.ALIGNMENT_FAILED in c.diagnostics
    )
    if drop_alignment_failures:
        kept, _ = exclude_alignment_failures(classified)

    written: list[Path] = []
    summary: dict = {
        "n_results": total,
        "n_alignment_failed": n_failed,
        "alignment_failures_excluded": drop_alignment_failures,
        "min_expected": min_expected,
        "conditions": {},
    }
    for condition in CONDITION_NAMES:
        table = tabulate(kept, corpus, condition)
        b = breakdown(kept, corpus, condition)
        entry: dict = {
            "rows": list(table.row_labels),
            "columns": list(table.col_labels),
            "counts": [list(row) for row in table.counts],
            "excluded_records": table.excluded,
            "breakdown": {
                value: {
                    "corrected_pct": trip[0],
                    "faithful_pct": trip[1],
                    "incorrect_pct": trip[2],
                    "n": trip[3],
                }
                for value, trip in b.per_value.items()
            },
            "deltas": b.deltas,
        }
        try:
            result = chi_square(table)
            entry["chi_square"] = {
                "statistic": result.statistic,
                "df": result.df,
                "p_value": result.p_value,
                "low_expected_warning": result.low_expected_warning,
                "insufficient_class_warning": result.insufficient_class_warning,
                "excluded_by_min_expected": bool(
                    min_expected > 0
                    and any(e < min_expected for row in result.expected for e in row)
                ),
            }
        except DegenerateTable as e:
            entry["chi_square"] = {"error": str(e)}
        summary["conditions"][condition] = entry

        bpath = report_dir / f"breakdown_{condition}.csv"
        _breakdown_csv(bpath, b)
        written.append(bpath)
        ppath = report_dir / f"plotdata_{condition}.csv"
        _plotdata_csv(ppath, b)
        written.append(ppath)

    spath = report_dir / "chi_square_summary.json"
    spath.write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(spath)
    return written

"""Evaluation: edit distance, WER, prominence error rate, alignment
gating, word-level accuracy with confusion matrices, and fold
aggregation.

Error rates pool edits over all utterances before dividing.  An
Unassigned prominence hypothesis (None) is a real symbol that never
matches any reference level, so it always costs an edit and counts as an
incorrect word.  Undefined aggregates (empty denominators) are reported
as None, never as 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .corpus import ProminenceLevel
from .errors import MetricError

CLASSES = (ProminenceLevel.PL0, ProminenceLevel.PL1, ProminenceLevel.PL2)
Level = Optional[ProminenceLevel]


@dataclass(frozen=True)
class EditCounts:
    substitutions: int
    insertions: int
    deletions: int
    hits: int
    reference_length: int

    def __post_init__(self) -> None:
        if self.substitutions + self.deletions + self.hits != self.reference_length:
            raise MetricError("edit counts do not cover the reference")

    @property
    def edits(self) -> int:
        return self.substitutions + self.insertions + self.deletions


def edit_distance(
    ref: Sequence, hyp: Sequence, match: Callable[[object, object], bool] = None
) -> EditCounts:
    """Levenshtein alignment with unit costs.

    Among minimal-cost alignments the one with fewer substitutions wins,
    then the one with fewer insertions; the (total, subs, ins) triple is
    minimized lexicographically, making the counts deterministic.
    """
    if match is None:
        match = lambda a, b: a == b
    n, m = len(ref), len(hyp)
    # dp[j] = (total, subs, ins) for ref[:i], hyp[:j]
    dp = [(j, 0, j) for j in range(m + 1)]
    for i in range(1, n + 1):
        prev_diag = dp[0]
        dp[0] = (i, 0, 0)
        for j in range(1, m + 1):
            above = dp[j]
            left = dp[j - 1]
            if match(ref[i - 1], hyp[j - 1]):
                cand = prev_diag
            else:
                cand = (prev_diag[0] + 1, prev_diag[1] + 1, prev_diag[2])
            delete = (above[0] + 1, above[1], above[2])
            insert = (left[0] + 1, left[1], left[2] + 1)
            best = min(cand, delete, insert)
            prev_diag = above
            dp[j] = best
    total, subs, ins = dp[m]
    dels = total - subs - ins
    return EditCounts(
        substitutions=subs,
        insertions=ins,
        deletions=dels,
        hits=n - subs - dels,
        reference_length=n,
    )


def wer(
    refs: Sequence[Sequence[str]], hyps: Sequence[Sequence[str]]
) -> Optional[float]:
    """Pooled word error rate in percent; None when the reference is empty."""
    if len(refs) != len(hyps):
        raise MetricError(f"{len(refs)} references vs {len(hyps)} hypotheses")
    edits = 0
    ref_len = 0
    for r, h in zip(refs, hyps):
        counts = edit_distance(list(r), list(h))
        edits += counts.edits
        ref_len += counts.reference_length
    if ref_len == 0:
        return None
    return 100.0 * edits / ref_len


def _level_match(a: object, b: object) -> bool:
    return a is not None and b is not None and a == b


def per(
    ref_levels: Sequence[Sequence[Level]], hyp_levels: Sequence[Sequence[Level]]
) -> Optional[float]:
    """Prominence error rate: pooled edit distance over level symbols.

    Unassigned positions never match, on either side."""
    if len(ref_levels) != len(hyp_levels):
        raise MetricError(f"{len(ref_levels)} references vs {len(hyp_levels)} hypotheses")
    edits = 0
    ref_len = 0
    for r, h in zip(ref_levels, hyp_levels):
        counts = edit_distance(list(r), list(h), match=_level_match)
        edits += counts.edits
        ref_len += counts.reference_length
    if ref_len == 0:
        return None
    return 100.0 * edits / ref_len


def align_gate(ref_word_count: int, hyp_word_count: int) -> bool:
    """Word-level scoring is possible exactly when the counts agree."""
    return ref_word_count == hyp_word_count


@dataclass(frozen=True)
class ConfusionMatrix:
    """Reference x hypothesis counts over the three levels, plus a
    separate per-reference-class column for Unassigned hypotheses."""

    counts: tuple[tuple[int, int, int], ...]
    unassigned: tuple[int, int, int]

    def __post_init__(self) -> None:
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise MetricError("confusion matrix must be 3x3")

    def row_total(self, ref_class: ProminenceLevel, include_unassigned: bool) -> int:
        row = sum(self.counts[int(ref_class)])
        if include_unassigned:
            row += self.unassigned[int(ref_class)]
        return row

    def recall_view(self) -> tuple[tuple[Optional[float], ...], ...]:
        """Rows normalized over the assigned-hypothesis columns; rows of
        an unseen reference class come back as None."""
        view = []
        for c in CLASSES:
            denom = self.row_total(c, include_unassigned=False)
            if denom == 0:
                view.append((None, None, None))
            else:
                view.append(tuple(v / denom for v in self.counts[int(c)]))
        return tuple(view)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(3))

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts) + sum(self.unassigned)


@dataclass(frozen=True)
class AccuracyResult:
    accuracy: Optional[float]
    confusion: ConfusionMatrix
    recall: dict[str, Optional[float]]
    f1: dict[str, Optional[float]]


def aligned_accuracy(
    ref_levels: Sequence[Sequence[Level]], hyp_levels: Sequence[Sequence[Level]]
) -> AccuracyResult:
    """Position-wise scoring over utterances that passed the gate.

    Unassigned hypothesis positions are incorrect and land in the
    separate unassigned column, which recall denominators exclude but
    accuracy includes.  A reference must carry a level at every position.
    """
    if len(ref_levels) != len(hyp_levels):
        raise MetricError(f"{len(ref_levels)} references vs {len(hyp_levels)} hypotheses")
    counts = [[0, 0, 0] for _ in range(3)]
    unassigned = [0, 0, 0]
    for r, h in zip(ref_levels, hyp_levels):
        if len(r) != len(h):
            raise MetricError(
                f"ungated utterance supplied: {len(r)} reference words vs {len(h)} hypothesis words"
            )
        for ref_lv, hyp_lv in zip(r, h):
            if ref_lv is None:
                raise MetricError("reference contains an unannotated word")
            if hyp_lv is None:
                unassigned[int(ref_lv)] += 1
            else:
                counts[int(ref_lv)][int(hyp_lv)] += 1
    matrix = ConfusionMatrix(
        counts=tuple(tuple(row) for row in counts), unassigned=tuple(unassigned)
    )
    accuracy = 100.0 * matrix.trace / matrix.total if matrix.total else None

    recall: dict[str, Optional[float]] = {}
    f1: dict[str, Optional[float]] = {}
    for c in CLASSES:
        i = int(c)
        rec_denom = matrix.row_total(c, include_unassigned=False)
        rec = counts[i][i] / rec_denom if rec_denom else None
        recall[c.name] = None if rec is None else 100.0 * rec
        prec_denom = sum(counts[r][i] for r in range(3))
        prec = counts[i][i] / prec_denom if prec_denom else None
        if rec is None or prec is None or (rec + prec) == 0:
            f1[c.name] = None
        else:
            f1[c.name] = 100.0 * 2 * prec * rec / (prec + rec)
    return AccuracyResult(accuracy=accuracy, confusion=matrix, recall=recall, f1=f1)


def percent_aligned(gated: Sequence[bool]) -> Optional[float]:
    """Share of utterances whose word counts matched, in percent."""
    if not gated:
        return None
    return 100.0 * sum(1 for g in gated if g) / len(gated)


# ---------------------------------------------------------------------------
# Reports and fold aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalReport:
    """Per-utterance records plus the aggregates computed from them."""

    records: tuple[dict, ...]
    metrics: dict[str, object]

    def to_json(self) -> str:
        return json.dumps(
            {"metrics": self.metrics, "records": list(self.records)},
            sort_keys=True,
            indent=2,
            ensure_ascii=False,
        )

    @staticmethod
    def from_json(text: str) -> "EvalReport":
        obj = json.loads(text)
        return EvalReport(records=tuple(obj["records"]), metrics=obj["metrics"])

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @staticmethod
    def load(path: str | Path) -> "EvalReport":
        with open(path, encoding="utf-8") as fh:
            return EvalReport.from_json(fh.read())


def mean_std(values: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    """Mean and sample (n-1) standard deviation; None where undefined."""
    if not values:
        return None, None
    m = sum(values) / len(values)
    if len(values) < 2:
        return m, None
    var = sum((x - m) ** 2 for x in values) / (len(values) - 1)
    return m, math.sqrt(var)


def _aggregate_values(values: list[object]) -> object:
    defined = [v for v in values if v is not None]
    if not defined:
        return {"mean": None, "std": None, "folds": 0}
    sample = defined[0]
    if isinstance(sample, (int, float)) and not isinstance(sample, bool):
        m, s = mean_std([float(v) for v in defined])
        return {"mean": m, "std": s, "folds": len(defined)}
    if isinstance(sample, list):
        summed = sample
        for v in defined[1:]:
            summed = _elementwise_sum(summed, v)
        return summed
    if isinstance(sample, dict):
        keys = sorted({k for v in defined for k in v})
        return {k: _aggregate_values([v.get(k) for v in defined]) for k in keys}
    if isinstance(sample, str):
        distinct = sorted(set(defined))
        return distinct[0] if len(distinct) == 1 else distinct
    raise MetricError(f"cannot aggregate metric value of type {type(sample).__name__}")


def _elementwise_sum(a: list, b: list) -> list:
    if len(a) != len(b):
        raise MetricError("mismatched confusion shapes across folds")
    out = []
    for x, y in zip(a, b):
        if isinstance(x, list):
            out.append(_elementwise_sum(x, y))
        else:
            out.append(x + y)
    return out


def aggregate_folds(reports: Sequence[EvalReport]) -> EvalReport:
    """Combine per-fold reports: scalar metrics become mean and sample
    standard deviation, count tables sum elementwise, records concatenate."""
    if len(reports) < 2:
        raise MetricError(f"fold aggregation needs >= 2 reports, got {len(reports)}")
    keys = sorted({k for r in reports for k in r.metrics})
    metrics = {k: _aggregate_values([r.metrics.get(k) for r in reports]) for k in keys}
    records = tuple(rec for r in reports for rec in r.records)
    return EvalReport(records=records, metrics=metrics)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def format_pct(value: Optional[float]) -> str:
    """Two decimals, half-up, as in the result tables; None -> n/a."""
    if value is None:
        return "n/a"
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), ROUND_HALF_UP))


def _format_cell(value) -> str:
    if isinstance(value, dict) and "mean" in value:
        if value["mean"] is None:
            return "n/a"
        if value.get("std") is None:
            return format_pct(value["mean"])
        return f"{format_pct(value['mean'])}±{format_pct(value['std'])}"
    if value is None or isinstance(value, (int, float)):
        return format_pct(value)
    return str(value)


def render_table(rows: Sequence[dict]) -> str:
    """Plain-text result table: Type, Test set, PER, %Aligned, Accuracy."""
    header = ("Type", "Test set", "PER", "%Aligned", "Accuracy")
    body = [
        (
            str(row.get("type", "")),
            str(row.get("test_set", "")),
            _format_cell(row.get("per")),
            _format_cell(row.get("percent_aligned")),
            _format_cell(row.get("accuracy")),
        )
        for row in rows
    ]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
        for i in range(5)
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in body:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(5)).rstrip())
    return "\n".join(lines) + "\n"

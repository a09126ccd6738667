"""Precision / recall / F1 scoring over gold-annotated sentences.

Two counting modes. EXACT_SPAN treats an annotation as correct only when a
predicted span matches a gold span's label and character range exactly.
TOKEN scores per-token label agreement: a token is credited to a label when
any span of that label covers it, on either side. In both modes a
prediction with the wrong label counts once as a false positive for the
predicted label and once as a false negative for the gold label.

Conventions: precision and recall define 0/0 as 1, F1 defines 0/0 as 0.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from .errors import AlignmentError

MODES = ("TOKEN", "EXACT_SPAN")

# (kind, char_start, char_end) in the gold sentence's raw text
Span = tuple[str, int, int]


@dataclass(frozen=True)
class LabelScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    per_label: dict[str, LabelScore]
    totals: LabelScore
    mode: str


def _ratio(num: int, den: int) -> float:
    return 1.0 if den == 0 else num / den


def _label_score(tp: int, fp: int, fn: int) -> LabelScore:
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return LabelScore(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def _token_intervals(text: str) -> list[tuple[int, int]]:
    return [(m.start(), m.end()) for m in re.finditer(r"\S+", text)]


def _covered(intervals: list[tuple[int, int]], spans: list[Span], label: str) -> set[int]:
    hit: set[int] = set()
    for kind, start, end in spans:
        if kind != label:
            continue
        for i, (ts, te) in enumerate(intervals):
            if ts < end and start < te:
                hit.add(i)
    return hit


def score(
    gold: Sequence,
    predicted: Sequence[Sequence[Span]],
    mode: str = "TOKEN",
) -> EvalReport:
    """Score predictions against gold sentences, aligned by position.

    ``gold`` is a sequence of annotated sentences (``text`` and ``spans``
    attributes); ``predicted`` is a same-length sequence of span lists in
    the same character space as each gold text.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if len(gold) != len(predicted):
        raise AlignmentError(f"{len(gold)} gold sentences vs {len(predicted)} predictions")

    labels = sorted(
        {s[0] for spans in predicted for s in spans}
        | {s[0] for g in gold for s in _gold_spans(g)}
    )
    counts = {label: [0, 0, 0] for label in labels}  # tp, fp, fn

    for g, pred in zip(gold, predicted):
        gold_spans = _gold_spans(g)
        pred_spans = list(pred)
        if mode == "EXACT_SPAN":
            gold_set = set(gold_spans)
            pred_set = set(pred_spans)
            for span in gold_set & pred_set:
                counts[span[0]][0] += 1
            for span in pred_set - gold_set:
                counts[span[0]][1] += 1
            for span in gold_set - pred_set:
                counts[span[0]][2] += 1
        else:
            intervals = _token_intervals(g.text)
            for label in labels:
                g_hit = _covered(intervals, gold_spans, label)
                p_hit = _covered(intervals, pred_spans, label)
                counts[label][0] += len(g_hit & p_hit)
                counts[label][1] += len(p_hit - g_hit)
                counts[label][2] += len(g_hit - p_hit)

    per_label = {label: _label_score(*counts[label]) for label in labels}
    totals = _label_score(
        sum(c[0] for c in counts.values()),
        sum(c[1] for c in counts.values()),
        sum(c[2] for c in counts.values()),
    )
    return EvalReport(per_label=per_label, totals=totals, mode=mode)


def _gold_spans(sentence) -> list[Span]:
    return [(kind, start, end) for kind, start, end in sentence.spans]


def report_to_dict(report: EvalReport) -> dict:
    def row(s: LabelScore) -> dict:
        return {
            "tp": s.tp,
            "fp": s.fp,
            "fn": s.fn,
            "precision": s.precision,
            "recall": s.recall,
            "f1": s.f1,
        }

    return {
        "mode": report.mode,
        "per_label": {label: row(s) for label, s in sorted(report.per_label.items())},
        "totals": row(report.totals),
    }


_DISPLAY = {
    "DRUG": "Drug name",
    "DOSE": "Dose",
    "DURATION": "Duration",
    "FREQUENCY": "Frequency",
    "COMMENT": "Comment",
}


def format_table(report: EvalReport) -> str:
    """Aligned plain-text table: Label, F-measure, Precision, Recall."""
    rows = [("Label", "F-measure", "Precision", "Recall")]
    for label, s in sorted(report.per_label.items()):
        rows.append(
            (
                _DISPLAY.get(label, label),
                f"{100 * s.f1:.2f}",
                f"{100 * s.precision:.2f}",
                f"{100 * s.recall:.2f}",
            )
        )
    t = report.totals
    rows.append(("TOTAL", f"{100 * t.f1:.2f}", f"{100 * t.precision:.2f}", f"{100 * t.recall:.2f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> bytes:
    return (json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n").encode("utf-8")

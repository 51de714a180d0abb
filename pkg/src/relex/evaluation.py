"""Micro-averaged precision/recall/F1 over non-NA predictions."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .corpus import NA, AnnotationSet, base_key, check_same_universe
from .errors import EvaluationError

logger = logging.getLogger(__name__)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    per_relation: dict[str, dict[str, float]] = field(default_factory=dict)


def evaluate(predictions: AnnotationSet, gold: AnnotationSet) -> Metrics:
    """Micro metrics: a prediction is correct iff it names a gold relation.

    Raises when gold has no positives (recall undefined). Zero non-NA
    predictions yield precision 0 with a logged warning.
    """
    check_same_universe(predictions, gold)
    pred_by_base = {base_key(k): lab for k, lab in predictions.items()}

    gold_pos_entries = [(base_key(k), lab) for k, lab in gold.items() if lab != NA]
    if not gold_pos_entries:
        raise EvaluationError("gold has no positive instances; recall undefined")
    predicted_pos = [(b, lab) for b, lab in pred_by_base.items() if lab != NA]
    gold_pos_set = set(gold_pos_entries)

    tp = sum(1 for b, lab in gold_pos_entries if pred_by_base.get(b) == lab)
    fp = sum(1 for entry in predicted_pos if entry not in gold_pos_set)
    fn = len(gold_pos_entries) - tp

    if predicted_pos:
        precision = tp / len(predicted_pos)
    else:
        logger.warning("no non-NA predictions; reporting precision 0")
        precision = 0.0
    recall = tp / len(gold_pos_entries)

    relations = sorted(
        {lab for _, lab in gold_pos_entries} | {lab for _, lab in predicted_pos}
    )
    per_relation = {}
    for r in relations:
        tp_r = sum(1 for b, lab in gold_pos_entries if lab == r and pred_by_base.get(b) == r)
        pred_r = sum(1 for _, lab in predicted_pos if lab == r)
        gold_r = sum(1 for _, lab in gold_pos_entries if lab == r)
        p_r = tp_r / pred_r if pred_r else 0.0
        r_r = tp_r / gold_r if gold_r else 0.0
        per_relation[r] = {
            "precision": p_r,
            "recall": r_r,
            "f1": f1_score(p_r, r_r),
            "tp": tp_r,
            "fp": pred_r - tp_r,
            "fn": gold_r - tp_r,
        }

    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        tp=tp,
        fp=fp,
        fn=fn,
        per_relation=per_relation,
    )


def _pct(x: float) -> str:
    return f"{x * 100:.2f}"


def report(metrics: Metrics, format: str = "table") -> str:
    """Render metrics as JSON or as a fixed-width P/R/F1 table (in %)."""
    if format == "json":
        doc = {
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f1": metrics.f1,
            "tp": metrics.tp,
            "fp": metrics.fp,
            "fn": metrics.fn,
            "per_relation": metrics.per_relation,
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")
    name_width = max([len("micro")] + [len(r) for r in metrics.per_relation]) + 2
    lines = [f"{'':<{name_width}}{'P':>8}{'R':>8}{'F1':>8}"]
    lines.append(
        f"{'micro':<{name_width}}"
        f"{_pct(metrics.precision):>8}{_pct(metrics.recall):>8}{_pct(metrics.f1):>8}"
    )
    for r in sorted(metrics.per_relation):
        row = metrics.per_relation[r]
        lines.append(
            f"{r:<{name_width}}"
            f"{_pct(row['precision']):>8}{_pct(row['recall']):>8}{_pct(row['f1']):>8}"
        )
    return "\n".join(lines)

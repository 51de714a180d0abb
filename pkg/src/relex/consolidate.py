"""Combine distant and entailment-based annotation sets into training data.

Two strategies:

* ``ipin`` keeps an instance only when both sources agree: positives must
  carry the same relation, negatives must be NA in both. Everything else
  is removed from the training set.
* ``npin`` takes the entailment side's positives as-is and keeps the
  agreed negatives, trading some noise for positive-set size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import NA, AnnotationSet, Source, base_key, check_same_universe


@dataclass
class ConsolidationReport:
    strategy: str
    per_relation: dict[str, dict[str, int]] = field(default_factory=dict)
    na_counts: dict[str, int] = field(default_factory=dict)
    removed: dict[str, list[str]] = field(default_factory=dict)

    def removed_total(self) -> int:
        return sum(len(keys) for keys in self.removed.values())


def ipin(ds: AnnotationSet, is_: AnnotationSet) -> AnnotationSet:
    """Intersection of positives and intersection of negatives.

    Output order follows the distant set for reproducible training batches.
    Conflicting non-NA labels count as non-confirmation and are dropped.
    """
    check_same_universe(ds, is_)
    out: dict[str, str] = {}
    for key, label in ds.items():
        is_label = is_.labels.get(base_key(key))
        if label != NA and is_label == label:
            out[key] = label
        elif label == NA and is_label == NA:
            out[key] = NA
    return AnnotationSet(Source.IPIN, out)


def npin(ds: AnnotationSet, is_: AnnotationSet) -> AnnotationSet:
    """Entailment positives as-is, plus the agreed negatives."""
    check_same_universe(ds, is_)
    ds_na = ds.na_keys()
    out: dict[str, str] = {}
    seen: set[str] = set()
    for key in ds.labels:
        bkey = base_key(key)
        if bkey in seen:
            continue
        seen.add(bkey)
        is_label = is_.labels.get(bkey)
        if is_label != NA and is_label is not None:
            out[bkey] = is_label
        elif is_label == NA and bkey in ds_na:
            out[bkey] = NA
    return AnnotationSet(Source.NPIN, out)


def build_report(
    ds: AnnotationSet, is_: AnnotationSet, out: AnnotationSet
) -> ConsolidationReport:
    """Per-relation before/after counts plus removed keys bucketed by reason."""
    report = ConsolidationReport(strategy=out.source.value)
    relations = sorted(ds.relations() | is_.relations() | out.relations())
    ds_pos = ds.positives_by_relation()
    is_pos = is_.positives_by_relation()
    out_pos = out.positives_by_relation()
    for r in relations:
        report.per_relation[r] = {
            "ds": len(ds_pos.get(r, ())),
            "is": len(is_pos.get(r, ())),
            "out": len(out_pos.get(r, ())),
        }
    report.na_counts = {
        "ds": len(ds.na_keys()),
        "is": len(is_.na_keys()),
        "out": len(out.na_keys()),
    }
    kept = out.universe()
    for key, label in ds.items():
        bkey = base_key(key)
        if bkey in kept:
            continue
        is_label = is_.labels.get(bkey)
        if label == NA:
            reason = "na_not_confirmed"
        elif is_label == NA:
            reason = "positive_not_confirmed"
        elif is_label != label:
            reason = "label_conflict"
        else:
            reason = "other"
        report.removed.setdefault(reason, []).append(bkey)
    return report

"""Simulate distant-annotation noise on a gold corpus and measure quality.

False negatives come first: positives whose entity pair is mentioned by
fewer sentences than a threshold flip to NA, with the threshold picked by
exhaustive search toward a target FN rate. False positives follow the
distant-annotation rule: any NA instance whose ordered surface pair still
has a positive instance somewhere inherits that relation. Both steps are
deterministic given the corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

from .corpus import (
    KEY_SEP,
    NA,
    AnnotationSet,
    Corpus,
    Source,
    base_key,
)
from .errors import SimulationError, UniverseMismatchError


@dataclass(frozen=True)
class NoiseReport:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise SimulationError("negative count in noise report")

    @property
    def fp_rate(self) -> float:
        denom = self.tp + self.fp
        return self.fp / denom if denom else 0.0

    @property
    def fn_rate(self) -> float:
        denom = self.tn + self.fn
        return self.fn / denom if denom else 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "tp": self.tp,
                "fp": self.fp,
                "tn": self.tn,
                "fn": self.fn,
                "fp_rate": self.fp_rate,
                "fn_rate": self.fn_rate,
            },
            sort_keys=True,
        )

    def format_table(self, title: str = "training data") -> str:
        rows = [
            ("# TP", str(self.tp), ""),
            ("# FP", str(self.fp), f"({self.fp_rate * 100:.2f}%)"),
            ("# TN", str(self.tn), ""),
            ("# FN", str(self.fn), f"({self.fn_rate * 100:.2f}%)"),
        ]
        width = max(len(r[1]) + len(r[2]) + 1 for r in rows)
        lines = [title]
        for name, count, pct in rows:
            tail = f"{count} {pct}".strip()
            lines.append(f"{name:<6}{tail:>{width}}")
        return "\n".join(lines)


def pair_mention_counts(corpus: Corpus) -> dict[tuple[str, str], int]:
    """Sentences mentioning both surfaces of a pair, unordered.

    A pair of equal surfaces counts a sentence only when the surface is
    mentioned at least twice in it.
    """
    counts: dict[tuple[str, str], int] = {}
    for sentence in corpus.sentences:
        pairs = set()
        for a, b in combinations(sentence.mentions, 2):
            pairs.add(tuple(sorted((a.surface, b.surface))))
        for pair in pairs:
            counts[pair] = counts.get(pair, 0) + 1
    return counts


def _unordered_pair(corpus: Corpus, key: str) -> tuple[str, str]:
    inst = corpus.instance(key)
    return tuple(sorted((inst.subj.surface, inst.obj.surface)))


def inject_fn(
    gold: AnnotationSet, corpus: Corpus, target_rate: float = 0.05
) -> tuple[AnnotationSet, int]:
    """Flip long-tail positives to NA, targeting a false-negative rate.

    A positive flips when its pair's sentence-mention count is below the
    chosen threshold. The threshold minimizing |achieved rate - target| is
    found by exhaustive search; ties go to the smaller threshold.
    """
    positives = [(k, lab) for k, lab in gold.items() if lab != NA]
    if not positives:
        raise SimulationError("gold annotations contain no positive instances")
    counts = pair_mention_counts(corpus)
    tn = len(gold.labels) - len(positives)
    pair_count = {k: counts.get(_unordered_pair(corpus, k), 0) for k, _ in positives}

    max_count = max(pair_count.values())
    best_n, best_dist = 1, None
    for n in range(1, max_count + 2):
        fn = sum(1 for c in pair_count.values() if c < n)
        rate = fn / (tn + fn) if (tn + fn) else 0.0
        dist = abs(rate - target_rate)
        if best_dist is None or dist < best_dist:
            best_n, best_dist = n, dist

    labels = {
        k: (NA if lab != NA and pair_count[k] < best_n else lab)
        for k, lab in gold.items()
    }
    return AnnotationSet(Source.SIMULATED, labels), best_n


def inject_fp(annotations: AnnotationSet, corpus: Corpus) -> AnnotationSet:
    """Relabel NA instances whose ordered pair still has a positive label.

    A pair carrying several relations emits one labeled entry per relation
    (label-extended keys). Applying the transform twice is a no-op.
    """
    pair_map: dict[tuple[str, str], list[str]] = {}
    for key, label in annotations.items():
        if label == NA:
            continue
        inst = corpus.instance(key)
        rels = pair_map.setdefault((inst.subj.surface, inst.obj.surface), [])
        if label not in rels:
            rels.append(label)
    for rels in pair_map.values():
        rels.sort()

    labels: dict[str, str] = {}
    for key, label in annotations.items():
        if label != NA:
            labels[key] = label
            continue
        inst = corpus.instance(key)
        rels = pair_map.get((inst.subj.surface, inst.obj.surface))
        if not rels:
            labels[key] = NA
        elif len(rels) == 1:
            labels[key] = rels[0]
        else:
            for r in rels:
                labels[f"{base_key(key)}{KEY_SEP}{r}"] = r
    return AnnotationSet(Source.SIMULATED, labels)


def noise_stats(annotations: AnnotationSet, gold: AnnotationSet) -> NoiseReport:
    """Confusion counts of an annotation set against gold labels.

    The annotation set may cover a subset of the gold universe (as the
    consolidated sets do); every annotated instance must exist in gold.
    """
    gold_universe = gold.universe()
    missing = {base_key(k) for k in annotations.labels} - gold_universe
    if missing:
        raise UniverseMismatchError(
            f"{len(missing)} annotated instances missing from gold"
        )
    gold_by_base = {base_key(k): lab for k, lab in gold.items()}
    tp = fp = tn = fn = 0
    for key, label in annotations.items():
        g = gold_by_base[base_key(key)]
        if label != NA:
            if label == g:
                tp += 1
            else:
                fp += 1
        else:
            if g == NA:
                tn += 1
            else:
                fn += 1
    return NoiseReport(tp, fp, tn, fn)

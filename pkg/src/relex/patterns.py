"""Mining, filtering, and entailment-based grouping of textual patterns.

A pattern is the token sequence between a positive instance's two mentions,
with placeholders marking where the mentions sat. Grouping absorbs longer
patterns into the shortest pattern they entail, accumulating frequency, so
one representative per semantic group survives.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .corpus import AnnotationSet, Corpus
from .errors import ConfigError, ScreeningError
from .nli import STOP_WORDS, NliEngine, normalize_tokens
from .schema import OBJ_SLOT, SUBJ_SLOT, Template

# Placeholder fillers for scoring a bare pattern with an NLI backend, keyed
# by NER type; unknown types fall back to bare variables.
FILLERS = {
    "PERSON": "John Smith",
    "ORGANIZATION": "the company",
    "LOCATION": "the city",
}
DEFAULT_SUBJ_FILLER = "X"
DEFAULT_OBJ_FILLER = "Y"

MAX_PATTERN_EXAMPLES = 5


class Stage(str, Enum):
    INITIAL = "initial"
    GROUPED = "grouped"
    PRUNED = "pruned"
    SCREENED = "screened"


_STAGE_ORDER = [Stage.INITIAL, Stage.GROUPED, Stage.PRUNED, Stage.SCREENED]


@dataclass(frozen=True)
class Pattern:
    tokens: tuple[str, ...]
    frequency: int
    example_instance_keys: tuple[str, ...] = ()
    members: tuple[str, ...] = ()  # texts of patterns absorbed into this group

    def __post_init__(self):
        if self.frequency < 0:
            raise ConfigError(f"negative pattern frequency: {self.frequency}")

    def __len__(self) -> int:
        # Length in tokens, placeholders included.
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)

    def content_token_count(self) -> int:
        return sum(1 for t in self.tokens if t not in (SUBJ_SLOT, OBJ_SLOT))


@dataclass
class PatternSet:
    relation_id: str
    patterns: list[Pattern]
    stage: Stage = Stage.INITIAL

    def total_frequency(self) -> int:
        return sum(p.frequency for p in self.patterns)

    def advance(self, patterns: list[Pattern], stage: Stage) -> "PatternSet":
        if _STAGE_ORDER.index(stage) <= _STAGE_ORDER.index(self.stage):
            raise ScreeningError(
                f"stage may only advance, {self.stage.value} -> {stage.value}"
            )
        return PatternSet(self.relation_id, patterns, stage)


@dataclass
class PatternConfig:
    top_fraction: float = 0.10
    max_pattern_tokens: int = 10
    max_candidates_per_relation: int = 50
    min_screening_frequency: int = 10

    def __post_init__(self):
        if not 0.0 < self.top_fraction <= 1.0:
            raise ConfigError(f"top_fraction must be in (0, 1], got {self.top_fraction}")
        for name in ("max_pattern_tokens", "max_candidates_per_relation", "min_screening_frequency"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")


def mine_patterns(
    ds: AnnotationSet, corpus: Corpus, relation_id: str
) -> PatternSet:
    """Extract the between-mention token sequence of every positive instance.

    The placeholder order mirrors the sentence: whichever mention comes
    first opens the pattern. Identical patterns merge, summing frequency.
    """
    counts: dict[tuple[str, ...], int] = {}
    examples: dict[tuple[str, ...], list[str]] = {}
    for key, label in ds.items():
        if label != relation_id:
            continue
        inst = corpus.instance(key)
        sentence = corpus.sentence(inst.sentence_id)
        if inst.subj.start < inst.obj.start:
            gap = sentence.tokens[inst.subj.end : inst.obj.start]
            tokens = (SUBJ_SLOT, *gap, OBJ_SLOT)
        else:
            gap = sentence.tokens[inst.obj.end : inst.subj.start]
            tokens = (OBJ_SLOT, *gap, SUBJ_SLOT)
        counts[tokens] = counts.get(tokens, 0) + 1
        bucket = examples.setdefault(tokens, [])
        if len(bucket) < MAX_PATTERN_EXAMPLES:
            bucket.append(key)
    patterns = [
        Pattern(tokens, freq, tuple(examples[tokens]))
        for tokens, freq in counts.items()
    ]
    return PatternSet(relation_id, patterns, Stage.INITIAL)


def _is_stopish(token: str) -> bool:
    # Punctuation-only tokens normalize to nothing and count as stop tokens.
    norm = normalize_tokens(token)
    return not norm or all(t in STOP_WORDS for t in norm)


def filter_patterns(ps: PatternSet, cfg: PatternConfig) -> PatternSet:
    """Quality cuts before grouping: frequency fraction, length, stop-words, cap."""
    if ps.stage is not Stage.INITIAL:
        raise ScreeningError(f"filter expects an initial set, got {ps.stage.value}")
    ranked = sorted(ps.patterns, key=lambda p: (-p.frequency, len(p), p.text()))
    keep = math.ceil(len(ranked) * cfg.top_fraction)
    survivors = ranked[:keep]
    survivors = [
        p for p in survivors if p.content_token_count() < cfg.max_pattern_tokens
    ]
    survivors = [
        p
        for p in survivors
        if any(
            not _is_stopish(t) for t in p.tokens if t not in (SUBJ_SLOT, OBJ_SLOT)
        )
    ]
    survivors = survivors[: cfg.max_candidates_per_relation]
    return PatternSet(ps.relation_id, survivors, Stage.INITIAL)


def instantiate(
    pattern_text: str, subj_ner: str | None = None, obj_ner: str | None = None
) -> str:
    """Replace placeholders with type-generic fillers for NLI scoring."""
    subj = FILLERS.get(subj_ner, DEFAULT_SUBJ_FILLER)
    obj = FILLERS.get(obj_ner, DEFAULT_OBJ_FILLER)
    return pattern_text.replace(SUBJ_SLOT, subj).replace(OBJ_SLOT, obj)


def is_duplicate(
    longer: Pattern,
    shorter: Pattern,
    engine: NliEngine,
    tau: float,
    subj_ner: str | None = None,
    obj_ner: str | None = None,
) -> bool:
    """True when the longer pattern strongly entails the shorter one.

    Callers must pass len(longer) >= len(shorter); grouping's ascending
    iteration guarantees it.
    """
    premise = instantiate(longer.text(), subj_ner, obj_ner)
    hypothesis = instantiate(shorter.text(), subj_ner, obj_ner)
    return engine.score(premise, hypothesis).entail >= tau


def group_patterns(
    ps: PatternSet,
    engine: NliEngine,
    tau: float,
    subj_ner: str | None = None,
    obj_ner: str | None = None,
) -> PatternSet:
    """Absorb longer duplicated patterns into their shortest representative.

    Patterns are visited shortest-first (ties: frequency descending, then
    text). Each not-yet-absorbed pattern becomes a leader and absorbs every
    remaining longer pattern that entails it, taking over its frequency.
    Absorbed patterns are inert: never leaders, never re-absorbed. Output
    keeps only leaders, ranked by group frequency descending.
    """
    if ps.stage is not Stage.INITIAL:
        raise ScreeningError(f"grouping expects an initial set, got {ps.stage.value}")
    order = sorted(ps.patterns, key=lambda p: (len(p), -p.frequency, p.text()))
    freq = [p.frequency for p in order]
    absorbed: list[list[str]] = [[] for _ in order]
    merged_examples: list[list[str]] = [list(p.example_instance_keys) for p in order]
    for i, leader in enumerate(order):
        if freq[i] == 0:
            continue
        for j in range(i + 1, len(order)):
            if freq[j] > 0 and is_duplicate(
                order[j], leader, engine, tau, subj_ner, obj_ner
            ):
                freq[i] += freq[j]
                freq[j] = 0
                absorbed[i].append(order[j].text())
                for key in order[j].example_instance_keys:
                    if len(merged_examples[i]) < MAX_PATTERN_EXAMPLES:
                        merged_examples[i].append(key)
    leaders = [
        replace(
            order[i],
            frequency=freq[i],
            example_instance_keys=tuple(merged_examples[i]),
            members=tuple(absorbed[i]),
        )
        for i in range(len(order))
        if freq[i] > 0
    ]
    leaders.sort(key=lambda p: (-p.frequency, len(p), p.text()))
    return ps.advance(leaders, Stage.GROUPED)


def prune_by_general_template(
    ps: PatternSet,
    general: Template,
    engine: NliEngine,
    tau: float,
    subj_ner: str | None = None,
    obj_ner: str | None = None,
) -> PatternSet:
    """Drop patterns already covered by the general template.

    Survivors keep their group frequencies and ranking.
    """
    if ps.stage is not Stage.GROUPED:
        raise ScreeningError(f"pruning expects a grouped set, got {ps.stage.value}")
    hypothesis = instantiate(general.text, subj_ner, obj_ner)
    survivors = [
        p
        for p in ps.patterns
        if engine.score(instantiate(p.text(), subj_ner, obj_ner), hypothesis).entail
        < tau
    ]
    return ps.advance(survivors, Stage.PRUNED)


def save_pattern_sets(sets: list[PatternSet], path) -> None:
    """Write pattern rows as JSON Lines, one file per pipeline stage."""
    with open(path, "w", encoding="utf-8") as fh:
        for ps in sets:
            for p in ps.patterns:
                fh.write(
                    json.dumps(
                        {
                            "relation": ps.relation_id,
                            "tokens": list(p.tokens),
                            "frequency": p.frequency,
                            "stage": ps.stage.value,
                            "examples": list(p.example_instance_keys),
                            "members": list(p.members),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def load_pattern_sets(path) -> dict[str, PatternSet]:
    rows_by_relation: dict[str, list[Pattern]] = {}
    stages: dict[str, Stage] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            rel = row["relation"]
            rows_by_relation.setdefault(rel, []).append(
                Pattern(
                    tuple(row["tokens"]),
                    row["frequency"],
                    tuple(row.get("examples", ())),
                    tuple(row.get("members", ())),
                )
            )
            stages[rel] = Stage(row["stage"])
    return {
        rel: PatternSet(rel, pats, stages[rel])
        for rel, pats in rows_by_relation.items()
    }

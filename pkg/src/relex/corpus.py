"""Corpus data model, loading, and distant annotation.

A corpus is a list of pre-tokenized sentences with entity mentions; the
pipeline never tokenizes raw text. Instances are ordered (subject, object)
mention pairs, enumerated exhaustively per sentence. Distant annotation
labels an instance with relation ``r`` exactly when the surface pair is a
knowledge-base triple for ``r``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    ConfigError,
    CorpusFormatError,
    SpanOverlapError,
    SpanRangeError,
    UniverseMismatchError,
)

NA = "NA"

KEY_SEP = "|"


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int  # half-open token range [start, end)
    surface: str
    ner_type: str

    def __post_init__(self):
        if not self.start < self.end:
            raise SpanRangeError(f"empty or inverted span [{self.start}, {self.end})")

    def overlaps(self, other: "EntityMention") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[str, ...]
    mentions: tuple[EntityMention, ...]

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Instance:
    sentence_id: str
    subj: EntityMention
    obj: EntityMention
    label: str = NA

    def key(self) -> str:
        return instance_key(self)


def instance_key(inst: Instance) -> str:
    """Stable identity: sentence id plus both spans, independent of label."""
    return KEY_SEP.join(
        (
            inst.sentence_id,
            f"{inst.subj.start}:{inst.subj.end}",
            f"{inst.obj.start}:{inst.obj.end}",
        )
    )


def base_key(key: str) -> str:
    """Strip the optional label slot from a multi-label instance key."""
    parts = key.split(KEY_SEP)
    return KEY_SEP.join(parts[:3])


class Source(str, Enum):
    DS = "DS"
    IS = "IS"
    IPIN = "IPIN"
    NPIN = "NPIN"
    GOLD = "GOLD"
    SIMULATED = "SIMULATED"
    # Model predictions also travel as annotation sets (evaluate() consumes
    # them); PRED marks them apart from the supervision sources.
    PRED = "PRED"


@dataclass
class AnnotationSet:
    """One label per instance key for a single supervision source.

    Keys normally have three segments (see :func:`instance_key`). When one
    physical instance carries several positive labels (a pair matching
    multiple KB relations), each label is stored under a four-segment key
    with the relation appended, so the one-label-per-key invariant holds.
    """

    source: Source
    labels: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    def items(self) -> Iterator[tuple[str, str]]:
        return iter(self.labels.items())

    def universe(self) -> set[str]:
        return {base_key(k) for k in self.labels}

    def na_keys(self) -> set[str]:
        return {base_key(k) for k, lab in self.labels.items() if lab == NA}

    def positive_keys(self, relation: str) -> set[str]:
        return {base_key(k) for k, lab in self.labels.items() if lab == relation}

    def positives_by_relation(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for k, lab in self.labels.items():
            if lab != NA:
                out.setdefault(lab, set()).add(base_key(k))
        return out

    def relations(self) -> set[str]:
        return {lab for lab in self.labels.values() if lab != NA}

    def label_of(self, bkey: str) -> str | None:
        """Label for a base key; None if absent, NA only if explicitly NA.

        For multi-label instances this returns the first stored label in
        insertion order; use :meth:`positive_keys` for set queries.
        """
        if bkey in self.labels:
            return self.labels[bkey]
        for k, lab in self.labels.items():
            if base_key(k) == bkey:
                return lab
        return None


class Corpus:
    """Immutable after load: sentences in file order plus enumerated instances."""

    def __init__(self, sentences: Iterable[Sentence]):
        self.sentences: list[Sentence] = list(sentences)
        self.by_id: dict[str, Sentence] = {}
        for s in self.sentences:
            if s.id in self.by_id:
                raise CorpusFormatError(f"duplicate sentence id {s.id!r}")
            self.by_id[s.id] = s
        self.instances: list[Instance] = []
        for s in self.sentences:
            self.instances.extend(enumerate_instances(s))
        self._instances_by_key = {instance_key(i): i for i in self.instances}

    def __len__(self) -> int:
        return len(self.sentences)

    def sentence(self, sentence_id: str) -> Sentence:
        return self.by_id[sentence_id]

    def instance(self, key: str) -> Instance:
        return self._instances_by_key[base_key(key)]

    def sentence_text(self, inst: Instance) -> str:
        return self.by_id[inst.sentence_id].text()


def enumerate_instances(sentence: Sentence) -> list[Instance]:
    """All ordered (subj, obj) pairs of non-overlapping mentions.

    Order is deterministic: subject start ascending, then object start
    ascending. Sentences with fewer than two mentions yield nothing.
    """
    out = []
    mentions = sorted(sentence.mentions, key=lambda m: (m.start, m.end))
    for subj in mentions:
        for obj in mentions:
            if subj is obj or subj.overlaps(obj):
                continue
            out.append(Instance(sentence.id, subj, obj))
    return out


def _parse_sentence(obj: dict, lineno: int) -> Sentence:
    try:
        sid = obj["id"]
        tokens = obj["tokens"]
        raw_mentions = obj["mentions"]
    except (KeyError, TypeError) as e:
        raise CorpusFormatError(f"line {lineno}: missing field {e}") from e
    if not isinstance(sid, str) or KEY_SEP in sid:
        raise CorpusFormatError(
            f"line {lineno}: sentence id must be a string without {KEY_SEP!r}"
        )
    if not isinstance(tokens, list) or not tokens:
        raise CorpusFormatError(f"line {lineno}: tokens must be a non-empty list")
    mentions = []
    for m in raw_mentions:
        try:
            start, end, ner = int(m["start"]), int(m["end"]), m["ner"]
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusFormatError(f"line {lineno}: bad mention {m!r}") from e
        if start < 0 or end > len(tokens) or start >= end:
            raise SpanRangeError(
                f"line {lineno}: span [{start}, {end}) outside sentence "
                f"of {len(tokens)} tokens"
            )
        mentions.append(
            EntityMention(start, end, " ".join(tokens[start:end]), ner)
        )
    for i, a in enumerate(mentions):
        for b in mentions[i + 1 :]:
            if a.overlaps(b):
                raise SpanOverlapError(
                    f"line {lineno}: spans [{a.start},{a.end}) and "
                    f"[{b.start},{b.end}) overlap"
                )
    return Sentence(sid, tuple(tokens), tuple(mentions))


def load_corpus(path) -> Corpus:
    """Read a JSON Lines corpus: {"id", "tokens", "mentions": [{start, end, ner}]}."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"line {lineno}: invalid JSON: {e}") from e
            sentences.append(_parse_sentence(obj, lineno))
    return Corpus(sentences)


class KnowledgeBase:
    """Set of (subject surface, relation id, object surface) triples."""

    def __init__(self, triples: Iterable[tuple[str, str, str]]):
        self.triples: set[tuple[str, str, str]] = set(triples)
        self._by_pair: dict[tuple[str, str], list[str]] = {}
        for s, r, o in sorted(self.triples):
            self._by_pair.setdefault((s, o), []).append(r)

    def __len__(self) -> int:
        return len(self.triples)

    def relations(self) -> set[str]:
        return {r for _, r, _ in self.triples}

    def relations_for(self, subj_surface: str, obj_surface: str) -> list[str]:
        return self._by_pair.get((subj_surface, obj_surface), [])


def load_kb(path) -> KnowledgeBase:
    """Read a tab-separated triple file: subject<TAB>relation<TAB>object."""
    triples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusFormatError(
                    f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            triples.append((parts[0], parts[1], parts[2]))
    return KnowledgeBase(triples)


def distant_annotate(
    corpus: Corpus,
    kb: KnowledgeBase,
    relations: Iterable[str],
    case_sensitive: bool = True,
) -> AnnotationSet:
    """Label every corpus instance by exact surface match against the KB.

    An instance gets relation ``r`` iff (subj.surface, r, obj.surface) is a
    KB triple; all other instances get NA. A pair matching several relations
    yields one labeled entry per relation (label-extended keys). Matching is
    case-sensitive unless ``case_sensitive=False``.
    """
    known = list(relations)
    unknown = kb.relations() - set(known)
    if unknown:
        raise ConfigError(f"KB references undeclared relations: {sorted(unknown)}")
    order = {r: i for i, r in enumerate(known)}

    if case_sensitive:
        lookup = kb.relations_for
    else:
        folded: dict[tuple[str, str], list[str]] = {}
        for s, r, o in sorted(kb.triples):
            folded.setdefault((s.lower(), o.lower()), []).append(r)

        def lookup(s: str, o: str) -> list[str]:
            return folded.get((s.lower(), o.lower()), [])

    labels: dict[str, str] = {}
    for inst in corpus.instances:
        key = instance_key(inst)
        matched = sorted(lookup(inst.subj.surface, inst.obj.surface), key=order.get)
        if not matched:
            labels[key] = NA
        elif len(matched) == 1:
            labels[key] = matched[0]
        else:
            for r in matched:
                labels[f"{key}{KEY_SEP}{r}"] = r
    return AnnotationSet(Source.DS, labels)


def save_annotations(annotations: AnnotationSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, label in annotations.items():
            fh.write(
                json.dumps(
                    {
                        "instance_key": key,
                        "label": label,
                        "source": annotations.source.value,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_annotations(path, source: Source | None = None) -> AnnotationSet:
    """Read annotation JSON Lines; gold fixtures may omit the source field."""
    labels: dict[str, str] = {}
    seen_source = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                key, label = obj["instance_key"], obj["label"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise CorpusFormatError(f"line {lineno}: bad annotation: {e}") from e
            if key in labels:
                raise CorpusFormatError(f"line {lineno}: duplicate key {key!r}")
            labels[key] = label
            seen_source = obj.get("source", seen_source)
    if source is None:
        if seen_source is None:
            raise CorpusFormatError(f"{path}: no source field and none given")
        source = Source(seen_source)
    return AnnotationSet(source, labels)


def check_same_universe(a: AnnotationSet, b: AnnotationSet) -> None:
    if a.universe() != b.universe():
        only_a = len(a.universe() - b.universe())
        only_b = len(b.universe() - a.universe())
        raise UniverseMismatchError(
            f"{a.source.value} and {b.source.value} cover different instances "
            f"({only_a} only in the former, {only_b} only in the latter)"
        )

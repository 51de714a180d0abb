"""Entailment scoring and entailment-based zero-shot relation inference.

Two backends share one interface: a deterministic mock for tests and
offline runs, and a client for a remote scoring service. The mock applies
a fixed containment rule: lowercase the hypothesis, drop stop-words, and
report entailment iff the remaining content tokens occur in the premise in
the same relative order.
"""

from __future__ import annotations

import json
import string
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import requests

from .corpus import NA, AnnotationSet, Corpus, EntityMention, Instance, Source
from .errors import (
    ConfigError,
    NliResponseError,
    NliScoreError,
    NliTransportError,
)
from .schema import OBJ_SLOT, SUBJ_SLOT, RelationSchema, Template, TemplateSet, validate_placeholders

# Fixed, embedded stop-word list so mock scores are identical everywhere.
STOP_WORDS = frozenset(
    """
    a an the and or but if then than that this these those there here
    it its he she his her him they them their theirs we you i me my
    your our us is are was were be been being am do does did done
    has have had having will would can could shall should may might
    must of in on at by for with to from into onto over under up
    down about as so not no nor too very also own same such only
    who whom whose which what when where why how all any both each
    few more most other some one s t
    """.split()
)

ENTAILED = (0.98, 0.01, 0.01)
NOT_ENTAILED = (0.02, 0.49, 0.49)

_STRIP = string.punctuation


@dataclass(frozen=True)
class NliScore:
    entail: float
    neutral: float
    contradict: float

    def __post_init__(self):
        for name, p in (
            ("entail", self.entail),
            ("neutral", self.neutral),
            ("contradict", self.contradict),
        ):
            if not 0.0 <= p <= 1.0:
                raise NliScoreError(f"{name} probability {p} outside [0, 1]")
        total = self.entail + self.neutral + self.contradict
        if abs(total - 1.0) > 1e-9:
            raise NliScoreError(f"scores sum to {total}, not 1")


@dataclass
class NliConfig:
    tau: float = 0.95
    backend: str = "mock"  # mock | remote
    batch_size: int = 32
    remote_url: str | None = None
    max_retries: int = 2
    timeout: float = 10.0
    cache_path: str | None = None

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.backend not in ("mock", "remote"):
            raise ConfigError(f"unknown backend {self.backend!r}")


def normalize_tokens(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation at token edges."""
    out = []
    for tok in text.lower().split():
        tok = tok.strip(_STRIP)
        if tok:
            out.append(tok)
    return out


def content_tokens(text: str) -> list[str]:
    return [t for t in normalize_tokens(text) if t not in STOP_WORDS]


def _is_subsequence(needle: Sequence[str], haystack: Sequence[str]) -> bool:
    it = iter(haystack)
    return all(tok in it for tok in needle)


class NliEngine:
    """Backend interface; score() must be safe for concurrent callers."""

    def score(self, premise: str, hypothesis: str) -> NliScore:
        raise NotImplementedError

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        return [self.score(p, h) for p, h in pairs]


class MockNliEngine(NliEngine):
    """Pure containment rule; bit-identical output for identical input."""

    def score(self, premise: str, hypothesis: str) -> NliScore:
        if not premise or not hypothesis:
            raise ValueError("premise and hypothesis must be non-empty")
        if _is_subsequence(content_tokens(hypothesis), normalize_tokens(premise)):
            return NliScore(*ENTAILED)
        return NliScore(*NOT_ENTAILED)


class RemoteNliEngine(NliEngine):
    """Client for the POST /nli wire contract.

    Requests are chunked to ``batch_size`` pairs; transient transport
    failures are retried a bounded number of times. Scores are cached
    across runs only when a cache file is configured.
    """

    def __init__(self, config: NliConfig):
        if not config.remote_url:
            raise ConfigError("remote backend requires remote_url")
        self.url = config.remote_url.rstrip("/")
        self.batch_size = config.batch_size
        self.max_retries = config.max_retries
        self.timeout = config.timeout
        self.cache_path = config.cache_path
        self._cache: dict[tuple[str, str], NliScore] = {}
        if self.cache_path:
            self._load_cache()

    def _load_cache(self):
        try:
            fh = open(self.cache_path, encoding="utf-8")
        except FileNotFoundError:
            return
        with fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                self._cache[(row["premise"], row["hypothesis"])] = NliScore(
                    row["entail"], row["neutral"], row["contradict"]
                )

    def _append_cache(self, pairs, scores):
        with open(self.cache_path, "a", encoding="utf-8") as fh:
            for (premise, hypothesis), sc in zip(pairs, scores):
                fh.write(
                    json.dumps(
                        {
                            "premise": premise,
                            "hypothesis": hypothesis,
                            "entail": sc.entail,
                            "neutral": sc.neutral,
                            "contradict": sc.contradict,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )

    def health(self) -> bool:
        try:
            resp = requests.get(f"{self.url}/health", timeout=self.timeout)
            return resp.status_code == 200 and resp.json().get("status") == "ok"
        except (requests.RequestException, ValueError):
            return False

    def _post(self, payload: dict) -> dict:
        last_exc = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = requests.post(
                    f"{self.url}/nli", json=payload, timeout=self.timeout
                )
            except requests.RequestException as e:
                last_exc = e
                if attempt < self.max_retries:
                    time.sleep(0.1 * (attempt + 1))
                continue
            if resp.status_code != 200:
                raise NliResponseError(
                    f"service returned HTTP {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()
            except ValueError as e:
                raise NliResponseError(f"non-JSON response: {e}") from e
        raise NliTransportError(f"service unreachable after retries: {last_exc}")

    @staticmethod
    def _parse_score(raw) -> NliScore:
        try:
            e, n, c = (
                float(raw["entail"]),
                float(raw["neutral"]),
                float(raw["contradict"]),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise NliResponseError(f"malformed score entry {raw!r}") from err
        if min(e, n, c) < 0.0:
            raise NliScoreError(f"negative probability in {raw!r}")
        total = e + n + c
        if abs(total - 1.0) > 1e-6:
            raise NliScoreError(f"scores sum to {total}, not 1: {raw!r}")
        # Renormalize the service's 1e-6 tolerance down to machine precision.
        return NliScore(e / total, n / total, c / total)

    def score(self, premise: str, hypothesis: str) -> NliScore:
        return self.score_batch([(premise, hypothesis)])[0]

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        results: list[NliScore | None] = [None] * len(pairs)
        missing = []
        for i, pair in enumerate(pairs):
            cached = self._cache.get(pair)
            if cached is not None:
                results[i] = cached
            else:
                missing.append(i)
        for start in range(0, len(missing), self.batch_size):
            chunk = missing[start : start + self.batch_size]
            payload = {
                "pairs": [
                    {"premise": pairs[i][0], "hypothesis": pairs[i][1]}
                    for i in chunk
                ]
            }
            body = self._post(payload)
            raw_scores = body.get("scores")
            if not isinstance(raw_scores, list) or len(raw_scores) != len(chunk):
                raise NliResponseError(
                    f"expected {len(chunk)} scores, got {raw_scores!r}"
                )
            parsed = [self._parse_score(raw) for raw in raw_scores]
            for i, sc in zip(chunk, parsed):
                results[i] = sc
            if self.cache_path:
                self._append_cache([pairs[i] for i in chunk], parsed)
                for i, sc in zip(chunk, parsed):
                    self._cache[pairs[i]] = sc
        return results  # type: ignore[return-value]


def make_engine(config: NliConfig) -> NliEngine:
    if config.backend == "mock":
        return MockNliEngine()
    return RemoteNliEngine(config)


def generate_hypothesis(
    template: Template | str, subj: EntityMention, obj: EntityMention
) -> str:
    """Substitute the placeholders with the actual entity surfaces."""
    text = template.text if isinstance(template, Template) else template
    validate_placeholders(text)
    return text.replace(SUBJ_SLOT, subj.surface).replace(OBJ_SLOT, obj.surface)


def check_type_constraint(
    schema: RelationSchema, relation_id: str, subj_ner: str, obj_ner: str
) -> bool:
    return (subj_ner, obj_ner) in schema.get(relation_id).ner_constraints


def relation_probability(
    instance: Instance,
    relation_id: str,
    templates: TemplateSet,
    engine: NliEngine,
    schema: RelationSchema,
    corpus: Corpus,
) -> float:
    """Type gate times the best entailment probability over the template set."""
    if not check_type_constraint(
        schema, relation_id, instance.subj.ner_type, instance.obj.ner_type
    ):
        return 0.0
    premise = corpus.sentence_text(instance)
    pairs = [
        (premise, generate_hypothesis(t, instance.subj, instance.obj))
        for t in templates.templates
    ]
    return max(sc.entail for sc in engine.score_batch(pairs))


def infer_relation(
    instance: Instance,
    schema: RelationSchema,
    template_sets: dict[str, TemplateSet],
    engine: NliEngine,
    config: NliConfig,
    corpus: Corpus,
) -> str:
    """Highest-probability relation, or NA below the threshold.

    Equal probabilities resolve to the earliest declared relation.
    """
    best, best_p = NA, -1.0
    for rid in schema.ids():
        p = relation_probability(
            instance, rid, template_sets[rid], engine, schema, corpus
        )
        if p > best_p:
            best, best_p = rid, p
    if best_p < config.tau:
        return NA
    return best


def indirect_annotate(
    corpus: Corpus,
    schema: RelationSchema,
    template_sets: dict[str, TemplateSet],
    engine: NliEngine,
    config: NliConfig,
    instances: Iterable[Instance] | None = None,
) -> AnnotationSet:
    """Zero-shot-label every instance; results are scheduling-independent."""
    labels: dict[str, str] = {}
    for inst in corpus.instances if instances is None else instances:
        labels[inst.key()] = infer_relation(
            inst, schema, template_sets, engine, config, corpus
        )
    return AnnotationSet(Source.IS, labels)

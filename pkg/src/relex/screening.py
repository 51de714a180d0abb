"""Human screening of grouped patterns, with a crash-safe decision journal.

Candidates are the pruned patterns at or above the screening frequency
floor, ranked by group frequency. One annotator works a relation at a
time; every decision is appended to a JSON Lines journal before the call
returns, so a crashed or refreshed session resumes exactly where it was.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from typing import Optional

from .corpus import Corpus
from .errors import DecisionConflictError, ScreeningError
from .patterns import Pattern, PatternConfig, PatternSet, Stage
from .schema import Provenance, Template, TemplateSet

ACCEPT = "accept"
REJECT = "reject"
SKIP = "skip"
FINAL_DECISIONS = (ACCEPT, REJECT)


@dataclass
class Candidate:
    pattern: Pattern
    example: Optional[dict]  # sentence payload for display, if resolvable

    def to_payload(self) -> dict:
        return {
            "pattern": self.pattern.text(),
            "tokens": list(self.pattern.tokens),
            "frequency": self.pattern.frequency,
            "example": self.example,
        }


class ScreeningSession:
    """Single-writer screening state for one relation."""

    def __init__(
        self,
        pruned: PatternSet,
        config: PatternConfig,
        journal_path,
        corpus: Corpus | None = None,
    ):
        if pruned.stage is not Stage.PRUNED:
            raise ScreeningError(
                f"screening expects a pruned set, got {pruned.stage.value}"
            )
        self.relation_id = pruned.relation_id
        self.journal_path = journal_path
        self.corpus = corpus
        self.candidates = sorted(
            (p for p in pruned.patterns if p.frequency >= config.min_screening_frequency),
            key=lambda p: (-p.frequency, len(p), p.text()),
        )
        self._by_text = {p.text(): p for p in self.candidates}
        self.decisions: dict[str, str] = {}
        self.skipped: set[str] = set()
        self.surfaced: set[str] = set()
        self.closed = False
        self._replay_journal()

    def _replay_journal(self):
        if not os.path.exists(self.journal_path):
            return
        with open(self.journal_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                if row.get("relation") != self.relation_id:
                    continue
                text, decision = row["pattern"], row["decision"]
                if text not in self._by_text:
                    continue
                self.surfaced.add(text)
                if decision in FINAL_DECISIONS:
                    self.decisions[text] = decision
                    self.skipped.discard(text)
                elif decision == SKIP:
                    self.skipped.add(text)

    def _journal(self, pattern_text: str, decision: str):
        row = {
            "relation": self.relation_id,
            "pattern": pattern_text,
            "decision": decision,
            "timestamp": time.time(),
        }
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _example_payload(self, pattern: Pattern) -> Optional[dict]:
        if self.corpus is None:
            return None
        for key in pattern.example_instance_keys:
            try:
                inst = self.corpus.instance(key)
            except KeyError:
                continue
            sentence = self.corpus.sentence(inst.sentence_id)
            return {
                "sentence_id": sentence.id,
                "tokens": list(sentence.tokens),
                "subj_span": [inst.subj.start, inst.subj.end],
                "obj_span": [inst.obj.start, inst.obj.end],
            }
        return None

    def progress(self) -> dict:
        return {
            "decided": len(self.decisions),
            "total": len(self.candidates),
            "accepted": sum(1 for d in self.decisions.values() if d == ACCEPT),
        }

    def next(self) -> Optional[Candidate]:
        """Highest-ranked candidate without a final decision, or None.

        Skipped candidates re-surface only after everything unskipped is
        decided.
        """
        pending = [p for p in self.candidates if p.text() not in self.decisions]
        if not pending:
            return None
        unskipped = [p for p in pending if p.text() not in self.skipped]
        chosen = (unskipped or pending)[0]
        self.surfaced.add(chosen.text())
        return Candidate(chosen, self._example_payload(chosen))

    def decide(self, pattern_text: str, decision: str):
        if decision not in (*FINAL_DECISIONS, SKIP):
            raise ScreeningError(f"unknown decision {decision!r}")
        if pattern_text not in self._by_text:
            raise ScreeningError(
                f"pattern {pattern_text!r} is not a screening candidate"
            )
        if pattern_text not in self.surfaced:
            raise ScreeningError(f"pattern {pattern_text!r} has not been surfaced yet")
        if pattern_text in self.decisions:
            raise DecisionConflictError(
                f"pattern {pattern_text!r} already decided "
                f"({self.decisions[pattern_text]})"
            )
        self._journal(pattern_text, decision)
        if decision == SKIP:
            self.skipped.add(pattern_text)
        else:
            self.decisions[pattern_text] = decision
            self.skipped.discard(pattern_text)

    def done(self) -> bool:
        return all(p.text() in self.decisions for p in self.candidates)

    def close(self):
        self.closed = True

    def accepted_patterns(self) -> list[Pattern]:
        return [p for p in self.candidates if self.decisions.get(p.text()) == ACCEPT]

    def finalize(self, general: Template) -> TemplateSet:
        """General template plus accepted patterns, in screening rank order.

        The general template is always present, so the set is never empty
        even when nothing was accepted.
        """
        if not (self.done() or self.closed):
            raise ScreeningError(
                "screening is not complete; decide remaining candidates or close"
            )
        templates = [Template(general.text, Provenance.GENERAL)]
        templates += [
            Template(p.text(), Provenance.MINED) for p in self.accepted_patterns()
        ]
        return TemplateSet(self.relation_id, templates)


def screening_next(session: ScreeningSession) -> Optional[Candidate]:
    if session is None:
        raise ScreeningError("screening session not initialized")
    return session.next()


def screening_decide(
    session: ScreeningSession, pattern_text: str, decision: str
) -> ScreeningSession:
    if session is None:
        raise ScreeningError("screening session not initialized")
    session.decide(pattern_text, decision)
    return session


def finalize_templates(session: ScreeningSession, general: Template) -> TemplateSet:
    if session is None:
        raise ScreeningError("screening session not initialized")
    return session.finalize(general)

"""Relation schema: verbalization templates and NER type constraints."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError, TemplateError, UnknownRelationError

SUBJ_SLOT = "{subj}"
OBJ_SLOT = "{obj}"


class Provenance(str, Enum):
    GENERAL = "general"
    MINED = "mined"


@dataclass(frozen=True)
class Template:
    text: str
    provenance: Provenance = Provenance.GENERAL

    def __post_init__(self):
        validate_placeholders(self.text)


def validate_placeholders(text: str) -> None:
    """A template must contain exactly one {subj} and one {obj}."""
    for slot in (SUBJ_SLOT, OBJ_SLOT):
        n = text.count(slot)
        if n != 1:
            raise TemplateError(
                f"template {text!r} has {n} occurrences of {slot}, expected 1"
            )


@dataclass
class TemplateSet:
    relation_id: str
    templates: list[Template]

    def __post_init__(self):
        if not self.templates:
            raise ConfigError(f"relation {self.relation_id}: empty template set")
        generals = [t for t in self.templates if t.provenance is Provenance.GENERAL]
        if len(generals) != 1:
            raise ConfigError(
                f"relation {self.relation_id}: expected exactly one general "
                f"template, got {len(generals)}"
            )

    def general(self) -> Template:
        return next(t for t in self.templates if t.provenance is Provenance.GENERAL)

    def mined(self) -> list[Template]:
        return [t for t in self.templates if t.provenance is Provenance.MINED]


@dataclass
class RelationSpec:
    id: str
    general_template: Template
    ner_constraints: frozenset[tuple[str, str]]

    def __post_init__(self):
        if not self.ner_constraints:
            raise ConfigError(f"relation {self.id}: empty NER constraint set")

    def primary_constraint(self) -> tuple[str, str]:
        """Deterministic representative pair, used to pick pattern fillers."""
        return sorted(self.ner_constraints)[0]


class RelationSchema:
    """Declared relations, in declaration order (order breaks inference ties)."""

    def __init__(self, relations: list[RelationSpec]):
        self.relations = relations
        self._by_id = {r.id: r for r in relations}
        if len(self._by_id) != len(relations):
            raise ConfigError("duplicate relation ids in schema")

    def __len__(self) -> int:
        return len(self.relations)

    def ids(self) -> list[str]:
        return [r.id for r in self.relations]

    def get(self, relation_id: str) -> RelationSpec:
        try:
            return self._by_id[relation_id]
        except KeyError:
            raise UnknownRelationError(f"unknown relation {relation_id!r}") from None

    def general_template_sets(self) -> dict[str, TemplateSet]:
        """One-template sets from the general templates only."""
        return {
            r.id: TemplateSet(r.id, [r.general_template]) for r in self.relations
        }


def load_schema(path) -> RelationSchema:
    """Read a schema JSON file.

    Layout::

        {"relations": [{"id": "founders",
                        "general_template": "{subj} was founded by {obj}",
                        "ner_constraints": [["ORGANIZATION", "PERSON"]]}, ...]}
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        raw = data["relations"]
    except (KeyError, TypeError) as e:
        raise ConfigError(f"{path}: missing 'relations' list") from e
    relations = []
    for entry in raw:
        try:
            rid = entry["id"]
            template = Template(entry["general_template"], Provenance.GENERAL)
            constraints = frozenset(
                (pair[0], pair[1]) for pair in entry["ner_constraints"]
            )
        except (KeyError, TypeError, IndexError) as e:
            raise ConfigError(f"{path}: bad relation entry {entry!r}: {e}") from e
        relations.append(RelationSpec(rid, template, constraints))
    return RelationSchema(relations)


def save_template_set(ts: TemplateSet, path) -> None:
    doc = {
        "relation": ts.relation_id,
        "general": ts.general().text,
        "mined": [t.text for t in ts.mined()],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_template_set(path) -> TemplateSet:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    templates = [Template(doc["general"], Provenance.GENERAL)]
    templates += [Template(t, Provenance.MINED) for t in doc.get("mined", [])]
    return TemplateSet(doc["relation"], templates)

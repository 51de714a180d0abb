#!/usr/bin/env python3
"""Regenerate the bundled fixture corpora under fixtures/.

The generator is fully deterministic: entity surfaces come from fixed
pools, and every sentence family is emitted with fixed counts. Four
relations are covered, each with four kinds of sentences:

* template form: phrased like the relation's general template
* pattern form: a distinct phrasing (plus a longer paraphrase of it)
* noise: the entity pair co-occurs without expressing the relation
* unknown pair: template form, but the pair is left out of the KB

Popular pairs appear in several sentences (template + noise), unknown
pairs in exactly one, which gives the long-tail profile the noise
simulation needs. The KB covers popular pairs only.
"""

from __future__ import annotations

import json
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

PERSON_FIRST = (
    "Ana Bruno Cora Dev Edda Femi Greta Hugo Iris Janek Keiko Luca Mara "
    "Nils Oriol Priya Quino Rika Samir Tess Umar Vida Wanda Ximena Yanis Zora"
).split()
PERSON_LAST = (
    "Reyes Lindqvist Mensah Park Varga Okafor Brandt Sato Moreau Kovacs "
    "Duarte Ekwueme Farrow Gillan Haddad Iversen Joshi Keller Lombard Mbeki "
    "Novak Oyelaran Pereira Quist Ramos Solberg"
).split()
ORG_STEM = (
    "Acme Globex Initech Vantor Quellon Zephyr Marlowe Halcyon Bluepeak "
    "Ironwood Lumen Cobalt Nimbus Harbor Atlas Crestline Fernway Solent "
    "Tidewater Westbrook"
).split()
ORG_SUFFIX = "Corp Group Labs Systems Media Holdings Partners Industries".split()
CITY = (
    "Avoria Brellin Cadoma Dorvik Elmstad Faroway Gavelton Hestia Ivorun "
    "Jarnby Kelvas Lorvena Maridel Norvale Ostrand Pellamy Quorest Ravelin "
    "Selmora Torvane Ulverta Vendale Wrenholt Xanthe Yorvell Zelmira"
).split()
COUNTRY = (
    "Norland Vestara Quorria Ambria Belgrana Corvana Delmira Estovia Frellia "
    "Gandara Hollvet Istrya Jorland Kestria Lumara Morvena Nordavia Ostravia "
    "Pelloria Questan Rovenia Selvora Turinia Umbrata Velmora Wrenia"
).split()


def person(i: int) -> str:
    return f"{PERSON_FIRST[i % 26]} {PERSON_LAST[(i + i // 26) % 26]}"


def org(i: int) -> str:
    return f"{ORG_STEM[i % 20]} {ORG_SUFFIX[(i + i // 20) % 8]}"


def compose(*segments):
    """Assemble tokens from plain strings and (surface, ner, role) mentions."""
    tokens, mentions = [], {}
    for seg in segments:
        if isinstance(seg, tuple):
            surface, ner, role = seg
            start = len(tokens)
            tokens.extend(surface.split())
            mentions[role] = (start, len(tokens), ner)
        else:
            tokens.extend(seg.split())
    return tokens, mentions


class Builder:
    def __init__(self):
        self.sentences = []
        self.gold = {}  # (sentence_id, subj_span, obj_span) -> label

    def add(self, sid: str, segments, label: str | None):
        tokens, mentions = compose(*segments)
        self.sentences.append(
            {
                "id": sid,
                "tokens": tokens,
                "mentions": [
                    {"start": s, "end": e, "ner": ner}
                    for s, e, ner in sorted(mentions.values())
                ],
            }
        )
        if label is not None:
            subj, obj = mentions["subj"], mentions["obj"]
            key = f"{sid}|{subj[0]}:{subj[1]}|{obj[0]}:{obj[1]}"
            self.gold[key] = label

    def gold_rows(self):
        """One row per enumerated instance; everything unlabeled is NA."""
        rows = []
        for sentence in self.sentences:
            ms = [(m["start"], m["end"]) for m in sentence["mentions"]]
            for a in ms:
                for b in ms:
                    if a == b or (a[0] < b[1] and b[0] < a[1]):
                        continue
                    key = f"{sentence['id']}|{a[0]}:{a[1]}|{b[0]}:{b[1]}"
                    rows.append(
                        {"instance_key": key, "label": self.gold.get(key, "NA")}
                    )
        return rows


# Sentence families. Each builds segments for compose(); the subj/obj
# roles follow the relation schema, not sentence order. The variant index
# cycles through trailing clauses so repeated pairs do not produce
# verbatim-identical sentences.

def founders_sentences(b, sid, kind, o, p, v=0):
    O = (o, "ORGANIZATION", "subj")
    P = (p, "PERSON", "obj")
    tails = [".", "in 1987 .", ", filings show .", "decades ago ."]
    spoke = [", spoke on Monday .", ", spoke on Friday .", ", retired last spring ."]
    if kind == "template":
        b.add(sid, [O, "was founded by", P, tails[v % 4]], "founders")
    elif kind == "pattern":
        b.add(sid, [P, ", a co-founder of", O, spoke[v % 3]], "founders")
    elif kind == "pattern_long":
        b.add(sid, [P, ", a co-founder of the giant", O, spoke[v % 3]], "founders")
    elif kind == "noise":
        phrasing = [
            [P, "visited the", O, "offices in March ."],
            [P, "praised the", O, "earnings report ."],
            [P, "toured a", O, "warehouse with reporters ."],
        ][v]
        b.add(sid, phrasing, None)


def works_for_sentences(b, sid, kind, p, o, v=0):
    P = (p, "PERSON", "subj")
    O = (o, "ORGANIZATION", "obj")
    tails = [".", "as an engineer .", ", records indicate .", "these days ."]
    said = ["said the results were strong .", "said margins improved .", "briefed the board ."]
    if kind == "template":
        b.add(sid, [P, "works for", O, tails[v % 4]], "works_for")
    elif kind == "pattern":
        b.add(sid, [O, "analyst", P, said[v % 3]], "works_for")
    elif kind == "pattern_long":
        b.add(sid, [O, "senior analyst", P, said[v % 3]], "works_for")
    elif kind == "noise":
        phrasing = [
            [P, "toured the", O, "campus on Tuesday ."],
            [P, "criticized the", O, "strategy in an interview ."],
            [P, "attended a", O, "reception downtown ."],
        ][v]
        b.add(sid, phrasing, None)


def citizen_sentences(b, sid, kind, p, c, v=0):
    P = (p, "PERSON", "subj")
    C = (c, "LOCATION", "obj")
    tails = [".", "by birth .", ", records indicate .", "according to the registry ."]
    announced = ["announced the reforms .", "announced new measures .", "opened the assembly ."]
    if kind == "template":
        b.add(sid, [P, "is a citizen of", C, tails[v % 4]], "citizen_of")
    elif kind == "pattern":
        b.add(sid, [C, "president", P, announced[v % 3]], "citizen_of")
    elif kind == "pattern_long":
        b.add(sid, [C, "former president", P, announced[v % 3]], "citizen_of")
    elif kind == "noise":
        phrasing = [
            [P, "landed in", C, "on Friday ."],
            [P, "filmed a documentary across", C, "."],
            [P, "addressed reporters in", C, "yesterday ."],
        ][v]
        b.add(sid, phrasing, None)


def capital_sentences(b, sid, kind, y, c, v=0):
    Y = (y, "LOCATION", "subj")
    C = (c, "LOCATION", "obj")
    tails = [".", "and its largest city .", ", atlases note .", "by statute ."]
    hosted = [", hosted the summit .", ", hosted the delegates .", ", welcomed the envoys ."]
    if kind == "template":
        b.add(sid, [Y, "is the capital of", C, tails[v % 4]], "capital_of")
    elif kind == "pattern":
        b.add(sid, [C, "'s seat of government ,", Y, hosted[v % 3]], "capital_of")
    elif kind == "pattern_long":
        b.add(sid, [C, "'s historic seat of government ,", Y, hosted[v % 3]], "capital_of")
    elif kind == "noise":
        phrasing = [
            [Y, "and", C, "signed a trade accord ."],
            [Y, "markets reopened while", C, "celebrated ."],
            [Y, "reported heavy rain while", C, "voted ."],
        ][v]
        b.add(sid, phrasing, None)


RELATIONS = {
    "founders": {
        "family": founders_sentences,
        "first": lambda i: org(i),
        "second": lambda i: person(i),
        "general": "{subj} was founded by {obj}",
        "constraints": [["ORGANIZATION", "PERSON"]],
    },
    "works_for": {
        "family": works_for_sentences,
        "first": lambda i: person(7 + i),
        "second": lambda i: org(7 + i),
        "general": "{subj} works for {obj}",
        "constraints": [["PERSON", "ORGANIZATION"]],
    },
    "citizen_of": {
        "family": citizen_sentences,
        "first": lambda i: person(14 + i),
        "second": lambda i: COUNTRY[i],
        "general": "{subj} is a citizen of {obj}",
        "constraints": [["PERSON", "LOCATION"]],
    },
    "capital_of": {
        "family": capital_sentences,
        "first": lambda i: CITY[i],
        "second": lambda i: COUNTRY[7 + i],
        "general": "{subj} is the capital of {obj}",
        "constraints": [["LOCATION", "LOCATION"]],
    },
}

POPULAR, UNKNOWN = range(0, 4), range(4, 7)


def build_train():
    b = Builder()
    kb = []
    for rid, spec in RELATIONS.items():
        fam, tag = spec["family"], rid[:3]
        pair = lambda i: (spec["first"](i), spec["second"](i))
        for i in POPULAR:
            subj, obj = pair(i)
            kb.append((subj, obj, rid))
        n = 0
        for i in (0, 0, 0, 0, 0, 1, 1, 1, 1, 1):  # template x10 over two pairs
            fam(b, f"{tag}-t-{n:03d}", "template", *pair(i), v=n)
            n += 1
        for i in (2, 2, 2, 2, 3, 3, 3, 3):  # pattern x8
            fam(b, f"{tag}-p-{n:03d}", "pattern", *pair(i), v=n)
            n += 1
        for i in (2, 2, 3, 3):  # longer paraphrase x4
            fam(b, f"{tag}-p-{n:03d}", "pattern_long", *pair(i), v=n)
            n += 1
        for v in range(3):  # noise x12: three phrasings over popular pairs
            for i in POPULAR:
                fam(b, f"{tag}-n-{n:03d}", "noise", *pair(i), v=v)
                n += 1
        for i in UNKNOWN:  # template form, pair absent from the KB
            fam(b, f"{tag}-u-{n:03d}", "template", *pair(i), v=n)
            n += 1
    add_na_filler(b, train=True)
    return b, kb


def build_test():
    b = Builder()
    for rid, spec in RELATIONS.items():
        fam, tag = spec["family"], rid[:3]
        pair = lambda i, j: (spec["first"](i), spec["second"](j))
        n = 0
        for i in range(5):
            fam(b, f"{tag}-T-{n:03d}", "template", *pair(i, (i + 1) % 7), v=n)
            n += 1
        for i in range(3):
            fam(b, f"{tag}-T-{n:03d}", "pattern", *pair(i, (i + 2) % 7), v=n)
            n += 1
        for i in (5, 6):  # template form over held-out entities
            fam(b, f"{tag}-T-{n:03d}", "template", *pair(i, (i + 3) % 7), v=n)
            n += 1
        for v in range(3):
            for i in (0, 1):
                fam(b, f"{tag}-N-{n:03d}", "noise", *pair(i + v, (i + v + 4) % 7), v=v)
                n += 1
    add_na_filler(b, train=False)
    return b


def add_na_filler(b, train: bool):
    """Unrelated pairs in neutral contexts; all instances are gold NA."""
    if train:
        for k in range(26):
            b.add(
                f"na-p-{k:03d}",
                [
                    (person(k), "PERSON", "m1"),
                    "met",
                    (person(26 + k), "PERSON", "m2"),
                    ["during a panel discussion .", "at a charity auction .",
                     "before the keynote ."][k % 3],
                ],
                None,
            )
        for k in range(22):
            b.add(
                f"na-o-{k:03d}",
                [
                    (org(20 + k), "ORGANIZATION", "m1"),
                    "and",
                    (org(42 + k), "ORGANIZATION", "m2"),
                    ["agreed to a joint venture .", "renewed a supply agreement .",
                     "ended a licensing dispute ."][k % 3],
                ],
                None,
            )
        for k in range(4):
            b.add(
                f"na-3-{k:03d}",
                [
                    (person(52 + k), "PERSON", "m1"),
                    "joined",
                    (org(64 + k), "ORGANIZATION", "m2"),
                    "and",
                    (org(86 + k), "ORGANIZATION", "m3"),
                    "executives for dinner .",
                ],
                None,
            )
    else:
        for k in range(6):
            b.add(
                f"na-P-{k:03d}",
                [
                    (person(30 + k), "PERSON", "m1"),
                    "met",
                    (person(56 + k), "PERSON", "m2"),
                    ["during a panel discussion .", "at a charity auction .",
                     "before the keynote ."][k % 3],
                ],
                None,
            )


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def main():
    FIXTURES.mkdir(exist_ok=True)
    train, kb = build_train()
    test = build_test()

    write_jsonl(FIXTURES / "train.jsonl", train.sentences)
    write_jsonl(FIXTURES / "gold_train.jsonl", train.gold_rows())
    write_jsonl(FIXTURES / "test.jsonl", test.sentences)
    write_jsonl(FIXTURES / "gold_test.jsonl", test.gold_rows())

    with open(FIXTURES / "kb.tsv", "w", encoding="utf-8") as fh:
        for subj, obj, rid in kb:
            fh.write(f"{subj}\t{rid}\t{obj}\n")

    schema = {
        "relations": [
            {
                "id": rid,
                "general_template": spec["general"],
                "ner_constraints": spec["constraints"],
            }
            for rid, spec in RELATIONS.items()
        ]
    }
    (FIXTURES / "schema.json").write_text(json.dumps(schema, indent=2) + "\n")

    config = {
        "corpus": "train.jsonl",
        "kb": "kb.tsv",
        "schema": "schema.json",
        "gold": "gold_train.jsonl",
        "eval_corpus": "test.jsonl",
        "eval_gold": "gold_test.jsonl",
        "workdir": "work",
        "strategy": "npin",
        "seed": 13,
        "target_fn_rate": 0.05,
        "mining": {"top_fraction": 1.0, "min_screening_frequency": 10},
        "nli": {"tau": 0.95, "backend": "mock"},
        "classifier": {
            "mode": "EM",
            "hash_dim": 4096,
            "learning_rate": 0.5,
            "epochs": 150,
            "l2": 0.0001,
        },
    }
    (FIXTURES / "config.json").write_text(json.dumps(config, indent=2) + "\n")

    print(f"train: {len(train.sentences)} sentences, {len(train.gold_rows())} instances")
    print(f"test:  {len(test.sentences)} sentences, {len(test.gold_rows())} instances")
    print(f"kb:    {len(kb)} triples")


if __name__ == "__main__":
    main()

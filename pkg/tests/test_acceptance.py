"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a PASS/FAIL line via the hook in conftest. The checks are
property-based (randomized inputs against independent brute-force oracles)
plus arithmetic reproduction of the frozen reference statistics; headline
benchmark scores are out of scope by design.
"""

import itertools
import json
import random
import shutil
import time
from pathlib import Path

import pytest

from relex.classifier import Mode, TrainConfig, predict_corpus, train
from relex.cli import EXIT_OK, main
from relex.consolidate import ipin, npin
from relex.corpus import (
    NA,
    AnnotationSet,
    Corpus,
    EntityMention,
    Sentence,
    Source,
    distant_annotate,
    load_annotations,
    load_corpus,
    load_kb,
    save_annotations,
)
from relex.evaluation import evaluate
from relex.nli import MockNliEngine, NliConfig, indirect_annotate, infer_relation
from relex.noise import NoiseReport, inject_fn, inject_fp, noise_stats
from relex.patterns import Pattern, PatternSet, Stage, group_patterns
from relex.schema import Provenance, Template, TemplateSet, load_schema

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
TAU = 0.95


# --------------------------------------------------------------------------
# Grouping properties on randomized synthetic pattern sets
# --------------------------------------------------------------------------

CONTENT_WORDS = "founder chief editor president envoy curator manager patron".split()
STOP_WORDS_POOL = "the a of was by and in".split()


def random_pattern_set(rng: random.Random) -> PatternSet:
    patterns = {}
    for _ in range(rng.randint(2, 20)):
        middle = [
            rng.choice(CONTENT_WORDS if rng.random() < 0.5 else STOP_WORDS_POOL)
            for _ in range(rng.randint(0, 6))
        ]
        slots = ("{subj}", "{obj}") if rng.random() < 0.5 else ("{obj}", "{subj}")
        tokens = (slots[0], *middle, slots[1])
        patterns.setdefault(tokens, rng.randint(1, 30))
    return PatternSet(
        "r", [Pattern(t, f) for t, f in patterns.items()], Stage.INITIAL
    )


def test_grouping_properties_hold_on_1000_random_sets():
    engine = MockNliEngine()
    rng = random.Random(20240811)
    start = time.monotonic()
    for _ in range(1000):
        ps = random_pattern_set(rng)
        grouped = group_patterns(ps, engine, TAU)
        # Frequency conservation is exact.
        assert grouped.total_frequency() == ps.total_frequency()
        representative_texts = {p.text() for p in grouped.patterns}
        for rep in grouped.patterns:
            # The representative is the minimum-length member of its group.
            assert all(len(rep.tokens) <= len(m.split()) for m in rep.members)
            # Absorbed patterns never become leaders.
            assert not representative_texts & set(rep.members)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"grouping 1000 sets took {elapsed:.1f}s"


def test_grouping_hand_trace_matches_worked_example():
    ps = PatternSet(
        "r",
        [
            Pattern(tuple("{subj} founder {obj}".split()), 5),
            Pattern(tuple("{subj} , founder of {obj}".split()), 4),
            Pattern(tuple("{subj} chief executive {obj}".split()), 3),
        ],
        Stage.INITIAL,
    )
    grouped = group_patterns(ps, MockNliEngine(), TAU)
    assert {(p.text(), p.frequency) for p in grouped.patterns} == {
        ("{subj} founder {obj}", 9),
        ("{subj} chief executive {obj}", 3),
    }


def test_grouping_reduces_paraphrase_seeded_fixture_by_half():
    bases = "founder president editor owner chairman envoy curator patron".split()
    patterns = []
    for i, word in enumerate(bases):
        patterns.append(Pattern(tuple(f"{{subj}} {word} {{obj}}".split()), 12 + i))
        patterns.append(Pattern(tuple(f"{{subj}} , {word} of {{obj}}".split()), 4))
        patterns.append(Pattern(tuple(f"{{subj}} , the {word} of {{obj}}".split()), 3))
        patterns.append(Pattern(tuple(f"{{subj}} is a {word} of the {{obj}}".split()), 2))
        patterns.append(Pattern(tuple(f"{{subj}} , who was a {word} of {{obj}}".split()), 1))
    ps = PatternSet("r", patterns, Stage.INITIAL)
    grouped = group_patterns(ps, MockNliEngine(), TAU)
    assert len(ps.patterns) == 40
    assert len(grouped.patterns) <= len(ps.patterns) // 2
    assert grouped.total_frequency() == ps.total_frequency()


# --------------------------------------------------------------------------
# Consolidation set identities
# --------------------------------------------------------------------------

def test_consolidation_identities_on_500_random_universes():
    rng = random.Random(4242)
    relations = ["r1", "r2", "r3", "r4"]
    for _ in range(500):
        keys = [f"i{n}" for n in range(rng.randint(1, 60))]
        pool = relations[: rng.randint(1, 4)] + [NA, NA]
        ds = AnnotationSet(Source.DS, {k: rng.choice(pool) for k in keys})
        is_ = AnnotationSet(Source.IS, {k: rng.choice(pool) for k in keys})
        out_i, out_n = ipin(ds, is_), npin(ds, is_)
        for r in relations:
            assert out_i.positive_keys(r) == ds.positive_keys(r) & is_.positive_keys(r)
            assert out_n.positive_keys(r) == is_.positive_keys(r)
            assert out_i.positive_keys(r) <= out_n.positive_keys(r)
        expected_na = ds.na_keys() & is_.na_keys()
        assert out_i.na_keys() == expected_na
        assert out_n.na_keys() == expected_na


# --------------------------------------------------------------------------
# Noise-rate arithmetic against the frozen reference counts
# --------------------------------------------------------------------------

def test_noise_rates_reproduce_reference_statistics():
    # (tp, fp, tn, fn) -> expected fp_rate %, fn_rate % where defined.
    rows = [
        ((10256, 9838, 49090, 2756), 48.96, 5.32),
        ((4895, 898, 47519, 1499), 15.50, 3.06),
        ((6419, 3331, 47519, 1499), 34.16, 3.06),
    ]
    for counts, fp_pct, fn_pct in rows:
        report = NoiseReport(*counts)
        assert abs(report.fp_rate * 100 - fp_pct) < 0.01
        assert abs(report.fn_rate * 100 - fn_pct) < 0.01


# --------------------------------------------------------------------------
# Inference equals exhaustive grid evaluation
# --------------------------------------------------------------------------

def _fixture_world():
    corpus = load_corpus(FIXTURES / "train.jsonl")
    schema = load_schema(FIXTURES / "schema.json")
    template_sets = schema.general_template_sets()
    # Enrich two relations with mined-style templates so max() is exercised.
    template_sets["founders"] = TemplateSet(
        "founders",
        [
            schema.get("founders").general_template,
            Template("{obj} , a co-founder of {subj}", Provenance.MINED),
        ],
    )
    template_sets["works_for"] = TemplateSet(
        "works_for",
        [
            schema.get("works_for").general_template,
            Template("{obj} analyst {subj}", Provenance.MINED),
        ],
    )
    return corpus, schema, template_sets


def _grid_oracle(corpus, inst, schema, template_sets, engine, tau):
    """Exhaustive (relation, template) grid with threshold, written apart
    from the production inference path."""
    premise = corpus.sentence_text(inst)
    best, best_p = NA, -1.0
    for rid in schema.ids():
        spec = schema.get(rid)
        gate = (inst.subj.ner_type, inst.obj.ner_type) in spec.ner_constraints
        p = 0.0
        for t in template_sets[rid].templates:
            hyp = t.text.replace("{subj}", inst.subj.surface).replace(
                "{obj}", inst.obj.surface
            )
            p = max(p, engine.score(premise, hyp).entail)
        p = p if gate else 0.0
        if p > best_p:
            best, best_p = rid, p
    return best if best_p >= tau else NA


def test_inference_equals_grid_oracle_on_every_fixture_instance():
    corpus, schema, template_sets = _fixture_world()
    engine = MockNliEngine()
    config = NliConfig(tau=TAU)
    for inst in corpus.instances:
        oracle = _grid_oracle(corpus, inst, schema, template_sets, engine, TAU)
        got = infer_relation(inst, schema, template_sets, engine, config, corpus)
        assert got == oracle, inst.key()


def test_raising_tau_only_flips_predictions_to_na():
    corpus, schema, template_sets = _fixture_world()
    engine = MockNliEngine()
    taus = [0.5, 0.9, 0.98]
    previous = None
    for tau in taus:
        config = NliConfig(tau=tau)
        labels = {
            inst.key(): infer_relation(inst, schema, template_sets, engine, config, corpus)
            for inst in corpus.instances
        }
        if previous is not None:
            for key, label in labels.items():
                assert label == previous[key] or label == NA
        previous = labels


# --------------------------------------------------------------------------
# Noise simulation on the bundled gold fixture
# --------------------------------------------------------------------------

def _brute_force_pair_counts(corpus):
    counts = {}
    for sentence in corpus.sentences:
        seen = set()
        for a, b in itertools.combinations(sentence.mentions, 2):
            seen.add(tuple(sorted((a.surface, b.surface))))
        for pair in seen:
            counts[pair] = counts.get(pair, 0) + 1
    return counts


def test_fn_injection_hits_closest_achievable_rate():
    corpus = load_corpus(FIXTURES / "train.jsonl")
    gold = load_annotations(FIXTURES / "gold_train.jsonl", Source.GOLD)
    target = 0.05
    noisy, threshold = inject_fn(gold, corpus, target)

    counts = _brute_force_pair_counts(corpus)
    positives = [(k, lab) for k, lab in gold.items() if lab != NA]
    tn = len(gold.labels) - len(positives)

    def pair_count(key):
        inst = corpus.instance(key)
        return counts.get(tuple(sorted((inst.subj.surface, inst.obj.surface))), 0)

    achievable = {}
    for n in range(1, max(pair_count(k) for k, _ in positives) + 2):
        fn = sum(1 for k, _ in positives if pair_count(k) < n)
        achievable[n] = fn / (tn + fn) if (tn + fn) else 0.0
    best_distance = min(abs(rate - target) for rate in achievable.values())
    best_n = min(n for n, rate in achievable.items() if abs(rate - target) == best_distance)

    flipped = [k for k, lab in noisy.items() if lab == NA and gold.labels[k] != NA]
    achieved = len(flipped) / (tn + len(flipped))
    assert abs(achieved - target) == pytest.approx(best_distance)
    assert threshold == best_n
    assert all(pair_count(k) < threshold for k in flipped)


def test_fp_injection_relabels_exactly_shared_pair_instances():
    corpus = load_corpus(FIXTURES / "train.jsonl")
    gold = load_annotations(FIXTURES / "gold_train.jsonl", Source.GOLD)
    with_fn, _ = inject_fn(gold, corpus, 0.05)
    noisy = inject_fp(with_fn, corpus)

    positive_pairs = {}
    for key, label in with_fn.items():
        if label != NA:
            inst = corpus.instance(key)
            positive_pairs[(inst.subj.surface, inst.obj.surface)] = label
    for key, label in with_fn.items():
        inst = corpus.instance(key)
        expected = positive_pairs.get((inst.subj.surface, inst.obj.surface))
        if label == NA and expected is not None:
            assert noisy.labels[key] == expected
        else:
            assert noisy.labels[key] == label

    again = inject_fp(noisy, corpus)
    assert again.labels == noisy.labels  # idempotent


# --------------------------------------------------------------------------
# End-to-end directional check over the staged CLI
# --------------------------------------------------------------------------

@pytest.fixture
def workspace(tmp_path):
    for name in (
        "train.jsonl",
        "test.jsonl",
        "gold_train.jsonl",
        "gold_test.jsonl",
        "kb.tsv",
        "schema.json",
        "config.json",
    ):
        shutil.copy(FIXTURES / name, tmp_path / name)
    return tmp_path / "config.json"


def test_end_to_end_consolidation_beats_raw_distant_labels(workspace):
    start = time.monotonic()
    stages = [
        ["annotate"],
        ["mine"],
        ["group"],
        ["screen", "--batch"],
        ["infer"],
        ["consolidate", "--strategy", "npin"],
        ["consolidate", "--strategy", "ipin"],
        ["train", "--train-on", "ds"],
        ["train", "--train-on", "ipin"],
        ["eval", "--train-on", "ds"],
        ["eval", "--train-on", "ipin"],
    ]
    for stage in stages:
        assert main([*stage, "--config", str(workspace)]) == EXIT_OK, stage
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"pipeline took {elapsed:.1f}s"

    work = workspace.parent / "work"
    gold = load_annotations(workspace.parent / "gold_train.jsonl", Source.GOLD)
    ds = load_annotations(work / "ds.jsonl", Source.DS)
    out_i = load_annotations(work / "ipin.jsonl", Source.IPIN)
    out_n = load_annotations(work / "npin.jsonl", Source.NPIN)
    fp_ds = noise_stats(ds, gold).fp_rate
    assert noise_stats(out_i, gold).fp_rate < fp_ds
    assert noise_stats(out_n, gold).fp_rate < fp_ds

    metrics_ds = json.loads((work / "metrics_ds.json").read_text())
    metrics_ipin = json.loads((work / "metrics_ipin.json").read_text())
    assert metrics_ipin["f1"] >= metrics_ds["f1"]


# --------------------------------------------------------------------------
# Entity-mask invariance under surface substitution
# --------------------------------------------------------------------------

def _substitute_surfaces(corpus: Corpus) -> Corpus:
    """Replace every mention token with a placeholder, spans preserved."""
    rebuilt = []
    for sentence in corpus.sentences:
        tokens = list(sentence.tokens)
        mentions = []
        for m_idx, m in enumerate(sentence.mentions):
            for offset, pos in enumerate(range(m.start, m.end)):
                tokens[pos] = f"SWAP{m_idx}X{offset}"
            mentions.append(
                EntityMention(
                    m.start, m.end, " ".join(tokens[m.start : m.end]), m.ner_type
                )
            )
        rebuilt.append(Sentence(sentence.id, tuple(tokens), tuple(mentions)))
    return Corpus(rebuilt)


def test_entity_mask_predictions_invariant_to_surface_substitution(tmp_path):
    corpus = load_corpus(FIXTURES / "train.jsonl")
    test_corpus = load_corpus(FIXTURES / "test.jsonl")
    schema = load_schema(FIXTURES / "schema.json")
    kb = load_kb(FIXTURES / "kb.tsv")
    ds = distant_annotate(corpus, kb, schema.ids())
    is_set = indirect_annotate(
        corpus, schema, schema.general_template_sets(), MockNliEngine(), NliConfig()
    )
    model = train(ipin(ds, is_set), corpus, TrainConfig(mode=Mode.EM))

    original = predict_corpus(model, test_corpus)
    substituted = predict_corpus(model, _substitute_surfaces(test_corpus))
    assert original.labels == substituted.labels

    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_annotations(original, a)
    save_annotations(substituted, b)
    assert a.read_bytes() == b.read_bytes()

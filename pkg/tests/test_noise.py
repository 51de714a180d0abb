import pytest

from relex.corpus import NA, AnnotationSet, Source, instance_key
from relex.errors import SimulationError, UniverseMismatchError
from relex.noise import (
    NoiseReport,
    inject_fn,
    inject_fp,
    noise_stats,
    pair_mention_counts,
)

from conftest import make_corpus, make_sentence


def pair_sentence(sid, a, b, verb="met"):
    return make_sentence(sid, f"{a} {verb} {b} .", [(0, 1, "X"), (2, 3, "X")])


def build_longtail_world():
    """Pairs A(1 sentence), B(2), C(10), all positive; 87 gold negatives.

    Negatives: each positive sentence's reverse instance (13) plus 37
    filler sentences contributing two NA instances each (74).
    """
    sentences = []
    gold = {}
    pair_specs = [("A1", "A2", 1), ("B1", "B2", 2), ("C1", "C2", 10)]
    n = 0
    for a, b, count in pair_specs:
        for _ in range(count):
            sid = f"s{n}"
            n += 1
            s = pair_sentence(sid, a, b, "leads")
            sentences.append(s)
            gold[f"{sid}|0:1|2:3"] = "rel"
            gold[f"{sid}|2:3|0:1"] = NA
    for i in range(37):
        sid = f"f{i}"
        s = pair_sentence(sid, f"X{i}", f"Y{i}")
        sentences.append(s)
        gold[f"{sid}|0:1|2:3"] = NA
        gold[f"{sid}|2:3|0:1"] = NA
    corpus = make_corpus(*sentences)
    assert len(gold) == 100
    return corpus, AnnotationSet(Source.GOLD, gold)


class TestPairCounts:
    def test_counts_sentences_not_instances(self):
        corpus, _ = build_longtail_world()
        counts = pair_mention_counts(corpus)
        assert counts[("A1", "A2")] == 1
        assert counts[("B1", "B2")] == 2
        assert counts[("C1", "C2")] == 10

    def test_unordered(self):
        s1 = pair_sentence("s1", "A", "B")
        s2 = pair_sentence("s2", "B", "A")
        counts = pair_mention_counts(make_corpus(s1, s2))
        assert counts[("A", "B")] == 2


class TestInjectFn:
    def test_threshold_search_matches_derived_trace(self):
        # Candidates: n=2 gives 1/88 (1.14%), n=3 gives 3/90 (3.33%),
        # n=11 gives 13/100 (13%); 3.33% is closest to the 5% target.
        corpus, gold = build_longtail_world()
        noisy, threshold = inject_fn(gold, corpus, target_rate=0.05)
        assert threshold == 3
        flipped = [
            k for k, lab in noisy.items() if lab == NA and gold.labels[k] != NA
        ]
        assert len(flipped) == 3
        report = noise_stats(noisy, gold)
        assert report.fn == 3 and report.tn == 87
        assert abs(report.fn_rate - 3 / 90) < 1e-12

    def test_zero_target_flips_nothing(self):
        corpus, gold = build_longtail_world()
        noisy, threshold = inject_fn(gold, corpus, target_rate=0.0)
        assert threshold == 1
        assert noisy.labels == gold.labels

    def test_only_positives_flip_and_only_to_na(self):
        corpus, gold = build_longtail_world()
        noisy, _ = inject_fn(gold, corpus, 0.05)
        for key, lab in noisy.items():
            if lab != gold.labels[key]:
                assert gold.labels[key] != NA and lab == NA

    def test_no_positives_is_an_error(self):
        corpus, _ = build_longtail_world()
        all_na = AnnotationSet(Source.GOLD, {
            instance_key(i): NA for i in corpus.instances
        })
        with pytest.raises(SimulationError):
            inject_fn(all_na, corpus)


class TestInjectFp:
    def _world(self):
        sentences = [
            pair_sentence("s1", "Sony", "Morita", "hired"),  # expresses founders
            pair_sentence("s2", "Sony", "Morita", "met"),  # same pair, no relation
            pair_sentence("s3", "Acme", "Bob", "met"),  # unrelated pair
        ]
        corpus = make_corpus(*sentences)
        labels = {
            "s1|0:1|2:3": "founders",
            "s1|2:3|0:1": NA,
            "s2|0:1|2:3": NA,
            "s2|2:3|0:1": NA,
            "s3|0:1|2:3": NA,
            "s3|2:3|0:1": NA,
        }
        return corpus, AnnotationSet(Source.SIMULATED, labels)

    def test_shared_pair_relabeled(self):
        corpus, annotations = self._world()
        out = inject_fp(annotations, corpus)
        assert out.labels["s2|0:1|2:3"] == "founders"  # false positive created
        assert out.labels["s2|2:3|0:1"] == NA  # reverse orientation untouched
        assert out.labels["s3|0:1|2:3"] == NA

    def test_noop_without_shared_pairs(self):
        corpus, annotations = self._world()
        annotations.labels["s1|0:1|2:3"] = NA  # no positives left
        out = inject_fp(annotations, corpus)
        assert out.labels == annotations.labels

    def test_idempotent(self):
        corpus, annotations = self._world()
        once = inject_fp(annotations, corpus)
        twice = inject_fp(once, corpus)
        assert once.labels == twice.labels

    def test_brute_force_cross_check(self):
        corpus, annotations = self._world()
        out = inject_fp(annotations, corpus)
        positive_pairs = {
            (corpus.instance(k).subj.surface, corpus.instance(k).obj.surface): lab
            for k, lab in annotations.items()
            if lab != NA
        }
        for key, lab in annotations.items():
            inst = corpus.instance(key)
            expected = positive_pairs.get((inst.subj.surface, inst.obj.surface))
            if lab == NA and expected:
                assert out.labels[key] == expected
            else:
                assert out.labels[key] == lab


class TestNoiseStats:
    def test_reference_rates_reproduced(self):
        # Frozen count/rate pairs; rates must land within 0.01 percentage
        # points of the published percentages.
        cases = [
            (10256, 9838, None, None, 0.4896, None),
            (None, None, 49090, 2756, None, 0.0532),
            (4895, 898, None, None, 0.1550, None),
            (None, None, 47519, 1499, None, 0.0306),
            (6419, 3331, None, None, 0.3416, None),
        ]
        for tp, fp, tn, fn, fp_rate, fn_rate in cases:
            report = NoiseReport(tp or 0, fp or 0, tn or 0, fn or 0)
            if fp_rate is not None:
                assert abs(report.fp_rate - fp_rate) < 0.0001
            if fn_rate is not None:
                assert abs(report.fn_rate - fn_rate) < 0.0001

    def test_identity_annotations_are_clean(self):
        corpus, gold = build_longtail_world()
        annotated = AnnotationSet(Source.SIMULATED, dict(gold.labels))
        report = noise_stats(annotated, gold)
        assert report.fp == 0 and report.fn == 0
        assert report.fp_rate == 0.0 and report.fn_rate == 0.0

    def test_subset_universe_allowed(self):
        corpus, gold = build_longtail_world()
        some = dict(list(gold.labels.items())[:10])
        report = noise_stats(AnnotationSet(Source.IPIN, some), gold)
        assert report.tp + report.fp + report.tn + report.fn == 10

    def test_unknown_instances_rejected(self):
        corpus, gold = build_longtail_world()
        bad = AnnotationSet(Source.SIMULATED, {"nope|0:1|2:3": NA})
        with pytest.raises(UniverseMismatchError):
            noise_stats(bad, gold)

    def test_table_rendering_contains_rates(self):
        table = NoiseReport(10256, 9838, 49090, 2756).format_table("noisy")
        assert "48.96%" in table and "5.32%" in table

"""Weakly supervised relation extraction pipeline."""

from .corpus import (
    NA,
    AnnotationSet,
    Corpus,
    EntityMention,
    Instance,
    KnowledgeBase,
    Sentence,
    Source,
    distant_annotate,
    enumerate_instances,
    instance_key,
    load_annotations,
    load_corpus,
    load_kb,
    save_annotations,
)
from .nli import (
    MockNliEngine,
    NliConfig,
    NliScore,
    RemoteNliEngine,
    check_type_constraint,
    generate_hypothesis,
    indirect_annotate,
    infer_relation,
    relation_probability,
)
from .patterns import (
    Pattern,
    PatternConfig,
    PatternSet,
    Stage,
    filter_patterns,
    group_patterns,
    is_duplicate,
    mine_patterns,
    prune_by_general_template,
)
from .schema import RelationSchema, Template, TemplateSet, load_schema
from .screening import ScreeningSession, finalize_templates, screening_decide, screening_next
from .consolidate import build_report, ipin, npin
from .noise import NoiseReport, inject_fn, inject_fp, noise_stats
from .classifier import LinearModel, Mode, TrainConfig, featurize, predict, predict_corpus, train
from .evaluation import Metrics, evaluate, report

__version__ = "0.1.0"

"""Stage-by-stage pipeline commands over one shared workdir.

Every stage reads the artifacts of earlier stages from the workdir and
writes its own atomically (temp file + rename), so a crashed run never
leaves a half-written artifact. Stage order mirrors the data flow:
annotate, mine, group, screen, infer, consolidate, train, eval.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

from . import classifier as clf
from . import consolidate as cons
from . import evaluation, noise
from .config import PipelineConfig, load_config
from .corpus import (
    Source,
    distant_annotate,
    load_annotations,
    load_corpus,
    load_kb,
    save_annotations,
)
from .errors import ArtifactError, ConfigError, RelexError, WorkdirLockedError
from .nli import indirect_annotate, make_engine
from .patterns import (
    PatternSet,
    Stage,
    filter_patterns,
    group_patterns,
    load_pattern_sets,
    mine_patterns,
    prune_by_general_template,
    save_pattern_sets,
)
from .schema import load_schema, load_template_set
from .screening import ScreeningSession
from .server import ScreeningService, make_server, template_filename

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING_ARTIFACT = 2
EXIT_BAD_CONFIG = 3

ARTIFACTS = {
    "ds": "ds.jsonl",
    "sim_ds": "sim_ds.jsonl",
    "sim_report": "sim_report.json",
    "sim_report_txt": "sim_report.txt",
    "mined": "patterns_mined.jsonl",
    "filtered": "patterns_filtered.jsonl",
    "grouped": "patterns_grouped.jsonl",
    "pruned": "patterns_pruned.jsonl",
    "templates": "templates",
    "is": "is.jsonl",
    "ipin": "ipin.jsonl",
    "npin": "npin.jsonl",
    "journal": "screening_journal.jsonl",
}


@contextlib.contextmanager
def atomic_output(path: Path):
    """Yield a temp path that replaces the target only on success."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


@contextlib.contextmanager
def workdir_lock(workdir: Path):
    lock = workdir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise WorkdirLockedError(
            f"workdir is locked by another command ({lock}); remove the lock "
            f"file if that command is gone"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            lock.unlink()


def _artifact(cfg: PipelineConfig, name: str) -> Path:
    return cfg.workdir / ARTIFACTS[name]


def _require_artifact(cfg: PipelineConfig, name: str) -> Path:
    path = _artifact(cfg, name)
    if not path.exists():
        raise ArtifactError(
            f"missing prerequisite artifact {ARTIFACTS[name]!r}; "
            f"run the producing stage first"
        )
    return path


def _load_world(cfg: PipelineConfig):
    corpus = load_corpus(cfg.corpus)
    schema = load_schema(cfg.schema)
    return corpus, schema


def _pattern_sets_at(cfg: PipelineConfig, name: str, stage: Stage, schema):
    """Load a pattern artifact, defaulting absent relations to empty sets."""
    sets = load_pattern_sets(_require_artifact(cfg, name))
    for rid in schema.ids():
        sets.setdefault(rid, PatternSet(rid, [], stage))
    return sets


def cmd_annotate(cfg: PipelineConfig, args) -> int:
    corpus, schema = _load_world(cfg)
    kb = load_kb(cfg.kb)
    ds = distant_annotate(corpus, kb, schema.ids(), cfg.case_sensitive)
    with atomic_output(_artifact(cfg, "ds")) as tmp:
        save_annotations(ds, tmp)
    pos = sum(1 for _, lab in ds.items() if lab != "NA")
    print(f"annotate: {len(ds)} instances, {pos} positive")
    return EXIT_OK


def cmd_mine(cfg: PipelineConfig, args) -> int:
    corpus, schema = _load_world(cfg)
    ds = load_annotations(_require_artifact(cfg, "ds"), Source.DS)
    mined, filtered = [], []
    for rid in schema.ids():
        ps = mine_patterns(ds, corpus, rid)
        mined.append(ps)
        filtered.append(filter_patterns(ps, cfg.mining))
    with atomic_output(_artifact(cfg, "mined")) as tmp:
        save_pattern_sets(mined, tmp)
    with atomic_output(_artifact(cfg, "filtered")) as tmp:
        save_pattern_sets(filtered, tmp)
    for before, after in zip(mined, filtered):
        print(
            f"mine: {before.relation_id}: {len(before.patterns)} mined, "
            f"{len(after.patterns)} kept"
        )
    return EXIT_OK


def cmd_group(cfg: PipelineConfig, args) -> int:
    _, schema = _load_world(cfg)
    engine = make_engine(cfg.nli)
    sets = _pattern_sets_at(cfg, "filtered", Stage.INITIAL, schema)
    grouped, pruned = [], []
    for rid in schema.ids():
        spec = schema.get(rid)
        subj_ner, obj_ner = spec.primary_constraint()
        g = group_patterns(sets[rid], engine, cfg.nli.tau, subj_ner, obj_ner)
        grouped.append(g)
        pruned.append(
            prune_by_general_template(
                g, spec.general_template, engine, cfg.nli.tau, subj_ner, obj_ner
            )
        )
    with atomic_output(_artifact(cfg, "grouped")) as tmp:
        save_pattern_sets(grouped, tmp)
    with atomic_output(_artifact(cfg, "pruned")) as tmp:
        save_pattern_sets(pruned, tmp)
    for g, p in zip(grouped, pruned):
        print(
            f"group: {g.relation_id}: {len(g.patterns)} groups, "
            f"{len(p.patterns)} after pruning"
        )
    return EXIT_OK


def _build_sessions(cfg: PipelineConfig, corpus, schema):
    sets = _pattern_sets_at(cfg, "pruned", Stage.PRUNED, schema)
    journal = _artifact(cfg, "journal")
    sessions = {
        rid: ScreeningSession(sets[rid], cfg.mining, journal, corpus)
        for rid in schema.ids()
    }
    generals = {rid: schema.get(rid).general_template for rid in schema.ids()}
    return sessions, generals


def cmd_screen(cfg: PipelineConfig, args) -> int:
    corpus, schema = _load_world(cfg)
    sessions, generals = _build_sessions(cfg, corpus, schema)
    templates_dir = _artifact(cfg, "templates")
    service = ScreeningService(sessions, generals, templates_dir, cfg.ui_dir)

    if args.batch:
        # Unattended mode accepts nothing: every relation ships with its
        # general template only.
        for rid in schema.ids():
            service.finalize(rid)
        print(f"screen: batch mode, {len(sessions)} relations finalized (general only)")
        return EXIT_OK

    server = make_server(service, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"screen: serving http://{host}:{port}/ (Ctrl-C to stop)")
    try:
        while not service.done_event.is_set():
            server.handle_request()
    except KeyboardInterrupt:
        print("screen: interrupted; journal retained, finalized relations kept")
    finally:
        server.server_close()
    return EXIT_OK


def _load_template_sets(cfg: PipelineConfig, schema):
    templates_dir = _artifact(cfg, "templates")
    if not templates_dir.is_dir():
        raise ArtifactError(
            f"missing prerequisite artifact {ARTIFACTS['templates']!r}/; "
            f"run the screen stage first"
        )
    sets = {}
    for rid in schema.ids():
        path = templates_dir / template_filename(rid)
        if path.exists():
            sets[rid] = load_template_set(path)
        else:
            sets[rid] = schema.general_template_sets()[rid]
    return sets


def cmd_infer(cfg: PipelineConfig, args) -> int:
    corpus, schema = _load_world(cfg)
    template_sets = _load_template_sets(cfg, schema)
    engine = make_engine(cfg.nli)
    is_set = indirect_annotate(corpus, schema, template_sets, engine, cfg.nli)
    with atomic_output(_artifact(cfg, "is")) as tmp:
        save_annotations(is_set, tmp)
    pos = sum(1 for _, lab in is_set.items() if lab != "NA")
    print(f"infer: {len(is_set)} instances, {pos} positive")
    return EXIT_OK


def cmd_consolidate(cfg: PipelineConfig, args) -> int:
    ds = load_annotations(_require_artifact(cfg, "ds"), Source.DS)
    is_set = load_annotations(_require_artifact(cfg, "is"), Source.IS)
    strategy = cons.ipin if cfg.strategy == "ipin" else cons.npin
    out = strategy(ds, is_set)
    report = cons.build_report(ds, is_set, out)
    with atomic_output(_artifact(cfg, cfg.strategy)) as tmp:
        save_annotations(out, tmp)
    print(
        f"consolidate: {cfg.strategy}: kept {len(out)} of {len(ds)} entries "
        f"({report.removed_total()} removed)"
    )
    return EXIT_OK


def cmd_simulate(cfg: PipelineConfig, args) -> int:
    cfg.validate(("corpus", "gold"))
    corpus, _ = _load_world(cfg)
    gold = load_annotations(cfg.gold, Source.GOLD)
    with_fn, threshold = noise.inject_fn(gold, corpus, cfg.target_fn_rate)
    noisy = noise.inject_fp(with_fn, corpus)
    stats = noise.noise_stats(noisy, gold)
    with atomic_output(_artifact(cfg, "sim_ds")) as tmp:
        save_annotations(noisy, tmp)
    payload = json.loads(stats.to_json())
    payload["fn_threshold"] = threshold
    with atomic_output(_artifact(cfg, "sim_report")) as tmp:
        tmp.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    with atomic_output(_artifact(cfg, "sim_report_txt")) as tmp:
        tmp.write_text(stats.format_table("simulated distant annotation") + "\n")
    print(
        f"simulate: threshold {threshold}, fp_rate {stats.fp_rate:.4f}, "
        f"fn_rate {stats.fn_rate:.4f}"
    )
    return EXIT_OK


def _training_source(cfg: PipelineConfig, name: str) -> Source:
    return {"ds": Source.DS, "ipin": Source.IPIN, "npin": Source.NPIN}[name]


def cmd_train(cfg: PipelineConfig, args) -> int:
    corpus, _ = _load_world(cfg)
    on = args.train_on or cfg.strategy
    annotations = load_annotations(_require_artifact(cfg, on), _training_source(cfg, on))
    model = clf.train(annotations, corpus, cfg.classifier)
    path = cfg.workdir / f"model_{on}.json"
    with atomic_output(path) as tmp:
        clf.save_model(model, tmp)
    print(f"train: {on}: {len(annotations)} examples, final loss {model.loss_history[-1]:.4f}")
    return EXIT_OK


def cmd_eval(cfg: PipelineConfig, args) -> int:
    cfg.validate(("eval_corpus", "eval_gold"))
    on = args.train_on or cfg.strategy
    model_path = cfg.workdir / f"model_{on}.json"
    if not model_path.exists():
        raise ArtifactError(f"missing prerequisite artifact {model_path.name!r}")
    model = clf.load_model(model_path)
    corpus = load_corpus(cfg.eval_corpus)
    gold = load_annotations(cfg.eval_gold, Source.GOLD)
    predictions = clf.predict_corpus(model, corpus)
    metrics = evaluation.evaluate(predictions, gold)
    with atomic_output(cfg.workdir / f"metrics_{on}.json") as tmp:
        tmp.write_text(evaluation.report(metrics, "json") + "\n")
    with atomic_output(cfg.workdir / f"metrics_{on}.txt") as tmp:
        tmp.write_text(evaluation.report(metrics, "table") + "\n")
    print(
        f"eval: {on}: P {metrics.precision * 100:.2f} R {metrics.recall * 100:.2f} "
        f"F1 {metrics.f1 * 100:.2f}"
    )
    return EXIT_OK


def cmd_pipeline(cfg: PipelineConfig, args) -> int:
    args.batch = True
    for step in (cmd_annotate, cmd_mine, cmd_group, cmd_screen, cmd_infer,
                 cmd_consolidate, cmd_train, cmd_eval):
        rc = step(cfg, args)
        if rc != EXIT_OK:
            return rc
    return EXIT_OK


COMMANDS = {
    "annotate": cmd_annotate,
    "mine": cmd_mine,
    "group": cmd_group,
    "screen": cmd_screen,
    "infer": cmd_infer,
    "consolidate": cmd_consolidate,
    "simulate": cmd_simulate,
    "train": cmd_train,
    "eval": cmd_eval,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relex",
        description="Weakly supervised relation extraction pipeline",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--strategy", choices=["ipin", "npin"],
                        help="consolidation strategy override")
    parser.add_argument("--nli", choices=["mock", "remote"],
                        help="entailment backend override")
    parser.add_argument("--remote-url", help="remote entailment service URL")
    parser.add_argument("--tau", type=float, help="entailment threshold override")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--batch", action="store_true",
                        help="never block on human input (screen finalizes general-only)")
    parser.add_argument("--train-on", choices=["ds", "ipin", "npin"],
                        help="annotation set for train/eval (default: strategy)")
    parser.add_argument("--host", default="127.0.0.1", help="screen server host")
    parser.add_argument("--port", type=int, default=0, help="screen server port")
    return parser


def _apply_overrides(cfg: PipelineConfig, args) -> None:
    if args.strategy:
        cfg.strategy = args.strategy
    if args.nli:
        cfg.nli.backend = args.nli
    if args.remote_url:
        cfg.nli.remote_url = args.remote_url
    if args.tau is not None:
        cfg.nli = type(cfg.nli)(**{**cfg.nli.__dict__, "tau": args.tau})
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.classifier.seed = args.seed


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        cfg.validate()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        with workdir_lock(cfg.workdir):
            return COMMANDS[args.command](cfg, args)
    except ArtifactError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except WorkdirLockedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except RelexError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

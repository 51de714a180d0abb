"""Pipeline configuration: one JSON file drives every CLI stage.

Relative paths are resolved against the config file's directory, so a
bundled corpus plus config can run from anywhere.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import TrainConfig
from .errors import ConfigError
from .nli import NliConfig
from .patterns import PatternConfig

NLI_URL_ENV = "RELEX_NLI_URL"


@dataclass
class PipelineConfig:
    corpus: Path
    kb: Path
    schema: Path
    workdir: Path
    gold: Path | None = None
    eval_corpus: Path | None = None
    eval_gold: Path | None = None
    ui_dir: Path | None = None
    strategy: str = "npin"
    case_sensitive: bool = True
    seed: int = 13
    target_fn_rate: float = 0.05
    mining: PatternConfig = field(default_factory=PatternConfig)
    nli: NliConfig = field(default_factory=NliConfig)
    classifier: TrainConfig = field(default_factory=TrainConfig)

    def validate(self, require: tuple[str, ...] = ("corpus", "kb", "schema")) -> None:
        for name in require:
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f"config is missing required path {name!r}")
            if not Path(path).is_file():
                raise ConfigError(f"{name} file not found: {path}")
        if self.strategy not in ("ipin", "npin"):
            raise ConfigError(f"strategy must be ipin or npin, got {self.strategy!r}")
        self.workdir.mkdir(parents=True, exist_ok=True)
        if not os.access(self.workdir, os.W_OK):
            raise ConfigError(f"workdir not writable: {self.workdir}")


def _resolve(base: Path, value) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else (base / path)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    base = path.parent

    try:
        cfg = PipelineConfig(
            corpus=_resolve(base, raw["corpus"]),
            kb=_resolve(base, raw["kb"]),
            schema=_resolve(base, raw["schema"]),
            workdir=_resolve(base, raw.get("workdir", "work")),
            gold=_resolve(base, raw.get("gold")),
            eval_corpus=_resolve(base, raw.get("eval_corpus")),
            eval_gold=_resolve(base, raw.get("eval_gold")),
            ui_dir=_resolve(base, raw.get("ui_dir")),
            strategy=raw.get("strategy", "npin"),
            case_sensitive=bool(raw.get("case_sensitive", True)),
            seed=int(raw.get("seed", 13)),
            target_fn_rate=float(raw.get("target_fn_rate", 0.05)),
            mining=PatternConfig(**raw.get("mining", {})),
            nli=NliConfig(**raw.get("nli", {})),
            classifier=TrainConfig(**raw.get("classifier", {})),
        )
    except KeyError as e:
        raise ConfigError(f"config is missing required field {e.args[0]!r}") from e
    except TypeError as e:
        raise ConfigError(f"config has an unknown field: {e}") from e

    # The classifier block may pin its own seed; otherwise the global one applies.
    if "seed" not in raw.get("classifier", {}):
        cfg.classifier.seed = cfg.seed

    env_url = os.environ.get(NLI_URL_ENV)
    if env_url:
        cfg.nli.remote_url = env_url
    return cfg

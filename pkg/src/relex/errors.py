"""Exception types shared across the pipeline."""


class RelexError(Exception):
    """Base class for all pipeline errors."""


class CorpusFormatError(RelexError):
    """Corpus/annotation file could not be parsed; message carries the line number."""


class SpanRangeError(RelexError):
    """A mention span falls outside its sentence's token range."""


class SpanOverlapError(RelexError):
    """Two mention spans in one sentence share a token."""


class ConfigError(RelexError):
    """Invalid configuration or reference to an undeclared relation."""


class UnknownRelationError(ConfigError):
    """A relation id is not present in the schema."""


class TemplateError(RelexError):
    """A template is missing a placeholder or repeats one."""


class NliTransportError(RelexError):
    """The remote entailment service could not be reached."""


class NliResponseError(RelexError):
    """The remote entailment service returned a malformed payload."""


class NliScoreError(RelexError):
    """A returned score triple is not a probability distribution."""


class UniverseMismatchError(RelexError):
    """Two annotation sets do not cover compatible instance universes."""


class ScreeningError(RelexError):
    """Screening session used out of contract (uninitialized, not surfaced, ...)."""


class DecisionConflictError(ScreeningError):
    """A pattern that already has a final decision was decided again."""


class EvaluationError(RelexError):
    """Metrics are undefined for the given inputs (e.g. no gold positives)."""


class SimulationError(RelexError):
    """Noise injection cannot run (e.g. no positive instances to flip)."""


class ArtifactError(RelexError):
    """A pipeline stage is missing a prerequisite artifact."""


class WorkdirLockedError(RelexError):
    """Another command holds the workdir lock."""

"""Exception hierarchy shared across the toolkit.

Errors that indicate bad input (files, configs, schemas) derive from
:class:`InputError`; errors raised while a pipeline is running derive from
:class:`RuntimeFailure`. The CLI maps the former to exit code 1 and the
latter to exit code 2.
"""


class RhymeKitError(Exception):
    """Base class for all toolkit errors."""


class InputError(RhymeKitError):
    """Invalid input: schema violations, bad configs, missing files."""


class RuntimeFailure(RhymeKitError):
    """Failure while executing an otherwise valid pipeline."""


class SchemaError(InputError):
    """A corpus, annotation, or config file violates its schema."""


class InsufficientDataError(InputError):
    """A sampling or fitting request exceeds what the data can support."""


class TranscriptionError(RuntimeFailure):
    """A transcriber failed to produce phonemes for a line."""


class UnknownWordError(TranscriptionError):
    """A lookup-table transcriber has no entry for a word."""

    def __init__(self, word: str):
        super().__init__(f"word not in lookup table: {word!r}")
        self.word = word


class NoNucleusError(RuntimeFailure):
    """A transcription contains no syllabic segment to anchor a rhyme on."""


class TableCoverageError(RuntimeFailure):
    """An IPA symbol has no row in the articulatory feature table."""

    def __init__(self, symbol: str):
        super().__init__(f"symbol not covered by the feature table: {symbol!r}")
        self.symbol = symbol


class UndefinedScoreError(RuntimeFailure):
    """An association score is undefined for the given counts."""


class CannotTrainError(RuntimeFailure):
    """Model estimation cannot start (e.g. no seed pairs survived)."""


class ScopeError(InputError):
    """Two link sets from different poems were compared."""


class CoverageMismatchError(InputError):
    """The two annotators do not cover the same poem set."""

    def __init__(self, message: str, missing: list):
        super().__init__(message)
        self.missing = missing


class DegenerateDesignError(InputError):
    """The regression design matrix is unusable (constant predictor...)."""


class SeparabilityError(InputError):
    """The regression response is degenerate (all outcomes identical)."""


class ProviderError(RuntimeFailure):
    """A provider request failed after exhausting its retries."""


class LlmResponseError(RuntimeFailure):
    """An LLM response could not be turned into rhyme groups."""


class ResponseParseError(LlmResponseError):
    """No JSON object could be decoded from the raw response."""

    def __init__(self, raw: str):
        super().__init__(f"no JSON object found in response: {raw[:200]!r}")
        self.raw = raw


class ResponseShapeError(LlmResponseError):
    """A JSON object was found but does not hold rhyme groups."""


class ConfigError(InputError):
    """An invalid run configuration."""

"""Exception types shared across the pipeline.

Validation errors (bad inputs, bad config, malformed files) are kept
separate from runtime errors so the CLI can map them to distinct exit
codes.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PipelineError):
    """Precondition or configuration violation detected before any work."""


class FormatError(PipelineError):
    """A file did not match its declared format.

    Carries the offending path and 1-based line number when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class SpanCrossingError(PipelineError):
    """A sub-word span crosses a word boundary.

    Indicates the segmentation and the word split disagree; reported with
    enough context to locate the offending sentence.
    """

    def __init__(self, token, span, sentence_index=None):
        self.token = token
        self.span = span
        self.sentence_index = sentence_index
        at = f" in sentence {sentence_index}" if sentence_index is not None else ""
        super().__init__(
            f"sub-word {token!r} with span {span} crosses a word boundary{at}"
        )

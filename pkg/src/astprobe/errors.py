"""Exception types shared across the toolkit."""


class AstProbeError(Exception):
    """Base class for all toolkit errors."""


class ParseError(AstProbeError):
    """The grammar reported an error node, or the input had no tokens."""


class UnsupportedLanguage(AstProbeError):
    """Unknown language id, or the grammar bundle is unavailable."""


class GrammarBuildError(AstProbeError):
    """The grammar bundle could not be compiled or loaded."""


class MalformedLabel(AstProbeError):
    """A merged node label is empty after splitting on the separator."""


class UnknownLabel(AstProbeError):
    """A label is absent from a frozen vocabulary."""


class LengthMismatch(AstProbeError):
    """Vector lengths violate len(d) == len(c) == len(u) - 1."""


class DimensionError(AstProbeError):
    """Matrix or vector dimensions are inconsistent with the probe."""


class DegenerateSequence(AstProbeError):
    """A single-token sequence cannot carry distance or c-label losses."""


class EmptyDataset(AstProbeError):
    """A training or validation split is empty."""


class LeafMismatch(AstProbeError):
    """Predicted and gold trees cover different numbers of tokens."""


class SpanError(AstProbeError):
    """Word spans overlap, run backwards, or leave the subword range."""


class FormatError(AstProbeError):
    """A binary container has a bad magic, version, or truncated body."""


class ChecksumError(AstProbeError):
    """A binary container's trailing checksum does not match its body."""


class InsufficientData(AstProbeError):
    """Fewer usable samples than the requested split sizes."""

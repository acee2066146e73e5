"""Exception hierarchy for drl-hash.

Input-value errors also derive from ``ValueError`` so callers that only know
the standard library can still catch them.
"""


class DrlhashError(Exception):
    """Base class for all drl-hash errors."""


class InfeasibleParameters(DrlhashError, ValueError):
    """Requested parameters admit no valid construction."""


class DesignedDistanceTooLarge(InfeasibleParameters):
    """The BCH generator would consume the whole codeword length."""


class TooManyClasses(InfeasibleParameters):
    """No BCH code of the requested width separates that many classes."""


class WidthMismatch(DrlhashError, ValueError):
    """Two binary codes (or code sets) have different widths."""


class IndexOutOfRange(DrlhashError, IndexError):
    """A bit index lies outside the code width."""


class EmptyLabelSet(DrlhashError, ValueError):
    """An item carries no class labels."""


class NoNegativeClasses(DrlhashError, ValueError):
    """The labels cover every class, leaving nothing to average over."""


class DimensionMismatch(DrlhashError, ValueError):
    """A vector does not have the dimension the receiver expects."""


class EpisodeAlreadyDone(DrlhashError):
    """A step was requested on a terminal state."""


class ActionOutOfRange(DrlhashError, ValueError):
    """An action index lies outside [0, b]."""


class BadArchitecture(DrlhashError, ValueError):
    """Layer specifications do not chain into a valid Q-network."""


class StaleCache(DrlhashError):
    """A forward cache no longer matches the network parameters."""


class ShapeMismatch(DrlhashError, ValueError):
    """Gradients are not shape-congruent with the network."""


class ArchitectureMismatch(DrlhashError, ValueError):
    """A model does not fit the features or code width it is used with."""


class FormatError(DrlhashError, ValueError):
    """Base class for malformed input files."""


class CorruptModelFile(FormatError):
    """A model file is truncated or unreadable."""


class BadMagic(FormatError):
    """A binary file does not start with the expected magic."""


class HeaderMismatch(FormatError):
    """Header counts disagree between companion files."""


class EmptyLabelLine(FormatError):
    """A labels file contains an empty line."""


class ConfigError(FormatError):
    """A configuration file has an unknown key or bad value."""

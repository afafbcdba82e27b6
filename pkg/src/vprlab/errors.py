"""Exception types shared across environments, oracles, and the harness."""


class VprError(Exception):
    """Base class for all library errors."""


class FormatError(VprError):
    """Response text does not contain exactly one well-formed action tag."""


class OutOfRangeError(VprError):
    """Action coordinates or digit fall outside the declared ranges."""


class SequenceError(VprError):
    """Turn records appended out of order or after episode end."""


class IllegalMoveError(VprError):
    """Action violates the environment rules in the current state."""


class TerminalError(VprError):
    """Operation requires an ongoing state but the state is terminal."""


class NonTerminalError(VprError):
    """Operation requires a terminal state but the episode is still live."""


class GenerationError(VprError):
    """Puzzle generation exhausted its retry budget."""


class InconsistentGridError(VprError):
    """Grid violates row/column/box constraints."""


class InconsistentObservationError(VprError):
    """No mine configuration is consistent with the revealed digits."""


class ConfigError(VprError):
    """Invalid environment or evaluation configuration."""


class MissingVerdictError(VprError):
    """A turn lacks the verifier verdict required by the reward mode."""


class EmptyBatchError(VprError):
    """Advantage normalization requires at least one trajectory."""


class EmptyInputError(VprError):
    """Operation requires a nonempty input collection."""


class ShapeError(VprError):
    """Mismatched shapes between ratio and advantage arrays."""


class ReplayError(VprError):
    """A recorded state could not be reconstructed for replay."""


class ProtocolError(VprError):
    """Malformed frame or invalid session on the episode wire protocol."""

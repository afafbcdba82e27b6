"""Client for the vprlab episode wire protocol."""

from .client import (
    ClientError,
    ClientSession,
    ConnectError,
    ResetResult,
    ServerFrameError,
    SessionStateError,
    StepResult,
    connect,
)

__version__ = "0.1.0"

__all__ = [
    "ClientError",
    "ClientSession",
    "ConnectError",
    "ResetResult",
    "ServerFrameError",
    "SessionStateError",
    "StepResult",
    "connect",
    "__version__",
]

"""Synchronous client for the episode wire protocol.

Connect either to a child process speaking newline-delimited JSON on stdio
(pass a command list) or to an HTTP endpoint (pass a URL). One request is in
flight per session at a time; episode steps are inherently sequential.
"""

from __future__ import annotations

import http.client
import json
import subprocess
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union
from urllib.parse import urlparse


class ClientError(Exception):
    """Base class for client failures."""


class ConnectError(ClientError):
    """Could not reach or start the server."""


class ServerFrameError(ClientError):
    """The server answered with an error frame."""

    def __init__(self, code: str, message: str, frame: dict):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.frame = frame


class SessionStateError(ClientError):
    """Local misuse: stepping a finished or unstarted episode."""


class _StdioTransport:
    def __init__(self, command: Sequence[str]):
        try:
            self._proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ConnectError(f"cannot start {command!r}: {exc}") from exc

    def request(self, frame: dict) -> dict:
        proc = self._proc
        if proc.poll() is not None:
            raise ConnectError("server process has exited")
        proc.stdin.write(json.dumps(frame) + "\n")
        proc.stdin.flush()
        line = proc.stdout.readline()
        if not line:
            raise ConnectError("server closed the stream")
        return json.loads(line)

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)


class _HttpTransport:
    def __init__(self, url: str, timeout: float = 30.0):
        parsed = urlparse(url)
        if parsed.scheme not in ("http",) or not parsed.hostname:
            raise ConnectError(f"unsupported endpoint {url!r}")
        self._host = parsed.hostname
        self._port = parsed.port or 80
        self._timeout = timeout
        # probe so connection failures surface at connect() time
        try:
            conn = self._connection()
            conn.close()
        except OSError as exc:
            raise ConnectError(f"cannot reach {url!r}: {exc}") from exc

    def _connection(self) -> http.client.HTTPConnection:
        conn = http.client.HTTPConnection(self._host, self._port, timeout=self._timeout)
        conn.connect()
        return conn

    def request(self, frame: dict) -> dict:
        try:
            conn = self._connection()
            try:
                conn.request("POST", "/", body=json.dumps(frame))
                return json.loads(conn.getresponse().read())
            finally:
                conn.close()
        except OSError as exc:
            raise ConnectError(f"request failed: {exc}") from exc

    def close(self) -> None:
        pass


@dataclass
class StepResult:
    observation: str
    legal_actions: List[str]
    reward: Optional[float]
    valid: Optional[int]
    done: bool
    turn: int
    info: Dict = field(default_factory=dict)


@dataclass
class ResetResult:
    observation: str
    legal_actions: List[str]
    system_prompt: str
    user_prompt: str
    turn: int = 0


class ClientSession:
    """One live episode at a time over one transport."""

    def __init__(self, transport):
        self._transport = transport
        self.session_id: Optional[str] = None
        self.last_observation: Optional[str] = None
        self.done: bool = False

    def _ask(self, frame: dict) -> dict:
        reply = self._transport.request(frame)
        if reply.get("kind") == "error":
            raise ServerFrameError(
                reply.get("code", "unknown"), reply.get("message", ""), reply
            )
        return reply

    def reset(
        self,
        env: str,
        seed: int = 0,
        reward_mode: str = "vpr",
        **options,
    ) -> ResetResult:
        """Start a fresh episode; any previous episode is discarded."""
        frame = {"kind": "reset", "env": env, "seed": seed, "reward_mode": reward_mode}
        frame.update(options)
        reply = self._ask(frame)
        self.session_id = reply["session"]
        self.last_observation = reply["observation"]
        self.done = False
        return ResetResult(
            observation=reply["observation"],
            legal_actions=reply["legal_actions"],
            system_prompt=reply.get("system_prompt", ""),
            user_prompt=reply.get("user_prompt", ""),
        )

    def step(self, action_text: str) -> StepResult:
        """Send one response text; returns the annotated transition."""
        if self.session_id is None:
            raise SessionStateError("reset before stepping")
        if self.done:
            raise SessionStateError("episode is over; reset to start a new one")
        reply = self._ask(
            {"kind": "step", "session": self.session_id, "text": action_text}
        )
        self.last_observation = reply["observation"]
        self.done = bool(reply.get("done"))
        extras = {
            k: v
            for k, v in reply.items()
            if k
            not in {"kind", "session", "observation", "legal_actions", "reward",
                    "valid", "done", "turn"}
        }
        return StepResult(
            observation=reply["observation"],
            legal_actions=reply.get("legal_actions", []),
            reward=reply.get("reward"),
            valid=reply.get("valid"),
            done=self.done,
            turn=reply.get("turn", 0),
            info=extras,
        )

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "ClientSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def connect(endpoint: Union[str, Sequence[str]]) -> ClientSession:
    """Open a session against a URL (``http://...``) or a server command.

    A command is a list like ``["vprlab", "serve", "--transport", "stdio"]``;
    the child process belongs to the returned session and is terminated by
    ``close()``.
    """
    if isinstance(endpoint, str):
        return ClientSession(_HttpTransport(endpoint))
    return ClientSession(_StdioTransport(endpoint))

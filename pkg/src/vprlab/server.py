"""Episode wire protocol: newline-delimited JSON frames over stdio or HTTP.

Request frames: ``{"kind": "reset", "env": ..., "seed": ..., ...}`` and
``{"kind": "step", "session": ..., "text": ...}``. Response frames carry kind
``reset``, ``step`` (episode continues), ``result`` (episode over, including
forfeits), or ``error``. A malformed request can only ever produce an error
frame; sessions are isolated and expire after idle timeout.
"""

from __future__ import annotations

import json
import sys
import threading
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Optional

from .adapters import make_adapter
from .core import EnvKind, action_token, parse_action
from .errors import FormatError, OutOfRangeError, ProtocolError as _ProtocolError
from .policies import UniformRandomPolicy, make_policy
from .rewards import RewardMode
from .search_oracle import SearchVerdictConfig
from .seeding import derive_seed

DEFAULT_TIMEOUT = 600.0
_MCPR_ROLLOUTS_DEFAULT = 20


def load_template(env: EnvKind) -> str:
    return (
        resources.files("vprlab.templates").joinpath(f"{env.value}.txt").read_text()
    )


def render_prompts(env: EnvKind, observation: str, mark: str = "X") -> Dict[str, str]:
    """Fill the prompt template; returns system and user prompt texts."""
    template = load_template(env)
    if env is EnvKind.TICTACTOE:
        filled = template.format(
            mark=mark,
            opponent_mark="O" if mark == "X" else "X",
            game_state=observation,
        )
    else:
        filled = template.format(game_state=observation)
    system, user = filled.split("\n\nuser_prompt:\n", 1)
    return {
        "system_prompt": system.removeprefix("system_prompt:\n"),
        "user_prompt": user,
    }


@dataclass
class Session:
    session_id: str
    adapter: object
    state: object
    reward_mode: RewardMode
    seed: int
    turn: int = 0
    done: bool = False
    mcpr_rollouts: int = _MCPR_ROLLOUTS_DEFAULT
    value_prev: Optional[float] = None
    touched: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class ProtocolError(_ProtocolError):
    """Frame-level failure with a machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class EpisodeServer:
    """Session registry plus the frame dispatcher shared by both transports."""

    def __init__(self, session_timeout: float = DEFAULT_TIMEOUT):
        self.session_timeout = session_timeout
        self._sessions: Dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- session bookkeeping -------------------------------------------------

    def _sweep(self) -> None:
        now = time.monotonic()
        expired = [
            sid
            for sid, s in self._sessions.items()
            if now - s.touched > self.session_timeout
        ]
        for sid in expired:
            del self._sessions[sid]

    def _get_session(self, frame: dict) -> Session:
        sid = frame.get("session")
        if not isinstance(sid, str):
            raise ProtocolError("bad_request", "missing session id")
        with self._registry_lock:
            self._sweep()
            session = self._sessions.get(sid)
        if session is None:
            raise ProtocolError("session_not_found", f"no live session {sid!r}")
        return session

    # -- frame handling ------------------------------------------------------

    def handle_line(self, line: str) -> dict:
        """Parse and dispatch one raw frame; never raises."""
        try:
            try:
                frame = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProtocolError("bad_request", f"invalid JSON: {exc}") from exc
            if not isinstance(frame, dict):
                raise ProtocolError("bad_request", "frame must be a JSON object")
            kind = frame.get("kind")
            if kind == "reset":
                return self._handle_reset(frame)
            if kind == "step":
                return self._handle_step(frame)
            raise ProtocolError("bad_request", f"unknown frame kind {kind!r}")
        except ProtocolError as exc:
            return {"kind": "error", "code": exc.code, "message": str(exc)}
        except Exception as exc:  # defense in depth: no crash, no leak
            return {"kind": "error", "code": "internal", "message": str(exc)}

    def _handle_reset(self, frame: dict) -> dict:
        try:
            env = EnvKind(frame.get("env"))
        except ValueError:
            raise ProtocolError("unknown_env", f"unknown env {frame.get('env')!r}")
        seed = frame.get("seed", 0)
        if not isinstance(seed, int):
            raise ProtocolError("bad_request", "seed must be an integer")
        try:
            mode = RewardMode(frame.get("reward_mode", "vpr"))
        except ValueError:
            raise ProtocolError(
                "bad_request", f"unknown reward_mode {frame.get('reward_mode')!r}"
            )
        seat = frame.get("seat", "first")
        if seat not in ("first", "second"):
            raise ProtocolError("bad_request", "seat must be 'first' or 'second'")
        opponent = None
        if env is EnvKind.TICTACTOE:
            opponent = make_policy(
                frame.get("opponent", "mcts_player"),
                n_simulations=frame.get("opponent_sims", 10000),
                seed=frame.get("opponent_seed", 0),
            )
        verifier_cfg = SearchVerdictConfig(
            n_simulations=int(frame.get("verifier_sims", 10000))
        )
        adapter = make_adapter(env, opponent=opponent, seat=seat, verifier_cfg=verifier_cfg)
        state = adapter.reset(seed)
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            adapter=adapter,
            state=state,
            reward_mode=mode,
            seed=seed,
            mcpr_rollouts=int(frame.get("mcpr_rollouts", _MCPR_ROLLOUTS_DEFAULT)),
        )
        with self._registry_lock:
            self._sweep()
            self._sessions[session.session_id] = session
        observation = adapter.render(state)
        mark = getattr(adapter, "protagonist", "X")
        reply = {
            "kind": "reset",
            "session": session.session_id,
            "env": env.value,
            "seed": seed,
            "reward_mode": mode.value,
            "observation": observation,
            "legal_actions": self._legal_tokens(adapter, state),
            "turn": 0,
        }
        reply.update(render_prompts(env, observation, mark=mark))
        return reply

    def _legal_tokens(self, adapter, state) -> list:
        if adapter.is_terminal(state):
            return []
        return sorted(action_token(a) for a in adapter.legal(state))

    def _state_value(self, session: Session) -> float:
        """Monte Carlo value of the current state under a uniform policy."""
        adapter, state = session.adapter, session.state
        if adapter.is_terminal(state):
            outcome = adapter.outcome(state)
            if outcome.game_return is not None:
                return float(outcome.game_return)
            return float(outcome.success)
        total = 0.0
        for k in range(session.mcpr_rollouts):
            total += adapter.rollout_return(
                state, UniformRandomPolicy(), derive_seed(session.seed, session.turn, k)
            )
        return total / session.mcpr_rollouts

    def _handle_step(self, frame: dict) -> dict:
        session = self._get_session(frame)
        text = frame.get("text")
        if not isinstance(text, str):
            raise ProtocolError("bad_request", "step frame needs a text field")
        with session.lock:
            if session.done:
                raise ProtocolError("episode_done", "episode is over; reset first")
            session.touched = time.monotonic()
            adapter = session.adapter
            if session.reward_mode is RewardMode.MCPR and session.value_prev is None:
                session.value_prev = self._state_value(session)
            forfeited = False
            action = None
            try:
                action = parse_action(text, adapter.kind)
            except (FormatError, OutOfRangeError):
                forfeited = True
            if action is not None and action not in adapter.legal(session.state):
                forfeited = True
            if forfeited:
                session.done = True
                outcome = adapter.outcome(session.state, forfeited=True)
                return self._result_frame(session, reward=None, valid=None, outcome=outcome)
            session.turn += 1
            verdict = adapter.verdict(session.state, action)
            session.state = adapter.apply(
                session.state, action, seed=session.seed, ply=session.turn
            )
            done = adapter.is_terminal(session.state) or session.turn >= adapter.horizon
            reward = self._reward(session, verdict, done)
            if done:
                session.done = True
                outcome = adapter.outcome(session.state, forfeited=False)
                return self._result_frame(
                    session, reward=reward, valid=verdict.valid, outcome=outcome
                )
            observation = adapter.render(session.state)
            return {
                "kind": "step",
                "session": session.session_id,
                "turn": session.turn,
                "observation": observation,
                "legal_actions": self._legal_tokens(adapter, session.state),
                "reward": reward,
                "valid": verdict.valid,
                "done": False,
            }

    def _reward(self, session: Session, verdict, done: bool) -> float:
        adapter = session.adapter
        if session.reward_mode is RewardMode.VPR:
            return float(verdict.valid)
        if session.reward_mode is RewardMode.OUTCOME:
            if not done:
                return 0.0
            outcome = adapter.outcome(session.state, forfeited=False)
            if outcome.game_return is not None:
                return float(outcome.game_return)
            return float(outcome.success)
        # mcpr: value difference of consecutive states
        if done:
            outcome = adapter.outcome(session.state, forfeited=False)
            value_next = (
                float(outcome.game_return)
                if outcome.game_return is not None
                else float(outcome.success)
            )
        else:
            value_next = self._state_value(session)
        reward = value_next - session.value_prev
        session.value_prev = value_next
        return reward

    def _result_frame(self, session: Session, reward, valid, outcome) -> dict:
        frame = {
            "kind": "result",
            "session": session.session_id,
            "turn": session.turn,
            "done": True,
            "reward": reward,
            "valid": valid,
            "observation": session.adapter.render(session.state),
            "legal_actions": [],
            "success": outcome.success,
            "forfeited": outcome.forfeited,
        }
        if outcome.game_return is not None:
            frame["game_return"] = outcome.game_return
        if outcome.completion_rate is not None:
            frame["completion_rate"] = outcome.completion_rate
        return frame


def serve_stdio(server: Optional[EpisodeServer] = None, stdin=None, stdout=None) -> None:
    """One JSON frame per line on stdin; one response frame per line on stdout."""
    server = server or EpisodeServer()
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        reply = server.handle_line(line)
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()


def serve_http(host: str = "127.0.0.1", port: int = 8750, server: Optional[EpisodeServer] = None):
    """Blocking HTTP transport: each POST body is one frame."""
    from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

    engine = server or EpisodeServer()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length).decode("utf-8", errors="replace")
            reply = engine.handle_line(body)
            payload = json.dumps(reply).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):  # quiet by default
            pass

    httpd = ThreadingHTTPServer((host, port), Handler)
    return httpd

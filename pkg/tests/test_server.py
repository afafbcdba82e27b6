import http.client
import json
import math
import threading
import time

import pytest

from vprlab import sudoku
from vprlab.core import EnvKind
from vprlab.server import EpisodeServer, render_prompts, serve_http
from tests.test_render import EMPTY_TTT_BLOCK, FRESH_MINE_BLOCK


def frame(server, **payload):
    return server.handle_line(json.dumps(payload))


class TestReset:
    def test_tictactoe_reset_shows_empty_grid(self):
        server = EpisodeServer()
        reply = frame(server, kind="reset", env="tictactoe", seed=1)
        assert reply["kind"] == "reset"
        assert reply["observation"] == EMPTY_TTT_BLOCK
        assert "<X(0,0)>" in reply["legal_actions"]
        assert len(reply["legal_actions"]) == 9
        assert reply["user_prompt"].endswith(EMPTY_TTT_BLOCK)

    def test_minesweeper_reset(self):
        server = EpisodeServer()
        reply = frame(server, kind="reset", env="minesweeper", seed=3)
        assert reply["observation"] == FRESH_MINE_BLOCK
        assert len(reply["legal_actions"]) == 50

    def test_unknown_env_is_error(self):
        server = EpisodeServer()
        reply = frame(server, kind="reset", env="chess", seed=1)
        assert reply == {
            "kind": "error",
            "code": "unknown_env",
            "message": reply["message"],
        }

    def test_two_sessions_are_independent(self):
        server = EpisodeServer()
        a = frame(server, kind="reset", env="sudoku", seed=1)
        b = frame(server, kind="reset", env="sudoku", seed=2)
        assert a["session"] != b["session"]
        assert a["observation"] != b["observation"]


class TestStep:
    def test_sudoku_step_valid_reward(self):
        server = EpisodeServer()
        reply = frame(server, kind="reset", env="sudoku", seed=6)
        sid = reply["session"]
        ep = sudoku.generate(6)
        i = next(k for k, d in enumerate(ep.puzzle.cells) if d == 0)
        text = f"<answer><fill({i // 9 + 1},{i % 9 + 1},{ep.solution.cells[i]})></answer>"
        step = frame(server, kind="step", session=sid, text=text)
        assert step["kind"] == "step"
        assert step["reward"] == 1.0
        assert step["valid"] == 1
        assert not step["done"]

    def test_full_scripted_solve_returns_result(self):
        server = EpisodeServer()
        sid = frame(server, kind="reset", env="sudoku", seed=9)["session"]
        ep = sudoku.generate(9)
        last = None
        for i in range(81):
            if ep.puzzle.cells[i]:
                continue
            text = f"<answer><fill({i // 9 + 1},{i % 9 + 1},{ep.solution.cells[i]})></answer>"
            last = frame(server, kind="step", session=sid, text=text)
            assert last["kind"] in ("step", "result")
        assert last["kind"] == "result"
        assert last["success"] is True
        assert last["completion_rate"] == 1.0

    def test_malformed_action_forfeits_with_result_frame(self):
        server = EpisodeServer()
        sid = frame(server, kind="reset", env="tictactoe", seed=2)["session"]
        reply = frame(server, kind="step", session=sid, text="I refuse to answer")
        assert reply["kind"] == "result"
        assert reply["forfeited"] is True
        assert reply["game_return"] == -1.0

    def test_step_after_done_is_error(self):
        server = EpisodeServer()
        sid = frame(server, kind="reset", env="tictactoe", seed=2)["session"]
        frame(server, kind="step", session=sid, text="junk")  # forfeits
        reply = frame(server, kind="step", session=sid, text="<answer><X(0,0)></answer>")
        assert reply["kind"] == "error"
        assert reply["code"] == "episode_done"

    def test_unknown_session_is_error(self):
        server = EpisodeServer()
        reply = frame(server, kind="step", session="nope", text="x")
        assert reply["code"] == "session_not_found"

    def test_expired_session_is_error(self):
        server = EpisodeServer(session_timeout=0.0)
        sid = frame(server, kind="reset", env="sudoku", seed=1)["session"]
        time.sleep(0.01)
        reply = frame(server, kind="step", session=sid, text="x")
        assert reply["code"] == "session_not_found"


class TestRewardModes:
    def test_outcome_mode_sparse(self):
        server = EpisodeServer()
        sid = frame(
            server, kind="reset", env="sudoku", seed=9, reward_mode="outcome"
        )["session"]
        ep = sudoku.generate(9)
        rewards = []
        for i in range(81):
            if ep.puzzle.cells[i]:
                continue
            text = f"<answer><fill({i // 9 + 1},{i % 9 + 1},{ep.solution.cells[i]})></answer>"
            rewards.append(frame(server, kind="step", session=sid, text=text)["reward"])
        assert rewards[:-1] == [0.0] * 39
        assert rewards[-1] == 1.0

    def test_mcpr_mode_telescopes(self):
        server = EpisodeServer()
        sid = frame(
            server,
            kind="reset",
            env="sudoku",
            seed=4,
            reward_mode="mcpr",
            mcpr_rollouts=3,
        )["session"]
        ep = sudoku.generate(4)
        rewards = []
        reply = None
        for i in range(81):
            if ep.puzzle.cells[i]:
                continue
            text = f"<answer><fill({i // 9 + 1},{i % 9 + 1},{ep.solution.cells[i]})></answer>"
            reply = frame(server, kind="step", session=sid, text=text)
            rewards.append(reply["reward"])
        assert reply["kind"] == "result" and reply["success"]
        # telescopes to 1.0 - V(s1); every value lies in [0, 1]
        total = math.fsum(rewards)
        assert -1.0 <= total <= 1.0


class TestRobustness:
    @pytest.mark.parametrize(
        "line",
        [
            "not json at all",
            "[1,2,3]",
            '{"kind": "unknown"}',
            '{"kind": "step"}',
            '{"kind": "reset", "env": "sudoku", "seed": "NaN"}',
            '{"kind": "reset"}',
            "\x00\xff garbage bytes",
            '{"kind": "reset", "env": "tictactoe", "seat": "third", "seed": 0}',
        ],
    )
    def test_garbage_yields_error_frames(self, line):
        server = EpisodeServer()
        reply = server.handle_line(line)
        assert reply["kind"] == "error"
        assert "code" in reply and "message" in reply

    def test_garbage_does_not_disturb_live_sessions(self):
        server = EpisodeServer()
        sid = frame(server, kind="reset", env="sudoku", seed=6)["session"]
        server.handle_line("garbage")
        ep = sudoku.generate(6)
        i = next(k for k, d in enumerate(ep.puzzle.cells) if d == 0)
        text = f"<answer><fill({i // 9 + 1},{i % 9 + 1},{ep.solution.cells[i]})></answer>"
        assert frame(server, kind="step", session=sid, text=text)["kind"] == "step"


class TestPrompts:
    def test_prompts_split_cleanly(self):
        prompts = render_prompts(EnvKind.SUDOKU, "GRID")
        assert prompts["system_prompt"].startswith("You are an AI agent")
        assert prompts["user_prompt"].endswith("GRID")

    def test_tictactoe_second_seat_mark(self):
        prompts = render_prompts(EnvKind.TICTACTOE, "GRID", mark="O")
        assert "Your mark is O." in prompts["user_prompt"]


class TestHttpTransport:
    def test_post_roundtrip(self):
        httpd = serve_http(port=0)
        thread = threading.Thread(target=httpd.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = httpd.server_address
            conn = http.client.HTTPConnection(host, port, timeout=5)
            body = json.dumps({"kind": "reset", "env": "tictactoe", "seed": 1})
            conn.request("POST", "/", body=body)
            reply = json.loads(conn.getresponse().read())
            assert reply["kind"] == "reset"
            assert reply["observation"] == EMPTY_TTT_BLOCK
            conn.request("POST", "/", body="junk")
            reply = json.loads(conn.getresponse().read())
            assert reply["kind"] == "error"
        finally:
            httpd.shutdown()
            thread.join(timeout=5)

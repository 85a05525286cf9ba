"""Shared fixtures: canned task configs, trajectory builders, a stub chat server."""

from __future__ import annotations

import hashlib
import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from retrace.model import (
    Origin,
    Step,
    TaskInstruction,
    TaskKind,
    Termination,
    Trajectory,
)

# --- canned instructions -------------------------------------------------


def household_instruction(**overrides) -> TaskInstruction:
    """Vase-in-safe task with a four-action solution."""
    fields = dict(
        id="hh-fixture",
        task_kind=TaskKind.HOUSEHOLD,
        instruction_text="Put the vase in the safe.",
        env_config={
            "locations": ["microwave", "fridge", "shelf", "safe"],
            "objects": {"vase": "shelf", "mug": "fridge"},
            "goal": {"object": "vase", "target": "safe", "treatment": None},
        },
        max_steps=30,
        context_budget=8000,
    )
    fields.update(overrides)
    return TaskInstruction(**fields)


def shopping_instruction(**overrides) -> TaskInstruction:
    """Five-item catalog; the red cotton shirt at $25 is the only full match."""
    fields = dict(
        id="sh-fixture",
        task_kind=TaskKind.SHOPPING,
        instruction_text="Buy a red cotton shirt for at most $30.",
        env_config={
            "catalog": [
                {"id": "item-a1", "title": "red cotton shirt", "attrs": ["red", "cotton"], "price": 25},
                {"id": "item-b2", "title": "red wool shirt", "attrs": ["red", "wool"], "price": 20},
                {"id": "item-c3", "title": "blue cotton shirt", "attrs": ["blue", "cotton"], "price": 15},
                {"id": "item-d4", "title": "red cotton jacket", "attrs": ["red", "cotton"], "price": 55},
                {"id": "item-e5", "title": "green canvas bag", "attrs": ["green", "canvas"], "price": 10},
            ],
            "required_attrs": ["red", "cotton"],
            "price_ceiling": 30,
            "query_index": {
                "shirt": ["item-a1", "item-b2", "item-c3"],
                "red shirt": ["item-a1", "item-b2"],
                "bag": ["item-e5"],
            },
        },
        max_steps=10,
        context_budget=8000,
    )
    fields.update(overrides)
    return TaskInstruction(**fields)


@pytest.fixture
def hh_instruction() -> TaskInstruction:
    return household_instruction()


@pytest.fixture
def sh_instruction() -> TaskInstruction:
    return shopping_instruction()


# --- synthetic trajectory builders ---------------------------------------

_WORDS = "move check open place fetch warm chill locate carry inspect".split()


def _text(rng: random.Random, n_words: int = 4) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_words))


def make_trajectory(
    rng: random.Random,
    n_steps: int | None = None,
    error_positions: tuple[int, ...] = (),
    reward: float = 1.0,
    termination: Termination = Termination.SUCCESS,
    kind: TaskKind = TaskKind.HOUSEHOLD,
    instruction_id: str | None = None,
) -> Trajectory:
    """Structurally valid trajectory with arbitrary content.

    ``error_positions`` are 1-based indices to mark delta=false; each gets a
    teacher_correction step inserted right after it (except at the end).
    """
    if n_steps is None:
        n_steps = rng.randint(1, 6)
    steps: list[Step] = []
    for base_index in range(1, n_steps + 1):
        is_error = base_index in error_positions
        steps.append(
            Step(
                index=len(steps) + 1,
                thought=_text(rng),
                action=_text(rng, 2),
                observation=_text(rng, 5),
                delta=not is_error,
                origin=Origin.BASE_POLICY,
            )
        )
        if is_error and base_index != n_steps:
            steps.append(
                Step(
                    index=len(steps) + 1,
                    thought=_text(rng),
                    action=_text(rng, 2),
                    observation=_text(rng, 5),
                    delta=True,
                    origin=Origin.TEACHER_CORRECTION,
                )
            )
    instruction = TaskInstruction(
        id=instruction_id or f"{kind.value}-{rng.randrange(10**8):08d}",
        task_kind=kind,
        instruction_text=_text(rng, 6),
        env_config={},
        max_steps=max(len(steps), 1),
        context_budget=64000,
    )
    return Trajectory(
        instruction=instruction, steps=tuple(steps), reward=reward, termination=termination
    )


def random_valid_trajectory(rng: random.Random, kind: TaskKind = TaskKind.HOUSEHOLD) -> Trajectory:
    """Random mix of clean successes, reflected successes, and failures."""
    n = rng.randint(1, 6)
    candidates = list(range(1, n + 1))
    rng.shuffle(candidates)
    errors = tuple(sorted(candidates[: rng.randint(0, min(2, n))]))
    scenario = rng.random()
    if scenario < 0.6:
        reward, termination = 1.0, Termination.SUCCESS
    elif scenario < 0.8:
        reward, termination = rng.choice([0.0, 0.25, 0.5]), Termination.ENV_DONE_PARTIAL
    else:
        reward, termination = 0.0, rng.choice(
            [Termination.STEP_LIMIT, Termination.CONTEXT_LIMIT]
        )
    return make_trajectory(
        rng, n_steps=n, error_positions=errors, reward=reward, termination=termination, kind=kind
    )


# --- deterministic log-prob providers ------------------------------------


def make_logprob_provider(seed: int, scale: float = 3.0):
    """Content-addressed pseudo-random provider, always <= 0."""

    def provider(prefix, segment) -> float:
        ctx = "\x1f".join(s.content for s in prefix)
        digest = hashlib.sha256(f"{seed}|{ctx}|{segment.content}".encode()).hexdigest()
        return -(int(digest[:12], 16) / 16**12) * scale

    return provider


# --- stub chat-completions server ----------------------------------------


class StubChatServer:
    """Local OpenAI-style endpoint that records every request payload.

    ``responder`` maps a request payload to the assistant reply. It may
    instead return an int to force that HTTP status, or a dict to send as
    the raw JSON body (for malformed-shape tests). Runs threaded so
    blocking clients in the test process can reach it.
    """

    def __init__(self, responder=None):
        self.requests: list[dict] = []
        self.responder = responder or (lambda payload: "Thought: placeholder\nAction: look")
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length))
                with stub._lock:
                    stub.requests.append(
                        {"path": self.path, "headers": dict(self.headers), "body": payload}
                    )
                outcome = stub.responder(payload)
                if isinstance(outcome, int):
                    self.send_response(outcome)
                    self.end_headers()
                    return
                if isinstance(outcome, dict):
                    body = json.dumps(outcome).encode()
                else:
                    body = json.dumps(
                        {"choices": [{"message": {"role": "assistant", "content": outcome}}]}
                    ).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def __enter__(self) -> "StubChatServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_server():
    with StubChatServer() as server:
        yield server

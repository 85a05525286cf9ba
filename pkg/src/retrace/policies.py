"""Acting models behind one decide() contract.

Three implementations:

- ScriptedPolicy walks the planner's solution for its task.
- NoisyPolicy wraps the scripted one and, with a seeded per-step coin,
  substitutes a deterministic corruption of the planned action. The plan
  cursor still advances on corrupted steps: the policy believes it executed
  its plan, so uncorrected mistakes desynchronize it from the real state.
  A teacher correction realigns the cursor (see note_correction).
- RemotePolicy renders the context as a chat transcript and asks an
  endpoint for the next step at temperature 0.

Sessions are per-trajectory and single-threaded; one policy object can
serve many concurrent sessions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from .chat import ChatClient, ChatMessage
from .environments import make_environment
from .model import Step, TaskInstruction, TaskKind
from .react import parse, render


@dataclass(frozen=True)
class PolicyContext:
    """Everything the acting model may condition on for one decision."""

    task_requirements: str
    instruction_text: str
    history: tuple[Step, ...] = ()


class ErrorKind(str, Enum):
    WRONG_OBJECT = "wrong_object"
    WRONG_LOCATION = "wrong_location"
    PREMATURE_TERMINAL = "premature_terminal"


@dataclass(frozen=True)
class NoiseSchedule:
    seed: int
    error_rate: float
    error_kind: ErrorKind

    def __post_init__(self):
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError(f"error_rate must be in [0, 1], got {self.error_rate}")


class PolicySession(Protocol):
    def decide(self, ctx: PolicyContext) -> tuple[str, str]: ...

    def note_correction(self, thought: str, action: str) -> None: ...


class Policy(Protocol):
    def open_session(self, instruction: TaskInstruction) -> PolicySession: ...

    def describe(self) -> str: ...


class _ScriptedSession:
    """Blind cursor over the static golden plan.

    The cursor advances on every own emission and never inspects
    observations; it re-syncs only through note_correction.
    """

    def __init__(self, instruction: TaskInstruction):
        self._env = make_environment(instruction)  # scratch copy, used read-only
        self._env.reset()
        self._plan = self._env.golden_plan()
        self._cursor = 0

    def decide(self, ctx: PolicyContext) -> tuple[str, str]:
        if self._cursor < len(self._plan):
            pair = self._plan[self._cursor]
            self._cursor += 1
            return pair
        # plan exhausted but the episode keeps going: probe instead of stall
        return (self._env.describe_intent("look"), "look")

    def note_correction(self, thought: str, action: str) -> None:
        for k, (_, planned) in enumerate(self._plan):
            if planned == action:
                self._cursor = k + 1
                return
        # repair action outside the plan (e.g. dropping a wrongly taken
        # object): the plan position itself is still right

    def intent_for(self, action: str) -> str:
        return self._env.describe_intent(action)

    @property
    def plan_actions(self) -> list[str]:
        return [a for (_, a) in self._plan]


class ScriptedPolicy:
    def open_session(self, instruction: TaskInstruction) -> _ScriptedSession:
        return _ScriptedSession(instruction)

    def describe(self) -> str:
        return "scripted"


class _NoisySession:
    def __init__(self, instruction: TaskInstruction, schedule: NoiseSchedule):
        self._inner = _ScriptedSession(instruction)
        self._schedule = schedule
        # seeded per instruction id so concurrency cannot reorder draws
        self._rng = random.Random(f"{schedule.seed}:{instruction.id}")
        self._kind = instruction.task_kind
        cfg = instruction.env_config
        if self._kind is TaskKind.HOUSEHOLD:
            self._locations = sorted(cfg["locations"])
            self._objects = sorted(cfg["objects"])
            self._terms: list[str] = []
            self._item_ids: list[str] = []
        else:
            self._locations = []
            self._objects = []
            self._terms = sorted(cfg["query_index"])
            self._item_ids = sorted(item["id"] for item in cfg["catalog"])

    def decide(self, ctx: PolicyContext) -> tuple[str, str]:
        thought, action = self._inner.decide(ctx)
        if self._rng.random() < self._schedule.error_rate:
            corrupted = self._corrupt(action)
            if corrupted != action:
                return (self._inner.intent_for(corrupted), corrupted)
        return (thought, action)

    def note_correction(self, thought: str, action: str) -> None:
        self._inner.note_correction(thought, action)

    def _corrupt(self, planned: str) -> str:
        kind = self._schedule.error_kind
        if kind is ErrorKind.PREMATURE_TERMINAL:
            return self._inner.plan_actions[-1] if self._kind is TaskKind.HOUSEHOLD else "buy"
        if self._kind is TaskKind.HOUSEHOLD:
            if kind is ErrorKind.WRONG_LOCATION:
                exclude = planned[len("go to "):] if planned.startswith("go to ") else None
                choices = [l for l in self._locations if l != exclude]
                return f"go to {self._rng.choice(choices)}" if choices else planned
            exclude = planned[len("take "):] if planned.startswith("take ") else None
            choices = [o for o in self._objects if o != exclude]
            return f"take {self._rng.choice(choices)}" if choices else planned
        if kind is ErrorKind.WRONG_LOCATION:
            exclude = planned[len("search["):-1] if planned.startswith("search[") else None
            terms = [t for t in self._terms if t != exclude]
            return f"search[{self._rng.choice(terms)}]" if terms else "search[odds and ends]"
        exclude = planned[len("click["):-1] if planned.startswith("click[") else None
        ids = [i for i in self._item_ids if i != exclude]
        return f"click[{self._rng.choice(ids)}]" if ids else planned


class NoisyPolicy:
    def __init__(self, schedule: NoiseSchedule):
        self.schedule = schedule

    def open_session(self, instruction: TaskInstruction) -> _NoisySession:
        return _NoisySession(instruction, self.schedule)

    def describe(self) -> str:
        s = self.schedule
        return f"noisy(seed={s.seed},error_rate={s.error_rate},error_kind={s.error_kind.value})"


class _RemoteSession:
    def __init__(self, client: ChatClient, max_tokens: int):
        self._client = client
        self._max_tokens = max_tokens

    def decide(self, ctx: PolicyContext) -> tuple[str, str]:
        messages = [
            ChatMessage("system", ctx.task_requirements),
            ChatMessage("user", ctx.instruction_text),
        ]
        for step in ctx.history:
            messages.append(ChatMessage("assistant", render(step.thought, step.action)))
            messages.append(ChatMessage("user", step.observation))
        reply = self._client.complete(messages, max_tokens=self._max_tokens)
        parsed = parse(reply)
        return (parsed.thought, parsed.action)

    def note_correction(self, thought: str, action: str) -> None:
        # corrections reach the model through ctx.history on the next call
        pass


class RemotePolicy:
    def __init__(self, client: ChatClient, max_tokens: int = 512):
        self._client = client
        self._max_tokens = max_tokens

    def open_session(self, instruction: TaskInstruction) -> _RemoteSession:
        return _RemoteSession(self._client, self._max_tokens)

    def describe(self) -> str:
        return f"remote(model={self._client.model})"

"""Environment contract shared by the built-in simulators.

An environment is a deterministic state machine over text actions: identical
config plus identical action sequence always yields identical observations,
rewards, and done flags. Invalid actions are executable no-ops answering
"Nothing happens." so that erroneous steps still produce recordable
observations.

Subclasses implement the latent-state transition (``_apply``) plus a planner
(``plan_from_here``) that returns actions completing the task from the
current state; the planner doubles as the golden-plan oracle and as the
knowledge source for the oracle teacher.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

from ..model import TaskInstruction

NOTHING_HAPPENS = "Nothing happens."


class ConfigError(ValueError):
    """env_config violates the environment's invariants."""


class StepAfterDone(RuntimeError):
    """step() called on a finished episode."""


class StepBudgetExhausted(RuntimeError):
    """step() called past max_steps; callers convert this to a step_limit."""


class PlanNotFound(RuntimeError):
    """No action sequence completes the task from the current state."""


@dataclass(frozen=True)
class StepResult:
    observation: str
    done: bool
    reward: float


class Environment(ABC):
    """Single-threaded, stateful; one instance per episode."""

    def __init__(self, instruction: TaskInstruction):
        self.instruction = instruction
        self.step_count = 0
        self.done = False
        self._ready = False

    def reset(self) -> str:
        self.step_count = 0
        self.done = False
        self._ready = True
        return self._reset()

    def step(self, action: str) -> StepResult:
        if not self._ready:
            raise RuntimeError("reset() must be called before step()")
        if self.done:
            raise StepAfterDone(f"episode for {self.instruction.id!r} already finished")
        if self.step_count >= self.instruction.max_steps:
            raise StepBudgetExhausted(
                f"{self.instruction.id!r}: max_steps={self.instruction.max_steps} exhausted"
            )
        self.step_count += 1
        result = self._apply(action.strip())
        self.done = result.done
        return result

    @abstractmethod
    def _reset(self) -> str:
        """Initialize latent state; return the opening observation."""

    @abstractmethod
    def _apply(self, action: str) -> StepResult:
        """Execute one (possibly invalid) action against the latent state."""

    @abstractmethod
    def plan_from_here(self) -> list[str]:
        """Actions that complete the task from the current latent state.

        Empty list iff the episode is done. Raises PlanNotFound when the
        config invariants were bypassed and no plan exists.
        """

    @abstractmethod
    def describe_intent(self, action: str) -> str:
        """First-person thought text justifying ``action``; pure."""

    def golden_plan(self) -> list[tuple[str, str]]:
        """The (thought, action) plan from the current state."""
        return [(self.describe_intent(a), a) for a in self.plan_from_here()]

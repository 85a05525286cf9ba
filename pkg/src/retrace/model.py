"""Core domain types shared by every pipeline stage.

The atom of everything here is the :class:`Step`: one (thought, action,
observation) triple with a learnability bit (``delta``) and an origin tag.
Steps are grouped into a :class:`Trajectory` against a
:class:`TaskInstruction`; the teacher's per-step judgment is a
:class:`Verdict`.

All types are immutable after construction. Validation is deliberately kept
out of the constructors: :func:`validate_trajectory` is a total function that
reports every violation as a human-readable string, so callers can build
arbitrary (including deliberately broken) objects and inspect them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence


class TaskKind(str, Enum):
    HOUSEHOLD = "household"
    SHOPPING = "shopping"
    SCIENCE_STUB = "science-stub"


class Origin(str, Enum):
    GOLDEN = "golden"
    BASE_POLICY = "base_policy"
    TEACHER_CORRECTION = "teacher_correction"


class Termination(str, Enum):
    SUCCESS = "success"
    ENV_DONE_PARTIAL = "env_done_partial"
    STEP_LIMIT = "step_limit"
    CONTEXT_LIMIT = "context_limit"


@dataclass(frozen=True)
class TaskInstruction:
    """One agent task: the text shown to the policy plus its environment setup.

    ``env_config`` is an opaque parameter blob interpreted by the matching
    environment; ``context_budget`` is a character-count proxy for the model
    context window.
    """

    id: str
    task_kind: TaskKind
    instruction_text: str
    env_config: Mapping = field(default_factory=dict)
    max_steps: int = 30
    context_budget: int = 8000


@dataclass(frozen=True)
class Step:
    """One interaction step.

    ``delta`` is the learnability bit: True means the step may contribute
    training loss, False marks it as judged erroneous. Correction and golden
    steps always carry ``delta=True``.
    """

    index: int
    thought: str
    action: str
    observation: str
    delta: bool = True
    origin: Origin = Origin.BASE_POLICY


@dataclass(frozen=True)
class Trajectory:
    instruction: TaskInstruction
    steps: tuple[Step, ...]
    reward: float
    termination: Termination

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def error_count(self) -> int:
        return sum(1 for s in self.steps if not s.delta)


@dataclass(frozen=True)
class StepError:
    """Payload of an erroneous verdict, all first-person text."""

    error_content: str
    error_reason: str
    reflection: str
    corrective_action: str


@dataclass(frozen=True)
class Verdict:
    """Teacher judgment of a single step: correct, or an error record."""

    error: StepError | None = None

    @property
    def is_correct(self) -> bool:
        return self.error is None

    @classmethod
    def correct(cls) -> "Verdict":
        return cls()

    @classmethod
    def erroneous(
        cls,
        error_content: str,
        error_reason: str,
        reflection: str,
        corrective_action: str,
    ) -> "Verdict":
        return cls(StepError(error_content, error_reason, reflection, corrective_action))


@dataclass(frozen=True)
class DatasetSplit:
    """Golden corpus partitioned for the three pipeline stages.

    ``d1`` trains the base agent; the tasks behind ``d2_instructions`` feed
    trajectory synthesis; ``dr`` is the filtered reflection set.
    """

    all: tuple[Trajectory, ...]
    d1: tuple[Trajectory, ...]
    d2_instructions: tuple[TaskInstruction, ...]
    dr: tuple[Trajectory, ...]


def validate_trajectory(traj: Trajectory) -> list[str]:
    """Return one human-readable entry per violated invariant (empty = valid).

    Pure and total: never raises, same input gives same output.
    """
    violations: list[str] = []
    instr = traj.instruction

    if instr.max_steps < 1:
        violations.append(f"instruction {instr.id!r}: max_steps must be >= 1, got {instr.max_steps}")
    if instr.context_budget < 1:
        violations.append(
            f"instruction {instr.id!r}: context_budget must be >= 1, got {instr.context_budget}"
        )

    for pos, step in enumerate(traj.steps, start=1):
        if step.index != pos:
            violations.append(f"step at position {pos} has index {step.index}; indices must run 1..n")
        if not step.thought.strip():
            violations.append(f"step {step.index}: thought is empty")
        if not step.action.strip():
            violations.append(f"step {step.index}: action is empty")
        if step.origin is Origin.TEACHER_CORRECTION and not step.delta:
            violations.append(f"step {step.index}: teacher_correction steps must have delta=True")
        if step.origin is Origin.GOLDEN and not step.delta:
            violations.append(f"step {step.index}: golden steps must have delta=True")

    if not 0.0 <= traj.reward <= 1.0:
        violations.append(f"reward {traj.reward} outside [0, 1]")
    if traj.termination in (Termination.STEP_LIMIT, Termination.CONTEXT_LIMIT) and traj.reward != 0.0:
        violations.append(
            f"termination={traj.termination.value} requires reward 0, got {traj.reward}"
        )
    if (traj.reward == 1.0) != (traj.termination is Termination.SUCCESS):
        violations.append(
            f"reward 1 and termination=success must coincide "
            f"(reward={traj.reward}, termination={traj.termination.value})"
        )

    n = len(traj.steps)
    for step in traj.steps:
        if not step.delta and step.index < n:
            follower = traj.steps[step.index]  # 0-based: the step at index+1
            if follower.origin is not Origin.TEACHER_CORRECTION:
                violations.append(
                    f"step {step.index} is marked erroneous but step {step.index + 1} "
                    f"is not a teacher correction"
                )
    return violations


# --- JSONL serialization -------------------------------------------------
#
# Trajectory records use a fixed key order and compact separators so that
# identical data always produces identical bytes:
#   {"id", "task_kind", "instruction", "max_steps", "context_budget",
#    "reward", "termination", "steps": [{"i", "thought", "action",
#    "observation", "delta", "origin"}]}
# env_config is not part of the trajectory record; it travels in the
# instruction file and is re-attached on load via a lookup.


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def trajectory_to_dict(traj: Trajectory) -> dict:
    instr = traj.instruction
    return {
        "id": instr.id,
        "task_kind": instr.task_kind.value,
        "instruction": instr.instruction_text,
        "max_steps": instr.max_steps,
        "context_budget": instr.context_budget,
        "reward": traj.reward,
        "termination": traj.termination.value,
        "steps": [
            {
                "i": s.index,
                "thought": s.thought,
                "action": s.action,
                "observation": s.observation,
                "delta": s.delta,
                "origin": s.origin.value,
            }
            for s in traj.steps
        ],
    }


def trajectory_from_dict(obj: Mapping, env_config: Mapping | None = None) -> Trajectory:
    instr = TaskInstruction(
        id=obj["id"],
        task_kind=TaskKind(obj["task_kind"]),
        instruction_text=obj["instruction"],
        env_config=dict(env_config or {}),
        max_steps=obj["max_steps"],
        context_budget=obj["context_budget"],
    )
    steps = tuple(
        Step(
            index=s["i"],
            thought=s["thought"],
            action=s["action"],
            observation=s["observation"],
            delta=s["delta"],
            origin=Origin(s["origin"]),
        )
        for s in obj["steps"]
    )
    return Trajectory(
        instruction=instr,
        steps=steps,
        reward=obj["reward"],
        termination=Termination(obj["termination"]),
    )


def write_trajectories(path, trajectories: Iterable[Trajectory]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for traj in trajectories:
            fh.write(_dumps(trajectory_to_dict(traj)))
            fh.write("\n")


def read_trajectories(path, env_configs: Mapping[str, Mapping] | None = None) -> list[Trajectory]:
    """Load a trajectory JSONL file, re-attaching env configs by id if given."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            cfg = (env_configs or {}).get(obj["id"])
            out.append(trajectory_from_dict(obj, env_config=cfg))
    return out


def instruction_to_dict(instr: TaskInstruction) -> dict:
    return {
        "id": instr.id,
        "task_kind": instr.task_kind.value,
        "instruction_text": instr.instruction_text,
        "max_steps": instr.max_steps,
        "context_budget": instr.context_budget,
        "env_config": dict(instr.env_config),
    }


def instruction_from_dict(obj: Mapping) -> TaskInstruction:
    return TaskInstruction(
        id=obj["id"],
        task_kind=TaskKind(obj["task_kind"]),
        instruction_text=obj["instruction_text"],
        env_config=dict(obj["env_config"]),
        max_steps=obj["max_steps"],
        context_budget=obj["context_budget"],
    )


def write_instructions(path, instructions: Iterable[TaskInstruction]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for instr in instructions:
            fh.write(_dumps(instruction_to_dict(instr)))
            fh.write("\n")


def read_instructions(path) -> list[TaskInstruction]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(instruction_from_dict(json.loads(line)))
    return out


def iter_jsonl(path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)

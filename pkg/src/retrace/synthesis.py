"""The monitored interaction loop plus the dataset split and the kept-set filter.

One synthesized trajectory comes from one policy session acting in one
environment while an optional teacher session judges every executed step.
On an erroneous step the step is marked unlearnable (delta=false) and the
teacher's correction is executed as the immediately following step; on a
correct step nothing is inserted. Corrections consume the same step budget
as policy actions, and the rendered transcript is checked against the
context budget after every appended step.

Failure handling is deliberately non-raising: format failures and abort
conditions produce finished trajectories with reward 0 plus a failure
reason, so batch runs always yield one record per instruction. Only
transport-level trouble (RemoteUnavailable) propagates.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .environments import make_environment
from .model import (
    DatasetSplit,
    Origin,
    Step,
    TaskInstruction,
    TaskKind,
    Termination,
    Trajectory,
)
from .policies import Policy, PolicyContext
from .prompts import format_history, policy_system_prompt, task_requirements
from .react import InvalidField, MalformedReact, render
from .teachers import Teacher, UnparseableVerdict, reformat_correction

# Abort a trajectory once this many consecutive errors go uncorrected
# (unusable corrective actions); with a working teacher it never triggers.
MAX_UNCORRECTED_STREAK = 3

DEFAULT_ERROR_CAPS = {
    TaskKind.HOUSEHOLD: 2,
    TaskKind.SCIENCE_STUB: 2,
    TaskKind.SHOPPING: 1,
}


class EmptyTask(ValueError):
    """A dataset operation received no trajectories for some task."""


class MissingThreshold(KeyError):
    """filter_self_reflected got no error cap for a task kind."""


@dataclass(frozen=True)
class SynthesisResult:
    trajectory: Trajectory
    failure: str | None = None
    incidents: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.failure is None


def _transcript_chars(system_text: str, instruction_text: str, steps: Sequence[Step]) -> int:
    return len(system_text) + len(instruction_text) + len(format_history(list(steps))) + 4


def synthesize_one(
    instruction: TaskInstruction,
    policy: Policy,
    teacher: Teacher | None = None,
    one_shot: bool = False,
) -> SynthesisResult:
    env = make_environment(instruction)
    env.reset()
    policy_session = policy.open_session(instruction)
    teacher_session = teacher.open_session(instruction) if teacher is not None else None
    system_text = policy_system_prompt(instruction.task_kind, one_shot)
    judge_requirements = task_requirements(instruction.task_kind)

    steps: list[Step] = []
    incidents: list[str] = []
    failure: str | None = None
    uncorrected_streak = 0
    reward = 0.0
    termination = Termination.STEP_LIMIT

    def over_budget() -> bool:
        chars = _transcript_chars(system_text, instruction.instruction_text, steps)
        return chars > instruction.context_budget

    def settle(result_reward: float) -> tuple[float, Termination]:
        if result_reward == 1.0:
            return 1.0, Termination.SUCCESS
        return result_reward, Termination.ENV_DONE_PARTIAL

    while True:
        if env.step_count >= instruction.max_steps:
            reward, termination = 0.0, Termination.STEP_LIMIT
            break

        ctx = PolicyContext(system_text, instruction.instruction_text, tuple(steps))
        try:
            thought, action = policy_session.decide(ctx)
            render(thought, action)  # reject content that cannot be serialized
        except (MalformedReact, InvalidField) as exc:
            failure = f"format failure at step {len(steps) + 1}: {exc}"
            reward, termination = 0.0, Termination.STEP_LIMIT
            break

        result = env.step(action)
        candidate = Step(
            index=len(steps) + 1,
            thought=thought,
            action=action,
            observation=result.observation,
            delta=True,
            origin=Origin.BASE_POLICY,
        )
        steps.append(candidate)
        if over_budget():
            reward, termination = 0.0, Termination.CONTEXT_LIMIT
            break

        verdict = None
        if teacher_session is not None:
            try:
                verdict = teacher_session.judge(
                    judge_requirements,
                    instruction.instruction_text,
                    tuple(steps[:-1]),
                    candidate,
                    result.observation,
                )
            except UnparseableVerdict as exc:
                incidents.append(f"step {candidate.index}: unparseable verdict: {exc}")

        if verdict is None or verdict.is_correct:
            if verdict is not None:
                uncorrected_streak = 0
            if result.done:
                reward, termination = settle(result.reward)
                break
            continue

        # erroneous step: mark it, then try to append the correction
        steps[-1] = replace(candidate, delta=False)
        if result.done:
            # terminal mistakes cannot be corrected; the episode is over
            reward, termination = settle(result.reward)
            break
        try:
            corr_thought, corr_action = reformat_correction(verdict)
            render(corr_thought, corr_action)
        except InvalidField as exc:
            # no usable correction: keep the step unmarked rather than
            # leave a dangling error, and give up after a short streak
            steps[-1] = candidate
            incidents.append(f"step {candidate.index}: unusable correction: {exc}")
            uncorrected_streak += 1
            if uncorrected_streak >= MAX_UNCORRECTED_STREAK:
                failure = (
                    f"aborted after {MAX_UNCORRECTED_STREAK} consecutive uncorrected errors"
                )
                reward, termination = 0.0, Termination.STEP_LIMIT
                break
            continue

        if env.step_count >= instruction.max_steps:
            reward, termination = 0.0, Termination.STEP_LIMIT
            break
        corr_result = env.step(corr_action)
        steps.append(
            Step(
                index=len(steps) + 1,
                thought=corr_thought,
                action=corr_action,
                observation=corr_result.observation,
                delta=True,
                origin=Origin.TEACHER_CORRECTION,
            )
        )
        policy_session.note_correction(corr_thought, corr_action)
        teacher_session.note_correction(corr_thought, corr_action)
        uncorrected_streak = 0
        if over_budget():
            reward, termination = 0.0, Termination.CONTEXT_LIMIT
            break
        if corr_result.done:
            reward, termination = settle(corr_result.reward)
            break

    trajectory = Trajectory(
        instruction=instruction,
        steps=tuple(steps),
        reward=reward,
        termination=termination,
    )
    return SynthesisResult(trajectory=trajectory, failure=failure, incidents=tuple(incidents))


def synthesize_many(
    instructions: Sequence[TaskInstruction],
    policy: Policy,
    teacher: Teacher | None = None,
    one_shot: bool = False,
    parallelism: int = 1,
) -> list[SynthesisResult]:
    """Run synthesize_one per instruction; results sorted by instruction id.

    Per-trajectory seeding makes the outcome independent of scheduling, so
    any parallelism level produces identical artifacts.
    """
    if parallelism <= 1:
        results = [synthesize_one(i, policy, teacher, one_shot) for i in instructions]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(
                pool.map(lambda i: synthesize_one(i, policy, teacher, one_shot), instructions)
            )
    return sorted(results, key=lambda r: r.trajectory.instruction.id)


def split_dataset(
    golden: Sequence[Trajectory], fraction: float, seed: int
) -> tuple[list[Trajectory], list[Trajectory]]:
    """Per-kind seeded partition: round(fraction * count) into the first half."""
    if not golden:
        raise EmptyTask("no golden trajectories to split")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    rng = random.Random(seed)
    d1: list[Trajectory] = []
    d2: list[Trajectory] = []
    kinds = sorted({t.instruction.task_kind for t in golden}, key=lambda k: k.value)
    for kind in kinds:
        group = [t for t in golden if t.instruction.task_kind is kind]
        take = round(fraction * len(group))
        chosen = set(rng.sample(range(len(group)), take))
        for idx, traj in enumerate(group):
            (d1 if idx in chosen else d2).append(traj)
    return d1, d2


def filter_self_reflected(
    trajs: Sequence[Trajectory],
    max_errors_by_kind: Mapping[TaskKind | str, int] | None = None,
) -> list[Trajectory]:
    """Keep reward-1 trajectories whose error count is within the kind's cap."""
    caps: dict[TaskKind, int] = {}
    for key, value in (max_errors_by_kind or DEFAULT_ERROR_CAPS).items():
        caps[TaskKind(key) if isinstance(key, str) else key] = value
    kept = []
    for traj in trajs:
        kind = traj.instruction.task_kind
        if kind not in caps:
            raise MissingThreshold(kind.value)
        if traj.reward == 1.0 and 1 <= traj.error_count <= caps[kind]:
            kept.append(traj)
    return kept


def build_split(
    golden: Sequence[Trajectory],
    fraction: float,
    seed: int,
    kept: Sequence[Trajectory],
) -> DatasetSplit:
    d1, d2 = split_dataset(golden, fraction, seed)
    return DatasetSplit(
        all=tuple(golden),
        d1=tuple(d1),
        d2_instructions=tuple(t.instruction for t in d2),
        dr=tuple(kept),
    )

"""Evaluation harness: average reward and completion rate over a task set.

Episodes run without any teacher. Step-limit and context-limit terminations
already carry reward 0 by construction, so the average is a plain mean of
final rewards. Completion counts episodes the environment itself finished,
whatever their reward. Per-kind and pooled figures are both reported
because the two weightings answer different questions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

from .chat import RemoteUnavailable
from .model import TaskInstruction, Termination, Trajectory
from .policies import NoiseSchedule, NoisyPolicy, Policy
from .synthesis import synthesize_many, synthesize_one
from .teachers import OracleTeacher

_COMPLETED = (Termination.SUCCESS, Termination.ENV_DONE_PARTIAL)


class TeacherBenefitNotShown(RuntimeError):
    """Corrected runs failed to beat uncorrected runs on average reward."""


@dataclass(frozen=True)
class TaskStats:
    average_reward: float
    completion_rate: float
    n_instructions: int


@dataclass(frozen=True)
class EvalReport:
    per_task: Mapping[str, TaskStats]
    overall_average: float
    pooled_average_reward: float
    pooled_completion_rate: float
    excluded: Mapping[str, str]
    run_manifest: Mapping

    def to_dict(self) -> dict:
        return {
            "per_task": {
                kind: {
                    "average_reward": stats.average_reward,
                    "completion_rate": stats.completion_rate,
                    "n_instructions": stats.n_instructions,
                }
                for kind, stats in sorted(self.per_task.items())
            },
            "overall_average": self.overall_average,
            "pooled_average_reward": self.pooled_average_reward,
            "pooled_completion_rate": self.pooled_completion_rate,
            "excluded": dict(sorted(self.excluded.items())),
            "run_manifest": dict(self.run_manifest),
        }

    def render_table(self) -> str:
        lines = [f"{'task':<12} {'avg_reward':>10} {'completion':>10} {'n':>5}"]
        for kind, stats in sorted(self.per_task.items()):
            lines.append(
                f"{kind:<12} {stats.average_reward:>10.4f} "
                f"{stats.completion_rate:>10.4f} {stats.n_instructions:>5d}"
            )
        lines.append(f"{'overall':<12} {self.overall_average:>10.4f}")
        lines.append(
            f"{'pooled':<12} {self.pooled_average_reward:>10.4f} "
            f"{self.pooled_completion_rate:>10.4f} "
            f"{sum(s.n_instructions for s in self.per_task.values()):>5d}"
        )
        if self.excluded:
            lines.append(f"excluded: {len(self.excluded)}")
        return "\n".join(lines) + "\n"


def aggregate(
    trajectories: Sequence[Trajectory],
    excluded: Mapping[str, str] | None = None,
    run_manifest: Mapping | None = None,
) -> EvalReport:
    if not trajectories:
        raise ValueError("no trajectories to aggregate")
    kinds = sorted({t.instruction.task_kind.value for t in trajectories})
    per_task: dict[str, TaskStats] = {}
    for kind in kinds:
        group = [t for t in trajectories if t.instruction.task_kind.value == kind]
        per_task[kind] = TaskStats(
            average_reward=sum(t.reward for t in group) / len(group),
            completion_rate=sum(1 for t in group if t.termination in _COMPLETED) / len(group),
            n_instructions=len(group),
        )
    overall = sum(s.average_reward for s in per_task.values()) / len(per_task)
    pooled_avg = sum(t.reward for t in trajectories) / len(trajectories)
    pooled_completion = sum(
        1 for t in trajectories if t.termination in _COMPLETED
    ) / len(trajectories)
    return EvalReport(
        per_task=per_task,
        overall_average=overall,
        pooled_average_reward=pooled_avg,
        pooled_completion_rate=pooled_completion,
        excluded=dict(excluded or {}),
        run_manifest=dict(run_manifest or {}),
    )


def _limits_summary(instructions: Sequence[TaskInstruction]) -> dict:
    out: dict = {}
    for kind in sorted({i.task_kind.value for i in instructions}):
        group = [i for i in instructions if i.task_kind.value == kind]
        out[kind] = {
            "max_steps": sorted({i.max_steps for i in group}),
            "context_budget": sorted({i.context_budget for i in group}),
        }
    return out


def run_eval(
    policy: Policy,
    instructions: Sequence[TaskInstruction],
    parallelism: int = 1,
    one_shot: bool = False,
) -> EvalReport:
    """Run every instruction without a teacher and aggregate the rewards.

    Transport failures exclude the instruction from the averages instead of
    scoring it 0; excluded ids and reasons are part of the report.
    """
    if not instructions:
        raise ValueError("no instructions to evaluate")

    def episode(instruction: TaskInstruction):
        try:
            return instruction.id, synthesize_one(instruction, policy, None, one_shot).trajectory
        except RemoteUnavailable as exc:
            return instruction.id, str(exc)

    if parallelism <= 1:
        outcomes = [episode(i) for i in instructions]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(episode, instructions))

    trajectories: list[Trajectory] = []
    excluded: dict[str, str] = {}
    for instruction_id, outcome in sorted(outcomes, key=lambda pair: pair[0]):
        if isinstance(outcome, Trajectory):
            trajectories.append(outcome)
        else:
            excluded[instruction_id] = outcome
    if not trajectories:
        raise RemoteUnavailable("every instruction was excluded by transport failures")

    manifest = {
        "policy": policy.describe(),
        "one_shot": one_shot,
        "n_requested": len(instructions),
        "excluded_count": len(excluded),
        "limits": _limits_summary(instructions),
    }
    return aggregate(trajectories, excluded=excluded, run_manifest=manifest)


def teacher_benefit_experiment(
    instructions: Sequence[TaskInstruction],
    schedule: NoiseSchedule,
    parallelism: int = 1,
) -> dict:
    """Same noisy policy and seeds, with and without oracle corrections.

    Raises TeacherBenefitNotShown unless the corrected condition's average
    reward is strictly higher.
    """
    noisy = NoisyPolicy(schedule)
    alone = synthesize_many(instructions, noisy, None, parallelism=parallelism)
    corrected = synthesize_many(
        instructions, noisy, OracleTeacher(), parallelism=parallelism
    )
    noisy_avg = sum(r.trajectory.reward for r in alone) / len(alone)
    corrected_avg = sum(r.trajectory.reward for r in corrected) / len(corrected)
    if corrected_avg <= noisy_avg:
        raise TeacherBenefitNotShown(
            f"corrected average {corrected_avg} is not above uncorrected {noisy_avg}"
        )
    return {
        "schedule": {
            "seed": schedule.seed,
            "error_rate": schedule.error_rate,
            "error_kind": schedule.error_kind.value,
        },
        "n_instructions": len(instructions),
        "noisy_average": noisy_avg,
        "corrected_average": corrected_avg,
    }

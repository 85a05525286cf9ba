"""Trajectories to masked multi-turn SFT samples, plus reference losses.

A sample mirrors the inference-time chat layout exactly: system
requirements, the instruction as the first user turn, then one assistant
turn per step followed by the observation as a user turn. Only assistant
turns can carry loss; in partial_mask mode the per-step learnability bit
decides, in full mode every assistant turn learns (the un-masked ablation).

The reference loss here is an accounting tool, not a trainer: given any
provider that scores a segment's log-probability in context, it computes
the masked and unmasked training-loss totals so their relationship can be
verified exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .model import TaskKind, Trajectory, validate_trajectory
from .prompts import task_requirements
from .react import render

FULL = "full"
PARTIAL_MASK = "partial_mask"
MODES = (FULL, PARTIAL_MASK)


class DuplicateId(ValueError):
    """Two training samples would share one id."""


class PositiveLogProb(ValueError):
    """A log-probability provider returned a value above zero."""


@dataclass(frozen=True)
class Segment:
    role: str  # "system" | "user" | "assistant"
    content: str
    learn: bool


@dataclass(frozen=True)
class SftSample:
    sample_id: str
    segments: tuple[Segment, ...]
    task_kind: TaskKind
    source: str  # "d1" | "dr"
    error_steps: tuple[int, ...]


@dataclass(frozen=True)
class LossReport:
    total: float
    per_segment: tuple[tuple[int, float], ...]  # (segment index, contribution)
    masked_count: int


LogProbProvider = Callable[[Sequence[Segment], Segment], float]


def build_sft_sample(traj: Trajectory, mode: str, source: str = "d1") -> SftSample:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    violations = validate_trajectory(traj)
    if violations:
        raise ValueError(
            f"{traj.instruction.id!r}: trajectory fails validation: " + "; ".join(violations)
        )
    segments = [
        Segment("system", task_requirements(traj.instruction.task_kind), False),
        Segment("user", traj.instruction.instruction_text, False),
    ]
    for step in traj.steps:
        learn = True if mode == FULL else step.delta
        segments.append(Segment("assistant", render(step.thought, step.action), learn))
        segments.append(Segment("user", step.observation, False))
    return SftSample(
        sample_id=traj.instruction.id,
        segments=tuple(segments),
        task_kind=traj.instruction.task_kind,
        source=source,
        error_steps=tuple(s.index for s in traj.steps if not s.delta),
    )


def reference_loss(sample: SftSample, logprob_of: LogProbProvider) -> LossReport:
    """Sum negative log-probabilities over the learnable assistant segments."""
    total = 0.0
    per_segment: list[tuple[int, float]] = []
    masked_count = 0
    for idx, seg in enumerate(sample.segments):
        if seg.role != "assistant":
            continue
        if not seg.learn:
            masked_count += 1
            continue
        logprob = logprob_of(sample.segments[:idx], seg)
        if logprob > 0:
            raise PositiveLogProb(
                f"provider returned {logprob} for segment {idx} of {sample.sample_id!r}"
            )
        contribution = -logprob
        per_segment.append((idx, contribution))
        total += contribution
    return LossReport(total=total, per_segment=tuple(per_segment), masked_count=masked_count)


def assemble_training_set(
    d1: Sequence[Trajectory],
    dr: Sequence[Trajectory],
    dr_mode: str = PARTIAL_MASK,
    shuffle_seed: int = 0,
) -> list[SftSample]:
    """Full-mode samples for the expert half, masked samples for the kept set.

    ``dr_mode=full`` reproduces the un-masked ablation on the same data.
    """
    samples = [build_sft_sample(t, FULL, source="d1") for t in d1]
    samples += [build_sft_sample(t, dr_mode, source="dr") for t in dr]
    seen: set[str] = set()
    for sample in samples:
        if sample.sample_id in seen:
            raise DuplicateId(sample.sample_id)
        seen.add(sample.sample_id)
    samples.sort(key=lambda s: s.sample_id)
    random.Random(shuffle_seed).shuffle(samples)
    return samples


# --- training JSONL ------------------------------------------------------
# {"id", "source", "messages":[{"role", "content", "loss"}], "meta":{"error_steps":[...]}}
# in exactly that key order, compact separators, UTF-8.


def sample_to_dict(sample: SftSample) -> dict:
    return {
        "id": sample.sample_id,
        "source": sample.source,
        "messages": [
            {"role": seg.role, "content": seg.content, "loss": seg.learn}
            for seg in sample.segments
        ],
        "meta": {"error_steps": list(sample.error_steps)},
    }


def write_training_jsonl(path, samples: Iterable[SftSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_dict(sample), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def read_training_jsonl(path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out

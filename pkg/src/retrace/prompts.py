"""Versioned prompt text assets and the transcript conventions built on them.

Task-requirement texts play the role of the per-environment system prompt;
they are shipped as plain text files so they can be diffed and pinned. The
composition helpers here define the one chat layout used everywhere:

    system    task requirements (plus a worked example in one-shot mode)
    user      the task instruction
    assistant rendered thought/action step      } repeated
    user      environment observation           } per step

The teacher sees the same step content embedded in a judging prompt.
"""

from __future__ import annotations

from importlib import resources

from .model import Step, TaskKind
from .react import render

_REQUIREMENTS = {
    TaskKind.HOUSEHOLD: "household_requirements.txt",
    TaskKind.SHOPPING: "shopping_requirements.txt",
}
_CONSIDERATIONS = {
    TaskKind.HOUSEHOLD: "household_considerations.txt",
    TaskKind.SHOPPING: "shopping_considerations.txt",
}
_EXAMPLES = {
    TaskKind.HOUSEHOLD: "household_example.txt",
    TaskKind.SHOPPING: "shopping_example.txt",
}


def load_asset(name: str) -> str:
    return resources.files("retrace.assets").joinpath(name).read_text(encoding="utf-8")


def _lookup(table: dict, kind: TaskKind, what: str) -> str:
    try:
        return load_asset(table[kind])
    except KeyError:
        raise ValueError(f"no {what} asset for task kind {kind.value!r}") from None


def task_requirements(kind: TaskKind) -> str:
    return _lookup(_REQUIREMENTS, kind, "task-requirements")


def considerations(kind: TaskKind) -> str:
    return _lookup(_CONSIDERATIONS, kind, "considerations")


def one_shot_example(kind: TaskKind) -> str:
    return _lookup(_EXAMPLES, kind, "worked-example")


def teacher_instructions() -> str:
    return load_asset("teacher_instructions.txt")


def policy_system_prompt(kind: TaskKind, one_shot: bool = False) -> str:
    text = task_requirements(kind).strip()
    if one_shot:
        text += "\n\n" + one_shot_example(kind).strip()
    return text


def teacher_system_prompt(kind: TaskKind, requirements: str | None = None) -> str:
    if requirements is None:
        requirements = task_requirements(kind)
    return "\n\n".join(
        [
            teacher_instructions().strip(),
            "The agent works under the following task requirements:",
            requirements.strip(),
            considerations(kind).strip(),
        ]
    )


def format_history(history: tuple[Step, ...] | list[Step]) -> str:
    """Render completed steps as alternating step/observation text."""
    if not history:
        return "(no steps taken yet)"
    parts = []
    for step in history:
        parts.append(render(step.thought, step.action))
        parts.append(f"Observation: {step.observation}")
    return "\n".join(parts)


def teacher_user_prompt(
    instruction_text: str,
    history: tuple[Step, ...] | list[Step],
    thought: str,
    action: str,
    observation: str,
) -> str:
    return (
        f"Task instruction: {instruction_text}\n\n"
        f"Interaction so far:\n{format_history(history)}\n\n"
        f"Latest step:\n{render(thought, action)}\n"
        f"Observation: {observation}\n\n"
        "Judge the latest action."
    )

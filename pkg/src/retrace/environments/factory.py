"""Environment construction by task kind."""

from __future__ import annotations

from ..model import TaskInstruction, TaskKind
from .base import ConfigError, Environment
from .household import HouseholdEnv
from .shopping import ShoppingEnv


def make_environment(instruction: TaskInstruction) -> Environment:
    if instruction.task_kind is TaskKind.HOUSEHOLD:
        return HouseholdEnv(instruction)
    if instruction.task_kind is TaskKind.SHOPPING:
        return ShoppingEnv(instruction)
    # science-stub is reserved for environments supplied by consumers
    raise ConfigError(
        f"{instruction.id!r}: no built-in environment for task kind "
        f"{instruction.task_kind.value!r}"
    )

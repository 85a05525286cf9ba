from .base import (
    NOTHING_HAPPENS,
    ConfigError,
    Environment,
    PlanNotFound,
    StepAfterDone,
    StepBudgetExhausted,
    StepResult,
)
from .factory import make_environment
from .generator import (
    DEFAULT_CONTEXT_BUDGET,
    DEFAULT_MAX_STEPS,
    generate_corpus,
    generate_household,
    generate_shopping,
    golden_trajectory,
)
from .household import HouseholdEnv
from .shopping import ShoppingEnv

__all__ = [
    "NOTHING_HAPPENS",
    "ConfigError",
    "Environment",
    "PlanNotFound",
    "StepAfterDone",
    "StepBudgetExhausted",
    "StepResult",
    "make_environment",
    "DEFAULT_CONTEXT_BUDGET",
    "DEFAULT_MAX_STEPS",
    "generate_corpus",
    "generate_household",
    "generate_shopping",
    "golden_trajectory",
    "HouseholdEnv",
    "ShoppingEnv",
]

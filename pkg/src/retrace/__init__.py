"""Desk-scale pipeline for reflection-corrected agent trajectories.

The package covers four stages behind one CLI (``retrace``):

1. gen: seeded generation of solvable text-environment tasks plus their
   expert (golden) trajectories.
2. synth: a per-kind dataset split, then teacher-monitored rollouts where
   judged mistakes stay in the record, masked, and are followed by executed
   corrections; successful runs with a bounded number of marked errors form
   the kept set.
3. mask: conversion to multi-turn SFT records whose per-message loss flags
   exclude marked errors, plus reference loss accounting.
4. eval: average reward and completion rate over a task set with step and
   context limits enforced.
"""

from .model import (
    DatasetSplit,
    Origin,
    Step,
    StepError,
    TaskInstruction,
    TaskKind,
    Termination,
    Trajectory,
    Verdict,
    validate_trajectory,
)
from .react import MalformedReact, InvalidField, parse_react, render_react

__version__ = "0.1.0"

__all__ = [
    "DatasetSplit",
    "Origin",
    "Step",
    "StepError",
    "TaskInstruction",
    "TaskKind",
    "Termination",
    "Trajectory",
    "Verdict",
    "validate_trajectory",
    "MalformedReact",
    "InvalidField",
    "parse_react",
    "render_react",
    "__version__",
]

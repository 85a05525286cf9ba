"""Household simulator: move around, carry objects, heat or cool them.

env_config schema:
    locations: list of location names (includes "microwave"/"fridge" when a
        treatment goal needs them)
    objects: map object name -> starting location
    goal: {"object": name, "target": location, "treatment": null|"heated"|"cooled"}

Reward is binary: 1 exactly when the goal object sits in the target location
carrying the required treatment. The goal is checked after every executed
action, so an already-satisfied goal completes on the first action taken.
"""

from __future__ import annotations

from ..model import TaskInstruction
from .base import NOTHING_HAPPENS, ConfigError, Environment, PlanNotFound, StepResult

MAX_LOCATIONS = 8
_TREATMENT_APPLIANCE = {"heated": "microwave", "cooled": "fridge"}


class HouseholdEnv(Environment):
    def __init__(self, instruction: TaskInstruction):
        super().__init__(instruction)
        cfg = instruction.env_config
        try:
            self._locations = list(cfg["locations"])
            self._start_locations = dict(cfg["objects"])
            goal = cfg["goal"]
            self._goal_object = goal["object"]
            self._goal_target = goal["target"]
            self._goal_treatment = goal.get("treatment")
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{instruction.id!r}: malformed household env_config: {exc}") from exc
        self._validate()
        # mutable episode state, populated by reset()
        self._agent_at: str | None = None
        self._carried: str | None = None
        self._object_at: dict[str, str | None] = {}
        self._treatments: dict[str, set[str]] = {}

    def _validate(self) -> None:
        iid = self.instruction.id
        if not self._locations:
            raise ConfigError(f"{iid!r}: no locations")
        if len(self._locations) > MAX_LOCATIONS:
            raise ConfigError(f"{iid!r}: more than {MAX_LOCATIONS} locations")
        if len(set(self._locations)) != len(self._locations):
            raise ConfigError(f"{iid!r}: duplicate locations")
        for obj, loc in self._start_locations.items():
            if loc not in self._locations:
                raise ConfigError(f"{iid!r}: object {obj!r} starts at unknown location {loc!r}")
        if self._goal_object not in self._start_locations:
            raise ConfigError(f"{iid!r}: goal names nonexistent object {self._goal_object!r}")
        if self._goal_target not in self._locations:
            raise ConfigError(f"{iid!r}: goal names nonexistent location {self._goal_target!r}")
        if self._goal_treatment is not None:
            appliance = _TREATMENT_APPLIANCE.get(self._goal_treatment)
            if appliance is None:
                raise ConfigError(f"{iid!r}: unknown treatment {self._goal_treatment!r}")
            if appliance not in self._locations:
                raise ConfigError(
                    f"{iid!r}: treatment {self._goal_treatment!r} needs a {appliance}"
                )

    # -- state machine ----------------------------------------------------

    def _reset(self) -> str:
        self._agent_at = None
        self._carried = None
        self._object_at = dict(self._start_locations)
        self._treatments = {}
        return (
            "You are in the middle of the room. Looking around, you see: "
            + ", ".join(sorted(self._locations))
            + "."
        )

    def _look(self) -> str:
        if self._agent_at is None:
            return (
                "You are in the middle of the room. Looking around, you see: "
                + ", ".join(sorted(self._locations))
                + "."
            )
        return f"You are at the {self._agent_at}. {self._contents_sentence(self._agent_at)}"

    def _contents_sentence(self, loc: str) -> str:
        here = sorted(o for o, l in self._object_at.items() if l == loc)
        if not here:
            return "There is nothing on it."
        return "On it you see: " + ", ".join(here) + "."

    def _apply(self, action: str) -> StepResult:
        obs = self._execute(action)
        done = self._goal_met()
        return StepResult(observation=obs, done=done, reward=1.0 if done else 0.0)

    def _execute(self, action: str) -> str:
        if action == "look":
            return self._look()
        if action.startswith("go to "):
            loc = action[len("go to "):].strip()
            if loc in self._locations and loc != self._agent_at:
                self._agent_at = loc
                return f"You arrive at the {loc}. {self._contents_sentence(loc)}"
            return NOTHING_HAPPENS
        if action.startswith("take "):
            obj = action[len("take "):].strip()
            if (
                self._carried is None
                and self._agent_at is not None
                and self._object_at.get(obj) == self._agent_at
            ):
                self._carried = obj
                self._object_at[obj] = None
                return f"You pick up the {obj}."
            return NOTHING_HAPPENS
        if action.startswith("put ") and " in " in action:
            rest = action[len("put "):]
            obj, _, loc = rest.rpartition(" in ")
            obj, loc = obj.strip(), loc.strip()
            if self._carried == obj and self._agent_at == loc:
                self._carried = None
                self._object_at[obj] = loc
                return f"You put the {obj} in the {loc}."
            return NOTHING_HAPPENS
        if action.startswith("heat "):
            return self._treat(action[len("heat "):].strip(), "heated")
        if action.startswith("cool "):
            return self._treat(action[len("cool "):].strip(), "cooled")
        return NOTHING_HAPPENS

    def _treat(self, obj: str, treatment: str) -> str:
        appliance = _TREATMENT_APPLIANCE[treatment]
        if self._carried == obj and self._agent_at == appliance:
            marks = self._treatments.setdefault(obj, set())
            marks.discard("cooled" if treatment == "heated" else "heated")
            marks.add(treatment)
            verb = "heat" if treatment == "heated" else "cool"
            return f"You {verb} the {obj} in the {appliance}."
        return NOTHING_HAPPENS

    def _goal_met(self) -> bool:
        if self._object_at.get(self._goal_object) != self._goal_target:
            return False
        if self._goal_treatment is None:
            return True
        return self._goal_treatment in self._treatments.get(self._goal_object, set())

    # -- planner ----------------------------------------------------------

    def plan_from_here(self) -> list[str]:
        if self.done:
            return []
        if self._goal_met():
            # degenerate pre-satisfied goal: any action triggers the check
            return ["look"]
        obj = self._goal_object
        if obj not in self._object_at:
            raise PlanNotFound(f"goal object {obj!r} does not exist")

        actions: list[str] = []
        at = self._agent_at
        carried = self._carried

        def go(loc: str) -> None:
            nonlocal at
            if at != loc:
                actions.append(f"go to {loc}")
                at = loc

        if carried is not None and carried != obj:
            if at is None:
                # cannot drop mid-room; walk to the goal object first
                loc = self._object_at[obj]
                if loc is None:
                    raise PlanNotFound(f"{obj!r} is carried by nobody reachable")
                go(loc)
            actions.append(f"put {carried} in {at}")
            carried = None
        if carried != obj:
            loc = self._object_at[obj]
            if loc is None:
                raise PlanNotFound(f"{obj!r} location is inconsistent")
            go(loc)
            actions.append(f"take {obj}")
            carried = obj
        if (
            self._goal_treatment is not None
            and self._goal_treatment not in self._treatments.get(obj, set())
        ):
            go(_TREATMENT_APPLIANCE[self._goal_treatment])
            verb = "heat" if self._goal_treatment == "heated" else "cool"
            actions.append(f"{verb} {obj}")
        go(self._goal_target)
        actions.append(f"put {obj} in {self._goal_target}")
        return actions

    def describe_intent(self, action: str) -> str:
        if action.startswith("go to "):
            return f"I will go to the {action[len('go to '):]} and check what is there."
        if action.startswith("take "):
            return f"The {action[len('take '):]} is here, so I will pick it up."
        if action.startswith("put ") and " in " in action:
            obj, _, loc = action[len("put "):].rpartition(" in ")
            return f"I am at the {loc} carrying the {obj}, so I will put it in."
        if action.startswith("heat "):
            return f"I am at the microwave, so I will heat the {action[len('heat '):]} now."
        if action.startswith("cool "):
            return f"I am at the fridge, so I will cool the {action[len('cool '):]} now."
        if action == "look":
            return "Let me look around and check where things stand."
        return f"I will try '{action}' next."

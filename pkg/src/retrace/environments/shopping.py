"""Shopping simulator: search a small catalog, open an item, buy it.

env_config schema:
    catalog: list of {"id", "title", "attrs": [..], "price": int}
    required_attrs: list of attribute tags the buyer needs
    price_ceiling: int
    query_index: map search term -> list of item ids returned for it

Reward is graded and evaluated only at "buy": the fraction of required
attributes the bought item carries, halved when its price exceeds the
ceiling. Buying ends the episode regardless of the outcome.
"""

from __future__ import annotations

from ..model import TaskInstruction
from .base import NOTHING_HAPPENS, ConfigError, Environment, PlanNotFound, StepResult

MAX_CATALOG = 50


class ShoppingEnv(Environment):
    def __init__(self, instruction: TaskInstruction):
        super().__init__(instruction)
        cfg = instruction.env_config
        try:
            self._items = {item["id"]: item for item in cfg["catalog"]}
            self._required = list(cfg["required_attrs"])
            self._ceiling = cfg["price_ceiling"]
            self._query_index = {term: list(ids) for term, ids in cfg["query_index"].items()}
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{instruction.id!r}: malformed shopping env_config: {exc}") from exc
        self._validate()
        self._last_results: list[str] = []
        self._opened: str | None = None

    def _validate(self) -> None:
        iid = self.instruction.id
        if not self._items:
            raise ConfigError(f"{iid!r}: empty catalog")
        if len(self._items) > MAX_CATALOG:
            raise ConfigError(f"{iid!r}: catalog larger than {MAX_CATALOG}")
        if not self._required:
            raise ConfigError(f"{iid!r}: empty required attribute set")
        for item_id, item in self._items.items():
            if not {"id", "title", "attrs", "price"} <= set(item):
                raise ConfigError(f"{iid!r}: item {item_id!r} missing fields")
        for term, ids in self._query_index.items():
            for item_id in ids:
                if item_id not in self._items:
                    raise ConfigError(f"{iid!r}: query {term!r} lists unknown item {item_id!r}")
        if self._satisfying_item() is None:
            raise ConfigError(f"{iid!r}: no catalog item satisfies the requirement")

    def _satisfying_item(self) -> str | None:
        """Deterministic pick of a full-match item within the price ceiling."""
        for item_id in sorted(self._items):
            item = self._items[item_id]
            if set(self._required) <= set(item["attrs"]) and item["price"] <= self._ceiling:
                return item_id
        return None

    # -- state machine ----------------------------------------------------

    def _reset(self) -> str:
        self._last_results = []
        self._opened = None
        return "You are on the search page."

    def _apply(self, action: str) -> StepResult:
        if action.startswith("search[") and action.endswith("]"):
            term = action[len("search["):-1].strip()
            self._last_results = list(self._query_index.get(term, []))
            self._opened = None
            if not self._last_results:
                return StepResult("Results: (none)", False, 0.0)
            listing = " | ".join(
                f"{i}: {self._items[i]['title']}, ${self._items[i]['price']}"
                for i in self._last_results
            )
            return StepResult(f"Results: {listing}", False, 0.0)
        if action.startswith("click[") and action.endswith("]"):
            item_id = action[len("click["):-1].strip()
            if item_id in self._last_results:
                self._opened = item_id
                item = self._items[item_id]
                return StepResult(
                    f"You open {item_id}: {item['title']}. "
                    f"Attributes: {', '.join(item['attrs'])}. Price: ${item['price']}.",
                    False,
                    0.0,
                )
            return StepResult(NOTHING_HAPPENS, False, 0.0)
        if action == "buy":
            if self._opened is None:
                return StepResult(NOTHING_HAPPENS, False, 0.0)
            item = self._items[self._opened]
            matched = len(set(self._required) & set(item["attrs"]))
            reward = matched / len(self._required)
            if item["price"] > self._ceiling:
                reward *= 0.5
            return StepResult(
                f"You buy the {item['title']}. Your order is placed.", True, reward
            )
        return StepResult(NOTHING_HAPPENS, False, 0.0)

    # -- planner ----------------------------------------------------------

    def plan_from_here(self) -> list[str]:
        if self.done:
            return []
        target = self._satisfying_item()
        if target is None:
            raise PlanNotFound("no catalog item satisfies the requirement")
        if self._opened == target:
            return ["buy"]
        if target in self._last_results:
            return [f"click[{target}]", "buy"]
        for term in sorted(self._query_index):
            if target in self._query_index[term]:
                return [f"search[{term}]", f"click[{target}]", "buy"]
        raise PlanNotFound(f"no search term reaches item {target!r}")

    def describe_intent(self, action: str) -> str:
        if action.startswith("search[") and action.endswith("]"):
            term = action[len("search["):-1]
            return f"I will search for {term} to see what is available."
        if action.startswith("click[") and action.endswith("]"):
            item_id = action[len("click["):-1]
            return f"Item {item_id} in the results looks promising, so I will open it."
        if action == "buy":
            return "The open item covers what I need within the price limit, so I will buy it."
        return f"I will try '{action}' next."

"""Seeded task generation: arbitrary numbers of distinct solvable tasks.

Every task is derived from ``random.Random(f"{seed}:{kind}:{index}")``, so
corpus membership does not depend on generation order or process state, and
string seeding keeps the stream identical across platforms.
"""

from __future__ import annotations

import random
from typing import Mapping

from ..model import Origin, Step, TaskInstruction, TaskKind, Termination, Trajectory
from . import factory
from .base import PlanNotFound

DEFAULT_MAX_STEPS = {TaskKind.HOUSEHOLD: 30, TaskKind.SHOPPING: 10}
DEFAULT_CONTEXT_BUDGET = {TaskKind.HOUSEHOLD: 8000, TaskKind.SHOPPING: 8000}

_LOCATION_POOL = ["bed", "cabinet", "countertop", "drawer", "safe", "shelf", "sidetable", "sofa"]
_OBJECT_POOL = ["apple", "book", "egg", "knife", "lamp", "mug", "pillow", "plate", "towel", "vase"]

_COLORS = ["black", "blue", "green", "red", "white"]
_MATERIALS = ["canvas", "cotton", "leather", "steel", "wool"]
_EXTRAS = ["foldable", "organic", "portable", "waterproof", "wireless"]
_PRODUCTS = ["backpack", "blanket", "bottle", "jacket", "lamp", "mug", "shirt", "speaker"]


def generate_household(
    seed: int, index: int, max_steps: int = 30, context_budget: int = 8000
) -> TaskInstruction:
    rng = random.Random(f"{seed}:household:{index}")
    locations = ["microwave", "fridge"] + rng.sample(_LOCATION_POOL, 4)
    names = rng.sample(_OBJECT_POOL, rng.randint(3, 5))
    objects = {name: rng.choice(locations) for name in names}
    goal_object = rng.choice(names)
    treatment = rng.choice([None, None, "heated", "cooled"])
    target = rng.choice([l for l in locations if l != objects[goal_object]])
    if treatment is None:
        text = f"Put the {goal_object} in the {target}."
    else:
        text = f"Put a {treatment} {goal_object} in the {target}."
    return TaskInstruction(
        id=f"household-{index:04d}",
        task_kind=TaskKind.HOUSEHOLD,
        instruction_text=text,
        env_config={
            "locations": locations,
            "objects": objects,
            "goal": {"object": goal_object, "target": target, "treatment": treatment},
        },
        max_steps=max_steps,
        context_budget=context_budget,
    )


def generate_shopping(
    seed: int, index: int, max_steps: int = 10, context_budget: int = 8000
) -> TaskInstruction:
    rng = random.Random(f"{seed}:shopping:{index}")
    product = rng.choice(_PRODUCTS)
    required = [rng.choice(_COLORS), rng.choice(_MATERIALS)]
    if rng.random() < 0.5:
        required.append(rng.choice(_EXTRAS))
    ceiling = rng.choice([30, 40, 50, 60, 80])

    n_items = rng.randint(5, 8)
    target_pos = rng.randrange(n_items)
    decoy_pool = sorted(set(_COLORS + _MATERIALS + _EXTRAS) - set(required))
    catalog = []
    for k in range(n_items):
        item_id = f"item-{chr(ord('a') + k)}{rng.randint(1, 9)}"
        if k == target_pos:
            attrs = list(required)
            if rng.random() < 0.5:
                attrs.append(rng.choice(decoy_pool))
            item_product = product
            price = rng.randint(10, ceiling)
        else:
            share = rng.randint(0, len(required) - 1)
            attrs = rng.sample(required, share) + rng.sample(decoy_pool, rng.randint(1, 2))
            item_product = product if rng.random() < 0.6 else rng.choice(_PRODUCTS)
            price = rng.randint(10, ceiling + 40)
        catalog.append(
            {
                "id": item_id,
                "title": " ".join(attrs + [item_product]),
                "attrs": attrs,
                "price": price,
                "product": item_product,
            }
        )

    def ids_where(pred) -> list[str]:
        return [item["id"] for item in catalog if pred(item)]

    query_index = {
        product: ids_where(lambda it: it["product"] == product),
        f"{required[0]} {product}": ids_where(
            lambda it: it["product"] == product and required[0] in it["attrs"]
        ),
    }
    other_products = sorted({it["product"] for it in catalog} - {product})
    if other_products:
        decoy_product = other_products[0]
        query_index[decoy_product] = ids_where(lambda it: it["product"] == decoy_product)

    for item in catalog:
        del item["product"]

    return TaskInstruction(
        id=f"shopping-{index:04d}",
        task_kind=TaskKind.SHOPPING,
        instruction_text=f"Buy a {' '.join(required)} {product} for at most ${ceiling}.",
        env_config={
            "catalog": catalog,
            "required_attrs": required,
            "price_ceiling": ceiling,
            "query_index": query_index,
        },
        max_steps=max_steps,
        context_budget=context_budget,
    )


_GENERATORS = {
    TaskKind.HOUSEHOLD: generate_household,
    TaskKind.SHOPPING: generate_shopping,
}


def generate_corpus(
    seed: int,
    counts: Mapping[TaskKind, int],
    max_steps: Mapping[TaskKind, int] | None = None,
    context_budget: Mapping[TaskKind, int] | None = None,
) -> list[TaskInstruction]:
    """Generate ``counts[kind]`` distinct solvable tasks per kind."""
    out: list[TaskInstruction] = []
    for kind in sorted(counts, key=lambda k: k.value):
        if counts[kind] <= 0:
            continue
        gen = _GENERATORS.get(kind)
        if gen is None:
            raise PlanNotFound(f"no task generator for kind {kind.value!r}")
        steps_cap = (max_steps or {}).get(kind, DEFAULT_MAX_STEPS[kind])
        budget = (context_budget or {}).get(kind, DEFAULT_CONTEXT_BUDGET[kind])
        for index in range(counts[kind]):
            out.append(gen(seed, index, steps_cap, budget))
    return out


def golden_trajectory(instruction: TaskInstruction) -> Trajectory:
    """Execute the planner's solution and package it as an expert trajectory."""
    env = factory.make_environment(instruction)
    env.reset()
    steps: list[Step] = []
    final_reward = 0.0
    for thought, action in env.golden_plan():
        result = env.step(action)
        steps.append(
            Step(
                index=len(steps) + 1,
                thought=thought,
                action=action,
                observation=result.observation,
                delta=True,
                origin=Origin.GOLDEN,
            )
        )
        final_reward = result.reward
        if result.done:
            break
    if not env.done or final_reward != 1.0:
        raise PlanNotFound(
            f"{instruction.id!r}: planner solution did not reach reward 1 "
            f"(done={env.done}, reward={final_reward})"
        )
    return Trajectory(
        instruction=instruction,
        steps=tuple(steps),
        reward=1.0,
        termination=Termination.SUCCESS,
    )

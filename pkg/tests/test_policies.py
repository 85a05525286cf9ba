"""Policies: scripted plan-following, seeded corruption, remote transcripts."""

from __future__ import annotations

import pytest

from retrace.chat import ChatClient
from retrace.environments import make_environment
from retrace.model import Step
from retrace.policies import (
    ErrorKind,
    NoiseSchedule,
    NoisyPolicy,
    PolicyContext,
    RemotePolicy,
    ScriptedPolicy,
)

from conftest import (
    StubChatServer,
    household_instruction,
    shopping_instruction,
)

_CTX = PolicyContext(task_requirements="rules", instruction_text="do the thing")


def _drive(instruction, policy, max_steps=40):
    """Run a policy against its environment; return (actions, final reward)."""
    env = make_environment(instruction)
    env.reset()
    session = policy.open_session(instruction)
    actions, reward = [], 0.0
    for _ in range(max_steps):
        _, action = session.decide(_CTX)
        result = env.step(action)
        actions.append(action)
        reward = result.reward
        if result.done:
            break
    return actions, reward


class TestScripted:
    def test_follows_golden_plan_to_success(self, hh_instruction):
        actions, reward = _drive(hh_instruction, ScriptedPolicy())
        assert actions == ["go to shelf", "take vase", "go to safe", "put vase in safe"]
        assert reward == 1.0

    def test_shopping_plan(self, sh_instruction):
        actions, reward = _drive(sh_instruction, ScriptedPolicy())
        assert actions == ["search[red shirt]", "click[item-a1]", "buy"]
        assert reward == 1.0

    def test_emits_nonempty_thoughts(self, hh_instruction):
        session = ScriptedPolicy().open_session(hh_instruction)
        thought, action = session.decide(_CTX)
        assert thought.strip() and action == "go to shelf"

    def test_probes_with_look_after_plan_exhausted(self, hh_instruction):
        session = ScriptedPolicy().open_session(hh_instruction)
        for _ in range(4):
            session.decide(_CTX)
        _, action = session.decide(_CTX)
        assert action == "look"

    def test_cursor_is_blind_to_observations(self, hh_instruction):
        # the session emits the same sequence regardless of what happens
        session = ScriptedPolicy().open_session(hh_instruction)
        first = [session.decide(_CTX)[1] for _ in range(4)]
        assert first == ["go to shelf", "take vase", "go to safe", "put vase in safe"]

    def test_note_correction_realigns_cursor(self, hh_instruction):
        session = ScriptedPolicy().open_session(hh_instruction)
        session.decide(_CTX)  # emits "go to shelf", cursor now at "take vase"
        # teacher corrected some derailment back to "go to shelf": the next
        # own decision must be the action after it
        session.note_correction("corrected", "go to shelf")
        _, action = session.decide(_CTX)
        assert action == "take vase"

    def test_note_correction_ignores_off_plan_actions(self, hh_instruction):
        session = ScriptedPolicy().open_session(hh_instruction)
        session.decide(_CTX)
        session.note_correction("drop the wrongly taken mug", "put mug in fridge")
        _, action = session.decide(_CTX)
        assert action == "take vase"  # cursor untouched

    def test_describe(self):
        assert ScriptedPolicy().describe() == "scripted"


class TestNoisy:
    def test_zero_error_rate_matches_scripted(self):
        schedule = NoiseSchedule(seed=5, error_rate=0.0, error_kind=ErrorKind.WRONG_LOCATION)
        for index in range(20):
            instr = household_instruction(id=f"hh-{index}")
            noisy_actions, noisy_reward = _drive(instr, NoisyPolicy(schedule))
            clean_actions, clean_reward = _drive(instr, ScriptedPolicy())
            assert noisy_actions == clean_actions
            assert noisy_reward == clean_reward == 1.0

    def test_full_error_rate_always_corrupts_first_step(self, hh_instruction):
        schedule = NoiseSchedule(seed=5, error_rate=1.0, error_kind=ErrorKind.WRONG_LOCATION)
        session = NoisyPolicy(schedule).open_session(hh_instruction)
        _, action = session.decide(_CTX)
        assert action.startswith("go to ")
        assert action != "go to shelf"
        assert action[len("go to "):] in hh_instruction.env_config["locations"]

    def test_wrong_object_corruption(self, hh_instruction):
        schedule = NoiseSchedule(seed=5, error_rate=1.0, error_kind=ErrorKind.WRONG_OBJECT)
        session = NoisyPolicy(schedule).open_session(hh_instruction)
        _, action = session.decide(_CTX)
        assert action.startswith("take ")
        assert action in ("take mug", "take vase")

    def test_premature_terminal_corruption_household(self, hh_instruction):
        schedule = NoiseSchedule(seed=5, error_rate=1.0, error_kind=ErrorKind.PREMATURE_TERMINAL)
        session = NoisyPolicy(schedule).open_session(hh_instruction)
        _, action = session.decide(_CTX)
        assert action == "put vase in safe"  # the plan's last action, far too early

    def test_premature_terminal_corruption_shopping(self, sh_instruction):
        schedule = NoiseSchedule(seed=5, error_rate=1.0, error_kind=ErrorKind.PREMATURE_TERMINAL)
        session = NoisyPolicy(schedule).open_session(sh_instruction)
        _, action = session.decide(_CTX)
        assert action == "buy"

    def test_wrong_location_shopping_swaps_search_term(self, sh_instruction):
        schedule = NoiseSchedule(seed=5, error_rate=1.0, error_kind=ErrorKind.WRONG_LOCATION)
        session = NoisyPolicy(schedule).open_session(sh_instruction)
        _, action = session.decide(_CTX)
        assert action.startswith("search[") and action != "search[red shirt]"
        term = action[len("search["):-1]
        assert term in sh_instruction.env_config["query_index"]

    def test_wrong_object_shopping_swaps_clicked_item(self, sh_instruction):
        schedule = NoiseSchedule(seed=5, error_rate=1.0, error_kind=ErrorKind.WRONG_OBJECT)
        session = NoisyPolicy(schedule).open_session(sh_instruction)
        session.note_correction("", "search[red shirt]")  # advance past the search
        _, action = session.decide(_CTX)
        assert action.startswith("click[") and action != "click[item-a1]"

    def test_corruption_is_reproducible(self, hh_instruction):
        schedule = NoiseSchedule(seed=9, error_rate=0.4, error_kind=ErrorKind.WRONG_LOCATION)
        runs = []
        for _ in range(3):
            session = NoisyPolicy(schedule).open_session(hh_instruction)
            runs.append([session.decide(_CTX)[1] for _ in range(6)])
        assert runs[0] == runs[1] == runs[2]

    def test_draw_stream_is_per_instruction(self):
        # the same schedule on different tasks uses independent streams
        schedule = NoiseSchedule(seed=9, error_rate=0.5, error_kind=ErrorKind.WRONG_LOCATION)
        a = NoisyPolicy(schedule).open_session(household_instruction(id="hh-a"))
        b = NoisyPolicy(schedule).open_session(household_instruction(id="hh-b"))
        seq_a = [a.decide(_CTX)[1] for _ in range(8)]
        seq_b = [b.decide(_CTX)[1] for _ in range(8)]
        assert seq_a != seq_b

    def test_intermediate_rate_mixes_clean_and_corrupted(self, hh_instruction):
        schedule = NoiseSchedule(seed=3, error_rate=0.5, error_kind=ErrorKind.WRONG_LOCATION)
        corrupted = 0
        for index in range(40):
            instr = household_instruction(id=f"hh-{index}")
            clean = ScriptedPolicy().open_session(instr)
            noisy = NoisyPolicy(schedule).open_session(instr)
            planned = clean.decide(_CTX)[1]
            emitted = noisy.decide(_CTX)[1]
            if emitted != planned:
                corrupted += 1
        assert 5 < corrupted < 35

    def test_error_rate_bounds_validated(self):
        with pytest.raises(ValueError):
            NoiseSchedule(seed=1, error_rate=-0.1, error_kind=ErrorKind.WRONG_OBJECT)
        with pytest.raises(ValueError):
            NoiseSchedule(seed=1, error_rate=1.1, error_kind=ErrorKind.WRONG_OBJECT)
        NoiseSchedule(seed=1, error_rate=1.0, error_kind=ErrorKind.WRONG_OBJECT)

    def test_describe_names_the_schedule(self):
        policy = NoisyPolicy(NoiseSchedule(seed=7, error_rate=0.4,
                                           error_kind=ErrorKind.WRONG_OBJECT))
        assert policy.describe() == "noisy(seed=7,error_rate=0.4,error_kind=wrong_object)"


class TestRemote:
    def test_transcript_layout_and_parse(self, hh_instruction):
        with StubChatServer(lambda p: "Thought: heading over\nAction: go to shelf") as server:
            client = ChatClient(base_url=server.base_url, model="base-agent")
            policy = RemotePolicy(client, max_tokens=128)
            session = policy.open_session(hh_instruction)
            history = (
                Step(index=1, thought="start", action="look", observation="room"),
            )
            ctx = PolicyContext(
                task_requirements="house rules",
                instruction_text="Put the vase in the safe.",
                history=history,
            )
            thought, action = session.decide(ctx)
        assert (thought, action) == ("heading over", "go to shelf")
        [request] = server.requests
        roles = [m["role"] for m in request["body"]["messages"]]
        assert roles == ["system", "user", "assistant", "user"]
        assert request["body"]["messages"][0]["content"] == "house rules"
        assert request["body"]["messages"][2]["content"] == "Thought: start\nAction: look"
        assert request["body"]["messages"][3]["content"] == "room"
        assert request["body"]["temperature"] == 0
        assert request["body"]["max_tokens"] == 128

    def test_describe_names_model(self):
        client = ChatClient(base_url="http://localhost:1", model="base-agent-7b")
        assert RemotePolicy(client).describe() == "remote(model=base-agent-7b)"

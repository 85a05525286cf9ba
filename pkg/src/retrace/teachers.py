"""Step judges: real-time verdicts plus first-person corrections.

The oracle teacher keeps a private shadow environment that it advances with
every executed action, so its notion of "expected next action" always
reflects the true latent state. The remote teacher delegates judgment to a
chat endpoint and parses the documented reply format: a bare "yes" for a
correct step, otherwise four labeled lines (ERROR/REASON/REFLECTION/ACTION).

Teacher corrections are never re-judged; judging resumes at the next policy
step.
"""

from __future__ import annotations

import re
from typing import Protocol, Sequence

from .chat import ChatClient, ChatMessage
from .environments import make_environment
from .model import Step, TaskInstruction, Verdict
from .prompts import teacher_system_prompt, teacher_user_prompt
from .react import InvalidField

_LABELS = ("error", "reason", "reflection", "action")
_LABEL_RE = re.compile(r"^\s*(error|reason|reflection|action)\s*:\s*(.*)$", re.IGNORECASE)


class UnparseableVerdict(ValueError):
    """Remote reply is neither a bare affirmative nor field-complete."""


def parse_verdict(text: str) -> Verdict:
    """Map a teacher reply to a Verdict.

    A bare affirmative ("yes", any case, optional closing punctuation) means
    the step was correct. Anything else must carry all four labeled fields;
    labels are matched case-insensitively and values may span lines until
    the next label.
    """
    stripped = text.strip()
    if stripped.lower().rstrip(".!") == "yes":
        return Verdict.correct()

    fields: dict[str, list[str]] = {}
    current: str | None = None
    for line in stripped.splitlines():
        m = _LABEL_RE.match(line)
        if m:
            current = m.group(1).lower()
            fields.setdefault(current, []).append(m.group(2).strip())
        elif current is not None:
            fields[current].append(line.strip())
    values = {k: "\n".join(v).strip() for k, v in fields.items()}
    if all(values.get(label) for label in _LABELS):
        return Verdict.erroneous(
            error_content=values["error"],
            error_reason=values["reason"],
            reflection=values["reflection"],
            corrective_action=values["action"],
        )
    raise UnparseableVerdict(f"cannot read teacher reply: {stripped[:120]!r}")


def render_verdict(verdict: Verdict) -> str:
    """Inverse of parse_verdict; used by stub servers and tests."""
    if verdict.is_correct:
        return "yes"
    e = verdict.error
    return (
        f"ERROR: {e.error_content}\n"
        f"REASON: {e.error_reason}\n"
        f"REFLECTION: {e.reflection}\n"
        f"ACTION: {e.corrective_action}"
    )


def reformat_correction(verdict: Verdict) -> tuple[str, str]:
    """Convert an erroneous verdict into a correction step's (thought, action).

    The thought concatenates the error, its reason, and the reflection into
    one first-person passage; the action is the corrective command verbatim.
    """
    if verdict.is_correct:
        raise ValueError("reformat_correction requires the Error variant")
    e = verdict.error
    a_prime = e.corrective_action.strip()
    if "\n" in a_prime:
        raise InvalidField("corrective action must be a single line")
    if not a_prime:
        raise InvalidField("corrective action must be non-empty")
    clauses = [e.error_content, e.error_reason, e.reflection]
    t_prime = ". ".join(c.strip().rstrip(".") for c in clauses) + "."
    return (t_prime, a_prime)


class TeacherSession(Protocol):
    def judge(
        self,
        task_requirements: str,
        instruction: str,
        history: Sequence[Step],
        step: Step,
        observation: str,
    ) -> Verdict: ...

    def note_correction(self, thought: str, action: str) -> None: ...


class Teacher(Protocol):
    def open_session(self, instruction: TaskInstruction) -> TeacherSession: ...

    def describe(self) -> str: ...


class _OracleSession:
    def __init__(self, instruction: TaskInstruction):
        self._shadow = make_environment(instruction)
        self._shadow.reset()

    def judge(
        self,
        task_requirements: str,
        instruction: str,
        history: Sequence[Step],
        step: Step,
        observation: str,
    ) -> Verdict:
        if self._shadow.done:
            return Verdict.correct()
        plan = self._shadow.plan_from_here()
        expected = plan[0] if plan else None
        # mirror the executed action so the shadow state tracks reality
        self._shadow.step(step.action)
        if expected is None or step.action.strip() == expected:
            return Verdict.correct()
        replan = [] if self._shadow.done else self._shadow.plan_from_here()
        corrective = replan[0] if replan else expected
        return Verdict.erroneous(
            error_content=f"I chose '{step.action.strip()}' as my step",
            error_reason=(
                f"the right step from the previous state was '{expected}', "
                "so my action did not make progress"
            ),
            reflection=(
                "I should compare my plan against the latest observations and "
                "keep track of what I have already accomplished before acting"
            ),
            corrective_action=corrective,
        )

    def note_correction(self, thought: str, action: str) -> None:
        if not self._shadow.done:
            self._shadow.step(action)


class OracleTeacher:
    """Judges against the planner's expected action for the true state."""

    def open_session(self, instruction: TaskInstruction) -> _OracleSession:
        return _OracleSession(instruction)

    def describe(self) -> str:
        return "oracle"


class _RemoteSession:
    def __init__(self, instruction: TaskInstruction, client: ChatClient, max_tokens: int):
        self._kind = instruction.task_kind
        self._client = client
        self._max_tokens = max_tokens

    def judge(
        self,
        task_requirements: str,
        instruction: str,
        history: Sequence[Step],
        step: Step,
        observation: str,
    ) -> Verdict:
        messages = [
            ChatMessage("system", teacher_system_prompt(self._kind, task_requirements)),
            ChatMessage(
                "user",
                teacher_user_prompt(instruction, list(history), step.thought, step.action, observation),
            ),
        ]
        reply = self._client.complete(messages, max_tokens=self._max_tokens)
        return parse_verdict(reply)

    def note_correction(self, thought: str, action: str) -> None:
        # the remote judge re-reads the full history on every call
        pass


class RemoteTeacher:
    def __init__(self, client: ChatClient, max_tokens: int = 512):
        self._client = client
        self._max_tokens = max_tokens

    def open_session(self, instruction: TaskInstruction) -> _RemoteSession:
        return _RemoteSession(instruction, self._client, self._max_tokens)

    def describe(self) -> str:
        return f"remote(model={self._client.model})"

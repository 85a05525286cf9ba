"""Rendering and parsing of the two-field thought/action message format.

An assistant turn is exactly:

    Thought: <free text, may span lines>
    Action: <single-line command>

``render`` and ``parse`` are inverses on trimmed, well-formed content.
Parsing is line-based: the first line starting with ``Action:`` closes the
thought block. Content after the action line is discarded but reported via
the ``trailing`` field, so callers can log that the producer appended
commentary.
"""

from __future__ import annotations

from typing import NamedTuple

THOUGHT_MARKER = "Thought:"
ACTION_MARKER = "Action:"

# Diagnostic categories, stable strings for programmatic matching.
MISSING_MARKER = "missing_marker"
EMPTY_FIELD = "empty_field"
OUT_OF_ORDER = "out_of_order"


class MalformedReact(ValueError):
    """Raised when a message cannot be parsed into (thought, action).

    ``category`` is one of the module-level diagnostic constants. Callers
    treat this as a format failure of the producing model, not as an
    erroneous-but-executable step.
    """

    def __init__(self, category: str, detail: str):
        super().__init__(f"{category}: {detail}")
        self.category = category
        self.detail = detail


class InvalidField(ValueError):
    """Raised when field content cannot survive a render/parse round trip."""


class ParsedReact(NamedTuple):
    thought: str
    action: str
    trailing: str = ""

    @property
    def lenient(self) -> bool:
        """True when content after the action line was discarded."""
        return bool(self.trailing)


def render(thought: str, action: str) -> str:
    """Format a (thought, action) pair as one assistant message.

    Rejects content that would not round-trip: an empty field, a multi-line
    action, or a thought containing a line that starts with the action
    marker (parsing would close the thought block early).
    """
    if not thought.strip():
        raise InvalidField("thought must be non-empty")
    if not action.strip():
        raise InvalidField("action must be non-empty")
    # splitlines, not "\n" in action: parsing splits on every line-break
    # character (including   and friends), so rendering must too.
    if len(action.splitlines()) != 1:
        raise InvalidField("action must be a single line")
    for line in thought.splitlines():
        if line.lstrip().startswith(ACTION_MARKER):
            raise InvalidField(
                "thought line may not start with the action marker: " + line.strip()
            )
    return f"{THOUGHT_MARKER} {thought.strip()}\n{ACTION_MARKER} {action.strip()}"


def parse(text: str) -> ParsedReact:
    """Parse an assistant message into its thought and action fields.

    Total over strings: returns a :class:`ParsedReact` or raises
    :class:`MalformedReact` with one of the three diagnostic categories.
    Trailing content after the action line goes into ``.trailing``.
    """
    lines = text.splitlines()

    thought_at = None
    action_at = None
    for idx, line in enumerate(lines):
        stripped = line.lstrip()
        if thought_at is None and stripped.startswith(THOUGHT_MARKER):
            thought_at = idx
        if action_at is None and stripped.startswith(ACTION_MARKER):
            action_at = idx

    if thought_at is None and action_at is None:
        raise MalformedReact(MISSING_MARKER, "neither Thought: nor Action: marker found")
    if thought_at is None:
        raise MalformedReact(MISSING_MARKER, "Thought: marker not found")
    if action_at is None:
        raise MalformedReact(MISSING_MARKER, "Action: marker not found")
    if action_at < thought_at:
        raise MalformedReact(
            OUT_OF_ORDER, f"Action: (line {action_at + 1}) precedes Thought: (line {thought_at + 1})"
        )

    # Reconstruct the thought block byte-exactly, trimming only the ends,
    # so render/parse is the identity on trimmed multi-line thoughts.
    head = lines[thought_at].lstrip()[len(THOUGHT_MARKER):]
    block = "\n".join([head] + lines[thought_at + 1 : action_at])
    thought = block.strip()
    action = lines[action_at].lstrip()[len(ACTION_MARKER):].strip()

    if not thought:
        raise MalformedReact(EMPTY_FIELD, "thought field is empty")
    if not action:
        raise MalformedReact(EMPTY_FIELD, "action field is empty")

    trailing = "\n".join(lines[action_at + 1 :]).strip()
    return ParsedReact(thought=thought, action=action, trailing=trailing)


# Names used by callers that deal in several formats at once.
render_react = render
parse_react = parse

"""ReAct loop engine: grammar parsing, tool dispatch, trace capture.

Model replies follow a line-anchored grammar:

    Thought: <free text>
    Action: <tool name>
    Action Input: <tool input>

or, to finish:

    Final Answer: <answer>

"Final Answer:" wins whenever present. Otherwise all three step markers must
appear in that order; anything else is a parse failure. One correction
re-prompt is allowed per run; a second unparseable reply terminates the run.
"""

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from ..errors import ParseFailure
from ..providers.base import Completer
from ..providers.types import ChatMessage

DEFAULT_MAX_ITERATIONS = 8

_TOOL_NAME_RE = re.compile(r"^[a-z_]+$")
_MARKERS = ("Thought:", "Action:", "Action Input:", "Final Answer:")

CORRECTION_MESSAGE = (
    "Your previous reply did not follow the required format. Reply with either\n"
    "Thought: / Action: / Action Input: lines, or a single Final Answer: line."
)


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    handler: Callable[[str], str]

    def __post_init__(self):
        if not _TOOL_NAME_RE.match(self.name):
            raise ValueError(f"tool name {self.name!r} must match [a-z_]+")


@dataclass
class AgentSpec:
    name: str
    role_prompt: str
    tools: list[ToolDescriptor] = field(default_factory=list)
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        names = [t.name for t in self.tools]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate tool names in agent {self.name!r}: {names}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class ReActStep:
    thought: str
    action: str | None = None
    action_input: str | None = None
    observation: str | None = None


@dataclass
class AgentTrace:
    agent_name: str
    steps: list[ReActStep] = field(default_factory=list)
    final_answer: str = ""
    terminated_by: str = "final_answer"  # final_answer | max_iterations | parse_failure

    def to_dict(self) -> dict:
        return {
            "agent_name": self.agent_name,
            "steps": [
                {
                    "thought": s.thought,
                    "action": s.action,
                    "action_input": s.action_input,
                    "observation": s.observation,
                }
                for s in self.steps
            ],
            "final_answer": self.final_answer,
            "terminated_by": self.terminated_by,
        }


@dataclass(frozen=True)
class ParsedStep:
    thought: str
    action: str
    action_input: str


@dataclass(frozen=True)
class FinalAnswer:
    text: str


def _marker_position(text: str, marker: str) -> int | None:
    match = re.search(rf"^[ \t]*{re.escape(marker)}", text, flags=re.MULTILINE)
    return match.start() if match else None


def _text_after(text: str, marker: str, start: int, end: int | None = None) -> str:
    segment = text[start : end if end is not None else len(text)]
    return segment.split(marker, 1)[1].strip()


def parse_react_output(text: str) -> Union[ParsedStep, FinalAnswer]:
    """Parse one model reply into a tool step or a final answer."""
    final_pos = _marker_position(text, "Final Answer:")
    if final_pos is not None:
        return FinalAnswer(_text_after(text, "Final Answer:", final_pos))

    positions = {}
    for marker in ("Thought:", "Action:", "Action Input:"):
        pos = _marker_position(text, marker)
        if pos is None:
            raise ParseFailure(f"missing required marker {marker!r}")
        positions[marker] = pos
    if not positions["Thought:"] < positions["Action:"] < positions["Action Input:"]:
        raise ParseFailure(
            "markers out of order: expected Thought:, then Action:, then Action Input:"
        )
    return ParsedStep(
        thought=_text_after(text, "Thought:", positions["Thought:"], positions["Action:"]),
        action=_text_after(text, "Action:", positions["Action:"], positions["Action Input:"]),
        action_input=_text_after(text, "Action Input:", positions["Action Input:"]),
    )


def _system_prompt(agent: AgentSpec) -> str:
    lines = [agent.role_prompt.strip(), ""]
    if agent.tools:
        lines.append("You can use these tools:")
        for tool in agent.tools:
            lines.append(f"- {tool.name}: {tool.description}")
        lines.append("")
    lines.append("Respond using exactly this format:")
    lines.append("Thought: what you are considering")
    lines.append("Action: the tool name")
    lines.append("Action Input: the input for the tool")
    lines.append("After each action you will receive an Observation.")
    lines.append("When you can answer, respond with a single line starting with:")
    lines.append("Final Answer: your answer")
    return "\n".join(lines)


def run_react(
    agent: AgentSpec, task: str, completer: Completer
) -> tuple[str, AgentTrace]:
    """Run the loop until a final answer, the iteration cap, or a parse failure.

    An unknown tool name is not an error: the model sees the observation
    "error: unknown tool <name>" and may recover. The engine issues at most
    max_iterations completion calls plus one correction re-prompt.
    """
    trace = AgentTrace(agent_name=agent.name)
    tools = {tool.name: tool for tool in agent.tools}
    messages = [
        ChatMessage(role="system", content=_system_prompt(agent)),
        ChatMessage(role="user", content=f"Task: {task}"),
    ]
    reprompted = False
    iterations = 0
    while iterations < agent.max_iterations:
        iterations += 1
        raw = completer.complete(messages)
        try:
            parsed = parse_react_output(raw)
        except ParseFailure:
            if not reprompted:
                reprompted = True
                iterations -= 1  # the re-prompt does not consume an iteration
                messages.append(ChatMessage(role="assistant", content=raw))
                messages.append(ChatMessage(role="user", content=CORRECTION_MESSAGE))
                continue
            trace.final_answer = raw
            trace.terminated_by = "parse_failure"
            return trace.final_answer, trace

        if isinstance(parsed, FinalAnswer):
            trace.final_answer = parsed.text
            trace.terminated_by = "final_answer"
            return trace.final_answer, trace

        tool = tools.get(parsed.action)
        if tool is None:
            observation = f"error: unknown tool {parsed.action}"
        else:
            observation = tool.handler(parsed.action_input)
        trace.steps.append(
            ReActStep(
                thought=parsed.thought,
                action=parsed.action,
                action_input=parsed.action_input,
                observation=observation,
            )
        )
        messages.append(ChatMessage(role="assistant", content=raw))
        messages.append(ChatMessage(role="user", content=f"Observation: {observation}"))

    trace.final_answer = trace.steps[-1].thought if trace.steps else ""
    trace.terminated_by = "max_iterations"
    return trace.final_answer, trace

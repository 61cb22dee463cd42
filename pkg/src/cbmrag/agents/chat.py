"""Chat agent: conversational queries over the case state and all knowledge stores."""

import json
from dataclasses import dataclass, field

from ..providers.base import Completer, TextEmbedder
from ..providers.types import ChatMessage
from ..store.catalog import StoreCatalog
from .prompts import PromptLibrary
from .react import AgentSpec, AgentTrace, DEFAULT_MAX_ITERATIONS, ToolDescriptor, run_react
from .roles import format_hits

HISTORY_TURNS_IN_PROMPT = 20


@dataclass
class CaseState:
    """Read-only snapshot of the session the chat agent may inspect."""

    predicted_label: str = ""
    concept_scores: dict[str, float] = field(default_factory=dict)
    report_text: str = ""

    def as_tool_observation(self) -> str:
        return json.dumps(
            {
                "predicted_label": self.predicted_label,
                "concept_scores": self.concept_scores,
                "report": self.report_text,
            },
            sort_keys=True,
        )


@dataclass
class ChatResult:
    reply: str
    history: list[ChatMessage]
    prompt_turns: list[ChatMessage]
    trace: AgentTrace


def _catalog_retrieval_tool(
    catalog: StoreCatalog, embedder: TextEmbedder, k: int
) -> ToolDescriptor:
    store_ids = ", ".join(sorted(catalog.store_ids()))

    def handler(raw: str) -> str:
        store_id, _, query = raw.partition(":")
        store_id = store_id.strip()
        query = query.strip()
        if not query:
            return "error: input must look like '<store_id>: <query>'"
        if store_id not in catalog.stores:
            return f"error: unknown store {store_id!r}; available: {store_ids}"
        return format_hits(catalog.query(store_id, query, k, embedder))

    return ToolDescriptor(
        name="retrieve",
        description=(
            f"Search a knowledge store. Input: '<store_id>: <query>' "
            f"with store_id one of: {store_ids}."
        ),
        handler=handler,
    )


def chat(
    case_state: CaseState,
    message: str,
    history: list[ChatMessage],
    catalog: StoreCatalog,
    completer: Completer,
    embedder: TextEmbedder,
    prompts: PromptLibrary | None = None,
    history_turns: int = HISTORY_TURNS_IN_PROMPT,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    retrieval_k: int = 4,
) -> ChatResult:
    """Answer one user message with retrieval and case-state tools.

    The prompt window holds only the most recent `history_turns` turns
    (a turn is one user or assistant message, the incoming message included).
    The returned history has both new turns appended.
    """
    if not message.strip():
        raise ValueError("chat message must be non-empty")
    prompts = prompts or PromptLibrary()
    tools = [
        _catalog_retrieval_tool(catalog, embedder, retrieval_k),
        ToolDescriptor(
            name="case_state",
            description="Look up the current case: predicted class, concept scores, report text. Input ignored.",
            handler=lambda _: case_state.as_tool_observation(),
        ),
    ]
    agent = AgentSpec(
        name="chat_agent",
        role_prompt=prompts.get("chat_agent"),
        tools=tools,
        max_iterations=max_iterations,
    )
    full = history + [ChatMessage(role="user", content=message)]
    window = full[-history_turns:]
    transcript = "\n".join(f"{m.role}: {m.content}" for m in window)
    task = f"Conversation so far:\n{transcript}\n\nAnswer the latest user message."
    reply, trace = run_react(agent, task, completer)
    updated = full + [ChatMessage(role="assistant", content=reply)]
    return ChatResult(reply=reply, history=updated, prompt_turns=list(window), trace=trace)

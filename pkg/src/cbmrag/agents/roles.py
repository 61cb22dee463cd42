"""The report pipeline roles: disease agents, radiologist, report writer.

Disease agents share one implementation parameterized by (class label, store,
role prompt). The radiologist picks the disease agent matching the predicted
class, feeds it the most influential concepts, then consolidates the agent's
findings with one completion call. The report writer turns the consolidated
findings plus retrieval context into a three-section report.
"""

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Sequence

import numpy as np

from ..cbm.types import ConceptSet, ContributionScores, Prediction, STORE_FOR_LABEL
from ..errors import MalformedReport, UnknownClassLabel
from ..providers.base import Completer, TextEmbedder
from ..providers.types import ChatMessage
from ..store.catalog import StoreCatalog, USER_UPLOADS_STORE_ID
from ..store.index import RetrievalHit
from .prompts import PromptLibrary
from .react import AgentSpec, AgentTrace, DEFAULT_MAX_ITERATIONS, ToolDescriptor, run_react

TOP_CONCEPTS_IN_TASK = 5
SNIPPET_CHARS = 280

REPORT_SECTION_HEADERS = ("FINDINGS:", "DIAGNOSIS:", "GUIDELINES:")


@dataclass
class ReportBundle:
    findings: str
    diagnosis: str
    guidelines: str
    traces: list[AgentTrace] = field(default_factory=list)
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "findings": self.findings,
            "diagnosis": self.diagnosis,
            "guidelines": self.guidelines,
            "traces": [t.to_dict() for t in self.traces],
            "created_at": self.created_at,
        }


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def format_hits(hits: Sequence[RetrievalHit], limit: int = SNIPPET_CHARS) -> str:
    if not hits:
        return "(no matching passages)"
    lines = []
    for hit in hits:
        snippet = hit.chunk.text[:limit]
        lines.append(f"[{hit.chunk.doc_id}#{hit.chunk.chunk_index}] (score {hit.score:.3f}) {snippet}")
    return "\n".join(lines)


def make_retrieval_tool(
    catalog: StoreCatalog,
    store_id: str,
    embedder: TextEmbedder,
    k: int = 4,
    description: str | None = None,
) -> ToolDescriptor:
    """A `retrieve` tool bound to one store; the input is the search query."""

    def handler(query: str) -> str:
        return format_hits(catalog.query(store_id, query, k, embedder))

    return ToolDescriptor(
        name="retrieve",
        description=description
        or f"Search the {store_id} knowledge store. Input: a search query.",
        handler=handler,
    )


def disease_agent(
    label: str,
    catalog: StoreCatalog,
    embedder: TextEmbedder,
    prompts: PromptLibrary,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    retrieval_k: int = 4,
) -> AgentSpec:
    if label not in STORE_FOR_LABEL:
        raise UnknownClassLabel(f"no disease agent for label {label!r}")
    store_id = STORE_FOR_LABEL[label]
    return AgentSpec(
        name=f"{store_id}_agent",
        role_prompt=prompts.disease_agent_prompt(label),
        tools=[make_retrieval_tool(catalog, store_id, embedder, k=retrieval_k)],
        max_iterations=max_iterations,
    )


def top_concept_indices(per_concept: np.ndarray, n: int = TOP_CONCEPTS_IN_TASK) -> list[int]:
    """Indices ordered by |contribution| descending, ties by index ascending."""
    order = sorted(range(len(per_concept)), key=lambda j: (-abs(float(per_concept[j])), j))
    return order[:n]


def build_consult_task(
    prediction: Prediction,
    contribs: ContributionScores,
    concept_set: ConceptSet,
    overridden_ids: frozenset[str] = frozenset(),
    top_n: int = TOP_CONCEPTS_IN_TASK,
) -> str:
    label = prediction.predicted_label
    lines = [
        f"Predicted class: {label}.",
        "Most influential concepts (by absolute contribution):",
    ]
    for j in top_concept_indices(contribs.per_concept, top_n):
        concept = concept_set.concepts[j]
        flag = " [user-adjusted]" if concept.concept_id in overridden_ids else ""
        lines.append(
            f"- {concept.name} (id {concept.concept_id}): "
            f"contribution {float(contribs.per_concept[j]):+.4f}{flag}"
        )
    lines.append(
        "Review the imaging evidence for this class, consult the knowledge store, "
        "and summarize the findings."
    )
    return "\n".join(lines)


def radiologist_consult(
    prediction: Prediction,
    contribs: ContributionScores,
    concept_set: ConceptSet,
    catalog: StoreCatalog,
    completer: Completer,
    embedder: TextEmbedder,
    prompts: PromptLibrary | None = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    retrieval_k: int = 4,
    overridden_ids: frozenset[str] = frozenset(),
) -> tuple[str, list[AgentTrace]]:
    """Route to the disease agent for the predicted class, then consolidate.

    Returns the radiologist's consolidated findings and the captured traces
    (disease agent first, radiologist second).
    """
    label = prediction.predicted_label
    if label not in STORE_FOR_LABEL:
        raise UnknownClassLabel(
            f"label {label!r} has no disease agent; expected one of {sorted(STORE_FOR_LABEL)}"
        )
    prompts = prompts or PromptLibrary()
    agent = disease_agent(
        label, catalog, embedder, prompts, max_iterations=max_iterations, retrieval_k=retrieval_k
    )
    task = build_consult_task(prediction, contribs, concept_set, overridden_ids)
    agent_answer, agent_trace = run_react(agent, task, completer)

    consolidation_request = "\n\n".join(
        [
            f"Case summary:\n{task}",
            f"Disease agent findings:\n{agent_answer}",
            "Consolidate these into concise clinical findings for the report writer.",
        ]
    )
    consolidated = completer.complete(
        [
            ChatMessage(role="system", content=prompts.get("radiologist")),
            ChatMessage(role="user", content=consolidation_request),
        ]
    )
    radiologist_trace = AgentTrace(
        agent_name="radiologist",
        steps=[],
        final_answer=consolidated,
        terminated_by="final_answer",
    )
    return consolidated, [agent_trace, radiologist_trace]


def parse_report_sections(text: str) -> dict[str, str]:
    positions = []
    for header in REPORT_SECTION_HEADERS:
        match = re.search(rf"^[ \t]*{re.escape(header)}", text, flags=re.MULTILINE)
        if match is None:
            raise MalformedReport(f"report is missing the {header[:-1]} section")
        positions.append((match.start(), header))
    positions.sort()
    sections: dict[str, str] = {}
    for i, (pos, header) in enumerate(positions):
        end = positions[i + 1][0] if i + 1 < len(positions) else len(text)
        body = text[pos:end].split(header, 1)[1].strip()
        if not body:
            raise MalformedReport(f"report section {header[:-1]} is empty")
        sections[header[:-1].lower()] = body
    return sections


def write_report(
    consolidated_findings: str,
    prediction: Prediction,
    hits: Sequence[RetrievalHit],
    completer: Completer,
    prompts: PromptLibrary | None = None,
    traces: Sequence[AgentTrace] = (),
    clock: Callable[[], str] = _utc_now_iso,
) -> ReportBundle:
    """One completion call against the fixed section template, then parse."""
    if not consolidated_findings.strip():
        raise ValueError("consolidated findings must be non-empty")
    prompts = prompts or PromptLibrary()
    request = "\n\n".join(
        [
            f"Predicted class: {prediction.predicted_label}",
            f"Consolidated findings:\n{consolidated_findings}",
            f"Supporting passages from the patient's uploaded material:\n{format_hits(hits)}",
            "Write the report now using exactly the three headers "
            "FINDINGS:, DIAGNOSIS:, GUIDELINES:.",
        ]
    )
    reply = completer.complete(
        [
            ChatMessage(role="system", content=prompts.get("report_writer")),
            ChatMessage(role="user", content=request),
        ]
    )
    sections = parse_report_sections(reply)
    writer_trace = AgentTrace(
        agent_name="report_writer",
        steps=[],
        final_answer=reply,
        terminated_by="final_answer",
    )
    return ReportBundle(
        findings=sections["findings"],
        diagnosis=sections["diagnosis"],
        guidelines=sections["guidelines"],
        traces=list(traces) + [writer_trace],
        created_at=clock(),
    )


def run_report_pipeline(
    prediction: Prediction,
    contribs: ContributionScores,
    concept_set: ConceptSet,
    catalog: StoreCatalog,
    completer: Completer,
    embedder: TextEmbedder,
    prompts: PromptLibrary | None = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    retrieval_k: int = 4,
    upload_hits_k: int = 3,
    overridden_ids: frozenset[str] = frozenset(),
    clock: Callable[[], str] = _utc_now_iso,
) -> ReportBundle:
    """Full pipeline: disease agent -> radiologist -> report writer."""
    prompts = prompts or PromptLibrary()
    consolidated, traces = radiologist_consult(
        prediction,
        contribs,
        concept_set,
        catalog,
        completer,
        embedder,
        prompts=prompts,
        max_iterations=max_iterations,
        retrieval_k=retrieval_k,
        overridden_ids=overridden_ids,
    )
    hits: list[RetrievalHit] = []
    if USER_UPLOADS_STORE_ID in catalog.stores and len(catalog.get(USER_UPLOADS_STORE_ID)):
        top = top_concept_indices(contribs.per_concept, TOP_CONCEPTS_IN_TASK)
        query = " ".join(
            [prediction.predicted_label] + [concept_set.concepts[j].name for j in top]
        )
        hits = catalog.query(USER_UPLOADS_STORE_ID, query, upload_hits_k, embedder)
    return write_report(
        consolidated,
        prediction,
        hits,
        completer,
        prompts=prompts,
        traces=traces,
        clock=clock,
    )

from .chat import CaseState, ChatResult, chat, HISTORY_TURNS_IN_PROMPT
from .concepts import generate_concept_set, load_default_concept_set, parse_concept_lines
from .prompts import PROMPT_NAMES, PromptLibrary
from .react import (
    AgentSpec,
    AgentTrace,
    DEFAULT_MAX_ITERATIONS,
    FinalAnswer,
    ParsedStep,
    ReActStep,
    ToolDescriptor,
    parse_react_output,
    run_react,
)
from .roles import (
    ReportBundle,
    build_consult_task,
    disease_agent,
    parse_report_sections,
    radiologist_consult,
    run_report_pipeline,
    top_concept_indices,
    write_report,
)

__all__ = [
    "AgentSpec",
    "AgentTrace",
    "CaseState",
    "ChatResult",
    "DEFAULT_MAX_ITERATIONS",
    "FinalAnswer",
    "HISTORY_TURNS_IN_PROMPT",
    "PROMPT_NAMES",
    "ParsedStep",
    "PromptLibrary",
    "ReActStep",
    "ReportBundle",
    "ToolDescriptor",
    "build_consult_task",
    "chat",
    "disease_agent",
    "generate_concept_set",
    "load_default_concept_set",
    "parse_concept_lines",
    "parse_react_output",
    "radiologist_consult",
    "run_react",
    "run_report_pipeline",
    "top_concept_indices",
    "write_report",
]

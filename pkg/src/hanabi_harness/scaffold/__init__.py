"""Prompt rendering and response parsing for the three scaffolds."""

from .moa import (
    UNAVAILABLE,
    RoleKind,
    render_aggregator_prompt,
    render_selection_prompt,
    render_specialist_prompt,
    section_delimiters,
    specialist_roles,
)
from .parse import (
    AgentDecision,
    InvalidAction,
    InvalidRatings,
    MissingAction,
    ResponseParseError,
    extract_json_object,
    format_response,
    parse_agent_response,
)
from .render import (
    NotYourTurnError,
    Prompt,
    ScaffoldKind,
    TurnMemory,
    actions_since_last_turn,
    discards_text,
    legal_mapping_text,
    mycroft_state_text,
    render_prompt,
    sherlock_state_text,
    watson_state_text,
)

__all__ = [
    "UNAVAILABLE", "AgentDecision", "InvalidAction", "InvalidRatings", "MissingAction",
    "NotYourTurnError", "Prompt", "ResponseParseError", "RoleKind", "ScaffoldKind",
    "TurnMemory", "actions_since_last_turn", "discards_text", "extract_json_object",
    "format_response", "legal_mapping_text", "mycroft_state_text", "parse_agent_response",
    "render_aggregator_prompt", "render_prompt", "render_selection_prompt",
    "render_specialist_prompt", "section_delimiters", "sherlock_state_text",
    "specialist_roles", "watson_state_text",
]

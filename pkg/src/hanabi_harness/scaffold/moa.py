"""Prompt builders for Best-of-K selection and the Mixture-of-Agents roles."""

from __future__ import annotations

from enum import Enum
from typing import Mapping, Sequence

from ..engine import GameState, MoveOutcome
from .render import (
    RANK_PREFERENCE_SHERLOCK,
    RANK_PREFERENCE_WATSON,
    Prompt,
    ScaffoldKind,
    _probability,
    legal_listing,
    render_sherlock,
    render_watson,
    sherlock_history_text,
    sherlock_shared_context,
    watson_history_text,
    watson_state_text,
)
from .templates import fill, load


def render_selection_prompt(original: Prompt, responses: Sequence[str]) -> Prompt:
    """Original prompt followed by the k candidate responses."""
    blocks = "\n".join(f"Response {i}:\n{text}" for i, text in enumerate(responses, 1))
    tail = fill("best_of_k", n=len(responses), responses=blocks)
    return Prompt(user=f"{original.user}\n\n{tail}", system=original.system)


class RoleKind(str, Enum):
    BASELINE = "Baseline"
    RANK_FOCUSED = "RankFocused"
    ANALYST = "Analyst"
    DISCARD_STRATEGIST = "DiscardStrategist"
    HISTORY_ANALYST = "HistoryAnalyst"
    AGGREGATOR = "Aggregator"


SPECIALIST_ORDER = (
    RoleKind.BASELINE,
    RoleKind.RANK_FOCUSED,
    RoleKind.ANALYST,
    RoleKind.DISCARD_STRATEGIST,
    RoleKind.HISTORY_ANALYST,
)

UNAVAILABLE = "[unavailable: this agent did not return a usable response]"


def specialist_roles(n_players: int) -> list[RoleKind]:
    """Specialists in fixed order; two-player games drop the history analyst."""
    return [r for r in SPECIALIST_ORDER if not (n_players == 2 and r is RoleKind.HISTORY_ANALYST)]


def _check_kind(kind: ScaffoldKind) -> ScaffoldKind:
    kind = ScaffoldKind(kind)
    if kind is ScaffoldKind.MYCROFT:
        raise ValueError("mixture of agents is defined for the Watson and Sherlock scaffolds only")
    return kind


def _watson_context(state: GameState, viewer: int, history=None) -> str:
    text = f"Game State:\n{watson_state_text(state, viewer)}\n\nLegal Moves:\n{legal_listing(state, 'watson')}"
    if history is not None:
        text += "\n\n" + watson_history_text(history)
    return text


def render_specialist_prompt(
    kind: ScaffoldKind,
    role: RoleKind,
    state: GameState,
    viewer: int,
    history: Sequence[MoveOutcome] = (),
) -> Prompt:
    kind = _check_kind(kind)
    role = RoleKind(role)
    if role is RoleKind.AGGREGATOR:
        raise ValueError("use render_aggregator_prompt for the aggregator")
    if kind is ScaffoldKind.WATSON:
        if role is RoleKind.BASELINE:
            return render_watson(state, viewer)
        if role is RoleKind.RANK_FOCUSED:
            base = render_watson(state, viewer)
            return Prompt(user=base.user, system=f"{base.system}\n{RANK_PREFERENCE_WATSON}")
        if role is RoleKind.ANALYST:
            return Prompt(
                system=load("moa_watson_analyst_system"),
                user=fill("moa_watson_analyst_user", context=_watson_context(state, viewer)),
            )
        if role is RoleKind.DISCARD_STRATEGIST:
            return Prompt(
                system=load("moa_watson_discard_system"),
                user=fill("moa_watson_discard_user", context=_watson_context(state, viewer)),
            )
        return Prompt(
            system=load("moa_watson_history_system"),
            user=fill("moa_watson_history_user", context=_watson_context(state, viewer, history)),
        )

    if role is RoleKind.BASELINE:
        return render_sherlock(state, viewer, kind)
    if role is RoleKind.RANK_FOCUSED:
        base = render_sherlock(state, viewer, kind)
        return Prompt(user=f"{base.user}\n\n{RANK_PREFERENCE_SHERLOCK}")
    context = sherlock_shared_context(state, viewer, kind)
    if role is RoleKind.ANALYST:
        return Prompt(user=fill(
            "moa_sherlock_analyst", context=context,
            legal_json=legal_listing(state, "json"), probability=_probability(),
        ))
    if role is RoleKind.DISCARD_STRATEGIST:
        return Prompt(user=fill(
            "moa_sherlock_discard", context=context,
            probability=_probability(" Use this to Backup your decision to discard or save a card."),
        ))
    return Prompt(user=fill(
        "moa_sherlock_history", context=context, viewer=viewer,
        history=sherlock_history_text(state, viewer, history),
        probability=_probability(" Use this to backup your speculations."),
    ))


_WATSON_HEADINGS = {
    RoleKind.BASELINE: ("--- Agent 1 Proposal ---", "--- End Agent 1 Proposal ---"),
    RoleKind.RANK_FOCUSED: ("--- Agent 2 Proposal ---", "--- End Agent 2 Proposal ---"),
    RoleKind.ANALYST: ("--- Agent 3 Analysis (Hand & Clues) ---", "--- End Agent 3 Analysis ---"),
    RoleKind.DISCARD_STRATEGIST: (
        "--- Agent 4 Discard Proposal ---", "--- End Agent 4 Discard Proposal ---",
    ),
    RoleKind.HISTORY_ANALYST: (
        "--- Agent 5 History Analysis ---", "--- End Agent 5 History Analysis ---",
    ),
}

_SHERLOCK_HEADINGS = {
    RoleKind.BASELINE: "Report from Agent 1 (Baseline):",
    RoleKind.RANK_FOCUSED: "Report from Agent 2 (Rank-Preferring):",
    RoleKind.ANALYST: "Report from Agent 3 (Analyst):",
    RoleKind.DISCARD_STRATEGIST: "Report from Agent 4 (Discard Expert):",
    RoleKind.HISTORY_ANALYST: "Report from Agent 5 (Historian):",
}

_SHERLOCK_RECEIVED = {
    RoleKind.BASELINE: "-- Ratings JSON from the first strategist",
    RoleKind.RANK_FOCUSED: "-- Ratings JSON from the rank-preferring strategist",
    RoleKind.ANALYST: "-- Full move analysis text",
    RoleKind.DISCARD_STRATEGIST: "-- Discard-probability report",
    RoleKind.HISTORY_ANALYST: "-- History deductions text",
}


def section_delimiters(kind: ScaffoldKind, role: RoleKind) -> tuple[str, str | None]:
    """Opening (and, for Watson, closing) delimiter of a specialist section."""
    kind = _check_kind(kind)
    if kind is ScaffoldKind.WATSON:
        return _WATSON_HEADINGS[RoleKind(role)]
    return _SHERLOCK_HEADINGS[RoleKind(role)], None


def render_aggregator_prompt(
    kind: ScaffoldKind,
    state: GameState,
    viewer: int,
    history: Sequence[MoveOutcome],
    reports: Mapping[RoleKind, str | None],
) -> Prompt:
    """Aggregator prompt with one delimited section per specialist, in fixed order.

    A missing or ``None`` report is replaced by an explicit unavailable stub.
    """
    kind = _check_kind(kind)
    roles = specialist_roles(state.n_players)
    if kind is ScaffoldKind.WATSON:
        blocks = []
        for role in roles:
            opening, closing = _WATSON_HEADINGS[role]
            blocks.append(f"{opening}\n{reports.get(role) or UNAVAILABLE}\n{closing}")
        return Prompt(
            system=load("moa_watson_finalizer_system"),
            user=fill(
                "moa_watson_finalizer_user",
                context=_watson_context(state, viewer, history),
                sections="\n".join(blocks),
            ),
        )
    sections = "\n---\n".join(
        f"{_SHERLOCK_HEADINGS[role]}\n{reports.get(role) or UNAVAILABLE}" for role in roles
    ) + "\n---"
    return Prompt(user=fill(
        "moa_sherlock_aggregator",
        context=sherlock_shared_context(state, viewer, kind),
        received="\n".join(_SHERLOCK_RECEIVED[r] for r in roles),
        history=sherlock_history_text(state, viewer, history, last=10),
        sections=sections,
    ))

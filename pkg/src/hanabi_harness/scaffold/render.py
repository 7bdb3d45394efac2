"""Prompt rendering for the Watson, Sherlock and Mycroft scaffolds.

Every function here is a pure function of its arguments, so identical inputs
yield identical bytes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..beliefs import CardKnowledge
from ..cards import COLORS, Card
from ..engine import GameState, MoveOutcome, describe, describe_absolute, fireworks_text, legal_moves
from .templates import fill, load


class ScaffoldKind(str, Enum):
    WATSON = "Watson"
    SHERLOCK = "Sherlock"
    SHERLOCK_NO_DEDUCTION = "SherlockNoDeduction"
    SHERLOCK_NO_DISCARD_PILE = "SherlockNoDiscardPile"
    MYCROFT = "Mycroft"

    @property
    def sherlock_family(self) -> bool:
        return self in (
            ScaffoldKind.SHERLOCK,
            ScaffoldKind.SHERLOCK_NO_DEDUCTION,
            ScaffoldKind.SHERLOCK_NO_DISCARD_PILE,
        )

    @property
    def shows_deductions(self) -> bool:
        return self is ScaffoldKind.SHERLOCK

    @property
    def shows_discards(self) -> bool:
        return self is not ScaffoldKind.SHERLOCK_NO_DISCARD_PILE


class NotYourTurnError(ValueError):
    pass


@dataclass(frozen=True)
class Prompt:
    user: str
    system: str | None = None

    @property
    def text(self) -> str:
        return f"{self.system}\n\n{self.user}" if self.system else self.user

    def messages(self) -> list[dict]:
        out = [{"role": "system", "content": self.system}] if self.system else []
        out.append({"role": "user", "content": self.user})
        return out


@dataclass(frozen=True)
class TurnMemory:
    """One seat's working memory: its previous state text and raw response."""

    previous_state_text: str = ""
    previous_response_text: str = ""

    def __post_init__(self):
        if bool(self.previous_state_text) != bool(self.previous_response_text):
            raise ValueError("memory needs both the previous state and the previous response")

    @property
    def is_empty(self) -> bool:
        return not self.previous_state_text


# ---------------------------------------------------------------------------
# Shared fragments
# ---------------------------------------------------------------------------

def discards_text(discards: Sequence[Card]) -> str:
    """``1 red card rank 1, 2 red cards rank 3`` in color then rank order."""
    if not discards:
        return "no cards discarded yet"
    counts = Counter(discards)
    parts = []
    for card in sorted(counts, key=lambda c: (c.color.index, c.rank)):
        n = counts[card]
        noun = "card" if n == 1 else "cards"
        parts.append(f"{n} {card.color.full_name.lower()} {noun} rank {card.rank}")
    return ", ".join(parts)


def _stacks_sentence(state: GameState) -> str:
    stacks = ", ".join(f"{c.value} stack is at {h}" for c, h in zip(COLORS, state.fireworks))
    return f"The fireworks progress: {stacks}."


def _tokens_sentence(state: GameState) -> str:
    return (
        f"There are {state.life_tokens} life tokens and {state.info_tokens} info tokens remaining."
    )


def _deck_sentence(state: GameState, with_discards: bool = True) -> str:
    text = f"There are {len(state.deck)} cards remaining in the deck."
    if with_discards:
        text += f" The discard pile contains: {discards_text(state.discards)}."
    return text


def last_player(state: GameState) -> int | None:
    if state.final_countdown is None:
        return None
    return (state.current_player + state.final_countdown - 1) % state.n_players


def final_round_line(state: GameState, viewer: int) -> str | None:
    """Prose form used by the Sherlock and Mycroft state blocks."""
    last = last_player(state)
    if last is None:
        return None
    if last == viewer:
        return (
            "FINAL ROUND: The deck is empty. You are the final player and this is the "
            "final turn for the whole game."
        )
    offset = (last - viewer) % state.n_players
    return (
        "FINAL ROUND: The deck is empty. This is the final round and "
        f"Player +{offset} (P{last}) is the last player."
    )


def other_seats(state: GameState, viewer: int) -> list[int]:
    """Teammates in absolute seat order, matching the transcripts."""
    return [p for p in range(state.n_players) if p != viewer]


def _offset(state: GameState, viewer: int, seat: int) -> int:
    return (seat - viewer) % state.n_players


def legal_mapping_text(state: GameState) -> str:
    """``{0: '((Discard 0))', 1: ...}``."""
    items = ", ".join(f"{i}: '({describe(m)})'" for i, m in legal_moves(state))
    return "{" + items + "}"


def legal_listing(state: GameState, style: str) -> str:
    moves = legal_moves(state)
    if style == "watson":
        return "\n".join(f"{i}. {describe(m)}" for i, m in moves)
    if style == "mycroft":
        return "\n".join(f"{i}: ({describe(m)})" for i, m in moves)
    if style == "json":
        import json

        return json.dumps({str(i): describe(m) for i, m in moves}, indent=2)
    raise ValueError(style)


def _probability(tail: str = "") -> str:
    return fill("probability", probability_tail=tail)


# ---------------------------------------------------------------------------
# Watson
# ---------------------------------------------------------------------------

def _watson_hint(k: CardKnowledge) -> str:
    color = k.hinted_color.full_name if k.hinted_color else "UnknownColor"
    rank = str(k.hinted_rank) if k.hinted_rank else "UnknownRank"
    return f"{color} {rank}"


def _bracket(items: Sequence[str]) -> str:
    return "[" + ", ".join(items) + "]"


def _watson_group(label: str, entries: list[str]) -> str:
    if len(entries) == 1:
        return f"{label}: {entries[0]}"
    return f"{label}:\n" + ".\n".join(entries)


def watson_state_text(state: GameState, viewer: int) -> str:
    n = state.n_players
    lines = [
        f"P{viewer} ({n}p Game). Lives: {state.life_tokens}, Info: {state.info_tokens}, "
        f"Deck: {len(state.deck)}.",
        f"Fireworks: {fireworks_text(state.fireworks)}. Discards: {discards_text(state.discards)}.",
    ]
    last = last_player(state)
    if last is not None:
        lines.append(f"FINAL ROUND! {state.final_countdown} turns left (P{last} is last).")
    others = other_seats(state, viewer)
    lines.append(_watson_group("Visible Hands", [
        f"P{p} Hand: {_bracket([c.long_name for c in state.hands[p]])}" for p in others
    ]))
    own = state.knowledge[viewer]
    lines.append(
        f"Your Knowledge (Hints): {_bracket([_watson_hint(k) for k in own])} "
        f"(Indices 0-{len(own) - 1})."
    )
    lines.append(_watson_group("Others' Knowledge", [
        f"P{p} Knows: {_bracket([_watson_hint(k) for k in state.knowledge[p]])}" for p in others
    ]))
    return "\n".join(lines)


RANK_PREFERENCE_WATSON = (
    "with a preference for rank clues over color clues when both are equally valuable."
)


def render_watson(state: GameState, viewer: int, *, clean_system: bool = False) -> Prompt:
    # The published system prompt omits the ratings line that the user
    # prompt asks for; clean_system adds it for consistency.
    ratings = (
        "Move Ratings: [Rate each legal move from -1 (terrible) to 1 (excellent), like "
        '"Move 0: 0.5, Move 1: -0.3, Move 2: 1.0, ..."]\n'
        if clean_system else ""
    )
    system = fill("watson_system", ratings_line=ratings)
    user = fill(
        "watson_user",
        viewer=viewer,
        game_state=watson_state_text(state, viewer),
        legal_moves=legal_listing(state, "watson"),
        info=state.info_tokens,
    )
    return Prompt(user=user, system=system)


def watson_history_text(history: Sequence[MoveOutcome], last: int = 10) -> str:
    start = max(0, len(history) - last)
    lines = [f"Recent Turn History (Last {last}):"]
    for i in range(start, len(history)):
        o = history[i]
        lines.append(
            f"- T{i + 1} (P{o.player}, Info:{o.info_before}, "
            f"FW:{fireworks_text(o.fireworks_before)}): [{describe(o.move)}]"
        )
    if len(lines) == 1:
        lines.append("- (no moves yet)")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Sherlock
# ---------------------------------------------------------------------------

def _known_code(k: CardKnowledge) -> str:
    return (k.hinted_color.value if k.hinted_color else "X") + (str(k.hinted_rank) if k.hinted_rank else "X")


def _known_clause(k: CardKnowledge, lower_color: bool) -> str | None:
    parts = []
    if k.hinted_color is not None:
        name = k.hinted_color.full_name
        parts.append(f"color is {name.lower() if lower_color else name}")
    if k.hinted_rank is not None:
        parts.append(f"rank is {k.hinted_rank}")
    return " and ".join(parts) or None


def _could_be(k: CardKnowledge) -> str:
    colors = ", ".join(c.full_name for c in k.sorted_colors())
    ranks = ", ".join(str(r) for r in k.sorted_ranks())
    return f"any of these colors: {colors} with ranks: {ranks}"


def sherlock_state_text(
    state: GameState, viewer: int, kind: ScaffoldKind = ScaffoldKind.SHERLOCK
) -> str:
    """State body shared by the Sherlock prompt, MoA context and judge prompt."""
    kind = ScaffoldKind(kind)
    lines = [_tokens_sentence(state), _stacks_sentence(state), "Your hand contains the following cards:"]
    for i, k in enumerate(state.knowledge[viewer]):
        known = _known_clause(k, lower_color=True)
        hint = f"Known: {known}." if known else (
            "No hints about this card's color or rank have been given yet."
        )
        lines.append(f"Card {i}:")
        lines.append(f"- Known info: '{_known_code(k)}'. {hint}")
        if kind.shows_deductions:
            lines.append(f"- Could be {_could_be(k)}.")
    lines.append(
        "From your perspective, you can see the other players' hands clearly. "
        "Here's what you observe:"
    )
    for p in other_seats(state, viewer):
        lines.append(f"Player +{_offset(state, viewer, p)}'s hand:")
        for card, k in zip(state.hands[p], state.knowledge[p]):
            known = _known_clause(k, lower_color=False)
            text = f"- A card: You can see the card: '{card}', "
            text += f"This player knows {known}" if known else (
                "This player has no specific hints about the card's identity"
            )
            if kind.shows_deductions:
                text += f", This player knows it could be {_could_be(k)}"
            lines.append(text + ".")
    lines.append(_deck_sentence(state, with_discards=kind.shows_discards))
    return "\n".join(lines)


def _with_final_round(body: str, state: GameState, viewer: int) -> str:
    line = final_round_line(state, viewer)
    return f"{body}\n\n{line}" if line else body


def sherlock_shared_context(state: GameState, viewer: int, kind: ScaffoldKind) -> str:
    """Rules, persona and current state: the prefix of every specialist prompt."""
    kind = ScaffoldKind(kind)
    body = _with_final_round(sherlock_state_text(state, viewer, kind), state, viewer)
    return (
        f"{fill('rules', n_players=state.n_players)}\n\n{load('persona')}\n\n"
        f"Current Game State:\n{body}"
    )


def render_sherlock(state: GameState, viewer: int, kind: ScaffoldKind = ScaffoldKind.SHERLOCK) -> Prompt:
    body = _with_final_round(sherlock_state_text(state, viewer, kind), state, viewer)
    parts = [
        fill("rules", n_players=state.n_players),
        load("persona"),
        "Below is the current detailed state information.",
        f"Game State:\n{body}",
        load("think_steps"),
        "Now it's your turn. You can choose from the following legal actions:",
        "The legal actions are provided in a mapping of action identifiers to their descriptions:\n"
        + legal_mapping_text(state),
        load("action_legend"),
        load("sherlock_output"),
        _probability(),
    ]
    return Prompt(user="\n\n".join(parts))


RANK_PREFERENCE_SHERLOCK = (
    "IMPORTANT RULE:\nWhen a color clue and a rank clue are equally valuable, "
    "you must give the rank clue."
)


def sherlock_history_text(
    state: GameState, viewer: int, history: Sequence[MoveOutcome], last: int | None = None
) -> str:
    n = state.n_players
    start = 0 if last is None else max(0, len(history) - last)
    lines = []
    for i in range(start, len(history)):
        o = history[i]
        off = (o.player - viewer) % n
        who = f"You (P{o.player})" if off == 0 else f"Player +{off} (P{o.player})"
        before = fireworks_text(o.fireworks_before, sep=", ")
        after = fireworks_text(o.fireworks_after, sep=", ")
        lines.append(
            f"Turn {i + 1}: {who} chose move '{describe(o.move)}'. "
            f"Fireworks: {before}→{after}, Info tokens: {o.info_before}→{o.info_after}."
        )
    return "\n".join(lines) if lines else "No moves have been made yet."


# ---------------------------------------------------------------------------
# Mycroft
# ---------------------------------------------------------------------------

def _explicit(k: CardKnowledge) -> str:
    if k.hinted_color is None and k.hinted_rank is None:
        return "unknown"
    color = k.hinted_color.value if k.hinted_color else "unknown color"
    rank = f"rank {k.hinted_rank}" if k.hinted_rank else "unknown rank"
    return f"{color}, {rank}"


def actions_since_last_turn(history: Sequence[MoveOutcome], viewer: int) -> list[MoveOutcome]:
    """Moves made after the viewer's most recent move (or since the start)."""
    out: list[MoveOutcome] = []
    for o in reversed(history):
        if o.player == viewer:
            break
        out.append(o)
    return out[::-1]


def mycroft_state_text(state: GameState, viewer: int, history: Sequence[MoveOutcome] = ()) -> str:
    """State block that doubles as the next turn's PREVIOUS GAME-STATE."""
    n = state.n_players
    lines = [
        f"You are Player P{viewer}, Turn {state.turn_index + 1}",
        "Since your last turn the following actions occurred:",
    ]
    since = actions_since_last_turn(history, viewer)
    for o in since:
        lines.append(
            f"- P{o.player} {describe_absolute(o.move, o.player, n)} | "
            f"Fireworks: {fireworks_text(o.fireworks_after)} | Info: {o.info_after}"
        )
    if not since:
        lines.append("- (no actions yet)")
    lines += [
        "",
        _tokens_sentence(state),
        _stacks_sentence(state),
        "Your hand (what you know):",
        "This is your explicit knowledge, showing only what you've been directly told through clues.",
        "For further deductions (what each card cannot be, based on prior history and reasoning), "
        "use your deduction block.",
    ]
    lines += [f"  Card {i}: {_explicit(k)}" for i, k in enumerate(state.knowledge[viewer])]
    lines.append(
        "From your perspective, you can see the other players' hands clearly. "
        "Here's what you observe:"
    )
    for p in other_seats(state, viewer):
        lines.append(f"Player +{_offset(state, viewer, p)}'s hand:")
        lines += [f"- {card}" for card in state.hands[p]]
    lines.append(_deck_sentence(state))
    return _with_final_round("\n".join(lines), state, viewer)


_NUMBER_WORDS = {2: "two", 3: "three", 4: "four"}


def _others_phrase(n_players: int) -> str:
    others = n_players - 1
    return "the other player" if others == 1 else f"all {_NUMBER_WORDS[others]} other players"


def _example_keys(n_players: int) -> str:
    cards = ", ".join(f'"card{i}": "..."' for i in range(4))
    keys = ["you"] + [f"player+{o}" for o in range(1, n_players)]
    return ",\n".join(f'"{k}": {{{cards}}}' for k in keys)


MEMORY_HEADER = "### You have been given the previous game-state and your last reasoning ###"


def render_mycroft(
    state: GameState,
    viewer: int,
    memory: TurnMemory | None = None,
    history: Sequence[MoveOutcome] = (),
) -> Prompt:
    n = state.n_players
    parts = [
        fill("rules", n_players=n),
        load("persona"),
        load("think_steps"),
        "The legal actions are provided in a mapping of action identifiers to their descriptions:",
        "Example of legal actions:\n" + load("action_legend"),
        fill("mycroft_output", example_keys=_example_keys(n)),
        fill("mycroft_protocol", others_phrase=_others_phrase(n)),
        _probability()
        + "\nExcept for your first turn, you will receive the previous turn's game state and your "
        "last reasoning; use them for context, but your deduction block must describe knowledge "
        "in the current state only.",
        "Below is the current detailed state information.",
        "Game State:\n" + mycroft_state_text(state, viewer, history),
        load("mycroft_notes"),
        "Legal moves this turn:\n" + legal_listing(state, "mycroft"),
    ]
    if memory is not None and not memory.is_empty:
        parts.append(
            f"{MEMORY_HEADER}\n"
            f"PREVIOUS GAME-STATE:\n{memory.previous_state_text}\n\n"
            f"PREVIOUS TURN RESPONSE:\n{memory.previous_response_text}"
        )
    return Prompt(user="\n\n".join(parts))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def render_prompt(
    kind: ScaffoldKind,
    state: GameState,
    viewer: int,
    memory: TurnMemory | None = None,
    history: Sequence[MoveOutcome] = (),
    *,
    clean_watson_system: bool = False,
) -> Prompt:
    """Render the prompt ``viewer`` sees on its turn.

    ``history`` is the game's full list of move outcomes; Mycroft uses it for
    the actions-since-last-turn digest and to check that memory is present
    once the seat has already acted.
    """
    kind = ScaffoldKind(kind)
    if viewer != state.current_player:
        raise NotYourTurnError(f"P{viewer} asked for a prompt on P{state.current_player}'s turn")
    if kind is ScaffoldKind.WATSON:
        return render_watson(state, viewer, clean_system=clean_watson_system)
    if kind.sherlock_family:
        return render_sherlock(state, viewer, kind)
    if (memory is None or memory.is_empty) and any(o.player == viewer for o in history):
        raise ValueError("Mycroft needs the seat's memory after its first turn")
    return render_mycroft(state, viewer, memory, history)

"""Hand-built game states reproduced from published transcripts.

Each builder returns real engine states (deck order plus move list), so the
fixtures exercise the same code paths as a live game.
"""

from dataclasses import replace
from pathlib import Path

from hanabi_harness.beliefs import UNKNOWN, CardKnowledge
from hanabi_harness.cards import Color, canonical_deck, parse_card
from hanabi_harness.engine import (
    Discard,
    GameConfig,
    Play,
    RevealColor,
    RevealRank,
    new_game,
    replay,
)

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def _deck(hands, draws):
    """Deal order for round-robin dealing, then the given draws, then the rest."""
    n, h = len(hands), len(hands[0])
    order = [hands[p][i] for i in range(h) for p in range(n)] + list(draws)
    cards = [parse_card(c) for c in order]
    rest = list(canonical_deck())
    for c in cards:
        rest.remove(c)
    return tuple(cards + rest)


def _absolute_clue(actor, target, n, value):
    offset = (target - actor) % n
    if isinstance(value, Color):
        return RevealColor(offset, value)
    return RevealRank(offset, value)


# 5 players, P2 moves first. After 14 moves it is P1's turn.
FIVE_P_TURN15_HANDS = [
    ["R2", "R3", "G4", "B1"],
    ["W4", "R1", "R5", "Y2"],
    ["W3", "G3", "Y1", "Y3"],
    ["G5", "B3", "G1", "R4"],
    ["B1", "B5", "G1", "W1"],
]
FIVE_P_TURN15_DRAWS = ["W2", "Y2", "Y4", "G2", "B2", "G3"]
FIVE_P_TURN15_SCRIPT = [
    (2, ("clue", 0, 1)),
    (3, ("clue", 2, 1)),
    (4, ("clue", 3, 1)),
    (0, Play(3)),
    (1, ("clue", 4, Color.W)),
    (2, Play(2)),
    (3, Play(2)),
    (4, ("clue", 1, Color.Y)),
    (0, ("clue", 1, 2)),
    (1, Play(3)),
    (2, Discard(2)),
    (3, Discard(2)),
    (4, ("clue", 2, Color.B)),
    (0, ("clue", 1, Color.R)),
]

# 5 players, P2 moves first. After 10 moves it is P2's turn again.
FIVE_P_TURN11_HANDS = [
    ["R2", "B1", "R3", "G4"],
    ["G1", "R1", "R1", "Y2"],
    ["W2", "R4", "B2", "Y1"],
    ["Y3", "G1", "G5", "B3"],
    ["B1", "B5", "G1", "W1"],
]
FIVE_P_TURN11_DRAWS = ["Y4", "W3", "Y2"]
FIVE_P_TURN11_SCRIPT = [
    (2, ("clue", 4, 1)),
    (3, ("clue", 4, Color.B)),
    (4, Play(0)),
    (0, ("clue", 2, 1)),
    (1, ("clue", 2, Color.Y)),
    (2, Play(3)),
    (3, ("clue", 1, Color.G)),
    (4, ("clue", 1, 1)),
    (0, ("clue", 3, 1)),
    (1, Play(0)),
]


def _scripted(hands, draws, script, first_player=2):
    config = GameConfig(
        n_players=len(hands), deck_order=_deck(hands, draws), first_player=first_player
    )
    moves = []
    for actor, step in script:
        if isinstance(step, tuple):
            _, target, value = step
            moves.append(_absolute_clue(actor, target, len(hands), value))
        else:
            moves.append(step)
    return config, moves


def five_player_turn15():
    """(config, moves); the final state has P1 to act at turn index 14."""
    return _scripted(FIVE_P_TURN15_HANDS, FIVE_P_TURN15_DRAWS, FIVE_P_TURN15_SCRIPT)


def five_player_turn11():
    """(config, moves); the final state has P2 to act at turn index 10."""
    return _scripted(FIVE_P_TURN11_HANDS, FIVE_P_TURN11_DRAWS, FIVE_P_TURN11_SCRIPT)


def two_player_endgame():
    """Two-player final-turn position: P1 to act, deck empty, one info token."""
    discard_counts = {
        "R1": 1, "R2": 1, "R3": 2, "R4": 1, "Y1": 2, "Y2": 1, "Y4": 1, "Y5": 1,
        "G1": 1, "G2": 1, "G3": 1, "G4": 2, "G5": 1, "W1": 2, "W2": 1, "W3": 1,
        "W4": 2, "B1": 2, "B2": 1, "B4": 2, "B5": 1,
    }
    discards = tuple(parse_card(c) for c, n in discard_counts.items() for _ in range(n))
    hands = (
        tuple(parse_card(c) for c in ["B3", "R1", "R4", "W5", "B3"]),
        tuple(parse_card(c) for c in ["R5", "G1", "Y3", "B2", "G3"]),
    )
    three = CardKnowledge(ranks=frozenset({3}), hinted_rank=3)
    one = CardKnowledge(ranks=frozenset({1}), hinted_rank=1)
    blue2 = CardKnowledge(frozenset({Color.B}), frozenset({2}), Color.B, 2)
    base = new_game(GameConfig(n_players=2, seed=0))
    return replace(
        base,
        deck=(),
        hands=hands,
        knowledge=(
            (three, one, UNKNOWN, UNKNOWN, UNKNOWN),
            (UNKNOWN, UNKNOWN, three, blue2, UNKNOWN),
        ),
        fireworks=(2, 4, 2, 3, 1),
        discards=discards,
        info_tokens=1,
        life_tokens=3,
        turn_index=40,
        current_player=1,
        final_countdown=1,
    )


def final_state(config, moves):
    return replay(config, moves)[-1]

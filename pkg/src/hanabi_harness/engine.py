"""Deterministic Hanabi state machine.

States are immutable; :func:`apply_move` returns a fresh state. The deal uses
a SplitMix64 stream driving a Fisher-Yates shuffle so a seed maps to the same
deck on every platform and Python version.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence, Union

from . import beliefs
from .beliefs import UNKNOWN, CardKnowledge
from .cards import COLORS, DECK_SIZE, MAX_SCORE, RANKS, Card, Color, canonical_deck, parse_card

PRNG_NAME = "splitmix64-fisher-yates-v1"
_MASK = (1 << 64) - 1


class ConfigError(ValueError):
    pass


class IllegalMoveError(ValueError):
    pass


class NoLegalMovesError(RuntimeError):
    pass


class SplitMix64:
    """Small, fully specified 64-bit generator used only for dealing."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        limit = ((1 << 64) // n) * n
        while True:
            v = self.next()
            if v < limit:
                return v % n


def shuffled_deck(seed: int) -> list[Card]:
    deck = canonical_deck()
    rng = SplitMix64(seed)
    for i in range(len(deck) - 1, 0, -1):
        j = rng.below(i + 1)
        deck[i], deck[j] = deck[j], deck[i]
    return deck


# ---------------------------------------------------------------------------
# Configuration and value types
# ---------------------------------------------------------------------------

class BombOutScoring(str, Enum):
    AT_FAILURE = "AtFailure"
    ZERO = "Zero"


class TerminalReason(str, Enum):
    PERFECT = "Perfect"
    DECK_EXHAUSTED = "DeckExhausted"
    LIVES_EXHAUSTED = "LivesExhausted"


@dataclass(frozen=True)
class TerminalStatus:
    reason: TerminalReason
    final_score: int


def hand_size_for(n_players: int) -> int:
    return 5 if n_players <= 3 else 4


@dataclass(frozen=True)
class GameConfig:
    n_players: int = 2
    seed: int = 0
    score_on_bombout: BombOutScoring = BombOutScoring.AT_FAILURE
    five_restores_token: bool = True
    max_info_tokens: int = 8
    max_life_tokens: int = 3
    # Explicit deal order (deal first, then draws); bypasses the shuffle.
    # Used to pin fixture positions.
    deck_order: tuple[Card, ...] | None = None
    # "by_kind": every color reveal (by offset) before any rank reveal, as in
    # the 5-player transcripts. "by_target": colors then ranks per offset.
    reveal_order: str = "by_kind"
    # Seat that takes the first turn; the deal itself always starts at seat 0.
    first_player: int = 0

    def __post_init__(self):
        if not isinstance(self.n_players, int) or not 2 <= self.n_players <= 5:
            raise ConfigError(f"n_players must be in 2..5, got {self.n_players!r}")
        if not 0 <= self.seed <= _MASK:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "score_on_bombout", BombOutScoring(self.score_on_bombout))
        if not 0 <= self.first_player < self.n_players:
            raise ConfigError(f"first_player must be a seat in 0..{self.n_players - 1}")
        if self.reveal_order not in ("by_kind", "by_target"):
            raise ConfigError(f"unknown reveal_order {self.reveal_order!r}")
        if self.deck_order is not None:
            order = tuple(parse_card(c) if isinstance(c, str) else c for c in self.deck_order)
            if sorted(order) != sorted(canonical_deck()):
                raise ConfigError("deck_order must be a permutation of the 50-card deck")
            object.__setattr__(self, "deck_order", order)

    @property
    def hand_size(self) -> int:
        return hand_size_for(self.n_players)

    def to_dict(self) -> dict:
        d = {
            "n_players": self.n_players,
            "seed": self.seed,
            "score_on_bombout": self.score_on_bombout.value,
            "five_restores_token": self.five_restores_token,
            "max_info_tokens": self.max_info_tokens,
            "max_life_tokens": self.max_life_tokens,
            "hand_size": self.hand_size,
            "prng": PRNG_NAME,
        }
        if self.deck_order is not None:
            d["deck_order"] = [str(c) for c in self.deck_order]
        if self.reveal_order != "by_kind":
            d["reveal_order"] = self.reveal_order
        if self.first_player:
            d["first_player"] = self.first_player
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        return cls(
            n_players=d["n_players"],
            seed=d.get("seed", 0),
            score_on_bombout=BombOutScoring(d.get("score_on_bombout", "AtFailure")),
            five_restores_token=d.get("five_restores_token", True),
            max_info_tokens=d.get("max_info_tokens", 8),
            max_life_tokens=d.get("max_life_tokens", 3),
            deck_order=tuple(d["deck_order"]) if d.get("deck_order") else None,
            reveal_order=d.get("reveal_order", "by_kind"),
            first_player=d.get("first_player", 0),
        )


@dataclass(frozen=True)
class Play:
    slot: int


@dataclass(frozen=True)
class Discard:
    slot: int


@dataclass(frozen=True)
class RevealColor:
    offset: int
    color: Color


@dataclass(frozen=True)
class RevealRank:
    offset: int
    rank: int


Move = Union[Play, Discard, RevealColor, RevealRank]


def describe(move: Move) -> str:
    """Action text in the ``(Play 0)`` / ``(Reveal player +1 color R)`` style."""
    if isinstance(move, Play):
        return f"(Play {move.slot})"
    if isinstance(move, Discard):
        return f"(Discard {move.slot})"
    if isinstance(move, RevealColor):
        return f"(Reveal player +{move.offset} color {move.color.value})"
    return f"(Reveal player +{move.offset} rank {move.rank})"


def describe_absolute(move: Move, actor: int, n_players: int) -> str:
    """Like :func:`describe` but naming the clue target by absolute seat."""
    if isinstance(move, RevealColor):
        return f"(Reveal player P{(actor + move.offset) % n_players} color {move.color.value})"
    if isinstance(move, RevealRank):
        return f"(Reveal player P{(actor + move.offset) % n_players} rank {move.rank})"
    return describe(move)


def move_to_dict(move: Move) -> dict:
    if isinstance(move, Play):
        return {"type": "Play", "slot": move.slot}
    if isinstance(move, Discard):
        return {"type": "Discard", "slot": move.slot}
    if isinstance(move, RevealColor):
        return {"type": "RevealColor", "offset": move.offset, "color": move.color.value}
    return {"type": "RevealRank", "offset": move.offset, "rank": move.rank}


def move_from_dict(d: dict) -> Move:
    kind = d["type"]
    if kind == "Play":
        return Play(d["slot"])
    if kind == "Discard":
        return Discard(d["slot"])
    if kind == "RevealColor":
        return RevealColor(d["offset"], Color(d["color"]))
    if kind == "RevealRank":
        return RevealRank(d["offset"], d["rank"])
    raise ValueError(f"unknown move type {kind!r}")


@dataclass(frozen=True)
class MoveOutcome:
    player: int
    move: Move
    card: Card | None = None          # card played or discarded
    scored: bool | None = None        # plays only
    touched: tuple[int, ...] = ()     # reveals only
    drew: Card | None = None
    info_before: int = 0
    info_after: int = 0
    lives_before: int = 0
    lives_after: int = 0
    fireworks_before: tuple[int, ...] = ()
    fireworks_after: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "move": describe(self.move),
            "card": str(self.card) if self.card else None,
            "scored": self.scored,
            "touched": list(self.touched),
            "drew": self.drew is not None,
            "info_before": self.info_before,
            "info_after": self.info_after,
            "lives_before": self.lives_before,
            "lives_after": self.lives_after,
            "fireworks_before": fireworks_text(self.fireworks_before),
            "fireworks_after": fireworks_text(self.fireworks_after),
        }


def fireworks_text(fireworks: Sequence[int], sep: str = " ") -> str:
    """``R2 Y4 G2 W3 B1``."""
    return sep.join(f"{c.value}{h}" for c, h in zip(COLORS, fireworks))


@dataclass(frozen=True)
class GameState:
    config: GameConfig
    deck: tuple[Card, ...]
    hands: tuple[tuple[Card, ...], ...]
    knowledge: tuple[tuple[CardKnowledge, ...], ...]
    fireworks: tuple[int, ...] = (0, 0, 0, 0, 0)
    discards: tuple[Card, ...] = ()
    info_tokens: int = 8
    life_tokens: int = 3
    turn_index: int = 0
    current_player: int = 0
    final_countdown: int | None = None
    terminal: TerminalStatus | None = field(default=None)

    @property
    def n_players(self) -> int:
        return self.config.n_players

    @property
    def explicit_hints(self) -> tuple[tuple[tuple[Color | None, int | None], ...], ...]:
        return tuple(
            tuple((k.hinted_color, k.hinted_rank) for k in hand) for hand in self.knowledge
        )

    def firework(self, color: Color) -> int:
        return self.fireworks[color.index]

    def player_at(self, viewer: int, offset: int) -> int:
        return (viewer + offset) % self.config.n_players


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def new_game(config: GameConfig) -> GameState:
    deck = list(config.deck_order) if config.deck_order is not None else shuffled_deck(config.seed)
    n, h = config.n_players, config.hand_size
    hands: list[list[Card]] = [[] for _ in range(n)]
    pos = 0
    for _ in range(h):
        for p in range(n):
            hands[p].append(deck[pos])
            pos += 1
    return GameState(
        config=config,
        deck=tuple(deck[pos:]),
        hands=tuple(tuple(hand) for hand in hands),
        knowledge=tuple((UNKNOWN,) * h for _ in range(n)),
        info_tokens=config.max_info_tokens,
        life_tokens=config.max_life_tokens,
        current_player=config.first_player,
    )


def score(state: GameState) -> int:
    return sum(state.fireworks)


def is_terminal(state: GameState) -> TerminalStatus | None:
    return state.terminal


def _terminal_status(state: GameState) -> TerminalStatus | None:
    total = sum(state.fireworks)
    if state.life_tokens <= 0:
        final = total if state.config.score_on_bombout is BombOutScoring.AT_FAILURE else 0
        return TerminalStatus(TerminalReason.LIVES_EXHAUSTED, final)
    if total == MAX_SCORE:
        return TerminalStatus(TerminalReason.PERFECT, total)
    if state.final_countdown is not None and state.final_countdown <= 0:
        return TerminalStatus(TerminalReason.DECK_EXHAUSTED, total)
    return None


def is_legal(state: GameState, move: Move) -> bool:
    if state.terminal is not None:
        return False
    hand = state.hands[state.current_player]
    if isinstance(move, Play):
        return 0 <= move.slot < len(hand)
    if isinstance(move, Discard):
        return 0 <= move.slot < len(hand) and state.info_tokens < state.config.max_info_tokens
    if isinstance(move, (RevealColor, RevealRank)):
        if state.info_tokens <= 0 or not 1 <= move.offset < state.n_players:
            return False
        target = state.hands[state.player_at(state.current_player, move.offset)]
        if isinstance(move, RevealColor):
            return any(c.color == move.color for c in target)
        return any(c.rank == move.rank for c in target)
    return False


def legal_moves(state: GameState) -> list[tuple[int, Move]]:
    """Legal moves in the canonical listing order.

    Discards, then plays, then reveals. By default every color reveal comes
    first (offset ascending, colors R, Y, G, W, B), then every rank reveal
    (offset ascending, ranks ascending); only values present in the target's
    hand are listed.
    """
    if state.terminal is not None:
        raise NoLegalMovesError("game is over")
    me = state.current_player
    n = state.config.n_players
    hand_len = len(state.hands[me])
    moves: list[Move] = []
    if state.info_tokens < state.config.max_info_tokens:
        moves += _DISCARDS[:hand_len]
    moves += _PLAYS[:hand_len]
    if state.info_tokens > 0:
        colors, ranks = [], []
        for offset in range(1, n):
            target = state.hands[(me + offset) % n]
            present_c = {c.color for c in target}
            present_r = {c.rank for c in target}
            colors.append([_REVEAL_COLOR[offset][c] for c in COLORS if c in present_c])
            ranks.append([_REVEAL_RANK[offset][r] for r in RANKS if r in present_r])
        if state.config.reveal_order == "by_kind":
            for group in colors + ranks:
                moves += group
        else:
            for cgroup, rgroup in zip(colors, ranks):
                moves += cgroup + rgroup
    return list(enumerate(moves))


# Moves are immutable, so legal_moves hands out shared instances.
_DISCARDS = [Discard(i) for i in range(5)]
_PLAYS = [Play(i) for i in range(5)]
_REVEAL_COLOR = [{c: RevealColor(o, c) for c in COLORS} for o in range(5)]
_REVEAL_RANK = [{r: RevealRank(o, r) for r in RANKS} for o in range(5)]


def move_universe(state: GameState) -> list[Move]:
    """Every syntactically possible move for the acting seat, legal or not."""
    slots = range(max(len(h) for h in state.hands) + 1)
    out: list[Move] = [Discard(i) for i in slots] + [Play(i) for i in slots]
    for offset in range(0, state.n_players + 1):
        out.extend(RevealColor(offset, c) for c in COLORS)
        out.extend(RevealRank(offset, r) for r in RANKS)
    return out


def apply_move(state: GameState, move: Move) -> tuple[GameState, MoveOutcome]:
    if not is_legal(state, move):
        raise IllegalMoveError(f"{describe(move)} is not legal here")
    cfg = state.config
    me = state.current_player
    hands = list(state.hands)
    knowledge = list(state.knowledge)
    fireworks = list(state.fireworks)
    discards = state.discards
    deck = state.deck
    info, lives = state.info_tokens, state.life_tokens
    countdown = state.final_countdown
    card = drew = None
    scored = None
    touched: tuple[int, ...] = ()

    if isinstance(move, (Play, Discard)):
        hand = hands[me]
        card = hand[move.slot]
        if isinstance(move, Play):
            ci = card.color.index
            if fireworks[ci] == card.rank - 1:
                fireworks[ci] += 1
                scored = True
                if card.rank == 5 and cfg.five_restores_token:
                    info = min(cfg.max_info_tokens, info + 1)
            else:
                scored = False
                lives -= 1
                discards = discards + (card,)
        else:
            discards = discards + (card,)
            info = min(cfg.max_info_tokens, info + 1)
        new_hand = hand[:move.slot] + hand[move.slot + 1:]
        if deck:
            drew = deck[0]
            deck = deck[1:]
            new_hand = new_hand + (drew,)
        hands[me] = new_hand
        knowledge[me] = tuple(beliefs.shift_on_removal(knowledge[me], move.slot, drew is not None))
        if drew is not None and not deck:
            countdown = cfg.n_players + 1  # decremented below: the drawing move does not count
    else:
        target = (me + move.offset) % cfg.n_players
        if isinstance(move, RevealColor):
            clue = move.color
            touched = tuple(i for i, c in enumerate(hands[target]) if c.color == clue)
        else:
            clue = move.rank
            touched = tuple(i for i, c in enumerate(hands[target]) if c.rank == clue)
        knowledge[target] = tuple(beliefs.apply_clue(knowledge[target], touched, clue))
        info -= 1

    if countdown is not None:
        countdown -= 1

    nxt = GameState(
        config=cfg,
        deck=deck,
        hands=tuple(hands),
        knowledge=tuple(knowledge),
        fireworks=tuple(fireworks),
        discards=discards,
        info_tokens=info,
        life_tokens=lives,
        turn_index=state.turn_index + 1,
        current_player=(me + 1) % cfg.n_players,
        final_countdown=countdown,
    )
    status = _terminal_status(nxt)
    if status is not None:
        nxt = replace(nxt, terminal=status)
    outcome = MoveOutcome(
        player=me,
        move=move,
        card=card,
        scored=scored,
        touched=touched,
        drew=drew,
        info_before=state.info_tokens,
        info_after=info,
        lives_before=state.life_tokens,
        lives_after=lives,
        fireworks_before=state.fireworks,
        fireworks_after=nxt.fireworks,
    )
    return nxt, outcome


def replay(config: GameConfig, moves: Sequence[Move]) -> list[GameState]:
    """States visited by a move sequence, starting from the deal."""
    states = [new_game(config)]
    for move in moves:
        states.append(apply_move(states[-1], move)[0])
    return states


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------

def state_to_dict(state: GameState) -> dict:
    term = state.terminal
    return {
        "config": state.config.to_dict(),
        "deck": [str(c) for c in state.deck],
        "hands": [[str(c) for c in hand] for hand in state.hands],
        "knowledge": [
            [beliefs.format_knowledge(k) for k in hand] for hand in state.knowledge
        ],
        "explicit_hints": [
            [
                {"color": k.hinted_color.value if k.hinted_color else None, "rank": k.hinted_rank}
                for k in hand
            ]
            for hand in state.knowledge
        ],
        "fireworks": {c.value: h for c, h in zip(COLORS, state.fireworks)},
        "discards": [str(c) for c in state.discards],
        "info_tokens": state.info_tokens,
        "life_tokens": state.life_tokens,
        "turn_index": state.turn_index,
        "current_player": state.current_player,
        "final_countdown": state.final_countdown,
        "terminal": None if term is None else {
            "reason": term.reason.value, "final_score": term.final_score,
        },
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def state_hash(state: GameState) -> str:
    return hashlib.sha256(canonical_json(state_to_dict(state)).encode()).hexdigest()


def card_total(state: GameState) -> int:
    """Cards accounted for across every zone; always 50 for a valid state."""
    return len(state.deck) + sum(map(len, state.hands)) + sum(state.fireworks) + len(state.discards)


assert DECK_SIZE == 50

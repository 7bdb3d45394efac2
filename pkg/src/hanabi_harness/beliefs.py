"""Clue-driven possibility sets and the probability calculus over unseen cards.

Possibility sets are pruned by clues only (positive and negative information).
Visible cards, fireworks and discards enter through :func:`remaining_counts`
when a probability is requested.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence, Union

from .cards import (
    ALL_CARD_TYPES,
    COLOR_INDEX,
    COLORS,
    MULTIPLICITY,
    RANKS,
    Card,
    Color,
)

if TYPE_CHECKING:
    from .engine import GameState

Clue = Union[Color, int]

FULL_COLORS = frozenset(COLORS)
FULL_RANKS = frozenset(RANKS)


class IllegalClueError(ValueError):
    """A clue that touches no card."""


class ContradictionError(ValueError):
    """No card consistent with the knowledge has positive remaining count."""


@dataclass(frozen=True, slots=True)
class CardKnowledge:
    colors: frozenset = FULL_COLORS
    ranks: frozenset = FULL_RANKS
    hinted_color: Color | None = None
    hinted_rank: int | None = None

    def __post_init__(self):
        if not self.colors or not self.ranks:
            raise ValueError("possibility sets must be non-empty")
        if self.hinted_color is not None and self.colors != {self.hinted_color}:
            raise ValueError("hinted color must pin the color set")
        if self.hinted_rank is not None and self.ranks != {self.hinted_rank}:
            raise ValueError("hinted rank must pin the rank set")

    def admits(self, card: Card) -> bool:
        return card.color in self.colors and card.rank in self.ranks

    @property
    def is_unknown(self) -> bool:
        return self.colors == FULL_COLORS and self.ranks == FULL_RANKS

    def sorted_colors(self) -> list[Color]:
        return sorted(self.colors, key=COLOR_INDEX.__getitem__)

    def sorted_ranks(self) -> list[int]:
        return sorted(self.ranks)


UNKNOWN = CardKnowledge()


def _touch(k: CardKnowledge, clue: Clue) -> CardKnowledge:
    if isinstance(clue, Color):
        return CardKnowledge(frozenset((clue,)), k.ranks, clue, k.hinted_rank)
    return CardKnowledge(k.colors, frozenset((clue,)), k.hinted_color, clue)


def _exclude(k: CardKnowledge, clue: Clue) -> CardKnowledge:
    if isinstance(clue, Color):
        if clue not in k.colors:
            return k
        return CardKnowledge(k.colors - {clue}, k.ranks, k.hinted_color, k.hinted_rank)
    if clue not in k.ranks:
        return k
    return CardKnowledge(k.colors, k.ranks - {clue}, k.hinted_color, k.hinted_rank)


def apply_clue(
    hand: Sequence[CardKnowledge], touched: Iterable[int], clue: Clue
) -> list[CardKnowledge]:
    """Collapse touched slots to the clued value and strike it from the rest."""
    touched = set(touched)
    if not touched:
        raise IllegalClueError("a clue must touch at least one card")
    if not all(0 <= s < len(hand) for s in touched):
        raise IndexError(f"touched slots {sorted(touched)} outside hand of {len(hand)}")
    if not isinstance(clue, Color) and clue not in FULL_RANKS:
        raise ValueError(f"not a color or rank: {clue!r}")
    return [_touch(k, clue) if i in touched else _exclude(k, clue) for i, k in enumerate(hand)]


def shift_on_removal(
    hand: Sequence[CardKnowledge], slot: int, drew_new: bool
) -> list[CardKnowledge]:
    if not 0 <= slot < len(hand):
        raise IndexError(f"slot {slot} outside hand of {len(hand)}")
    out = list(hand[:slot]) + list(hand[slot + 1:])
    if drew_new:
        out.append(UNKNOWN)
    return out


# ---------------------------------------------------------------------------
# Counting and probabilities
# ---------------------------------------------------------------------------

def full_counts() -> dict[Card, int]:
    return {card: MULTIPLICITY[card.rank] for card in ALL_CARD_TYPES}


def subtract_seen(full: Mapping[Card, int], seen: Iterable[Card]) -> dict[Card, int]:
    """``full`` multiplicities minus every card in ``seen``; never negative."""
    counts = dict(full)
    for card in seen:
        counts[card] = counts.get(card, 0) - 1
    if any(v < 0 for v in counts.values()):
        raise ContradictionError("card accounting went negative")
    return counts


def remaining_counts(state: "GameState", viewer: int) -> dict[Card, int]:
    """Copies of each card type the viewer cannot locate.

    Subtracts teammates' hands, played fireworks and the discard pile; the
    viewer's own hand stays in the unseen pool.
    """
    seen = [card for p, hand in enumerate(state.hands) if p != viewer for card in hand]
    seen += [Card(color, rank) for color, h in zip(COLORS, state.fireworks) for rank in range(1, h + 1)]
    seen += state.discards
    return subtract_seen(full_counts(), seen)


def card_probability(
    k: CardKnowledge, counts: Mapping[Card, int]
) -> dict[Card, Fraction]:
    mass = {card: n for card, n in counts.items() if n > 0 and k.admits(card)}
    total = sum(mass.values())
    if total == 0:
        raise ContradictionError(f"no unseen card is consistent with {k}")
    return {card: Fraction(n, total) for card, n in mass.items()}


def _height(fireworks, color: Color) -> int:
    if isinstance(fireworks, Mapping):
        return fireworks[color]
    return fireworks[COLOR_INDEX[color]]


def playability_probability(dist: Mapping[Card, Fraction | float], fireworks) -> Fraction | float:
    """Probability mass on cards that extend their stack right now.

    ``fireworks`` may be a per-color mapping or a sequence in R, Y, G, W, B order.
    """
    return sum(
        (p for card, p in dist.items() if card.rank == _height(fireworks, card.color) + 1),
        Fraction(0),
    )


def dead_card_types(fireworks, discards: Iterable[Card]) -> set[Card]:
    """Card types that can never be played again."""
    discarded = Counter(discards)
    dead = set()
    for color in COLORS:
        height = _height(fireworks, color)
        blocked = False
        for rank in RANKS:
            card = Card(color, rank)
            if rank <= height or blocked:
                dead.add(card)
            elif discarded[card] >= MULTIPLICITY[rank]:
                # every copy gone: this rank and everything above is unreachable
                dead.add(card)
                blocked = True
    return dead


def format_probability(p: Fraction | float) -> str:
    """Three significant digits, the style used inside prompts."""
    return f"{float(p):.3g}"


# ---------------------------------------------------------------------------
# Deduction blocks and their text forms
# ---------------------------------------------------------------------------

DeductionBlock = dict[str, list[CardKnowledge]]


def relative_key(offset: int) -> str:
    return "you" if offset == 0 else f"player+{offset}"


def relative_keys(n_players: int) -> list[str]:
    return [relative_key(o) for o in range(n_players)]


def key_offset(key: str) -> int:
    if key == "you":
        return 0
    m = re.fullmatch(r"player\s*\+\s*(\d+)", key.strip().lower())
    if not m:
        raise KeyError(f"not a relative player key: {key!r}")
    return int(m.group(1))


def _join(values) -> str:
    return ", ".join(str(v) for v in values)


def format_knowledge(k: CardKnowledge, style: str = "compact") -> str:
    """Render one card's knowledge.

    ``compact`` matches the working-memory examples
    (``"color could be R, Y; rank is 2"``); ``verbose`` spells colors out and
    adds the complementary ``cannot be`` clauses.
    """
    if style not in ("compact", "verbose"):
        raise ValueError(f"unknown style {style!r}")
    verbose = style == "verbose"

    def cname(c: Color) -> str:
        return c.full_name if verbose else c.value

    parts = []
    if k.hinted_color is not None:
        parts.append(f"color is {cname(k.hinted_color)}")
    else:
        parts.append(f"color could be {_join(cname(c) for c in k.sorted_colors())}")
        missing = [c for c in COLORS if c not in k.colors]
        if verbose and missing:
            parts.append(f"color cannot be {_join(cname(c) for c in missing)}")
    if k.hinted_rank is not None:
        parts.append(f"rank is {k.hinted_rank}")
    else:
        parts.append(f"rank could be {_join(k.sorted_ranks())}")
        missing_r = [r for r in RANKS if r not in k.ranks]
        if verbose and missing_r:
            parts.append(f"rank cannot be {_join(missing_r)}")
    return "; ".join(parts)


_COLOR_WORDS = {
    "red": Color.R, "yellow": Color.Y, "green": Color.G, "white": Color.W, "blue": Color.B,
    "r": Color.R, "y": Color.Y, "g": Color.G, "w": Color.W, "b": Color.B,
}
_NEGATION = re.compile(r"\b(cannot|can't|can not|not|isn't|is not|never)\b")
_POSSIBLE = re.compile(r"\b(could|can|may|might|possibly|either|one of)\b")


def _clause_values(text: str, subject: str) -> tuple[list, int]:
    """Values named in a clause body and the offset of the first one."""
    if subject == "color":
        hits = [(m.start(), _COLOR_WORDS[m.group(0)])
                for m in re.finditer(r"[a-z]+", text) if m.group(0) in _COLOR_WORDS]
    else:
        hits = [(m.start(), int(m.group(1))) for m in re.finditer(r"\b([1-5])\b", text)]
    if not hits:
        return [], -1
    return [v for _, v in hits], hits[0][0]


def parse_knowledge(text: str) -> CardKnowledge:
    """Leniently parse a card description written by an agent or the oracle.

    Anything unrecognised leaves that dimension fully unknown.
    """
    sets = {"color": set(FULL_COLORS), "rank": set(FULL_RANKS)}
    hinted = {"color": None, "rank": None}
    lowered = text.lower().replace("colour", "color")
    for clause in re.split(r";|\.\s|,\s*(?=(?:color|rank)\b)", lowered):
        clause = clause.strip()
        if clause in ("unknown", ""):
            continue
        for subject in ("color", "rank"):
            if not clause.startswith(subject) and f" {subject}" not in f" {clause}":
                continue
            body = clause.split(subject, 1)[1]
            values, first = _clause_values(body, subject)
            if not values:
                continue
            if _NEGATION.search(body[:first]):
                sets[subject] -= set(values)
            elif _POSSIBLE.search(body[:first]) or len(values) > 1:
                sets[subject] &= set(values)
            else:
                sets[subject] = {values[0]}
                hinted[subject] = values[0]
    colors = frozenset(sets["color"]) or FULL_COLORS
    ranks = frozenset(sets["rank"]) or FULL_RANKS
    hc = hinted["color"] if colors == {hinted["color"]} else None
    hr = hinted["rank"] if ranks == {hinted["rank"]} else None
    return CardKnowledge(colors, ranks, hc, hr)


def block_to_dict(block: Mapping[str, Sequence[CardKnowledge]], style: str = "compact") -> dict:
    return {
        key: {f"card{i}": format_knowledge(k, style) for i, k in enumerate(cards)}
        for key, cards in block.items()
    }


def _card_sort_key(name: str) -> int:
    m = re.search(r"(\d+)", name)
    return int(m.group(1)) if m else 0


def block_from_dict(data: Mapping) -> DeductionBlock:
    """Parse the JSON shape of a deduction block; unknown keys are rejected."""
    block: DeductionBlock = {}
    for key, cards in data.items():
        norm = relative_key(key_offset(key))
        if isinstance(cards, Mapping):
            items = sorted(cards.items(), key=lambda kv: _card_sort_key(kv[0]))
            block[norm] = [parse_knowledge(str(v)) for _, v in items]
        else:
            block[norm] = [parse_knowledge(str(v)) for v in cards]
    return canonical_order(block)


def canonical_order(block: Mapping[str, Sequence[CardKnowledge]]) -> DeductionBlock:
    """Order keys as you, player+1, player+2, ..."""
    return {k: list(block[k]) for k in sorted(block, key=key_offset)}


def viewer_block(state: "GameState", viewer: int) -> DeductionBlock:
    """Every hand's clue-derived knowledge keyed relative to ``viewer``."""
    n = state.config.n_players
    return {
        relative_key(o): list(state.knowledge[(viewer + o) % n]) for o in range(n)
    }

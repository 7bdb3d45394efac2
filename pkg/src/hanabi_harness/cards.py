"""Card primitives shared by every other module."""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple


class Color(str, Enum):
    R = "R"
    Y = "Y"
    G = "G"
    W = "W"
    B = "B"

    @property
    def full_name(self) -> str:
        return COLOR_NAMES[self]

    @property
    def index(self) -> int:
        return COLOR_INDEX[self]


COLORS: tuple[Color, ...] = (Color.R, Color.Y, Color.G, Color.W, Color.B)
COLOR_INDEX = {c: i for i, c in enumerate(COLORS)}
COLOR_NAMES = {
    Color.R: "Red",
    Color.Y: "Yellow",
    Color.G: "Green",
    Color.W: "White",
    Color.B: "Blue",
}
RANKS: tuple[int, ...] = (1, 2, 3, 4, 5)
MULTIPLICITY = {1: 3, 2: 2, 3: 2, 4: 2, 5: 1}
DECK_SIZE = 50
MAX_SCORE = 25


class Card(NamedTuple):
    color: Color
    rank: int

    def __str__(self) -> str:
        return f"{self.color.value}{self.rank}"

    @property
    def long_name(self) -> str:
        return f"{self.color.full_name} {self.rank}"


def parse_card(text: str) -> Card:
    """Parse a two-character card string such as ``"Y5"``."""
    text = text.strip()
    if len(text) != 2 or text[1] not in "12345":
        raise ValueError(f"not a card: {text!r}")
    return Card(Color(text[0].upper()), int(text[1]))


def canonical_deck() -> list[Card]:
    """The 50-card multiset in canonical order: colors R..B, ranks ascending."""
    return [Card(c, r) for c in COLORS for r in RANKS for _ in range(MULTIPLICITY[r])]


ALL_CARD_TYPES: tuple[Card, ...] = tuple(Card(c, r) for c in COLORS for r in RANKS)

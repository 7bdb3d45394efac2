"""Hanabi simulator plus an LLM evaluation harness."""

from .cards import Card, Color
from .engine import (
    Discard,
    GameConfig,
    GameState,
    Play,
    RevealColor,
    RevealRank,
    apply_move,
    legal_moves,
    new_game,
    score,
)

__all__ = [
    "Card", "Color", "Discard", "GameConfig", "GameState", "Play", "RevealColor",
    "RevealRank", "apply_move", "legal_moves", "new_game", "score",
]
__version__ = "0.1.0"

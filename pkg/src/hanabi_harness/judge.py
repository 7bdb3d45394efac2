"""State-tracking evaluation for the working-memory scaffold.

Three pieces: a ground-truth deduction oracle replayed from the move
history, a deterministic structural scorer, and the builder/parser for the
LLM-judge prompt. Structural scores are labelled as such in every output.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

from . import beliefs
from .beliefs import CardKnowledge, DeductionBlock, key_offset, relative_key
from .engine import (
    Discard,
    GameConfig,
    GameState,
    Move,
    MoveOutcome,
    Play,
    RevealColor,
    apply_move,
    describe,
    fireworks_text,
    new_game,
)
from .scaffold import ScaffoldKind, extract_json_object, sherlock_state_text
from .scaffold.render import actions_since_last_turn
from .scaffold.templates import fill

SCORE_FIELDS = ("overall_rating", "deduction_accuracy", "history_integration", "state_tracking_quality")


class RosterMismatch(ValueError):
    pass


class JudgeParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

def oracle_knowledge(
    config: GameConfig, moves: Sequence[Move], initial: GameState | None = None
) -> list[list[CardKnowledge]]:
    """Absolute per-seat knowledge after ``moves``, tracked independently of the engine.

    The engine only supplies true hands (to know which slots a clue touches)
    and whether a draw happened. ``initial`` starts from a hand-built
    position, taking its knowledge as the starting point.
    """
    state = new_game(config) if initial is None else initial
    n = config.n_players
    if initial is None:
        know = [[beliefs.UNKNOWN] * config.hand_size for _ in range(n)]
    else:
        know = [list(hand) for hand in initial.knowledge]
    for move in moves:
        me = state.current_player
        if isinstance(move, (Play, Discard)):
            deck_before = len(state.deck)
            state, _ = apply_move(state, move)
            know[me] = beliefs.shift_on_removal(know[me], move.slot, deck_before > 0)
        else:
            target = (me + move.offset) % n
            hand = state.hands[target]
            if isinstance(move, RevealColor):
                clue = move.color
                touched = [i for i, c in enumerate(hand) if c.color == clue]
            else:
                clue = move.rank
                touched = [i for i, c in enumerate(hand) if c.rank == clue]
            know[target] = beliefs.apply_clue(know[target], touched, clue)
            state, _ = apply_move(state, move)
    return know


def oracle_deduction(
    config: GameConfig, moves: Sequence[Move], viewer: int, initial: GameState | None = None
) -> DeductionBlock:
    """Correct deduction block for ``viewer`` after ``moves``, keyed you, player+1, ..."""
    know = oracle_knowledge(config, moves, initial)
    n = config.n_players
    return {relative_key(o): list(know[(viewer + o) % n]) for o in range(n)}


def seat_ordered(block: Mapping[str, Sequence[CardKnowledge]], viewer: int, n_players: int) -> DeductionBlock:
    """Re-key order so seats appear P0, P1, ... (the layout of the judge transcripts)."""
    keys = sorted(block, key=lambda k: (viewer + key_offset(k)) % n_players)
    return {k: list(block[k]) for k in keys}


def oracle_json(block: Mapping[str, Sequence[CardKnowledge]], viewer: int, n_players: int) -> str:
    """The serialization shown to the judge: verbose strings, seat order, 2-space indent."""
    ordered = seat_ordered(block, viewer, n_players)
    return json.dumps(beliefs.block_to_dict(ordered, "verbose"), indent=2)


# ---------------------------------------------------------------------------
# Structural scorer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateTrackingScores:
    overall_rating: float
    deduction_accuracy: float
    history_integration: float
    state_tracking_quality: float
    detailed_feedback: str = ""
    key_issues: tuple[str, ...] = ()
    strengths: tuple[str, ...] = ()
    source: str = "structural"

    def __post_init__(self):
        for name in SCORE_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["key_issues"] = list(self.key_issues)
        d["strengths"] = list(self.strengths)
        return d


def _jaccard(a: frozenset, b: frozenset) -> float:
    return len(a & b) / len(a | b)


def card_similarity(pred: CardKnowledge, true: CardKnowledge) -> float:
    return (_jaccard(pred.colors, true.colors) + _jaccard(pred.ranks, true.ranks)) / 2


def invents_constraint(pred: CardKnowledge, true: CardKnowledge) -> bool:
    """True when the prediction rules out something the oracle still allows."""
    return not (pred.colors >= true.colors and pred.ranks >= true.ranks)


def changed_cards(previous: Mapping[str, Sequence[CardKnowledge]] | None,
                  current: Mapping[str, Sequence[CardKnowledge]]) -> set[tuple[str, int]]:
    """Positions whose correct knowledge differs from the previous oracle."""
    if previous is None:
        return {(k, i) for k, cards in current.items() for i in range(len(cards))}
    out = set()
    for key, cards in current.items():
        before = previous.get(key, [])
        for i, k in enumerate(cards):
            if i >= len(before) or before[i] != k:
                out.add((key, i))
    return out


def score_deduction(
    predicted: Mapping[str, Sequence[CardKnowledge]],
    oracle: Mapping[str, Sequence[CardKnowledge]],
    changed: set[tuple[str, int]] | None = None,
) -> StateTrackingScores:
    """Compare a predicted block to the oracle.

    deduction_accuracy is the mean per-card Jaccard similarity (colors and
    ranks averaged). history_integration is the same mean over ``changed``
    positions, falling back to deduction_accuracy when nothing changed.
    state_tracking_quality is the fraction of cards with no invented
    constraint. overall_rating is the unweighted mean of the three.
    """
    if set(predicted) != set(oracle):
        raise RosterMismatch(f"predicted keys {sorted(predicted)} vs oracle keys {sorted(oracle)}")
    sims: dict[tuple[str, int], float] = {}
    clean = 0
    issues: list[str] = []
    for key in beliefs.canonical_order(oracle):
        truth, guess = oracle[key], list(predicted[key])
        if len(guess) != len(truth):
            issues.append(f"{key}: {len(guess)} cards listed, hand has {len(truth)}")
        for i, t in enumerate(truth):
            p = guess[i] if i < len(guess) else beliefs.UNKNOWN
            s = card_similarity(p, t)
            sims[(key, i)] = s
            if invents_constraint(p, t):
                issues.append(f"{key} card{i}: invented constraint ({beliefs.format_knowledge(p)} "
                              f"vs {beliefs.format_knowledge(t)})")
            else:
                clean += 1
                if s < 1:
                    issues.append(f"{key} card{i}: missing information ({beliefs.format_knowledge(p)} "
                                  f"vs {beliefs.format_knowledge(t)})")
    total = len(sims)
    accuracy = sum(sims.values()) / total if total else 1.0
    focus = [sims[c] for c in (changed or set()) if c in sims]
    history = sum(focus) / len(focus) if focus else accuracy
    quality = clean / total if total else 1.0
    overall = (accuracy + history + quality) / 3
    exact = sum(1 for s in sims.values() if s == 1)
    strengths = (f"{exact} of {total} cards match the correct deduction exactly",) if exact else ()
    return StateTrackingScores(
        overall_rating=overall,
        deduction_accuracy=accuracy,
        history_integration=history,
        state_tracking_quality=quality,
        detailed_feedback=(
            "Structural comparison against the replayed oracle: "
            f"{exact}/{total} exact cards, {total - clean} with invented constraints."
        ),
        key_issues=tuple(issues),
        strengths=strengths,
    )


# ---------------------------------------------------------------------------
# LLM judge prompt
# ---------------------------------------------------------------------------

def actions_digest(history: Sequence[MoveOutcome], viewer: int) -> str:
    lines = [
        f"- Player {o.player}: ({describe(o.move)}) | Fireworks: {fireworks_text(o.fireworks_after)} "
        f"| Info tokens: {o.info_after}"
        for o in actions_since_last_turn(history, viewer)
    ]
    return "\n".join(lines) if lines else "- (none)"


def build_judge_prompt(
    state: GameState,
    viewer: int,
    history: Sequence[MoveOutcome],
    model_input: str,
    model_output: str,
    oracle: Mapping[str, Sequence[CardKnowledge]],
) -> str:
    return fill(
        "judge",
        turn=state.turn_index + 1,
        player=viewer,
        state=sherlock_state_text(state, viewer, ScaffoldKind.SHERLOCK),
        actions=actions_digest(history, viewer),
        model_input=model_input,
        model_output=model_output,
        oracle=oracle_json(oracle, viewer, state.n_players),
    )


def parse_judge_response(text: str) -> StateTrackingScores:
    obj = extract_json_object(text)
    if obj is None:
        raise JudgeParseError("no JSON object in judge response")
    values = {}
    for name in SCORE_FIELDS:
        v = obj.get(name)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise JudgeParseError(f"{name} missing or not a number")
        if not 0.0 <= v <= 1.0:
            raise JudgeParseError(f"{name}={v} outside [0, 1]")
        values[name] = float(v)

    def strings(name):
        raw = obj.get(name, [])
        if not isinstance(raw, list):
            raise JudgeParseError(f"{name} must be a list")
        return tuple(str(x) for x in raw)

    return StateTrackingScores(
        **values,
        detailed_feedback=str(obj.get("detailed_feedback", "")),
        key_issues=strings("key_issues"),
        strengths=strings("strengths"),
        source="llm-judge",
    )


# ---------------------------------------------------------------------------
# Whole games
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TurnJudgement:
    game_id: str
    turn_index: int
    player: int
    scores: StateTrackingScores | None
    error: str | None = None
    prompt: str | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = {
            "game_id": self.game_id,
            "turn_index": self.turn_index,
            "player": self.player,
            "scores": self.scores.to_dict() if self.scores else None,
            "error": self.error,
        }
        if self.prompt is not None:
            d["judge_prompt"] = self.prompt
        return d


def judge_record(record, *, with_prompts: bool = False) -> list[TurnJudgement]:
    """Structural scores for every working-memory turn of a GameRecord."""
    out = []
    config = record.config
    n = config.n_players
    state = new_game(config)
    history: list[MoveOutcome] = []
    moves: list[Move] = []
    last_oracle: dict[int, DeductionBlock] = {}
    for t in record.turns:
        if t.scaffold is ScaffoldKind.MYCROFT:
            oracle = oracle_deduction(config, moves, t.player)
            predicted = t.decision.deduction
            if predicted is None:
                out.append(TurnJudgement(record.game_id, t.turn_index, t.player, None,
                                         "no deduction block in response"))
            else:
                try:
                    scores = score_deduction(
                        predicted, oracle, changed_cards(last_oracle.get(t.player), oracle)
                    )
                    err = None
                except RosterMismatch as exc:
                    scores, err = None, str(exc)
                prompt = (
                    build_judge_prompt(state, t.player, history, t.prompt, t.response, oracle)
                    if with_prompts else None
                )
                out.append(TurnJudgement(record.game_id, t.turn_index, t.player, scores, err, prompt))
            last_oracle[t.player] = oracle
        state, outcome = apply_move(state, t.move)
        history.append(outcome)
        moves.append(t.move)
    return out

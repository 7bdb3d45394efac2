"""Game loop, suites, run directories and replay validation."""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from .agents import (
    AgentSpec,
    GameAborted,
    Transport,
    best_of_k,
    decide,
    mixture_of_agents,
    uniform_roster_roles,
)
from .engine import (
    GameConfig,
    GameState,
    IllegalMoveError,
    MoveOutcome,
    apply_move,
    describe,
    is_legal,
    legal_moves,
    move_from_dict,
    move_to_dict,
    new_game,
    score,
    state_hash,
)
from .scaffold import AgentDecision, ScaffoldKind, TurnMemory, mycroft_state_text, render_prompt

SEED_PRESETS = {
    "standard": (1, 2, 3, 5, 7, 11, 13, 17, 19, 23),
    "heldout": (4, 6, 8, 10, 12),
}
DEFAULT_MAX_TURNS = 200
RECORD_SCHEMA = "hanabi-game-record/1"


def resolve_seeds(seeds: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(seeds, str):
        try:
            return SEED_PRESETS[seeds]
        except KeyError:
            raise ValueError(f"unknown seed preset {seeds!r}; known: {sorted(SEED_PRESETS)}") from None
    return tuple(int(s) for s in seeds)


# ---------------------------------------------------------------------------
# Rosters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Roster:
    seats: tuple[AgentSpec, ...]

    @property
    def is_self_play(self) -> bool:
        return len(set(self.seats)) == 1

    def describe(self) -> list[dict]:
        return [a.to_dict() for a in self.seats]


@dataclass(frozen=True)
class RosterTemplate:
    """``primary`` in every seat, except ``singleton`` (if any) at seat 0."""

    primary: AgentSpec
    singleton: AgentSpec | None = None

    def for_players(self, n_players: int) -> Roster:
        seats = [self.primary] * n_players
        if self.singleton is not None:
            seats[0] = self.singleton
        return Roster(tuple(seats))

    def to_dict(self) -> dict:
        d = {"primary": self.primary.to_dict()}
        if self.singleton is not None:
            d["singleton"] = self.singleton.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping, environ=None) -> "RosterTemplate":
        single = d.get("singleton")
        return cls(
            AgentSpec.from_dict(d["primary"], environ),
            AgentSpec.from_dict(single, environ) if single else None,
        )


class PipelineKind(str, Enum):
    SINGLE = "Single"
    BEST_OF_K = "BestOfK"
    MIXTURE = "MixtureOfAgents"


@dataclass(frozen=True)
class Pipeline:
    kind: PipelineKind = PipelineKind.SINGLE
    k: int = 3
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", PipelineKind(self.kind))

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is PipelineKind.BEST_OF_K:
            d.update(k=self.k, strict=self.strict)
        return d

    @classmethod
    def from_dict(cls, d: Mapping | None) -> "Pipeline":
        d = d or {}
        return cls(d.get("kind", "Single"), d.get("k", 3), d.get("strict", False))


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TurnRecord:
    turn_index: int
    player: int
    scaffold: ScaffoldKind
    prompt_user: str
    prompt_system: str | None
    response: str
    decision: AgentDecision
    attempts: int
    move: Any
    legal: tuple[str, ...]
    pre_hash: str
    post_hash: str
    outcome: dict
    fallback_used: bool = False
    calls: tuple[dict, ...] = ()

    @property
    def prompt(self) -> str:
        return f"{self.prompt_system}\n\n{self.prompt_user}" if self.prompt_system else self.prompt_user

    def to_dict(self) -> dict:
        d = {
            "turn_index": self.turn_index,
            "player": self.player,
            "scaffold": self.scaffold.value,
            "prompt_system": self.prompt_system,
            "prompt_user": self.prompt_user,
            "response": self.response,
            "decision": self.decision.to_dict(),
            "attempts": self.attempts,
            "fallback_used": self.fallback_used,
            "move": move_to_dict(self.move),
            "legal": list(self.legal),
            "pre_hash": self.pre_hash,
            "post_hash": self.post_hash,
            "outcome": self.outcome,
        }
        if self.calls:
            d["calls"] = [dict(c) for c in self.calls]
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "TurnRecord":
        return cls(
            turn_index=d["turn_index"],
            player=d["player"],
            scaffold=ScaffoldKind(d["scaffold"]),
            prompt_user=d["prompt_user"],
            prompt_system=d.get("prompt_system"),
            response=d["response"],
            decision=AgentDecision.from_dict(d["decision"]),
            attempts=d["attempts"],
            move=move_from_dict(d["move"]),
            legal=tuple(d["legal"]),
            pre_hash=d["pre_hash"],
            post_hash=d["post_hash"],
            outcome=dict(d["outcome"]),
            fallback_used=d.get("fallback_used", False),
            calls=tuple(d.get("calls", ())),
        )


@dataclass(frozen=True)
class GameRecord:
    config: GameConfig
    roster: tuple[dict, ...]
    scaffold: ScaffoldKind
    pipeline: Pipeline
    turns: tuple[TurnRecord, ...]
    terminal_reason: str | None
    final_score: int
    aborted: str | None = None

    @property
    def game_id(self) -> str:
        return f"p{self.config.n_players}-s{self.config.seed}"

    @property
    def completed(self) -> bool:
        return self.aborted is None

    def to_dict(self) -> dict:
        return {
            "schema": RECORD_SCHEMA,
            "game_id": self.game_id,
            "config": self.config.to_dict(),
            "roster": [dict(r) for r in self.roster],
            "scaffold": self.scaffold.value,
            "pipeline": self.pipeline.to_dict(),
            "terminal_reason": self.terminal_reason,
            "final_score": self.final_score,
            "aborted": self.aborted,
            "turns": [t.to_dict() for t in self.turns],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GameRecord":
        if d.get("schema") != RECORD_SCHEMA:
            raise ValueError(f"unsupported record schema {d.get('schema')!r}")
        return cls(
            config=GameConfig.from_dict(d["config"]),
            roster=tuple(d["roster"]),
            scaffold=ScaffoldKind(d["scaffold"]),
            pipeline=Pipeline.from_dict(d["pipeline"]),
            turns=tuple(TurnRecord.from_dict(t) for t in d["turns"]),
            terminal_reason=d["terminal_reason"],
            final_score=d["final_score"],
            aborted=d.get("aborted"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def load(cls, path: str | Path) -> "GameRecord":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Game loop
# ---------------------------------------------------------------------------

def seat_rng(config: GameConfig, seat: int) -> random.Random:
    return random.Random(f"hanabi-seat:{config.n_players}:{config.seed}:{seat}")


def run_game(
    roster: Roster,
    config: GameConfig,
    kind: ScaffoldKind | str,
    *,
    pipeline: Pipeline = Pipeline(),
    max_turns: int = DEFAULT_MAX_TURNS,
    transport: Transport | None = None,
    clean_watson_system: bool = False,
) -> GameRecord:
    """Play one game; a pure function of its arguments for scripted rosters."""
    kind = ScaffoldKind(kind)
    if len(roster.seats) != config.n_players:
        raise ValueError(f"roster has {len(roster.seats)} seats for {config.n_players} players")
    if pipeline.kind is PipelineKind.MIXTURE and kind is ScaffoldKind.MYCROFT:
        raise ValueError("mixture of agents is not defined for Mycroft")
    state = new_game(config)
    rngs = [seat_rng(config, p) for p in range(config.n_players)]
    memory: dict[int, TurnMemory] = {}
    history: list[MoveOutcome] = []
    turns: list[TurnRecord] = []
    aborted = None

    while state.terminal is None:
        if len(turns) >= max_turns:
            aborted = f"max_turns={max_turns}"
            break
        me = state.current_player
        agent = roster.seats[me]
        legal = legal_moves(state)
        prompt = render_prompt(kind, state, me, memory.get(me), history,
                               clean_watson_system=clean_watson_system)
        try:
            if pipeline.kind is PipelineKind.SINGLE:
                result = decide(agent, prompt, len(legal), rngs[me], state=state, kind=kind,
                                transport=transport)
                calls: tuple = ()
            elif pipeline.kind is PipelineKind.BEST_OF_K:
                result = best_of_k(agent, prompt, pipeline.k, len(legal), rngs[me], state=state,
                                   kind=kind, transport=transport, strict=pipeline.strict)
                calls = result.calls
            else:
                result = mixture_of_agents(uniform_roster_roles(agent, config.n_players), state, me,
                                           rngs[me], kind=kind, history=history, transport=transport)
                calls = result.calls
        except GameAborted as exc:
            aborted = f"agent_abort: {exc}"
            break
        decision = result.decision
        move = legal[decision.action][1]
        nxt, outcome = apply_move(state, move)
        turns.append(TurnRecord(
            turn_index=state.turn_index,
            player=me,
            scaffold=kind,
            prompt_user=prompt.user,
            prompt_system=prompt.system,
            response=result.raw,
            decision=decision,
            attempts=result.attempts,
            move=move,
            legal=tuple(describe(m) for _, m in legal),
            pre_hash=state_hash(state),
            post_hash=state_hash(nxt),
            outcome=outcome.to_dict(),
            fallback_used=result.fallback_used,
            calls=tuple(
                {"role": c.role, "prompt": c.prompt, "response": c.response, "attempts": c.attempts}
                for c in calls
            ),
        ))
        if kind is ScaffoldKind.MYCROFT:
            memory[me] = TurnMemory(mycroft_state_text(state, me, history), result.raw or "(empty)")
        history.append(outcome)
        state = nxt

    return GameRecord(
        config=config,
        roster=tuple(roster.describe()),
        scaffold=kind,
        pipeline=pipeline,
        turns=tuple(turns),
        terminal_reason=state.terminal.reason.value if state.terminal else None,
        final_score=state.terminal.final_score if state.terminal else score(state),
        aborted=aborted,
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    turn_index: int | None
    kind: str
    detail: str

    def __str__(self) -> str:
        where = "game" if self.turn_index is None else f"turn {self.turn_index}"
        return f"{where}: {self.kind}: {self.detail}"


def validate_trajectory(record: GameRecord) -> list[Violation]:
    """Replay ``record`` from its config and report where it stops matching.

    Replay halts at the first divergence, since later turns would only
    repeat the same fault.
    """
    state = new_game(record.config)
    for t in record.turns:
        if t.turn_index != state.turn_index or t.player != state.current_player:
            return [Violation(t.turn_index, "sequence", f"expected turn {state.turn_index} "
                              f"by P{state.current_player}")]
        if t.pre_hash != state_hash(state):
            return [Violation(t.turn_index, "pre_hash", "pre-state hash mismatch")]
        legal = legal_moves(state)
        if not is_legal(state, t.move):
            return [Violation(t.turn_index, "illegal_move", describe(t.move))]
        if not 0 <= t.decision.action < len(legal) or legal[t.decision.action][1] != t.move:
            return [Violation(t.turn_index, "action_index",
                              f"index {t.decision.action} does not name {describe(t.move)}")]
        try:
            state, _ = apply_move(state, t.move)
        except IllegalMoveError as exc:  # pragma: no cover - is_legal checked above
            return [Violation(t.turn_index, "illegal_move", str(exc))]
        if t.post_hash != state_hash(state):
            return [Violation(t.turn_index, "post_hash", "post-state hash mismatch")]
    if record.aborted is None:
        if state.terminal is None:
            return [Violation(None, "not_terminal", "record ends before the game does")]
        if record.terminal_reason != state.terminal.reason.value:
            return [Violation(None, "terminal_reason", f"replay ended with {state.terminal.reason.value}")]
        if record.final_score != state.terminal.final_score:
            return [Violation(None, "final_score", f"replay scored {state.terminal.final_score}")]
    elif record.final_score != score(state):
        return [Violation(None, "final_score", f"replay scored {score(state)}")]
    return []


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    roster: RosterTemplate
    scaffold: ScaffoldKind = ScaffoldKind.SHERLOCK
    seeds: tuple[int, ...] = SEED_PRESETS["standard"]
    player_counts: tuple[int, ...] = (2, 3, 4, 5)
    pipeline: Pipeline = Pipeline()
    parallelism: int = 1
    max_turns: int = DEFAULT_MAX_TURNS
    game: Mapping = field(default_factory=dict, hash=False)  # extra GameConfig fields

    def __post_init__(self):
        object.__setattr__(self, "scaffold", ScaffoldKind(self.scaffold))
        object.__setattr__(self, "seeds", resolve_seeds(self.seeds))
        object.__setattr__(self, "player_counts", tuple(self.player_counts))
        if not self.seeds:
            raise ValueError("a suite needs at least one seed")
        if not self.player_counts:
            raise ValueError("a suite needs at least one player count")

    def to_dict(self) -> dict:
        return {
            "roster": self.roster.to_dict(),
            "scaffold": self.scaffold.value,
            "seeds": list(self.seeds),
            "player_counts": list(self.player_counts),
            "pipeline": self.pipeline.to_dict(),
            "parallelism": self.parallelism,
            "max_turns": self.max_turns,
            "game": dict(self.game),
        }

    @classmethod
    def from_dict(cls, d: Mapping, environ=None) -> "SuiteConfig":
        return cls(
            roster=RosterTemplate.from_dict(d["roster"], environ),
            scaffold=d.get("scaffold", "Sherlock"),
            seeds=resolve_seeds(d.get("seeds", "standard")),
            player_counts=tuple(d.get("player_counts", (2, 3, 4, 5))),
            pipeline=Pipeline.from_dict(d.get("pipeline")),
            parallelism=int(d.get("parallelism", 1)),
            max_turns=int(d.get("max_turns", DEFAULT_MAX_TURNS)),
            game=dict(d.get("game", {})),
        )

    @classmethod
    def load(cls, path: str | Path, environ=None) -> "SuiteConfig":
        """Read a YAML (or JSON, which YAML accepts) suite file."""
        return cls.from_dict(yaml.safe_load(Path(path).read_text(encoding="utf-8")), environ)


@dataclass(frozen=True)
class CellFailure:
    n_players: int
    seed: int
    error: str


@dataclass(frozen=True)
class SuiteResult:
    config: SuiteConfig
    games: tuple[GameRecord, ...]
    failures: tuple[CellFailure, ...] = ()

    def scores(self, n_players: int | None = None, completed_only: bool = True) -> list[int]:
        return [
            g.final_score for g in self.games
            if (n_players is None or g.config.n_players == n_players)
            and (g.completed or not completed_only)
        ]


def _game_config(cfg: SuiteConfig, n: int, seed: int) -> GameConfig:
    return GameConfig.from_dict({**cfg.game, "n_players": n, "seed": seed})


def run_suite(
    config: SuiteConfig,
    *,
    transport: Transport | None = None,
) -> SuiteResult:
    """Every (player count, seed) cell; order is fixed whatever the parallelism."""
    cells = [(n, s) for n in config.player_counts for s in config.seeds]

    def play(cell):
        n, seed = cell
        try:
            return run_game(
                config.roster.for_players(n), _game_config(config, n, seed), config.scaffold,
                pipeline=config.pipeline, max_turns=config.max_turns, transport=transport,
            )
        except Exception as exc:  # one bad cell must not sink the suite
            return CellFailure(n, seed, f"{type(exc).__name__}: {exc}")

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(play, cells))
    else:
        results = [play(c) for c in cells]
    games = tuple(r for r in results if isinstance(r, GameRecord))
    failures = tuple(r for r in results if isinstance(r, CellFailure))
    return SuiteResult(config, games, failures)


MANIFEST = "manifest.json"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_run_dir(result: SuiteResult, path: str | Path) -> Path:
    """``games/<id>.json`` per game plus a manifest; contents depend only on the result."""
    root = Path(path)
    (root / "games").mkdir(parents=True, exist_ok=True)
    entries = []
    for g in result.games:
        text = g.to_json()
        rel = f"games/{g.game_id}.json"
        (root / rel).write_text(text, encoding="utf-8")
        entries.append({
            "game_id": g.game_id,
            "file": rel,
            "n_players": g.config.n_players,
            "seed": g.config.seed,
            "final_score": g.final_score,
            "aborted": g.aborted,
            "turns": len(g.turns),
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
        })
    manifest = {
        "schema": "hanabi-run/1",
        "suite": result.config.to_dict(),
        "games": entries,
        "failures": [
            {"n_players": f.n_players, "seed": f.seed, "error": f.error} for f in result.failures
        ],
    }
    (root / MANIFEST).write_text(_dump(manifest), encoding="utf-8")
    return root


def load_run_dir(path: str | Path) -> tuple[dict, list[GameRecord]]:
    root = Path(path)
    manifest = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    games = [GameRecord.load(root / e["file"]) for e in manifest["games"]]
    return manifest, games

"""HanabiLogs / HanabiRewards export, import and validation."""

from __future__ import annotations

import json
import logging
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema

from .orchestrator import GameRecord, TurnRecord, validate_trajectory

log = logging.getLogger(__name__)

LOGS_VERSION = "hanabi-logs/1"
REWARDS_VERSION = "hanabi-rewards/1"


class DatasetKind(str, Enum):
    LOGS = "Logs"
    REWARDS = "Rewards"

    @property
    def version(self) -> str:
        return LOGS_VERSION if self is DatasetKind.LOGS else REWARDS_VERSION

    @property
    def schema_file(self) -> str:
        return "logs.schema.json" if self is DatasetKind.LOGS else "rewards.schema.json"


class DatasetError(ValueError):
    """A line failed schema or semantic validation."""


@lru_cache(maxsize=None)
def schema(kind: DatasetKind) -> dict:
    text = resources.files("hanabi_harness").joinpath("schemas", DatasetKind(kind).schema_file).read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _validator(kind: DatasetKind) -> jsonschema.Draft202012Validator:
    return jsonschema.Draft202012Validator(schema(kind))


@dataclass(frozen=True)
class LogsRecord:
    game_id: str
    turn_index: int
    player: int
    scaffold: str
    n_players: int
    seed: int
    model_name: str
    prompt: str
    response: str
    reasoning: str | None = None

    def to_dict(self) -> dict:
        d = {"schema_version": LOGS_VERSION, **asdict(self)}
        if self.reasoning is None:
            del d["reasoning"]
        return d


@dataclass(frozen=True)
class RewardsRecord(LogsRecord):
    legal_moves: tuple[str, ...] = ()
    ratings: tuple[tuple[int, float], ...] = ()
    chosen_action: int = 0

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["schema_version"] = REWARDS_VERSION
        d["legal_moves"] = list(self.legal_moves)
        d["ratings"] = [{"action": a, "rating": r} for a, r in self.ratings]
        return d


def _check_rewards(d: Mapping) -> None:
    actions = [r["action"] for r in d["ratings"]]
    if sorted(actions) != list(range(len(d["legal_moves"]))):
        raise DatasetError("ratings must cover every legal move exactly once")
    if d["chosen_action"] not in actions:
        raise DatasetError("chosen action is not among the rated candidates")


def validate_line(d: Mapping, kind: DatasetKind) -> None:
    kind = DatasetKind(kind)
    error = jsonschema.exceptions.best_match(_validator(kind).iter_errors(d))
    if error is not None:
        raise DatasetError(error.message)
    if kind is DatasetKind.REWARDS:
        _check_rewards(d)


def record_from_dict(d: Mapping, kind: DatasetKind) -> LogsRecord:
    kind = DatasetKind(kind)
    validate_line(d, kind)
    base = {k: d[k] for k in LogsRecord.__dataclass_fields__ if k in d}
    if kind is DatasetKind.LOGS:
        return LogsRecord(**base)
    return RewardsRecord(
        **base,
        legal_moves=tuple(d["legal_moves"]),
        ratings=tuple((r["action"], float(r["rating"])) for r in d["ratings"]),
        chosen_action=d["chosen_action"],
    )


def dumps_line(d: Mapping) -> str:
    return json.dumps(d, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _model_name(game: GameRecord, seat: int) -> str:
    spec = game.roster[seat]
    return spec.get("model_name") or spec["kind"]


def _logs_record(game: GameRecord, turn: TurnRecord) -> LogsRecord:
    return LogsRecord(
        game_id=game.game_id,
        turn_index=turn.turn_index,
        player=turn.player,
        scaffold=turn.scaffold.value,
        n_players=game.config.n_players,
        seed=game.config.seed,
        model_name=_model_name(game, turn.player),
        prompt=turn.prompt,
        response=turn.response,
    )


def _rewards_usable(turn: TurnRecord, strict: bool) -> bool:
    ratings = turn.decision.ratings
    complete = [a for a, _ in ratings] == list(range(len(turn.legal)))
    if not complete or turn.fallback_used:
        return False
    return turn.decision.ratings_valid or not strict


@dataclass
class ExportManifest:
    dataset: str
    schema_version: str
    lines: int = 0
    games: int = 0
    refused_games: list = field(default_factory=list)
    skipped_turns: int = 0
    player_counts: dict = field(default_factory=dict)
    scores: dict = field(default_factory=dict)
    score_mean: float | None = None
    strict: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def export(
    games: Iterable[GameRecord],
    kind: DatasetKind | str,
    out_path: str | Path,
    *,
    strict: bool = False,
) -> ExportManifest:
    """Write one JSONL line per usable turn plus ``<out>.manifest.json``.

    Games that fail replay validation are refused. For Rewards, turns whose
    ratings are incomplete (or, under ``strict``, had any rating issue) are
    skipped and counted.
    """
    kind = DatasetKind(kind)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    manifest = ExportManifest(
        dataset=f"Hanabi{kind.value}", schema_version=kind.version, strict=strict
    )
    hist: Counter = Counter()
    score_hist: Counter = Counter()
    scores = []
    with out_path.open("w", encoding="utf-8", newline="\n") as fh:
        for game in games:
            violations = validate_trajectory(game)
            if violations:
                log.warning("refusing %s: %s", game.game_id, violations[0])
                manifest.refused_games.append(
                    {"game_id": game.game_id, "violations": [str(v) for v in violations]}
                )
                continue
            manifest.games += 1
            hist[str(game.config.n_players)] += 1
            score_hist[str(game.final_score)] += 1
            scores.append(game.final_score)
            for turn in game.turns:
                rec = _logs_record(game, turn)
                if kind is DatasetKind.REWARDS:
                    if not _rewards_usable(turn, strict):
                        manifest.skipped_turns += 1
                        continue
                    rec = RewardsRecord(
                        **asdict(rec),
                        legal_moves=turn.legal,
                        ratings=turn.decision.ratings,
                        chosen_action=turn.decision.action,
                    )
                line = rec.to_dict()
                validate_line(line, kind)
                fh.write(dumps_line(line) + "\n")
                manifest.lines += 1
    manifest.player_counts = dict(sorted(hist.items(), key=lambda kv: int(kv[0])))
    manifest.scores = dict(sorted(score_hist.items(), key=lambda kv: int(kv[0])))
    manifest.score_mean = statistics.fmean(scores) if scores else None
    manifest_path(out_path).write_text(
        json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return manifest


def manifest_path(out_path: str | Path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.name + ".manifest.json")


def read_jsonl(path: str | Path, kind: DatasetKind | str) -> list[LogsRecord]:
    """Parse and validate every line; the first bad line raises with its number."""
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                records.append(record_from_dict(json.loads(line), kind))
            except (json.JSONDecodeError, DatasetError, TypeError, KeyError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
    return records


def write_jsonl(records: Iterable[LogsRecord], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_line(rec.to_dict()) + "\n")
            n += 1
    return n

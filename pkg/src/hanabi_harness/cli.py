"""``hanabi-harness`` command line.

Exit codes: 0 success, 1 usage error, 2 partial failure (or nothing to
report), 3 integrity violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import datasets, judge, stats
from .agents import AgentKind, AgentSpec
from .engine import ConfigError, GameConfig
from .orchestrator import (
    MANIFEST,
    SEED_PRESETS,
    GameRecord,
    Pipeline,
    RosterTemplate,
    SuiteConfig,
    resolve_seeds,
    run_game,
    run_suite,
    validate_trajectory,
    write_run_dir,
)
from .scaffold import ScaffoldKind

OK, USAGE, PARTIAL, INTEGRITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _agent_from_args(args) -> AgentSpec:
    kind = {"greedy": AgentKind.SCRIPTED_GREEDY, "random": AgentKind.RANDOM_LEGAL,
            "llm": AgentKind.LLM}[args.agent]
    if kind is AgentKind.LLM:
        return AgentSpec.from_dict({
            "kind": "Llm", "endpoint": args.endpoint, "model_name": args.model,
            "temperature": args.temperature,
        })
    return AgentSpec(kind)


def _agent_from_args_partner(args) -> AgentSpec | None:
    if not args.partner:
        return None
    kind = {"greedy": AgentKind.SCRIPTED_GREEDY, "random": AgentKind.RANDOM_LEGAL}[args.partner]
    # The partner fills seat 0; the main agent takes the rest.
    return AgentSpec(kind)


def _pipeline_from_args(args) -> Pipeline:
    return Pipeline(args.pipeline, k=args.k, strict=args.strict_bok)


def _parse_seeds(text: str) -> tuple[int, ...]:
    if text in SEED_PRESETS:
        return SEED_PRESETS[text]
    try:
        return resolve_seeds([int(s) for s in text.split(",") if s.strip()])
    except ValueError:
        raise UsageError(f"--seeds must be a preset ({', '.join(SEED_PRESETS)}) or a comma list")


def load_games(paths: Sequence[str]) -> list[GameRecord]:
    """Game records from run directories and/or individual game files."""
    games = []
    for p in map(Path, paths):
        if p.is_dir():
            manifest = json.loads((p / MANIFEST).read_text(encoding="utf-8"))
            games += [GameRecord.load(p / e["file"]) for e in manifest["games"]]
        elif p.is_file():
            games.append(GameRecord.load(p))
        else:
            raise UsageError(f"no such run directory or game file: {p}")
    return games


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_play(args) -> int:
    agent = _agent_from_args(args)
    template = RosterTemplate(agent, _agent_from_args_partner(args))
    config = GameConfig(n_players=args.players, seed=args.seed)
    record = run_game(template.for_players(args.players), config, args.scaffold,
                      pipeline=_pipeline_from_args(args), max_turns=args.max_turns)
    for t in record.turns:
        if args.show_prompts:
            print(f"--- prompt (turn {t.turn_index + 1}, P{t.player}) ---\n{t.prompt}\n")
            print(f"--- response ---\n{t.response}\n")
        o = t.outcome
        extra = f" {o['card']}" if o["card"] else ""
        if o["scored"] is False:
            extra += " (misplay)"
        print(f"T{t.turn_index + 1:>3} P{t.player}: {o['move']}{extra} | "
              f"FW {o['fireworks_after']} | info {o['info_after']} lives {o['lives_after']}")
    end = record.terminal_reason or f"aborted ({record.aborted})"
    print(f"Final score: {record.final_score} ({end})")
    if args.out:
        Path(args.out).write_text(record.to_json(), encoding="utf-8")
    return OK if record.completed else PARTIAL


def cmd_suite(args) -> int:
    config = SuiteConfig.load(args.config)
    overrides = {}
    if args.seeds:
        overrides["seeds"] = list(_parse_seeds(args.seeds))
    if args.players:
        overrides["player_counts"] = [int(x) for x in args.players.split(",")]
    if args.parallelism:
        overrides["parallelism"] = args.parallelism
    if args.max_turns:
        overrides["max_turns"] = args.max_turns
    if args.scaffold:
        overrides["scaffold"] = args.scaffold
    if overrides:
        d = config.to_dict()
        d.update(overrides)
        config = SuiteConfig.from_dict(d)
    result = run_suite(config)
    write_run_dir(result, args.out)
    print(stats.report(result.games).table())
    for f in result.failures:
        print(f"FAILED p{f.n_players}-s{f.seed}: {f.error}", file=sys.stderr)
    bad = [g for g in result.games if validate_trajectory(g)]
    if bad:
        return INTEGRITY
    if result.failures or any(g.aborted for g in result.games):
        return PARTIAL
    return OK


def cmd_export(args) -> int:
    games = load_games(args.inputs)
    kind = datasets.DatasetKind.LOGS if args.logs else datasets.DatasetKind.REWARDS
    manifest = datasets.export(games, kind, args.out, strict=args.strict)
    print(f"{manifest.dataset}: {manifest.lines} lines from {manifest.games} games "
          f"({manifest.skipped_turns} turns skipped, {len(manifest.refused_games)} games refused)")
    return INTEGRITY if manifest.refused_games else OK


def cmd_judge(args) -> int:
    games = load_games(args.inputs)
    rows = []
    for g in games:
        rows += judge.judge_record(g, with_prompts=bool(args.prompt_out))
    if args.prompt_out:
        with open(args.prompt_out, "w", encoding="utf-8") as fh:
            for r in rows:
                if r.prompt is not None:
                    fh.write(json.dumps({"game_id": r.game_id, "turn_index": r.turn_index,
                                         "player": r.player, "prompt": r.prompt},
                                        sort_keys=True, ensure_ascii=False) + "\n")
    scored = [r for r in rows if r.scores is not None]
    if args.structural:
        out = open(args.out, "w", encoding="utf-8") if args.out else None
        try:
            for r in rows:
                d = r.to_dict()
                d.pop("judge_prompt", None)
                if out:
                    out.write(json.dumps(d, sort_keys=True) + "\n")
        finally:
            if out:
                out.close()
        if scored:
            for name in judge.SCORE_FIELDS:
                mean = sum(getattr(r.scores, name) for r in scored) / len(scored)
                print(f"structural {name}: {mean:.3f}")
        print(f"{len(scored)} turns scored, {len(rows) - len(scored)} unscored")
    if not rows:
        print("no working-memory turns to judge", file=sys.stderr)
        return PARTIAL
    return OK if len(scored) == len(rows) else PARTIAL


def cmd_replay(args) -> int:
    record = GameRecord.load(args.game)
    violations = validate_trajectory(record)
    for v in violations:
        print(v)
    if violations:
        return INTEGRITY
    print(f"{record.game_id}: {len(record.turns)} turns replay exactly, score {record.final_score}")
    return OK


def cmd_stats(args) -> int:
    games = load_games(args.inputs)
    rep = stats.report(games, n_bootstrap=args.bootstrap, seed=args.seed)
    if rep.empty:
        print("no completed games", file=sys.stderr)
        return PARTIAL
    print(rep.table())
    if args.json:
        Path(args.json).write_text(json.dumps(rep.to_dict(), indent=2) + "\n", encoding="utf-8")
    return OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hanabi-harness", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    scaffolds = [k.value for k in ScaffoldKind]

    play = sub.add_parser("play", help="play one game and print its transcript")
    play.add_argument("--players", type=int, default=2)
    play.add_argument("--seed", type=int, default=1)
    play.add_argument("--scaffold", choices=scaffolds, default="Sherlock")
    play.add_argument("--agent", choices=["greedy", "random", "llm"], default="greedy")
    play.add_argument("--partner", choices=["greedy", "random"],
                      help="different agent for seat 0 (cross-play)")
    play.add_argument("--endpoint")
    play.add_argument("--model")
    play.add_argument("--temperature", type=float)
    play.add_argument("--pipeline", choices=["Single", "BestOfK", "MixtureOfAgents"], default="Single")
    play.add_argument("--k", type=int, default=3)
    play.add_argument("--strict-bok", action="store_true",
                      help="always run the Best-of-K selector, even on unanimous samples")
    play.add_argument("--max-turns", type=int, default=200)
    play.add_argument("--show-prompts", action="store_true")
    play.add_argument("--out", help="write the GameRecord JSON here")
    play.set_defaults(func=cmd_play)

    suite = sub.add_parser("suite", help="run a suite from a YAML/JSON config into a run directory")
    suite.add_argument("config")
    suite.add_argument("--out", required=True)
    suite.add_argument("--seeds", help="preset name or comma list")
    suite.add_argument("--players", help="comma list of player counts")
    suite.add_argument("--parallelism", type=int)
    suite.add_argument("--max-turns", type=int)
    suite.add_argument("--scaffold", choices=scaffolds)
    suite.set_defaults(func=cmd_suite)

    export = sub.add_parser("export", help="export HanabiLogs or HanabiRewards JSONL")
    which = export.add_mutually_exclusive_group(required=True)
    which.add_argument("--logs", action="store_true")
    which.add_argument("--rewards", action="store_true")
    export.add_argument("inputs", nargs="+", help="run directories or game files")
    export.add_argument("--out", required=True)
    export.add_argument("--strict", action="store_true", help="skip turns with any rating issue")
    export.set_defaults(func=cmd_export)

    jd = sub.add_parser("judge", help="score working-memory deductions or emit judge prompts")
    jd.add_argument("inputs", nargs="+")
    jd.add_argument("--structural", action="store_true", help="deterministic structural scores")
    jd.add_argument("--prompt-out", help="write LLM-judge prompts as JSONL")
    jd.add_argument("--out", help="structural scores JSONL")
    jd.set_defaults(func=cmd_judge)

    rp = sub.add_parser("replay", help="validate one game record by replay")
    rp.add_argument("game")
    rp.set_defaults(func=cmd_replay)

    st = sub.add_parser("stats", help="mean/std and IQM with bootstrap CI per cell")
    st.add_argument("inputs", nargs="+")
    st.add_argument("--bootstrap", type=int, default=stats.DEFAULT_BOOTSTRAP)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--json", help="also write the report as JSON")
    st.set_defaults(func=cmd_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "judge" and not (args.structural or args.prompt_out):
        parser.error("judge needs --structural and/or --prompt-out")
    try:
        return args.func(args)
    except (UsageError, ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

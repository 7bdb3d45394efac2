"""How well does an agent track what everyone knows?

Mycroft-style agents write a per-card deduction for every seat each turn.
The harness replays the clue history to get the exact answer and scores the
agent's block against it. Here the greedy baseline writes exact deductions,
so it scores 1.0; we then blur one card to show the score react.

    python3 demos/working_memory_judge.py
"""

import json
from dataclasses import replace

from hanabi_harness.agents import SCRIPTED_GREEDY
from hanabi_harness.beliefs import FULL_COLORS, FULL_RANKS, CardKnowledge, block_to_dict
from hanabi_harness.engine import GameConfig
from hanabi_harness.judge import judge_record, oracle_deduction, score_deduction
from hanabi_harness.orchestrator import RosterTemplate, run_game

config = GameConfig(n_players=3, seed=4)
record = run_game(RosterTemplate(SCRIPTED_GREEDY).for_players(3), config, "Mycroft")

rows = judge_record(record)
mean = sum(r.scores.overall_rating for r in rows) / len(rows)
print(f"{len(rows)} turns judged, mean overall rating {mean:.3f}")

# Look at one mid-game turn in detail.
turn = record.turns[len(record.turns) // 2]
moves = [t.move for t in record.turns[: turn.turn_index]]
truth = oracle_deduction(config, moves, turn.player)
print(f"\nexact deduction for player {turn.player} before turn {turn.turn_index}:")
print(json.dumps(block_to_dict(truth), indent=2))

# An agent that forgot everything it was told about its first card.
forgetful = {k: list(v) for k, v in truth.items()}
forgetful["you"][0] = CardKnowledge(FULL_COLORS, FULL_RANKS)
s = score_deduction(forgetful, truth)
print(f"\nforgetting card0: accuracy {s.deduction_accuracy:.3f}, overall {s.overall_rating:.3f}")

# One that claims more than it could know.
slot = next(i for i, k in enumerate(truth["you"]) if len(k.colors) > 1)
k = truth["you"][slot]
overconfident = {key: list(v) for key, v in truth.items()}
overconfident["you"][slot] = replace(k, colors=frozenset([sorted(k.colors)[0]]))
s = score_deduction(overconfident, truth)
print(f"inventing a color for card{slot}: quality {s.state_tracking_quality:.3f}")
print("issues:", *s.key_issues, sep="\n  ")

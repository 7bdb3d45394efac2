"""Play a single offline game and look at what a model would have seen.

Both seats run the scripted greedy baseline, so no endpoint is needed.
The prompts are still rendered every turn; swapping in an LLM agent only
changes who answers them.

    python3 demos/one_game.py [--players N] [--seed S] [--scaffold Watson|Sherlock|Mycroft]
"""

import argparse

from hanabi_harness.agents import SCRIPTED_GREEDY
from hanabi_harness.engine import GameConfig
from hanabi_harness.orchestrator import RosterTemplate, run_game, validate_trajectory

ap = argparse.ArgumentParser()
ap.add_argument("--players", type=int, default=2)
ap.add_argument("--seed", type=int, default=1)
ap.add_argument("--scaffold", default="Sherlock")
args = ap.parse_args()

config = GameConfig(n_players=args.players, seed=args.seed)
roster = RosterTemplate(SCRIPTED_GREEDY).for_players(args.players)
record = run_game(roster, config, args.scaffold)

# The first prompt, exactly as it would be sent over the wire.
first = record.turns[0]
print(f"--- prompt for player {first.player} at turn 0 ---")
print(first.prompt)
print(f"--- response ---\n{first.response}\n")

# Then the game at a glance.
for t in record.turns:
    print(f"turn {t.turn_index:>2}  P{t.player}  action {t.decision.action:>2}  {t.legal[t.decision.action]}")
print(f"\nfinal score {record.final_score} ({record.terminal_reason})")

# Every record carries per-turn state hashes, so the game can be re-derived
# from the seed and move list alone.
problems = validate_trajectory(record)
print("replay check:", "ok" if not problems else problems)

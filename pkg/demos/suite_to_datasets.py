"""From a seed grid to training data and a results table.

Runs the scripted baseline over the standard seeds at every player count,
writes a run directory, exports both JSONL datasets and prints IQM
statistics. Everything lands under the directory given on the command line
(default: ./demo-run).

    python3 demos/suite_to_datasets.py [OUT_DIR]
"""

import sys
from pathlib import Path

from hanabi_harness.agents import SCRIPTED_GREEDY
from hanabi_harness.datasets import DatasetKind, export, read_jsonl
from hanabi_harness.orchestrator import RosterTemplate, SuiteConfig, load_run_dir, run_suite, write_run_dir
from hanabi_harness.stats import report

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-run")

suite = SuiteConfig(roster=RosterTemplate(SCRIPTED_GREEDY), scaffold="Sherlock", seeds="standard")
result = run_suite(suite)
run_dir = write_run_dir(result, out / "run")
print(f"{len(result.games)} games written to {run_dir}")

# Re-load from disk: exports only ever work from persisted records.
_, games = load_run_dir(run_dir)

for kind in DatasetKind:
    path = out / f"{kind.value}.jsonl"
    manifest = export(games, kind, path)
    n = len(read_jsonl(path, kind))  # schema-checks each line on the way back in
    print(f"{kind.value}: {manifest.lines} lines, {n} re-validated, "
          f"{manifest.skipped_turns} skipped, mean score {manifest.score_mean:.2f}")

print()
print(report(games).table())

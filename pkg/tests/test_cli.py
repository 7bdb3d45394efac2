import json

import pytest

from hanabi_harness.cli import INTEGRITY, OK, PARTIAL, USAGE, main
from hanabi_harness.orchestrator import GameRecord


@pytest.fixture
def suite_yaml(tmp_path):
    path = tmp_path / "suite.yaml"
    path.write_text(
        "roster:\n  primary: {kind: ScriptedGreedy}\n  singleton: {kind: RandomLegal}\n"
        "scaffold: Mycroft\nseeds: [1, 2, 3, 5]\nplayer_counts: [2, 4]\n"
    )
    return path


@pytest.fixture
def run_dir(tmp_path, suite_yaml):
    out = tmp_path / "run"
    assert main(["suite", str(suite_yaml), "--out", str(out)]) == OK
    return out


def test_play_prints_transcript(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["play", "--players", "3", "--seed", "2", "--out", str(out)]) == OK
    text = capsys.readouterr().out
    assert "Final score:" in text and "T  1 P0:" in text
    assert GameRecord.load(out).config.n_players == 3


def test_play_max_turns_is_partial(capsys):
    assert main(["play", "--max-turns", "3"]) == PARTIAL
    assert "aborted" in capsys.readouterr().out


def test_suite_writes_run_dir(run_dir, capsys):
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert len(manifest["games"]) == 8


def test_suite_overrides(tmp_path, suite_yaml):
    out = tmp_path / "o"
    assert main(["suite", str(suite_yaml), "--out", str(out), "--seeds", "heldout",
                 "--players", "3", "--scaffold", "Watson"]) == OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert [g["seed"] for g in manifest["games"]] == [4, 6, 8, 10, 12]
    assert manifest["suite"]["scaffold"] == "Watson"


def test_export_both(run_dir, tmp_path):
    for flag in ("--logs", "--rewards"):
        out = tmp_path / f"{flag[2:]}.jsonl"
        assert main(["export", flag, str(run_dir), "--out", str(out)]) == OK
        assert out.read_text().count("\n") > 0


def test_export_refuses_tampered_game(run_dir, tmp_path):
    game = next((run_dir / "games").iterdir())
    d = json.loads(game.read_text())
    d["final_score"] += 1
    game.write_text(json.dumps(d))
    assert main(["export", "--logs", str(game), "--out", str(tmp_path / "x.jsonl")]) == INTEGRITY
    assert main(["replay", str(game)]) == INTEGRITY


def test_replay_ok(run_dir, capsys):
    game = sorted((run_dir / "games").iterdir())[0]
    assert main(["replay", str(game)]) == OK
    assert "replay exactly" in capsys.readouterr().out


def test_judge_structural(run_dir, tmp_path, capsys):
    prompts = tmp_path / "prompts.jsonl"
    scores = tmp_path / "scores.jsonl"
    assert main(["judge", str(run_dir), "--structural", "--out", str(scores),
                 "--prompt-out", str(prompts)]) == OK
    assert "structural overall_rating: 1.000" in capsys.readouterr().out
    first = json.loads(prompts.read_text().splitlines()[0])
    assert "PROGRAMMATICALLY CORRECT DEDUCTION" in first["prompt"]
    assert json.loads(scores.read_text().splitlines()[0])["scores"]["source"] == "structural"


def test_judge_without_mycroft_turns_is_partial(tmp_path):
    out = tmp_path / "g.json"
    main(["play", "--scaffold", "Watson", "--out", str(out)])
    assert main(["judge", str(out), "--structural"]) == PARTIAL


def test_stats(run_dir, tmp_path, capsys):
    js = tmp_path / "s.json"
    assert main(["stats", str(run_dir), "--bootstrap", "200", "--json", str(js)]) == OK
    assert "IQM" in capsys.readouterr().out
    assert len(json.loads(js.read_text())["cells"]) == 2


@pytest.mark.parametrize("argv", [
    [],
    ["play", "--players", "9"],
    ["play", "--scaffold", "Moriarty"],
    ["export", "--logs", "nowhere", "--out", "x.jsonl"],
    ["judge", "nowhere"],
    ["play", "--agent", "llm"],
])
def test_usage_errors(argv, capsys):
    code = None
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == USAGE

import filecmp
import json
from dataclasses import replace

import pytest

from hanabi_harness.agents import RANDOM_LEGAL, SCRIPTED_GREEDY, AgentKind, AgentSpec
from hanabi_harness.engine import GameConfig, Play, RevealRank
from hanabi_harness.orchestrator import (
    SEED_PRESETS,
    GameRecord,
    Pipeline,
    Roster,
    RosterTemplate,
    SuiteConfig,
    load_run_dir,
    resolve_seeds,
    run_game,
    run_suite,
    validate_trajectory,
    write_run_dir,
)
from hanabi_harness.scaffold import ScaffoldKind

GREEDY2 = RosterTemplate(SCRIPTED_GREEDY).for_players(2)


def test_seed_presets():
    assert resolve_seeds("standard") == (1, 2, 3, 5, 7, 11, 13, 17, 19, 23)
    assert resolve_seeds("heldout") == (4, 6, 8, 10, 12)
    assert resolve_seeds([9, 8]) == (9, 8)
    with pytest.raises(ValueError):
        resolve_seeds("everything")


def test_roster_template():
    roster = RosterTemplate(SCRIPTED_GREEDY, RANDOM_LEGAL).for_players(4)
    assert roster.seats[0] == RANDOM_LEGAL and set(roster.seats[1:]) == {SCRIPTED_GREEDY}
    assert not roster.is_self_play and GREEDY2.is_self_play


@pytest.mark.parametrize("kind", list(ScaffoldKind))
def test_game_completes_and_validates(kind):
    record = run_game(RosterTemplate(SCRIPTED_GREEDY).for_players(3), GameConfig(n_players=3, seed=5), kind)
    assert record.completed and record.terminal_reason
    assert validate_trajectory(record) == []
    assert [t.turn_index for t in record.turns] == list(range(len(record.turns)))


def test_run_game_is_deterministic():
    cfg = GameConfig(n_players=2, seed=7)
    roster = RosterTemplate(RANDOM_LEGAL).for_players(2)
    assert run_game(roster, cfg, "Sherlock").to_json() == run_game(roster, cfg, "Sherlock").to_json()


def test_cross_play_records_roster():
    roster = Roster((RANDOM_LEGAL, SCRIPTED_GREEDY))
    record = run_game(roster, GameConfig(n_players=2, seed=1), "Watson")
    assert [r["kind"] for r in record.roster] == ["RandomLegal", "ScriptedGreedy"]
    assert validate_trajectory(record) == []


def test_roster_size_must_match():
    with pytest.raises(ValueError):
        run_game(GREEDY2, GameConfig(n_players=3, seed=1), "Sherlock")


def test_max_turns_aborts():
    record = run_game(GREEDY2, GameConfig(n_players=2, seed=1), "Sherlock", max_turns=5)
    assert record.aborted == "max_turns=5" and len(record.turns) == 5
    assert not record.completed and record.terminal_reason is None
    assert validate_trajectory(record) == []


def test_llm_abort_is_recorded():
    agent = AgentSpec(AgentKind.LLM, endpoint="http://x", model_name="m", max_retries=0,
                      fallback="AbortGame", backoff_s=0)
    record = run_game(Roster((agent, agent)), GameConfig(n_players=2, seed=1), "Sherlock",
                      transport=lambda a, m: "no idea")
    assert record.aborted.startswith("agent_abort") and not record.turns


def test_mycroft_memory_is_per_seat():
    record = run_game(RosterTemplate(SCRIPTED_GREEDY).for_players(3), GameConfig(n_players=3, seed=2),
                      "Mycroft")
    header = "### You have been given the previous game-state and your last reasoning ###"
    for t in record.turns:
        assert (header in t.prompt_user) == (t.turn_index >= 3)
        if t.turn_index >= 3:
            own_previous = record.turns[t.turn_index - 3]
            assert own_previous.player == t.player
            assert own_previous.response in t.prompt_user


@pytest.mark.parametrize("pipeline", [Pipeline("BestOfK", k=3), Pipeline("BestOfK", k=2, strict=True),
                                      Pipeline("MixtureOfAgents")])
def test_pipelines_validate(pipeline):
    record = run_game(GREEDY2, GameConfig(n_players=2, seed=3), "Sherlock", pipeline=pipeline)
    assert validate_trajectory(record) == []
    assert all(t.calls for t in record.turns)


def test_mixture_rejects_mycroft():
    with pytest.raises(ValueError):
        run_game(GREEDY2, GameConfig(n_players=2, seed=3), "Mycroft", pipeline=Pipeline("MixtureOfAgents"))


# --- validation ---------------------------------------------------------------

@pytest.fixture(scope="module")
def record():
    return run_game(RosterTemplate(RANDOM_LEGAL).for_players(2), GameConfig(n_players=2, seed=11),
                    "Sherlock")


def tamper(record, i, **changes):
    turns = list(record.turns)
    turns[i] = replace(turns[i], **changes)
    return replace(record, turns=tuple(turns))


def test_record_json_round_trip(record, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(record.to_json())
    again = GameRecord.load(path)
    assert again.to_json() == record.to_json()
    assert validate_trajectory(again) == []


def test_perturbed_move_is_one_violation(record):
    bad = tamper(record, 4, move=RevealRank(1, 6))
    violations = validate_trajectory(bad)
    assert len(violations) == 1 and violations[0].turn_index == 4


def test_move_not_matching_index(record):
    t = record.turns[2]
    other = Play(0) if t.move != Play(0) else Play(1)
    violations = validate_trajectory(tamper(record, 2, move=other))
    assert len(violations) == 1 and violations[0].kind in ("action_index", "illegal_move")


def test_tampered_hash_detected(record):
    violations = validate_trajectory(tamper(record, 6, post_hash="0" * 64))
    assert [v.kind for v in violations] == ["post_hash"]


def test_wrong_score_detected(record):
    violations = validate_trajectory(replace(record, final_score=record.final_score + 1))
    assert [v.kind for v in violations] == ["final_score"]


def test_truncated_record_detected(record):
    violations = validate_trajectory(replace(record, turns=record.turns[:-1]))
    assert [v.kind for v in violations] == ["not_terminal"]


# --- suites -------------------------------------------------------------------

def greedy_suite(**kw):
    return SuiteConfig(roster=RosterTemplate(SCRIPTED_GREEDY), **kw)


def test_empty_seeds_rejected():
    with pytest.raises(ValueError):
        greedy_suite(seeds=())
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"roster": {"primary": {"kind": "ScriptedGreedy"}}, "seeds": []})


def test_suite_config_accepts_preset_names():
    assert greedy_suite(seeds="heldout").seeds == (4, 6, 8, 10, 12)
    with pytest.raises(ValueError):
        greedy_suite(seeds="nope")


def test_suite_covers_every_cell_in_order():
    result = run_suite(greedy_suite(scaffold="Watson"))
    assert len(result.games) == 40 and not result.failures
    cells = [(g.config.n_players, g.config.seed) for g in result.games]
    assert cells == [(n, s) for n in (2, 3, 4, 5) for s in SEED_PRESETS["standard"]]


def test_heldout_preset_suite():
    cfg = SuiteConfig.from_dict({"roster": {"primary": {"kind": "RandomLegal"}}, "seeds": "heldout",
                                 "player_counts": [3]})
    result = run_suite(cfg)
    assert [g.config.seed for g in result.games] == [4, 6, 8, 10, 12]


def test_parallel_suite_matches_serial(tmp_path):
    base = dict(seeds=(1, 2, 3), player_counts=(2, 4))
    a = write_run_dir(run_suite(greedy_suite(**base)), tmp_path / "a")
    b = write_run_dir(run_suite(greedy_suite(parallelism=4, **base)), tmp_path / "b")
    games_a = sorted(p.name for p in (a / "games").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a / "games", b / "games", games_a, shallow=False)
    assert not mismatch and not errors and len(match) == 6


def test_run_dir_manifest(tmp_path):
    result = run_suite(greedy_suite(seeds=(1,), player_counts=(2, 3)))
    write_run_dir(result, tmp_path)
    manifest, games = load_run_dir(tmp_path)
    assert manifest["schema"] == "hanabi-run/1"
    assert [e["game_id"] for e in manifest["games"]] == ["p2-s1", "p3-s1"]
    assert [g.final_score for g in games] == [e["final_score"] for e in manifest["games"]]
    assert "time" not in json.dumps(manifest)


def test_suite_config_yaml(tmp_path):
    path = tmp_path / "suite.yaml"
    path.write_text(
        "roster:\n  primary: {kind: ScriptedGreedy}\n  singleton: {kind: RandomLegal}\n"
        "scaffold: Mycroft\nseeds: [1, 2]\nplayer_counts: [2]\n"
        "pipeline: {kind: BestOfK, k: 2}\n"
    )
    cfg = SuiteConfig.load(path)
    assert cfg.scaffold is ScaffoldKind.MYCROFT and cfg.seeds == (1, 2)
    assert cfg.pipeline == Pipeline("BestOfK", k=2)
    assert SuiteConfig.from_dict(cfg.to_dict()) == cfg

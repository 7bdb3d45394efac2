from dataclasses import replace

import numpy as np
import pytest

from hanabi_harness.agents import SCRIPTED_GREEDY
from hanabi_harness.orchestrator import RosterTemplate, SuiteConfig, run_suite
from hanabi_harness.stats import iqm, iqm_ci, iqm_weights, report


def test_iqm_of_one_to_eight():
    assert iqm(range(1, 9)) == 4.5


def test_iqm_fractional_weights():
    w = iqm_weights(10)
    assert w.sum() == pytest.approx(5.0)
    assert w[2] == pytest.approx(0.5) and w[7] == pytest.approx(0.5)
    assert iqm([0, 0, 0, 0, 100]) == pytest.approx(0.0)
    assert iqm(list(range(10))) == pytest.approx(4.5)


def test_iqm_ignores_outliers():
    assert iqm([10, 11, 12, 13, -1000, 1000]) == pytest.approx(iqm([10, 11, 12, 13, 0, 20]))


def test_constant_vector_zero_width_ci():
    ci = iqm_ci([7.0] * 12)
    assert ci.iqm == ci.ci_low == ci.ci_high == 7.0


def test_bootstrap_is_seeded():
    x = np.random.default_rng(1).integers(0, 25, size=30)
    assert iqm_ci(x, seed=5) == iqm_ci(x, seed=5)
    assert iqm_ci(x, seed=5) != iqm_ci(x, seed=6)


def test_ci_contains_point():
    for seed in range(20):
        x = np.random.default_rng(seed).integers(0, 25, size=10)
        ci = iqm_ci(x, n_bootstrap=200, seed=seed)
        assert ci.ci_low <= ci.iqm <= ci.ci_high


def test_small_samples_fall_back_to_mean():
    ci = iqm_ci([1, 2, 9])
    assert ci.fallback_mean and ci.iqm == 4.0


def test_empty_inputs_rejected():
    with pytest.raises(ValueError):
        iqm([])
    with pytest.raises(ValueError):
        iqm_ci([])


def test_report_excludes_aborted_games():
    suite = SuiteConfig(roster=RosterTemplate(SCRIPTED_GREEDY), seeds=(1, 2, 3, 5, 7), player_counts=(2,))
    games = list(run_suite(suite).games)
    games[0] = replace(games[0], aborted="max_turns=1")
    rep = report(games, n_bootstrap=100)
    (cell,) = rep.cells
    assert cell.n == 4 and cell.aborted == 1
    scores = [g.final_score for g in games[1:]]
    assert cell.mean == pytest.approx(np.mean(scores))
    assert cell.std == pytest.approx(np.std(scores, ddof=1))
    assert "aborted" in rep.table()


def test_empty_report():
    assert report([]).empty

import json
import os
import subprocess
from fractions import Fraction

import pytest

import forkrace


def test_reward_tables():
    assert [forkrace.uncle_reward(d) for d in range(1, 7)] == [Fraction(8 - d, 8) for d in range(1, 7)]
    assert forkrace.nephew_reward(2) == Fraction(1, 16)
    with pytest.raises(forkrace.ForkraceError) as info:
        forkrace.uncle_reward(7)
    assert info.value.code == "NotAnUncle"


def test_replay_dishonest_win_and_honest_win():
    rounds = forkrace.replay([1, 1, 0, 0], [0.4, 0.3, 0.3])
    assert [r["winner"] for r in rounds] == [1, 0]
    first = rounds[0]
    assert first["phi"] == 2 and first["v"] == 0
    assert first["settled"]
    assert first["nephew"] == (0, 3)
    assert sum(r[0] for r in first["rewards"]) == 2
    assert not rounds[1]["settled"]


def test_replay_incomplete_raises():
    with pytest.raises(forkrace.ForkraceError):
        forkrace.replay([0, 1, 0, 0], [0.4, 0.3, 0.3])


def test_degenerate_growth_rate():
    summary = forkrace.simulate([1.0, 0.0, 0.0], rounds=20000, seed=3)
    growth = summary["gridPoints"][0]["pooled"]["growthRate"]["direct"]
    assert abs(growth * 16.5 - 1) < 0.02


def test_identities_in_summary():
    summary = forkrace.simulate([0.6, 0.27, 0.13], rounds=5000, seed=4)
    ratios = summary["gridPoints"][0]["pooled"]["ratios"]["direct"]
    assert ratios["rM"] + ratios["rO"] == pytest.approx(1.0, abs=1e-12)
    assert ratios["rO"] == pytest.approx(ratios["rU"] + ratios["rS"], abs=1e-12)


def test_exhaustive_oracle_small():
    report = forkrace.check_exhaustive(6, m=2)
    assert report["ok"]
    assert report["scriptsChecked"] == 3 ** 6
    assert not forkrace.check_exhaustive(8, m=2, uncle_cutoff=2)["ok"]


def test_power_threshold_brackets_a_crossing():
    t = forkrace.power_threshold([0.5, 0.4, 0.1], [0.4, 0.45, 0.5, 0.55], replications=4, rounds=2000, seed=2)
    assert 0.4 <= t["alpha_star"] <= 0.55
    assert t["ci95"][0] <= t["alpha_star"] <= t["ci95"][1]


def test_bad_config_is_reported():
    with pytest.raises(forkrace.ForkraceError) as info:
        forkrace.run({"alphas": [0.8, 0.3, 0.1]})
    assert info.value.code == "ConfigError"


@pytest.mark.skipif("FORKRACE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_writes_summary(tmp_path):
    cli = os.environ["FORKRACE_CLI"]
    done = subprocess.run([cli, "--alphas", "0.6,0.4", "--rounds", "200", "--out", str(tmp_path)], check=False)
    assert done.returncode == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["mode"] == "single"
    assert subprocess.run([cli, "--alphas", "0.8,0.3,0.1", "--out", str(tmp_path)], capture_output=True).returncode == 2

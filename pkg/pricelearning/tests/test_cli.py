#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: test_cli
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/16/2023

Tests for the ppl command line.
"""

import json

import pytest
from click.testing import CliRunner

from pricelearning.cli import EXIT_CONFIG, EXIT_OVERFLOW, cli
from pricelearning.data.formats import read_policy, read_samples, read_sidecar
from pricelearning.enums import REJECT
from pricelearning.utils import PROJECT_ROOT_DIRECTORY

SMOKE_INSTANCE = PROJECT_ROOT_DIRECTORY / "configs" / "smoke-instance.json"

HARDNESS_TOML = """
experiment = "product-hardness"
seed = 3
trials = 4
schedule = [50, 500]

[instance]
n = 10
eps = 0.03125
bits = "random:5"
"""


@pytest.fixture(scope="function")
def runner():
    return CliRunner()


@pytest.fixture(scope="function")
def hardness_config(tmp_path):
    fn = tmp_path / "hard.toml"
    fn.write_text(HARDNESS_TOML)
    return fn


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


class Test_eval:
    """Tests that ``ppl eval`` meets the following expectations:
    - The reject-all policy scores 0.
    - A hand-computed welfare policy scores its expectation.
    - The optimal policy of the planted revenue instance scores 1/4.
    - Monte Carlo agrees with the exact value within five standard errors.
    - A malformed mode exits with status 2.
    """

    def test_reject_all(self, runner, tmp_path):
        fn = tmp_path / "p.csv"
        fn.write_text("REJECT,REJECT\n")
        result = invoke(runner, "eval", "--policy", fn, "--instance", SMOKE_INSTANCE)
        assert result.exit_code == 0, result.output
        assert result.output.strip() == "0"

    def test_welfare_value(self, runner, tmp_path):
        fn = tmp_path / "p.csv"
        fn.write_text("0.5,0\n")
        result = invoke(runner, "eval", "--policy", fn, "--instance", SMOKE_INSTANCE)
        assert result.output.strip() == "0.6125"

    def test_hardgen_optimum(self, runner, tmp_path, hardness_config):
        inst, policy = tmp_path / "hard.json", tmp_path / "opt.csv"
        result = invoke(
            runner, "hardgen", hardness_config, "--out", inst, "--optimal-policy", policy
        )
        assert result.exit_code == 0, result.output
        result = invoke(
            runner, "eval", "--policy", policy, "--instance", inst, "--objective", "revenue"
        )
        assert result.output.strip() == "0.25"

    def test_monte_carlo(self, runner, tmp_path):
        fn = tmp_path / "p.csv"
        fn.write_text("0.5,0\n")
        args = ("eval", "--policy", fn, "--instance", SMOKE_INSTANCE)
        exact = float(invoke(runner, *args).output)
        result = invoke(runner, *args, "--mode", "mc:100000:3", "--threads", 4)
        assert result.exit_code == 0, result.output
        mean, stderr = map(float, result.output.split())
        assert 0.0 < stderr < 0.01
        assert abs(mean - exact) <= 5.0 * stderr

    @pytest.mark.parametrize("mode", ["mc:1:3", "mc:100", "sometimes"])
    def test_bad_mode(self, runner, tmp_path, mode):
        fn = tmp_path / "p.csv"
        fn.write_text("0.5,0\n")
        result = invoke(
            runner, "eval", "--policy", fn, "--instance", SMOKE_INSTANCE, "--mode", mode
        )
        assert result.exit_code == EXIT_CONFIG


class Test_sample_and_learn:
    """Tests that ``ppl sample`` and ``ppl learn`` meet the following expectations:
    - Sampling with a fixed seed writes the same file twice.
    - The empirical DP learner writes a one-row policy and a sidecar.
    - SAA over change points writes per-segment prices into the sidecar.
    - Change points without SAA exit with status 2.
    - A search larger than the budget exits with status 3 and writes nothing.
    """

    @pytest.fixture(scope="function")
    def samples(self, runner, tmp_path):
        fn = tmp_path / "s.csv"
        result = invoke(
            runner, "sample", "--instance", SMOKE_INSTANCE, "-T", 200, "--seed", 4, "--out", fn
        )
        assert result.exit_code == 0, result.output
        return fn

    def test_sample_is_seeded(self, runner, tmp_path, samples):
        again = tmp_path / "again.csv"
        invoke(
            runner, "sample", "--instance", SMOKE_INSTANCE, "-T", 200, "--seed", 4, "--out", again
        )
        assert again.read_bytes() == samples.read_bytes()
        assert read_samples(samples).values.shape == (200, 2)

    def test_learn_empirical_dp(self, runner, tmp_path, samples):
        out = tmp_path / "p.csv"
        result = invoke(runner, "learn", "--samples", samples, "--out", out)
        assert result.exit_code == 0, result.output
        policy = read_policy(out)
        assert policy.n == 2
        assert policy.prices[1] == 0.0
        side = read_sidecar(out)
        assert (side["mode"], side["objective"], side["T"], side["n"]) == (
            "empirical-dp",
            "welfare",
            200,
            2,
        )

    def test_learn_saa(self, runner, tmp_path, samples):
        out = tmp_path / "p.csv"
        result = invoke(
            runner,
            "learn",
            "--samples",
            samples,
            "--mode",
            "saa",
            "--change-points",
            "1",
            "--objective",
            "revenue",
            "--out",
            out,
        )
        assert result.exit_code == 0, result.output
        side = json.loads((tmp_path / "p.json").read_text())
        assert side["change_points"] == [1]
        assert len(side["rho"]) == 2
        assert list(read_policy(out).prices) == [
            REJECT if p == "REJECT" else p for p in side["rho"]
        ]

    def test_change_points_need_saa(self, runner, tmp_path, samples):
        out = tmp_path / "p.csv"
        result = invoke(
            runner, "learn", "--samples", samples, "--change-points", "1", "--out", out
        )
        assert result.exit_code == EXIT_CONFIG
        assert not out.exists()

    def test_budget_overflow(self, runner, tmp_path, samples):
        out = tmp_path / "p.csv"
        result = invoke(
            runner, "learn", "--samples", samples, "--mode", "saa", "--budget", 1, "--out", out
        )
        assert result.exit_code == EXIT_OVERFLOW
        assert not out.exists()


class Test_run:
    """Tests that ``ppl run`` meets the following expectations:
    - It writes report.csv, summary.csv, meta.json and run.log.
    - Reports are byte-identical for 1 and 8 threads and when rerun from meta.json.
    - Malformed TOML exits with status 2 and writes nothing.
    - hardgen refuses experiments without a lower-bound instance.
    """

    def reports(self, out):
        return (out / "report.csv").read_bytes(), (out / "summary.csv").read_bytes()

    def test_reproducible(self, runner, tmp_path, hardness_config):
        one, eight, again = tmp_path / "one", tmp_path / "eight", tmp_path / "again"
        result = invoke(runner, "run", hardness_config, "--out", one, "--threads", 1)
        assert result.exit_code == 0, result.output
        assert {p.name for p in one.iterdir()} == {
            "report.csv",
            "summary.csv",
            "meta.json",
            "run.log",
        }
        invoke(runner, "run", hardness_config, "--out", eight, "--threads", 8)
        invoke(runner, "run", one / "meta.json", "--out", again)
        assert self.reports(eight) == self.reports(one)
        assert self.reports(again) == self.reports(one)

    def test_seed_override(self, runner, tmp_path, hardness_config):
        a, b = tmp_path / "a", tmp_path / "b"
        invoke(runner, "run", hardness_config, "--out", a)
        invoke(runner, "run", hardness_config, "--out", b, "--seed", 4)
        assert self.reports(a) != self.reports(b)
        assert json.loads((b / "meta.json").read_text())["config"]["seed"] == 4

    def test_malformed_toml(self, runner, tmp_path):
        fn = tmp_path / "bad.toml"
        fn.write_text('experiment = "regret-curve"\nschedule = [10,\n')
        out = tmp_path / "out"
        result = invoke(runner, "run", fn, "--out", out)
        assert result.exit_code == EXIT_CONFIG
        assert "error" in result.output
        assert not out.exists()

    def test_invalid_instance(self, runner, tmp_path):
        fn = tmp_path / "bad.toml"
        fn.write_text(
            'experiment = "correlated-hardness"\nschedule = [10]\n'
            '[instance]\nn = 6\nchange_points = [3]\nbits = ["High"]\n'
        )
        out = tmp_path / "out"
        result = invoke(runner, "run", fn, "--out", out)
        assert result.exit_code == EXIT_CONFIG
        assert not out.exists()

    def test_hardgen_refuses(self, runner, tmp_path):
        fn = tmp_path / "r.toml"
        fn.write_text('experiment = "regret-curve"\nschedule = [10]\n[instance]\nn = 3\n')
        result = invoke(runner, "hardgen", fn, "--out", tmp_path / "i.json")
        assert result.exit_code == EXIT_CONFIG

#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: test_runner
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/14/2023

Tests for pricelearning.experiments.runner.
"""

import json

import numpy as np
import pandas as pd
import pytest

import pricelearning.experiments.runner as rn
from pricelearning.core.hard_instances import hard_optimal_values
from pricelearning.enums import Objective
from pricelearning.exceptions import ConfigError, InvalidConfigError
from pricelearning.experiments.config import config_from_dict, load_config
from pricelearning.utils import PROJECT_ROOT_DIRECTORY


def make_config(tmp_path, experiment, schedule=None, trials=3, seed=11, **instance):
    d = {
        "experiment": experiment,
        "seed": seed,
        "trials": trials,
        "output": str(tmp_path / "out"),
        "instance": instance,
    }
    if schedule is not None:
        d["schedule"] = schedule
    return config_from_dict(d)


class Test_prepare:
    """Tests that prepare() meets the following expectations:
    - Random product instances follow the instance seed, or the run seed when none is given.
    - product-hardness has optimum 1/4 and keeps its configuration.
    - correlated-hardness carries the change-point set and the closed-form optimum.
    - An instance file holding a mixture is refused for product experiments.
    - Invalid hard-instance parameters raise before anything is written.
    """

    def test_instance_seed(self, tmp_path):
        a = rn.prepare(make_config(tmp_path, "regret-curve", [10], n=4, instance_seed=5))
        b = rn.prepare(make_config(tmp_path, "regret-curve", [10], seed=99, n=4, instance_seed=5))
        c = rn.prepare(make_config(tmp_path, "regret-curve", [10], seed=99, n=4))
        assert a.product == b.product
        assert not a.product == c.product

    def test_product_hardness(self, tmp_path):
        prep = rn.prepare(make_config(tmp_path, "product-hardness", [100], n=10, eps=1 / 32))
        assert prep.optimum == float(hard_optimal_values(10)[0]) == 0.25
        assert prep.hard.n == 10

    def test_correlated_hardness(self, tmp_path):
        cfg = make_config(
            tmp_path,
            "correlated-hardness",
            [80],
            n=12,
            eps=0.1,
            objective="revenue",
            change_points=[4, 8],
            bits=["High", "Low", "High"],
        )
        prep = rn.prepare(cfg)
        assert prep.cps.points == (4, 8)
        assert prep.optimum == pytest.approx((0.6 + 0.5 + 0.6) / 3, abs=1e-15)

    def test_mixture_file_refused(self, tmp_path):
        fn = tmp_path / "mix.json"
        fn.write_text(
            json.dumps(
                {
                    "kind": "mixture",
                    "components": [
                        {"weight": 0.5, "marginals": [{"support": [0.0], "probs": [1.0]}]},
                        {"weight": 0.5, "marginals": [{"support": [1.0], "probs": [1.0]}]},
                    ],
                }
            )
        )
        cfg = make_config(tmp_path, "regret-curve", [10], file=str(fn))
        with pytest.raises(ConfigError):
            rn.prepare(cfg)

    def test_invalid_bits(self, tmp_path):
        cfg = make_config(
            tmp_path, "correlated-hardness", [80], n=6, change_points=[3], bits=["High"]
        )
        with pytest.raises(InvalidConfigError):
            rn.prepare(cfg)
        assert not (tmp_path / "out").exists()


class Test_run_trials:
    """Tests that run_trials() meets the following expectations:
    - Rows come in (schedule, trial) order with the fixed report columns.
    - The frame is identical for 1 and 8 threads.
    - Welfare runs fill max_partial_sum; revenue runs leave it empty.
    - product-hardness adds a mistakes column.
    - goodset-fuzz finds no mismatches.
    """

    def test_order_and_columns(self, tmp_path):
        prep = rn.prepare(make_config(tmp_path, "regret-curve", [5, 50], trials=4, n=3))
        report = rn.run_trials(prep)
        assert report.columns.tolist() == rn.REPORT_COLUMNS
        assert report["T"].tolist() == [5] * 4 + [50] * 4
        assert report["trial"].tolist() == [0, 1, 2, 3] * 2
        assert report["max_partial_sum"].notna().all()

    @pytest.mark.parametrize(
        "experiment, schedule, instance",
        [
            ("regret-curve", [20, 200], {"n": 6, "objective": "revenue"}),
            ("product-hardness", [50], {"n": 8, "eps": 1 / 32}),
            ("correlated-hardness", [40], {"n": 9, "eps": 0.2, "change_points": [3, 6]}),
            ("goodset-fuzz", [50], {"n": 6}),
        ],
    )
    def test_threads_do_not_matter(self, tmp_path, experiment, schedule, instance):
        prep = rn.prepare(make_config(tmp_path, experiment, schedule, trials=10, **instance))
        pd.testing.assert_frame_equal(rn.run_trials(prep, 1), rn.run_trials(prep, 8))

    def test_revenue_has_no_partial_sum(self, tmp_path):
        prep = rn.prepare(make_config(tmp_path, "regret-curve", [20], n=3, objective="revenue"))
        assert rn.run_trials(prep)["max_partial_sum"].isna().all()

    def test_mistakes_column(self, tmp_path):
        prep = rn.prepare(make_config(tmp_path, "product-hardness", [200], n=6, eps=1 / 32))
        report = rn.run_trials(prep)
        assert "mistakes" in report.columns
        assert report["mistakes"].between(0, 6).all()

    @pytest.mark.parametrize("objective", list(Objective))
    def test_goodset_fuzz(self, tmp_path, objective):
        cfg = make_config(
            tmp_path, "goodset-fuzz", [500], trials=4, n=7, objective=objective.value
        )
        report = rn.run_trials(rn.prepare(cfg), threads=2)
        assert report["success"].all()
        assert (report["regret"] == 0.0).all()


class Test_summarize:
    """Tests that summarize() meets the following expectations:
    - One row per T in schedule order with the fixed summary columns.
    - The standard error uses ddof = 1 and is 0 for a single trial.
    """

    def test_rows(self):
        report = pd.DataFrame(
            {
                "T": [100, 100, 100, 10],
                "regret": [0.1, 0.2, 0.3, 0.5],
                "success": [True, False, True, True],
            }
        )
        summary = rn.summarize(report)
        assert summary.columns.tolist() == rn.SUMMARY_COLUMNS
        assert summary["T"].tolist() == [100, 10]
        first = summary.iloc[0]
        assert first["trials"] == 3
        assert first["mean_regret"] == pytest.approx(0.2, abs=1e-15)
        assert first["median_regret"] == 0.2
        assert first["stderr_regret"] == pytest.approx(0.1 / np.sqrt(3), abs=1e-15)
        assert first["success_frequency"] == pytest.approx(2 / 3, abs=1e-15)
        assert summary.iloc[1]["stderr_regret"] == 0.0


class Test_run_experiment:
    """Tests that run_experiment() meets the following expectations:
    - It writes report.csv, summary.csv and meta.json into the output directory.
    - Reports are byte-identical across reruns and across 1 and 8 threads.
    - meta.json holds the resolved config, and rerunning from it reproduces the reports.
    - Empty cells are written for missing values and booleans as 0/1.
    """

    def run_bytes(self, cfg, threads):
        rn.run_experiment(cfg, threads=threads)
        out = cfg.output
        with open(f"{out}/report.csv", "rb") as f:
            report = f.read()
        with open(f"{out}/summary.csv", "rb") as f:
            summary = f.read()
        return report, summary

    def test_files(self, tmp_path):
        cfg = make_config(tmp_path, "regret-curve", [10, 100], n=3, objective="revenue")
        summary = rn.run_experiment(cfg, threads=1)
        out = tmp_path / "out"
        assert {p.name for p in out.iterdir()} >= {"report.csv", "summary.csv", "meta.json"}
        assert len(summary) == 2
        lines = (out / "report.csv").read_text().splitlines()
        assert lines[0] == ",".join(rn.REPORT_COLUMNS)
        # revenue leaves max_partial_sum empty; success is 0 or 1
        fields = lines[1].split(",")
        assert fields[3] == ""
        assert fields[5] in ("0", "1")
        meta = json.loads((out / "meta.json").read_text())
        assert meta["config"]["experiment"] == "regret-curve"
        assert meta["version"] == "0.1"

    def test_byte_identical(self, tmp_path):
        cfg = make_config(tmp_path, "regret-curve", [10, 100], trials=6, n=5)
        first = self.run_bytes(cfg, 1)
        assert self.run_bytes(cfg, 1) == first
        assert self.run_bytes(cfg, 8) == first

    def test_rerun_from_meta(self, tmp_path):
        cfg = make_config(
            tmp_path, "correlated-hardness", [30], trials=5, n=8, change_points=[4], eps=0.2
        )
        first = self.run_bytes(cfg, 2)
        again = load_config(tmp_path / "out" / "meta.json", output=str(tmp_path / "rerun"))
        assert self.run_bytes(again, 1) == first

    def test_smoke_regret_curve(self, tmp_path):
        cfg = load_config(
            PROJECT_ROOT_DIRECTORY / "configs" / "smoke-regret-curve.toml",
            output=str(tmp_path / "smoke"),
        )
        summary = rn.run_experiment(cfg, threads=4)
        assert summary["T"].tolist() == [10, 100, 1000]
        medians = summary["median_regret"].tolist()
        assert medians[0] >= medians[1] >= medians[2]


class Test_correlated_separation:
    """Tests that SAA on the correlated decision-point instance (n = 40, |S| = 7, eps = 0.1)
    meets the following expectations:
    - With 8000 samples the regret is at most eps/2 in at least 90 of 100 trials and the mean
      regret stays below eps/20.
    - With 80 samples the mean regret exceeds eps/10 and failures outnumber those at 8000.
    """

    def test_separation(self, tmp_path):
        eps = 0.1
        cfg = make_config(
            tmp_path,
            "correlated-hardness",
            [80, 8000],
            trials=100,
            seed=2024,
            n=40,
            eps=eps,
            objective="revenue",
            change_points=[5, 10, 15, 20, 25, 30, 35],
            bits="random:17",
        )
        report = rn.run_trials(rn.prepare(cfg), threads=8)
        few = report[report["T"] == 80]
        many = report[report["T"] == 8000]
        assert many["success"].sum() >= 90
        assert many["regret"].mean() < eps / 20
        assert few["regret"].mean() > eps / 10
        assert (~few["success"]).sum() > (~many["success"]).sum()

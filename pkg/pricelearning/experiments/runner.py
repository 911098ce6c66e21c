#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: runner
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/12/2023

Runs an ExperimentConfig and writes its reports. The output directory is laid out as:

OUTPUT/
    report.csv      one row per (T, trial), in schedule then trial order
    summary.csv     one row per T
    meta.json       resolved config, library version, wall time
    run.log         log lines of the run

Every trial draws from its own seed, derive_seed(config.seed, schedule index, trial), so reports
are identical whatever the thread count.
"""

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

import pricelearning
from pricelearning.core.diagnostics import (
    error_process,
    good_set,
    max_partial_sum,
    member,
    simulate_objective,
)
from pricelearning.core.distributions import random_product_dist, sample_trajectories
from pricelearning.core.dp_policy import eval_exact, solve_dp
from pricelearning.core.hard_instances import (
    ProductHardConfig,
    correlated_hard_optimum,
    count_mistakes,
    gen_correlated_hard,
    gen_product_revenue_hard,
    hard_optimal_values,
    make_correlated_config,
    parse_bits,
)
from pricelearning.core.learners import ChangePointSet, expand, learn_product, learn_saa
from pricelearning.data.formats import product_of, read_instance
from pricelearning.enums import REJECT, Experiment, Objective
from pricelearning.exceptions import ConfigError
from pricelearning.utils import derive_seed, format_decimal, resolve_threads, uniform_block

logger = logging.getLogger(__name__)

INSTANCE_STREAM = 0xFFFFFFFF
REPORT_COLUMNS = ["trial", "seed", "T", "max_partial_sum", "regret", "success"]
SUMMARY_COLUMNS = [
    "T",
    "trials",
    "mean_regret",
    "median_regret",
    "stderr_regret",
    "success_frequency",
]
FUZZ_GRID = 8
FUZZ_MAX_SEGMENTS = 4


@dataclass(frozen=True)
class PreparedExperiment:
    """Everything a trial needs, built (and validated) before any file is written."""

    config: object
    source: object
    product: object
    optimum: float
    cps: Optional[ChangePointSet] = None
    hard: object = None


def _product_instance(cfg):
    inst = cfg.instance
    if inst.file is not None:
        src = read_instance(inst.file)
        pd_ = product_of(src)
        if pd_ is None:
            raise ConfigError("instance.file", "this experiment needs a product instance")
        return pd_
    seed = inst.instance_seed
    if seed is None:
        seed = derive_seed(cfg.seed, INSTANCE_STREAM)
    return random_product_dist(inst.n, inst.max_support, seed, inst.granularity)


def prepare(cfg):
    """Build the instance and its optimum; raises ConfigError or InvalidConfigError."""
    inst = cfg.instance
    kind = cfg.experiment
    if kind in (Experiment.REGRET_CURVE, Experiment.THEOREM1_FREQUENCY):
        pd_ = _product_instance(cfg)
        optimum = solve_dp(pd_, inst.objective).optimum
        return PreparedExperiment(cfg, pd_, pd_, optimum)
    if kind is Experiment.PRODUCT_HARDNESS:
        bits = parse_bits(inst.bits if inst.bits is not None else "random:0", inst.n)
        hard = ProductHardConfig(inst.n, inst.eps, bits)
        pd_ = gen_product_revenue_hard(hard)
        return PreparedExperiment(cfg, pd_, pd_, float(hard_optimal_values(inst.n)[0]), hard=hard)
    if kind is Experiment.CORRELATED_HARDNESS:
        bits = inst.bits if inst.bits is not None else "random:0"
        hard = make_correlated_config(inst.n, inst.change_points, inst.eps, inst.objective, bits)
        value, _ = correlated_hard_optimum(hard)
        return PreparedExperiment(cfg, gen_correlated_hard(hard), None, value, hard.cps, hard)
    return PreparedExperiment(cfg, None, None, 0.0)


def _trial_row(trial, seed, T, partial, regret, success):
    return {
        "trial": trial,
        "seed": str(seed),
        "T": T,
        "max_partial_sum": partial,
        "regret": regret,
        "success": bool(success),
    }


def _product_trial(prep, T, trial, seed):
    cfg = prep.config
    objective = cfg.instance.objective
    s = sample_trajectories(prep.source, T, seed)
    policy, _ = learn_product(s, objective)
    regret = prep.optimum - eval_exact(prep.source, policy, objective)
    partial = None
    if objective is Objective.WELFARE:
        partial = max_partial_sum(error_process(s, prep.product))
    row = _trial_row(trial, seed, T, partial, regret, regret <= cfg.instance.eps)
    if cfg.experiment is Experiment.PRODUCT_HARDNESS:
        row["mistakes"] = count_mistakes(policy, prep.hard, strict=False)
    return row


def _correlated_trial(prep, T, trial, seed):
    cfg = prep.config
    objective = cfg.instance.objective
    s = sample_trajectories(prep.source, T, seed)
    rho = learn_saa(s, prep.cps, objective)
    regret = prep.optimum - eval_exact(prep.source, expand(prep.cps, rho), objective)
    return _trial_row(trial, seed, T, None, regret, regret <= cfg.instance.eps / 2.0)


def _fuzz_case(u, n, objective):
    """One random (v, z, S, rho) from a row of uniforms, values on a coarse grid."""
    v = np.floor(u[:n] * (FUZZ_GRID + 1)) / FUZZ_GRID
    k = 1 + int(u[n] * min(FUZZ_MAX_SEGMENTS, n))
    order = np.argsort(u[n + 1 : 2 * n])
    points = tuple(sorted(int(p) + 1 for p in order[: k - 1]))
    cps = ChangePointSet(n, points)
    z = math.floor(u[2 * n] * (FUZZ_GRID + 2)) / FUZZ_GRID - 1.0 / FUZZ_GRID
    rho = []
    for j in range(cps.k):
        x = u[2 * n + 1 + j]
        tick = min(math.floor(x / 0.9 * (FUZZ_GRID + 1)), FUZZ_GRID)
        rho.append(REJECT if x > 0.9 else tick / FUZZ_GRID)
    g = good_set(v, z, cps, objective)
    return member(g, rho) == (simulate_objective(v, cps, rho, objective) >= z)


def _fuzz_trial(prep, cases, trial, seed):
    n = prep.config.instance.n
    objective = prep.config.instance.objective
    u = uniform_block(seed, np.arange(cases), 2 * n + 1 + FUZZ_MAX_SEGMENTS)
    mismatches = sum(not _fuzz_case(row, n, objective) for row in u)
    return _trial_row(trial, seed, cases, None, mismatches / cases, mismatches == 0)


TRIALS = {
    Experiment.REGRET_CURVE: _product_trial,
    Experiment.THEOREM1_FREQUENCY: _product_trial,
    Experiment.PRODUCT_HARDNESS: _product_trial,
    Experiment.CORRELATED_HARDNESS: _correlated_trial,
    Experiment.GOODSET_FUZZ: _fuzz_trial,
}


def run_trials(prep, threads=1):
    """Report rows in (schedule, trial) order."""
    cfg = prep.config
    trial_fn = TRIALS[cfg.experiment]
    tasks = [
        (T, trial, derive_seed(cfg.seed, j, trial))
        for j, T in enumerate(cfg.schedule)
        for trial in range(cfg.trials)
    ]

    def _run(task):
        return trial_fn(prep, *task)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run, tasks))
    else:
        rows = [_run(task) for task in tasks]
    return pd.DataFrame(rows)


def summarize(report):
    rows = []
    for T, grp in report.groupby("T", sort=False):
        regret = grp["regret"].to_numpy(dtype=np.float64)
        count = regret.size
        stderr = float(np.std(regret, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        rows.append(
            {
                "T": T,
                "trials": count,
                "mean_regret": math.fsum(regret) / count,
                "median_regret": float(np.median(regret)),
                "stderr_regret": stderr,
                "success_frequency": float(grp["success"].sum()) / count,
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def _cell(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format_decimal(x)


def _formatted(df, columns):
    columns = columns + [c for c in df.columns if c not in columns]
    return pd.DataFrame({c: [_cell(x) for x in df[c]] for c in columns}, columns=columns)


def write_reports(report, summary, out):
    out = Path(out)
    _formatted(report, REPORT_COLUMNS).to_csv(out / "report.csv", index=False, lineterminator="\n")
    _formatted(summary, SUMMARY_COLUMNS).to_csv(
        out / "summary.csv", index=False, lineterminator="\n"
    )


def write_meta(cfg, out, wall_time):
    meta = {
        "config": cfg.to_dict(),
        "version": pricelearning.__version__,
        "wall_time_seconds": wall_time,
    }
    with open(Path(out) / "meta.json", "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")


def run_experiment(cfg, threads=None, prep=None):
    """Run ``cfg`` and write report.csv, summary.csv and meta.json; returns the summary frame."""
    if prep is None:
        prep = prepare(cfg)
    threads = resolve_threads(threads, fallback=cfg.threads or 1)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    logger.info(
        "running %s: schedule=%s trials=%d threads=%d",
        cfg.experiment.value,
        list(cfg.schedule),
        cfg.trials,
        threads,
    )
    report = run_trials(prep, threads)
    summary = summarize(report)
    for _, row in summary.iterrows():
        logger.info(
            "T=%s mean_regret=%.6g success_frequency=%.4g",
            row["T"],
            row["mean_regret"],
            row["success_frequency"],
        )
    write_reports(report, summary, out)
    write_meta(cfg, out, time.perf_counter() - start)
    return summary


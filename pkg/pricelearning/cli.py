#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: cli
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/15/2023

Command line for pricelearning, installed as ``ppl``.

    ppl run CONFIG              run an experiment definition
    ppl eval                    score a policy file on an instance file
    ppl sample                  draw a SampleSet from an instance file
    ppl learn                   learn a policy from a SampleSet file
    ppl hardgen CONFIG          write the lower-bound instance of a definition

Exit status: 0 on success, 2 on a configuration or input error (nothing is written), 3 when an
exhaustive search would exceed its budget, 1 on an I/O failure.
"""

import functools
import logging
import sys
from pathlib import Path

import click

from pricelearning import __version__
from pricelearning.core.distributions import sample_trajectories
from pricelearning.core.dp_policy import eval_exact, eval_monte_carlo
from pricelearning.core.hard_instances import correlated_hard_optimum, optimal_hard_policy
from pricelearning.core.learners import (
    DEFAULT_BUDGET,
    ChangePointSet,
    expand,
    learn_product,
    learn_saa_scored,
)
from pricelearning.data.formats import (
    read_instance,
    read_policy,
    read_samples,
    write_distribution_table,
    write_instance,
    write_policy,
    write_samples,
    write_sidecar,
)
from pricelearning.enums import Experiment, Objective
from pricelearning.exceptions import ConfigError, GridOverflowError, PriceLearningError
from pricelearning.experiments.config import load_config
from pricelearning.experiments.runner import prepare, run_experiment
from pricelearning.utils import THREADS_ENV_VAR, configure_logging, resolve_threads

logger = logging.getLogger(__name__)

EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
LEARN_MODES = ("empirical-dp", "saa")

objective_option = click.option(
    "--objective",
    type=click.Choice([o.value for o in Objective]),
    default=Objective.WELFARE.value,
    show_default=True,
)
threads_option = click.option(
    "--threads",
    type=click.IntRange(min=1),
    envvar=THREADS_ENV_VAR,
    default=None,
    help=f"Worker threads (falls back to ${THREADS_ENV_VAR}).",
)


def exit_codes(func):
    """Map library failures onto the documented exit statuses."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GridOverflowError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(EXIT_OVERFLOW)
        except PriceLearningError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(EXIT_CONFIG)
        except OSError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def parse_change_points(text):
    if text is None or not text.strip():
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(
            "--change-points", f"expected comma-separated integers, got {text!r}"
        ) from None


def parse_mode(text):
    """'exact' or 'mc:T:seed' -> (None, None) or (T, seed)."""
    if text == "exact":
        return None, None
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "mc":
        try:
            T, seed = int(parts[1]), int(parts[2])
        except ValueError:
            pass
        else:
            if T >= 2 and seed >= 0:
                return T, seed
    raise ConfigError("--mode", f"expected 'exact' or 'mc:T:seed' with T >= 2, got {text!r}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages to stderr.")
@click.version_option(version=__version__, prog_name="ppl")
def cli(verbose):
    """Learn posted-price policies from samples and run the accompanying experiments."""
    configure_logging(logging.DEBUG if verbose else logging.WARNING)


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override the seed.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@threads_option
@click.pass_context
@exit_codes
def run(ctx, config, seed, out, threads):
    """Run the experiment defined in CONFIG (TOML, or JSON including a previous meta.json)."""
    cfg = load_config(config, seed=seed, output=str(out) if out is not None else None)
    prep = prepare(cfg)
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    level = logging.DEBUG if ctx.parent.params.get("verbose") else logging.WARNING
    configure_logging(level, logfile=out_dir / "run.log")
    try:
        summary = run_experiment(cfg, threads=threads, prep=prep)
    finally:
        configure_logging(level)
    click.echo(f"wrote {len(summary)} summary rows to {out_dir}")


@cli.command(name="eval")
@click.option("--policy", "policy_file", required=True, type=click.Path(path_type=Path))
@click.option("--instance", "instance_file", required=True, type=click.Path(path_type=Path))
@objective_option
@click.option("--mode", default="exact", show_default=True, help="'exact' or 'mc:T:seed'.")
@threads_option
@exit_codes
def eval_command(policy_file, instance_file, objective, mode, threads):
    """Print the expected objective of a policy on an instance."""
    T, seed = parse_mode(mode)
    policy = read_policy(policy_file)
    src = read_instance(instance_file)
    if T is None:
        click.echo(format(eval_exact(src, policy, objective), ".12g"))
    else:
        mean, stderr = eval_monte_carlo(
            src, policy, objective, T, seed, threads=resolve_threads(threads)
        )
        click.echo(f"{format(mean, '.12g')} {format(stderr, '.12g')}")


@cli.command()
@click.option("--instance", "instance_file", required=True, type=click.Path(path_type=Path))
@click.option("-T", "--trajectories", "T", required=True, type=click.IntRange(min=1))
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@threads_option
@exit_codes
def sample(instance_file, T, seed, out, threads):
    """Draw T trajectories from an instance into a .csv, .jsonl or .h5 SampleSet file."""
    src = read_instance(instance_file)
    s = sample_trajectories(src, T, seed, threads=resolve_threads(threads))
    write_samples(s, out)
    click.echo(f"wrote {s.T} x {s.n} samples to {out}")


@cli.command()
@click.option("--samples", "samples_file", required=True, type=click.Path(path_type=Path))
@objective_option
@click.option("--change-points", default=None, help="Comma-separated 0-based change points.")
@click.option("--mode", type=click.Choice(LEARN_MODES), default="empirical-dp", show_default=True)
@click.option("--budget", type=click.IntRange(min=1), default=DEFAULT_BUDGET, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@exit_codes
def learn(samples_file, objective, change_points, mode, budget, out):
    """Learn a policy from a SampleSet file and write it as a one-row CSV plus a JSON sidecar."""
    s = read_samples(samples_file)
    objective = Objective(objective)
    points = parse_change_points(change_points)
    if mode == "empirical-dp":
        if points:
            raise ConfigError("--change-points", "only used with --mode saa")
        policy, result = learn_product(s, objective)
        extra = {"score": result.optimum}
    else:
        cps = ChangePointSet(s.n, points)
        rho, score = learn_saa_scored(s, cps, objective, budget)
        policy = expand(cps, rho)
        extra = {"score": score, "rho": list(rho.rho)}
    write_policy(policy, out)
    write_sidecar(
        out,
        objective=objective.value,
        mode=mode,
        T=s.T,
        n=s.n,
        change_points=list(points),
        **extra,
    )
    click.echo(f"wrote {policy.n}-buyer policy to {out}")


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--table", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option(
    "--optimal-policy",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Also write the instance's optimal policy.",
)
@exit_codes
def hardgen(config, out, table, optimal_policy):
    """Write the product-hardness or correlated-hardness instance of CONFIG as instance JSON."""
    cfg = load_config(config)
    if cfg.experiment not in (Experiment.PRODUCT_HARDNESS, Experiment.CORRELATED_HARDNESS):
        raise ConfigError("experiment", "hardgen needs product-hardness or correlated-hardness")
    prep = prepare(cfg)
    write_instance(prep.source, out)
    if table is not None:
        write_distribution_table(prep.source, table)
    if optimal_policy is not None:
        if cfg.experiment is Experiment.PRODUCT_HARDNESS:
            policy = optimal_hard_policy(prep.hard)
        else:
            policy = expand(prep.cps, correlated_hard_optimum(prep.hard)[1])
        write_policy(policy, optimal_policy)
    click.echo(f"wrote {cfg.experiment.value} instance to {out}")


if __name__ == "__main__":
    cli()

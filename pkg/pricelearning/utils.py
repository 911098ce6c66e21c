#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: utils
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Shared helpers: project paths, logging setup, thread-count resolution, the integer mix behind
every seeded random stream, and the decimal formatting used in reports.
"""

import logging
import os
from pathlib import Path

import numpy as np

PROJECT_ROOT_DIRECTORY = Path(__file__).parent.parent
THREADS_ENV_VAR = "PPL_THREADS"
LOG_FORMAT = "%(asctime)s -- %(levelname)s -- %(name)s -- %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)


def configure_logging(level=logging.WARNING, logfile=None, file_level=logging.INFO):
    """Install the stream handler (and optionally a file handler) on the package logger.

    Calling again replaces the handlers, which also closes a previous log file.
    """
    root = logging.getLogger("pricelearning")
    root.setLevel(min(level, file_level) if logfile is not None else level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    stream = logging.StreamHandler()
    stream.setFormatter(formatter)
    stream.setLevel(level)
    root.addHandler(stream)
    if logfile is not None:
        filehandler = logging.FileHandler(logfile, mode="a", encoding="utf-8")
        filehandler.setFormatter(formatter)
        filehandler.setLevel(file_level)
        root.addHandler(filehandler)
    return root


def resolve_threads(threads=None, fallback=1):
    """Explicit value first, then the PPL_THREADS environment variable, then ``fallback``."""
    if threads is None:
        env = os.environ.get(THREADS_ENV_VAR)
        threads = int(env) if env else fallback
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"Thread count must be at least 1, got {threads}.")
    return threads


def _mix64(z):
    # splitmix64 finalizer; uint64 array arithmetic wraps modulo 2**64.
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def derive_seed(seed, *indices):
    """Fold integer indices into a 64-bit seed, e.g. ``derive_seed(seed, t_index, trial)``."""
    z = np.array([int(seed) & _MASK64], dtype=np.uint64)
    for index in indices:
        z = _mix64(z ^ _mix64(np.array([int(index) & _MASK64], dtype=np.uint64) + _GOLDEN))
    return int(z[0])


def uniform_block(seed, rows, width):
    """Uniforms in [0, 1) for the given row indices, ``width`` draws per row.

    Entry (t, c) is a pure function of (seed, t, c): the counter ``t * width + c + 1`` is scaled
    by the 64-bit golden ratio, offset by the mixed seed and passed through the splitmix64
    finalizer; the top 53 bits become the mantissa. Any partition of the rows into blocks
    therefore reproduces the sequential output.
    """
    rows = np.asarray(rows, dtype=np.uint64).reshape(-1)
    key = _mix64(np.array([int(seed) & _MASK64], dtype=np.uint64))
    counters = rows[:, None] * np.uint64(width) + np.arange(width, dtype=np.uint64)[None, :]
    z = _mix64(key + (counters + np.uint64(1)) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


def format_decimal(x):
    """Shortest round-trip decimal for floats; integers and strings pass through."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    return repr(x)

#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: formats
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/8/2023

File formats for samples, policies and instances.

SampleSet files are picked by suffix:

    .csv            T rows of n comma-separated values, no header
    .jsonl          one JSON array of n values per line
    .h5 / .hdf5     an HDF5 archive laid out as

HDF5_FILE/
    samples/
        values      T-by-n float64, gzip, resizable along T
        (attrs: T, n)

Policy files are a single CSV row of n prices with the token REJECT for a rejected buyer. A JSON
sidecar next to a learned policy records how it was learned. Instances are JSON documents holding
either a product distribution or a finite mixture of product components; a flat distribution
table can be written as CSV for inspection.
"""

import json
import logging
from pathlib import Path

import h5py
import numpy as np
import pandas as pd

from pricelearning.core.distributions import (
    CorrelatedSource,
    ProductDist,
    SampleSet,
    as_source,
    make_discrete,
    mixture_source,
    product_source,
)
from pricelearning.core.dp_policy import PricePolicy
from pricelearning.enums import REJECT, SourceKind, is_reject
from pricelearning.exceptions import (
    EmptySampleSetError,
    LengthMismatchError,
    OutOfRangeError,
    PriceLearningError,
)
from pricelearning.utils import format_decimal

logger = logging.getLogger(__name__)

REJECT_TOKEN = "REJECT"
SAMPLES_GROUP = "samples"
VALUES_DATASET = "values"
CSV_SUFFIXES = (".csv",)
JSONL_SUFFIXES = (".jsonl",)
HDF5_SUFFIXES = (".h5", ".hdf5")


def _suffix(path):
    suffix = Path(path).suffix.lower()
    if suffix not in CSV_SUFFIXES + JSONL_SUFFIXES + HDF5_SUFFIXES:
        raise PriceLearningError(
            f"unrecognized sample file suffix {suffix!r}; use .csv, .jsonl, .h5 or .hdf5"
        )
    return suffix


def _as_matrix(rows, source):
    widths = {len(r) for r in rows}
    if not rows:
        raise EmptySampleSetError(f"{source} holds no sample rows")
    if len(widths) != 1:
        raise LengthMismatchError(f"{source} rows have differing lengths {sorted(widths)}")
    try:
        return np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as err:
        raise OutOfRangeError(f"{source} holds a non-numeric value: {err}") from None


def read_samples_csv(fn):
    try:
        df = pd.read_csv(fn, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise EmptySampleSetError(f"{fn} holds no sample rows") from None
    except pd.errors.ParserError as err:
        raise LengthMismatchError(f"{fn} is not rectangular: {err}") from None
    if df.isna().values.any() or (df == "").values.any():
        raise LengthMismatchError(f"{fn} is not rectangular: some rows are short")
    try:
        values = df.values.astype(np.float64)
    except ValueError as err:
        raise OutOfRangeError(f"{fn} holds a non-numeric value: {err}") from None
    return SampleSet(values)


def write_samples_csv(s, fn):
    df = pd.DataFrame([[format_decimal(x) for x in row] for row in s.values])
    df.to_csv(fn, header=False, index=False, lineterminator="\n")


def read_samples_jsonl(fn):
    rows = []
    with open(fn, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as err:
                raise LengthMismatchError(f"{fn} line {lineno}: {err.msg}") from None
            if not isinstance(row, list):
                raise LengthMismatchError(f"{fn} line {lineno}: expected a JSON array")
            rows.append(row)
    return SampleSet(_as_matrix(rows, fn))


def write_samples_jsonl(s, fn):
    with open(fn, "w", encoding="utf-8", newline="\n") as f:
        for row in s.values:
            f.write("[" + ",".join(format_decimal(x) for x in row) + "]\n")


def create_samples_group(f, values):
    """Write ``values`` into /samples/values, resizing an existing dataset in place."""
    grp = f.require_group(SAMPLES_GROUP)
    if VALUES_DATASET in grp:
        dset = grp[VALUES_DATASET]
        if dset.shape[1] != values.shape[1]:
            raise LengthMismatchError(
                f"archive holds {dset.shape[1]} buyers, samples have {values.shape[1]}"
            )
        dset.resize(values.shape[0], axis=0)
        dset[:] = values
    else:
        dset = grp.create_dataset(
            VALUES_DATASET,
            data=values,
            shape=values.shape,
            dtype=np.float64,
            maxshape=(None, values.shape[1]),
            compression="gzip",
        )
    grp.attrs["T"] = values.shape[0]
    grp.attrs["n"] = values.shape[1]
    return dset


def append_samples_h5(s, fn):
    """Append rows of ``s`` after any rows already archived in ``fn``."""
    with h5py.File(fn, "a") as f:
        if SAMPLES_GROUP in f and VALUES_DATASET in f[SAMPLES_GROUP]:
            old = f[SAMPLES_GROUP][VALUES_DATASET][:]
            if old.shape[1] != s.n:
                raise LengthMismatchError(
                    f"archive holds {old.shape[1]} buyers, samples have {s.n}"
                )
            values = np.vstack([old, s.values]) if old.size else s.values
        else:
            values = s.values
        create_samples_group(f, np.asarray(values))
    return SampleSet(values)


def write_samples_h5(s, fn):
    with h5py.File(fn, "w") as f:
        create_samples_group(f, np.asarray(s.values))


def read_samples_h5(fn):
    with h5py.File(fn, "r") as f:
        if SAMPLES_GROUP not in f or VALUES_DATASET not in f[SAMPLES_GROUP]:
            raise EmptySampleSetError(f"{fn} has no /{SAMPLES_GROUP}/{VALUES_DATASET} dataset")
        values = f[SAMPLES_GROUP][VALUES_DATASET][:]
    if values.ndim != 2:
        raise LengthMismatchError(f"{fn} holds a dataset of shape {values.shape}")
    return SampleSet(values)


def read_samples(fn):
    suffix = _suffix(fn)
    if suffix in CSV_SUFFIXES:
        s = read_samples_csv(fn)
    elif suffix in JSONL_SUFFIXES:
        s = read_samples_jsonl(fn)
    else:
        s = read_samples_h5(fn)
    logger.debug("read %d x %d samples from %s", s.T, s.n, fn)
    return s


def write_samples(s, fn):
    suffix = _suffix(fn)
    if suffix in CSV_SUFFIXES:
        write_samples_csv(s, fn)
    elif suffix in JSONL_SUFFIXES:
        write_samples_jsonl(s, fn)
    else:
        write_samples_h5(s, fn)
    logger.debug("wrote %d x %d samples to %s", s.T, s.n, fn)


def _parse_price(token, fn):
    token = token.strip()
    if token.upper() == REJECT_TOKEN:
        return REJECT
    try:
        return float(token)
    except ValueError:
        raise OutOfRangeError(f"{fn}: {token!r} is neither a price nor {REJECT_TOKEN}") from None


def read_policy(fn):
    try:
        df = pd.read_csv(fn, header=None, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise LengthMismatchError(f"{fn} holds no prices") from None
    except pd.errors.ParserError as err:
        raise LengthMismatchError(f"{fn} is not a single row of prices: {err}") from None
    if df.shape[0] != 1:
        raise LengthMismatchError(f"{fn} must hold exactly one row of prices, found {df.shape[0]}")
    return PricePolicy(tuple(_parse_price(t, fn) for t in df.iloc[0]))


def policy_tokens(policy):
    return [REJECT_TOKEN if is_reject(p) else format_decimal(p) for p in policy.prices]


def write_policy(policy, fn):
    pd.DataFrame([policy_tokens(policy)]).to_csv(
        fn, header=False, index=False, lineterminator="\n"
    )


def sidecar_path(fn):
    return Path(fn).with_suffix(".json")


def write_sidecar(fn, **fields):
    """Write ``fields`` as the JSON sidecar of policy file ``fn``; REJECT becomes its token."""

    def _default(x):
        if is_reject(x):
            return REJECT_TOKEN
        if isinstance(x, (np.integer,)):
            return int(x)
        if isinstance(x, (np.floating,)):
            return float(x)
        raise TypeError(f"cannot serialize {type(x).__name__}")

    path = sidecar_path(fn)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(fields, f, indent=2, default=_default)
        f.write("\n")
    return path


def read_sidecar(fn):
    with open(sidecar_path(fn), "r", encoding="utf-8") as f:
        return json.load(f)


def _marginal_to_dict(dist):
    return {"support": [float(x) for x in dist.support], "probs": [float(p) for p in dist.probs]}


def _marginal_from_dict(d, where):
    try:
        return make_discrete(d["support"], d["probs"])
    except (KeyError, TypeError):
        raise LengthMismatchError(f"{where} needs 'support' and 'probs' lists") from None


def instance_to_dict(src):
    src = as_source(src)
    if src.kind is SourceKind.PRODUCT:
        return {
            "kind": SourceKind.PRODUCT.value,
            "marginals": [_marginal_to_dict(m) for m in src.components[0][1]],
        }
    return {
        "kind": SourceKind.MIXTURE.value,
        "components": [
            {"weight": w, "marginals": [_marginal_to_dict(m) for m in pd_]}
            for w, pd_ in src.components
        ],
    }


def instance_from_dict(d):
    if not isinstance(d, dict):
        raise PriceLearningError("an instance must be a JSON object")
    try:
        kind = SourceKind(d.get("kind", SourceKind.PRODUCT.value))
    except (AttributeError, ValueError):
        raise PriceLearningError(f"unknown instance kind in {d!r:.80}") from None
    if kind is SourceKind.PRODUCT:
        marginals = d.get("marginals") or []
        pd_ = ProductDist(
            tuple(_marginal_from_dict(m, f"marginal {i}") for i, m in enumerate(marginals))
        )
        return product_source(pd_)
    components = []
    for c, comp in enumerate(d.get("components") or []):
        marginals = [
            _marginal_from_dict(m, f"component {c} marginal {i}")
            for i, m in enumerate(comp.get("marginals") or [])
        ]
        components.append((comp.get("weight", 0.0), marginals))
    return mixture_source(components)


def write_instance(src, fn):
    with open(fn, "w", encoding="utf-8") as f:
        json.dump(instance_to_dict(src), f, indent=2)
        f.write("\n")


def read_instance(fn):
    """CorrelatedSource stored in ``fn``."""
    with open(fn, "r", encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as err:
            raise PriceLearningError(f"{fn} line {err.lineno}: {err.msg}") from None
    return instance_from_dict(d)


def product_of(src):
    """The ProductDist behind a product source, or None for a mixture."""
    if isinstance(src, ProductDist):
        return src
    if isinstance(src, CorrelatedSource) and src.kind is SourceKind.PRODUCT:
        return src.components[0][1]
    return None


def distribution_table(src):
    """One row per (component, buyer, support point)."""
    rows = []
    for c, (w, pd_) in enumerate(as_source(src).components):
        for i, dist in enumerate(pd_):
            for value, prob in zip(dist.support, dist.probs):
                rows.append(
                    {"component": c, "weight": w, "buyer": i, "value": value, "prob": prob}
                )
    return pd.DataFrame(rows, columns=["component", "weight", "buyer", "value", "prob"])


def write_distribution_table(src, fn):
    df = distribution_table(src).apply(lambda col: col.map(format_decimal))
    df.to_csv(fn, index=False, lineterminator="\n")

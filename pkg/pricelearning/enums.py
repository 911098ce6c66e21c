#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: enums
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Enumerations shared across the package, plus the REJECT price sentinel.
"""

import enum


class Objective(enum.Enum):
    """
    WELFARE - value of the item to the winning buyer (0 if unsold)
    REVENUE - price paid by the winning buyer (0 if unsold)
    """

    WELFARE = "welfare"
    REVENUE = "revenue"


class Bit(enum.Enum):
    """
    HIGH - the buyer (or decision point) draws from the High distribution
    LOW - the buyer (or decision point) draws from the Low distribution
    """

    HIGH = "High"
    LOW = "Low"

    def flipped(self):
        return Bit.LOW if self is Bit.HIGH else Bit.HIGH


class SourceKind(enum.Enum):
    """
    PRODUCT - independent marginals, one component of weight 1
    MIXTURE - finite mixture of product components
    """

    PRODUCT = "product"
    MIXTURE = "mixture"


class SequenceLaw(enum.Enum):
    """
    DETERMINISTIC_SPLIT - Y_i = 1/n for every i
    BERNOULLI_CASCADE - Y_i takes the whole remaining budget with probability q, else 0
    UNIFORM_FRACTION - Y_i is a uniform fraction of the remaining budget
    """

    DETERMINISTIC_SPLIT = "deterministic-split"
    BERNOULLI_CASCADE = "bernoulli-cascade"
    UNIFORM_FRACTION = "uniform-fraction"


class Experiment(enum.Enum):
    """
    REGRET_CURVE - exact regret of the empirical-DP learner over a schedule of sample counts
    THEOREM1_FREQUENCY - success frequency of welfare learning at the sample-size bound
    PRODUCT_HARDNESS - revenue learning on the High/Low product instance
    CORRELATED_HARDNESS - SAA learning on the correlated decision-point instance
    GOODSET_FUZZ - good-set membership against direct simulation
    """

    REGRET_CURVE = "regret-curve"
    THEOREM1_FREQUENCY = "theorem1-frequency"
    PRODUCT_HARDNESS = "product-hardness"
    CORRELATED_HARDNESS = "correlated-hardness"
    GOODSET_FUZZ = "goodset-fuzz"


class _Reject:
    """Price sentinel: the item is never offered to this buyer at an attainable price."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "REJECT"

    def __str__(self):
        return "REJECT"

    def __reduce__(self):
        return (_Reject, ())


REJECT = _Reject()


def is_reject(price):
    return price is REJECT


def price_sort_key(price):
    """Ascending numeric order with REJECT last."""
    return (1, 0.0) if price is REJECT else (0, float(price))

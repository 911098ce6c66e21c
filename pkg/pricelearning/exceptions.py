#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: exceptions
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Exception hierarchy. Everything derives from ValueError so callers that already guard against
bad arguments keep working.
"""


class PriceLearningError(ValueError):
    """Base class for all library errors."""


class NonNormalizedError(PriceLearningError):
    """Probabilities do not sum to one within tolerance."""


class OutOfRangeError(PriceLearningError):
    """A value or price lies outside [0, 1]."""


class NegativeProbabilityError(PriceLearningError):
    pass


class IndexOutOfRangeError(PriceLearningError):
    pass


class LengthMismatchError(PriceLearningError):
    """Vector lengths or matrix widths disagree."""


class EmptySampleSetError(PriceLearningError):
    pass


class GridOverflowError(PriceLearningError):
    """An exhaustive search would exceed its evaluation budget."""


class NonCanonicalPriceError(PriceLearningError):
    pass


class DomainError(PriceLearningError):
    pass


class InvalidConfigError(PriceLearningError):
    """A hard-instance configuration violates its invariants."""


class UnsupportedGeneratorError(PriceLearningError):
    pass


class ConfigError(PriceLearningError):
    """An experiment or command-line configuration could not be parsed or validated."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")

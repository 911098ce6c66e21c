#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: __init__.py
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Learning posted-price policies from sampled buyer-value trajectories.
"""

__version__ = "0.1"

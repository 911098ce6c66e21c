#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: __init__.py
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Distributions, dynamic programs, learners, lower-bound instances and diagnostics.
"""

#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: __init__.py
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/8/2023

Tests for pricelearning.data.
"""

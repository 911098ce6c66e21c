#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: setup.py
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Script for setup of pricelearning.
"""

from setuptools import find_packages, setup

setup(
    name="pricelearning",
    version="0.1",
    description="Learning posted-price policies from sampled buyer values",
    author="Ryan Cardenas",
    packages=find_packages(exclude=["*.tests"]),
    python_requires=">=3.9",
    install_requires=["numpy", "pandas>=1.5", "h5py", "click>=8.1", "tomli"],
    extras_require={"dev": ["pytest", "black"]},
    entry_points={"console_scripts": ["ppl=pricelearning.cli:cli"]},
)

#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is a py.test configuration file that adds the '--loglevel' and '--runslow' options. Tests
marked as 'slow' (large rasters, fine polygons) are skipped unless '--runslow' is given.
"""

import pytest

def pytest_addoption(parser):
    """Add custom pytest options."""

    parser.addoption("--loglevel", action="store", default="WARNING", help="Set logging level.")
    text = "Run the slow tests (fine rasters and polygons)."
    parser.addoption("--runslow", action="store_true", default=False, help=text)

def pytest_configure(config):
    """Register the custom markers."""
    config.addinivalue_line("markers", "slow: the test takes long, run it with '--runslow'")

def pytest_collection_modifyitems(config, items):
    """Skip the slow tests unless '--runslow' was given."""

    if config.getoption("--runslow"):
        return

    skip = pytest.mark.skip(reason="slow test, use '--runslow' to run it")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)

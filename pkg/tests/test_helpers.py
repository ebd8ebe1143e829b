#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is a 'py.test' test for the Helpers module: real number parsing, the worker thread cap and
the seeded work chunks.
"""

import sys
import logging

import joblib
import pytest
from snowlibs import Helpers, Logging
from snowlibs.Exceptions import Error

_LOG = logging.getLogger()
try:
    _LOG_LEVEL = sys.argv[sys.argv.index("--loglevel") + 1].upper()
    Logging.setup_logger(loglevel=getattr(Logging, _LOG_LEVEL))
except ValueError:
    pass

def test_parse_real():
    """Decimal numbers and fractions."""

    assert Helpers.parse_real("1/3") == pytest.approx(1 / 3)
    assert Helpers.parse_real(" 2 / 7 ") == pytest.approx(2 / 7)
    assert Helpers.parse_real("0.3") == 0.3
    assert Helpers.parse_real(3) == 3.0
    for bad in ("1/0", "third", ""):
        with pytest.raises(Error):
            Helpers.parse_real(bad)

def test_worker_count(monkeypatch):
    """The environment variable caps the amount of worker threads."""

    monkeypatch.delenv(Helpers.THREADS_ENVVAR, raising=False)
    assert Helpers.get_worker_count() == joblib.cpu_count()

    monkeypatch.setenv(Helpers.THREADS_ENVVAR, "1")
    assert Helpers.get_worker_count() == 1

    monkeypatch.setenv(Helpers.THREADS_ENVVAR, str(joblib.cpu_count() + 5))
    assert Helpers.get_worker_count() == joblib.cpu_count()

    for bad in ("0", "-2", "many"):
        monkeypatch.setenv(Helpers.THREADS_ENVVAR, bad)
        with pytest.raises(Error):
            Helpers.get_worker_count()

def test_work_chunks():
    """Chunks and their generators depend on the seed only."""

    counts = Helpers.split_count(100003)
    assert len(counts) == Helpers.WORK_CHUNKS
    assert sum(counts) == 100003
    assert max(counts) - min(counts) <= 1

    first = [rng.integers(1 << 30) for rng in Helpers.spawn_generators(11)]
    second = [rng.integers(1 << 30) for rng in Helpers.spawn_generators(11)]
    assert first == second
    assert len(set(first)) == Helpers.WORK_CHUNKS

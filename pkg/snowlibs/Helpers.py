#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
Misc. helper functions.
"""

import os
import logging
from fractions import Fraction
import joblib
import numpy as np
from snowlibs.Exceptions import Error

_LOG = logging.getLogger("Helpers")

# The environment variable capping the amount of worker threads.
THREADS_ENVVAR = "SNOWCOUNT_THREADS"

# The amount of chunks data-parallel work is split into. It does not depend on the worker count, so
# that seeded results are the same on any machine.
WORK_CHUNKS = 16

def is_int(value):
    """
    Return 'True' if 'value' can be converted into integer using 'int()' and 'False' otherwise.
    """

    try:
        value = int(value)
    except (ValueError, TypeError):
        return False
    return True

def is_dict(obj):
    """
    Return 'True' if 'obj' is a dictionary (works for 'OrderedDicts' too) and 'False' otherwise.
    """

    try:
        obj = obj.keys()
    except AttributeError:
        return False
    return True

def parse_real(value):
    """
    Parse a real number which may also be given as a fraction, e.g. "1/3" or "0.3". Returns a
    'float'. Raises 'Error' if 'value' cannot be parsed.
    """

    if isinstance(value, (int, float)):
        return float(value)

    text = str(value).strip()
    try:
        if "/" in text:
            return float(Fraction(text.replace(" ", "")))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise Error("bad real number '%s', use a decimal number or a fraction like '1/3'"
                    % value) from None

def get_worker_count():
    """
    Return the amount of worker threads to use for data-parallel work. The amount is the CPU count,
    capped by the 'SNOWCOUNT_THREADS' environment variable if it is set.
    """

    workers = joblib.cpu_count()
    limit = os.environ.get(THREADS_ENVVAR)
    if limit is not None:
        if not is_int(limit) or int(limit) < 1:
            raise Error("bad value '%s' of the '%s' environment variable, must be a positive "
                        "integer" % (limit, THREADS_ENVVAR))
        workers = min(workers, int(limit))

    _LOG.debug("using %d worker thread(s)", workers)
    return workers

def spawn_generators(seed, chunks=WORK_CHUNKS):
    """
    Return a list of 'chunks' independent 'numpy' random number generators derived from 'seed'.
    """

    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(chunks)]

def split_count(total, chunks=WORK_CHUNKS):
    """Split integer 'total' into 'chunks' nearly equal non-negative integer parts."""

    base, extra = divmod(int(total), chunks)
    return [base + (1 if idx < extra else 0) for idx in range(chunks)]

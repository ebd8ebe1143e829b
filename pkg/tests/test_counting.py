#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is a 'py.test' test for the Counting module: exact eigenvalue counts of cubes and boxes, and
the counting function bounds of the Koch snowflake.
"""

# pylint: disable=redefined-outer-name

import sys
import math
import logging

import numpy as np
import pytest
from snowlibs import Constants, Counting, IFS, Logging
from snowlibs.Counting import NEUMANN, DIRICHLET
from snowlibs.Exceptions import Error, ErrorCoupling, ErrorDomain, ErrorPrecondition
from snowlibs.Exceptions import ErrorResource

_LOG = logging.getLogger()
try:
    _LOG_LEVEL = sys.argv[sys.argv.index("--loglevel") + 1].upper()
    Logging.setup_logger(loglevel=getattr(Logging, _LOG_LEVEL))
except ValueError:
    pass

_PI2 = math.pi**2

@pytest.fixture(scope="module")
def koch_ledger():
    """The constants ledger of the classic Koch snowflake."""
    return Constants.build_ledger(IFS.TRIANGLE_K, 1 / 3)

@pytest.mark.parametrize("n, t, bc, expected", [
    (2, 1.5 * _PI2, NEUMANN, 3),
    (2, 2 * _PI2, DIRICHLET, 1),
    (2, 2 * _PI2, NEUMANN, 4),
    (2, 100, DIRICHLET, 6),
    (2, 0, NEUMANN, 1),
    (2, 0, DIRICHLET, 0),
    (2, -5, NEUMANN, 1),
    (1, 9 * _PI2, NEUMANN, 4),
    (1, 9 * _PI2, DIRICHLET, 3),
    (3, _PI2, NEUMANN, 4),
    (3, 3 * _PI2, DIRICHLET, 1),
])
def test_unit_cube_counts(n, t, bc, expected):
    """Eigenvalues equal to 't' are counted."""
    assert Counting.count(n, 1, t, bc) == expected

def test_scaling():
    """The count of the cube of side 's' at 't' equals the unit cube count at 's^2 t'."""

    for t in (3.0, 50.0, 400.0):
        for n in (1, 2, 3):
            assert Counting.count(n, 2, t) == Counting.count(n, 1, 4 * t)

def test_count_rectangle():
    """Box counts agree with cube counts and count the index tuples."""

    for t in (10.0, 100.0, 1000.0):
        for bc in Counting.BCS:
            assert Counting.count_rectangle([1, 1], t, bc) == Counting.count(2, 1, t, bc)
            assert Counting.count_rectangle([0.5, 0.5, 0.5], t, bc) == \
                   Counting.count(3, 0.5, t, bc)

    # Eigenvalues 0, pi^2/4, pi^2 (twice).
    assert Counting.count_rectangle([2, 1], _PI2) == 4
    assert Counting.count_rectangle([2, 1], _PI2, DIRICHLET) == 0

    with pytest.raises(ErrorDomain):
        Counting.count_rectangle([1, 0], 1.0)
    with pytest.raises(Error):
        Counting.count_rectangle([1, 1], 1.0, "Robin")

def test_bad_queries():
    """Bad cube queries are refused."""

    with pytest.raises(ErrorDomain):
        Counting.CountQuery(0, 1, 1)
    with pytest.raises(ErrorDomain):
        Counting.CountQuery(2, 0, 1)
    with pytest.raises(ErrorPrecondition):
        Counting.CountQuery(2, 1, math.inf)
    with pytest.raises(Error):
        Counting.CountQuery(2, 1, 1, "Robin")
    with pytest.raises(ErrorResource):
        Counting.count(2, 1, 1e18)

@pytest.mark.parametrize("n", [1, 2, 3])
def test_polya_and_shift(n):
    """Dirichlet counts are below the Weyl term, Neumann counts below the shifted bound."""

    for t in np.geomspace(1, 1e4, 15):
        query = Counting.CountQuery(n, 1.0, t)
        polya_ok, shifted = Counting.polya_and_shift_bounds(query)
        assert polya_ok
        assert Counting.count_cube(query) <= shifted
        assert Counting.bracketing_defect(n, 1.0, t) >= 0

def test_coupling_range(koch_ledger):
    """The slice bounds are refused below the certified range."""

    led = koch_ledger
    with pytest.raises(ErrorCoupling):
        Counting.s1_bound(led, led.t0 / 2)
    with pytest.raises(ErrorCoupling):
        Counting.s2_bound_absolute(led, led.t0 / 2)
    assert Counting.s1_bound(led, led.t0) == pytest.approx(led.S1 * led.t0**(led.delta / 2))

def test_slice_sums(koch_ledger):
    """The exact per-cube counts are below the shifted Polya ones."""

    led = koch_ledger
    t = 10 * led.t0
    k_min, k_max = Counting.slice_range(led, t)
    assert k_min <= k_max

    exact = Counting.s2_bound_absolute(led, t)
    polya = Counting.s2_bound_absolute(led, t, exact=False)
    assert 0 < exact <= polya

    # Measured slices replace the slice law.
    measured = Counting.s2_bound_absolute(led, t, slice_counts={k_min : 0})
    assert measured <= exact

    with pytest.raises(ErrorDomain):
        Counting.slice_range(led, t, X=10)

def test_absolute_coefficients(koch_ledger):
    """The absolute bound coefficients of the Koch snowflake."""

    a, b, c = Counting.absolute_coefficients(koch_ledger, X=20)
    assert a == pytest.approx(3.537e6, rel=0.01)
    assert b == pytest.approx(353, rel=0.01)
    assert c == pytest.approx(911, rel=0.01)

def test_bounds_ordering(koch_ledger):
    """The upper bound is above the lower bound on the whole grid."""

    report = Counting.build_bounds(koch_ledger)
    ts = Counting.log_grid(0.1, 1e6, 40)
    for t, upper, lower, weyl in report.csv_rows(ts):
        assert upper >= lower
        assert lower <= weyl
        assert weyl == pytest.approx(koch_ledger.vol * t / (4 * math.pi))

    # Below 't0' the upper bound is evaluated at 't0'.
    assert report.upper_at(report.t0 / 10) == report.upper_at(report.t0)

    info = report.as_dict()
    assert info["t0"] == report.t0
    assert info["upper"][0]["exponent"] == 1

def test_scaled_bounds(koch_ledger):
    """The bounds of a scaled domain at 't' are the bounds of the domain at 'alpha^2 t'."""

    report = Counting.build_bounds(koch_ledger)
    scaled = report.scaled(3.0)
    t = 5 * report.t0
    assert scaled.upper_at(t) == pytest.approx(report.upper_at(9 * t))
    assert scaled.lower_at(t) == pytest.approx(report.lower_at(9 * t))
    assert scaled.t0 == pytest.approx(report.t0 / 9)

    # The remainder coefficients of the scaled domain are 'alpha^delta' times larger.
    factor = 3.0**koch_ledger.delta
    assert scaled.delta == pytest.approx(koch_ledger.delta)
    assert scaled.M_abs == pytest.approx(report.M_abs * factor)
    assert scaled.M_tilde == pytest.approx(report.M_tilde * factor)
    assert scaled.M_abs == pytest.approx(scaled.upper[1][0])
    assert scaled.scaled(1 / 3).M_abs == pytest.approx(report.M_abs)

    with pytest.raises(ErrorDomain):
        report.scaled(0)

def test_lower_bound():
    """The lower bound of the Dirichlet counting function."""

    vol, delta, n = 1.0, 1.5, 2
    t = 1e4
    weyl = vol * t / (4 * math.pi)
    coef = Counting.vdbl_coefficient(delta, n, 0.5)
    assert coef == pytest.approx(5 * 0.5 / (0.5 * 0.5))
    assert Counting.lower_bound_vdbl(vol, delta, n, 0.5, t) == \
           pytest.approx(weyl - coef * t**(delta / 2))

    # The logarithmic form at 'delta = n - 1'.
    assert Counting.lower_bound_vdbl(vol, 1.0, n, 0.5, t) < weyl
    with pytest.raises(ErrorPrecondition):
        Counting.lower_bound_vdbl(vol, 1.0, n, 0.5, 1.0)

    for bad in (1.0, 2.0):
        with pytest.raises(ErrorDomain):
            Counting.vdbl_coefficient(bad, n, 0.5)
    with pytest.raises(ErrorDomain):
        Counting.lower_bound_vdbl(vol, 2.5, n, 0.5, t)

def test_log_grid():
    """Logarithmic spectral parameter grids."""

    grid = Counting.log_grid(1, 1000, 4)
    assert grid == pytest.approx([1, 10, 100, 1000])
    with pytest.raises(ErrorPrecondition):
        Counting.log_grid(0, 1, 4)

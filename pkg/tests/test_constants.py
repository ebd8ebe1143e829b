#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is a 'py.test' test for the Constants module: the Weyl constants, the eigenvalue lower bound
constants and the constants ledger of the Koch snowflake.
"""

# pylint: disable=redefined-outer-name

import sys
import math
import logging

import pytest
from snowlibs import Constants, Foliation, IFS, Logging
from snowlibs.Exceptions import ErrorDomain, ErrorPrecondition

_LOG = logging.getLogger()
try:
    _LOG_LEVEL = sys.argv[sys.argv.index("--loglevel") + 1].upper()
    Logging.setup_logger(loglevel=getattr(Logging, _LOG_LEVEL))
except ValueError:
    pass

_THIRD = 1 / 3

@pytest.fixture(scope="module")
def koch_ledger():
    """The constants ledger of the classic Koch snowflake."""
    return Constants.build_ledger(IFS.TRIANGLE_K, _THIRD)

def _unit_ranges():
    """Constant ranges with all the bounds equal to 1."""

    bounds = {}
    for name in Foliation.ConstantRanges.NAMES:
        bounds["%s_lower" % name] = bounds["%s_upper" % name] = 1.0
    return Foliation.ConstantRanges(**bounds)

def test_weyl_constants():
    """The Weyl constants in dimensions 1 to 3."""

    assert Constants.weyl_constant(1) == pytest.approx(1 / math.pi)
    assert Constants.weyl_constant(2) == pytest.approx(1 / (4 * math.pi))
    assert Constants.weyl_constant(3) == pytest.approx(1 / (6 * math.pi**2))
    assert Constants.ball_volume(2) == pytest.approx(math.pi)
    assert Constants.ball_volume(3) == pytest.approx(4 * math.pi / 3)

    with pytest.raises(ErrorDomain):
        Constants.weyl_constant(0)

def test_box_constant():
    """The box eigenvalue constant of the Koch snowflake is '4 pi^2 / 147'."""

    assert Constants.c_E_rohde(_THIRD) == pytest.approx(4 * math.pi**2 / 147)
    for p in (0.26, 0.3, 0.36):
        assert 0 < Constants.c_E_rohde(p) <= math.pi**2

def test_c1_unit_ranges():
    """With all the constants equal to 1 the lower bound constant is 1/5."""

    assert Constants.c1_formula(_unit_ranges(), 1.0) == pytest.approx(0.2)
    c1, alpha = Constants.c1_optimized(_unit_ranges(), 1.0)
    assert c1 == pytest.approx(0.2, rel=1e-8)
    assert alpha == pytest.approx(1, rel=1e-4)

def test_c1_optimal_alpha():
    """The closed form is the lower bound at the optimal 'alpha'."""

    ranges = Foliation.closed_form_ranges(_THIRD)
    c_E = Constants.c_E_rohde(_THIRD)
    c1 = Constants.c1_formula(ranges, c_E)
    optimized, alpha = Constants.c1_optimized(ranges, c_E)

    assert optimized == pytest.approx(c1, rel=1e-8)
    assert alpha == pytest.approx(math.sqrt(c_E * ranges.upper("L")), rel=1e-4)

    args = (c_E, 1.0, 1.0, ranges.upper("L"), ranges.upper("I"))
    for factor in (0.5, 0.9, 1.1, 2.0):
        assert Constants.lemma_bound(alpha * factor, *args) <= optimized

    with pytest.raises(ErrorDomain):
        Constants.lemma_bound(0, *args)

def test_c1_preconditions():
    """Non-positive constants are refused."""

    with pytest.raises(ErrorPrecondition):
        Constants.c1_formula(_unit_ranges(), 0.0)

def test_ball_bound():
    """The first non-trivial Neumann eigenvalue of the unit disk."""

    assert Constants.weinberger_upper(math.pi) == pytest.approx(1.84118**2, rel=1e-5)
    # Scaling the area by 4 divides the bound by 4.
    assert Constants.weinberger_upper(4 * math.pi) == \
           pytest.approx(Constants.weinberger_upper(math.pi) / 4)
    with pytest.raises(ErrorDomain):
        Constants.weinberger_upper(0)

def test_koch_ledger(koch_ledger):
    """The constants of the classic Koch snowflake."""

    led = koch_ledger
    assert led.delta == pytest.approx(math.log(4) / math.log(3))
    assert led.vol == pytest.approx(2 * math.sqrt(3) / 5)
    assert led.diameter == pytest.approx(2 / math.sqrt(3))

    assert led.C1 == pytest.approx(0.00307, rel=2e-3)
    assert led.C2 == led.C1
    assert led.C_of_Omega == pytest.approx(1)
    assert led.M_frak <= 11.61
    assert led.C3 == pytest.approx(1354, rel=0.01)
    assert led.C3_proof <= led.C3
    assert led.S1 <= 104282
    assert led.M_Omega == pytest.approx(104325.5, rel=0.01)
    assert led.c_diam_upper == pytest.approx(7.566, abs=1e-3)
    assert led.c_diam_stated == pytest.approx(6.265, abs=1e-3)

def test_coupling(koch_ledger):
    """The eps coupled to 't0' is the top of the first scale interval."""

    led = koch_ledger
    assert led.epsilon_of(led.t0) == pytest.approx(led.eps0)
    assert led.epsilon_of(4 * led.t0) == pytest.approx(led.eps0 / 2)
    with pytest.raises(ErrorPrecondition):
        led.epsilon_of(0)

def test_element_bound(koch_ledger):
    """The eigenvalue bound of single elements is not below the cover bound."""

    system = IFS.make_p_koch(_THIRD)
    for k in (1, 2, 3):
        eps = sum(Foliation.scale_interval(_THIRD, k)) / 2
        for kind in Foliation.ELEMENT_KINDS:
            element = Foliation.make_element(system, kind, k, eps)
            assert Constants.element_poincare(element) >= koch_ledger.C1 / eps**2

def test_ledger_dict(koch_ledger):
    """Every number of the ledger carries its provenance."""

    info = koch_ledger.as_dict()
    assert info["C1"]["provenance"] == "paper_formula"
    assert info["alpha"]["provenance"] == "derived"
    assert info["C1"]["value"] == koch_ledger.C1
    assert set(info["weyl"]) == {"1", "2", "3"}

@pytest.mark.parametrize("kind", IFS.KINDS)
def test_p_scan(kind):
    """The constants stay positive over the admissible ratios."""

    grid = Constants.default_p_grid(points=5)
    rows = Constants.p_scan(kind, grid)
    assert len(rows) == 5
    for row in rows:
        assert len(row) == len(Constants.P_SCAN_HEADER)
        assert all(val > 0 for val in row)
        assert 1 < row[1] < 2

def test_square_ledger():
    """The square snowflake ledger uses the cover-derived content."""

    p = 0.3
    led = Constants.build_ledger(IFS.SQUARE_R, p)
    delta = math.log(4) / math.log(1 / p)
    assert led.C_of_Omega == pytest.approx(3 * Foliation.scale_top(p)**delta)
    assert led.vol == pytest.approx(IFS.snowflake_area(IFS.SQUARE_R, p))
    assert led.C2 <= led.C1

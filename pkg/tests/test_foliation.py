#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is a 'py.test' test for the Foliation module: fibers and their densities, the closed-form
constant ranges, the cover elements and the cover of the eps-neighbourhood.
"""

# pylint: disable=redefined-outer-name

import sys
import math
import logging

import numpy as np
import pytest
from snowlibs import Foliation, IFS, Logging
from snowlibs.Exceptions import ErrorDegenerateFiber, ErrorDomain, ErrorPrecondition

_LOG = logging.getLogger()
try:
    _LOG_LEVEL = sys.argv[sys.argv.index("--loglevel") + 1].upper()
    Logging.setup_logger(loglevel=getattr(Logging, _LOG_LEVEL))
except ValueError:
    pass

_THIRD = 1 / 3

@pytest.fixture(scope="module")
def koch_system():
    """The classic Koch system."""
    return IFS.make_p_koch(_THIRD)

def test_densities():
    """The band density multiplier and the tail ratio."""

    assert Foliation.beta_ratio(_THIRD) == pytest.approx(2)
    assert Foliation.tail_ratio(_THIRD) == pytest.approx(2 / 3)
    assert Foliation.seed_triangle_density(2, 3) == pytest.approx(1.5)
    with pytest.raises(ErrorDomain):
        Foliation.seed_triangle_density(0, 1)
    with pytest.raises(ErrorDomain):
        Foliation.seed_triangle_density(1, -1)

    # The truncated tail is below the tolerance.
    depth = Foliation.default_depth(0.3)
    rho = Foliation.tail_ratio(0.3)
    assert rho**depth / (1 - rho) <= Foliation.DEPTH_TOLERANCE

@pytest.mark.parametrize("p", [0.26, 0.3, _THIRD, 0.36])
def test_scale_intervals(p):
    """The scale intervals tile '(0, c]' and 'generation_of()' finds them."""

    for k in range(0, 6):
        low, high = Foliation.scale_interval(p, k)
        assert low == pytest.approx(p * high)
        assert Foliation.generation_of(p, high) == k
        assert Foliation.generation_of(p, low) == k + 1
        assert Foliation.generation_of(p, (low + high) / 2) == k

    with pytest.raises(ErrorPrecondition):
        Foliation.generation_of(p, 0)

def test_fiber_falling_side(koch_system):
    """A fiber over the falling side of the bump stays at the same relative position."""

    eps, depth, q = 0.1, 5, 0.8
    fiber = Foliation.trace_fiber(koch_system, Foliation.FRINGED, q, depth, eps)
    height = koch_system.height

    assert fiber.beta_sequence() == pytest.approx([1, 1, 2, 4, 8, 16])
    length = eps + 0.4 * height * sum(_THIRD**gen for gen in range(depth))
    integral = eps + 0.4 * height * sum((2 / 3)**gen for gen in range(depth))
    assert fiber.length == pytest.approx(length)
    assert fiber.integral == pytest.approx(integral)

    # The first two knots are the vertical 'E' segment.
    assert fiber.knots[0] == pytest.approx([0.6, -eps])
    assert fiber.knots[1] == pytest.approx([0.6, 0])

    lengths, integrals = Foliation.fiber_integrals(koch_system, Foliation.FRINGED, [q], depth,
                                                   eps)
    assert lengths[0] == pytest.approx(length)
    assert integrals[0] == pytest.approx(integral)

def test_fiber_to_apex(koch_system):
    """The fiber through the middle of the bump ends at the apex."""

    with pytest.raises(ErrorDegenerateFiber):
        Foliation.trace_fiber(koch_system, Foliation.FRINGED, 0.5, 10, 0.1)

    fiber = Foliation.trace_fiber(koch_system, Foliation.FRINGED, 0.5, 10, 0.1, left_limit=True)
    assert fiber.beta_sequence() == pytest.approx([1, 1])
    assert fiber.knots[-1] == pytest.approx([0.5, koch_system.height])
    assert fiber.length == pytest.approx(0.1 + koch_system.height)

def test_fiber_preconditions(koch_system):
    """Fibers start inside the element base and have a positive depth."""

    for q in (0, 1, -0.5):
        with pytest.raises(ErrorPrecondition):
            Foliation.trace_fiber(koch_system, Foliation.SHORT, q, 5, 0.1)
    with pytest.raises(ErrorPrecondition):
        Foliation.trace_fiber(koch_system, Foliation.SHORT, 0.3, 0, 0.1)

def test_long_extension(koch_system):
    """Fibers over the extension of lR elements are plain 'E' segments."""

    eps = 0.03
    element = Foliation.make_element(koch_system, Foliation.LONG, 2, eps)
    ext = Foliation.extension(koch_system, eps)
    assert element.base_length == pytest.approx(_THIRD**2 + ext)

    # The last point of the base is on the extension.
    fiber = element.fiber(1 - 1e-9)
    assert fiber.length == pytest.approx(eps)
    assert fiber.beta_sequence() == [1.0]

@pytest.mark.parametrize("p", [0.27, 0.3, _THIRD, 0.35])
@pytest.mark.parametrize("kind", Foliation.ELEMENT_KINDS)
def test_fiber_bounds(p, kind):
    """Fiber lengths and integrals respect the closed-form bounds on the whole scale interval."""

    system = IFS.make_p_koch(p)
    k = 2
    # The smallest eps of the interval is the worst case of the normalized constants.
    eps = Foliation.scale_interval(p, k)[0] * (1 + 1e-9)
    qs = (np.arange(401) + 0.5) / 401
    depth = Foliation.default_depth(p)
    lengths, integrals = Foliation.fiber_integrals(system, kind, qs, depth, eps, k=k)

    assert np.all(lengths >= eps)
    assert np.all(integrals >= lengths - 1e-15)
    assert lengths.max() / eps <= Foliation.c_length_upper(p)
    assert integrals.max() / eps <= Foliation.c_integral_upper(p)

@pytest.mark.parametrize("kind", Foliation.ELEMENT_KINDS)
def test_sampled_extremes(koch_system, kind):
    """
    The element fiber constants are sampled estimates: a denser sampling does not lower them and
    the closed forms bound both.
    """

    k = 2
    eps = sum(Foliation.scale_interval(_THIRD, k)) / 2
    element = Foliation.make_element(koch_system, kind, k, eps)

    # Every third point of the dense grid is a point of the default grid.
    samples = 3 * Foliation.DEFAULT_FIBER_SAMPLES
    qs = (np.arange(samples) + 0.5) / samples
    lengths, integrals = Foliation.fiber_integrals(koch_system, kind, qs,
                                                   Foliation.default_depth(_THIRD), eps, k=k,
                                                   scale=element.placement.scale)

    assert element.L <= lengths.max() * (1 + 1e-9)
    assert element.I_beta <= integrals.max() * (1 + 1e-9)
    assert lengths.max() / eps <= Foliation.c_length_upper(_THIRD)
    assert integrals.max() / eps <= Foliation.c_integral_upper(_THIRD)

def test_closed_forms():
    """The closed-form constants of the classic Koch snowflake."""

    assert Foliation.c_length_upper(_THIRD) == pytest.approx(7.75)
    assert Foliation.c_integral_upper(_THIRD) == pytest.approx(14.5)
    assert Foliation.c_diam_upper(_THIRD) == pytest.approx(7.566, abs=1e-3)
    assert Foliation.c_diam_upper(_THIRD, corrected=False) == pytest.approx(6.265, abs=1e-3)

    ranges = Foliation.closed_form_ranges(_THIRD)
    assert ranges.lower("r") == ranges.upper("r") == 1
    assert ranges.upper("L") == pytest.approx(7.75)
    assert 0 < ranges.lower("vol") < ranges.upper("vol")
    assert ranges.lower("diam") <= ranges.upper("diam")
    assert ranges.as_dict()["c_I_upper"] == pytest.approx(14.5)

@pytest.mark.parametrize("kind", Foliation.ELEMENT_KINDS)
def test_element_area(koch_system, kind):
    """The closed-form element area matches the element polygon."""

    eps = sum(Foliation.scale_interval(_THIRD, 2)) / 2
    element = Foliation.make_element(koch_system, kind, 2, eps, fringe_level=7)
    assert element.vol == pytest.approx(element.polygon.area, rel=5e-3)
    assert element.vol >= element.polygon.area

    box = element.box_polygon()
    assert box.area == pytest.approx(element.base_length * eps)
    assert element.polygon.buffer(1e-12).contains(box)

    normalized = element.normalized()
    assert normalized["r"] == 1
    assert normalized["vol"] == pytest.approx(Foliation.c_vol(_THIRD, kind, eps / _THIRD**2))

@pytest.mark.parametrize("kind", [Foliation.FRINGED, Foliation.SHORT])
def test_change_of_variables(koch_system, kind):
    """The base integral of the fiber integrals equals the element area."""

    eps = sum(Foliation.scale_interval(_THIRD, 1)) / 2
    element = Foliation.make_element(koch_system, kind, 1, eps)
    area = Foliation.change_of_variables_area(element)
    assert area == pytest.approx(element.vol, rel=5e-3)

    assert Foliation.change_of_variables_area(element, depth=0) == \
           pytest.approx(element.base_length * eps)

def test_graph_foliation():
    """Graph domains are foliated by vertical fibers of density 1."""

    fol = Foliation.graph_domain_foliation([2, 2, 2, 2], 3)
    assert fol.area() == pytest.approx(6)
    assert fol.polygon_area() == pytest.approx(6)
    assert fol.I_beta == pytest.approx(2)

    fol = Foliation.graph_domain_foliation(np.linspace(1, 3, 11), 2)
    assert fol.area() == pytest.approx(4)
    assert fol.I_beta == pytest.approx(3)

    with pytest.raises(ErrorPrecondition):
        Foliation.graph_domain_foliation([1], 1)
    with pytest.raises(ErrorPrecondition):
        Foliation.graph_domain_foliation([1, 0, 1], 1)

@pytest.mark.parametrize("k", range(1, 6))
def test_cover_counts(k):
    """The closed-form cover cardinalities."""

    koch = Foliation.cover_counts(IFS.TRIANGLE_K, _THIRD, k)
    assert koch["total"] == 2 * 4**k - 2

    square = Foliation.cover_counts(IFS.SQUARE_R, 0.3, k)
    assert 3 * square["total"] == 4 * (2 * 4**k + 1)

def test_cover_constant():
    """The cardinality constants of the Koch snowflake and the square snowflakes."""

    assert Foliation.cover_constant(IFS.TRIANGLE_K, _THIRD) == pytest.approx(1)
    for p in (0.27, 0.3, 0.35):
        delta = math.log(4) / math.log(1 / p)
        expected = 3 * Foliation.scale_top(p)**delta
        assert Foliation.cover_constant(IFS.SQUARE_R, p) == pytest.approx(expected)

def test_koch_cover():
    """The cover of the Koch snowflake neighbourhood."""

    domain = IFS.build_snowflake(IFS.TRIANGLE_K, _THIRD, 4)
    eps = sum(Foliation.scale_interval(_THIRD, 2)) / 2
    cert = Foliation.build_cover(domain, eps)

    counts = cert.counts()
    assert counts["total"] == cert.cardinality == 30
    assert counts[Foliation.LONG] == counts[Foliation.SHORT] == 6
    assert cert.cardinality <= cert.cardinality_bound()

    measured = cert.measured_ranges()
    closed = cert.constant_ranges
    for name in ("r", "L", "I", "vol"):
        assert measured.upper(name) <= closed.upper(name) * (1 + 1e-9)
    assert measured.lower("vol") >= closed.lower("vol") * (1 - 1e-9)

    coverage = cert.check_coverage(samples=20000, seed=1)
    assert coverage.uncovered == 0
    assert coverage.max_multiplicity <= cert.multiplicity

    rows = list(cert.csv_rows())
    assert len(rows) == sum(len(element.ring) for element in cert.elements)
    assert cert.as_dict()["coverage"]["uncovered"] == 0

def test_square_cover():
    """The cover of a square snowflake neighbourhood, every corner carries two sR elements."""

    p = 0.3
    domain = IFS.build_snowflake(IFS.SQUARE_R, p, 3)
    eps = sum(Foliation.scale_interval(p, 1)) / 2
    cert = Foliation.build_cover(domain, eps)

    expected = Foliation.cover_counts(IFS.SQUARE_R, p, 1)
    assert cert.counts()["total"] == expected["total"] == 12
    assert cert.counts()[Foliation.SHORT] == 8

_COVER_CASES = [(kind, p, k) for kind in IFS.KINDS for p in (_THIRD, 0.3) for k in range(1, 5)]
_COVER_CASES += [pytest.param(kind, p, k, marks=pytest.mark.slow)
                 for kind in IFS.KINDS for p in (_THIRD, 0.3) for k in (5, 6)]

@pytest.mark.parametrize("kind, p, k", _COVER_CASES)
def test_cover_coverage(kind, p, k):
    """
    The elements cover the eps-neighbourhood with multiplicity at most 2. The K(0.3) corners are
    clipped sR elements.
    """

    eps = sum(Foliation.scale_interval(p, k)) / 2
    domain = IFS.build_snowflake(kind, p, k + 3)
    cert = Foliation.build_cover(domain, eps)
    assert cert.cardinality == Foliation.cover_counts(kind, p, k)["total"]

    clipped = [element for element in cert.elements if element.clipped]
    if kind == IFS.TRIANGLE_K and p != _THIRD:
        assert len(clipped) == 2 * domain.sides_count
        assert all(element.kind == Foliation.SHORT for element in clipped)
    else:
        assert not clipped

    coverage = cert.check_coverage(samples=100000, seed=3)
    assert coverage.samples > 0
    assert coverage.uncovered == 0
    assert coverage.max_multiplicity <= 2

def test_cover_preconditions():
    """The cover needs a small enough eps and a fine enough polygon."""

    domain = IFS.build_snowflake(IFS.TRIANGLE_K, _THIRD, 2)
    with pytest.raises(ErrorPrecondition):
        Foliation.build_cover(domain, 1.0)
    with pytest.raises(ErrorPrecondition):
        Foliation.build_cover(domain, sum(Foliation.scale_interval(_THIRD, 4)) / 2)

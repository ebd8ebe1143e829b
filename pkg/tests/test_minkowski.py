#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is a 'py.test' test for the Minkowski module: the dimension, the inner tube areas and the
content estimates.
"""

import sys
import math
import logging

import numpy as np
import pytest
from snowlibs import IFS, Logging, Minkowski
from snowlibs.Exceptions import Error, ErrorPrecondition

_LOG = logging.getLogger()
try:
    _LOG_LEVEL = sys.argv[sys.argv.index("--loglevel") + 1].upper()
    Logging.setup_logger(loglevel=getattr(Logging, _LOG_LEVEL))
except ValueError:
    pass

_KOCH_DELTA = math.log(4) / math.log(3)

def test_dimension():
    """The dimension is 'log 4 / log(1/p)'."""

    assert Minkowski.minkowski_dimension(1 / 3) == pytest.approx(_KOCH_DELTA)
    assert Minkowski.minkowski_dimension(0.3) == pytest.approx(math.log(4) / math.log(1 / 0.3))
    assert 1 < Minkowski.minkowski_dimension(0.26) < Minkowski.minkowski_dimension(0.36) < 2

def test_koch_profile():
    """The scale-free profile increases towards the content bound."""

    content = Minkowski.content_upper_koch()
    fracs = np.linspace(0, 1 - 1e-6, 50)
    profile = Minkowski.koch_tube_profile(fracs)
    assert np.all(np.diff(profile) > 0)
    assert profile[-1] == pytest.approx(content, rel=1e-5)
    assert float(Minkowski.koch_tube_profile(1.0)) == pytest.approx(content)

def test_koch_tube_bound():
    """The closed-form tube bound is positive and never above the domain area."""

    area = IFS.snowflake_area(IFS.TRIANGLE_K, 1 / 3)
    assert Minkowski.koch_tube_bound(0.5) == area
    for eps in np.geomspace(1e-6, Minkowski.LAPIDUS_PEARSE_EPS_MAX, 40):
        bound = Minkowski.koch_tube_bound(eps)
        assert 0 < bound <= area
        # The bound stays below the content law.
        assert bound <= Minkowski.content_upper_koch() * eps**(2 - _KOCH_DELTA)

    with pytest.raises(ErrorPrecondition):
        Minkowski.koch_tube_bound(0)

def test_tube_method_preconditions():
    """The closed form is for the Koch snowflake only, sampling needs a fine enough polygon."""

    domain = IFS.build_snowflake(IFS.SQUARE_R, 0.3, 2)
    with pytest.raises(ErrorPrecondition):
        Minkowski.inner_tube_volume(domain, 0.01, Minkowski.LAPIDUS_PEARSE)
    with pytest.raises(ErrorPrecondition):
        Minkowski.inner_tube_volume(domain, 0.01, Minkowski.RASTER)
    with pytest.raises(Error):
        Minkowski.inner_tube_volume(domain, 0.01, "Simpson")

    koch = IFS.build_snowflake(IFS.TRIANGLE_K, 1 / 3, 1)
    tubes = Minkowski.tube_scan(koch, [0.01, 0.1])
    assert [tube.method for tube in tubes] == [Minkowski.LAPIDUS_PEARSE] * 2
    assert tubes[0].volume < tubes[1].volume

def test_relative_deviation():
    """A tube following the content law exactly has zero deviation."""

    eps, delta, content = 0.01, 1.3, 2.5
    volume = content * eps**(2 - delta)
    assert Minkowski.relative_deviation(volume, eps, delta, content) == pytest.approx(0, abs=1e-12)
    assert Minkowski.relative_deviation(2 * volume, eps, delta, content) == pytest.approx(1)

def test_estimate_dimension():
    """The dimension is recovered from a scan following a power law."""

    epsilons = np.geomspace(1e-4, 1e-1, 12)
    volumes = 3.0 * epsilons**(2 - 1.4)
    assert Minkowski.estimate_dimension(epsilons, volumes) == pytest.approx(1.4)

    with pytest.raises(ErrorPrecondition):
        Minkowski.estimate_dimension([0.1], [0.2])

def test_koch_content():
    """The slice constant of the Koch snowflake is below 11.61."""

    estimate = Minkowski.koch_content()
    assert estimate.delta == pytest.approx(_KOCH_DELTA)
    assert estimate.content_upper == pytest.approx((723 * math.sqrt(3) + 20 * math.pi) / 480)
    assert estimate.eps_prime_sup <= 0
    assert estimate.frak_m <= 11.61
    assert estimate.frak_m == pytest.approx(Minkowski.frak_m(estimate.content_upper, 0,
                                                             _KOCH_DELTA))

    with pytest.raises(ErrorPrecondition):
        Minkowski.koch_content(k_range=(0, 2))

@pytest.mark.parametrize("kind", IFS.KINDS)
@pytest.mark.parametrize("p", [0.27, 0.3, 0.35])
def test_cover_content(kind, p):
    """The cover-derived content estimate has a finite positive slice constant."""

    estimate = Minkowski.content_estimate(kind, p)
    assert estimate.delta == pytest.approx(Minkowski.minkowski_dimension(p))
    assert estimate.content_upper > 0
    assert math.isfinite(estimate.frak_m)
    assert estimate.frak_m >= Minkowski.frak_m(estimate.content_upper, 0, estimate.delta)

@pytest.mark.slow
def test_sampled_tubes_below_closed_form():
    """The raster and Monte-Carlo tube areas of the Koch snowflake respect the closed form."""

    domain = IFS.build_snowflake(IFS.TRIANGLE_K, 1 / 3, 7)
    eps = 0.05
    bound = Minkowski.koch_tube_bound(eps)

    raster = Minkowski.inner_tube_volume(domain, eps, Minkowski.RASTER, cells_per_unit=400)
    assert raster.volume - raster.uncertainty <= bound * 1.01

    sampled = Minkowski.inner_tube_volume(domain, eps, Minkowski.MONTE_CARLO, samples=200000,
                                          seed=7)
    assert sampled.volume - sampled.uncertainty <= bound * 1.01
    assert sampled.volume == pytest.approx(raster.volume, rel=0.05)

    again = Minkowski.inner_tube_volume(domain, eps, Minkowski.MONTE_CARLO, samples=200000,
                                        seed=7)
    assert again.volume == sampled.volume

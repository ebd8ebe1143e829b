#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
Inner tube volumes, upper inner Minkowski content and dimension of snowflake boundaries.

The inner tube of width 'epsilon' is the set of domain points closer than 'epsilon' to the
boundary. Three methods measure its area.
  * LapidusPearseBound - the certified closed-form upper bound for the classic Koch snowflake.
  * Raster - cell counting on a square grid, cells with undecided membership go to the
             uncertainty.
  * MonteCarlo - uniform sampling of the bounding box, the uncertainty is 3 standard deviations
                 of the binomial estimator plus the certified boundary tolerance.
"""

import math
import logging
import numpy as np
from joblib import Parallel, delayed
from snowlibs import Foliation, Helpers, IFS
from snowlibs.Distance import BoundaryIndex
from snowlibs.Exceptions import Error, ErrorPrecondition

_LOG = logging.getLogger("Minkowski")

LAPIDUS_PEARSE = "LapidusPearseBound"
RASTER = "Raster"
MONTE_CARLO = "MonteCarlo"
METHODS = (LAPIDUS_PEARSE, RASTER, MONTE_CARLO)

# Sampling methods require the polygon to be this much finer than 'epsilon'.
LEVEL_RATIO = 100

# Above this width the closed-form Koch tube bound does not apply, the domain area is used.
LAPIDUS_PEARSE_EPS_MAX = 1 / (3 * math.sqrt(3))

DEFAULT_SAMPLES = 10**6
DEFAULT_RASTER_CELLS = 400

class TubeEstimate:
    """The area of an inner tube measured by one of the 'METHODS'."""

    def __init__(self, epsilon, volume, method, uncertainty=0.0):
        """The class constructor."""

        self.epsilon = epsilon
        self.volume = volume
        self.method = method
        self.uncertainty = uncertainty

    def as_dict(self):
        """Return a dictionary describing the estimate."""

        return {"epsilon" : self.epsilon, "volume" : self.volume, "method" : self.method,
                "uncertainty" : self.uncertainty}

    def csv_row(self):
        """Return the estimate as a CSV row."""
        return (self.epsilon, self.volume, self.method, self.uncertainty)

CSV_HEADER = ("epsilon", "volume", "method", "uncertainty")

class ContentEstimate:
    """The upper inner Minkowski content and the slice constant derived from it."""

    def __init__(self, delta, content_upper, eps_prime_sup, n=2, k_range=None,
                 frak_m_scanned=None):
        """The class constructor."""

        if not content_upper > 0:
            raise Error("Minkowski content must be positive, not %g" % content_upper)

        self.delta = delta
        self.content_upper = content_upper
        self.eps_prime_sup = eps_prime_sup
        self.n = n
        self.k_range = k_range
        self.frak_m = frak_m(content_upper, eps_prime_sup, delta, n)
        self.frak_m_scanned = frak_m_scanned

    def as_dict(self):
        """Return a dictionary describing the estimate."""

        return {"delta" : self.delta, "content_upper" : self.content_upper,
                "eps_prime_sup" : self.eps_prime_sup, "k_range" : self.k_range,
                "frak_m" : self.frak_m, "frak_m_scanned" : self.frak_m_scanned}

def minkowski_dimension(p):
    """Return the Minkowski dimension '-log_p 4' of the p-Koch curve."""

    IFS.check_p(p)
    return _delta(p)

def _delta(p):
    """The dimension formula without the range check."""
    return math.log(4) / math.log(1 / p)

def content_upper_koch():
    """Return the upper bound of the inner Minkowski content of the classic Koch snowflake."""
    return (723 * math.sqrt(3) + 20 * math.pi) / 480

def koch_tube_profile(frac):
    """
    Return the scale-free part of the classic Koch snowflake tube bound at fractional part 'frac'
    of '-log_3(epsilon*sqrt(3))'. The profile increases on '[0, 1)' and tends to
    'content_upper_koch()'.
    """

    frac = np.asarray(frac, dtype=float)
    sqrt3 = math.sqrt(3)
    return 3 * 4**-frac * (3 * sqrt3 / 40 * 9**frac + sqrt3 / 2 * 3**frac
                           + (math.pi / 3 - sqrt3) / 6)

def koch_tube_bound(epsilon):
    """Return the certified upper bound for the inner tube area of the classic Koch snowflake."""

    if not epsilon > 0:
        raise ErrorPrecondition("tube width must be positive, not %g" % epsilon)

    area = IFS.snowflake_area(IFS.TRIANGLE_K, 1 / 3)
    if epsilon > LAPIDUS_PEARSE_EPS_MAX:
        return area

    delta = _delta(1 / 3)
    xval = -math.log(epsilon * math.sqrt(3), 3)
    frac = xval - math.floor(xval)
    bound = epsilon**(2 - delta) * float(koch_tube_profile(frac)) - \
            epsilon**2 * (math.pi / 3 + 2 * math.sqrt(3))
    return min(bound, area)

def _is_classic_koch(domain):
    """Return 'True' if 'domain' is the classic Koch snowflake."""
    return domain.kind == IFS.TRIANGLE_K and abs(domain.p - 1 / 3) < 1e-12

def _check_level(domain, epsilon):
    """Make sure the polygon of 'domain' resolves the tube of width 'epsilon'."""

    if domain.hausdorff_error > epsilon / LEVEL_RATIO:
        raise ErrorPrecondition("the level %d polygon is too coarse for tube width %g: Hausdorff "
                                "error %.3g exceeds epsilon/%d, increase the level"
                                % (domain.level, epsilon, domain.hausdorff_error, LEVEL_RATIO))

def _raster_tube(index, epsilon, cells_per_unit):
    """Measure the tube with a square grid of 'cells_per_unit' cells per unit length."""

    minx, miny, maxx, maxy = index.bounds
    step = 1 / cells_per_unit
    xs = np.arange(minx + step / 2, maxx, step)
    ys = np.arange(miny + step / 2, maxy, step)
    grid_x, grid_y = np.meshgrid(xs, ys)
    centers = np.stack([grid_x.ravel(), grid_y.ravel()], axis=1)

    sdist = index.signed_distance(centers)
    # A cell may be cut by the tube border if its center is closer than its half diagonal.
    slack = step / math.sqrt(2) + index.tolerance
    undecided = (np.abs(sdist) <= slack) | (np.abs(sdist - epsilon) <= slack)
    inside = (sdist > 0) & (sdist < epsilon)

    cell = step * step
    volume = np.count_nonzero(inside) * cell
    # Undecided cells may be counted wrongly in either direction.
    uncertainty = np.count_nonzero(undecided) * cell
    return volume, uncertainty

def _monte_carlo_chunk(index, epsilon, count, rng):
    """Count the tube hits among 'count' uniform samples of the bounding box."""

    minx, miny, maxx, maxy = index.bounds
    points = np.column_stack([rng.uniform(minx, maxx, count), rng.uniform(miny, maxy, count)])
    sdist = index.signed_distance(points)
    hits = np.count_nonzero((sdist > 0) & (sdist < epsilon))
    band = np.count_nonzero((np.abs(sdist) <= index.tolerance) |
                            (np.abs(sdist - epsilon) <= index.tolerance))
    return hits, band

def _monte_carlo_tube(index, epsilon, samples, seed):
    """Estimate the tube area by uniform sampling split into seeded chunks."""

    rngs = Helpers.spawn_generators(seed)
    counts = Helpers.split_count(samples, len(rngs))
    jobs = Parallel(n_jobs=Helpers.get_worker_count(), prefer="threads")
    results = jobs(delayed(_monte_carlo_chunk)(index, epsilon, count, rng)
                   for count, rng in zip(counts, rngs) if count)

    hits = sum(res[0] for res in results)
    band = sum(res[1] for res in results)
    minx, miny, maxx, maxy = index.bounds
    box = (maxx - minx) * (maxy - miny)

    frac = hits / samples
    sigma = box * math.sqrt(frac * (1 - frac) / samples)
    return box * frac, 3 * sigma + box * band / samples

def inner_tube_volume(domain, epsilon, method=LAPIDUS_PEARSE, samples=DEFAULT_SAMPLES, seed=0,
                      cells_per_unit=DEFAULT_RASTER_CELLS, index=None):
    """
    Measure the area of the inner tube of width 'epsilon' of 'domain'. The arguments are as
    follows.
      * domain - the 'SnowflakeDomain' object.
      * epsilon - the tube width.
      * method - one of 'METHODS'.
      * samples - the Monte-Carlo sample count.
      * seed - the Monte-Carlo seed.
      * cells_per_unit - the raster resolution.
      * index - an optional prebuilt 'BoundaryIndex' of the domain.
    Returns a 'TubeEstimate' object.
    """

    if not epsilon > 0:
        raise ErrorPrecondition("tube width must be positive, not %g" % epsilon)
    if method not in METHODS:
        raise Error("bad tube volume method '%s', use one of: %s" % (method, ", ".join(METHODS)))

    if method == LAPIDUS_PEARSE:
        if not _is_classic_koch(domain):
            raise ErrorPrecondition("the '%s' method is only available for the classic Koch "
                                    "snowflake, use '%s' or '%s'"
                                    % (LAPIDUS_PEARSE, RASTER, MONTE_CARLO))
        return TubeEstimate(epsilon, koch_tube_bound(epsilon), method)

    _check_level(domain, epsilon)
    if index is None:
        index = BoundaryIndex.from_domain(domain)

    if method == RASTER:
        volume, uncertainty = _raster_tube(index, epsilon, cells_per_unit)
    else:
        volume, uncertainty = _monte_carlo_tube(index, epsilon, samples, seed)

    volume = min(volume, domain.area_exact)
    _LOG.debug("%s tube of width %g: %.6g +- %.3g", method, epsilon, volume, uncertainty)
    return TubeEstimate(epsilon, volume, method, uncertainty)

def tube_scan(domain, epsilons, method=LAPIDUS_PEARSE, **kwargs):
    """Measure the inner tubes for every width in 'epsilons', returns a list of estimates."""

    index = kwargs.pop("index", None)
    if method != LAPIDUS_PEARSE and index is None:
        _check_level(domain, min(epsilons))
        index = BoundaryIndex.from_domain(domain)
    return [inner_tube_volume(domain, eps, method, index=index, **kwargs) for eps in epsilons]

def relative_deviation(volume, epsilon, delta, content, n=2):
    """Return 'epsilon^(delta-n) * volume / content - 1'."""

    if not content > 0:
        raise ErrorPrecondition("Minkowski content must be positive, not %g" % content)
    return epsilon**(delta - n) * volume / content - 1

def eps_prime(domain, epsilon, delta, content, method=None, **kwargs):
    """
    Return the relative deviation of the inner tube area of 'domain' at width 'epsilon' from the
    Minkowski content law 'content * epsilon^(n-delta)'. The value may be negative. The tube is
    measured with 'method', by default the closed-form bound for the classic Koch snowflake and
    the raster method otherwise.
    """

    if method is None:
        method = LAPIDUS_PEARSE if _is_classic_koch(domain) else RASTER
    tube = inner_tube_volume(domain, epsilon, method, **kwargs)
    return relative_deviation(tube.volume, epsilon, delta, content, domain.n)

def estimate_dimension(epsilons, volumes, n=2):
    """
    Return the box-counting dimension estimate from a tube volume scan: 'n' minus the least
    squares slope of 'log(volume)' against 'log(epsilon)'.
    """

    epsilons = np.asarray(epsilons, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    if len(epsilons) < 2 or np.any(epsilons <= 0) or np.any(volumes <= 0):
        raise ErrorPrecondition("dimension estimate needs at least 2 positive scan points")

    slope = np.polyfit(np.log(epsilons), np.log(volumes), 1)[0]
    return n - slope

def frak_m(content, eps_prime_sup, delta, n=2):
    """
    Return the Whitney slice constant 'content * (1 + max(0, eps_prime_sup)) * (5 sqrt(n))^(n -
    delta)' bounding the slice cardinalities '#W_k <= frak_m * 2^(k delta)'.
    """

    return content * (1 + max(0.0, eps_prime_sup)) * (5 * math.sqrt(n))**(n - delta)

def slice_epsilon(k, n=2):
    """The tube width covering the Whitney slice 'k': '5 sqrt(n) 2^-k'."""
    return 5 * math.sqrt(n) * 2.0**-k

def koch_content(k_range=(0, 40)):
    """
    Return the 'ContentEstimate' of the classic Koch snowflake. The relative deviation is scanned
    over the Whitney slice widths of the 'k_range' slices (the first ones wider than the closed
    form applies are skipped).
    """

    delta = _delta(1 / 3)
    content = content_upper_koch()

    sup = -math.inf
    scaled_sup = 0.0
    for k in range(k_range[0], k_range[1] + 1):
        eps = slice_epsilon(k)
        if eps > LAPIDUS_PEARSE_EPS_MAX:
            continue
        volume = koch_tube_bound(eps)
        sup = max(sup, relative_deviation(volume, eps, delta, content))
        scaled_sup = max(scaled_sup, eps**(delta - 2) * volume)

    if sup == -math.inf:
        raise ErrorPrecondition("no slice width of k range %s is in the closed-form range"
                                % (k_range,))

    scanned = scaled_sup * (5 * math.sqrt(2))**(2 - delta)
    _LOG.debug("Koch content %.6g, sup eps' %.3g over k in %s", content, sup, k_range)
    return ContentEstimate(delta, content, sup, 2, list(k_range), scanned)

def cover_content(kind, p, k_range=(0, 40)):
    """
    Return the 'ContentEstimate' of the 'kind' snowflake derived from its well-covered cover: the
    tube area is at most 'c_vol+ C(Omega) eps^(2-delta)' on the cover scale intervals and at most
    the domain area above them. The relative deviation is scanned over the Whitney slice widths.
    """

    delta = minkowski_dimension(p)
    content = Foliation.closed_form_ranges(p, kind).upper("vol") * Foliation.cover_constant(kind, p)
    area = IFS.snowflake_area(kind, p)
    eps_max = Foliation.scale_interval(p, 1)[1]

    sup = -math.inf
    for k in range(k_range[0], k_range[1] + 1):
        eps = slice_epsilon(k)
        if eps <= eps_max:
            volume = min(area, Foliation.cover_tube_bound(kind, p, eps))
        else:
            volume = area
        sup = max(sup, relative_deviation(volume, eps, delta, content))

    _LOG.debug("cover content of %s(%.6g): %.6g, sup eps' %.3g", kind, p, content, sup)
    return ContentEstimate(delta, content, sup, 2, list(k_range))

def content_estimate(kind, p, k_range=(0, 40)):
    """
    Return the 'ContentEstimate' of the 'kind' snowflake: the closed form for the classic Koch
    snowflake and the cover-derived one otherwise.
    """

    if kind == IFS.TRIANGLE_K and abs(p - 1 / 3) < 1e-12:
        return koch_content(k_range)
    return cover_content(kind, p, k_range)

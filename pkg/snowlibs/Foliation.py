#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This module implements foliations of the covering domains of snowflake eps-neighbourhoods.

Every covering element is the union of a box 'E' (the eps-deep rectangle below a base segment) and
a fringe (the region between the base segment and the p-Koch curve above it). Fibers are traced in
the element unit frame, where the base segment of the relevant level is '[0, 1]' and the fringe is
on the positive imaginary side. A fiber starts at the bottom of 'E', goes up to the base and then
passes through the bump bands of the IFS generations. The density 'beta' is constant on every band
and is multiplied by '2p/(1-2p)' every time the fiber enters a bump side.

There are three element kinds:
  * fR - fringed rectangle: the bump of a level 'k-1' segment (or the two flat pieces meeting at a
         convex vertex, which form a congruent shape), base '(1-2p) p^(k-1)'.
  * sR - short rectangle: a level 'k' flat piece, base 'p^k'.
  * lR - long rectangle: a level 'k' flat piece ending at a reflex vertex, with the base extended
         across the vertex by 'eps sin(theta)'. The extension has no fringe.
"""

import math
import logging
import numpy as np
import shapely
from shapely.geometry import Polygon
from joblib import Parallel, delayed
from snowlibs import Helpers, IFS
from snowlibs.Distance import BoundaryIndex
from snowlibs.IFS import Similarity, to_complex, to_xy
from snowlibs.Exceptions import Error, ErrorDomain, ErrorPrecondition, ErrorDegenerateFiber
from snowlibs.Exceptions import ErrorQuadrature

_LOG = logging.getLogger("Foliation")

FRINGED = "fR"
SHORT = "sR"
LONG = "lR"
ELEMENT_KINDS = (FRINGED, SHORT, LONG)

# Element roles in the cover.
ROLE_BUMP = "bump"
ROLE_APEX = "apex"
ROLE_REFLEX = "reflex"
ROLE_CORNER = "corner"

# Relative tolerance of the truncated fiber tail.
DEPTH_TOLERANCE = 1e-12
# Fiber start points closer than this to a junction are junctions.
JUNCTION_TOLERANCE = 1e-12

DEFAULT_FIBER_SAMPLES = 129
DEFAULT_COVERAGE_SAMPLES = 20000

CSV_HEADER = ("element", "kind", "role", "vertex", "x", "y")

def seed_triangle_density(a, b):
    """
    Return the density of the seed map which stretches fibers of a band of base 'a' onto a band
    of base 'b', that is '|det Db| = b/a'.
    """

    if not a > 0:
        raise ErrorDomain("a", a, "(0, inf)")
    if not b > 0:
        raise ErrorDomain("b", b, "(0, inf)")
    return b / a

def beta_ratio(p):
    """The density multiplier of a bump band: '2p/(1-2p)'."""
    return seed_triangle_density(1 - 2 * p, 2 * p)

def tail_ratio(p):
    """The ratio of the geometric series bounding the fiber integrals: '2p^2/(1-2p)'."""
    return p * beta_ratio(p)

def default_depth(p, rel_tol=DEPTH_TOLERANCE):
    """
    Return the smallest fiber depth such that the truncated tail of the fiber integral is below
    'rel_tol' times the integral.
    """

    IFS.check_p(p)
    rho = tail_ratio(p)
    return max(1, math.ceil(math.log(rel_tol * (1 - rho)) / math.log(rho)))

def scale_top(p):
    """The top of the scale interval 'J_0': '(1-2p)/sqrt(4p-1)'."""
    return (1 - 2 * p) / math.sqrt(4 * p - 1)

def scale_interval(p, k):
    """Return the '(low, high)' ends of the scale interval 'J_k = (p^(k+1) c, p^k c]'."""

    top = scale_top(p)
    return p**(k + 1) * top, p**k * top

def generation_of(p, epsilon):
    """Return the 'k' of the scale interval 'J_k' containing 'epsilon'."""

    if not epsilon > 0:
        raise ErrorPrecondition("epsilon must be positive, not %g" % epsilon)

    k = math.floor(math.log(epsilon / scale_top(p)) / math.log(p))
    # Fix the rounding of the logarithms at the interval ends.
    while epsilon > scale_interval(p, k)[1]:
        k -= 1
    while epsilon <= scale_interval(p, k)[0]:
        k += 1
    return k

def _junctions(p):
    """The interior points of the unit segment where neighbouring bands meet."""
    return np.array([p, 0.5, 1 - p])

def _classify(p, u, left_limit, generation, q_start):
    """
    Return the band codes of the fiber positions 'u' on the current unit segment: 0 and 3 for the
    flat pieces, 1 for the rising bump side and 2 for the falling one. Junction points raise
    'ErrorDegenerateFiber' unless 'left_limit' is set, which attaches them to the band on the left.
    """

    near = np.abs(u[:, None] - _junctions(p)[None, :]) <= JUNCTION_TOLERANCE
    if near.any():
        if not left_limit:
            idx = int(np.nonzero(near.any(axis=1))[0][0])
            raise ErrorDegenerateFiber(float(q_start[idx]), generation)
        u = np.where(near.any(axis=1), _junctions(p)[np.argmax(near, axis=1)], u)

    codes = np.where(u <= p, 0, np.where(u <= 0.5, 1, np.where(u <= 1 - p, 2, 3)))
    return codes, u

def _advance(system, u, codes):
    """
    Perform one generation step. Returns the positions on the sub-segments and the heights of the
    traversed bands in units of the current segment.
    """

    p, h = system.p, system.height
    side = 0.5 - p
    rising = (u - p) / side
    falling = (u - 0.5) / side

    new_u = np.select([codes == 0, codes == 1, codes == 2],
                      [u / p, rising, falling], (u - (1 - p)) / p)
    heights = np.select([codes == 1, codes == 2], [rising * h, (1 - falling) * h], 0.0)
    return np.clip(new_u, 0.0, 1.0), heights

def _fringe_bands(system, u, scale, depth, left_limit=True, q_start=None):
    """
    Trace the fringe part of fibers starting at unit-frame positions 'u' on a segment of scale
    'scale'. Returns the fringe lengths and the fringe integrals of 'beta'.
    """

    u = np.asarray(u, dtype=float).copy()
    if q_start is None:
        q_start = u.copy()

    ratio = beta_ratio(system.p)
    length = np.zeros_like(u)
    integral = np.zeros_like(u)
    beta = np.ones_like(u)
    cur = scale
    for gen in range(depth):
        codes, u = _classify(system.p, u, left_limit, gen, q_start)
        u, heights = _advance(system, u, codes)
        band = heights * cur
        length += band
        integral += beta * band
        beta = np.where((codes == 1) | (codes == 2), beta * ratio, beta)
        cur *= system.p
    return length, integral

class Fiber:
    """A fiber of a covering element: a polyline with the density constant on every band."""

    def __init__(self, q, knots, betas, generations, r):
        """
        The class constructor. The arguments are as follows.
          * q - the fiber start parameter on the element base.
          * knots - the '(M+1, 2)' polyline knots, the first one at the bottom of 'E'.
          * betas - the 'M' density values of the bands between consecutive knots.
          * generations - the 'M' band generations, '-1' for the 'E' segment.
          * r - the depth of the 'E' segment.
        """

        self.q = q
        self.knots = np.asarray(knots, dtype=float)
        self.betas = np.asarray(betas, dtype=float)
        self.generations = np.asarray(generations, dtype=int)
        self.r = r

    @property
    def band_lengths(self):
        """The lengths of the bands."""
        return np.hypot(*np.diff(self.knots, axis=0).T)

    @property
    def length(self):
        """The fiber length."""
        return float(self.band_lengths.sum())

    @property
    def integral(self):
        """The integral of 'beta' along the fiber, an exact sum over the bands."""
        return float(np.dot(self.betas, self.band_lengths))

    def beta_sequence(self):
        """Return the density values of the bands, the 'E' segment first."""
        return [float(beta) for beta in self.betas]

    def as_dict(self):
        """Return a dictionary describing the fiber."""

        return {"q" : self.q, "r" : self.r, "length" : self.length, "integral" : self.integral,
                "knots" : self.knots, "betas" : self.betas}

def _element_base(system, kind, k, epsilon, scale):
    """
    Return the '(start, end)' unit-frame positions of the element base and the unit-frame end of
    the fringed part of it.
    """

    if kind == FRINGED:
        return system.p, 1 - system.p, 1 - system.p
    if kind == SHORT:
        return 0.0, 1.0, 1.0
    if kind == LONG:
        return 0.0, 1.0 + extension(system, epsilon) / scale, 1.0
    raise Error("bad element kind '%s', use one of: %s" % (kind, ", ".join(ELEMENT_KINDS)))

def element_scale(system, kind, k):
    """The scale of the element unit frame: 'p^(k-1)' for fR and 'p^k' for sR and lR."""

    if kind == FRINGED:
        return system.p**(k - 1)
    return system.p**k

def extension(system, epsilon):
    """The length of the base extension of lR elements: 'eps sin(theta)'."""
    return epsilon * math.sin(system.theta)

def trace_fiber(system, kind, q, depth, epsilon, k=1, placement=None, left_limit=False):
    """
    Trace the fiber starting at parameter 'q' of the base of an element. The arguments are as
    follows.
      * system - the 'PKochSystem' object.
      * kind - the element kind, one of 'ELEMENT_KINDS'.
      * q - the start parameter in '(0, 1)', '0' and '1' are the ends of the element base.
      * depth - the amount of IFS generations to trace.
      * epsilon - the depth of the 'E' box.
      * k - the generation of the element.
      * placement - the element unit frame, by default the one at the origin with the element
                    scale.
      * left_limit - attach junction points to the band on their left instead of failing.
    Returns a 'Fiber' object.
    """

    if not 0 < q < 1:
        raise ErrorPrecondition("fiber start q=%r must be interior to the element base" % q)
    if depth < 1:
        raise ErrorPrecondition("fiber depth must be at least 1, not %d" % depth)
    if placement is None:
        placement = Similarity(element_scale(system, kind, k))

    scale = placement.scale
    start, end, fringed = _element_base(system, kind, k, epsilon, scale)
    u0 = start + q * (end - start)

    knots = [complex(u0, -epsilon / scale), complex(u0, 0)]
    betas = [1.0]
    generations = [-1]

    if u0 <= fringed:
        frame = Similarity(1)
        u = np.array([u0])
        beta = 1.0
        ratio = beta_ratio(system.p)
        for gen in range(depth):
            codes, u = _classify(system.p, u, left_limit, gen, np.array([q]))
            code = int(codes[0])
            u, heights = _advance(system, u, codes)
            sub = frame @ system.maps[code]
            if heights[0] > 0:
                knots.append(complex(sub(u[0])))
                betas.append(beta)
                generations.append(gen)
            if code in (1, 2):
                beta *= ratio
            frame = sub

    return Fiber(q, to_xy(placement(np.array(knots))), betas, generations, epsilon)

def fiber_integrals(system, kind, qs, depth, epsilon, k=1, scale=None, left_limit=True):
    """
    Return the fiber lengths and the fiber integrals of 'beta' for the start parameters 'qs'
    (vectorized 'trace_fiber()' without the polylines).
    """

    if scale is None:
        scale = element_scale(system, kind, k)

    qs = np.asarray(qs, dtype=float)
    start, end, fringed = _element_base(system, kind, k, epsilon, scale)
    u = start + qs * (end - start)

    length = np.full_like(u, epsilon)
    integral = np.full_like(u, epsilon)
    has_fringe = u <= fringed
    if has_fringe.any():
        flen, fint = _fringe_bands(system, u[has_fringe], scale, depth, left_limit,
                                   q_start=qs[has_fringe])
        length[has_fringe] += flen
        integral[has_fringe] += fint
    return length, integral

class GraphFoliation:
    """The foliation of a graph domain '{(x, y): 0 < x < base, -f(x) < y < 0}' by vertical lines."""

    def __init__(self, xs, heights):
        """The class constructor."""

        self.xs = xs
        self.heights = heights
        self.beta = np.ones_like(heights)

    @property
    def lengths(self):
        """The fiber lengths."""
        return self.heights

    @property
    def I_beta(self):
        """The largest fiber integral of 'beta'."""
        return float(np.max(self.heights * self.beta))

    def area(self):
        """The integral of 'beta' over the domain, which equals the area under the graph."""

        widths = np.diff(self.xs)
        return float(np.sum(widths * (self.heights[:-1] + self.heights[1:]) / 2))

    def polygon_area(self):
        """The area of the graph domain polygon."""

        ring = np.concatenate([[[self.xs[0], 0.0]], np.column_stack([self.xs, -self.heights]),
                               [[self.xs[-1], 0.0]]])
        return float(Polygon(ring).area)

def graph_domain_foliation(f_samples, base):
    """
    Return the trivial foliation of the graph domain of the height samples 'f_samples', taken at
    equidistant points of '[0, base]'. Fibers are vertical and 'beta' is 1 everywhere.
    """

    heights = np.asarray(f_samples, dtype=float)
    if heights.ndim != 1 or len(heights) < 2:
        raise ErrorPrecondition("need at least 2 height samples")
    if not base > 0:
        raise ErrorDomain("base", base, "(0, inf)")
    if np.any(heights <= 0) or not np.all(np.isfinite(heights)):
        raise ErrorPrecondition("graph heights must be positive and finite")
    return GraphFoliation(np.linspace(0, base, len(heights)), heights)

class ConstantRanges:
    """The ranges of the normalized element constants over a scale interval."""

    NAMES = ("r", "L", "I", "diam", "vol")

    def __init__(self, **bounds):
        """
        The class constructor. The keyword arguments are '<name>_lower' and '<name>_upper' for
        every name of 'NAMES'.
        """

        self.bounds = {}
        for name in self.NAMES:
            self.bounds[name] = (bounds["%s_lower" % name], bounds["%s_upper" % name])

    def lower(self, name):
        """The lower bound of constant 'name'."""
        return self.bounds[name][0]

    def upper(self, name):
        """The upper bound of constant 'name'."""
        return self.bounds[name][1]

    def as_dict(self):
        """Return a dictionary describing the ranges."""

        result = {}
        for name, (low, high) in self.bounds.items():
            result["c_%s_lower" % name] = low
            result["c_%s_upper" % name] = high
        return result

def c_length_upper(p):
    """The bound on fiber lengths over eps: '1 + (4p-1)/(p^2 (2-6p+4p^2))'."""
    return 1 + (4 * p - 1) / (p * p * (2 - 6 * p + 4 * p * p))

def c_integral_upper(p):
    """The bound on fiber integrals over eps: '1 + (4p-1)/(2p^2 (1-2p-2p^2))'."""
    return 1 + (4 * p - 1) / (2 * p * p * (1 - 2 * p - 2 * p * p))

def c_diam_upper(p, corrected=True):
    """
    The bound on element diameters over eps. The element height is 'eps' plus the fringe height,
    which gives the '1 + x' term. With 'corrected=False' the '1 - x' form is returned.
    """

    x = (4 * p - 1) / (2 * p * p * (1 - 2 * p))
    height = 1 + x if corrected else 1 - x
    return math.sqrt((4 * p - 1) / p**4 + height * height)

def _fringe_areas(p):
    """The bump triangle area and the fringe area over the unit segment."""

    bump = (1 - 2 * p) * math.sqrt(4 * p - 1) / 4
    return bump, bump / (1 - 4 * p * p)

def c_vol(p, kind, u):
    """
    The normalized element area 'vol/eps^2' as a function of 'u = eps/p^k': the rectangle area plus
    the fringe area.
    """

    bump, fringe = _fringe_areas(p)
    if kind == FRINGED:
        return (1 - 2 * p) / (p * u) + (bump / (p * p) + 2 * fringe) / (u * u)
    if kind == SHORT:
        return 1 / u + fringe / (u * u)
    if kind == LONG:
        sin_theta = math.sqrt(4 * p - 1) / (2 * p)
        return 1 / u + sin_theta + fringe / (u * u)
    raise Error("bad element kind '%s'" % kind)

def _clipped_corners(kind, p):
    """Whether the corner elements of the domain are clipped sR elements."""
    return kind == IFS.TRIANGLE_K and not _is_third(p)

def _is_third(p):
    """Whether 'p' is the classic Koch ratio."""
    return abs(p - 1 / 3) < 1e-12

def closed_form_ranges(p, kind=IFS.TRIANGLE_K):
    """
    Return the 'ConstantRanges' of the elements of the 'kind' snowflake over every scale interval
    'J_k'. The normalized areas are decreasing in 'u = eps/p^k', which runs over '(p c, c]'.
    """

    IFS.check_p(p)
    top = scale_top(p)
    kinds = [FRINGED, SHORT, LONG]
    vol_upper = max(c_vol(p, elkind, p * top) for elkind in kinds)
    vol_lower = min(c_vol(p, elkind, top) for elkind in kinds)
    if _clipped_corners(kind, p):
        # The corner sR loses at most the triangle cut off by the 60 degree corner.
        vol_lower = min(vol_lower, c_vol(p, SHORT, top) - 1 / (2 * math.sqrt(3)))

    width = min(1.0, (1 - 2 * p) / p)
    diam_lower = math.sqrt(1 + (width / top)**2)

    return ConstantRanges(r_lower=1.0, r_upper=1.0, L_lower=1.0, L_upper=c_length_upper(p),
                          I_lower=1.0, I_upper=c_integral_upper(p), diam_lower=diam_lower,
                          diam_upper=c_diam_upper(p), vol_lower=vol_lower, vol_upper=vol_upper)

def cover_counts(kind, p, k):
    """Return the dictionary of element counts per role of the cover at generation 'k'."""

    sides = 3 if kind == IFS.TRIANGLE_K else 4
    apexes = (4**(k - 1) - 1) // 3
    reflexes = 2 * apexes
    third = kind == IFS.TRIANGLE_K and _is_third(p)

    counts = {"fR_bump" : sides * 4**(k - 1),
              "fR_apex" : sides * apexes + (sides if third else 0),
              "lR" : sides * reflexes,
              "sR" : sides * reflexes + (0 if third else 2 * sides)}
    counts[FRINGED] = counts["fR_bump"] + counts["fR_apex"]
    counts["total"] = counts[FRINGED] + counts["sR"] + counts["lR"]
    return counts

def cover_constant(kind, p):
    """
    Return 'C(Omega)' such that the cover cardinality is at most 'C(Omega) eps^-delta' on every
    scale interval 'J_k' with 'k >= 1'.
    """

    IFS.check_p(p)
    delta = math.log(4) / math.log(1 / p)
    ratios = [cover_counts(kind, p, k)["total"] / 4**k for k in range(1, 9)]
    # The limit of the ratio as 'k' grows.
    sides = 3 if kind == IFS.TRIANGLE_K else 4
    ratios.append(2 * sides / 3)
    return scale_top(p)**delta * max(ratios)

def cover_tube_bound(kind, p, epsilon):
    """
    Return the certified upper bound 'c_vol+ C(Omega) eps^(2-delta)' of the inner tube area, valid
    for 'eps' in the scale intervals 'J_k' with 'k >= 1'.
    """

    k = generation_of(p, epsilon)
    if k < 1:
        raise ErrorPrecondition("eps = %g is above the first scale interval, the cover needs "
                                "eps <= %g" % (epsilon, scale_interval(p, 1)[1]))
    delta = math.log(4) / math.log(1 / p)
    vol_upper = closed_form_ranges(p, kind).upper("vol")
    return vol_upper * cover_constant(kind, p) * epsilon**(2 - delta)

class CoverElement:
    """One covering domain of the eps-neighbourhood with its foliation constants."""

    def __init__(self, system, kind, k, epsilon, placement, role=ROLE_BUMP, fringe_level=0,
                 clip=None):
        """
        The class constructor. The arguments are as follows.
          * system - the 'PKochSystem' object.
          * kind - the element kind, one of 'ELEMENT_KINDS'.
          * k - the generation of the scale interval.
          * epsilon - the depth of the 'E' box.
          * placement - the similarity mapping the element unit frame into the plane.
          * role - the role of the element in the cover.
          * fringe_level - the polygonal level of the fringe curve under every flat piece.
          * clip - an optional shapely polygon to clip the element to.
        """

        if kind not in ELEMENT_KINDS:
            raise Error("bad element kind '%s', use one of: %s" % (kind, ", ".join(ELEMENT_KINDS)))

        self.system = system
        self.kind = kind
        self.k = k
        self.epsilon = epsilon
        self.placement = placement
        self.role = role
        self.fringe_level = fringe_level
        self.clipped = clip is not None
        self._clip = clip
        self.beta_inf = 1.0
        self.r = epsilon

        p = system.p
        scale = placement.scale
        start, end, _ = _element_base(system, kind, k, epsilon, scale)
        self.base_length = (end - start) * scale
        self.lambda2_E = (math.pi / max(self.base_length, epsilon))**2

        self._ring = self._build_ring()
        self.polygon = Polygon(self._ring)
        if clip is not None:
            clipped = self.polygon.intersection(clip)
            if clipped.geom_type == "MultiPolygon":
                clipped = max(clipped.geoms, key=lambda geom: geom.area)
            self.polygon = clipped
            self._ring = np.asarray(clipped.exterior.coords)
        shapely.prepare(self.polygon)

        if self.clipped:
            self.vol = float(self.polygon.area)
        else:
            self.vol = c_vol(p, kind, epsilon / p**k) * epsilon * epsilon

        # The fringe curve of fR lies over the two bump sides of ratio p.
        side = p * scale if kind == FRINGED else scale
        self.hausdorff_error = system.hausdorff_error(fringe_level) * side

        self.L, self.I_beta = _fiber_extremes(system, kind, k, epsilon, scale)

    def _build_ring(self):
        """Build the counter-clockwise element polygon in the plane."""

        system = self.system
        p = system.p
        scale = self.placement.scale
        depth = self.epsilon / scale
        chain = system.refine(np.array([0, 1], dtype=complex), self.fringe_level)

        if self.kind == FRINGED:
            fringe = np.concatenate([system.maps[1](chain), system.maps[2](chain)[1:]])
            bottom = [complex(p, -depth), complex(1 - p, -depth)]
        else:
            fringe = chain
            end = 1.0
            if self.kind == LONG:
                end += extension(system, self.epsilon) / scale
            bottom = [complex(0, -depth), complex(end, -depth)]
            if end > 1:
                bottom.append(complex(end, 0))

        ring = np.concatenate([bottom, fringe[::-1]])
        return to_xy(self.placement(ring))

    def box_polygon(self):
        """Return the shapely polygon of the eps-deep box 'E' of the element."""

        scale = self.placement.scale
        start, end, _ = _element_base(self.system, self.kind, self.k, self.epsilon, scale)
        depth = self.epsilon / scale
        local = np.array([complex(start, -depth), complex(end, -depth), complex(end, 0),
                          complex(start, 0)])
        box = Polygon(to_xy(self.placement(local)))
        if self._clip is not None:
            box = box.intersection(self._clip)
        return box

    @property
    def ring(self):
        """The element polygon vertices."""
        return self._ring

    @property
    def diam(self):
        """The diameter bound of the element: the polygon diameter plus twice the fringe error."""

        zarr = to_complex(np.asarray(self.polygon.convex_hull.exterior.coords))
        return float(np.max(np.abs(zarr[:, None] - zarr[None, :]))) + 2 * self.hausdorff_error

    def fiber(self, q, depth=None, left_limit=False):
        """Trace the fiber starting at 'q' in the plane."""

        if depth is None:
            depth = default_depth(self.system.p)
        return trace_fiber(self.system, self.kind, q, depth, self.epsilon, k=self.k,
                           placement=self.placement, left_limit=left_limit)

    def normalized(self):
        """Return the dictionary of the element constants divided by the powers of eps."""

        eps = self.epsilon
        return {"r" : self.r / eps, "L" : self.L / eps, "I" : self.I_beta / eps,
                "diam" : self.diam / eps, "vol" : self.vol / (eps * eps)}

    def as_dict(self):
        """Return a dictionary describing the element."""

        return {"kind" : self.kind, "role" : self.role, "k" : self.k, "epsilon" : self.epsilon,
                "placement" : self.placement.as_dict(), "r" : self.r, "L" : self.L,
                "I_beta" : self.I_beta, "diam" : self.diam, "vol" : self.vol,
                "beta_inf" : self.beta_inf, "lambda2_E" : self.lambda2_E,
                "clipped" : self.clipped}

_EXTREMES_CACHE = {}

def _fiber_extremes(system, kind, k, epsilon, scale, samples=DEFAULT_FIBER_SAMPLES):
    """
    Return the largest fiber length and the largest fiber integral of an element, sampled over
    'samples' start points. Congruent elements share the result.

    These are sampled estimates of the suprema and may be slightly below them. They feed the
    measured ranges only, the constants are certified by the closed forms ('c_length_upper()',
    'c_integral_upper()').
    """

    key = (system.p, kind, k, epsilon, round(scale, 15), samples)
    if key not in _EXTREMES_CACHE:
        qs = (np.arange(samples) + 0.5) / samples
        lengths, integrals = fiber_integrals(system, kind, qs, default_depth(system.p), epsilon,
                                             k=k, scale=scale)
        _EXTREMES_CACHE[key] = (float(lengths.max()), float(integrals.max()))
    return _EXTREMES_CACHE[key]

def make_element(system, kind, k, epsilon, placement=None, fringe_level=4):
    """Create a free-standing element, placed at the origin with the element scale by default."""

    if placement is None:
        placement = Similarity(element_scale(system, kind, k))
    return CoverElement(system, kind, k, epsilon, placement, fringe_level=fringe_level)

def change_of_variables_area(element, system=None, depth=None, tol=1e-4, max_points=4**9):
    """
    Return the integral of the fiber integrals of 'beta' over the element base, which equals the
    element area. The base integral uses the composite midpoint rule, doubling the amount of points
    until two successive values agree within 'tol' (relative). Raises 'ErrorQuadrature' if this
    does not happen within 'max_points' points.
    """

    if system is None:
        system = element.system
    if depth is None:
        depth = default_depth(system.p)

    if depth == 0:
        return element.base_length * element.epsilon

    prev = None
    points = 64
    while points <= max_points:
        qs = (np.arange(points) + 0.5) / points
        _, integrals = fiber_integrals(system, element.kind, qs, depth, element.epsilon,
                                       k=element.k, scale=element.placement.scale)
        value = element.base_length * float(integrals.mean())
        if prev is not None and abs(value - prev) <= tol * abs(value):
            return value
        prev = value
        points *= 2

    raise ErrorQuadrature(abs(value - prev) / abs(value), tol)

class CoverageCheck:
    """The Monte-Carlo coverage and multiplicity check of a cover."""

    def __init__(self, samples, hits):
        """
        The class constructor. The 'hits' argument is the array of element counts of the sampled
        points of the eps-neighbourhood.
        """

        self.samples = samples
        self.histogram = np.bincount(hits, minlength=3)
        self.uncovered = int(self.histogram[0])
        self.max_multiplicity = int(hits.max()) if len(hits) else 0

    def as_dict(self):
        """Return a dictionary describing the check."""

        return {"samples" : self.samples, "uncovered" : self.uncovered,
                "max_multiplicity" : self.max_multiplicity, "histogram" : self.histogram}

def _coverage_chunk(index, tree, epsilon, count, rng):
    """Return the element counts of the sampled points of the eps-neighbourhood."""

    minx, miny, maxx, maxy = index.bounds
    points = np.column_stack([rng.uniform(minx, maxx, count), rng.uniform(miny, maxy, count)])
    sdist = index.signed_distance(points)
    points = points[(sdist > 0) & (sdist < epsilon)]

    pairs = tree.query(shapely.points(points), predicate="intersects")
    return np.bincount(pairs[0], minlength=len(points))

class WellCoveredCertificate:
    """A cover of the eps-neighbourhood of a snowflake by well-foliated elements."""

    def __init__(self, domain, epsilon, k, elements):
        """The class constructor."""

        self.domain = domain
        self.epsilon = epsilon
        self.k = k
        self.elements = elements
        self.multiplicity = 2
        self.cardinality = len(elements)
        self.C_of_Omega = cover_constant(domain.kind, domain.p)
        self.constant_ranges = closed_form_ranges(domain.p, domain.kind)
        self.coverage = None

    def counts(self):
        """Return the dictionary of element counts per kind and role."""

        result = {"fR_bump" : 0, "fR_apex" : 0, FRINGED : 0, SHORT : 0, LONG : 0}
        for element in self.elements:
            result[element.kind] += 1
            if element.kind == FRINGED:
                result["fR_%s" % element.role] += 1
        result["total"] = len(self.elements)
        return result

    def measured_ranges(self):
        """Return the 'ConstantRanges' of the placed elements at this eps."""

        table = [element.normalized() for element in self.elements]
        bounds = {}
        for name in ConstantRanges.NAMES:
            values = [row[name] for row in table]
            bounds["%s_lower" % name] = min(values)
            bounds["%s_upper" % name] = max(values)
        return ConstantRanges(**bounds)

    def cardinality_bound(self):
        """The 'C(Omega) eps^-delta' bound on the cardinality."""
        return self.C_of_Omega * self.epsilon**(-self.domain.delta)

    def check_coverage(self, samples=DEFAULT_COVERAGE_SAMPLES, seed=0, index=None):
        """
        Sample the eps-neighbourhood of the domain polygon and count the elements containing every
        sample. Returns a 'CoverageCheck' object.
        """

        if index is None:
            index = BoundaryIndex.from_domain(self.domain)
        tree = shapely.STRtree([element.polygon for element in self.elements])

        rngs = Helpers.spawn_generators(seed)
        counts = Helpers.split_count(samples, len(rngs))
        jobs = Parallel(n_jobs=Helpers.get_worker_count(), prefer="threads")
        results = jobs(delayed(_coverage_chunk)(index, tree, self.epsilon, count, rng)
                       for count, rng in zip(counts, rngs) if count)

        hits = np.concatenate(results) if results else np.zeros(0, dtype=int)
        self.coverage = CoverageCheck(len(hits), hits)
        _LOG.debug("coverage of %s at eps %g: %d samples, %d uncovered, multiplicity %d",
                   self.domain.name, self.epsilon, len(hits), self.coverage.uncovered,
                   self.coverage.max_multiplicity)
        return self.coverage

    def csv_rows(self):
        """Yield the CSV rows of the element polygons."""

        for idx, element in enumerate(self.elements):
            for vidx, (x, y) in enumerate(element.ring):
                yield (idx, element.kind, element.role, vidx, x, y)

    def as_dict(self):
        """Return a dictionary describing the certificate."""

        result = {"domain" : self.domain.name, "epsilon" : self.epsilon, "k" : self.k,
                  "counts" : self.counts(), "cardinality" : self.cardinality,
                  "cardinality_bound" : self.cardinality_bound(),
                  "C_of_Omega" : self.C_of_Omega, "multiplicity" : self.multiplicity,
                  "constant_ranges" : self.constant_ranges.as_dict(),
                  "measured_ranges" : self.measured_ranges().as_dict()}
        if self.coverage is not None:
            result["coverage"] = self.coverage.as_dict()
        return result

def _apex_frame(prev, nxt, p):
    """
    Return the frame of the virtual bump formed by the flat pieces meeting at a convex vertex: the
    last flat piece of segment 'prev' and the first one of segment 'nxt'.
    """

    start = prev(1 - p)
    end = nxt(p)
    a = (end - start) / (1 - 2 * p)
    return Similarity(a, start - a * p)

def _segment_frames(domain, level):
    """Return the list of per-side lists of the level 'level' segment frames, in traversal order."""

    system = domain.system
    words = [()]
    for _ in range(level):
        words = [word + (idx,) for word in words for idx in range(4)]
    maps = [system.word_map(word) for word in words]
    return [[frame @ sim for sim in maps] for frame in domain.side_frames()]

def build_cover(domain, epsilon):
    """
    Build the cover of the eps-neighbourhood of the snowflake 'domain' by fR, sR and lR elements.
    Returns a 'WellCoveredCertificate' object.
    """

    p = domain.p
    system = domain.system
    k = generation_of(p, epsilon)
    if k < 1:
        raise ErrorPrecondition("eps = %g is above the first scale interval, the cover needs "
                                "eps <= %g" % (epsilon, scale_interval(p, 1)[1]))
    if domain.level < k:
        raise ErrorPrecondition("eps = %g is in the scale interval J_%d, which needs a domain of "
                                "level %d or more, but the level is %d"
                                % (epsilon, k, k, domain.level))

    third = domain.kind == IFS.TRIANGLE_K and _is_third(p)
    clip = domain.polygon if _clipped_corners(domain.kind, p) else None
    fringe_level = domain.level - k

    elements = []
    sides = _segment_frames(domain, k - 1)
    for sidx, frames in enumerate(sides):
        for frame in frames:
            elements.append(CoverElement(system, FRINGED, k, epsilon, frame, ROLE_BUMP,
                                         fringe_level))

        nxt_side = sides[(sidx + 1) % len(sides)]
        joints = list(zip(frames[:-1], frames[1:]))
        for prev, nxt in joints:
            turn = np.angle(nxt.a / prev.a)
            if turn < 0:
                elements.append(CoverElement(system, FRINGED, k, epsilon,
                                             _apex_frame(prev, nxt, p), ROLE_APEX, fringe_level))
            else:
                elements.append(CoverElement(system, LONG, k, epsilon, prev @ system.maps[3],
                                             ROLE_REFLEX, fringe_level))
                elements.append(CoverElement(system, SHORT, k, epsilon, nxt @ system.maps[0],
                                             ROLE_REFLEX, fringe_level))

        prev, nxt = frames[-1], nxt_side[0]
        if third:
            elements.append(CoverElement(system, FRINGED, k, epsilon, _apex_frame(prev, nxt, p),
                                         ROLE_APEX, fringe_level))
        else:
            for frame in (prev @ system.maps[3], nxt @ system.maps[0]):
                elements.append(CoverElement(system, SHORT, k, epsilon, frame, ROLE_CORNER,
                                             fringe_level, clip=clip))

    cert = WellCoveredCertificate(domain, epsilon, k, elements)
    expected = cover_counts(domain.kind, p, k)["total"]
    if cert.cardinality != expected:
        raise Error("BUG: built %d cover elements, expected %d" % (cert.cardinality, expected))

    _LOG.debug("cover of %s at eps %g (k=%d): %s", domain.name, epsilon, k, cert.counts())
    return cert

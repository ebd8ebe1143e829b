#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This module implements the iterated function system of the p-Koch curve and the snowflake domains
built from it.

Points of the plane are complex numbers. A similarity is 'z -> a*z + b' or, if it reflects,
'z -> a*conj(z) + b', where '|a|' is the scale factor and 'arg(a)' is the rotation angle.

The p-Koch system consists of 4 maps of ratio 'p'. They replace the unit segment by the chain
'(0,0) -> (p,0) -> (1/2,h) -> (1-p,0) -> (1,0)', where 'h = sqrt(4p-1)/2' is the bump height. The
bump is on the left side of the segment direction.

Snowflake domains are built by replacing every side of an equilateral triangle ('K(p)') or of the
unit square ('R(p)') by a p-Koch curve. The sides are traversed clockwise, so the bumps point
outwards. The stored boundary ring is counter-clockwise.
"""

import math
import logging
import numpy as np
import shapely
from shapely.geometry import Polygon
from snowlibs.Exceptions import Error, ErrorDomain, ErrorResource, ErrorPrecondition

_LOG = logging.getLogger("IFS")

# The open interval of admissible 'p' values.
P_MIN = 0.25
P_MAX = (math.sqrt(3) - 1) / 2

# The triangle-based snowflake 'K(p)' and the square-based snowflake 'R(p)'.
TRIANGLE_K = "K"
SQUARE_R = "R"
KINDS = (TRIANGLE_K, SQUARE_R)

# Corners of the base polygons in the clockwise order. Sides go from a corner to the next one.
_BASE_CORNERS = {
    TRIANGLE_K : (0j, complex(0.5, math.sqrt(3) / 2), 1 + 0j),
    SQUARE_R   : (0j, 1j, 1 + 1j, 1 + 0j),
}

_BASE_AREAS = {TRIANGLE_K : math.sqrt(3) / 4, SQUARE_R : 1.0}

# The default limit on the amount of vertices of a single chain.
DEFAULT_VERTEX_BUDGET = 4**11 + 1

def check_p(p):
    """Raise 'ErrorDomain' if 'p' is outside of the admissible interval."""

    if not P_MIN < p < P_MAX:
        raise ErrorDomain("p", p, "(1/4, (sqrt(3)-1)/2)")

def to_complex(points):
    """Convert an '(N, 2)' array of points to a complex array."""

    points = np.asarray(points, dtype=float)
    return points[..., 0] + 1j * points[..., 1]

def to_xy(zarr):
    """Convert a complex array to an '(N, 2)' array of points."""

    zarr = np.asarray(zarr, dtype=complex)
    return np.stack([zarr.real, zarr.imag], axis=-1)

class Similarity:
    """
    A similarity of the plane: 'z -> a*z + b', or 'z -> a*conj(z) + b' if 'reflect' is 'True'.
    Objects of this class are immutable.
    """

    def __init__(self, a, b=0j, reflect=False):
        """
        The class constructor. The 'a' argument is the complex linear factor, its modulus is the
        scale factor. The 'b' argument is the complex translation.
        """

        a = complex(a)
        if not abs(a) > 0:
            raise Error("similarity scale factor must be positive")

        self._a = a
        self._b = complex(b)
        self._reflect = bool(reflect)

    @classmethod
    def from_params(cls, scale, rotation=0.0, reflect=False, translation=(0.0, 0.0)):
        """Create a similarity from the scale factor, rotation angle (radians) and translation."""

        if not scale > 0:
            raise Error("similarity scale factor must be positive, not %g" % scale)
        return cls(scale * np.exp(1j * rotation), complex(*translation), reflect)

    @classmethod
    def segment_frame(cls, start, end):
        """
        Return the similarity mapping the unit segment '[0, 1]' onto the segment from 'start' to
        'end' (complex numbers), preserving orientation.
        """

        return cls(complex(end) - complex(start), complex(start))

    @property
    def a(self):
        """The complex linear factor."""
        return self._a

    @property
    def b(self):
        """The complex translation."""
        return self._b

    @property
    def scale(self):
        """The scale factor."""
        return abs(self._a)

    @property
    def rotation(self):
        """The rotation angle in radians."""
        return float(np.angle(self._a))

    @property
    def reflect(self):
        """Whether the similarity reverses orientation."""
        return self._reflect

    @property
    def translation(self):
        """The translation vector."""
        return (self._b.real, self._b.imag)

    def is_contraction(self):
        """Return 'True' if the scale factor is strictly less than 1."""
        return self.scale < 1

    def __call__(self, zarr):
        """Apply the similarity to a complex number or a complex array."""

        zarr = np.asarray(zarr, dtype=complex)
        if self._reflect:
            zarr = np.conj(zarr)
        return self._a * zarr + self._b

    def apply_xy(self, points):
        """Apply the similarity to an '(N, 2)' array of points."""
        return to_xy(self(to_complex(points)))

    def compose(self, other):
        """Return the composition 'self o other', which applies 'other' first."""

        if self._reflect:
            a = self._a * np.conj(other.a)
            b = self._a * np.conj(other.b) + self._b
        else:
            a = self._a * other.a
            b = self._a * other.b + self._b
        return Similarity(a, b, self._reflect != other.reflect)

    def __matmul__(self, other):
        """The 'self @ other' composition."""
        return self.compose(other)

    def inverse(self):
        """Return the inverse similarity."""

        if self._reflect:
            conj_a = np.conj(self._a)
            return Similarity(1 / conj_a, -np.conj(self._b) / conj_a, True)
        return Similarity(1 / self._a, -self._b / self._a, False)

    def as_dict(self):
        """Return a dictionary describing the similarity."""

        return {"scale" : self.scale, "rotation" : self.rotation, "reflect" : self._reflect,
                "translation" : list(self.translation)}

    def __repr__(self):
        """The string representation."""
        return "Similarity(scale=%.6g, rotation=%.6g, reflect=%s, translation=(%.6g, %.6g))" \
               % (self.scale, self.rotation, self._reflect, *self.translation)

class PKochSystem:
    """The 4-map iterated function system generating the p-Koch curve."""

    def __init__(self, p):
        """The class constructor."""

        check_p(p)

        self.p = float(p)
        self.delta = math.log(4) / math.log(1 / self.p)
        self.height = math.sqrt(4 * self.p - 1) / 2
        # The angle between the base line and the rising side of the bump.
        self.theta = math.acos((1 - 2 * self.p) / (2 * self.p))
        self.apex = complex(0.5, self.height)

        p = self.p
        self.maps = (Similarity(p),
                     Similarity(p * np.exp(1j * self.theta), p),
                     Similarity(p * np.exp(-1j * self.theta), self.apex),
                     Similarity(p, 1 - p))
        for sim in self.maps:
            assert sim.is_contraction()

        # Images of '0' under the maps, the refinement of a segment is 'start + (end-start) * w'.
        self._weights = np.array([sim(0) for sim in self.maps], dtype=complex)

    def word_map(self, word):
        """
        Return the similarity 'phi_w1 o phi_w2 o ... ' of the 'word' sequence of map indices (0
        to 3). The empty word gives the identity.
        """

        result = Similarity(1)
        for idx in word:
            result = result @ self.maps[idx]
        return result

    def hausdorff_error(self, level):
        """
        Return the certified Hausdorff distance between the level 'level' chain and the p-Koch
        curve over the unit segment.
        """

        return self.p**level * self.height / (1 - self.p)

    def refine(self, zarr, levels=1):
        """
        Apply 'levels' refinement steps to the open complex chain 'zarr', replacing every segment
        by the 4 segment generator. Returns the new complex chain.
        """

        zarr = np.asarray(zarr, dtype=complex)
        for _ in range(levels):
            starts = zarr[:-1]
            deltas = zarr[1:] - starts
            refined = (starts[:, None] + deltas[:, None] * self._weights[None, :]).ravel()
            zarr = np.append(refined, zarr[-1])
        return zarr

    def iterate_chain(self, level, vertex_budget=DEFAULT_VERTEX_BUDGET):
        """Return the level 'level' polygonal approximation of the curve over the unit segment."""

        if level < 0:
            raise ErrorPrecondition("chain level must be non-negative, not %d" % level)

        needed = 4**level + 1
        if needed > vertex_budget:
            raise ErrorResource("p-Koch chain of level %d" % level, "%d vertices" % needed,
                                vertex_budget)

        zarr = self.refine(np.array([0, 1], dtype=complex), level)
        return PolyChain(to_xy(zarr), level, self.hausdorff_error(level), self.p)

    def as_dict(self):
        """Return a dictionary describing the system."""

        return {"p" : self.p, "delta" : self.delta, "height" : self.height,
                "theta" : self.theta, "maps" : [sim.as_dict() for sim in self.maps]}

def make_p_koch(p):
    """Create the p-Koch system for ratio 'p'."""
    return PKochSystem(p)

class PolyChain:
    """
    A polygonal chain approximating a p-Koch curve, with the certified Hausdorff distance to the
    limit curve.
    """

    def __init__(self, vertices, level, hausdorff_error, p):
        """The class constructor. The 'p' argument is the ratio of the generating system."""

        self.vertices = np.asarray(vertices, dtype=float)
        self.vertices.flags.writeable = False
        self.level = level
        self.hausdorff_error = hausdorff_error
        self.p = p

    def segments(self):
        """Return the '(N, 2, 2)' array of chain segments."""
        return np.stack([self.vertices[:-1], self.vertices[1:]], axis=1)

    def coarsen(self, level):
        """Return the sub-chain of the coarser 'level' (vertices of coarse levels are kept)."""

        if not 0 <= level <= self.level:
            raise ErrorPrecondition("cannot coarsen a level %d chain to level %d"
                                    % (self.level, level))
        stride = 4**(self.level - level)
        # The error is proportional to the segment length, which grows by '1/p' per level.
        err = self.hausdorff_error / self.p**(self.level - level)
        return PolyChain(self.vertices[::stride], level, err, self.p)

    def as_dict(self):
        """Return a dictionary describing the chain."""

        return {"level" : self.level, "hausdorff_error" : self.hausdorff_error,
                "vertices" : self.vertices}

class PolygonDomain:
    """
    A bounded planar domain given by a simple polygon, with the certified Hausdorff distance
    between the polygon boundary and the boundary of the domain it approximates (0 for domains
    which are polygons). The shapely polygon is built once and cached.
    """

    def __init__(self, ring, hausdorff_error=0.0, area_exact=None, name="polygon"):
        """
        The class constructor. The arguments are as follows.
          * ring - the '(N, 2)' vertex ring, the first vertex may be repeated at the end.
          * hausdorff_error - the certified distance to the boundary of the approximated domain.
          * area_exact - the area of the approximated domain, the polygon area by default.
          * name - the domain name used in messages and reports.
        """

        ring = np.asarray(ring, dtype=float)
        if len(ring) < 3:
            raise Error("a polygon needs at least 3 vertices, got %d" % len(ring))
        if not np.array_equal(ring[0], ring[-1]):
            ring = np.concatenate([ring, ring[:1]])
        if _ring_signed_area(ring) < 0:
            ring = ring[::-1].copy()

        self.name = name
        self.n = 2
        self.ring = ring
        self.ring.flags.writeable = False
        self.hausdorff_error = float(hausdorff_error)
        self._polygon = None
        self.area_exact = self.polygon_area() if area_exact is None else area_exact

    @property
    def polygon(self):
        """The shapely polygon, built on first use."""

        if self._polygon is None:
            self._polygon = Polygon(self.ring)
            shapely.prepare(self._polygon)
        return self._polygon

    def is_simple(self):
        """Return 'True' if the boundary does not self-intersect."""
        return bool(shapely.is_simple(shapely.LinearRing(self.ring)))

    def polygon_area(self):
        """The area of the polygon."""
        return float(self.polygon.area)

    def diameter_bound(self):
        """
        Return the certified upper bound for the diameter of the approximated domain: the
        polygon diameter plus twice the Hausdorff error.
        """

        zarr = to_complex(np.asarray(self.polygon.convex_hull.exterior.coords))
        diam = np.max(np.abs(zarr[:, None] - zarr[None, :]))
        return float(diam + 2 * self.hausdorff_error)

    def as_dict(self):
        """Return a dictionary describing the domain."""

        return {"name" : self.name, "hausdorff_error" : self.hausdorff_error,
                "area_exact" : self.area_exact, "vertices" : self.ring}

def _ring_signed_area(ring):
    """The shoelace signed area of a closed ring, positive for counter-clockwise rings."""

    xs, ys = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(xs[:-1], ys[1:]) - np.dot(xs[1:], ys[:-1]))

def rectangle_domain(width, height, origin=(0.0, 0.0)):
    """Return the axis-parallel rectangle domain of the given size."""

    x0, y0 = origin
    ring = [(x0, y0), (x0 + width, y0), (x0 + width, y0 + height), (x0, y0 + height)]
    return PolygonDomain(ring, name="rectangle %gx%g" % (width, height))

class SnowflakeDomain(PolygonDomain):
    """
    A snowflake domain 'K(p)' or 'R(p)' at a polygonal approximation level. Objects of this class
    are immutable.
    """

    def __init__(self, kind, p, level, vertex_budget=DEFAULT_VERTEX_BUDGET, check_simple=True):
        """
        The class constructor. The arguments are as follows.
          * kind - the domain kind, 'TRIANGLE_K' or 'SQUARE_R'.
          * p - the p-Koch ratio.
          * level - the polygonal approximation level of every side.
          * vertex_budget - the maximum amount of vertices per side.
          * check_simple - verify that the boundary polygon does not self-intersect.
        """

        if kind not in KINDS:
            raise Error("bad snowflake kind '%s', use one of: %s" % (kind, ", ".join(KINDS)))

        self.kind = kind
        self.system = make_p_koch(p)
        self.p = self.system.p
        self.delta = self.system.delta
        self.level = level

        chain = self.system.iterate_chain(level, vertex_budget=vertex_budget)
        unit = to_complex(chain.vertices)

        corners = _BASE_CORNERS[kind]
        self.corners = to_xy(np.array(corners))
        self.sides = []
        self._frames = []
        for idx, start in enumerate(corners):
            frame = Similarity.segment_frame(start, corners[(idx + 1) % len(corners)])
            self._frames.append(frame)
            self.sides.append(PolyChain(to_xy(frame(unit)), level, chain.hausdorff_error, self.p))

        # The clockwise ring without duplicated side end points, reversed to counter-clockwise.
        cw_ring = np.concatenate([side.vertices[:-1] for side in self.sides])
        ccw_ring = cw_ring[::-1]

        super().__init__(np.concatenate([ccw_ring, ccw_ring[:1]]), chain.hausdorff_error,
                         snowflake_area(kind, self.p), name="%s(%.6g)" % (kind, self.p))

        if check_simple and not self.is_simple():
            raise Error("the level %d boundary of %s self-intersects" % (level, self.name))

        _LOG.debug("built %s at level %d: %d boundary vertices", self.name, level,
                   len(self.ring) - 1)

    @property
    def boundary(self):
        """The list of side chains in the clockwise traversal order."""
        return self.sides

    @property
    def sides_count(self):
        """The amount of sides of the base polygon."""
        return len(self.sides)

    def side_frames(self):
        """
        Return the similarities mapping the unit segment onto the base polygon sides, in the
        clockwise traversal order, so that the unit bump maps outwards.
        """

        return list(self._frames)

    def area_error_bound(self):
        """The upper bound for 'area_exact' minus the level polygon area."""

        p = self.p
        bump = (1 - 2 * p) * math.sqrt(4 * p - 1) / 4
        return self.sides_count * bump * (4 * p * p)**self.level / (1 - 4 * p * p)

    def prefractal_vertices(self, level):
        """
        Return the clockwise closed vertex ring of the level 'level' prefractal (the approximation
        level of this domain must not be smaller).
        """

        coarse = [side.coarsen(level).vertices[:-1] for side in self.sides]
        ring = np.concatenate(coarse)
        return np.concatenate([ring, ring[:1]])

    def as_dict(self):
        """Return a dictionary describing the domain."""

        result = super().as_dict()
        result.update({"kind" : self.kind, "p" : self.p, "level" : self.level})
        return result

def snowflake_area(kind, p):
    """Return the exact area of the limit domain 'K(p)' or 'R(p)'."""

    check_p(p)
    sides = len(_BASE_CORNERS[kind])
    bump = (1 - 2 * p) * math.sqrt(4 * p - 1) / 4
    return _BASE_AREAS[kind] + sides * bump / (1 - 4 * p * p)

def build_snowflake(kind, p, level, vertex_budget=DEFAULT_VERTEX_BUDGET):
    """Build the 'kind' snowflake domain for ratio 'p' at approximation level 'level'."""

    if level < 0:
        raise ErrorPrecondition("snowflake level must be non-negative, not %d" % level)
    return SnowflakeDomain(kind, p, level, vertex_budget=vertex_budget)

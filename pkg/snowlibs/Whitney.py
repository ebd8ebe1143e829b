#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
Dyadic Whitney covers of planar domains.

Slice 'k' of the raw cover consists of the level 'k' dyadic squares (side '2^-k', diameter
'd = 2^-k sqrt(2)') meeting the shell of domain points at distance between '2d' and '4d' from the
boundary. Every such square 'Q' satisfies 'diam(Q) <= dist(Q, boundary) <= 4 diam(Q)'. The Whitney
cover consists of the maximal squares of the raw cover, they are disjoint and tile the domain up to
a thin boundary tube.

Squares are generated level by level, only children of squares which may still meet a deeper shell
are examined. Distances are measured against the approximating polygon. The polygon is within the
tolerance 'eta' (its Hausdorff error) of the true boundary, and squares whose shell membership
cannot be decided within 'eta' are included.
"""

import math
import logging
import numpy as np
from snowlibs.Distance import BoundaryIndex
from snowlibs.Exceptions import Error, ErrorCertification, ErrorPrecondition, ErrorResource

_LOG = logging.getLogger("Whitney")

DEFAULT_CUBE_BUDGET = 2000000

# Square keys pack the integer corner coordinates of a level into one 64-bit integer.
_KEY_OFFSET = 2**30
_KEY_STRIDE = 2**31

def _keys(ix, iy):
    """Pack corner coordinates into 64-bit keys."""
    return (ix.astype(np.int64) + _KEY_OFFSET) * _KEY_STRIDE + (iy.astype(np.int64) + _KEY_OFFSET)

def start_level(diameter, n=2):
    """Return the coarsest useful level 'floor(-log2(diameter / sqrt(n)))'."""
    return math.floor(-math.log2(diameter / math.sqrt(n)))

def cube_diam(k, n=2):
    """The diameter of a level 'k' dyadic cube."""
    return 2.0**-k * math.sqrt(n)

class DyadicCube:
    """A dyadic square: level 'k' and integer corner coordinates in units of '2^-k'."""

    def __init__(self, k, corner, n=2):
        """The class constructor."""

        self.k = int(k)
        self.corner = tuple(int(val) for val in corner)
        self.n = n

    @property
    def side(self):
        """The side length."""
        return 2.0**-self.k

    @property
    def diam(self):
        """The diameter."""
        return cube_diam(self.k, self.n)

    def bounds(self):
        """The '(xmin, ymin, xmax, ymax)' bounds."""

        xmin, ymin = (val * self.side for val in self.corner)
        return (xmin, ymin, xmin + self.side, ymin + self.side)

    def contains(self, other):
        """Return 'True' if the 'other' cube is contained in this one."""

        if other.k < self.k:
            return False
        shift = other.k - self.k
        return all((val >> shift) == own for val, own in zip(other.corner, self.corner))

    def __repr__(self):
        """The string representation."""
        return "DyadicCube(k=%d, corner=%s)" % (self.k, self.corner)

class WhitneyCover:
    """
    The Whitney cover of a domain built down to level 'k_max'. The squares are kept as parallel
    arrays.
      * levels - the square levels.
      * ix, iy - the integer corner coordinates in units of '2^-level'.
      * dist - the distances from the squares to the polygon boundary.
      * center_sd - the signed distances of the square centers.
    """

    def __init__(self, domain, k_min, k_max, arrays, raw_counts, eta):
        """The class constructor. Use 'build_whitney()' to create objects of this class."""

        self.domain = domain
        self.n = 2
        self.k_min = k_min
        self.k_max = k_max
        self.eta = eta
        self.levels, self.ix, self.iy, self.dist, self.center_sd = arrays
        self.raw_counts = raw_counts

        levels, counts = np.unique(self.levels, return_counts=True)
        self.slice_counts = {int(lvl) : int(cnt) for lvl, cnt in zip(levels, counts)}

        if len(self.levels):
            self.k_range = (int(self.levels.min()), int(self.levels.max()))
        else:
            self.k_range = (k_min, k_max)

    def __len__(self):
        """The amount of squares."""
        return len(self.levels)

    @property
    def sides(self):
        """The square side lengths."""
        return 2.0**-self.levels

    @property
    def diams(self):
        """The square diameters."""
        return self.sides * math.sqrt(self.n)

    def cube(self, idx):
        """Return square number 'idx' as a 'DyadicCube' object."""
        return DyadicCube(self.levels[idx], (self.ix[idx], self.iy[idx]), self.n)

    def cubes(self):
        """Yield all squares as 'DyadicCube' objects."""

        for idx in range(len(self)):
            yield self.cube(idx)

    def volume(self):
        """The total area of the squares."""
        return float(np.sum(self.sides**2))

    def truncation_epsilon(self):
        """
        The width of the boundary tube which may stay untiled: every domain point farther from
        the boundary is covered.
        """

        return 2 * cube_diam(self.k_max, self.n)

    def untiled_volume(self):
        """The area of the domain not covered by the squares."""
        return max(0.0, self.domain.area_exact - self.volume())

    def certificate(self):
        """
        Return the boolean array telling which squares satisfy 'diam <= dist <= 4 diam' within the
        certified tolerance.
        """

        diams = self.diams
        return (self.dist >= diams - self.eta) & (self.dist <= 4 * diams + self.eta)

    def is_disjoint(self):
        """Check that no square contains another one and there are no duplicates."""

        keysets = {}
        for lvl in self.slice_counts:
            sel = self.levels == lvl
            keys = _keys(self.ix[sel], self.iy[sel])
            if len(np.unique(keys)) != len(keys):
                return False
            keysets[lvl] = keys

        for lvl, keys in keysets.items():
            sel = self.levels == lvl
            for anc in keysets:
                if anc >= lvl:
                    continue
                shift = lvl - anc
                akeys = _keys(self.ix[sel] >> shift, self.iy[sel] >> shift)
                if np.any(np.isin(akeys, keysets[anc])):
                    return False
        return True

    def slice_law(self, frak_m, delta):
        """
        Return the dictionary mapping every built level 'k' to the tuple '(count, bound)', where
        'bound' is 'frak_m * 2^(k delta)'.
        """

        return {lvl : (cnt, frak_m * 2.0**(lvl * delta)) for lvl, cnt in self.slice_counts.items()}

    def restrict_eps(self, epsilon):
        """Return the 'EpsRestriction' of the cover, see 'restrict_eps()'."""
        return restrict_eps(self, epsilon)

    def csv_rows(self):
        """Yield the '(k, corner_x, corner_y)' CSV rows."""

        sides = self.sides
        for idx in range(len(self)):
            yield (int(self.levels[idx]), float(self.ix[idx] * sides[idx]),
                   float(self.iy[idx] * sides[idx]))

    def as_dict(self):
        """Return the summary dictionary of the cover."""

        return {"k_min" : self.k_min, "k_max" : self.k_max, "k_range" : list(self.k_range),
                "cubes" : len(self), "eta" : self.eta,
                "slice_counts" : self.slice_counts, "raw_counts" : self.raw_counts,
                "volume" : self.volume(), "untiled_volume" : self.untiled_volume(),
                "truncation_epsilon" : self.truncation_epsilon()}

CSV_HEADER = ("k", "corner_x", "corner_y")

def _examine(index, level, ix, iy):
    """
    Compute the boundary distances, the center signed distances and the center membership of the
    level 'level' squares with corners 'ix', 'iy'.
    """

    side = 2.0**-level
    xmin = ix * side
    ymin = iy * side
    dist = index.box_distance(xmin, ymin, xmin + side, ymin + side)
    centers = np.column_stack([xmin + side / 2, ymin + side / 2])
    inside = index.contains(centers)
    center_dist = index.distance(centers)
    center_sd = np.where(inside, center_dist, -center_dist)
    return dist, center_sd, inside

def build_whitney(domain, k_max, cube_budget=DEFAULT_CUBE_BUDGET, index=None):
    """
    Build the Whitney cover of 'domain' (an 'IFS.PolygonDomain') down to level 'k_max'. The
    arguments are as follows.
      * domain - the domain to cover.
      * k_max - the finest square level.
      * cube_budget - the maximum amount of examined squares.
      * index - an optional prebuilt 'BoundaryIndex' of the domain.
    Returns a 'WhitneyCover' object.
    """

    n = domain.n
    eta = domain.hausdorff_error
    required = 2.0**(-k_max - 3) * math.sqrt(n)
    if eta > required:
        raise ErrorCertification("the polygon Hausdorff error %.3g is too large for level %d "
                                 "squares, it must not exceed %.3g, increase the polygon level"
                                 % (eta, k_max, required))

    if index is None:
        index = BoundaryIndex.from_domain(domain)

    k_min = start_level(domain.diameter_bound(), n)
    if k_max < k_min:
        raise ErrorPrecondition("k_max %d is below the coarsest level %d" % (k_max, k_min))

    # The initial level 'k_min' squares cover the bounding box.
    minx, miny, maxx, maxy = index.bounds
    side = 2.0**-k_min
    xs = np.arange(math.floor(minx / side), math.ceil(maxx / side), dtype=np.int64)
    ys = np.arange(math.floor(miny / side), math.ceil(maxy / side), dtype=np.int64)
    ix, iy = (arr.ravel() for arr in np.meshgrid(xs, ys))

    parts = []
    raw_counts = {}
    examined = 0
    for level in range(k_min, k_max + 1):
        examined += len(ix)
        if examined > cube_budget:
            raise ErrorResource("Whitney cover down to level %d" % k_max,
                                "more than %d squares" % cube_budget, cube_budget)

        d = cube_diam(level, n)
        dist, center_sd, inside = _examine(index, level, ix, iy)

        # The farthest square point is at most 'min(dist + d, center_sd + d/2)' from the boundary.
        far = np.minimum(dist + d, center_sd + d / 2)
        member = inside & (dist <= 4 * d + eta) & (far >= 2 * d - eta)
        raw_counts[level] = int(np.count_nonzero(member))
        parts.append((np.full(raw_counts[level], level, dtype=np.int64), ix[member], iy[member],
                      dist[member], center_sd[member]))

        # Children may meet a deeper shell only if they are within '2d' of the boundary.
        grow = (inside | (dist <= 0)) & (dist <= 2 * d + eta)
        ix, iy = ix[grow], iy[grow]
        if level == k_max or not len(ix):
            break
        offsets = np.array([0, 1], dtype=np.int64)
        ix = (2 * ix[:, None, None] + offsets[None, :, None]).repeat(2, axis=2).ravel()
        iy = (2 * iy[:, None, None] + offsets[None, None, :]).repeat(2, axis=1).ravel()

    arrays = [np.concatenate([part[idx] for part in parts]) for idx in range(5)]
    arrays = _maximal(arrays)

    cover = WhitneyCover(domain, k_min, k_max, arrays, raw_counts, eta)
    _LOG.debug("Whitney cover of %s to level %d: %d squares examined, %d raw, %d retained",
               getattr(domain, "name", "domain"), k_max, examined, sum(raw_counts.values()),
               len(cover))
    return cover

def _maximal(arrays):
    """Keep the squares which are not contained in another square of the raw cover."""

    levels, ix, iy = arrays[:3]
    keep = np.ones(len(levels), dtype=bool)
    present = np.unique(levels)
    keysets = {lvl : _keys(ix[levels == lvl], iy[levels == lvl]) for lvl in present}

    for lvl in present:
        sel = np.nonzero(levels == lvl)[0]
        for anc in present:
            if anc >= lvl:
                break
            shift = lvl - anc
            covered = np.isin(_keys(ix[sel] >> shift, iy[sel] >> shift), keysets[anc])
            keep[sel[covered]] = False

    return [arr[keep] for arr in arrays]

class EpsRestriction:
    """
    The smallest sub-collection of a Whitney cover containing all squares which reach the part of
    the domain farther than 'epsilon' from the boundary.
    """

    def __init__(self, cover, epsilon, selected, boundary):
        """The class constructor. Use 'restrict_eps()' to create objects of this class."""

        self.cover = cover
        self.epsilon = epsilon
        self.n = cover.n
        self.levels = cover.levels[selected]
        self.ix = cover.ix[selected]
        self.iy = cover.iy[selected]
        self.boundary_levels = cover.levels[selected & boundary]
        self.perimeter = union_perimeter(self)

    def __len__(self):
        """The amount of squares."""
        return len(self.levels)

    def boundary_diams(self):
        """The distinct diameters of the squares touching the 'epsilon' tube."""
        return sorted({cube_diam(lvl, self.n) for lvl in self.boundary_levels}, reverse=True)

    def perimeter_bound(self, a_omega, delta):
        """Return the perimeter bound 'a_omega * epsilon^((n-1) - delta)'."""
        return a_omega * self.epsilon**((self.n - 1) - delta)

    def as_dict(self):
        """Return a dictionary describing the restriction."""

        return {"epsilon" : self.epsilon, "cubes" : len(self), "perimeter" : self.perimeter,
                "boundary_diams" : self.boundary_diams()}

def restrict_eps(cover, epsilon):
    """
    Return the 'EpsRestriction' of 'cover': the squares containing points at distance at least
    'epsilon' from the boundary. Squares which cannot be decided within the certified tolerance are
    included.
    """

    need = 5 * cube_diam(cover.k_max, cover.n)
    if epsilon < need:
        raise ErrorPrecondition("epsilon %g needs squares finer than the built level %d, it must "
                                "be at least %g" % (epsilon, cover.k_max, need))

    diams = cover.diams
    far = np.minimum(cover.dist + diams, cover.center_sd + diams / 2)
    selected = far >= epsilon - cover.eta
    boundary = cover.dist <= epsilon + cover.eta
    return EpsRestriction(cover, epsilon, selected, boundary)

def union_perimeter(restriction):
    """
    Return the exact perimeter of the union of the squares of 'restriction': the unit edges of all
    squares are counted at the finest level, the edges occurring once are on the union boundary.
    """

    levels = np.asarray(restriction.levels)
    if not len(levels):
        return 0.0
    if restriction.n != 2:
        raise Error("union perimeter is implemented for planar squares only")

    finest = int(levels.max())
    horizontal = []
    vertical = []
    for lvl in np.unique(levels):
        sel = levels == lvl
        scale = 2**(finest - int(lvl))
        x0 = restriction.ix[sel].astype(np.int64) * scale
        y0 = restriction.iy[sel].astype(np.int64) * scale
        steps = np.arange(scale, dtype=np.int64)
        # Bottom and top edges, then left and right edges, as unit edge start points.
        hx = (x0[:, None] + steps[None, :]).ravel()
        for yrow in (y0, y0 + scale):
            horizontal.append(np.stack([hx, np.repeat(yrow, scale)], axis=1))
        vy = (y0[:, None] + steps[None, :]).ravel()
        for xcol in (x0, x0 + scale):
            vertical.append(np.stack([np.repeat(xcol, scale), vy], axis=1))

    exposed = 0
    for edges in (horizontal, vertical):
        _, counts = np.unique(np.concatenate(edges), axis=0, return_counts=True)
        exposed += int(np.count_nonzero(counts == 1))

    return exposed * 2.0**-finest

def a_omega(frak_m, delta, n=2):
    """
    Return the union perimeter constant 'A = 2n (2 sqrt(n))^(delta-(n-1)) frak_m
    sum_{k=0..2} 2^(-k((n-1)-delta))'.
    """

    series = sum(2.0**(-k * ((n - 1) - delta)) for k in range(3))
    return 2 * n * (2 * math.sqrt(n))**(delta - (n - 1)) * frak_m * series

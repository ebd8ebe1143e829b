#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
Certified distances to the boundary of a polygonal domain approximation.

The boundary segments are kept in a shapely 'STRtree', nearest-segment queries give exact
distances to the polygon. The polygon is within the Hausdorff error of the true boundary, so every
distance to the true boundary is in '[d - tolerance, d + tolerance]'.
"""

import logging
import numpy as np
import shapely
from shapely.geometry import Polygon

_LOG = logging.getLogger("Distance")

class BoundaryIndex:
    """Nearest-segment index over the boundary of a polygon."""

    def __init__(self, ring, tolerance=0.0):
        """
        The class constructor. The arguments are as follows.
          * ring - closed '(N, 2)' vertex ring of the polygon (first vertex repeated at the end).
          * tolerance - the certified distance between the polygon and the true boundary.
        """

        ring = np.asarray(ring, dtype=float)
        self.tolerance = float(tolerance)
        self.polygon = Polygon(ring)
        shapely.prepare(self.polygon)

        self._segments = shapely.linestrings(np.stack([ring[:-1], ring[1:]], axis=1))
        self._tree = shapely.STRtree(self._segments)
        _LOG.debug("indexed %d boundary segments, tolerance %.3g", len(self._segments),
                   self.tolerance)

    @classmethod
    def from_domain(cls, domain):
        """Build the index of a 'SnowflakeDomain' boundary."""
        return cls(domain.ring, domain.hausdorff_error)

    @property
    def bounds(self):
        """The '(minx, miny, maxx, maxy)' bounding box of the polygon."""
        return self.polygon.bounds

    def _nearest(self, geoms):
        """Return the distances from every geometry of 'geoms' to the nearest boundary segment."""

        result = np.full(len(geoms), np.inf)
        if len(geoms) == 0:
            return result
        indices, dists = self._tree.query_nearest(geoms, return_distance=True, all_matches=False)
        result[indices[0]] = dists
        return result

    def distance(self, points):
        """Return the distances from the '(N, 2)' points to the polygon boundary."""

        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._nearest(shapely.points(points))

    def contains(self, points):
        """Return the boolean array telling which of the '(N, 2)' points are inside the polygon."""

        points = np.atleast_2d(np.asarray(points, dtype=float))
        return shapely.contains_xy(self.polygon, points[:, 0], points[:, 1])

    def signed_distance(self, points):
        """Return the signed distances of the '(N, 2)' points, positive inside the polygon."""

        dist = self.distance(points)
        return np.where(self.contains(points), dist, -dist)

    def box_distance(self, xmin, ymin, xmax, ymax):
        """
        Return the distances from the axis-parallel boxes to the polygon boundary. The arguments
        are arrays of box coordinates, boxes crossing the boundary get distance 0.
        """

        return self._nearest(shapely.box(xmin, ymin, xmax, ymax))

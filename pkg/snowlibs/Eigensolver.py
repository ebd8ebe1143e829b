#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This module implements a finite-volume Neumann Laplacian on rasterized planar domains and the
numerical checks built on top of it: the smallest eigenvalues, Rayleigh quotients and the
Poincare-Wirtinger check of cover elements.

Domains are rasterized into square cells of side 'h'. Two occupied cells sharing an edge are
coupled by the flux '(u_i - u_j) / h^2', there is no flux through the edges of unoccupied cells.
This is the 5-point stencil with a reflecting (ghost cell) closure at the raster boundary, so the
operator is symmetric positive semi-definite with the constants as its kernel.
"""

import math
import logging
import numpy as np
import shapely
from scipy import linalg, ndimage, sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu
from snowlibs import Constants, Foliation, IFS
from snowlibs.Exceptions import ErrorDisconnected, ErrorNonConvergence, ErrorPrecondition

_LOG = logging.getLogger("Eigensolver")

# The default residual tolerance of the iterative eigensolver.
DEFAULT_TOL = 1e-8
# The largest accepted relative residual '|Au - lambda u| / (lambda |u|)' of a computed eigenpair.
RESIDUAL_TOL = 1e-6
# Operators of at most this many unknowns are solved densely.
DENSE_LIMIT = 400
# The shift-invert shift, relative to the expected first non-trivial eigenvalue.
SHIFT_FACTOR = 0.01
# The required ratio of the numerical eigenvalue and the certified lower bound.
HEADROOM = 1.05
# The highest frequency of the band-limited trial fields.
TRIAL_BAND = 4
# The fringe generation the element rasters must resolve.
FRINGE_GENERATION = 3

CSV_HEADER = ("x", "y", "u")

class GridMask:
    """A raster of a planar domain: a boolean cell occupancy array over a bounding box."""

    def __init__(self, cells, h, origin=(0.0, 0.0)):
        """
        The class constructor. The arguments are as follows.
          * cells - the boolean '(ny, nx)' occupancy array, row 'iy' is at 'y = origin_y + iy h'.
          * h - the cell side.
          * origin - the lower left corner of the bounding box.
        """

        self.cells = np.asarray(cells, dtype=bool)
        self.h = float(h)
        self.origin = (float(origin[0]), float(origin[1]))

        self.labels, self.components = ndimage.label(self.cells)
        self.connected = self.components == 1

    @property
    def unknowns(self):
        """The amount of occupied cells."""
        return int(np.count_nonzero(self.cells))

    @property
    def area(self):
        """The area of the occupied cells."""
        return self.unknowns * self.h * self.h

    def centers(self):
        """Return the 'x' and 'y' arrays of the occupied cell centers in the unknown order."""

        iy, ix = np.nonzero(self.cells)
        return self.origin[0] + (ix + 0.5) * self.h, self.origin[1] + (iy + 0.5) * self.h

    def largest_component(self):
        """Return a new mask with only the largest connected component of this one."""

        if self.components <= 1:
            return self
        sizes = np.bincount(self.labels.ravel())
        sizes[0] = 0
        return GridMask(self.labels == np.argmax(sizes), self.h, self.origin)

    def as_dict(self):
        """Return a dictionary describing the mask."""

        ny, nx = self.cells.shape
        return {"h" : self.h, "nx" : nx, "ny" : ny, "origin" : list(self.origin),
                "unknowns" : self.unknowns, "components" : self.components,
                "connected" : self.connected}

def _finish_mask(cells, h, origin, keep_largest):
    """Build the mask and drop the small components if 'keep_largest' is 'True'."""

    mask = GridMask(cells, h, origin)
    if mask.unknowns == 0:
        raise ErrorPrecondition("no cell of the %g raster lies inside the domain" % h)
    if keep_largest and not mask.connected:
        _LOG.debug("keeping the largest of %d raster components", mask.components)
        mask = mask.largest_component()
    return mask

def rasterize(region, h, margin=None, keep_largest=False):
    """
    Rasterize 'region' into a 'GridMask' of cell side 'h'. The 'region' argument is a shapely
    polygon or an object with a 'polygon' attribute (domains, cover elements). A cell is occupied if
    its center is inside the polygon farther than 'margin' from the boundary. The margin defaults to
    the 'hausdorff_error' attribute of 'region', so that every occupied cell center is inside the
    true domain.
    """

    polygon = getattr(region, "polygon", region)
    if margin is None:
        margin = getattr(region, "hausdorff_error", 0.0)

    xmin, ymin, xmax, ymax = polygon.bounds
    nx = max(1, int(math.ceil((xmax - xmin) / h - 1e-9)))
    ny = max(1, int(math.ceil((ymax - ymin) / h - 1e-9)))
    xs = xmin + (np.arange(nx) + 0.5) * h
    ys = ymin + (np.arange(ny) + 0.5) * h
    xgrid, ygrid = np.meshgrid(xs, ys)

    cells = shapely.contains_xy(polygon, xgrid, ygrid)
    if margin > 0 and cells.any():
        points = shapely.points(xgrid[cells], ygrid[cells])
        cells[cells] = shapely.distance(polygon.boundary, points) > margin

    return _finish_mask(cells, h, (xmin, ymin), keep_largest)

def rasterize_disk(radius, h, center=(0.0, 0.0)):
    """Rasterize the disk of 'radius' around 'center': cells with the center inside the disk."""

    cells_across = int(math.ceil(2 * radius / h - 1e-9))
    origin = (center[0] - radius, center[1] - radius)
    coords = (np.arange(cells_across) + 0.5) * h - radius
    xgrid, ygrid = np.meshgrid(coords, coords)
    return _finish_mask(xgrid**2 + ygrid**2 < radius**2, h, origin, False)

class NeumannOperator:
    """The assembled finite-volume Neumann Laplacian of a connected grid mask."""

    def __init__(self, matrix, mask):
        """The class constructor."""

        self.matrix = matrix
        self.mask = mask

    @property
    def size(self):
        """The amount of unknowns."""
        return self.matrix.shape[0]

    @property
    def h(self):
        """The cell side."""
        return self.mask.h

    def extent(self):
        """The larger side of the bounding box of the occupied cells."""

        iy, ix = np.nonzero(self.mask.cells)
        return self.h * max(ix.max() - ix.min() + 1, iy.max() - iy.min() + 1)

    def __matmul__(self, vec):
        """Apply the operator to 'vec'."""
        return self.matrix @ vec

def _path_adjacency(size):
    """The adjacency matrix of a path of 'size' nodes."""

    ones = np.ones(size)
    return sparse.spdiags([ones, ones], [-1, 1], size, size)

def assemble_neumann(mask):
    """
    Assemble the Neumann Laplacian of the 'mask' raster and return a 'NeumannOperator' object.
    Raises 'ErrorDisconnected' if the occupied cells are not one connected component.
    """

    if not mask.connected:
        raise ErrorDisconnected("the raster has %d connected components, the Neumann operator "
                                "needs exactly one" % mask.components)

    ny, nx = mask.cells.shape
    # The adjacency of the whole bounding box, rows are numbered 'iy * nx + ix'.
    adjacency = sparse.kron(sparse.identity(ny), _path_adjacency(nx)) + \
                sparse.kron(_path_adjacency(ny), sparse.identity(nx))
    occupied = np.flatnonzero(mask.cells.ravel())
    adjacency = sparse.csr_matrix(adjacency)[occupied][:, occupied]

    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    matrix = (sparse.diags(degree) - adjacency) / (mask.h * mask.h)

    _LOG.debug("assembled the Neumann operator: %d unknowns, %d non-zeros",
               matrix.shape[0], matrix.nnz)
    return NeumannOperator(sparse.csr_matrix(matrix), mask)

def rayleigh(op, vec):
    """Return the discrete Rayleigh quotient '<Au, u> / <u, u>'."""

    vec = np.asarray(vec, dtype=float)
    return float(vec @ (op @ vec)) / float(vec @ vec)

class SpectralResult:
    """The smallest Neumann eigenvalues of a raster with the residuals of the eigenpairs."""

    def __init__(self, eigenvalues, vectors, residuals, mask):
        """
        The class constructor. The 'vectors' argument is the '(unknowns, m)' array of the
        eigenvectors, column 'i' belongs to 'eigenvalues[i]'.
        """

        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.vectors = vectors
        self.residuals = np.asarray(residuals, dtype=float)
        self.mask = mask

    @property
    def h(self):
        """The cell side of the raster."""
        return self.mask.h

    @property
    def lambda2(self):
        """The first non-trivial eigenvalue."""
        return float(self.eigenvalues[1])

    def csv_rows(self, index=1):
        """Yield the '(x, y, u)' rows of eigenvector 'index' at the occupied cell centers."""

        xs, ys = self.mask.centers()
        for x, y, val in zip(xs, ys, self.vectors[:, index]):
            yield (float(x), float(y), float(val))

    def as_dict(self):
        """Return a dictionary describing the result."""

        return {"eigenvalues" : self.eigenvalues, "residuals" : self.residuals, "h" : self.h,
                "unknowns" : self.mask.unknowns}

def _residuals(op, values, vectors):
    """Return the '|Au - lambda u| / |u|' residuals of the eigenpairs."""

    diff = op.matrix @ vectors - vectors * values
    return np.linalg.norm(diff, axis=0) / np.linalg.norm(vectors, axis=0)

def _dense_eigs(op, m):
    """Solve small problems densely."""

    values, vectors = linalg.eigh(op.matrix.toarray())
    return values[:m], vectors[:, :m]

def _mean_free(vec):
    """Project 'vec' onto the mean-zero subspace."""
    return vec - vec.mean()

def _sparse_eigs(op, m, tol, seed):
    """
    Compute the 'm - 1' smallest non-trivial eigenpairs with shift-invert Lanczos on the mean-zero
    subspace and prepend the constant mode.
    """

    size = op.size
    sigma = -SHIFT_FACTOR * (math.pi / op.extent())**2
    lu = splu(sparse.csc_matrix(op.matrix - sigma * sparse.identity(size)))
    # The constants are in the kernel of the projected inverse, so they never show up.
    op_inv = LinearOperator(matvec=lambda vec: _mean_free(lu.solve(_mean_free(vec))),
                            shape=(size, size), dtype=float)

    rng = np.random.default_rng(seed)
    start = _mean_free(rng.standard_normal(size))
    budget = int(50 * math.sqrt(size)) + 20

    try:
        values, vectors = eigsh(op.matrix, k=m - 1, sigma=sigma, which="LM", OPinv=op_inv,
                                v0=start, tol=tol, maxiter=budget)
    except ArpackNoConvergence as err:
        achieved = float("inf")
        if len(err.eigenvalues):
            achieved = float(np.max(_residuals(op, err.eigenvalues, err.eigenvectors)))
        raise ErrorNonConvergence("shift-invert Lanczos after %d iterations" % budget, achieved,
                                  tol) from None

    order = np.argsort(values)
    constant = np.full((size, 1), 1 / math.sqrt(size))
    return np.concatenate([[0.0], values[order]]), np.hstack([constant, vectors[:, order]])

def smallest_eigs(op, m=6, tol=DEFAULT_TOL, seed=0):
    """
    Return the 'm' smallest eigenvalues of the 'op' Neumann operator as a 'SpectralResult'. The
    constant mode is the first one, the rest are computed on its orthogonal complement. Raises
    'ErrorNonConvergence' if the iteration budget is exhausted or the residuals are too large.
    """

    if m < 2:
        raise ErrorPrecondition("at least 2 eigenvalues are needed, got %d" % m)
    if m > op.size:
        raise ErrorPrecondition("%d eigenvalues requested, but the raster has only %d cells"
                                % (m, op.size))

    if op.size <= max(DENSE_LIMIT, 2 * m + 1):
        values, vectors = _dense_eigs(op, m)
    else:
        values, vectors = _sparse_eigs(op, m, tol, seed)

    residuals = _residuals(op, values, vectors)
    scale = np.maximum(np.abs(values), values[1] if m > 1 else 1.0)
    worst = float(np.max(residuals / scale))
    if worst > RESIDUAL_TOL:
        raise ErrorNonConvergence("eigensolver residual check", worst, RESIDUAL_TOL)

    _LOG.debug("%d unknowns, h = %g: lambda_2 = %.10g", op.size, op.h, values[1])
    return SpectralResult(values, vectors, residuals, op.mask)

def richardson(coarse, fine, order=2):
    """
    Return the Richardson extrapolation of values computed with cell sides 'h' ('coarse') and
    'h/2' ('fine') by a method of convergence order 'order'.
    """

    coarse = np.asarray(coarse, dtype=float)
    fine = np.asarray(fine, dtype=float)
    return fine + (fine - coarse) / (2**order - 1)

def convergence_order(hs, values, exact):
    """Return the least-squares slope of 'log |value - exact|' against 'log h'."""

    errors = np.abs(np.asarray(values, dtype=float) - exact)
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)

def rectangle_lambda2(width, height):
    """The first non-trivial Neumann eigenvalue of a 'width' x 'height' rectangle."""
    return (math.pi / max(width, height))**2

class TwoGridResult:
    """Eigenvalues computed on two rasters with cell sides 'h' and 'h/2' and their extrapolation."""

    def __init__(self, coarse, fine):
        """The class constructor."""

        self.coarse = coarse
        self.fine = fine
        self.extrapolated = richardson(coarse.eigenvalues, fine.eigenvalues)
        # The constant mode is exactly zero on both grids.
        self.extrapolated[0] = 0.0

    @property
    def lambda2(self):
        """The extrapolated first non-trivial eigenvalue."""
        return float(self.extrapolated[1])

    def lambda2_low(self):
        """The smallest of the coarse, fine and extrapolated first non-trivial eigenvalues."""
        return min(self.coarse.lambda2, self.fine.lambda2, self.lambda2)

    def as_dict(self):
        """Return a dictionary describing the result."""

        return {"coarse" : self.coarse.as_dict(), "fine" : self.fine.as_dict(),
                "extrapolated" : self.extrapolated}

def two_grid_eigs(make_mask, h, m=6, tol=DEFAULT_TOL, seed=0):
    """
    Compute the 'm' smallest eigenvalues on the rasters 'make_mask(h)' and 'make_mask(h/2)' and
    return a 'TwoGridResult' object.
    """

    results = []
    for step in (h, h / 2):
        op = assemble_neumann(make_mask(step))
        results.append(smallest_eigs(op, m=m, tol=tol, seed=seed))
    return TwoGridResult(*results)

def fringe_resolution(element, generation=FRINGE_GENERATION):
    """Return the largest cell side resolving the fringe of 'element' down to 'generation'."""

    system = element.system
    side = element.placement.scale
    if element.kind == Foliation.FRINGED:
        side *= system.p
    return system.height * system.p**generation * side

def element_mask(element, h):
    """Rasterize a cover element, keeping the largest raster component."""
    return rasterize(element, h, margin=element.hausdorff_error, keep_largest=True)

class PoincareCheck:
    """The sampled Poincare-Wirtinger ratios of a cover element against its certified constant."""

    def __init__(self, ratios, bound, lambda2, h):
        """
        The class constructor. The arguments are as follows.
          * ratios - the '|u - mean_E(u)|^2 / |grad u|^2' ratios of the trial fields.
          * bound - the certified constant 'C' the ratios must not exceed.
          * lambda2 - the numerical first non-trivial eigenvalue of the element raster.
          * h - the raster cell side.
        """

        self.ratios = np.asarray(ratios, dtype=float)
        self.bound = bound
        self.lambda2 = lambda2
        self.h = h

    @property
    def worst(self):
        """The largest ratio."""
        return float(self.ratios.max())

    @property
    def passed(self):
        """'True' if all the ratios are within the bound."""
        return self.worst <= self.bound

    def as_dict(self):
        """Return a dictionary describing the check."""

        return {"trials" : len(self.ratios), "worst_ratio" : self.worst, "bound" : self.bound,
                "lambda2" : self.lambda2, "h" : self.h, "passed" : self.passed}

def _trial_fields(xs, ys, trials, rng):
    """
    Return '(unknowns, trials)' band-limited random fields: cosine series over the bounding box of
    the points with random coefficients decaying like '1 / (1 + j^2 + l^2)'.
    """

    unit_x = (xs - xs.min()) / max(np.ptp(xs), 1e-300)
    unit_y = (ys - ys.min()) / max(np.ptp(ys), 1e-300)
    freqs = [(j, l) for j in range(TRIAL_BAND + 1) for l in range(TRIAL_BAND + 1) if j or l]
    basis = np.column_stack([np.cos(math.pi * j * unit_x) * np.cos(math.pi * l * unit_y)
                             for j, l in freqs])
    decay = np.array([1 / (1 + j * j + l * l) for j, l in freqs])
    coeffs = rng.standard_normal((len(freqs), trials)) * decay[:, None]
    return basis @ coeffs

def poincare_ratios(op, fields, box_cells):
    """
    Return the '|u - mean_E(u)|^2 / |grad u|^2' ratios of the columns of 'fields', where the mean
    is taken over the 'box_cells' boolean selection of the unknowns.
    """

    means = fields[box_cells].mean(axis=0)
    deviation = np.sum((fields - means)**2, axis=0)
    energy = np.einsum("ij,ij->j", fields, op.matrix @ fields)
    return deviation / energy

def poincare_check(element, trials=100, seed=0, h=None):
    """
    Sample the Poincare-Wirtinger inequality '|u - mean_E(u)|^2 <= C |grad u|^2' on a cover element,
    where 'C' is the inverse of the certified eigenvalue lower bound of the element. The trial
    fields are 'trials' random band-limited fields plus the first non-trivial eigenvector, the
    extremal field. Returns a 'PoincareCheck' object.

    The raster must resolve the element fringe down to generation 3, raises 'ErrorPrecondition'
    otherwise.
    """

    if trials < 1:
        raise ErrorPrecondition("at least one trial is needed, got %d" % trials)

    finest = fringe_resolution(element)
    if h is None:
        h = finest / 2
    if h > finest:
        raise ErrorPrecondition("cell side %g does not resolve the element fringe to generation "
                                "%d, use at most %g" % (h, FRINGE_GENERATION, finest))
    if element.fringe_level < FRINGE_GENERATION:
        raise ErrorPrecondition("the element fringe is only built to level %d, at least %d is "
                                "needed" % (element.fringe_level, FRINGE_GENERATION))

    mask = element_mask(element, h)
    op = assemble_neumann(mask)
    spectrum = smallest_eigs(op, m=2, seed=seed)

    xs, ys = mask.centers()
    box_cells = shapely.contains_xy(element.box_polygon(), xs, ys)
    if not box_cells.any():
        raise ErrorPrecondition("no raster cell lies inside the element box, cell side %g is too "
                                "coarse" % h)

    rng = np.random.default_rng(seed)
    fields = np.column_stack([_trial_fields(xs, ys, trials, rng), spectrum.vectors[:, 1]])
    ratios = poincare_ratios(op, fields, box_cells)

    bound = 1 / Constants.element_poincare(element)
    check = PoincareCheck(ratios, bound, spectrum.lambda2, h)
    _LOG.debug("Poincare check of %s: worst ratio %.4g, bound %.4g", element.kind, check.worst,
               bound)
    return check

class ElementVerification:
    """The numerical verification of the certified eigenvalue bound of one cover element."""

    def __init__(self, element, spectrum, c1, poincare, area_identity):
        """The class constructor."""

        self.element = element
        self.spectrum = spectrum
        self.bound = c1 / element.epsilon**2
        self.lambda2 = spectrum.lambda2_low()
        self.headroom = self.lambda2 / self.bound
        self.poincare = poincare
        self.area = area_identity

    @property
    def passed(self):
        """'True' if the eigenvalue has the headroom and the Poincare and area checks pass."""
        return self.headroom >= HEADROOM and self.poincare.passed and self.area["passed"]

    def as_dict(self):
        """Return a dictionary describing the verification."""

        return {"kind" : self.element.kind, "k" : self.element.k,
                "epsilon" : self.element.epsilon, "lambda2" : self.lambda2,
                "lambda2_extrapolated" : self.spectrum.lambda2, "bound" : self.bound,
                "headroom" : self.headroom, "poincare" : self.poincare.as_dict(),
                "area_identity" : self.area, "passed" : self.passed}

def area_identity(element, tol=5e-3):
    """
    Compare the change-of-variables area of 'element' (the base integral of the fiber integrals)
    with the element area. Returns a dictionary with the relative difference.
    """

    foliated = Foliation.change_of_variables_area(element)
    rel = abs(foliated - element.vol) / element.vol
    return {"foliated" : foliated, "area" : element.vol, "polygon" : float(element.polygon.area),
            "relative" : rel, "passed" : rel <= tol}

def verify_element(element, c1, trials=100, seed=0, h=None):
    """
    Verify 'lambda_2 >= C1 eps^-2' with the required headroom on the raster of 'element', run the
    Poincare check and the change-of-variables area identity. Returns an 'ElementVerification'
    object.
    """

    if h is None:
        h = fringe_resolution(element) / 2
    spectrum = two_grid_eigs(lambda step: element_mask(element, step), h, m=2, seed=seed)
    poincare = poincare_check(element, trials=trials, seed=seed, h=h)
    return ElementVerification(element, spectrum, c1, poincare, area_identity(element))

def verify_square(cells_per_unit, seed=0):
    """
    Return the extrapolated first non-trivial eigenvalue of the unit square together with the
    observed convergence order over three rasters.
    """

    square = shapely.box(0, 0, 1, 1)
    h = 1 / cells_per_unit
    values = []
    hs = [2 * h, h, h / 2]
    for step in hs:
        op = assemble_neumann(rasterize(square, step))
        values.append(smallest_eigs(op, m=2, seed=seed).lambda2)

    exact = math.pi**2
    extrapolated = float(richardson(values[1], values[2]))
    return {"lambda2" : extrapolated, "exact" : exact,
            "relative_error" : abs(extrapolated - exact) / exact,
            "order" : convergence_order(hs, values, exact), "raw" : values}

def verify_disk(cells_per_unit, seed=0):
    """
    Return the extrapolated first non-trivial eigenvalue of the unit disk and the ball bound of the
    same area, which it attains.
    """

    spectrum = two_grid_eigs(lambda step: rasterize_disk(1.0, step), 1 / cells_per_unit, m=2,
                             seed=seed)
    bound = Constants.weinberger_upper(math.pi)
    return {"lambda2" : spectrum.lambda2, "bound" : bound,
            "relative_error" : abs(spectrum.lambda2 - bound) / bound}

def element_epsilon(p, k):
    """The midpoint of the scale interval 'J_k'."""

    low, high = Foliation.scale_interval(p, k)
    return (low + high) / 2

def verify_elements(p, c1, ks=(2, 3), trials=100, seed=0):
    """Verify the fR, sR and lR elements at the midpoints of the 'ks' scale intervals."""

    system = IFS.make_p_koch(p)
    results = []
    for k in ks:
        eps = element_epsilon(p, k)
        for kind in Foliation.ELEMENT_KINDS:
            element = Foliation.make_element(system, kind, k, eps)
            results.append(verify_element(element, c1, trials=trials, seed=seed))
    return results

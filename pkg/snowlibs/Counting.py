#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This module implements eigenvalue counting for cubes and rectangles, where the spectrum is known
exactly, and assembles the explicit upper and lower bounds of the counting functions of snowflake
domains.

Counting functions count eigenvalues less than or equal to 't'. The eigenvalues of the box with
sides 's_1, ..., s_n' are 'pi^2 sum (k_i/s_i)^2' with 'k_i >= 0' (Neumann) or 'k_i >= 1'
(Dirichlet).
"""

import math
import logging
import numpy as np
from snowlibs import Constants
from snowlibs.Exceptions import Error, ErrorDomain, ErrorPrecondition, ErrorResource
from snowlibs.Exceptions import ErrorCoupling

_LOG = logging.getLogger("Counting")

NEUMANN = "Neumann"
DIRICHLET = "Dirichlet"
BCS = (NEUMANN, DIRICHLET)

# Scaled thresholds 't s^2 / pi^2' above this are refused.
MAX_THRESHOLD = 1e16

# Relative slack of thresholds, so that eigenvalues equal to 't' are counted despite rounding.
_ROUNDING = 1e-12

# The default scale 'X' of the absolute bound, must be at least '10 sqrt(n)'.
DEFAULT_X = 20.0

CSV_HEADER = ("t", "upper", "lower", "weyl")

class CountQuery:
    """A counting query for the cube of side 'side' in dimension 'n'."""

    def __init__(self, n, side, t, bc=NEUMANN):
        """The class constructor."""

        if n < 1:
            raise ErrorDomain("n", n, "[1, inf)")
        if not side > 0:
            raise ErrorDomain("side", side, "(0, inf)")
        if not math.isfinite(t):
            raise ErrorPrecondition("spectral parameter must be finite, not %s" % t)
        if bc not in BCS:
            raise Error("bad boundary condition '%s', use one of: %s" % (bc, ", ".join(BCS)))

        self.n = n
        self.side = side
        self.t = t
        self.bc = bc

def _threshold(t, side):
    """Return the scaled threshold 't side^2 / pi^2' with the rounding slack."""

    value = max(t, 0.0) * side * side / math.pi**2
    if value > MAX_THRESHOLD:
        raise ErrorResource("lattice count", "threshold %.3g" % value, "%.3g" % MAX_THRESHOLD)
    return value * (1 + _ROUNDING) + _ROUNDING

def _isqrt_array(values):
    """Return the exact integer square roots of the non-negative integer array 'values'."""

    roots = np.floor(np.sqrt(values.astype(float))).astype(np.int64)
    roots -= (roots * roots > values).astype(np.int64)
    roots += ((roots + 1) * (roots + 1) <= values).astype(np.int64)
    return roots

def _count_ball(n, bound, start):
    """
    Count the points of '{start, start+1, ...}^n' with squared norm at most the integer 'bound',
    peeling one dimension per recursion level.
    """

    if bound < 0:
        return 0
    root = math.isqrt(bound)
    if root < start:
        return 0
    if n == 1:
        return root - start + 1

    ks = np.arange(start, root + 1, dtype=np.int64)
    rest = bound - ks * ks
    if n == 2:
        counts = _isqrt_array(rest) - start + 1
        return int(np.sum(np.maximum(counts, 0)))
    return sum(_count_ball(n - 1, int(val), start) for val in rest)

def count_cube(query):
    """Return the exact eigenvalue count of the cube described by the 'CountQuery' object."""

    bound = math.floor(_threshold(query.t, query.side))
    start = 0 if query.bc == NEUMANN else 1
    return _count_ball(query.n, bound, start)

def count(n, side, t, bc=NEUMANN):
    """A shortcut for 'count_cube(CountQuery(n, side, t, bc))'."""
    return count_cube(CountQuery(n, side, t, bc))

def count_rectangle(sides, t, bc=NEUMANN):
    """
    Return the exact eigenvalue count of the box with the 'sides' side lengths. Tuples of indices
    are counted directly, the spectrum of a box is the sum of the spectra of its sides.
    """

    sides = [float(side) for side in sides]
    if not sides or min(sides) <= 0:
        raise ErrorDomain("sides", sides, "(0, inf)^n")
    if bc not in BCS:
        raise Error("bad boundary condition '%s', use one of: %s" % (bc, ", ".join(BCS)))

    start = 0 if bc == NEUMANN else 1
    bound = max(t, 0.0) / math.pi**2
    bound = bound * (1 + _ROUNDING) + _ROUNDING
    if bound * max(sides)**2 > MAX_THRESHOLD:
        raise ErrorResource("lattice count", "threshold %.3g" % bound, "%.3g" % MAX_THRESHOLD)
    return _count_box(sides, bound, start)

def _count_box(sides, bound, start):
    """Count the index tuples with 'sum (k_i/s_i)^2 <= bound'."""

    if bound < 0:
        return 0
    top = math.floor(sides[0] * math.sqrt(bound))
    if top < start:
        return 0
    if len(sides) == 1:
        return top - start + 1

    ks = np.arange(start, top + 1, dtype=float)
    rest = bound - (ks / sides[0])**2
    if len(sides) == 2:
        tops = np.floor(sides[1] * np.sqrt(np.maximum(rest, 0.0))).astype(np.int64)
        return int(np.sum(np.maximum(tops - start + 1, 0)))
    return sum(_count_box(sides[1:], float(val), start) for val in rest)

def polya_and_shift_bounds(query):
    """
    Return the '(polya_ok, shifted_upper)' pair for the cube of the 'query': whether the Dirichlet
    count is below the Weyl term, and the upper bound 'C_W (s sqrt(t) + 2 pi sqrt(n))^n' of the
    Neumann count.
    """

    weyl = Constants.weyl_constant(query.n)
    t = max(query.t, 0.0)
    dirichlet = count_cube(CountQuery(query.n, query.side, t, DIRICHLET))
    polya_ok = dirichlet <= weyl * query.side**query.n * t**(query.n / 2)
    shifted = weyl * (query.side * math.sqrt(t) + 2 * math.pi * math.sqrt(query.n))**query.n
    return polya_ok, shifted

def bracketing_defect(n, side, t):
    """Return 'N_N - N_D' of the cube, which is non-negative."""

    return count(n, side, t, NEUMANN) - count(n, side, t, DIRICHLET)

def _check_coupling(led, t):
    """Raise 'ErrorCoupling' if 't' is below the certified range of the ledger."""

    if not t >= led.t0:
        raise ErrorCoupling(t, led.t0)

def s1_bound(led, t):
    """
    Return the bound 'S1 t^(delta/2)' of the part of the counting function carried by the cover of
    the eps-neighbourhood, eps coupled to 't'.
    """

    _check_coupling(led, t)
    return led.S1 * t**(led.delta / 2)

def slice_range(led, t, X=DEFAULT_X):
    """Return the '(k_min, k_max)' range of the Whitney slices inside the eps-neighbourhood."""

    if X < 10 * math.sqrt(led.n):
        raise ErrorDomain("X", X, "[10 sqrt(n), inf)")
    eps = led.epsilon_of(t)
    k_min = math.floor(-math.log2(led.diameter / math.sqrt(led.n)))
    k_max = math.floor(math.log2(X / eps)) - 1
    return k_min, k_max

def s2_bound_absolute(led, t, slice_counts=None, X=DEFAULT_X, exact=True):
    """
    Return the bound of the part of the counting function carried by the Whitney cubes outside
    of the eps-neighbourhood: the sum over the slices of the cube count times the Neumann count of
    one cube. The arguments are as follows.
      * led - the 'ConstantsLedger' object.
      * t - the spectral parameter.
      * slice_counts - a dictionary of measured slice cardinalities, the slice law
                       'frak_m 2^(k delta)' is used for the missing slices.
      * X - the scale of the slice range.
      * exact - count the cube eigenvalues exactly, use the shifted Polya bound otherwise.
    """

    _check_coupling(led, t)
    if slice_counts is None:
        slice_counts = {}

    total = 0.0
    k_min, k_max = slice_range(led, t, X)
    for k in range(k_min, k_max + 1):
        cubes = slice_counts.get(k, led.M_frak * 2.0**(k * led.delta))
        query = CountQuery(led.n, 2.0**-k, t)
        if exact:
            per_cube = count_cube(query)
        else:
            per_cube = polya_and_shift_bounds(query)[1]
        total += cubes * per_cube
    return total

def absolute_coefficients(led, X=DEFAULT_X):
    """
    Return the '(a, b, c)' coefficients of the absolute bound
    'N_N(t) - C_W vol t <= C_W (a t^(delta/2) - b - c sqrt(t))', valid for 't >= t0'.
    """

    if X < 10 * math.sqrt(led.n):
        raise ErrorDomain("X", X, "[10 sqrt(n), inf)")

    delta, n = led.delta, led.n
    coupling = led.coupling
    x = math.sqrt(n) / (2 * led.diameter)
    series = 2**delta - 1
    series_low = 2**(delta - 1) - 1
    lattice = 8 * math.pi**2
    shift = 4 * math.pi * math.sqrt(2)

    a = 4 * math.pi * led.S1 + led.M_frak * \
        (lattice * X**delta * coupling**(delta / 2) / series +
         shift * X**(delta - 1) * coupling**((delta - 1) / 2) / series_low)
    b = led.M_frak * lattice * x**delta / series
    c = led.M_frak * shift * x**(delta - 1) / series_low
    return a, b, c

def lower_bound_vdbl(vol, delta, n, C_tilde, t):
    """
    Return the lower bound of the Dirichlet counting function of a domain of volume 'vol' whose
    inner tubes satisfy 'vol(tube) <= C_tilde eps^(n-delta)'.
    """

    if not n - 1 <= delta < n:
        raise ErrorDomain("delta", delta, "[n-1, n)")

    weyl = Constants.weyl_constant(n) * vol * t**(n / 2)
    if delta > n - 1:
        return weyl - vdbl_coefficient(delta, n, C_tilde) * t**(delta / 2)

    if not t > 4 / vol**(2 / n):
        raise ErrorPrecondition("the logarithmic lower bound needs t > 4/vol^(2/n) = %g"
                                % (4 / vol**(2 / n)))
    return weyl - 3 * C_tilde * t**((n - 1) / 2) * math.log((2 * vol)**(2 / n) * t)

def vdbl_coefficient(delta, n, C_tilde):
    """Return the coefficient '5 C_tilde / ((n-delta)(delta+1-n))' of the lower bound."""

    if not n - 1 < delta < n:
        raise ErrorDomain("delta", delta, "(n-1, n)", msg="the lower bound coefficient has poles "
                          "at delta = n-1 and delta = n, got delta = %g" % delta)
    return 5 * C_tilde / ((n - delta) * (delta + 1 - n))

class BoundReport:
    """
    The upper and lower bounds of the counting function of a domain. Bounds are lists of
    '(coefficient, exponent)' pairs of powers of 't', the first pair is the Weyl term.
    """

    def __init__(self, name, t0, upper, lower, M_abs, M_tilde, asymptotic=None, delta=None):
        """
        The class constructor. The 'M_abs' and 'M_tilde' arguments are the coefficients of the
        't^(delta/2)' remainder of the absolute and of the two-sided bound.
        """

        self.name = name
        self.t0 = t0
        self.upper = list(upper)
        self.lower = list(lower)
        self.M_abs = M_abs
        self.M_tilde = M_tilde
        self.asymptotic = list(asymptotic or [])
        # The remainder exponent is the one of the second upper bound term by default.
        self.delta = 2 * self.upper[1][1] if delta is None else delta

    @staticmethod
    def _evaluate(terms, t):
        """Evaluate a list of terms at 't'."""
        return sum(coef * t**exp for coef, exp in terms)

    def upper_at(self, t):
        """The upper bound at 't', evaluated at 'max(t, t0)' below the certified range."""
        return self._evaluate(self.upper, max(t, self.t0))

    def lower_at(self, t):
        """The lower bound at 't'."""
        return self._evaluate(self.lower, t)

    def weyl_at(self, t):
        """The Weyl term at 't'."""
        return self._evaluate(self.upper[:1], t)

    def scaled(self, alpha):
        """
        Return the report of the domain scaled by 'alpha': the counting function of the scaled
        domain at 't' equals the one of the domain at 'alpha^2 t'. The remainder coefficients
        are multiplied by 'alpha^delta'.
        """

        if not alpha > 0:
            raise ErrorDomain("alpha", alpha, "(0, inf)")

        def rescale(terms):
            """Rescale the coefficients."""
            return [(coef * alpha**(2 * exp), exp) for coef, exp in terms]

        factor = alpha**self.delta
        return BoundReport("%g*%s" % (alpha, self.name), self.t0 / alpha**2, rescale(self.upper),
                           rescale(self.lower), self.M_abs * factor, self.M_tilde * factor,
                           rescale(self.asymptotic), delta=self.delta)

    def csv_rows(self, ts):
        """Yield the '(t, upper, lower, weyl)' rows for the 'ts' parameters."""

        for t in ts:
            yield (float(t), self.upper_at(t), self.lower_at(t), self.weyl_at(t))

    def as_dict(self):
        """Return a dictionary describing the report."""

        def terms(pairs):
            """Terms as dictionaries."""
            return [{"coefficient" : coef, "exponent" : exp} for coef, exp in pairs]

        return {"domain" : self.name, "t0" : self.t0, "upper" : terms(self.upper),
                "lower" : terms(self.lower), "asymptotic" : terms(self.asymptotic),
                "M_abs" : self.M_abs, "M_tilde" : self.M_tilde}

def build_bounds(led, X=DEFAULT_X):
    """Assemble the 'BoundReport' of the snowflake described by the ledger 'led'."""

    weyl = led.weyl[led.n]
    half = led.delta / 2
    a, b, c = absolute_coefficients(led, X)

    upper = [(weyl * led.vol, led.n / 2), (weyl * a, half), (-weyl * b, 0.0), (-weyl * c, 0.5)]
    lower_coef = vdbl_coefficient(led.delta, led.n, led.C_tilde)
    lower = [(weyl * led.vol, led.n / 2), (-lower_coef, half)]
    asymptotic = [(weyl * led.vol, led.n / 2), (led.M_Omega, half)]

    M_abs = weyl * a
    name = "%s(%.6g)" % (led.kind, led.p)
    _LOG.debug("bounds of %s: a %.6g, b %.6g, c %.6g, t0 %.6g", name, a, b, c, led.t0)
    return BoundReport(name, led.t0, upper, lower, M_abs, max(M_abs, lower_coef), asymptotic,
                       delta=led.delta)

def log_grid(t_min, t_max, steps):
    """Return 'steps' logarithmically spaced spectral parameters from 't_min' to 't_max'."""

    if not 0 < t_min < t_max:
        raise ErrorPrecondition("need 0 < t_min < t_max, got %g and %g" % (t_min, t_max))
    return np.geomspace(t_min, t_max, steps)

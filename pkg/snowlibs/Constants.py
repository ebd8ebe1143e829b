#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This module evaluates the constants of the Neumann counting function remainder bounds: the Weyl
constant, the eigenvalue lower bound constants 'C1' and 'C2' of well-covered domains, the slice
constant 'C3' and the remainder coefficient 'M'.
"""

import math
import logging
import numpy as np
from scipy import optimize, special
from snowlibs import Foliation, IFS, Minkowski, Whitney
from snowlibs.Reports import tagged
from snowlibs.Exceptions import Error, ErrorDomain, ErrorPrecondition, ErrorNonConvergence

_LOG = logging.getLogger("Constants")

# The default cover multiplicity.
DEFAULT_MU = 2

# The tolerance of the alpha optimization, in log(alpha).
ALPHA_TOLERANCE = 1e-10

def weyl_constant(n):
    """Return the Weyl constant '2^-n pi^(-n/2) / Gamma(1 + n/2)'."""

    if n < 1:
        raise ErrorDomain("n", n, "[1, inf)")
    return 2.0**-n * math.pi**(-n / 2) / float(special.gamma(1 + n / 2))

def ball_volume(n):
    """The volume of the unit ball in dimension 'n'."""
    return math.pi**(n / 2) / float(special.gamma(1 + n / 2))

def c_E_rohde(p):
    """
    Return the lower bound 'min(1, 4p^2 (1-2p)^2 / ((3-2p)^2 (4p-1))) pi^2' of 'lambda_2(E) eps^2'
    over the boxes of the p-snowflake cover elements.
    """

    IFS.check_p(p)
    ratio = 4 * p * p * (1 - 2 * p)**2 / ((3 - 2 * p)**2 * (4 * p - 1))
    return min(1.0, ratio) * math.pi**2

def lemma_bound(alpha, c_E, c_r_upper, c_r_lower, c_L_upper, c_I_upper, beta_inf=1.0):
    """
    Return the lower bound of 'lambda_2 eps^2' of a well-foliated domain with normalized constants
    for the given 'alpha > 0'.
    """

    if not alpha > 0:
        raise ErrorDomain("alpha", alpha, "(0, inf)")
    box = c_r_upper**2 / c_E * (1 + (1 + alpha) * c_I_upper / (c_r_lower * beta_inf))
    fibers = (1 + 1 / alpha) * c_L_upper * c_I_upper / beta_inf
    return 1 / (box + fibers)

def _range_args(ranges):
    """The normalized constants of 'ConstantRanges' used by the lower bounds."""
    return ranges.upper("r"), ranges.lower("r"), ranges.upper("L"), ranges.upper("I")

def c1_formula(ranges, c_E, beta_inf=1.0):
    """Return the 'C1' constant of the cover with constant ranges 'ranges'."""

    c_r_upper, c_r_lower, c_L_upper, c_I_upper = _range_args(ranges)
    if min(c_r_upper, c_r_lower, c_L_upper, c_I_upper, c_E, beta_inf) <= 0:
        raise ErrorPrecondition("all constant ranges must be positive")

    root = math.sqrt(c_E * c_L_upper * c_r_lower)
    box = c_r_upper**2 / c_E * (1 + (c_r_upper + root) / (c_r_upper * beta_inf)
                                * c_I_upper / c_r_lower)
    fibers = (1 + c_r_upper / root) / beta_inf * c_L_upper * c_I_upper
    return 1 / (box + fibers)

def c1_optimized(ranges, c_E, beta_inf=1.0):
    """
    Return the '(C1, alpha)' pair with 'alpha' maximizing the lower bound, found numerically over
    'log(alpha)'.
    """

    args = _range_args(ranges)

    def negated(log_alpha):
        """The negated bound as a function of 'log(alpha)'."""
        return -lemma_bound(math.exp(log_alpha), c_E, *args, beta_inf=beta_inf)

    res = optimize.minimize_scalar(negated, bounds=(-30.0, 30.0), method="bounded",
                                   options={"xatol" : ALPHA_TOLERANCE})
    if not res.success:
        raise ErrorNonConvergence("alpha optimization", abs(res.fun), ALPHA_TOLERANCE)
    return -float(res.fun), math.exp(float(res.x))

def element_poincare(element, alpha=None):
    """
    Return the lower bound of the first non-trivial Neumann eigenvalue of a cover element from its
    foliation constants. The optimal 'alpha' is used by default.
    """

    if alpha is None:
        alpha = math.sqrt(element.L * element.r * element.lambda2_E)
    box = (1 + (1 + alpha) * element.I_beta / (element.r * element.beta_inf)) / element.lambda2_E
    fibers = (1 + 1 / alpha) * element.L * element.I_beta / element.beta_inf
    return 1 / (box + fibers)

def _bessel_root(n):
    """
    Return the first positive root of 'J_(n/2)(x) - x J_(n/2+1)(x)', the radius scaled first
    non-trivial Neumann eigenfunction root of the unit ball.
    """

    nu = n / 2

    def func(x):
        """The root equation."""
        return special.jv(nu, x) - x * special.jv(nu + 1, x)

    grid = np.linspace(1e-3, 10 + n, 4000)
    values = func(grid)
    changes = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
    if not len(changes):
        raise ErrorNonConvergence(msg="no sign change of the Bessel root equation for n=%d" % n)

    idx = changes[0]
    try:
        return optimize.brentq(func, grid[idx], grid[idx + 1], xtol=1e-14)
    except RuntimeError as err:
        raise ErrorNonConvergence(msg="Bessel root search failed for n=%d:\n%s" % (n, err)) \
              from None

def weinberger_upper(vol, n=2):
    """
    Return the upper bound 'p_n^2 (omega_n / vol)^(2/n)' of the first non-trivial Neumann
    eigenvalue of a domain of volume 'vol', attained by balls.
    """

    if not vol > 0:
        raise ErrorDomain("vol", vol, "(0, inf)")
    return _bessel_root(n)**2 * (ball_volume(n) / vol)**(2 / n)

def domain_diameter(kind, p, level=6):
    """
    Return the diameter of the 'kind' snowflake: exact for the classic Koch snowflake and the
    certified polygon bound otherwise.
    """

    if kind == IFS.TRIANGLE_K and abs(p - 1 / 3) < 1e-12:
        return 2 / math.sqrt(3)
    return IFS.build_snowflake(kind, p, level).diameter_bound()

class ConstantsLedger:
    """All constants of the remainder bound of a well-covered snowflake."""

    def __init__(self, kind, p, ranges, content, mu=DEFAULT_MU, n=2, diameter=None):
        """
        The class constructor. The arguments are as follows.
          * kind - the snowflake kind.
          * p - the p-Koch ratio.
          * ranges - the 'ConstantRanges' of the cover elements.
          * content - the 'ContentEstimate' of the boundary.
          * mu - the cover multiplicity.
          * n - the space dimension.
          * diameter - the domain diameter (upper bound).
        """

        IFS.check_p(p)
        self.kind = kind
        self.p = p
        self.n = n
        self.mu = mu
        self.ranges = ranges
        self.content = content
        self.delta = Minkowski.minkowski_dimension(p)
        self.vol = IFS.snowflake_area(kind, p)
        self.diameter = domain_diameter(kind, p) if diameter is None else diameter
        self.weyl = {dim : weyl_constant(dim) for dim in (1, 2, 3)}

        delta = self.delta
        self.c_E = c_E_rohde(p)
        self.C1 = c1_formula(ranges, self.c_E)
        self.C1_optimized, self.alpha = c1_optimized(ranges, self.c_E)

        self.c_diam_upper = ranges.upper("diam")
        self.c_diam_stated = Foliation.c_diam_upper(p, corrected=False)
        self.C2 = min(self.C1, (math.sqrt(n) * math.pi / self.c_diam_upper)**2 / 2)

        self.C_of_Omega = Foliation.cover_constant(kind, p)
        self.M_frak = content.frak_m
        self.A_Omega = Whitney.a_omega(self.M_frak, delta, n)

        series = 2**delta - 1
        self.C3 = self.C_of_Omega + self.M_frak * (40 * math.sqrt(n))**delta / series
        s_sup = self.c_diam_upper
        self.C3_proof = self.C_of_Omega + self.M_frak * (math.sqrt(n) / s_sup)**delta * \
                        ((40 * s_sup)**delta - 1) / series
        if self.C3_proof > self.C3:
            _LOG.warning("the proof variant of C3 (%.6g) exceeds the closed form (%.6g)",
                         self.C3_proof, self.C3)

        self.coupling = (mu + 1) / self.C2
        self.S1 = self.C3 * self.coupling**(delta / 2)
        self.M_Omega = self.S1 + self.weyl[n - 1] / 4 * self.A_Omega * \
                       self.coupling**((delta - (n - 1)) / 2)

        self.eps0 = Foliation.scale_interval(p, 1)[1]
        self.t0 = self.C2 * self.eps0**-2 / (mu + 1)
        self.C_tilde = ranges.upper("vol") * self.C_of_Omega

        for name in ("C1", "C2", "C3", "M_Omega", "M_frak", "A_Omega", "C_of_Omega"):
            if not getattr(self, name) > 0:
                raise Error("BUG: non-positive constant %s = %g" % (name, getattr(self, name)))

        _LOG.debug("constants of %s(%.6g): C1 %.6g, C2 %.6g, C3 %.6g, M %.6g", kind, p, self.C1,
                   self.C2, self.C3, self.M_Omega)

    def epsilon_of(self, t):
        """Return the eps coupled to the spectral parameter 't': '(mu+1) t = C2 eps^-2'."""

        if not t > 0:
            raise ErrorPrecondition("spectral parameter must be positive, not %g" % t)
        return 1 / math.sqrt(self.coupling * t)

    def as_dict(self):
        """Return a dictionary describing the ledger with provenance tags."""

        formula, derived = "paper_formula", "derived"
        return {"kind" : self.kind, "p" : self.p, "n" : self.n, "mu" : self.mu,
                "delta" : tagged(self.delta, formula),
                "vol" : tagged(self.vol, formula),
                "diameter" : tagged(self.diameter, derived),
                "weyl" : {str(dim) : tagged(val, formula) for dim, val in self.weyl.items()},
                "c_E" : tagged(self.c_E, formula),
                "constant_ranges" : {name : tagged(val, derived)
                                     for name, val in self.ranges.as_dict().items()},
                "c_diam_stated" : tagged(self.c_diam_stated, formula),
                "C1" : tagged(self.C1, formula),
                "C1_optimized" : tagged(self.C1_optimized, derived),
                "alpha" : tagged(self.alpha, derived),
                "C2" : tagged(self.C2, formula),
                "C_of_Omega" : tagged(self.C_of_Omega, derived),
                "M_frak" : tagged(self.M_frak, derived),
                "A_Omega" : tagged(self.A_Omega, formula),
                "C3" : tagged(self.C3, formula),
                "C3_proof" : tagged(self.C3_proof, derived),
                "S1" : tagged(self.S1, formula),
                "M_Omega" : tagged(self.M_Omega, formula),
                "eps0" : tagged(self.eps0, derived),
                "t0" : tagged(self.t0, formula),
                "C_tilde" : tagged(self.C_tilde, formula),
                "content" : self.content.as_dict()}

def build_ledger(kind, p, mu=DEFAULT_MU, n=2, ranges=None, content=None):
    """
    Build the 'ConstantsLedger' of the 'kind' snowflake from the closed-form constant ranges and
    the boundary content estimate, unless they are given.
    """

    if ranges is None:
        ranges = Foliation.closed_form_ranges(p, kind)
    if content is None:
        content = Minkowski.content_estimate(kind, p)
    return ConstantsLedger(kind, p, ranges, content, mu=mu, n=n)

def ledger(cert, domain, content=None):
    """Build the 'ConstantsLedger' of 'domain' from its cover certificate 'cert'."""

    if content is None:
        content = Minkowski.content_estimate(domain.kind, domain.p)
    return ConstantsLedger(domain.kind, domain.p, cert.constant_ranges, content,
                           mu=cert.multiplicity, n=domain.n)

P_SCAN_HEADER = ("p", "delta", "c_E", "C1", "C2", "M_Omega")

def p_scan(kind, ps):
    """Return the list of 'P_SCAN_HEADER' rows of the constants over the 'ps' ratios."""

    rows = []
    for p in ps:
        led = build_ledger(kind, p)
        rows.append((p, led.delta, led.c_E, led.C1, led.C2, led.M_Omega))
    return rows

def default_p_grid(points=24, margin=1e-3):
    """Return 'points' ratios spread over the admissible interval, 'margin' away from the ends."""
    return np.linspace(IFS.P_MIN + margin, IFS.P_MAX - margin, points)

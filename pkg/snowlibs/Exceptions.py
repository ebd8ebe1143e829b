#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""This module defines the exception types used in this project."""

class Error(Exception):
    """Most of the error conditions of the project cause exceptions of this type."""

    kind = "error"

    def __init__(self, msg):
        """The class constructor."""

        super(Error, self).__init__(msg)

        assert isinstance(msg, str)
        self.msg = msg

    def __str__(self):
        """The string representation of the exception."""
        return self.msg

class ErrorBadArgument(Error):
    """This exception is thrown when the argument for a command is incorrect."""

    kind = "bad-argument"

    def __init__(self, cmd, arg, msg=None):
        """The class constructor."""

        if not msg:
            msg = "unacceptable argument '%s' for command '%s'" % (arg, cmd)
        super(ErrorBadArgument, self).__init__(msg)
        self.cmd = cmd
        self.arg = arg

class ErrorDomain(Error):
    """A parameter is outside of the interval where the construction is defined."""

    kind = "domain"

    def __init__(self, name=None, value=None, interval=None, msg=None):
        """The class constructor."""

        if not msg:
            msg = "'%s' = %s is outside of the admissible interval %s" % (name, value, interval)
        super(ErrorDomain, self).__init__(msg)
        self.name = name
        self.value = value

class ErrorPrecondition(Error):
    """An operation was called with inputs violating its precondition."""

    kind = "precondition"

class ErrorResource(Error):
    """A computation would exceed a configured budget (vertices, cubes, magnitude)."""

    kind = "resource"

    def __init__(self, what=None, needed=None, budget=None, msg=None):
        """The class constructor."""

        if not msg:
            msg = "%s: %s needed, but the budget is %s" % (what, needed, budget)
        super(ErrorResource, self).__init__(msg)

class ErrorCertification(Error):
    """The certified accuracy is not sufficient for the requested result."""

    kind = "certification"

class ErrorDegenerateFiber(Error):
    """A fiber start point hits an intersection point of neighbouring IFS images."""

    kind = "degenerate-fiber"

    def __init__(self, q=None, generation=None, msg=None):
        """The class constructor."""

        if not msg:
            msg = "fiber starting at q=%r hits a junction point at generation %s" % (q, generation)
        super(ErrorDegenerateFiber, self).__init__(msg)
        self.q = q
        self.generation = generation

class ErrorNonConvergence(Error):
    """An iterative method did not reach the requested tolerance."""

    kind = "non-convergence"

    def __init__(self, what=None, achieved=None, tolerance=None, msg=None):
        """The class constructor."""

        if not msg:
            msg = "%s did not converge: achieved %.3g, required %.3g" % (what, achieved, tolerance)
        super(ErrorNonConvergence, self).__init__(msg)
        self.achieved = achieved

class ErrorQuadrature(ErrorNonConvergence):
    """A quadrature rule did not converge."""

    kind = "quadrature"

    def __init__(self, achieved=None, tolerance=None, msg=None):
        """The class constructor."""
        super(ErrorQuadrature, self).__init__("quadrature", achieved, tolerance, msg=msg)

class ErrorCoupling(Error):
    """The spectral parameter is below the certified range of the eps-t coupling."""

    kind = "coupling"

    def __init__(self, t=None, t0=None, msg=None):
        """The class constructor."""

        if not msg:
            msg = "t = %g is below the certified range, the bound requires t >= t0 = %.6g" % (t, t0)
        super(ErrorCoupling, self).__init__(msg)
        self.t = t
        self.t0 = t0

class ErrorDisconnected(Error):
    """A grid mask does not form a single connected component."""

    kind = "disconnected"

class ErrorBadConfig(Error):
    """The run configuration violates one or more preconditions."""

    kind = "bad-config"

    def __init__(self, problems=None, msg=None):
        """The class constructor."""

        self.problems = list(problems or [])
        if not msg:
            msg = "bad configuration:\n* %s" % "\n* ".join(self.problems)
        super(ErrorBadConfig, self).__init__(msg)

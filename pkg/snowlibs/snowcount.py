#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
A tool for building snowflake domains, their Whitney and foliated covers, and evaluating the
Neumann eigenvalue counting bounds of snowflakes.
"""

# pylint: disable=too-many-locals
# pylint: disable=no-member

import sys
import math
import logging
import argparse

try:
    import argcomplete
except ImportError:
    argcomplete = None

from snowlibs import Config, Constants, Counting, Eigensolver, Foliation, IFS, Logging
from snowlibs import Minkowski, Reports, Whitney
from snowlibs.Exceptions import Error

VERSION = "1.0"
OWN_NAME = "snowcount"

LOG = logging.getLogger()

# The commands supported by this tool.
CMDLINE_COMMANDS = ("snowflake", "whitney", "cover", "constants", "bounds", "verify")

# The polygon level of the snowflake command when none is configured.
DEFAULT_LEVEL = 6
# The cover domain is built this many levels finer than the scale interval of eps.
COVER_FRINGE_LEVELS = 4

class ArgsParser(argparse.ArgumentParser):
    """
    This class re-defines the 'error()' method of the 'argparse.ArgumentParser' class in order to
    make it always print a hint about the '-h' option. It also adds the '-h', '-d' and '-q'
    options.
    """

    def __init__(self, *args, **kwargs):
        """Add '-h', '-d' and '-q' to the argument parser object."""

        kwargs["add_help"] = False
        super(ArgsParser, self).__init__(*args, **kwargs)

        text = "Show this help message and exit."
        self.add_argument("-h", action="help", help=text, dest="help")
        text = "Print debugging messages."
        self.add_argument("-d", action="store_true", help=text, dest="debug")
        text = "Be quiet, print only warnings and errors."
        self.add_argument("-q", action="store_true", help=text, dest="quiet")

    def error(self, message):
        """Print the error message and exit."""

        message += "\nUse -h for help."
        super(ArgsParser, self).error(message)

def _add_common_options(pars):
    """Add the options shared by all the commands to the 'pars' parser."""

    text = "The snowflake kind: 'K' (triangle based) or 'R' (square based)."
    pars.add_argument("--kind", help=text)
    text = "The p-Koch ratio in (1/4, 1/2), fractions like '1/3' are accepted."
    pars.add_argument("--p", dest="p", help=text)
    text = "The polygonal approximation level of the snowflake sides."
    pars.add_argument("--level", type=int, help=text)
    text = "The output format: 'json' (default) or 'csv'."
    pars.add_argument("--format", choices=Config.FORMATS, help=text)
    text = "Write the report to this file instead of the standard output stream."
    pars.add_argument("-o", "--out", help=text)
    text = "The random seed of the sampling methods."
    pars.add_argument("--seed", type=int, help=text)
    text = """The run profile: the configuration file section to use, the "default" section is
              used by default."""
    pars.add_argument("--profile", help=text)
    text = "An additional configuration file, parsed after the system and user files."
    pars.add_argument("--config", help=text)

def _add_eps_options(pars):
    """Add the mutually exclusive '--epsilon' and '--k' options."""

    group = pars.add_mutually_exclusive_group()
    text = "The width of the boundary neighbourhood."
    group.add_argument("--epsilon", type=float, help=text)
    text = "Use the midpoint of the scale interval 'J_k' as the width."
    group.add_argument("--k", type=int, help=text)

def parse_arguments():
    """Parse the input arguments."""

    text = """A tool for the spectral geometry of snowflake domains: it builds the p-Koch
              snowflakes, their Whitney and foliated covers, and evaluates explicit bounds of the
              Neumann eigenvalue counting function. Refer to the online documentation for
              details."""
    pars = ArgsParser(description=text, prog=OWN_NAME)

    text = "Print version and exit."
    pars.add_argument("--version", action="version", help=text, version=VERSION)

    subpars = pars.add_subparsers(title="supported commands", metavar="")
    subpars.required = True

    # Create a parser for the 'snowflake' command.
    text = "Build a snowflake polygon."
    descr = """Build the polygonal approximation of a snowflake domain and print its vertices
               along with the certified Hausdorff error and the exact area."""
    pars1 = subpars.add_parser("snowflake", help=text, description=descr)
    _add_common_options(pars1)
    pars1.set_defaults(func=snowflake_command)

    # Create a parser for the 'whitney' command.
    text = "Build a Whitney cover."
    descr = """Build the Whitney cover of a snowflake by dyadic squares and print the slice counts
               against the slice law. With '--epsilon' or '--k' the union perimeter of the
               restricted cover is reported too."""
    pars1 = subpars.add_parser("whitney", help=text, description=descr)
    _add_common_options(pars1)
    text = "The finest square level."
    pars1.add_argument("--k-max", type=int, dest="k_max", help=text)
    _add_eps_options(pars1)
    pars1.set_defaults(func=whitney_command)

    # Create a parser for the 'cover' command.
    text = "Build a foliated cover."
    descr = """Build the cover of the eps-neighbourhood of a snowflake by fringed, short and long
               rectangles, check the coverage and print the well-covered certificate."""
    pars1 = subpars.add_parser("cover", help=text, description=descr)
    _add_common_options(pars1)
    _add_eps_options(pars1)
    text = "The amount of Monte-Carlo samples of the coverage check."
    pars1.add_argument("--samples", type=int, help=text)
    pars1.set_defaults(func=cover_command)

    # Create a parser for the 'constants' command.
    text = "Print the constants ledger."
    descr = """Compute all the constants of the remainder bound of a snowflake. In the CSV format
               the main constants are scanned over the admissible ratios instead."""
    pars1 = subpars.add_parser("constants", help=text, description=descr)
    _add_common_options(pars1)
    pars1.set_defaults(func=constants_command)

    # Create a parser for the 'bounds' command.
    text = "Evaluate the counting bounds."
    descr = """Assemble the upper and lower bounds of the Neumann eigenvalue counting function of a
               snowflake and evaluate them on a logarithmic grid of spectral parameters."""
    pars1 = subpars.add_parser("bounds", help=text, description=descr)
    _add_common_options(pars1)
    text = "The smallest spectral parameter."
    pars1.add_argument("--t-min", type=float, dest="t_min", help=text)
    text = "The largest spectral parameter."
    pars1.add_argument("--t-max", type=float, dest="t_max", help=text)
    text = "The amount of spectral parameters."
    pars1.add_argument("--t-steps", type=int, dest="t_steps", help=text)
    text = "The scale 'X' of the largest slice in the absolute bound, at least 10*sqrt(2)."
    pars1.add_argument("--kplus-scale", type=float, dest="kplus_scale", help=text)
    pars1.set_defaults(func=bounds_command)

    # Create a parser for the 'verify' command.
    text = "Run the eigensolver verification."
    descr = """Validate the finite-volume eigensolver on the unit square and the unit disk, then
               check the certified eigenvalue bound, the Poincare inequality and the
               change-of-variables area of the cover elements."""
    pars1 = subpars.add_parser("verify", help=text, description=descr)
    _add_common_options(pars1)
    text = "The amount of raster cells per unit length for the square and the disk."
    pars1.add_argument("--grid", type=int, help=text)
    text = "The amount of random trial fields of the Poincare check."
    pars1.add_argument("--trials", type=int, help=text)
    pars1.set_defaults(func=verify_command)

    if argcomplete:
        argcomplete.autocomplete(pars)
    return pars.parse_args()

def _emit(config, report_type, payload, header=None, rows=None):
    """
    Emit a report in the configured format: the JSON document with the 'payload' contents, or the
    CSV table with the 'header' columns and the 'rows' rows.
    """

    if config["format"] == "csv":
        if header is None:
            raise Error("the '%s' report has no CSV form, use '--format json'" % report_type)
        text = Reports.to_csv(header, rows)
    else:
        text = Reports.to_json(report_type, payload)

    if config["out"]:
        Reports.write(text, config["out"])
        LOG.notice("wrote the %s report to '%s'", report_type, config["out"])
    else:
        LOG.info("%s", text.rstrip("\n"))

def _epsilon(config):
    """Return the configured eps, the midpoint of 'J_k' if 'k' is configured instead."""

    if config["epsilon"] is not None:
        return config["epsilon"]
    k = config["k"] if config["k"] is not None else 2
    return Eigensolver.element_epsilon(config["p"], k)

def _snowflake(config, level):
    """Build the configured snowflake at 'level'."""
    return IFS.build_snowflake(config["kind"], config["p"], level,
                               vertex_budget=config["vertex_budget"])

def _whitney_level(config):
    """Return the polygon level fine enough for squares of level 'k_max'."""

    if config["level"] is not None:
        return config["level"]

    system = IFS.make_p_koch(config["p"])
    required = 2.0**(-config["k_max"] - 3) * math.sqrt(2)
    level = 0
    while system.hausdorff_error(level) > required:
        level += 1
    return level

def snowflake_command(_, config):
    """Implements the 'snowflake' command."""

    level = config["level"] if config["level"] is not None else DEFAULT_LEVEL
    domain = _snowflake(config, level)
    rows = ((float(x), float(y)) for x, y in domain.ring)
    _emit(config, "snowflake", domain.as_dict(), ("x", "y"), rows)

def whitney_command(_, config):
    """Implements the 'whitney' command."""

    domain = _snowflake(config, _whitney_level(config))
    cover = Whitney.build_whitney(domain, config["k_max"], cube_budget=config["cube_budget"])
    content = Minkowski.content_estimate(domain.kind, domain.p)
    certified = cover.certificate()

    law = cover.slice_law(content.frak_m, domain.delta)
    violations = [lvl for lvl, (cnt, bound) in law.items() if cnt > bound]
    if violations:
        LOG.warning("the slice law is violated at levels %s", violations)

    payload = {"domain" : domain.name, "level" : domain.level, "cover" : cover.as_dict(),
               "certified_fraction" : Reports.tagged(float(certified.mean()), "measured"),
               "frak_m" : Reports.tagged(content.frak_m, "derived"),
               "slice_law" : {lvl : {"count" : Reports.tagged(cnt, "measured"),
                                     "bound" : Reports.tagged(bound, "paper_formula")}
                              for lvl, (cnt, bound) in law.items()}}

    if config["epsilon"] is not None or config["k"] is not None:
        restriction = cover.restrict_eps(_epsilon(config))
        a_omega = Whitney.a_omega(content.frak_m, domain.delta)
        payload["restriction"] = restriction.as_dict()
        payload["perimeter_bound"] = Reports.tagged(restriction.perimeter_bound(a_omega,
                                                                                domain.delta),
                                                    "paper_formula")

    _emit(config, "whitney", payload, Whitney.CSV_HEADER, cover.csv_rows())

def cover_command(_, config):
    """Implements the 'cover' command."""

    eps = _epsilon(config)
    k = Foliation.generation_of(config["p"], eps)
    level = config["level"] if config["level"] is not None else k + COVER_FRINGE_LEVELS
    domain = _snowflake(config, level)

    cert = Foliation.build_cover(domain, eps)
    coverage = cert.check_coverage(samples=config["samples"], seed=config["seed"])
    if coverage.uncovered or coverage.max_multiplicity > cert.multiplicity:
        LOG.warning("coverage check: %d uncovered samples, multiplicity %d", coverage.uncovered,
                    coverage.max_multiplicity)

    _emit(config, "cover", cert.as_dict(), Foliation.CSV_HEADER, cert.csv_rows())

def constants_command(_, config):
    """Implements the 'constants' command."""

    if config["format"] == "csv":
        rows = Constants.p_scan(config["kind"], Constants.default_p_grid())
        _emit(config, "constants", None, Constants.P_SCAN_HEADER, rows)
        return

    led = Constants.build_ledger(config["kind"], config["p"])
    _emit(config, "constants", led.as_dict())

def bounds_command(_, config):
    """Implements the 'bounds' command."""

    led = Constants.build_ledger(config["kind"], config["p"])
    report = Counting.build_bounds(led, X=config["kplus_scale"])
    ts = Counting.log_grid(config["t_min"], config["t_max"], config["t_steps"])
    rows = list(report.csv_rows(ts))

    bad = [row[0] for row in rows if row[1] < row[2]]
    if bad:
        raise Error("BUG: the upper bound is below the lower bound at t = %s"
                    % ", ".join("%g" % t for t in bad))

    payload = {"bounds" : report.as_dict(),
               "table" : [dict(zip(Counting.CSV_HEADER, row)) for row in rows]}
    _emit(config, "bounds", payload, Counting.CSV_HEADER, rows)

VERIFY_CSV_HEADER = ("kind", "k", "epsilon", "lambda2", "bound", "headroom", "worst_ratio",
                     "poincare_bound", "area_relative", "passed")

def verify_command(_, config):
    """Implements the 'verify' command."""

    grid, seed = config["grid"], config["seed"]
    square = Eigensolver.verify_square(grid, seed=seed)
    disk = Eigensolver.verify_disk(grid, seed=seed)

    led = Constants.build_ledger(config["kind"], config["p"])
    elements = Eigensolver.verify_elements(config["p"], led.C1, trials=config["trials"],
                                           seed=seed)

    failed = [res for res in elements if not res.passed]
    for res in failed:
        LOG.warning("element %s at k=%d failed the verification", res.element.kind,
                    res.element.k)

    measured = "measured"
    payload = {"square" : {name : Reports.tagged(val, measured) for name, val in square.items()},
               "disk" : {name : Reports.tagged(val, measured) for name, val in disk.items()},
               "C1" : Reports.tagged(led.C1, "paper_formula"),
               "elements" : elements, "passed" : not failed}

    rows = ((res.element.kind, res.element.k, res.element.epsilon, res.lambda2, res.bound,
             res.headroom, res.poincare.worst, res.poincare.bound, res.area["relative"],
             res.passed) for res in elements)
    _emit(config, "verify", payload, VERIFY_CSV_HEADER, rows)

def main():
    """The program entry point."""

    args = parse_arguments()

    loglevel = None
    if args.debug:
        loglevel = Logging.DEBUG
    elif args.quiet:
        loglevel = Logging.WARNING
    Logging.setup_logger(prefix=OWN_NAME, loglevel=loglevel)

    try:
        config = Config.parse_config_files(secname=args.profile, overrides=args, path=args.config)
        Config.validate(config)
        args.func(args, config)
    except Error as err:
        LOG.error_report(err, Reports.SCHEMA)
        LOG.error_out(err)
    except KeyboardInterrupt:
        LOG.info("Interrupted, exiting")

    return 0

if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This is an internal module that parses the snowcount configuration files and validates the final
run configuration.
"""

import os
import math
import pprint
import logging
import configparser
from snowlibs import Helpers, IFS
from snowlibs.Exceptions import Error, ErrorBadConfig

SYSTEM_CFG_FILE = "/etc/snowcount.conf"
USER_CFG_FILE_NAME = ".snowcount.conf"

# The configuration file section used when no profile is specified.
DEFAULT_PROFILE = "default"

_LOG = logging.getLogger("Config")

# The snowcount configuration options.
# * type - the function converting the string value from a configuration file.
# * default - the value used when neither configuration files nor the command line set the option.
CONFIG_OPTIONS = {
    "kind"          : {"type" : str, "default" : "K"},
    "p"             : {"type" : Helpers.parse_real, "default" : 1/3},
    "level"         : {"type" : int, "default" : None},
    "epsilon"       : {"type" : float, "default" : None},
    "k"             : {"type" : int, "default" : None},
    "t_min"         : {"type" : float, "default" : 0.1},
    "t_max"         : {"type" : float, "default" : 1e4},
    "t_steps"       : {"type" : int, "default" : 50},
    "grid"          : {"type" : int, "default" : 80},
    "seed"          : {"type" : int, "default" : 0},
    "samples"       : {"type" : int, "default" : 100000},
    "vertex_budget" : {"type" : int, "default" : IFS.DEFAULT_VERTEX_BUDGET},
    "cube_budget"   : {"type" : int, "default" : 2000000},
    "k_max"         : {"type" : int, "default" : 9},
    "kplus_scale"   : {"type" : float, "default" : 20.0},
    "trials"        : {"type" : int, "default" : 100},
    "format"        : {"type" : str, "default" : "json"},
    "out"           : {"type" : str, "default" : None},
}

# The domain kinds accepted by the 'kind' option.
KINDS = ("K", "R")
FORMATS = ("json", "csv")

def _parse_config_file(cfgfile, secname, config):
    """
    Parse a snowcount configuration file 'cfgfile' and update the 'config' dictionary with the
    contents of the 'secname' section of the configuration file.
    """

    if not cfgfile.has_section(secname):
        return False

    for name, val in cfgfile.items(secname):
        if name not in CONFIG_OPTIONS:
            raise Error("unknown configuration option '%s' in section '%s' of '%s'"
                        % (name, secname, cfgfile.path))

        try:
            val = CONFIG_OPTIONS[name]["type"](val)
        except (ValueError, TypeError, Error):
            raise Error("bad value for the '%s' option in section '%s' of '%s':\n"
                        "cannot translate '%s' to the '%s' type"
                        % (name, secname, cfgfile.path, val,
                           CONFIG_OPTIONS[name]["type"].__name__)) from None

        config[name] = val

    return True

def _iterate_configs(path=None):
    """
    For every existing snowcount configuration file, build and yield the 'configparser' object.
    The system file goes first, then the user file, then the 'path' file if it was given.
    """

    paths = [SYSTEM_CFG_FILE, os.path.join(os.path.expanduser("~"), USER_CFG_FILE_NAME)]
    if path:
        if not os.path.isfile(path):
            raise Error("configuration file '%s' does not exist" % path)
        paths.append(path)

    for cfgpath in paths:
        if os.path.isfile(cfgpath):
            try:
                cfgfile = configparser.ConfigParser()
                cfgfile.read(cfgpath)
            except configparser.Error as err:
                raise Error("failed to parse configuration file '%s':\n%s" % (cfgpath, err)) \
                      from None
            cfgfile.path = cfgpath
            yield cfgfile

def parse_config_files(secname=None, overrides=None, path=None):
    """
    Parse snowcount configuration files and return the configuration dictionary. First the
    '/etc/snowcount.conf' file is parsed, then the '$HOME/.snowcount.conf' file, then the 'path'
    file, if given. The optional 'secname' argument specifies the section (the run profile) to
    parse, the "default" section is parsed by default.

    The 'overrides' argument, if provided, may include configuration options that override the
    options from the configuration files. Here is an example.

    Configuration file: p=1/3
    Overrides: p=0.3

    The resulting dictionary will contain 'p=0.3'. The 'overrides' argument may both be a
    dictionary (e.g., include 'overrides["p"]') or any other object including configuration options
    as attributes (e.g., 'overrides.p').
    """

    config = {name : info["default"] for name, info in CONFIG_OPTIONS.items()}

    profile = secname or DEFAULT_PROFILE
    paths = []
    found = False
    for cfgfile in _iterate_configs(path):
        paths.append(cfgfile.path)
        found |= _parse_config_file(cfgfile, profile, config)

    if secname and secname != DEFAULT_PROFILE and not found:
        raise Error("profile '%s' was not found in any of the configuration files: %s"
                    % (secname, ", ".join(paths) if paths else "none exist"))

    if overrides:
        for name, info in CONFIG_OPTIONS.items():
            val = getattr(overrides, name, None)
            if val is None and Helpers.is_dict(overrides):
                val = overrides.get(name)
            if val is not None:
                config[name] = info["type"](val)

    if _LOG.getEffectiveLevel() == logging.DEBUG:
        _LOG.debug("the final configuration:\n%s", pprint.pformat(config, indent=4))

    return config

def _check(problems, cond, msg, *args):
    """Append the 'msg % args' problem description to 'problems' if 'cond' is false."""

    if not cond:
        problems.append(msg % args)

def validate(config):
    """
    Check the 'config' dictionary against the preconditions of the library operations. Raises
    'ErrorBadConfig' listing every problem found, so that users can fix them all at once.
    """

    problems = []
    cfg = config

    _check(problems, cfg["kind"] in KINDS, "'kind' must be one of %s, not '%s'",
           ", ".join(KINDS), cfg["kind"])
    _check(problems, IFS.P_MIN < cfg["p"] < IFS.P_MAX,
           "'p' must be in the open interval (%g, %g), not %g", IFS.P_MIN, IFS.P_MAX, cfg["p"])
    if cfg["level"] is not None:
        _check(problems, cfg["level"] >= 0, "'level' must be non-negative, not %d", cfg["level"])
    if cfg["epsilon"] is not None:
        _check(problems, cfg["epsilon"] > 0, "'epsilon' must be positive, not %g",
               cfg["epsilon"])
        _check(problems, cfg["k"] is None, "'epsilon' and 'k' are mutually exclusive")
    if cfg["k"] is not None:
        _check(problems, cfg["k"] >= 1, "'k' must be at least 1, not %d", cfg["k"])
    _check(problems, cfg["t_min"] > 0, "'t_min' must be positive, not %g", cfg["t_min"])
    _check(problems, cfg["t_max"] > cfg["t_min"], "'t_max' (%g) must be greater than 't_min' "
           "(%g)", cfg["t_max"], cfg["t_min"])
    _check(problems, cfg["t_steps"] >= 2, "'t_steps' must be at least 2, not %d",
           cfg["t_steps"])
    _check(problems, cfg["grid"] >= 8, "'grid' must be at least 8 cells per unit, not %d",
           cfg["grid"])
    _check(problems, cfg["samples"] >= 1, "'samples' must be positive, not %d", cfg["samples"])
    _check(problems, cfg["vertex_budget"] >= 2, "'vertex_budget' must be at least 2, not %d",
           cfg["vertex_budget"])
    _check(problems, cfg["cube_budget"] >= 1, "'cube_budget' must be positive, not %d",
           cfg["cube_budget"])
    _check(problems, cfg["k_max"] >= 0, "'k_max' must be non-negative, not %d", cfg["k_max"])
    _check(problems, cfg["kplus_scale"] >= 10 * math.sqrt(2),
           "'kplus_scale' must be at least 10*sqrt(2), not %g", cfg["kplus_scale"])
    _check(problems, cfg["trials"] >= 1, "'trials' must be positive, not %d", cfg["trials"])
    _check(problems, cfg["format"] in FORMATS, "'format' must be one of %s, not '%s'",
           ", ".join(FORMATS), cfg["format"])

    if problems:
        raise ErrorBadConfig(problems)

# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: BSD-3-Clause

"""
This module configures logging for the snowcount tool and the test-suite.

Messages of the 'INFO' level are the tool output and go to the info stream unchanged. Everything
else goes to the error stream, prefixed by the program name and the level. Debug messages carry a
time-stamp and the source location.
"""

import sys
import json
import types
import logging
import traceback
try:
    # Coloring is optional, without 'colorama' the output is plain.
    import colorama
except ImportError:
    colorama = None

INFO = logging.INFO
# Like 'INFO', but prefixed with "notice:" and sent to the error stream.
NOTICE = logging.INFO + 1
DEBUG = logging.DEBUG
WARNING = logging.WARNING
ERROR = logging.ERROR
# Like 'ERROR', but without any prefix. Used for tracebacks and machine-readable error reports.
ERRINFO = logging.ERROR + 1
CRITICAL = logging.CRITICAL

_ERROR_LEVELS = (DEBUG, WARNING, NOTICE, ERROR, ERRINFO, CRITICAL)

def _format_msg(msgformat, args):
    """Apply %-style 'args' to 'msgformat' the way the 'logging' module does."""

    if args:
        return msgformat % args
    return str(msgformat)

def _log_traceback(logger):
    """Log the traceback of the exception being handled, or the current stack."""

    if sys.exc_info()[0]:
        lines = traceback.format_exc().splitlines()
    else:
        lines = [line.strip() for line in traceback.format_stack()]

    # Cut the trailing exception text, it is printed separately as the error message.
    last = len(lines)
    for idx, line in enumerate(lines):
        if line.startswith('  File "'):
            last = idx + 2
    lines = lines[:last]
    if not lines:
        return

    dim = undim = ""
    if colorama and getattr(logger, "colored", False):
        dim = colorama.Style.RESET_ALL + colorama.Style.DIM
        undim = colorama.Style.RESET_ALL

    logger.log(ERRINFO, "--- Debug trace starts here ---")
    logger.log(ERRINFO, "%sAn error occurred, here is the traceback:\n%s%s",
               dim, "\n".join(lines), undim)
    logger.log(ERRINFO, "--- Debug trace ends here ---\n")

def _error_out(logger, msgformat, *args, print_tb=False):
    """
    Log an error message and terminate the program with exit code 1. The traceback is printed if
    'print_tb' is 'True' or if debugging is enabled.
    """

    if print_tb or logger.getEffectiveLevel() == DEBUG:
        _log_traceback(logger)
    logger.error(_format_msg(msgformat, args))
    raise SystemExit(1)

def _error_report(logger, err, schema):
    """
    Log a machine-readable JSON description of the 'err' exception. The 'schema' argument is the
    report schema string of the tool.
    """

    report = {"schema": schema, "error": getattr(err, "kind", "error"), "message": str(err)}
    problems = getattr(err, "problems", None)
    if problems:
        report["problems"] = list(problems)
    logger.log(ERRINFO, "%s", json.dumps(report, sort_keys=True))

def _notice(logger, fmt, *args):
    """The 'notice()' method of the logger."""
    logger.log(NOTICE, fmt, *args)

class _LevelFormatter(logging.Formatter):
    """A formatter picking the message format by the log level of the record."""

    def __init__(self, prefix="", colors=None):
        """
        The constructor. The arguments are as follows.
          * prefix - prepended to warning, error and notice messages (usually "progname: ").
          * colors - dictionary mapping log levels to colorama color codes.
        """

        super().__init__("%(levelname)s: %(message)s", "%H:%M:%S")

        if not colors or not colorama:
            colors = {}

        def _paint(level, text):
            """Wrap 'text' into the color codes of 'level'."""

            if level not in colors:
                return text
            return str(colors[level]) + text + str(colorama.Style.RESET_ALL)

        self._formats = {INFO: "%(message)s", ERRINFO: "%(message)s"}
        for level, name in ((WARNING, "warning"), (ERROR, "error"),
                            (CRITICAL, "critical error"), (NOTICE, "notice")):
            self._formats[level] = _paint(level, prefix + name) + ": %(message)s"
        self._formats[DEBUG] = "[" + _paint(DEBUG, "%(asctime)s") + \
                               "] [%(module)s,%(lineno)d] %(levelname)s: %(message)s"

    def format(self, record):
        """Format 'record' using the format of its level."""

        self._style._fmt = self._formats.get(record.levelno, "%(levelname)s: %(message)s")
        return super().format(record)

class _LevelFilter(logging.Filter):
    """A filter passing only the listed log levels."""

    def __init__(self, levels):
        """The constructor."""

        super().__init__()
        self._levels = set(levels)

    def filter(self, record):
        """Return 'True' for the records of the accepted levels."""
        return record.levelno in self._levels

def _add_handler(logger, handler, formatter, levels):
    """Attach 'handler' to 'logger' with the given formatter and accepted levels."""

    handler.setFormatter(formatter)
    handler.addFilter(_LevelFilter(levels))
    logger.addHandler(handler)

def setup_logger(prefix=None, loglevel=None, colored=None, info_stream=sys.stdout,
                 error_stream=sys.stderr, info_logfile=None, error_logfile=None):
    """
    Configure and return the root logger.
      * prefix - the program name used as the prefix of warnings, errors and notices.
      * loglevel - the log level. By default it is derived from the '-d' (debug) and '-q' (quiet)
                   command line options.
      * colored - whether to color the output. By default coloring is used if 'colorama' is
                  available and both streams are terminals, or if '--force-color' is given.
      * info_stream - where 'INFO' messages go, 'sys.stdout' by default.
      * error_stream - where all the other messages go, 'sys.stderr' by default.
      * info_logfile - optional file receiving the 'INFO' messages as well.
      * error_logfile - optional file receiving all the other messages as well.
    """

    prefix = f"{prefix}: " if prefix else ""

    if not loglevel:
        if "-q" in sys.argv:
            loglevel = WARNING
        elif "-d" in sys.argv:
            loglevel = DEBUG
        else:
            loglevel = INFO

    if colored is None:
        if not colorama:
            colored = False
        elif "--force-color" in sys.argv:
            colored = True
        else:
            colored = info_stream.isatty() and error_stream.isatty()

    logger = logging.getLogger()
    logger.colored = colored
    logger.setLevel(loglevel)

    colors = {}
    if colored:
        colors[DEBUG] = colorama.Fore.GREEN
        colors[WARNING] = colorama.Fore.YELLOW + colorama.Style.BRIGHT
        colors[NOTICE] = colorama.Fore.CYAN + colorama.Style.BRIGHT
        colors[ERROR] = colors[CRITICAL] = colorama.Fore.RED + colorama.Style.BRIGHT

    formatter = _LevelFormatter(prefix=prefix, colors=colors)
    plain_formatter = _LevelFormatter(prefix=prefix) if colored else formatter

    logger.handlers = []
    _add_handler(logger, logging.StreamHandler(error_stream), formatter, _ERROR_LEVELS)
    _add_handler(logger, logging.StreamHandler(info_stream), formatter, (INFO,))
    if error_logfile:
        _add_handler(logger, logging.FileHandler(error_logfile), plain_formatter, _ERROR_LEVELS)
    if info_logfile:
        _add_handler(logger, logging.FileHandler(info_logfile), plain_formatter, (INFO,))

    logger.notice = types.MethodType(_notice, logger)
    logger.error_out = types.MethodType(_error_out, logger)
    logger.error_report = types.MethodType(_error_report, logger)

    return logger

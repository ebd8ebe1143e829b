#!/usr/bin/env python
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only
#
# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=100 et ai si

"""
This module turns results into reports: JSON documents carrying the report schema string, where
every number may be tagged with its provenance, and CSV tables for plotting.

Reports contain no time-stamps or host details, so the same configuration and seed always produce
byte-identical output.
"""

import io
import csv
import json
import math
import logging
import numpy as np
from snowlibs.Exceptions import Error

_LOG = logging.getLogger("Reports")

SCHEMA = "snowcount/1"

# Where a reported number comes from.
# * paper_formula - a closed form from the underlying theory.
# * derived - computed from closed forms by an elementary derivation.
# * measured - a numerical measurement (sampling, rasters, eigensolves).
PROVENANCES = ("paper_formula", "derived", "measured")

def tagged(value, provenance):
    """Return 'value' wrapped into a provenance-tagged dictionary."""

    if provenance not in PROVENANCES:
        raise Error("bad provenance '%s', use one of: %s" % (provenance, ", ".join(PROVENANCES)))
    return {"value" : value, "provenance" : provenance}

def _safe_float(value):
    """Non-finite floats are not valid JSON, they are emitted as strings."""

    if math.isfinite(value):
        return value
    return str(value)

def make_json_safe(obj):
    """
    Recursively convert result objects, 'numpy' scalars and arrays into plain JSON-serializable
    python types. Objects providing an 'as_dict()' method are converted with it.
    """

    if hasattr(obj, "as_dict"):
        obj = obj.as_dict()

    if isinstance(obj, dict):
        return {str(key) : make_json_safe(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [make_json_safe(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return make_json_safe(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _safe_float(float(obj))
    return obj

def to_json(report_type, payload):
    """
    Build the JSON text of a report of type 'report_type' with the 'payload' dictionary contents.
    The schema string and the report type are embedded into the document.
    """

    doc = dict(make_json_safe(payload))
    doc["schema"] = SCHEMA
    doc["report"] = report_type
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"

def to_csv(header, rows):
    """Build CSV text with the 'header' column names and the 'rows' iterable of row sequences."""

    fobj = io.StringIO()
    writer = csv.writer(fobj, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(val) for val in row])
    return fobj.getvalue()

def _csv_cell(val):
    """Format a single CSV cell, floats use the shortest exact representation."""

    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    if isinstance(val, np.integer):
        return int(val)
    return val

def write(text, path):
    """Write report 'text' to the 'path' file."""

    try:
        with open(path, "w", encoding="utf-8") as fobj:
            fobj.write(text)
    except OSError as err:
        raise Error("cannot write the report file '%s':\n%s" % (path, err)) from None
    _LOG.debug("wrote %d bytes to '%s'", len(text), path)

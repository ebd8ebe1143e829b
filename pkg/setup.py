#!/usr/bin/env python
# vim: ts=4 sw=4 tw=100 et ai si
#
# Copyright (C) 2024 The snowcount-tool developers
# SPDX-License-Identifier: GPL-2.0-only

"""The standard python packaging script."""

import re
from setuptools import setup, find_packages

def get_version(filename):
    """Fetch the project version number."""

    ver = None

    with open(filename, "r") as fobj:
        for line in fobj:
            matchobj = re.match(r'^VERSION = "(\d+.\d+)"$', line)
            if matchobj:
                ver = matchobj.group(1)
                break
    assert ver
    return ver

setup(
    name="snowcount-tool",
    description="Explicit Neumann eigenvalue counting bounds for snowflake domains",
    author="The snowcount-tool developers",
    version=get_version("snowlibs/snowcount.py"),
    entry_points={
        'console_scripts': ['snowcount=snowlibs.snowcount:main'],
    },
    data_files=[("share/snowcount-tool", ["snowcount.conf"])],
    packages=find_packages(exclude=["test*"]),
    license='GPLv2',
    python_requires=">=3.8",
    install_requires=["numpy", "scipy", "shapely>=2.0", "joblib", "colorama", "argcomplete"],
    extras_require={"test": ["pytest"]},
    long_description="""This package provides snowcount - a command-line tool building p-Koch
                        snowflake domains, their Whitney and foliated covers, and evaluating
                        explicit bounds of the Neumann eigenvalue counting function. There are
                        also python modules providing the API for python programs.""",
    classifiers=[
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: GNU General Public License v2 (GPLv2)",
        "Programming Language :: Python :: 3 :: Only",
        "Development Status :: 4 - Beta",
    ],
)

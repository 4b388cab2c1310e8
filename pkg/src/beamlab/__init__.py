"""Seeded Monte Carlo simulation of tabletop polarization-optics experiments.

Light is a stochastic Jones-vector field with explicit vacuum noise,
components are linear or vacuum-injecting transforms, and detectors are
amplitude-threshold devices.  Experiments are described in a small
line-oriented text format, executed deterministically from a seed, and
analyzed with the estimators in :mod:`beamlab.analysis`.
"""

from .circuit import CircuitGraph, Diagnostic, GridPlacement, path_length_report, route
from .dsl import ExperimentSpec, ParseResult, parse, parse_file, serialize
from .engine import FieldFrame, RunConfig, RunResult, frame_at, run, simulate
from .recorder import CoincidenceTable, RunRecords, tabulate, write_csv, write_summary

__version__ = "0.1.0"

__all__ = [
    "CircuitGraph",
    "CoincidenceTable",
    "Diagnostic",
    "ExperimentSpec",
    "FieldFrame",
    "GridPlacement",
    "ParseResult",
    "RunConfig",
    "RunRecords",
    "RunResult",
    "frame_at",
    "parse",
    "parse_file",
    "path_length_report",
    "route",
    "run",
    "serialize",
    "simulate",
    "tabulate",
    "write_csv",
    "write_summary",
]

"""Headless figure generation for swarm-simulation CSV logs.

Consumes the CSV and schema files written by the simulator CLI; never
recomputes physics or statistics. See :mod:`plotkit.render` for the five
figure kinds.
"""

from .io import EmptyCsvError, MissingColumnError, load_table
from .render import KINDS, render

__version__ = "0.1.0"

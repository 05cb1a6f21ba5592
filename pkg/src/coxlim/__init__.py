"""Numerical tools for Coxeter groups of Lorentzian type: the projective
action on the ellipsoid D, its Hilbert metric, cusps and horoballs, reduced
words, and finite-depth limit-set samples.
"""

from .coxsys import (CoxeterError, CoxeterMatrix, CoxeterSystem, ParseError, ReducibilityError,
                     UnsupportedTypeError, build_form, classify_subsystems, load_system, parse_system,
                     perron_eigenvector, signature)
from .chart import Chart
from .hilbert import HilbertGeometry, Horoball
from .words import CayleyBall, GroupElement, WordEngine
from .limits import (TruncatedSpace, classify_action, compute_cusps, ct_verify, horoball_level_search,
                     isometry_type, limit_set_sample, quasi_isometry_report)

__version__ = "0.1.0"

"""Certified numerical exterior calculus for curvature integral identities.

The package verifies boundary-corrected Euler characteristic formulas and
the transfer maps relating absolute and relative de Rham classes, entirely
from explicit connection potentials on coordinate charts.
"""

__version__ = "0.1.0"

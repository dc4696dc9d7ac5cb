"""
The (f_o, f_e) pair of interval-shape functions as spline knot values.

Built by spline_funcs.make_pair; the interpolating spline is cached on the
instance and excluded from comparisons.
"""

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class KnotFunctionPair:
    """
    Attributes:
        alpha (float): 1 - alpha is the nominal coverage.
        d (float): Support half-width; f_o = 0 and f_e = z beyond it.
        odd_knots (tuple[float, ...]): f_o at the 5 positive interior knots.
        even_knots (tuple[float, ...]): f_e at knot 0 and the 5 positive interior knots.
        z (float): z_{1 - alpha/2}.
    """

    alpha: float
    d: float
    odd_knots: tuple
    even_knots: tuple
    z: float
    spline: Any = field(default=None, repr=False, compare=False)

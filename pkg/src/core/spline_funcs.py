"""
Natural cubic spline representation of the interval-shape pair (f_o, f_e).

The 13 knots sit at j * d / 6, j = -6..6 (the integers -6..6 for d = 6).
f_o is odd, f_e is even, f_o(0) = 0, f_o(+-d) = 0 and f_e(+-d) = z_{1-alpha/2};
beyond [-d, d] the functions take those boundary values. Parity is exact:
both functions are evaluated on |x|.

A natural spline is linear in its data, so every pair is a combination of
the 13 cardinal splines; `cardinal_basis` exposes them for the optimizer and
for evaluating many pairs at once.
"""

from functools import lru_cache
import numpy as np
from scipy.interpolate import CubicSpline
from scipy.stats import norm
from models.knot_pair import KnotFunctionPair
from utils.consts import DEFAULT_D, EVEN_VERIFY_STEP, N_KNOTS
from utils.errors import NegativeEvenKnot, NonFiniteKnot

N_ODD = 5
N_EVEN = 6


def z_value(alpha: float) -> float:
    return float(norm.ppf(1.0 - alpha / 2.0))


def knot_positions(d: float = DEFAULT_D) -> np.ndarray:
    return np.linspace(-d, d, N_KNOTS)


def expand_knots(odd, even, z: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Full knot vectors from the compact ones.
    Args:
        odd (array): (..., 5) values f_o(1..5).
        even (array): (..., 6) values f_e(0..5).
        z (float): Boundary value of f_e.
    Returns:
        tuple: (..., 13) arrays of f_o(j) and f_e(j), j = -6..6.
    """

    odd = np.asarray(odd, dtype=float)
    even = np.asarray(even, dtype=float)
    zero = np.zeros(odd.shape[:-1] + (1,))
    edge = np.full(even.shape[:-1] + (1,), z)
    full_odd = np.concatenate([zero, -odd[..., ::-1], zero, odd, zero], axis=-1)
    full_even = np.concatenate([edge, even[..., :0:-1], even, edge], axis=-1)
    return full_odd, full_even


def full_knots(pair: KnotFunctionPair) -> tuple[np.ndarray, np.ndarray]:
    return expand_knots(pair.odd_knots, pair.even_knots, pair.z)


def make_pair(odd_knots, even_knots, alpha: float, d: float = DEFAULT_D) -> KnotFunctionPair:
    """
    Builds a pair in the spline class from its 11 free knot values.
    Args:
        odd_knots (array): f_o(1..5).
        even_knots (array): f_e(0..5), nonnegative.
        alpha (float): 1 - alpha is the nominal coverage.
        d (float): Support half-width.
    Returns:
        KnotFunctionPair: Pair with its natural spline cached.
    Raises:
        NonFiniteKnot: A knot value is NaN or infinite.
        NegativeEvenKnot: An even knot is negative.
    """

    odd = np.asarray(odd_knots, dtype=float).reshape(-1)
    even = np.asarray(even_knots, dtype=float).reshape(-1)
    if odd.size != N_ODD or even.size != N_EVEN:
        raise ValueError(f"expected {N_ODD} odd and {N_EVEN} even knots")
    if not (np.isfinite(odd).all() and np.isfinite(even).all()):
        raise NonFiniteKnot("knot values must be finite")
    if (even < 0).any():
        raise NegativeEvenKnot(f"even knot {even.min():.6g} < 0")
    if not 0.0 < alpha < 1.0 or d <= 0:
        raise ValueError("need 0 < alpha < 1 and d > 0")

    z = z_value(alpha)
    full_odd, full_even = expand_knots(odd, even, z)
    spline = CubicSpline(
        knot_positions(d), np.column_stack([full_odd, full_even]), bc_type="natural"
    )
    return KnotFunctionPair(
        alpha=float(alpha),
        d=float(d),
        odd_knots=tuple(float(v) for v in odd),
        even_knots=tuple(float(v) for v in even),
        z=z,
        spline=spline,
    )


def _values(pair: KnotFunctionPair, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inside = ax < pair.d
    vals = pair.spline(np.where(inside, ax, 0.0))
    return x, inside, vals


def eval_odd(pair: KnotFunctionPair, x):
    """f_o(x); 0 for |x| >= d."""

    x, inside, vals = _values(pair, x)
    out = np.where(inside, np.sign(x) * vals[..., 0], 0.0)
    return float(out) if out.ndim == 0 else out


def eval_even(pair: KnotFunctionPair, x):
    """f_e(x); z_{1-alpha/2} for |x| >= d."""

    x, inside, vals = _values(pair, x)
    out = np.where(inside, vals[..., 1], pair.z)
    return float(out) if out.ndim == 0 else out


def standard_pair(alpha: float, d: float = DEFAULT_D) -> KnotFunctionPair:
    """The pair (0, z_{1-alpha/2}) whose interval is the fixed effects interval."""

    return make_pair(np.zeros(N_ODD), np.full(N_EVEN, z_value(alpha)), alpha, d)


def pair_vector(pair: KnotFunctionPair) -> np.ndarray:
    return np.array(pair.odd_knots + pair.even_knots)


def pair_from_vector(v, alpha: float, d: float = DEFAULT_D) -> KnotFunctionPair:
    v = np.asarray(v, dtype=float)
    return make_pair(v[:N_ODD], v[N_ODD:], alpha, d)


def is_standard(pair: KnotFunctionPair) -> bool:
    return all(v == 0.0 for v in pair.odd_knots) and all(
        v == pair.z for v in pair.even_knots
    )


@lru_cache(maxsize=8)
def _cardinal_spline(d: float) -> CubicSpline:
    return CubicSpline(knot_positions(d), np.eye(N_KNOTS), bc_type="natural")


def cardinal_basis(x, d: float = DEFAULT_D) -> np.ndarray:
    """
    Values at x of the 13 natural cardinal splines on the knot grid.
    Returns:
        np.ndarray: Shape x.shape + (13,); a pair with full knot vector k has
        spline value basis @ k inside [-d, d].
    """

    return _cardinal_spline(float(d))(np.asarray(x, dtype=float))


def eval_many(x, full_odd, full_even, d: float, z: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluates one pair per point: f_o_k(x_k), f_e_k(x_k).
    Args:
        x (array): Shape (M,).
        full_odd, full_even (array): Shape (M, 13) full knot vectors.
    """

    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inside = ax < d
    basis = cardinal_basis(np.where(inside, ax, 0.0), d)
    fo = np.einsum("mk,mk->m", basis, full_odd)
    fe = np.einsum("mk,mk->m", basis, full_even)
    return np.where(inside, np.sign(x) * fo, 0.0), np.where(inside, fe, z)


def min_even_value(pair: KnotFunctionPair, step: float = EVEN_VERIFY_STEP) -> float:
    """Smallest f_e value on a step grid over [0, d]."""

    grid = np.arange(0.0, pair.d + step / 2, step)
    return float(np.min(eval_even(pair, grid)))

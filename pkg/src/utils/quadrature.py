"""Composite Gauss-Legendre rules"""

import numpy as np


def composite_gauss_legendre(
    breaks: np.ndarray, points: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of a composite Gauss-Legendre rule.
    Args:
        breaks (np.ndarray): Increasing subinterval endpoints.
        points (int): Nodes per subinterval.
    Returns:
        tuple: (nodes, weights), each of length points * (len(breaks) - 1).
    """

    roots, coeffs = np.polynomial.legendre.leggauss(points)
    lo = np.asarray(breaks[:-1], dtype=float)[:, None]
    hi = np.asarray(breaks[1:], dtype=float)[:, None]
    nodes = 0.5 * (hi - lo) * roots[None, :] + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * coeffs[None, :]
    return nodes.ravel(), weights.ravel()

"""
One-sided derivatives at 0+ from polynomial jets plus Richardson extrapolation.
"""

import logging
from typing import Callable, List, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from ..errors import UnstableExtrapolation
from .config import DEFAULT_H_GRID, EXTRAPOLATION_TOLERANCE, JET_NODES

logger = logging.getLogger(__name__)


class Jet(NamedTuple):
    value: complex  # limit at 0+
    slope: complex  # derivative at 0+


class Extrapolation(NamedTuple):
    value: complex
    slope: complex
    raw_slopes: List[complex]  # one per h
    extrapolated: List[complex]  # Richardson table, last row
    gap: float


def polynomial_jet(fn: Callable[[float], complex], h: float, nodes: int = JET_NODES) -> Jet:
    """
    Fit a degree (nodes-1) polynomial through t = h, 2h, ..., nodes*h.

    Works in the scaled variable s = t/h so the fit stays well conditioned;
    the slope is then c1 / h.
    """
    s = np.arange(1, nodes + 1, dtype=float)
    values = np.array([fn(h * si) for si in s], dtype=complex)
    coeffs_re = P.polyfit(s, values.real, nodes - 1)
    coeffs_im = P.polyfit(s, values.imag, nodes - 1)
    c0 = complex(coeffs_re[0], coeffs_im[0])
    c1 = complex(coeffs_re[1], coeffs_im[1])
    return Jet(c0, c1 / h)


def richardson(estimates: Sequence[complex], steps: Sequence[float], order: int) -> List[complex]:
    """Eliminate the h^order error term between consecutive estimates."""
    out = []
    for (e_coarse, h_coarse), (e_fine, h_fine) in zip(
        zip(estimates, steps), zip(estimates[1:], steps[1:])
    ):
        r = (h_coarse / h_fine) ** order
        out.append((r * e_fine - e_coarse) / (r - 1.0))
    return out


def extrapolate_jet(
    fn: Callable[[float], complex],
    h_grid: Sequence[float] = DEFAULT_H_GRID,
    nodes: int = JET_NODES,
    tolerance: float = EXTRAPOLATION_TOLERANCE,
) -> Extrapolation:
    """Value and slope of fn at 0+; raises UnstableExtrapolation on disagreement."""
    h_grid = sorted((float(h) for h in h_grid), reverse=True)
    if len(h_grid) < 2:
        raise ValueError("extrapolation needs at least two step sizes")
    jets = [polynomial_jet(fn, h, nodes) for h in h_grid]
    values = [j.value for j in jets]
    slopes = [j.slope for j in jets]

    # slope error of a degree (nodes-1) fit is O(h^(nodes-1)), value error O(h^nodes)
    slope_table = richardson(slopes, h_grid, nodes - 1)
    value_table = richardson(values, h_grid, nodes)
    if len(slope_table) >= 2:
        gap = abs(slope_table[-1] - slope_table[-2])
    else:
        gap = abs(slopes[-1] - slopes[-2])

    logger.debug(f"jet slopes {slopes}, extrapolated {slope_table}, gap {gap:.2e}")
    if gap > tolerance:
        raise UnstableExtrapolation(
            f"successive extrapolated slopes differ by {gap:.3e} (> {tolerance:g})", gap
        )
    return Extrapolation(value_table[-1], slope_table[-1], slopes, slope_table, float(gap))

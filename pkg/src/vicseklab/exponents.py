"""Dimension exponents of the Vicsek set and derived scaling exponents.

All scaling targets used by the verification harness derive from two
numbers: the Hausdorff dimension d_h = log 5 / log 3 of the five-map,
ratio-1/3 self-similar tree, and the walk dimension d_w = d_h + 1.
"""

import math

#: Hausdorff dimension of the Vicsek set, log 5 / log 3.
D_H = math.log(5.0) / math.log(3.0)

#: Walk dimension, d_h + 1.
D_W = D_H + 1.0

#: Spectral dimension, 2 d_h / d_w.  The Weyl counting function grows
#: like lambda ** (D_S / 2).
D_S = 2.0 * D_H / D_W

#: On-diagonal heat kernel decay exponent: p_t(x,x) ~ t ** (-D_H / D_W).
ON_DIAGONAL_EXPONENT = D_H / D_W

#: Stretched-exponential exponent 1 / (d_w - 1) = 1 / d_h of the
#: sub-Gaussian off-diagonal factor.
SUB_GAUSSIAN_EXPONENT = 1.0 / (D_W - 1.0)


def alpha(p: float) -> float:
    """Smoothing exponent alpha_p = (1 - 2/p)/d_w + 1/p (p = inf allowed)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if math.isinf(p):
        return 1.0 / D_W
    return (1.0 - 2.0 / p) / D_W + 1.0 / p


def lq_lp_exponent(p: float, q: float) -> float:
    """Exponent (1 - 1/p - 1/q)/d_w + 1/q of the L^q -> W^{1,p} smoothing bound."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    return (1.0 - inv_p - inv_q) / D_W + inv_q


def nash_theta(p: float) -> float:
    """Interpolation exponent theta = (p-1) d_h / (p-1 + p d_h) of the Nash inequality."""
    if p <= 1:
        raise ValueError(f"Nash exponent requires p > 1, got {p}")
    return (p - 1.0) * D_H / (p - 1.0 + p * D_H)

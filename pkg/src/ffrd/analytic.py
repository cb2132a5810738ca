"""Closed-form rate-distortion baselines used as ground truth in tests.

All formulas clamp at zero rate: rates are nonnegative by definition, and each
expression goes negative past its zero-rate distortion threshold.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .prob import binary_entropy


def iid_binary_rd(p: float, D: float) -> float:
    """R(D) = H_b(p) - H_b(D) for a Bernoulli(p) source under Hamming
    distortion, valid (and clamped at) 0 <= D <= min(p, 1-p)."""
    if D < 0:
        raise ValueError("distortion must be >= 0")
    if D >= min(p, 1.0 - p):
        return 0.0
    return max(binary_entropy(p) - binary_entropy(D), 0.0)


def markov_rn(p: float, q: float, n: int, D: float) -> float:
    """Block rate-distortion of a binary Markov source with feed-forward.

    For the chain with P(0->1) = p, P(1->0) = q and stationary pi, under
    Hamming distortion,

        R_n(D) = (1/n) H_b(pi_1) + ((n-1)/n)(pi_0 H_b(p) + pi_1 H_b(q)) - H_b(D),

    clamped at zero.  ``n`` may be np.inf for the limiting curve.
    """
    if D < 0:
        raise ValueError("distortion must be >= 0")
    if D > 0.5:
        return 0.0
    pi0 = q / (p + q)
    pi1 = p / (p + q)
    ent_rate = pi0 * binary_entropy(p) + pi1 * binary_entropy(q)
    if np.isinf(n):
        val = ent_rate - binary_entropy(D)
    else:
        val = binary_entropy(pi1) / n + (n - 1) / n * ent_rate - binary_entropy(D)
    return max(val, 0.0)


def stock_market_rd(q: float, pi0: float, D: float) -> float:
    """Limiting rate-distortion for the drop-warning source.

    (1 - pi0)(H_b(q) - H_b(D / (1 - pi0))) for D <= (1 - pi0) * min(q, 1-q),
    zero otherwise; ``q`` is the drop probability and ``pi0`` the stationary
    mass of the state from which no drop can occur.
    """
    if D < 0:
        raise ValueError("distortion must be >= 0")
    active = 1.0 - pi0
    eps = D / active
    if eps >= min(q, 1.0 - q):
        return 0.0
    return max(active * (binary_entropy(q) - binary_entropy(eps)), 0.0)


def inverse_binary_entropy(h: float) -> float:
    """The p in [0, 1/2] with H_b(p) = h."""
    if not 0.0 <= h <= 1.0:
        raise ValueError("entropy must lie in [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return float(brentq(lambda p: binary_entropy(p) - h, 0.0, 0.5, xtol=1e-14))

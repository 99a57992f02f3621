"""Scalar and elementwise proximal operators shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam
from .rng import gaussian, make_rng
from .tensor import fro


@dataclass
class RatioScaleSolution:
    """Bookkeeping for one ratio-of-norms subproblem solve.

    ``scale`` is the multiplier applied to the input (>= 1 whenever the
    closed form applies: moving toward the input past its own norm only
    helps up to the stationary point, which never lies inside it).  On
    the zero-input fallback ``scale`` is NaN and ``fallback_norm``
    records the Frobenius norm given to the random replacement.
    """

    scale: float
    fallback_used: bool
    fallback_norm: float


def shrink(v, rho):
    """Soft threshold: sign(v) * max(|v| - rho, 0), elementwise."""
    return np.sign(v) * np.maximum(np.abs(v) - rho, 0.0)


def ratio_scale(rho: float, mu: float, K: np.ndarray, rng=None):
    """Minimize rho / ||H||_F + (mu/2) * ||H - K||_F^2 over H.

    For nonzero K the minimizer is a pure rescaling H = scale * K where
    the scale solves the depressed cubic a^3 - a^2 = rho / (mu*||K||^3)
    and has the closed form below.  For K = 0 every direction is
    equally good and the minimizer is any tensor of Frobenius norm
    cbrt(rho / mu); a seeded Gaussian draw from ``rng`` is used so the
    choice is reproducible.

    Returns (H, RatioScaleSolution).
    """
    if not (np.isfinite(mu) and mu > 0):
        raise InvalidParam(f"mu must be a positive finite scalar, got {mu}")
    if not (np.isfinite(rho) and rho >= 0):
        raise InvalidParam(f"rho must be a nonnegative finite scalar, got {rho}")
    K = np.asarray(K, dtype=np.float64)
    nk = fro(K)
    if nk == 0.0:
        target = float(np.cbrt(rho / mu))
        if target == 0.0:
            return np.zeros_like(K), RatioScaleSolution(float("nan"), True, 0.0)
        if rng is None:
            rng = make_rng(0)
        G = gaussian(rng, K.shape)
        G *= target / fro(G)
        return G, RatioScaleSolution(float("nan"), True, target)
    e = rho / (mu * nk**3)
    t = 27.0 * e + 2.0
    disc = t * t - 4.0
    if disc < 0.0:  # rounding only; analytically >= 0 for e >= 0
        disc = 0.0
    C = float(np.cbrt((t + np.sqrt(disc)) / 2.0))
    scale = (1.0 + C + 1.0 / C) / 3.0
    return scale * K, RatioScaleSolution(scale, False, 0.0)

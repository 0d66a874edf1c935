"""Entropic risk measure over discretized shocks.

All functions are pure.  The certainty equivalent is evaluated with a
min-shifted log-sum-exp so it stays finite for large risk coefficients;
the shift anchor is the minimum outcome because the measure is bounded
below by it.
"""

from __future__ import annotations

import numpy as np

from .errors import SpecError

__all__ = [
    "certainty_equivalent",
    "expected_value",
    "taylor_approx",
    "association_lower_bound_check",
    "subadditivity_check",
]


def _check_inputs(values, probs):
    v = np.asarray(values, float)
    p = np.asarray(probs, float)
    if v.size == 0:
        raise SpecError("bad_value", "empty outcome vector")
    if v.shape != p.shape:
        raise SpecError("bad_value", f"outcomes and probabilities differ in length: {v.shape} vs {p.shape}")
    if not np.all(np.isfinite(v)):
        raise SpecError("bad_value", "outcome vector contains NaN or infinity")
    if abs(p.sum() - 1.0) > 1e-9 or np.any(p < 0):
        raise SpecError("bad_value", "probabilities must be non-negative and sum to 1")
    return v, p


def certainty_equivalent(values, probs, gamma: float) -> float:
    """Entropic certainty equivalent -(1/gamma) * ln E[exp(-gamma * v)].

    Lies between min(v) and E[v]; equals both on constants.  gamma must
    be strictly positive -- use expected_value for the risk-neutral
    baseline.
    """
    v, p = _check_inputs(values, probs)
    if gamma <= 0.0:
        raise SpecError("gamma_not_positive", f"risk coefficient must be positive, got {gamma}")
    m = float(v.min())
    return m - np.log(p @ np.exp(-gamma * (v - m))) / gamma


def expected_value(values, probs) -> float:
    v, p = _check_inputs(values, probs)
    return float(p @ v)


def taylor_approx(values, probs, gamma: float) -> float:
    """Small-gamma expansion mean - (gamma/2) * variance."""
    v, p = _check_inputs(values, probs)
    if gamma <= 0.0:
        raise SpecError("gamma_not_positive", f"risk coefficient must be positive, got {gamma}")
    mean = p @ v
    var = p @ (v - mean) ** 2
    return float(mean - 0.5 * gamma * var)


def association_lower_bound_check(h_values, g_values, probs):
    """Check E[h*g] >= E[h]*E[g] for non-increasing h, g on a common support.

    Inputs are values of h and g at the support points of X, indexed in
    increasing order of X.  Monotonicity of the inputs is the
    proposition's hypothesis and is enforced.  Returns (holds, gap) with
    gap = E[hg] - E[h]E[g].
    """
    h = np.asarray(h_values, float)
    g = np.asarray(g_values, float)
    _, p = _check_inputs(h, probs)
    if h.shape != g.shape:
        raise SpecError("bad_value", "h and g must share the support")
    if np.any(np.diff(h) > 1e-12) or np.any(np.diff(g) > 1e-12):
        raise SpecError("bad_value", "h and g must be non-increasing along the support")
    gap = float(p @ (h * g) - (p @ h) * (p @ g))
    return gap >= -1e-12, gap


def subadditivity_check(g1, g2, y: float, model):
    """Slack of rho_hat(g1+g2) <= rho_hat(g1) + rho_hat(g2) at investment y.

    rho_hat composes the certainty equivalent with the production output
    distribution at y: rho_hat(g)(y) = rho(g(f(y, .))).  g1, g2 must be
    non-decreasing, non-negative on the income range.  Returns
    (holds, slack) with slack = rho(g1) + rho(g2) - rho(g1+g2) >= 0.
    """
    z = model.shock.nodes
    p = model.shock.probs
    incomes = model.f(np.full_like(z, float(y)), z)
    v1 = np.asarray(g1(incomes), float)
    v2 = np.asarray(g2(incomes), float)
    order = np.argsort(incomes)
    for v in (v1, v2):
        if np.any(v < -1e-12):
            raise SpecError("bad_value", "g1, g2 must be non-negative")
        if np.any(np.diff(v[order]) < -1e-9 * max(1.0, np.max(np.abs(v)))):
            raise SpecError("bad_value", "g1, g2 must be non-decreasing in income")
    gamma = model.gamma
    slack = (certainty_equivalent(v1, p, gamma) + certainty_equivalent(v2, p, gamma)
             - certainty_equivalent(v1 + v2, p, gamma))
    return slack >= -1e-12, float(slack)

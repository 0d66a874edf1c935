"""First-order-condition diagnostics for a solved model.

The optimal interior policy satisfies

    u'(c*(x)) = beta * E_F[ u'(c*(f(i*,z))) f'(i*,z) ]

where E_F reweights the shock atoms by the normalized exponential tilt
F(y,z) ~ exp(-gamma * V(f(y,z))).  Nothing here is used to solve the
model; the residuals measure the discretization quality of the grid
solution.  The envelope identity V'(x) = u'(c*(x)) supplies the value
derivative wherever it is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .bellman import SolveResult
from .errors import SpecError
from .model import ModelSpec

__all__ = [
    "EulerRecord",
    "EulerReport",
    "tilt_weights",
    "euler_residual",
    "euler_report",
    "envelope_check",
    "vhat_derivative",
    "write_euler_csv",
]

# middle share of grid nodes used for summary statistics; edges are
# polluted by truncation (right) and the Inada region (left)
INTERIOR_WINDOW = 0.6


@dataclass
class EulerRecord:
    x: float
    lhs: float
    rhs: float
    rel_residual: float


@dataclass
class EulerReport:
    records: List[EulerRecord]
    skipped: List[Tuple[float, str]]
    window: Tuple[float, float]
    max_residual: float
    median_residual: float

    def summary(self) -> dict:
        return {
            "max": self.max_residual,
            "median": self.median_residual,
            "window": list(self.window),
        }


def tilt_weights(values: np.ndarray, probs: np.ndarray, gamma: float,
                 risk_neutral: bool = False) -> np.ndarray:
    """Normalized exponential tilt p_i * exp(-gamma*V_i) / sum(...).

    Min-shift stabilized; sums to 1 exactly up to float rounding.  With
    risk_neutral the tilt degenerates to the plain probabilities.
    """
    if risk_neutral:
        return np.asarray(probs, float)
    m = values.min()
    wts = probs * np.exp(-gamma * (values - m))
    return wts / wts.sum()


def _policy_next(result: SolveResult, model: ModelSpec, y: float):
    """Continuation quantities at investment y: f, V(f), c*(f), u'(c*), f'."""
    z = model.shock.nodes
    fz = model.f(np.full_like(z, y), z)
    vz = np.atleast_1d(result.value(fz))
    cz = np.atleast_1d(result.policy.consume_at(fz))
    return fz, vz, cz


def euler_residual(x: float, result: SolveResult, model: ModelSpec,
                   risk_neutral: bool = False) -> EulerRecord:
    """Relative first-order-condition residual at income x.

    Requires interior consumption and investment; raises SpecError with a
    reason code otherwise (the report-level driver converts this into a
    skip).
    """
    x = float(x)
    if x <= 0.0:
        raise SpecError("not_interior", "income must be positive")
    i_star = float(result.policy.invest_at(x))
    c_star = x - i_star
    if c_star <= 0.0:
        raise SpecError("zero_consumption", f"c*({x}) = 0: marginal utility undefined")
    if i_star <= 0.0:
        raise SpecError("zero_investment", f"i*({x}) = 0: marginal product undefined")
    lhs = float(model.du(c_star))
    rhs = model.beta * vhat_derivative(i_star, result, model, risk_neutral=risk_neutral)
    rel = abs(lhs - rhs) / max(lhs, rhs)
    return EulerRecord(x=x, lhs=lhs, rhs=rhs, rel_residual=rel)


def vhat_derivative(y: float, result: SolveResult, model: ModelSpec,
                    risk_neutral: bool = False) -> float:
    """Derivative of the continuation certainty equivalent at investment y.

    G(y) = sum_i F(y,z_i) p_i * u'(c*(f(y,z_i))) * f'(y,z_i), with the
    envelope identity standing in for V'.
    """
    if y <= 0.0:
        raise SpecError("bad_value", "investment must be positive")
    z = model.shock.nodes
    fz, vz, cz = _policy_next(result, model, float(y))
    if np.any(cz <= 0.0):
        raise SpecError("zero_consumption", "zero consumption at a continuation state")
    wts = tilt_weights(vz, model.shock.probs, model.gamma, risk_neutral=risk_neutral)
    dud = model.du(cz)
    dfd = model.dfdy(np.full_like(z, float(y)), z)
    return float(wts @ (dud * dfd))


def euler_report(result: SolveResult, model: ModelSpec,
                 risk_neutral: bool = False) -> EulerReport:
    """Node-by-node residuals with summary over the middle 60% of nodes."""
    xg = result.value.grid.nodes
    records: List[EulerRecord] = []
    skipped: List[Tuple[float, str]] = []
    for x in xg:
        if x <= 0.0:
            skipped.append((float(x), "not_interior"))
            continue
        try:
            records.append(euler_residual(float(x), result, model, risk_neutral=risk_neutral))
        except SpecError as e:
            skipped.append((float(x), e.code))
    m = xg.size
    j_lo = int(round(m * (0.5 - INTERIOR_WINDOW / 2)))
    j_hi = int(round(m * (0.5 + INTERIOR_WINDOW / 2)))
    window = (float(xg[j_lo]), float(xg[j_hi - 1]))
    inside = [r.rel_residual for r in records if window[0] <= r.x <= window[1]]
    if not inside:
        raise SpecError("bad_value", "no interior nodes inside the summary window")
    return EulerReport(records=records, skipped=skipped, window=window,
                       max_residual=float(np.max(inside)),
                       median_residual=float(np.median(inside)))


@dataclass
class EnvelopeReport:
    x: np.ndarray
    fd_slope: np.ndarray       # central difference of V
    marginal_util: np.ndarray  # u'(c*(x))
    rel_error: np.ndarray
    window: Tuple[float, float]
    max_rel_error: float       # over the window


def envelope_check(result: SolveResult, model: ModelSpec) -> EnvelopeReport:
    """Compare central differences of V against u'(c*) at interior nodes."""
    xg = result.value.grid.nodes
    V = result.value.values
    c = result.policy.consume
    x_in = xg[1:-1]
    fd = (V[2:] - V[:-2]) / (xg[2:] - xg[:-2])
    with np.errstate(divide="ignore"):
        mu = model.du(np.maximum(c[1:-1], 0.0))
    rel = np.abs(fd - mu) / np.maximum(np.abs(mu), 1e-300)
    m = xg.size
    j_lo = int(round(m * (0.5 - INTERIOR_WINDOW / 2)))
    j_hi = int(round(m * (0.5 + INTERIOR_WINDOW / 2)))
    window = (float(xg[j_lo]), float(xg[j_hi - 1]))
    mask = (x_in >= window[0]) & (x_in <= window[1])
    return EnvelopeReport(x=x_in, fd_slope=fd, marginal_util=mu, rel_error=rel,
                          window=window, max_rel_error=float(np.max(rel[mask])))


def write_euler_csv(report: EulerReport, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("x,lhs,rhs,rel_residual\n")
        for r in report.records:
            fh.write(f"{r.x:.17g},{r.lhs:.17g},{r.rhs:.17g},{r.rel_residual:.17g}\n")

"""Value-function grid representation, the dynamic-programming operator,
and the contraction fixed-point solver.

The operator acts on node values of functions in the invariant class
(non-negative, non-decreasing, concave, finite weighted norm).  Values
between nodes are piecewise linear, which preserves monotonicity and
concavity of node data exactly; beyond the last node the last segment is
continued linearly and clipped by the theoretical bound d*w/(1-alpha*beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .errors import ConvergenceError, InfeasiblePolicyError, SpecError
from .model import ModelSpec, WeightFunction

__all__ = [
    "Grid",
    "ValueFunction",
    "Policy",
    "SolveResult",
    "w_norm_distance",
    "apply_operator",
    "solve",
    "evaluate_policy_finite",
    "policy_values",
    "sandwich_check",
    "write_solution_csv",
]

MIN_NODES = 16


@dataclass(frozen=True)
class Grid:
    """Strictly increasing state grid with x_0 = 0."""

    nodes: np.ndarray
    spacing: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, float)
        if nodes.size < MIN_NODES:
            raise SpecError("grid_invalid", f"grid needs at least {MIN_NODES} nodes, got {nodes.size}")
        if nodes[0] != 0.0:
            raise SpecError("grid_invalid", "first grid node must be exactly 0")
        if np.any(np.diff(nodes) <= 0):
            raise SpecError("grid_invalid", "grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def m(self) -> int:
        return self.nodes.size

    @property
    def x_max(self) -> float:
        return float(self.nodes[-1])

    @staticmethod
    def uniform(m: int, x_max: float) -> "Grid":
        return Grid(np.linspace(0.0, x_max, m), "uniform")

    @staticmethod
    def loguniform(m: int, x_max: float, x_min: Optional[float] = None) -> "Grid":
        """Log-spaced positive nodes with a zero node prepended."""
        if x_min is None:
            x_min = 1e-4 * x_max
        pos = np.geomspace(x_min, x_max, m - 1)
        return Grid(np.concatenate(([0.0], pos)), "log")

    def same_as(self, other: "Grid") -> bool:
        return self.m == other.m and np.array_equal(self.nodes, other.nodes)


@dataclass
class ValueFunction:
    """Node samples of a candidate value function plus evaluation rules."""

    grid: Grid
    values: np.ndarray
    weight: Optional[WeightFunction] = None
    cap_scale: float = np.inf  # d/(1 - alpha*beta); caps the linear continuation

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.shape != self.grid.nodes.shape:
            raise SpecError("bad_value", "value samples must align with the grid")

    def __call__(self, x):
        x = np.asarray(x, float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x < 0):
            raise SpecError("bad_value", "value function queried below 0")
        g = self.grid.nodes
        out = np.interp(x, g, self.values)
        over = x > g[-1]
        if np.any(over):
            slope = (self.values[-1] - self.values[-2]) / (g[-1] - g[-2])
            ext = self.values[-1] + slope * (x[over] - g[-1])
            ext = np.maximum(ext, self.values[-1])
            if np.isfinite(self.cap_scale) and self.weight is not None:
                ext = np.minimum(ext, self.cap_scale * self.weight.w(x[over]))
            out[over] = ext
        return float(out[0]) if scalar else out

    def w_norm(self) -> float:
        if self.weight is None:
            raise SpecError("bad_value", "value function carries no weight function")
        return float(np.max(np.abs(self.values) / self.weight.w(self.grid.nodes)))


@dataclass
class Policy:
    """Grid samples of the investment rule; consumption is the remainder."""

    grid: Grid
    invest: np.ndarray

    def __post_init__(self):
        self.invest = np.asarray(self.invest, float)
        if self.invest.shape != self.grid.nodes.shape:
            raise SpecError("bad_value", "policy samples must align with the grid")
        x = self.grid.nodes
        if np.any(self.invest < -1e-12) or np.any(self.invest > x + 1e-12 * max(1.0, x[-1])):
            raise InfeasiblePolicyError("investment outside [0, x] at some node")

    @property
    def consume(self) -> np.ndarray:
        return self.grid.nodes - self.invest

    def invest_at(self, x):
        x = np.asarray(x, float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        g = self.grid.nodes
        out = np.interp(x, g, self.invest)
        over = x > g[-1]
        if np.any(over):
            slope = (self.invest[-1] - self.invest[-2]) / (g[-1] - g[-2])
            out[over] = self.invest[-1] + slope * (x[over] - g[-1])
        out = np.clip(out, 0.0, x)
        return float(out[0]) if scalar else out

    def consume_at(self, x):
        return np.asarray(x, float) - self.invest_at(x)


@dataclass
class SolveResult:
    value: ValueFunction
    policy: Policy
    iterations: int
    final_residual: float
    contraction_modulus: float
    residual_history: Optional[np.ndarray] = None


def w_norm_distance(v1: ValueFunction, v2: ValueFunction) -> float:
    """max over nodes of |v1 - v2| / w."""
    if not v1.grid.same_as(v2.grid):
        raise SpecError("grid_mismatch", "value functions live on different grids")
    weight = v1.weight or v2.weight
    if weight is None:
        raise SpecError("bad_value", "need a weight function for the weighted norm")
    return float(np.max(np.abs(v1.values - v2.values) / weight.w(v1.grid.nodes)))


# --------------------------------------------------------------------------
# operator
# --------------------------------------------------------------------------

def _kernel_args(model: ModelSpec):
    """(prod_kind, prod_par, sig) if the compiled sweep applies, else None."""
    if model.utility.family != "power":
        return None
    if model.production.family == "multiplicative":
        return _kernels.PROD_MULT, model.production.theta, model.utility.sigma
    if model.production.family == "additive":
        return _kernels.PROD_ADD, model.production.eta, model.utility.sigma
    return None


def _ce_rows(vals: np.ndarray, probs: np.ndarray, gamma: float, risk_neutral: bool) -> np.ndarray:
    if risk_neutral:
        return vals @ probs
    m = vals.min(axis=-1)
    return m - np.log(np.exp(-gamma * (vals - m[..., None])) @ probs) / gamma


def _sweep(xg, vvals, model: ModelSpec, cap_scale: float, risk_neutral: bool, gs_tol: float,
           warm_lo=None, warm_hi=None):
    ka = _kernel_args(model)
    wconst = model.weight.constant
    wr = model.weight.r
    wsig = model.weight.sigma
    if warm_lo is None:
        warm_lo = np.full(xg.size, -np.inf)
        warm_hi = np.full(xg.size, np.inf)
    if ka is not None:
        kind, par, sig = ka
        return _kernels.bellman_sweep(
            xg, vvals, model.shock.nodes, model.shock.probs, model.beta, model.gamma,
            sig, kind, par, wr, wsig, wconst, cap_scale, risk_neutral, gs_tol,
            warm_lo, warm_hi)

    # generic python path (custom utility or production)
    M = xg.size
    z = model.shock.nodes
    p = model.shock.probs
    gamma = model.gamma
    beta = model.beta
    slope_end = (vvals[-1] - vvals[-2]) / (xg[-1] - xg[-2])

    def interp_ext(q):
        out = np.interp(q, xg, vvals)
        over = q > xg[-1]
        if np.any(over):
            ext = vvals[-1] + slope_end * (q[over] - xg[-1])
            ext = np.maximum(ext, vvals[-1])
            cap = cap_scale if wconst else cap_scale * (wr + q[over]) ** wsig
            out[over] = np.minimum(ext, cap)
        return out

    def objective(y, xj):
        cont = interp_ext(model.f(np.full_like(z, y), z))
        if risk_neutral:
            ce = float(cont @ p)
        else:
            m = cont.min()
            ce = m - math.log(float(np.exp(-gamma * (cont - m)) @ p)) / gamma
        return float(model.u(max(xj - y, 0.0))) + beta * ce

    invphi = _kernels._INVPHI
    newv = np.empty(M)
    inv = np.empty(M)
    inv[0] = 0.0
    newv[0] = beta * vvals[0]
    for j in range(1, M):
        lo = inv[j - 1]
        hi = min(xg[j], inv[j - 1] + (xg[j] - xg[j - 1]))
        xj = xg[j]
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = objective(c, xj), objective(d, xj)
        while b - a > gs_tol:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = objective(c, xj)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = objective(d, xj)
        ybest, fbest = (c, fc) if fc >= fd else (d, fd)
        for yend in (lo, hi):
            fend = objective(yend, xj)
            if fend > fbest:
                ybest, fbest = yend, fend
        inv[j] = ybest
        newv[j] = fbest
    return newv, inv


def apply_operator(v: ValueFunction, model: ModelSpec, risk_neutral: bool = False,
                   _warm=None):
    """One step of the Bellman operator; returns (new value, argmax policy)."""
    xg = v.grid.nodes
    if np.any(np.isnan(v.values)):
        raise SpecError("bad_value", "value function contains NaN")
    gs_tol = 1e-10 * v.grid.x_max
    warm_lo, warm_hi = _warm if _warm is not None else (None, None)
    newv, inv = _sweep(xg, v.values, model, v.cap_scale, risk_neutral, gs_tol,
                       warm_lo, warm_hi)
    if np.any(np.isnan(newv)):
        raise SpecError("bad_value", "operator produced NaN (ill-posed model spec)")
    out = ValueFunction(v.grid, newv, weight=v.weight, cap_scale=v.cap_scale)
    return out, Policy(v.grid, inv)


# --------------------------------------------------------------------------
# solver
# --------------------------------------------------------------------------

def solve(model: ModelSpec, grid: Grid, tol: float = 1e-8, max_iter: int = 20000,
          risk_neutral: bool = False) -> SolveResult:
    """Iterate V <- LV from V = 0 until the fixed-point residual is certified.

    The stopping rule converts the iterate difference into a residual
    bound through the contraction estimate: stopping once
    ||V_{k+1} - V_k||_w <= tol*(1-q)/q with q = alpha*beta guarantees
    ||LV - V||_w <= tol for the returned V.
    """
    if tol <= 0:
        raise SpecError("bad_value", "tolerance must be positive")
    q = model.modulus
    if q >= 1.0:
        raise SpecError("no_contraction", f"alpha*beta = {q} >= 1")
    d = model.d_bound(grid.nodes)
    cap_scale = d / (1.0 - q)
    v = ValueFunction(grid, np.zeros(grid.m), weight=model.weight, cap_scale=cap_scale)
    threshold = tol * (1.0 - q) / q
    history = []
    policy = None
    gs_tol = 1e-10 * grid.x_max
    warm = None
    prev_inv = None
    for it in range(1, max_iter + 1):
        v_next, policy = apply_operator(v, model, risk_neutral=risk_neutral, _warm=warm)
        delta = w_norm_distance(v_next, v)
        history.append(delta)
        v = v_next
        if delta <= threshold:
            break
        # warm inner-search window: the per-node policy move shrinks
        # geometrically, so center the next search on the current policy;
        # the sweep falls back to the exact bracket if the window misses
        if prev_inv is not None:
            pad = 4.0 * np.abs(policy.invest - prev_inv) + 32.0 * gs_tol
            warm = (policy.invest - pad, policy.invest + pad)
        prev_inv = policy.invest
    else:
        raise ConvergenceError(
            f"value iteration did not reach tolerance in {max_iter} iterations",
            last_residual=history[-1] if history else np.inf)

    # certify the returned iterate directly
    lv, policy = apply_operator(v, model, risk_neutral=risk_neutral, _warm=warm)
    final_residual = w_norm_distance(lv, v)
    return SolveResult(value=v, policy=policy, iterations=it,
                       final_residual=final_residual, contraction_modulus=q,
                       residual_history=np.asarray(history))


# --------------------------------------------------------------------------
# finite-horizon policy evaluation
# --------------------------------------------------------------------------

PolicyLike = Union[Policy, Callable]


def _invest_fn(policy: PolicyLike):
    if isinstance(policy, Policy):
        return policy.invest_at
    return lambda x: np.asarray(policy(np.asarray(x, float)), float)


def _check_feasible(x, i):
    x = np.asarray(x, float)
    i = np.asarray(i, float)
    if np.any(i < -1e-12) or np.any(i > x + 1e-12 * max(1.0, float(np.max(x, initial=1.0)))):
        raise InfeasiblePolicyError("policy infeasible: i(x) outside [0, x]")


def policy_values(policy: PolicyLike, model: ModelSpec, T: int,
                  grid: Optional[Grid] = None) -> np.ndarray:
    """Grid samples of the T-stage utility of a stationary rule.

    Backward recursion from the zero function; with the rule applied at
    every stage, stage k's value is
    u(x - i(x)) + beta * rho(value_{k-1}(f(i(x), .))).
    """
    if T < 1:
        raise SpecError("bad_value", "horizon must be at least 1")
    if grid is None:
        if not isinstance(policy, Policy):
            raise SpecError("bad_value", "a grid is required for callable policies")
        grid = policy.grid
    xg = grid.nodes
    ifn = _invest_fn(policy)
    iv_raw = np.asarray(ifn(xg), float)
    _check_feasible(xg, iv_raw)
    iv = np.clip(iv_raw, 0.0, xg)
    q = model.modulus
    cap_scale = model.d_bound(xg) / (1.0 - q)
    fz = model.f(iv[:, None], model.shock.nodes[None, :])  # (M, N)
    uterm = model.u(xg - iv)
    g = np.zeros(grid.m)
    for _ in range(T):
        gf = ValueFunction(grid, g, weight=model.weight, cap_scale=cap_scale)(fz.ravel()).reshape(fz.shape)
        g = uterm + model.beta * _ce_rows(gf, model.shock.probs, model.gamma, False)
    return g


def evaluate_policy_finite(policy: PolicyLike, model: ModelSpec, T: int, x,
                           grid: Optional[Grid] = None) -> float:
    """T-stage utility J_T(x, policy) of a stationary rule at income x."""
    if grid is None and isinstance(policy, Policy):
        grid = policy.grid
    x = np.asarray(x, float)
    scalar = x.ndim == 0
    xq = np.atleast_1d(x)
    ifn = _invest_fn(policy)
    iq = np.asarray(ifn(xq), float)
    _check_feasible(xq, iq)
    iq = np.clip(iq, 0.0, xq)
    if T == 1:
        out = model.u(xq - iq)
    else:
        g_prev = policy_values(policy, model, T - 1, grid)
        cap_scale = model.d_bound(grid.nodes) / (1.0 - model.modulus)
        gf = ValueFunction(grid, g_prev, weight=model.weight, cap_scale=cap_scale)
        fz = model.f(iq[:, None], model.shock.nodes[None, :])
        cont = gf(fz.ravel()).reshape(fz.shape)
        out = model.u(xq - iq) + model.beta * _ce_rows(cont, model.shock.probs, model.gamma, False)
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# sandwich diagnostics
# --------------------------------------------------------------------------

@dataclass
class SandwichReport:
    horizons: Sequence[int]
    lower_margin: np.ndarray   # min over nodes of V + slack - J_T, per T
    upper_margin: np.ndarray   # min over nodes of J_T + gap_T + slack - V, per T
    monotone_in_T: bool
    passed: bool


def sandwich_check(result: SolveResult, model: ModelSpec, T_list: Sequence[int],
                   slack_coef: float = 1e-6) -> SandwichReport:
    """Check J_T(x, i*) <= V(x) and V(x) <= J_T(x, i*) + (ab)^T ||V||_w w(x),
    both up to slack_coef * w(x), at every node and every horizon."""
    grid = result.value.grid
    wv = model.w(grid.nodes)
    V = result.value.values
    vnorm = result.value.w_norm()
    q = model.modulus
    lower = np.empty(len(T_list))
    upper = np.empty(len(T_list))
    prev = None
    monotone = True
    for k, T in enumerate(T_list):
        jt = policy_values(result.policy, model, T, grid)
        lower[k] = float(np.min(V + slack_coef * wv - jt))
        upper[k] = float(np.min(jt + (q ** T) * vnorm * wv + slack_coef * wv - V))
        if prev is not None and np.any(jt < prev - 1e-12 * np.maximum(1.0, np.abs(prev))):
            monotone = False
        prev = jt
    passed = bool(np.all(lower >= 0) and np.all(upper >= 0) and monotone)
    return SandwichReport(list(T_list), lower, upper, monotone, passed)


# --------------------------------------------------------------------------
# artifacts
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_solution_csv(result: SolveResult, path):
    """CSV of (x, V, i*, c*) with 17-significant-digit decimals, LF endings."""
    g = result.value.grid.nodes
    v = result.value.values
    i = result.policy.invest
    with open(path, "w", newline="\n") as fh:
        fh.write("x,value,invest,consume\n")
        for j in range(g.size):
            fh.write(f"{_fmt(g[j])},{_fmt(v[j])},{_fmt(i[j])},{_fmt(g[j] - i[j])}\n")

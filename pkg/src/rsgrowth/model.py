"""Model primitives: utility, production, shocks, weight function, validation.

The solver works on a fully discretized model: every integral over the
shock distribution is a finite sum over quadrature atoms, so validation
checks and operator properties are exact on the discretized model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .errors import SpecError

__all__ = [
    "UtilitySpec",
    "ProductionSpec",
    "DiscreteShock",
    "WeightFunction",
    "ModelSpec",
    "ValidationReport",
    "validate",
    "make_preset",
    "model_from_dict",
    "model_to_dict",
]


# --------------------------------------------------------------------------
# utility
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UtilitySpec:
    """Per-period felicity u with u(0)=0, strictly increasing and concave.

    ``family`` is "power" (u(a) = a**sigma, sigma in (0,1)) or "custom"
    (tabulated values and derivative on a positive grid, interpolated
    linearly).
    """

    family: str = "power"
    sigma: float = 0.5
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    deriv: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.family == "power":
            if not (0.0 < self.sigma < 1.0):
                raise SpecError("bad_value", f"power utility exponent must lie in (0,1), got {self.sigma}")
        elif self.family == "custom":
            if self.grid is None or self.values is None or self.deriv is None:
                raise SpecError("bad_value", "custom utility requires grid, values and deriv tables")
            object.__setattr__(self, "grid", np.asarray(self.grid, float))
            object.__setattr__(self, "values", np.asarray(self.values, float))
            object.__setattr__(self, "deriv", np.asarray(self.deriv, float))
        else:
            raise SpecError("bad_value", f"unknown utility family {self.family!r}")

    def u(self, a):
        a = np.asarray(a, float)
        if self.family == "power":
            return np.power(np.maximum(a, 0.0), self.sigma)
        return np.interp(a, self.grid, self.values)

    def du(self, a):
        """Marginal utility; +inf at a=0 for the power family (Inada)."""
        a = np.asarray(a, float)
        if self.family == "power":
            with np.errstate(divide="ignore"):
                return self.sigma * np.power(np.maximum(a, 0.0), self.sigma - 1.0)
        return np.interp(a, self.grid, self.deriv)


# --------------------------------------------------------------------------
# production
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductionSpec:
    """Production technology f(y, z), concave and non-decreasing in y.

    Families:
      * "multiplicative": f(y, z) = y**theta * z, theta in (0,1)
      * "additive":       f(y, z) = eta*y + z for y > 0, f(0, z) = 0
      * "custom":         user-supplied callables f(y, z) and dfdy(y, z)

    The additive family is deliberately discontinuous at y = 0: investing
    nothing yields nothing regardless of the shock.
    """

    family: str = "multiplicative"
    theta: float = 0.5
    eta: float = 1.02
    f_callable: Optional[Callable] = None
    df_callable: Optional[Callable] = None

    def __post_init__(self):
        if self.family == "multiplicative":
            if not (0.0 < self.theta < 1.0):
                raise SpecError("bad_value", f"multiplicative exponent must lie in (0,1), got {self.theta}")
        elif self.family == "additive":
            if self.eta <= 0.0:
                raise SpecError("bad_value", f"additive growth rate must be positive, got {self.eta}")
        elif self.family == "custom":
            if self.f_callable is None or self.df_callable is None:
                raise SpecError("bad_value", "custom production requires f and dfdy callables")
        else:
            raise SpecError("bad_value", f"unknown production family {self.family!r}")

    def f(self, y, z):
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        if self.family == "multiplicative":
            return np.power(np.maximum(y, 0.0), self.theta) * z
        if self.family == "additive":
            return np.where(y > 0.0, self.eta * y + z, 0.0)
        return np.asarray(self.f_callable(y, z), float)

    def dfdy(self, y, z):
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        if self.family == "multiplicative":
            with np.errstate(divide="ignore"):
                return self.theta * np.power(np.maximum(y, 0.0), self.theta - 1.0) * z
        if self.family == "additive":
            return np.broadcast_to(np.asarray(self.eta, float), np.broadcast_shapes(y.shape, z.shape)).copy()
        return np.asarray(self.df_callable(y, z), float)


# --------------------------------------------------------------------------
# shocks
# --------------------------------------------------------------------------

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteShock:
    """Finite quadrature representation of the shock distribution.

    Atoms are non-negative, probabilities strictly positive and sum to one.
    Quantile-discretized constructors place equal-probability atoms at
    quantile midpoints q_i = (2i-1)/(2N) of the source distribution.
    """

    nodes: np.ndarray
    probs: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, float)
        probs = np.asarray(self.probs, float)
        if nodes.size == 0:
            raise SpecError("empty_shock", "shock support is empty")
        if nodes.size != probs.size:
            raise SpecError("bad_value", "shock nodes and probs must have equal length")
        if np.any(nodes < 0.0):
            raise SpecError("bad_value", "shock atoms must be non-negative")
        if np.any(probs <= 0.0):
            raise SpecError("bad_value", "shock probabilities must be strictly positive")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise SpecError("bad_value", f"shock probabilities sum to {probs.sum()!r}, not 1")
        order = np.argsort(nodes)
        object.__setattr__(self, "nodes", nodes[order])
        object.__setattr__(self, "probs", probs[order])

    @property
    def mean(self) -> float:
        return float(self.nodes @ self.probs)

    @property
    def n(self) -> int:
        return self.nodes.size

    @staticmethod
    def explicit(nodes, probs) -> "DiscreteShock":
        return DiscreteShock(np.asarray(nodes, float), np.asarray(probs, float), "explicit")

    @staticmethod
    def degenerate(z: float) -> "DiscreteShock":
        return DiscreteShock(np.array([float(z)]), np.array([1.0]), "explicit")

    @staticmethod
    def lognormal(mu: float, sigma: float, n: int = 128, normalize_mean: Optional[float] = None) -> "DiscreteShock":
        """Equal-probability quantile-midpoint atoms of LogNormal(mu, sigma).

        With ``normalize_mean`` the atoms are rescaled multiplicatively so
        the discrete mean equals the given target exactly (quantile
        midpoints alone understate the continuous mean).
        """
        if n < 1:
            raise SpecError("bad_value", "need at least one shock atom")
        if sigma < 0:
            raise SpecError("bad_value", "lognormal sigma must be non-negative")
        q = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
        nodes = np.exp(mu + sigma * stats.norm.ppf(q))
        probs = np.full(n, 1.0 / n)
        if normalize_mean is not None:
            nodes = nodes * (normalize_mean / (nodes @ probs))
        return DiscreteShock(nodes, probs, f"quantile:lognormal(mu={mu},sigma={sigma},n={n})")

    @staticmethod
    def uniform(lo: float, hi: float, n: int = 128) -> "DiscreteShock":
        if not (0.0 <= lo < hi):
            raise SpecError("bad_value", "uniform shock requires 0 <= lo < hi")
        q = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
        nodes = lo + (hi - lo) * q
        return DiscreteShock(nodes, np.full(n, 1.0 / n), f"quantile:uniform({lo},{hi},n={n})")

    @staticmethod
    def two_point(lo: float, hi: float, p_lo: float = 0.5) -> "DiscreteShock":
        if not (0.0 < p_lo < 1.0):
            raise SpecError("bad_value", "two-point shock needs p_lo in (0,1)")
        return DiscreteShock(np.array([lo, hi], float), np.array([p_lo, 1.0 - p_lo]), "two_point")


# --------------------------------------------------------------------------
# weight function
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """Growth weight w(x) = (r + x)**sigma with r >= 1, or constant 1.

    The constant form is only adequate for compact-state models; the
    shifted power form is what the preset contraction constants assume.
    """

    r: float = 10.0
    sigma: float = 0.5
    constant: bool = False

    def __post_init__(self):
        if not self.constant and self.r < 1.0:
            raise SpecError("bad_value", f"weight shift r must be >= 1, got {self.r}")

    def w(self, x):
        x = np.asarray(x, float)
        if self.constant:
            return np.ones_like(x)
        return np.power(self.r + x, self.sigma)


# --------------------------------------------------------------------------
# full model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """Complete, immutable description of the discretized growth model."""

    utility: UtilitySpec
    production: ProductionSpec
    shock: DiscreteShock
    beta: float
    gamma: float
    weight: WeightFunction
    alpha: float

    # convenience pass-throughs
    def u(self, a):
        return self.utility.u(a)

    def du(self, a):
        return self.utility.du(a)

    def f(self, y, z):
        return self.production.f(y, z)

    def dfdy(self, y, z):
        return self.production.dfdy(y, z)

    def w(self, x):
        return self.weight.w(x)

    @property
    def modulus(self) -> float:
        """Contraction modulus alpha*beta of the value-iteration operator."""
        return self.alpha * self.beta

    def d_bound(self, grid_nodes) -> float:
        """Tightest grid-verifiable constant d with u(x) <= d*w(x)."""
        x = np.asarray(grid_nodes, float)
        return float(np.max(self.u(x) / self.w(x)))

    def with_gamma(self, gamma: float) -> "ModelSpec":
        return replace(self, gamma=float(gamma))

    def with_shock(self, shock: DiscreteShock) -> "ModelSpec":
        return replace(self, shock=shock)


def _alpha_from_grid(model_wo_alpha, grid_nodes) -> float:
    """Empirical contraction constant for custom production.

    f non-decreasing in y and w non-decreasing collapse the inner sup
    over y in [0, x] to y = x.
    """
    x = np.asarray(grid_nodes, float)
    fz = model_wo_alpha.production.f(x[:, None], model_wo_alpha.shock.nodes[None, :])
    lhs = model_wo_alpha.weight.w(fz) @ model_wo_alpha.shock.probs
    return float(np.max(lhs / model_wo_alpha.weight.w(x)))


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_point: Optional[float] = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, worst_point=None, detail=""):
        self.checks.append(CheckResult(name, bool(passed), worst_point, detail))

    def to_json(self) -> dict:
        return {
            "all_pass": self.all_pass,
            "checks": [
                {"name": c.name, "passed": c.passed, "worst_point": c.worst_point, "detail": c.detail}
                for c in self.checks
            ],
        }


_STRICT_CONCAVITY_TOL = 1e-12


def validate(spec: ModelSpec, grid) -> ValidationReport:
    """Numerically check the standing assumptions on a grid.

    Raises SpecError for the hard rejects (discount factor, risk
    coefficient, shock support, contraction modulus); everything else is
    reported with a pass/fail entry and the worst-violating grid point.
    """
    nodes = np.asarray(getattr(grid, "nodes", grid), float)
    if nodes.size == 0 or np.any(np.diff(nodes) <= 0) or nodes[-1] <= 0:
        raise SpecError("grid_invalid", "grid must be non-empty, strictly increasing with positive upper endpoint")
    if not (0.0 < spec.beta < 1.0):
        raise SpecError("beta_out_of_range", f"discount factor out of range: beta={spec.beta} not in (0,1)")
    if spec.gamma <= 0.0:
        raise SpecError("gamma_not_positive", f"risk coefficient must be positive, got {spec.gamma}")
    if spec.shock.n == 0:  # unreachable through DiscreteShock, kept for raw inputs
        raise SpecError("empty_shock", "shock support is empty")
    if spec.modulus >= 1.0:
        raise SpecError("no_contraction", f"alpha*beta = {spec.modulus} >= 1: operator is not a contraction")

    rpt = ValidationReport()
    pos = nodes[nodes > 0]
    uvals = spec.u(nodes)
    scale = max(float(np.max(np.abs(uvals))), 1.0)

    # (U1): u(0)=0, strictly increasing and strictly concave on sampled points
    d1 = np.diff(uvals)
    d2 = np.diff(d1)
    ok_u0 = abs(float(spec.u(0.0))) <= 1e-12
    ok_incr = np.all(d1 > 0)
    ok_conc = np.all(d2 <= -_STRICT_CONCAVITY_TOL * scale)
    worst = None
    if not ok_conc:
        worst = float(nodes[1:-1][np.argmax(d2)])
    rpt.add("U1", ok_u0 and ok_incr and ok_conc, worst,
            "u(0)=0, first differences positive, second differences strictly negative")

    # (U2): u <= d*w on the grid, w >= 1 non-decreasing
    wvals = spec.w(nodes)
    d_const = spec.d_bound(nodes)
    ok_w = np.all(wvals >= 1.0 - 1e-12) and np.all(np.diff(wvals) >= -1e-12)
    ok_dom = np.all(uvals <= d_const * wvals * (1 + 1e-12))
    rpt.add("U2", ok_w and ok_dom, None, f"d = {d_const:.6g}")

    # (U3): analytic u' matches central finite differences
    a = np.linspace(max(1e-3, pos[0] if pos.size else 1e-3), nodes[-1], 200)
    h = 1e-6 * np.maximum(a, 1.0)
    fd = (spec.u(a + h) - spec.u(a - h)) / (2 * h)
    rel = np.abs(fd - spec.du(a)) / np.abs(spec.du(a))
    ok_u3 = np.all(rel < 1e-5)
    rpt.add("U3", ok_u3, float(a[np.argmax(rel)]), f"max rel derivative mismatch {rel.max():.2e}")

    # (U4): Inada at zero (checked by divergence along a shrinking sequence)
    small = np.array([1e-4, 1e-6, 1e-8])
    dus = spec.du(small)
    rpt.add("U4", bool(np.all(np.diff(dus) > 0) and dus[-1] > 1e2), None,
            f"u'({small[-1]:g}) = {dus[-1]:.3g}")

    # (F1): per shock atom, y -> f(y,z) non-decreasing and concave on the
    # positive sampled points.  The additive family is discontinuous at
    # y=0 by convention, so y=0 is excluded from the continuity check.
    ys = pos
    ok_f1 = True
    worst_f1 = None
    for z in spec.shock.nodes[[0, spec.shock.n // 2, -1]]:
        fv = spec.f(ys, np.full_like(ys, z))
        df1 = np.diff(fv)
        df2 = np.diff(df1)
        if np.any(df1 < -1e-12 * scale) or np.any(df2 > 1e-9 * max(scale, float(np.max(np.abs(fv))))):
            ok_f1 = False
            worst_f1 = float(z)
    rpt.add("F1", ok_f1, worst_f1, "f non-decreasing and concave in y at sampled atoms")

    # (F2): sup_{y<=x} E[w(f(y,z))] <= alpha*w(x); the sup is attained at y=x
    fz = spec.f(nodes[:, None], spec.shock.nodes[None, :])
    lhs = spec.w(fz) @ spec.shock.probs
    ratio = lhs / (spec.alpha * wvals)
    ok_f2 = np.all(ratio <= 1.0 + 1e-9)
    rpt.add("F2", ok_f2, float(nodes[np.argmax(ratio)]), f"max E[w(f)]/(alpha*w) = {ratio.max():.12g}")

    # (F4): f(0,z) = 0 for all atoms
    f0 = spec.f(np.zeros(spec.shock.n), spec.shock.nodes)
    rpt.add("F4", bool(np.all(np.abs(f0) <= 1e-12)), None, "f(0,z)=0")

    # (F5): positive expected marginal product at some y > 0
    y5 = 0.5 * nodes[-1]
    mp = float(spec.dfdy(np.full(spec.shock.n, y5), spec.shock.nodes) @ spec.shock.probs)
    rpt.add("F5", mp > 0.0, y5, f"E[f'(y,z)] = {mp:.4g} at y={y5:g}")

    rpt.add("contraction", spec.modulus < 1.0, None, f"alpha*beta = {spec.modulus:.6g}")
    return rpt


# --------------------------------------------------------------------------
# presets (multiplicative / additive shock examples)
# --------------------------------------------------------------------------

_PRESET_KEYS = {
    "multiplicative": {"theta", "sigma", "beta", "gamma", "r", "shock"},
    "additive": {"eta", "sigma", "beta", "gamma", "r", "shock"},
}


def _default_shock() -> DiscreteShock:
    # lognormal with unit mean (mu = -sigma^2/2) and finite E[1/z]
    return DiscreteShock.lognormal(mu=-0.045, sigma=0.3, n=128, normalize_mean=1.0)


def make_preset(name: str, **overrides) -> ModelSpec:
    """Built-in multiplicative / additive models with auto-chosen weight shift.

    The shift r is taken large enough that the contraction constant from
    the closed forms satisfies alpha*beta < 1; if no such r exists the
    parameters admit no contraction weight and a SpecError is raised.
    """
    if name not in _PRESET_KEYS:
        raise SpecError("bad_value", f"unknown preset {name!r}")
    bad = set(overrides) - _PRESET_KEYS[name]
    if bad:
        raise SpecError("unknown_key", f"unknown preset override(s): {sorted(bad)}")

    sigma = float(overrides.get("sigma", 0.5))
    beta = float(overrides.get("beta", 0.95))
    gamma = float(overrides.get("gamma", 1.0))
    shock = overrides.get("shock") or _default_shock()
    if not (0.0 < beta < 1.0):
        raise SpecError("beta_out_of_range", f"discount factor out of range: beta={beta} not in (0,1)")
    zbar = shock.mean

    if name == "multiplicative":
        theta = float(overrides.get("theta", 0.5))
        production = ProductionSpec(family="multiplicative", theta=theta)
        growth = zbar ** (1.0 / (1.0 - theta))
        # need (1 + growth/r)^sigma * beta < 1
        denom = beta ** (-1.0 / sigma) - 1.0
        r_min = growth / denom
        r = float(overrides.get("r", 10.0 if 10.0 > r_min else 1.05 * r_min))
        r = max(r, 1.0)
        alpha = (1.0 + growth / r) ** sigma
    else:
        eta = float(overrides.get("eta", 1.02))
        production = ProductionSpec(family="additive", eta=eta)
        if eta > 1.0:
            if beta * eta ** sigma >= 1.0:
                raise SpecError("no_feasible_weight",
                                "no contraction weight exists for these parameters "
                                f"(beta*eta^sigma = {beta * eta ** sigma:.6g} >= 1)")
            r = float(overrides.get("r", max(1.0, 1.05 * zbar / (eta - 1.0))))
            alpha = eta ** sigma
        else:
            denom = beta ** (-1.0 / sigma) - 1.0
            r_min = zbar / denom
            r = float(overrides.get("r", max(10.0, 1.05 * r_min, 1.0)))
            alpha = (1.0 + zbar / r) ** sigma

    spec = ModelSpec(
        utility=UtilitySpec(family="power", sigma=sigma),
        production=production,
        shock=shock,
        beta=beta,
        gamma=gamma,
        weight=WeightFunction(r=r, sigma=sigma),
        alpha=alpha,
    )
    if spec.modulus >= 1.0:
        raise SpecError("no_contraction",
                        f"alpha*beta = {spec.modulus:.6g} >= 1 for preset {name!r} with these parameters")
    return spec


def default_x_max(spec: ModelSpec) -> float:
    """Truncation point keeping preset dynamics inside the grid.

    For the multiplicative family f(x_max, z_max) <= x_max once
    x_max >= z_max**(1/(1-theta)); the margin keeps interpolation off the
    extension branch.  The additive family with eta near or above one has
    no invariant bounded set, so a generous fixed cap is used.
    """
    zmax = float(spec.shock.nodes[-1])
    if spec.production.family == "multiplicative":
        theta = spec.production.theta
        return max(5.0, 1.3 * zmax ** (1.0 / (1.0 - theta)))
    if spec.production.family == "additive":
        eta = spec.production.eta
        if eta < 1.0:
            return max(10.0, 1.5 * zmax / (1.0 - eta))
        return 50.0
    return 10.0


# --------------------------------------------------------------------------
# JSON document interface
# --------------------------------------------------------------------------

def _require_keys(doc: dict, allowed: set, context: str):
    unknown = set(doc) - allowed
    if unknown:
        raise SpecError("unknown_key", f"unknown key(s) in {context}: {sorted(unknown)}")


def _shock_from_dict(doc: dict) -> DiscreteShock:
    fam = doc.get("family")
    if fam == "lognormal":
        _require_keys(doc, {"family", "mu", "sigma", "nodes", "normalize_mean"}, "shock")
        return DiscreteShock.lognormal(float(doc["mu"]), float(doc["sigma"]),
                                       int(doc.get("nodes", 128)),
                                       doc.get("normalize_mean"))
    if fam == "uniform":
        _require_keys(doc, {"family", "lo", "hi", "nodes"}, "shock")
        return DiscreteShock.uniform(float(doc["lo"]), float(doc["hi"]), int(doc.get("nodes", 128)))
    if fam == "two_point":
        _require_keys(doc, {"family", "lo", "hi", "p_lo"}, "shock")
        return DiscreteShock.two_point(float(doc["lo"]), float(doc["hi"]), float(doc.get("p_lo", 0.5)))
    if fam == "degenerate":
        _require_keys(doc, {"family", "z"}, "shock")
        return DiscreteShock.degenerate(float(doc["z"]))
    if fam == "explicit":
        _require_keys(doc, {"family", "nodes", "probs"}, "shock")
        return DiscreteShock.explicit(doc["nodes"], doc["probs"])
    raise SpecError("bad_value", f"unknown shock family {fam!r}")


def model_from_dict(doc: dict) -> ModelSpec:
    """Parse the JSON model-spec document.  Unknown keys are errors."""
    _require_keys(doc, {"utility", "production", "shock", "beta", "gamma", "weight", "alpha"}, "model")
    for key in ("utility", "production", "shock", "beta", "gamma"):
        if key not in doc:
            raise SpecError("bad_value", f"model document missing required key {key!r}")

    udoc = doc["utility"]
    if udoc.get("family") != "power":
        raise SpecError("bad_value", "only the power utility family is supported in JSON documents")
    _require_keys(udoc, {"family", "sigma"}, "utility")
    utility = UtilitySpec(family="power", sigma=float(udoc["sigma"]))

    pdoc = doc["production"]
    fam = pdoc.get("family")
    if fam == "multiplicative":
        _require_keys(pdoc, {"family", "theta"}, "production")
        production = ProductionSpec(family="multiplicative", theta=float(pdoc["theta"]))
    elif fam == "additive":
        _require_keys(pdoc, {"family", "eta"}, "production")
        production = ProductionSpec(family="additive", eta=float(pdoc["eta"]))
    else:
        raise SpecError("bad_value", f"unknown production family {fam!r}")

    shock = _shock_from_dict(doc["shock"])

    wdoc = doc.get("weight", {})
    _require_keys(wdoc, {"r", "constant"}, "weight")
    if wdoc.get("constant"):
        weight = WeightFunction(constant=True)
    else:
        weight = WeightFunction(r=float(wdoc.get("r", 10.0)), sigma=utility.sigma)

    beta = float(doc["beta"])
    gamma = float(doc["gamma"])

    if "alpha" in doc:
        alpha = float(doc["alpha"])
    else:
        # closed forms from the preset families
        zbar = shock.mean
        if fam == "multiplicative":
            alpha = (1.0 + zbar ** (1.0 / (1.0 - production.theta)) / weight.r) ** utility.sigma
        elif production.eta > 1.0:
            alpha = production.eta ** utility.sigma
        else:
            alpha = (1.0 + zbar / weight.r) ** utility.sigma
        if weight.constant:
            alpha = 1.0  # compact-state convention, w == 1

    return ModelSpec(utility=utility, production=production, shock=shock,
                     beta=beta, gamma=gamma, weight=weight, alpha=alpha)


def model_to_dict(spec: ModelSpec) -> dict:
    doc = {
        "utility": {"family": "power", "sigma": spec.utility.sigma},
        "beta": spec.beta,
        "gamma": spec.gamma,
        "alpha": spec.alpha,
        "shock": {"family": "explicit", "nodes": spec.shock.nodes.tolist(), "probs": spec.shock.probs.tolist()},
    }
    if spec.production.family == "multiplicative":
        doc["production"] = {"family": "multiplicative", "theta": spec.production.theta}
    elif spec.production.family == "additive":
        doc["production"] = {"family": "additive", "eta": spec.production.eta}
    else:
        raise SpecError("bad_value", "custom production cannot be serialized")
    doc["weight"] = {"constant": True} if spec.weight.constant else {"r": spec.weight.r}
    return doc

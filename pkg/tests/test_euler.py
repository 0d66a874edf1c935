import numpy as np
import pytest

from rsgrowth import (DiscreteShock, Grid, Policy, SpecError, ValueFunction,
                      default_x_max, envelope_check, euler_report,
                      euler_residual, make_preset, solve, tilt_weights,
                      vhat_derivative)
from rsgrowth.bellman import SolveResult


@pytest.fixture(scope="module")
def degen_solved():
    model = make_preset("multiplicative", shock=DiscreteShock.degenerate(1.0))
    grid = Grid.uniform(200, default_x_max(model))
    return model, solve(model, grid, tol=1e-8)


# ------------------------------------------------------------------
# tilt weights
# ------------------------------------------------------------------

def test_tilt_weights_are_probabilities(rng):
    v = rng.uniform(0, 5, 32)
    p = rng.dirichlet(np.ones(32))
    w = tilt_weights(v, p, gamma=1.7)
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.all(w >= 0)


def test_tilt_weights_downweight_high_values():
    # exponential tilt favors low continuation values
    v = np.array([0.0, 10.0])
    p = np.array([0.5, 0.5])
    w = tilt_weights(v, p, gamma=1.0)
    assert w[0] > w[1]


def test_tilt_risk_neutral_passthrough():
    p = np.array([0.3, 0.7])
    w = tilt_weights(np.array([1.0, 2.0]), p, gamma=1.0, risk_neutral=True)
    assert np.array_equal(w, p)


# ------------------------------------------------------------------
# residual oracles
# ------------------------------------------------------------------

def test_degenerate_shock_tilt_cancels(degen_solved):
    # one atom: rhs must equal beta * u'(c*(f)) * f'(i*, z) exactly
    model, r = degen_solved
    x = 2.0
    i = float(r.policy.invest_at(x))
    rec = euler_residual(x, r, model)
    f = float(model.f(i, 1.0))
    want = model.beta * float(model.du(r.policy.consume_at(f))) \
        * float(model.dfdy(i, 1.0))
    assert abs(rec.rhs - want) < 1e-14
    assert rec.lhs == float(model.du(x - i))


def test_foc_identity(mult_solved, mult_model):
    # euler_residual and the G-function route agree by construction
    x = 3.0
    i = float(mult_solved.policy.invest_at(x))
    rec = euler_residual(x, mult_solved, mult_model)
    g = vhat_derivative(i, mult_solved, mult_model)
    assert abs(rec.rhs - mult_model.beta * g) < 1e-14


def test_residuals_small_on_preset(mult_solved, mult_model):
    rep = euler_report(mult_solved, mult_model)
    assert rep.median_residual <= 5e-3  # coarse 200-node grid
    assert all(np.isfinite(r.rel_residual) for r in rep.records)


def test_report_skips_origin(mult_solved, mult_model):
    rep = euler_report(mult_solved, mult_model)
    assert (0.0, "not_interior") in rep.skipped


def test_residual_errors():
    model = make_preset("multiplicative")
    grid = Grid.uniform(64, default_x_max(model))
    v = ValueFunction(grid, model.u(grid.nodes), weight=model.weight,
                      cap_scale=np.inf)
    hoarder = SolveResult(value=v, policy=Policy(grid, grid.nodes.copy()),
                          iterations=0, final_residual=np.nan,
                          contraction_modulus=model.modulus)
    with pytest.raises(SpecError) as e:
        euler_residual(2.0, hoarder, model)  # consumes nothing
    assert e.value.code == "zero_consumption"
    spender = SolveResult(value=v, policy=Policy(grid, np.zeros(grid.m)),
                          iterations=0, final_residual=np.nan,
                          contraction_modulus=model.modulus)
    with pytest.raises(SpecError) as e:
        euler_residual(2.0, spender, model)  # invests nothing
    assert e.value.code == "zero_investment"


# ------------------------------------------------------------------
# G function
# ------------------------------------------------------------------

def test_vhat_derivative_one_node(degen_solved):
    model, r = degen_solved
    y = 1.0
    f = float(model.f(y, 1.0))
    want = float(model.du(r.policy.consume_at(f))) * float(model.dfdy(y, 1.0))
    assert abs(vhat_derivative(y, r, model) - want) < 1e-14


def test_vhat_derivative_monotone(mult_solved, mult_model):
    ys = np.linspace(0.3, 2.5, 30)
    g = [vhat_derivative(float(y), mult_solved, mult_model) for y in ys]
    assert np.all(np.diff(g) <= 1e-10)


def test_vhat_derivative_rejects_nonpositive(mult_solved, mult_model):
    with pytest.raises(SpecError):
        vhat_derivative(0.0, mult_solved, mult_model)


# ------------------------------------------------------------------
# envelope
# ------------------------------------------------------------------

def test_envelope_linear_synthetic(mult_model):
    # V with slope exactly u'(c) everywhere: finite differences of linear
    # data are exact, so the relative error vanishes in the interior window
    model = mult_model
    grid = Grid.uniform(64, default_x_max(model))
    slope = float(model.du(1.0))  # c == 1 wherever feasible
    v = ValueFunction(grid, slope * grid.nodes, weight=model.weight,
                      cap_scale=np.inf)
    invest = np.clip(grid.nodes - 1.0, 0.0, grid.nodes)
    res = SolveResult(value=v, policy=Policy(grid, invest), iterations=0,
                      final_residual=0.0, contraction_modulus=model.modulus)
    rep = envelope_check(res, model)
    assert rep.max_rel_error < 1e-12


def test_envelope_small_on_preset(mult_solved, mult_model):
    rep = envelope_check(mult_solved, mult_model)
    assert rep.max_rel_error <= 1e-2


def test_envelope_on_degenerate(degen_solved):
    model, r = degen_solved
    rep = envelope_check(r, model)
    assert rep.max_rel_error <= 1e-2

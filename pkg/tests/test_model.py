import math

import numpy as np
import pytest

from rsgrowth import (DiscreteShock, Grid, ProductionSpec, SpecError,
                      UtilitySpec, WeightFunction, default_x_max, make_preset,
                      model_from_dict, model_to_dict, validate)


# ------------------------------------------------------------------
# presets
# ------------------------------------------------------------------

def test_multiplicative_preset_closed_forms(mult_model):
    m = mult_model
    # discrete shock mean is rescaled to exactly 1, so the contraction
    # constant equals (1 + 1/r)^sigma = sqrt(1.1) exactly
    assert abs(m.shock.mean - 1.0) < 1e-14
    assert abs(m.alpha - math.sqrt(1.1)) < 1e-14
    assert m.modulus < 1.0
    assert m.beta == 0.95 and m.gamma == 1.0


def test_additive_preset_contraction():
    m = make_preset("additive")
    assert abs(m.alpha - 1.02 ** 0.5) < 1e-14
    assert m.modulus < 1.0


def test_preset_overrides_and_unknown_key():
    m = make_preset("multiplicative", gamma=2.5, beta=0.9)
    assert m.gamma == 2.5 and m.beta == 0.9
    with pytest.raises(SpecError):
        make_preset("multiplicative", eta=1.1)
    with pytest.raises(SpecError):
        make_preset("nope")


def test_additive_no_feasible_weight():
    # beta * eta^sigma >= 1 admits no contraction weight
    with pytest.raises(SpecError) as e:
        make_preset("additive", eta=1.3, beta=0.99)
    assert e.value.code == "no_feasible_weight"


# ------------------------------------------------------------------
# shock discretization
# ------------------------------------------------------------------

def test_shock_basics():
    s = DiscreteShock.lognormal(mu=-0.045, sigma=0.3, n=64, normalize_mean=1.0)
    assert s.n == 64
    assert abs(s.probs.sum() - 1.0) < 1e-12
    assert np.all(np.diff(s.nodes) > 0)
    assert abs(s.mean - 1.0) < 1e-14


def test_degenerate_shock():
    s = DiscreteShock.degenerate(1.3)
    assert s.n == 1 and s.nodes[0] == 1.3 and s.probs[0] == 1.0


def test_two_point_shock():
    s = DiscreteShock.two_point(0.5, 1.5, p_lo=0.25)
    assert abs(s.mean - (0.25 * 0.5 + 0.75 * 1.5)) < 1e-14


def test_bad_shock_probs():
    with pytest.raises(SpecError):
        DiscreteShock.explicit([1.0, 2.0], [0.6, 0.6])


# ------------------------------------------------------------------
# primitives
# ------------------------------------------------------------------

def test_power_utility():
    u = UtilitySpec(family="power", sigma=0.5)
    assert u.u(0.0) == 0.0
    assert abs(u.u(4.0) - 2.0) < 1e-15
    assert np.isinf(u.du(0.0))
    with pytest.raises(SpecError):
        UtilitySpec(family="power", sigma=1.5)


def test_additive_production_discontinuity():
    p = ProductionSpec(family="additive", eta=1.02)
    # no investment means no output, even though eta*0 + z = z
    assert p.f(0.0, 2.0) == 0.0
    assert abs(p.f(1.0, 2.0) - 3.02) < 1e-15


def test_multiplicative_production():
    p = ProductionSpec(family="multiplicative", theta=0.5)
    assert abs(p.f(4.0, 1.5) - 3.0) < 1e-15
    assert abs(p.dfdy(4.0, 1.5) - 0.375) < 1e-15


def test_weight_function():
    w = WeightFunction(r=10.0, sigma=0.5)
    assert abs(w.w(0.0) - math.sqrt(10.0)) < 1e-15
    assert np.all(np.diff(w.w(np.linspace(0, 5, 50))) > 0)
    with pytest.raises(SpecError):
        WeightFunction(r=0.5, sigma=0.5)  # w must stay >= 1


# ------------------------------------------------------------------
# validation
# ------------------------------------------------------------------

def test_validate_preset_passes(mult_model, mult_grid):
    rpt = validate(mult_model, mult_grid)
    assert rpt.all_pass, rpt.to_json()


def test_validate_rejects_no_contraction(mult_model, mult_grid):
    import dataclasses
    bad = dataclasses.replace(mult_model, beta=0.96)  # alpha*beta > 1
    with pytest.raises(SpecError) as e:
        validate(bad, mult_grid)
    assert e.value.code == "no_contraction"


def test_validate_rejects_bad_gamma(mult_model, mult_grid):
    with pytest.raises(SpecError) as e:
        validate(mult_model.with_gamma(-1.0), mult_grid)
    assert e.value.code == "gamma_not_positive"


def test_d_bound_is_tight(mult_model, mult_grid):
    x = mult_grid.nodes
    d = mult_model.d_bound(x)
    ratio = mult_model.u(x) / mult_model.w(x)
    assert np.all(ratio <= d + 1e-15)
    assert np.isclose(ratio.max(), d)


def test_default_x_max_keeps_dynamics_inside(mult_model):
    xm = default_x_max(mult_model)
    z_max = mult_model.shock.nodes[-1]
    assert mult_model.f(xm, z_max) <= xm


# ------------------------------------------------------------------
# JSON document round trip
# ------------------------------------------------------------------

def test_model_dict_round_trip(mult_model):
    doc = model_to_dict(mult_model)
    back = model_from_dict(doc)
    assert back.beta == mult_model.beta
    assert back.gamma == mult_model.gamma
    assert back.alpha == pytest.approx(mult_model.alpha, rel=0, abs=1e-15)
    assert np.allclose(back.shock.nodes, mult_model.shock.nodes)


def test_model_dict_unknown_key(mult_model):
    doc = model_to_dict(mult_model)
    doc["flux_capacitor"] = 1
    with pytest.raises(SpecError) as e:
        model_from_dict(doc)
    assert e.value.code == "unknown_key"


# ------------------------------------------------------------------
# grid
# ------------------------------------------------------------------

def test_grid_invariants():
    g = Grid.uniform(32, 5.0)
    assert g.nodes[0] == 0.0 and g.m == 32 and g.x_max == 5.0
    with pytest.raises(SpecError):
        Grid(np.linspace(0.1, 5.0, 32))  # must start at 0
    with pytest.raises(SpecError):
        Grid.uniform(8, 5.0)  # too few nodes


def test_loguniform_grid():
    g = Grid.loguniform(64, 5.0)
    assert g.nodes[0] == 0.0
    assert np.all(np.diff(g.nodes) > 0)

import numpy as np
import pytest

from rsgrowth import (DiscreteShock, Grid, SpecError, default_x_max,
                      drift_check, lyapunov_w1, make_preset, simulate, solve,
                      stationary_estimate)
from rsgrowth.dynamics import _ks_distance, d1_proxy, write_ecdf_csv, write_trace_csv


@pytest.fixture(scope="module")
def degen_solved():
    model = make_preset("multiplicative", shock=DiscreteShock.degenerate(1.0))
    grid = Grid.uniform(200, default_x_max(model))
    return model, solve(model, grid, tol=1e-8)


# ------------------------------------------------------------------
# simulation
# ------------------------------------------------------------------

def test_same_seed_bit_identical(mult_solved, mult_model):
    a = simulate(mult_solved, mult_model, 2.0, 2000, seed=42)
    b = simulate(mult_solved, mult_model, 2.0, 2000, seed=42)
    assert np.array_equal(a.path, b.path)
    c = simulate(mult_solved, mult_model, 2.0, 2000, seed=43)
    assert not np.array_equal(a.path, c.path)


def test_states_stay_positive(mult_solved, mult_model):
    tr = simulate(mult_solved, mult_model, 0.5, 5000, seed=3)
    assert np.all(tr.path > 0)


def test_degenerate_path_matches_map_iteration(degen_solved):
    # deterministic shock: the trace is exactly the iterated policy map
    model, r = degen_solved
    tr = simulate(r, model, 2.0, 200, seed=9)
    x = 2.0
    for t in range(200):
        x = float(model.f(float(r.policy.invest_at(x)), 1.0))
        assert tr.path[t + 1] == x


def test_degenerate_converges_monotone(degen_solved):
    model, r = degen_solved
    lo = simulate(r, model, 0.1, 3000, seed=1).path
    hi = simulate(r, model, 5.0, 3000, seed=1).path
    assert np.all(np.diff(lo[:100]) >= -1e-12)   # from below: increasing
    assert np.all(np.diff(hi[:100]) <= 1e-12)    # from above: decreasing
    assert abs(lo[-1] - hi[-1]) < 1e-10          # common fixed point


def test_simulate_input_errors(mult_solved, mult_model):
    with pytest.raises(SpecError):
        simulate(mult_solved, mult_model, -1.0, 100, seed=0)
    with pytest.raises(SpecError):
        simulate(mult_solved, mult_model, 1.0, 100, seed=0, burn_in=100)


def test_sample_excludes_burn_in(mult_solved, mult_model):
    tr = simulate(mult_solved, mult_model, 2.0, 1000, seed=5, burn_in=100)
    assert tr.sample.size == 900
    assert tr.sample[0] == tr.path[101]


# ------------------------------------------------------------------
# Lyapunov pieces
# ------------------------------------------------------------------

def test_w1_spot_value(mult_solved, mult_model):
    x = 2.5
    c = float(mult_solved.policy.consume_at(x))
    v = float(mult_solved.value(x))
    want = np.sqrt(float(mult_model.du(c)) * np.exp(-mult_model.gamma * v))
    assert abs(lyapunov_w1(x, mult_solved, mult_model) - want) < 1e-14


def test_w1_blows_up_at_edges(mult_solved, mult_model):
    xm = mult_solved.value.grid.x_max
    w_small = lyapunov_w1(1e-6 * xm, mult_solved, mult_model)
    w_mid = lyapunov_w1(0.5 * xm, mult_solved, mult_model)
    assert w_small > 10 * w_mid
    # and W = W1 + x grows at the right edge through the +x term
    assert (lyapunov_w1(xm, mult_solved, mult_model) + xm) > w_mid


def test_d1_proxy_additive_constant():
    model = make_preset("additive")
    vals = d1_proxy(model, [0.01, 0.1, 1.0])
    want = 1.0 / (model.beta * model.production.eta)
    assert np.allclose(vals, want, atol=1e-14)
    assert want > 1.0  # the small-investment condition fails here


def test_d1_proxy_multiplicative_vanishes(mult_model):
    vals = d1_proxy(mult_model, [1e-6, 1e-4, 1e-2])
    assert np.all(np.diff(vals) > 0)
    assert vals[0] < 1e-2


# ------------------------------------------------------------------
# drift report
# ------------------------------------------------------------------

def test_drift_multiplicative_passes(mult_solved, mult_model):
    rep = drift_check(mult_solved, mult_model)
    assert rep.verdict == "pass"
    assert rep.lambda1 < 1.0 and rep.kappa1 > 0.0
    assert rep.w1_margin_min >= 0.0
    assert rep.lambda_w < 1.0 and rep.w_margin_min >= 0.0


def test_drift_d2_closed_form(mult_solved, mult_model):
    rep = drift_check(mult_solved, mult_model)
    th = mult_model.production.theta
    zbar = float(mult_model.shock.probs @ mult_model.shock.nodes)
    assert rep.lambda2 == th
    assert rep.kappa2 == max(zbar, zbar ** (1 / (1 - th)) * (1 - th))
    assert rep.d2_residual_min >= 0.0


def test_drift_additive_d1_fails():
    model = make_preset("additive")
    grid = Grid.uniform(64, default_x_max(model))
    r = solve(model, grid, tol=1e-6)
    rep = drift_check(r, model)
    assert not rep.d1_pass
    assert rep.verdict == "fail"


def test_drift_report_json_round_trip(mult_solved, mult_model):
    import json
    doc = drift_check(mult_solved, mult_model).to_json()
    assert json.loads(json.dumps(doc)) == doc


# ------------------------------------------------------------------
# stationary estimate
# ------------------------------------------------------------------

def test_ks_distance_oracle():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert _ks_distance(a, a) == 0.0
    b = a + 100.0
    assert _ks_distance(a, b) == 1.0


def test_stationary_two_seed_sets_agree(mult_solved, mult_model):
    s1 = stationary_estimate(mult_solved, mult_model, 2, 30_000, 2_000, [1, 2])
    s2 = stationary_estimate(mult_solved, mult_model, 2, 30_000, 2_000, [7, 8])
    assert _ks_distance(
        np.interp(np.linspace(0, 1, 100), s1.ecdf, s1.ecdf_x),
        np.interp(np.linspace(0, 1, 100), s2.ecdf, s2.ecdf_x)) < 0.1
    assert s1.ks_half <= 0.05
    assert s1.p_near_zero <= 0.01


def test_stationary_degenerate_point_mass(degen_solved):
    model, r = degen_solved
    st = stationary_estimate(r, model, 2, 5_000, 1_000, [3, 4])
    assert st.ks_half == 0.0
    pooled_spread = np.ptp(
        simulate(r, model, 2.0, 5_000, 3, burn_in=1_000).sample)
    assert pooled_spread < 1e-8


def test_stationary_input_errors(mult_solved, mult_model):
    with pytest.raises(SpecError):
        stationary_estimate(mult_solved, mult_model, 2, 100, 100, [1, 2])
    with pytest.raises(SpecError):
        stationary_estimate(mult_solved, mult_model, 2, 1000, 10, [1])


# ------------------------------------------------------------------
# artifacts
# ------------------------------------------------------------------

def test_trace_and_ecdf_csv(tmp_path, mult_solved, mult_model):
    tr = simulate(mult_solved, mult_model, 2.0, 100, seed=1)
    p = tmp_path / "trace.csv"
    write_trace_csv(tr, p)
    lines = p.read_bytes().decode().strip().split("\n")
    assert lines[0] == "t,x" and len(lines) == 102
    st = stationary_estimate(mult_solved, mult_model, 2, 5_000, 100, [1, 2])
    q = tmp_path / "ecdf.csv"
    write_ecdf_csv(st, q)
    rows = q.read_bytes().decode().strip().split("\n")
    assert rows[0] == "x,cdf"
    assert float(rows[-1].split(",")[1]) == 1.0

import numpy as np
import pytest

from rsgrowth import (DiscreteShock, Grid, InfeasiblePolicyError, Policy,
                      SpecError, ValueFunction, apply_operator,
                      certainty_equivalent, default_x_max,
                      evaluate_policy_finite, make_preset, policy_values,
                      sandwich_check, solve, w_norm_distance,
                      write_solution_csv)


def small_grid(model, m=64):
    return Grid.uniform(m, default_x_max(model))


def vf(model, grid, values):
    d = model.d_bound(grid.nodes)
    return ValueFunction(grid, values, weight=model.weight,
                         cap_scale=d / (1.0 - model.modulus))


def random_concave(rng, model, grid, amp=1.0):
    slopes = np.sort(rng.exponential(size=grid.m - 1))[::-1]
    vals = amp * np.concatenate(([0.0], np.cumsum(slopes * np.diff(grid.nodes))))
    return vf(model, grid, vals + rng.uniform(0, 1))


# ------------------------------------------------------------------
# norms and containers
# ------------------------------------------------------------------

def test_w_norm_oracle(mult_model):
    g = small_grid(mult_model)
    v1 = vf(mult_model, g, np.zeros(g.m))
    vals = np.zeros(g.m)
    vals[-1] = 2.0 * float(mult_model.w(g.x_max))
    v2 = vf(mult_model, g, vals)
    assert abs(w_norm_distance(v1, v2) - 2.0) < 1e-14


def test_value_function_extension_clipped(mult_model):
    g = small_grid(mult_model)
    v = vf(mult_model, g, mult_model.u(g.nodes))
    q = 2.0 * g.x_max
    cap = v.cap_scale * float(mult_model.w(q))
    assert v.values[-1] <= v(q) <= cap


def test_policy_feasibility_checked(mult_model):
    g = small_grid(mult_model)
    with pytest.raises(InfeasiblePolicyError):
        Policy(g, g.nodes + 1.0)


# ------------------------------------------------------------------
# operator oracles
# ------------------------------------------------------------------

def test_operator_on_zero_gives_utility(mult_model):
    # with zero continuation the maximizer consumes everything
    g = small_grid(mult_model)
    lv, pol = apply_operator(vf(mult_model, g, np.zeros(g.m)), mult_model)
    assert np.allclose(lv.values, mult_model.u(g.nodes), atol=1e-12)
    assert np.allclose(pol.invest, 0.0, atol=1e-9)


def test_operator_at_origin(mult_model):
    g = small_grid(mult_model)
    v0 = vf(mult_model, g, 1.0 + mult_model.u(g.nodes))
    lv, pol = apply_operator(v0, mult_model)
    assert pol.invest[0] == 0.0
    assert abs(lv.values[0] - mult_model.beta * v0.values[0]) < 1e-14


def test_operator_preserves_class(mult_model, rng):
    g = small_grid(mult_model)
    lv, pol = apply_operator(random_concave(rng, mult_model, g, 3.0), mult_model)
    assert np.all(lv.values >= -1e-12)
    assert np.all(np.diff(lv.values) >= -1e-10)
    assert np.all(np.diff(lv.values, 2) <= 1e-9)
    assert np.all(np.diff(pol.invest) >= -1e-12)


def test_operator_is_contraction(mult_model, rng):
    g = small_grid(mult_model)
    q = mult_model.modulus
    for _ in range(5):
        v1 = random_concave(rng, mult_model, g, 2.0)
        v2 = random_concave(rng, mult_model, g, 0.7)
        lhs = w_norm_distance(apply_operator(v1, mult_model)[0],
                              apply_operator(v2, mult_model)[0])
        assert lhs <= q * w_norm_distance(v1, v2) + 1e-8


def test_operator_one_node_brute_force():
    # degenerate shock: Lv(x) = max_y u(x-y) + beta*v(f(y, zbar)); compare
    # against a dense direct maximization
    model = make_preset("multiplicative",
                        shock=DiscreteShock.degenerate(1.0))
    g = small_grid(model)
    vals = model.u(g.nodes)  # concave candidate
    v = vf(model, g, vals)
    lv, pol = apply_operator(v, model)
    for j in [5, 20, 40, 63]:
        x = g.nodes[j]
        ys = np.linspace(0.0, x, 4001)
        brute = np.max(model.u(x - ys) + model.beta * v(model.f(ys, 1.0)))
        assert lv.values[j] >= brute - 1e-6
        assert lv.values[j] <= brute + 1e-6


# ------------------------------------------------------------------
# solver
# ------------------------------------------------------------------

def test_solve_certified_residual(mult_solved):
    assert mult_solved.final_residual <= 1e-8


def test_solve_deterministic(mult_model, mult_grid, mult_solved):
    again = solve(mult_model, mult_grid, tol=1e-8)
    assert np.array_equal(again.value.values, mult_solved.value.values)
    assert np.array_equal(again.policy.invest, mult_solved.policy.invest)


def test_residual_decay_rate(mult_solved, mult_model):
    # late-iteration ratios must respect the contraction modulus
    h = mult_solved.residual_history
    ratios = h[-50:] / h[-51:-1]
    assert np.max(ratios) <= mult_model.modulus + 0.01


def test_value_below_growth_bound(mult_solved, mult_model):
    xg = mult_solved.value.grid.nodes
    cap = mult_solved.value.cap_scale * mult_model.w(xg)
    assert np.all(mult_solved.value.values <= cap + 1e-12)


def test_solve_rejects_bad_tol(mult_model, mult_grid):
    with pytest.raises(SpecError):
        solve(mult_model, mult_grid, tol=-1.0)


# ------------------------------------------------------------------
# finite-horizon policy values
# ------------------------------------------------------------------

def test_policy_value_one_period(mult_model):
    g = small_grid(mult_model)
    pol = Policy(g, 0.5 * g.nodes)
    j1 = policy_values(pol, mult_model, 1, g)
    assert np.allclose(j1, mult_model.u(0.5 * g.nodes), atol=1e-14)


def test_policy_value_two_period_oracle(mult_model):
    # independent reimplementation of the T=2 recursion
    model = mult_model
    g = small_grid(model)
    pol = Policy(g, 0.5 * g.nodes)
    j2 = policy_values(pol, model, 2, g)
    z, p = model.shock.nodes, model.shock.probs
    iv = 0.5 * g.nodes
    j1 = model.u(g.nodes - iv)
    want = np.empty(g.m)
    d = model.d_bound(g.nodes)
    g1 = ValueFunction(g, j1, weight=model.weight,
                       cap_scale=d / (1 - model.modulus))
    for j in range(g.m):
        cont = np.atleast_1d(g1(model.f(np.full_like(z, iv[j]), z)))
        want[j] = j1[j] + model.beta * certainty_equivalent(cont, p, model.gamma)
    assert np.allclose(j2, want, atol=1e-12)


def test_policy_values_monotone_in_T(mult_solved, mult_model):
    prev = None
    for T in (1, 2, 4, 8):
        jt = policy_values(mult_solved.policy, mult_model, T)
        if prev is not None:
            assert np.all(jt >= prev - 1e-12)
        prev = jt


def test_evaluate_policy_finite_scalar(mult_solved, mult_model):
    out = evaluate_policy_finite(mult_solved.policy, mult_model, 5, 2.0)
    assert np.isfinite(out) and out > 0


def test_infeasible_callable_policy(mult_model):
    g = small_grid(mult_model)
    with pytest.raises(InfeasiblePolicyError):
        policy_values(lambda x: np.asarray(x) * 2.0, mult_model, 3, g)


def test_sandwich_on_solved(mult_solved, mult_model):
    rep = sandwich_check(mult_solved, mult_model, [5, 10, 20], slack_coef=1e-6)
    assert rep.passed, (rep.lower_margin, rep.upper_margin)


# ------------------------------------------------------------------
# artifacts
# ------------------------------------------------------------------

def test_solution_csv_format(tmp_path, mult_solved):
    path = tmp_path / "solution.csv"
    write_solution_csv(mult_solved, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().strip().split("\n")
    assert lines[0] == "x,value,invest,consume"
    assert len(lines) == mult_solved.value.grid.m + 1
    x, v, i, c = map(float, lines[10].split(","))
    j = 9
    assert x == mult_solved.value.grid.nodes[j]
    assert v == mult_solved.value.values[j]
    assert abs(i + c - x) < 1e-15

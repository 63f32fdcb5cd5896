import math

import numpy as np
import pytest

from afsecrecy import oracle
from afsecrecy.network import EcgalNetwork, ScalingAssignment
from afsecrecy.oracle import (
    BudgetExceeded,
    GridSpec,
    batch_log_ratio,
    central_difference,
    curvature_sign,
    finite_diff_gradient,
    grid_search,
    raw_rate_along,
    second_derivative_sign,
    spread_in_steps,
    stationarity_residual,
    within_layer_spread,
)
from afsecrecy.rates import evaluate, log_ratio
from afsecrecy.scaling import Case, optimal_rate, solve


def diamond(N=1, **kw):
    base = dict(h_s=1.0, h_t=2.0, h_e=1.0, P_s=1.0, P=10.0, sigma2=1.0)
    base.update(kw)
    return EcgalNetwork.diamond(N=N, **base)


def two_layer(**kw):
    base = dict(L=2, N=2, h_s=1.0, h_mid=(1.0,), h_t=2.0, h_e=1.0, P_s=1.0, P=1.0, sigma2=1.0)
    base.update(kw)
    return EcgalNetwork(**base)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(steps_per_axis=7)
    with pytest.raises(ValueError):
        GridSpec(refine_rounds=-1)


def test_batch_matches_scalar_evaluation():
    net = EcgalNetwork(L=3, N=3, h_s=0.7, h_mid=(1.3, 0.4), h_t=2.2, h_e=0.9, P_s=3.0, P=0.8, sigma2=1.1)
    rng = np.random.default_rng(5)
    F = rng.uniform(0, 1, (40, 3, 3))
    betas, raw = batch_log_ratio(net, F)
    for b, r in zip(betas, raw):
        res = evaluate(net, ScalingAssignment(b))
        assert r == pytest.approx(log_ratio(res.snr_t, res.snr_e), rel=1e-11, abs=1e-15)


def test_batch_full_fractions_hit_caps():
    net = two_layer()
    betas, _ = batch_log_ratio(net, np.ones((1, 2, 2)))
    assert betas[0] ** 2 == pytest.approx(np.array([[0.5, 0.5], [0.25, 0.25]]))


def test_degenerate_tie_goes_to_zero():
    for he in (1.0, 2.0, 3.0):
        g = grid_search(two_layer(h_t=1.0, h_e=he), 2, GridSpec(16, 1, symmetric_only=False))
        assert g.rate.rate_bits == 0.0
        assert np.all(g.assignment.betas == 0.0)


def test_diamond_glb_located_within_resolution():
    net = diamond()
    g = grid_search(net, 1, GridSpec())
    glb = solve(net, 1).beta_L_glb
    step = g.beta_steps[0]
    b = g.assignment.betas[0, 0]
    assert abs(b - glb) <= step
    assert abs(b * b - glb * glb) <= (2 * glb + step) * step
    assert g.rate.rate_bits <= optimal_rate(net, 1).rate_bits + g.eps_grid


def test_axis_resolution_shrinks_each_round():
    net = diamond()
    res = [grid_search(net, 1, GridSpec(16, r)).fraction_steps[0] for r in range(4)]
    assert all(b < a / 4 for a, b in zip(res, res[1:]))


def test_refinement_never_loses_ground():
    net = two_layer(N=3, P_s=5.0)
    g = grid_search(net, 3, GridSpec(16, 4))
    assert all(b >= a for a, b in zip(g.history, g.history[1:]))
    assert g.history[-1] == g.rate.rate_bits or g.history[-1] == pytest.approx(g.rate.rate_bits, rel=1e-12)


def test_grid_is_deterministic():
    net = two_layer()
    a = grid_search(net, 2, GridSpec(12, 2, symmetric_only=False))
    b = grid_search(net, 2, GridSpec(12, 2, symmetric_only=False))
    assert a.assignment == b.assignment and a.rate == b.rate and a.eps_grid == b.eps_grid


def test_two_layer_grid_agrees_with_closed_form():
    net = two_layer()
    g = grid_search(net, 2, GridSpec())
    closed = optimal_rate(net, 2).rate_bits
    assert closed >= g.rate.rate_bits - g.eps_grid
    assert closed - g.rate.rate_bits < 1e-8


def test_per_node_search_is_symmetric():
    net = two_layer()
    g = grid_search(net, 2, GridSpec(24, 2, symmetric_only=False))
    assert np.all(within_layer_spread(g.assignment) <= np.asarray(g.beta_steps))
    assert spread_in_steps(g) <= 1.0 + 1e-9


def test_axis_cap_enforced():
    net = two_layer(N=5)
    with pytest.raises(BudgetExceeded):
        grid_search(net, 5, GridSpec(8, 0, symmetric_only=False))


def test_evaluation_budget_from_environment(monkeypatch):
    monkeypatch.setenv(oracle.EVAL_CAP_ENV, "100")
    with pytest.raises(BudgetExceeded):
        grid_search(two_layer(), 2, GridSpec(16, 0))
    monkeypatch.setenv(oracle.EVAL_CAP_ENV, "1e9")
    assert oracle.eval_cap() == 10**9


# --- finite differences -------------------------------------------------------------


def test_curvature_of_downward_parabola():
    assert curvature_sign(lambda x: -x * x, 0.7) == -1
    assert curvature_sign(lambda x: x * x, 0.7) == 1
    assert curvature_sign(lambda x: 3 * x + 1, 0.7) == 0


def test_curvature_step_underflow():
    with pytest.raises(ValueError):
        curvature_sign(lambda x: -x * x, 0.0)


def test_central_difference_flags_boundaries():
    f = lambda x: x**3
    assert not central_difference(f, 1.0).one_sided
    assert central_difference(f, 1.0).value == pytest.approx(3.0, rel=1e-8)
    assert central_difference(f, 0.0, lo=0.0, scale=1.0).one_sided
    assert central_difference(f, 1.0, hi=1.0).one_sided


def test_gradient_vanishes_at_stationary_point():
    for net, m in [(diamond(), 1), (diamond(N=3, P_s=2.0), 3), (two_layer(), 2)]:
        sol = solve(net, m)
        assert sol.last_layer_case is Case.GLB
        fd = finite_diff_gradient(net, m, list(sol.beta_per_layer), net.L)
        assert not fd.one_sided
        assert abs(fd.value) <= 1e-6
        assert stationarity_residual(net, sol).value <= 1e-6


def test_gradient_positive_at_zero():
    net = two_layer()
    b = list(solve(net, 2).beta_per_layer[:-1]) + [0.0]
    fd = finite_diff_gradient(net, 2, b, 2)
    assert fd.one_sided and fd.value > 0


def test_gradient_zero_when_hops_match():
    net = diamond(h_t=1.5, h_e=1.5)
    for b in (0.0, 0.3, 1.0, 2.0):
        assert finite_diff_gradient(net, 1, [b], 1).value == 0.0


def test_second_derivative_signs_at_stationary_point():
    net = diamond(N=2)
    glb = solve(net, 2).beta_L_glb
    assert second_derivative_sign(net, 2, [glb], 1) == -1
    flipped = net.replace(h_t=net.h_e, h_e=net.h_t)
    assert second_derivative_sign(flipped, 2, [glb], 1) == 1


def test_raw_rate_along_is_unclamped():
    net = diamond(h_t=1.0, h_e=2.0)
    assert raw_rate_along(net, 1, [0.5], 1)(0.5) < 0.0

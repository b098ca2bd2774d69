import math

import numpy as np
import pytest

from bridgestop.curves import LinearFamily, SqrtFamily
from bridgestop.freeboundary import beta_of_alpha
from bridgestop.mc import (
    McEstimate,
    StoppingRule,
    dominance_ok,
    evaluate_rule,
    optimality_scan,
    scan_csv,
    simulate_payoffs,
    verify_value,
)
from bridgestop.process import ExactStepper, ModelParams, path_normals, uniform_grid
from bridgestop.valuefn import ValueContext, value


def family(alpha, gamma_final=0.0):
    beta = beta_of_alpha(alpha)
    return ModelParams(alpha, beta, SqrtFamily(scale=beta, gamma_final=gamma_final))


BRIDGE = family(1.0)


def test_immediate_stop():
    est = evaluate_rule(BRIDGE, StoppingRule(1.0, BRIDGE.curve), 1.0, 0.0, 1000, 200, 3)
    assert est == McEstimate(mean=1.0, std_error=0.0, n_paths=1000, n_steps=200, seed=3)


def test_never_stopping_rule_collects_pinned_value():
    p = family(1.0, gamma_final=0.7)
    est = evaluate_rule(p, StoppingRule(math.inf, p.curve), 0.2, 0.0, 500, 200, 1)
    assert est.mean == 0.7
    assert est.std_error == 0.0


def test_seed_determinism_and_thread_independence():
    rule = StoppingRule(1.0, BRIDGE.curve)
    a = evaluate_rule(BRIDGE, rule, 0.0, 0.0, 5000, 200, 99, threads=1)
    b = evaluate_rule(BRIDGE, rule, 0.0, 0.0, 5000, 200, 99, threads=3)
    c = evaluate_rule(BRIDGE, rule, 0.0, 0.0, 5000, 200, 99, threads=1)
    assert a == b == c
    d = evaluate_rule(BRIDGE, rule, 0.0, 0.0, 5000, 200, 100)
    assert d.mean != a.mean


def test_single_scale_scan_matches_evaluate_rule():
    rows = optimality_scan(BRIDGE, 0.0, 0.0, [1.0], 3000, 300, 5)
    assert len(rows) == 1
    assert rows[0].estimate == evaluate_rule(BRIDGE, StoppingRule(1.0, BRIDGE.curve), 0.0, 0.0, 3000, 300, 5)
    assert rows[0].paired_se == 0.0


def test_scan_requires_optimal_scale():
    with pytest.raises(ValueError):
        optimality_scan(BRIDGE, 0.0, 0.0, [0.5, 2.0], 1000, 200, 1)


def test_size_guards():
    with pytest.raises(ValueError):
        evaluate_rule(BRIDGE, StoppingRule(1.0, BRIDGE.curve), 0.0, 0.0, 50, 200, 1)
    with pytest.raises(ValueError):
        evaluate_rule(BRIDGE, StoppingRule(1.0, BRIDGE.curve), 0.0, 0.0, 500, 20, 1)


def test_far_below_barrier_large_scale_rarely_stops():
    rows = optimality_scan(BRIDGE, -2.0, 0.0, [1.0, 5.0], 20_000, 500, 8)
    r1, r5 = rows
    assert abs(r5.estimate.mean - BRIDGE.gamma_final) <= 0.01
    assert r5.estimate.mean < r1.estimate.mean
    assert r5.diff_vs_optimal < -3 * r5.paired_se


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_moderate_dominance(alpha):
    rows = optimality_scan(family(alpha), 0.0, 0.0, [0.5, 0.75, 1.0, 1.25, 1.5], 20_000, 500, 21)
    assert dominance_ok(rows)


@pytest.mark.parametrize("scale", [0.6, 1.0, 1.4])
def test_value_dominates_every_rule(scale):
    p = family(2.0)
    est = evaluate_rule(p, StoppingRule(scale, p.curve), 0.1, 0.2, 20_000, 500, 4)
    v = value(ValueContext(2.0, p.curve), 0.1, 0.2)
    assert est.mean <= v + 3 * est.std_error


def test_payoff_bounded_by_envelope():
    grid = uniform_grid(0.0, 300)
    stepper = ExactStepper(BRIDGE, grid)
    paths = stepper.paths(0.0, path_normals(2, 0, 2000, 300))
    payoffs = simulate_payoffs(BRIDGE, [1.0], 0.0, 0.0, 2000, 300, 2)[0]
    assert np.all(payoffs <= paths.max(axis=1))
    assert np.all((payoffs >= StoppingRule(1.0, BRIDGE.curve).levels(grid).min()))


def test_refining_monitoring_grid_does_not_lose_value():
    # Subsampling fine exact paths gives exact coarse paths, so both
    # monitoring grids can be compared on the same paths.
    n_fine, n_coarse, n_paths = 4000, 1000, 20_000
    grid = uniform_grid(0.0, n_fine)
    vals = ExactStepper(BRIDGE, grid).paths(0.0, path_normals(13, 0, n_paths, n_fine))
    levels = StoppingRule(1.0, BRIDGE.curve).levels(grid)
    rows = np.arange(n_paths)

    def payoff(step):
        v, lv = vals[:, ::step], levels[::step]
        return v[rows, np.argmax(v >= lv, axis=1)]

    d = payoff(1) - payoff(n_fine // n_coarse)
    paired_se = d.std(ddof=1) / math.sqrt(n_paths)
    assert d.mean() >= -3 * paired_se


def test_verify_in_stopping_region():
    rep = verify_value(BRIDGE, 2.0, 0.5, 1000, 200, 1)
    assert rep.z_score == 0.0
    assert not rep.flagged


def test_verify_alpha_zero_closed_form():
    p = family(0.0)
    rep = verify_value(p, 0.0, 0.0, 20_000, 1000, 31)
    assert rep.analytic == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert abs(rep.analytic - rep.mc.mean) <= 3 * rep.mc.std_error + rep.bias_margin
    assert not rep.flagged


def test_verify_bridge():
    rep = verify_value(BRIDGE, -0.3, 0.25, 20_000, 1000, 32)
    assert not rep.flagged


def test_verify_rejects_mismatched_beta():
    p = ModelParams(1.0, 1.0, LinearFamily(scale=1.0))
    with pytest.raises(ValueError):
        verify_value(p, 0.0, 0.0, 1000, 200, 1)


def test_scan_csv():
    rows = optimality_scan(BRIDGE, 0.0, 0.0, [0.5, 1.0], 200, 100, 7)
    lines = scan_csv(rows).splitlines()
    assert lines[0] == "c,mean,std_error,n_paths,n_steps,seed"
    assert lines[1].startswith("0.5,") and lines[1].endswith(",200,100,7")

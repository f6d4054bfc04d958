"""Bound constants, decay checks, evolution residuals, and the volume budget."""

import math

import numpy as np
import pytest

from graphflow.errors import NotAreaDecreasingError
from graphflow.flow import EquivariantFlow
from graphflow.geometry import flat_torus
from graphflow.immersion import GraphMapField
from graphflow.verify import (TimeSeriesRecord, _time_derivative, check_H_and_theta_inequalities,
                              check_decay_bounds, check_volume_budget, compute_bound_constants,
                              residual_p_evolution)


def test_bound_constants_formulas():
    c = compute_bound_constants(min_p0=1.0, max_theta0=0.3, min_ric=1.0, sup_sigma_n=1.0)
    assert c.rho0 == 1.0
    assert c.c0 == pytest.approx(1.0 / math.sqrt(3.0))
    assert c.c1 == pytest.approx(2.0 * math.sqrt(3.0))
    assert c.eps0 == 0.25     # quarter of the Ricci minimum when nonnegative
    assert c.eps1 == 0.0
    assert c.a0 == pytest.approx(0.6)
    assert c.a0_reconstructed
    # bounds at t = 0 reproduce the initial data
    assert c.bound_p(0.0) == pytest.approx(1.0)
    assert c.bound_df2(0.0) == pytest.approx(2.0 * math.sqrt(3.0))
    assert c.bound_theta(0.0) == pytest.approx(0.3)
    # p bound is increasing toward 2, |df|^2 bound decreasing
    assert c.bound_p(5.0) > c.bound_p(1.0)
    assert c.bound_df2(5.0) < c.bound_df2(1.0)


def test_negative_ricci_uses_half_rate():
    c = compute_bound_constants(1.0, 0.1, min_ric=-2.0, sup_sigma_n=-1.0)
    assert c.eps0 == -1.0
    assert c.eps1 == 1.0
    assert c.bound_h2(1.0) == pytest.approx(c.a0 * math.exp(2.0))


def test_constants_reject_non_area_decreasing():
    with pytest.raises(NotAreaDecreasingError):
        compute_bound_constants(0.0, 0.1, 1.0, 1.0)


def _series(constants, ts, inflate=0.0):
    rows = []
    for t in ts:
        rows.append(TimeSeriesRecord(
            t=t, min_p=float(constants.bound_p(t)) - inflate,
            max_lambda=0.0, max_mu=0.0,
            max_h2=float(constants.bound_h2(t)),
            max_a2=0.0, max_theta=float(constants.bound_theta(t)),
            total_volume=1.0, image_diameter=1.0,
            bound_p=0.0, bound_df2=0.0, bound_h2=0.0))
    return rows


def test_check_decay_bounds_pass_and_fail():
    c = compute_bound_constants(1.0, 0.3, 1.0, 1.0)
    ts = [0.0, 1.0, 2.0]
    rows = _series(c, ts)
    for r in rows:
        r.max_lambda = 0.0  # max_df2 = 0 <= bound
    res = check_decay_bounds(rows, c, h_grid=0.01)
    assert res["applicable"] and res["pass"]
    bad = _series(c, ts, inflate=1.0)  # min_p far below its lower bound
    res = check_decay_bounds(bad, c, h_grid=0.01)
    assert not res["pass"]
    assert res["worst_margins"]["p"] < 0


def test_check_decay_bounds_not_applicable():
    c = compute_bound_constants(1.0, 0.3, 1.0, 1.0)
    res = check_decay_bounds([], c, h_grid=0.01, condition_a=False)
    assert res["applicable"] is False


def test_time_derivative_exact_on_quadratics():
    f = lambda t: 3.0 * t**2 - 2.0 * t + 1.0
    fp = lambda t: 6.0 * t - 2.0
    t0, dtp, dtn = 1.3, 0.07, 0.011
    val = _time_derivative(f(t0 - dtp), f(t0), f(t0 + dtn), dtp, dtn)
    assert val == pytest.approx(fp(t0), abs=1e-10)


def test_stationary_residual_is_tiny():
    n = 16
    m = flat_torus(2)
    xs = np.arange(n) * 2 * math.pi / n
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    field = GraphMapField(m, flat_torus(2, scale=0.5), (n, n), np.stack([xg, yg], -1))
    rows = residual_p_evolution([(0.0, 1.0, 1.0, field, field, field)], margin=0)
    assert rows[0]["linf"] <= 1e-10


def test_residual_p_refines_second_order():
    vals = {}
    for J, cadence in ((32, 60), (64, 240)):
        eq = EquivariantFlow(J, lambda th: 0.8 * np.sin(th))
        run = eq.run(t_end=0.25, record_every=cadence, capture_triples=True)
        rows = residual_p_evolution(eq.expand_triples(run, n_phi=8), margin=4)
        vals[J] = rows[0]["l2"]
    assert 3.0 < vals[32] / vals[64] < 5.0


def test_inequalities_hold_on_equivariant_run():
    eq = EquivariantFlow(32, lambda th: 0.8 * np.sin(th))
    run = eq.run(t_end=0.25, record_every=60, capture_triples=True)
    res = check_H_and_theta_inequalities(eq.expand_triples(run, n_phi=8), eps1=0.0, margin=4)
    assert res["pass"]
    assert res["checkpoints"]
    for cp in res["checkpoints"]:
        assert cp["worst_w_excess"] <= 1e-12  # |w|^2 <= |H|^2 pointwise


def test_volume_budget():
    assert check_volume_budget(10.0, 9.0, 1.0)["pass"]
    assert not check_volume_budget(10.0, 9.0, 2.0)["pass"]
    trivial = check_volume_budget(10.0, 10.0, 0.0)
    assert trivial["pass"] and trivial["relative_error"] == 0.0

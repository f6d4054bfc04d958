"""Discrete graph maps: derivatives, induced metric, pointwise geometry."""

import math

import numpy as np
import pytest

from graphflow.errors import ConfigurationError
from graphflow.flow import EquivariantFlow
from graphflow.geometry import flat_torus, round_sphere
from graphflow.immersion import (GraphMapField, p_gradient_check, point_geometry,
                                 theta_of, w_norm_sq)


def _torus_field(n=32, scale=0.5, perturb=0.0):
    m = flat_torus(2)
    target = flat_torus(2, scale=scale)
    xs = np.arange(n) * 2 * math.pi / n
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    f = np.stack([xg, yg], axis=-1)
    if perturb:
        f = f + perturb * np.stack([np.sin(yg), np.cos(xg)], axis=-1)
    return GraphMapField(m, target, (n, n), f)


def _constant_sphere_field(n=24):
    m = round_sphere(2)
    target = round_sphere(2)
    f = np.empty((n, n, 2))
    f[..., 0] = 1.0
    f[..., 1] = 2.0
    return GraphMapField(m, target, (n, n), f)


# -- construction ------------------------------------------------------------


def test_shape_validation():
    m = flat_torus(2)
    with pytest.raises(ConfigurationError):
        GraphMapField(m, flat_torus(2), (8,), np.zeros((8, 2)))
    with pytest.raises(ConfigurationError):
        GraphMapField(m, flat_torus(2), (8, 8), np.zeros((8, 7, 2)))


def test_noncompact_axis_rejected():
    from graphflow.geometry import WarpedSurface, builtin_warp
    cyl = WarpedSurface(builtin_warp("cosh"))  # z axis is neither periodic nor reflect
    with pytest.raises(ConfigurationError):
        GraphMapField(cyl, flat_torus(2), (8, 8), np.zeros((8, 8, 2)))


def test_axis_coords_offset_on_reflect():
    f = _constant_sphere_field(8)
    th = f.axis_coords(0)
    assert th[0] == pytest.approx(0.5 * math.pi / 8)  # offset nodes avoid the pole
    ph = f.axis_coords(1)
    assert ph[0] == 0.0


# -- derivative stencils -----------------------------------------------------


def test_identity_map_derivatives():
    f = _torus_field(16)
    df = f.df_field()
    assert np.abs(df - np.eye(2)).max() < 1e-12
    assert np.abs(f.d2f_field()).max() < 1e-12


def test_smooth_map_derivative_accuracy():
    errs = []
    for n in (32, 64):
        f = _torus_field(n, perturb=0.3)
        xs = f.coords()
        exact = np.empty(f.shape + (2, 2))
        exact[..., 0, 0] = 1.0
        exact[..., 0, 1] = -0.3 * np.sin(xs[..., 0])
        exact[..., 1, 0] = 0.3 * np.cos(xs[..., 1])
        exact[..., 1, 1] = 1.0
        errs.append(np.abs(f.df_field() - exact).max())
    assert 3.0 < errs[0] / errs[1] < 5.0  # second-order stencils


def test_laplace_beltrami_flat():
    n = 64
    f = _torus_field(n)
    u = np.sin(f.coords()[..., 0]) * np.sin(f.coords()[..., 1])
    lap = f.laplace_beltrami(u)
    # induced metric of the identity into the half-scale torus is (1 + 1/4) I
    assert np.abs(lap + 2.0 / 1.25 * u).max() < 5e-3


def test_grad_norm_sq_flat():
    n = 64
    f = _torus_field(n)
    x = f.coords()[..., 0]
    u = np.sin(x)
    expect = np.cos(x) ** 2 / 1.25
    assert np.abs(f.grad_norm_sq(u) - expect).max() < 5e-3


# -- induced metric, singular values, p --------------------------------------


def test_identity_map_singular_values():
    f = _torus_field(16, scale=0.5)
    lam, mu = f.singular_value_fields()
    assert np.abs(lam - 0.5).max() < 1e-12
    assert np.abs(mu - 0.5).max() < 1e-12
    # p = 2 (1 - 1/16) / (5/4)^2 = 1.2
    assert abs(f.min_p() - 1.2) < 1e-12


def test_volume_of_identity_graph():
    f = _torus_field(16, scale=0.5)
    # det(g) = (5/4)^2 over the (2 pi)^2 torus
    assert f.volume() == pytest.approx(1.25 * (2 * math.pi) ** 2)


def test_interior_mask():
    f = _torus_field(16)
    assert f.interior_mask(4).all()  # fully periodic: no seam
    s = _constant_sphere_field(16)
    mask = s.interior_mask(4)
    assert not mask[0].any() and not mask[-1].any()
    assert mask[8].all()


# -- pointwise geometry ------------------------------------------------------


def test_constant_map_is_totally_geodesic():
    f = _constant_sphere_field()
    pg = point_geometry(f, (12, 5))
    assert pg.a_sq < 1e-20
    assert pg.h_sq < 1e-20
    assert pg.frame.p == pytest.approx(2.0)
    # the tangency audit carries the O(h^2) error of the discrete Christoffel
    # symbols of the induced metric; it must shrink under refinement
    res_fine = point_geometry(_constant_sphere_field(48), (24, 5)).tangency_residual
    assert pg.tangency_residual < 1e-2
    assert res_fine < pg.tangency_residual / 3.0


def test_identity_map_flat_geometry():
    f = _torus_field(16, scale=0.5)
    pg = point_geometry(f, (3, 7))
    assert pg.a_sq < 1e-24
    assert pg.h_sq < 1e-24
    assert np.allclose(pg.g, 1.25 * np.eye(2))


def test_w_norm_and_theta_nonnegative():
    eq = EquivariantFlow(32, lambda th: 0.8 * np.sin(th))
    fld = eq.expand_field(eq.h, n_phi=8)
    pg = point_geometry(fld, (16, 0))
    assert pg.h_sq > 0
    assert 0.0 <= w_norm_sq(pg) <= pg.h_sq + 1e-15
    assert theta_of(pg) == pytest.approx(pg.h_sq / pg.frame.p)


def test_p_gradient_identity_converges():
    errs = []
    for n in (32, 64):
        eq = EquivariantFlow(n, lambda th: 0.8 * np.sin(th))
        fld = eq.expand_field(eq.h, n_phi=8)
        errs.append(p_gradient_check(fld, (n // 2, 0)).max())
    assert errs[1] < errs[0]
    assert errs[1] < 1e-2


def test_expanded_field_matches_reduction():
    eq = EquivariantFlow(48, lambda th: 0.8 * np.sin(th))
    fld = eq.expand_field(eq.h, n_phi=8)
    lam2, mu2 = fld.singular_value_fields()
    lam1, mu1 = eq.singular_values(eq.h)
    assert np.abs(lam2[:, 0] - lam1).max() < 1e-10
    assert np.abs(mu2[:, 0] - mu1).max() < 1e-10

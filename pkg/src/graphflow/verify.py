"""Quantitative verification: decay bounds, evolution-equation residuals, and
the mean-curvature inequalities along recorded flows.

All bound curves are closed-form, so a monitor failure localizes to the
simulation.  Residuals compare discrete time derivatives (corrected for the
tangential reparametrization of the nonparametric gauge) against the analytic
right-hand sides assembled from pointwise geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NotAreaDecreasingError
from .flow import h2_field, tangential_vector_field
from .geometry import ChartManifold, curvature_package, gauss_curvature_at, sectional
from .immersion import point_geometry, quantity_Q, quantity_R_vw, w_norm_sq


@dataclass
class BoundConstants:
    """Constants of the closed-form decay bounds.

    a0 is reconstructed as 2 * max Theta(0) (justified by p <= 2); the report
    flags this reconstruction.
    """

    rho0: float
    c0: float
    c1: float
    eps0: float
    eps1: float
    a0: float
    theta0_max: float
    a0_reconstructed: bool = True

    def bound_p(self, t):
        e = self.c0 * np.exp(self.eps0 * np.asarray(t, dtype=float))
        return 2 * e / np.sqrt(1 + e**2)

    def bound_df2(self, t):
        return self.c1 * np.exp(-self.eps0 * np.asarray(t, dtype=float))

    def bound_h2(self, t):
        return self.a0 * np.exp(2 * max(0.0, self.eps1) * np.asarray(t, dtype=float))

    def bound_theta(self, t):
        return self.theta0_max * np.exp(2 * max(0.0, self.eps1) * np.asarray(t, dtype=float))


def compute_bound_constants(min_p0: float, max_theta0: float, min_ric: float,
                            sup_sigma_n: float) -> BoundConstants:
    """Constants from the initial state and the ambient curvature extremes."""
    if min_p0 <= 0:
        raise NotAreaDecreasingError(f"initial min p = {min_p0:.3e} is not positive")
    rho0 = float(min_p0)
    c0 = rho0 / math.sqrt(4.0 - rho0**2)
    c1 = 2.0 / c0
    eps0 = 0.25 * min_ric if min_ric >= 0 else 0.5 * min_ric
    eps1 = sup_sigma_n - min_ric
    a0 = 2.0 * max_theta0
    return BoundConstants(rho0=rho0, c0=c0, c1=c1, eps0=eps0, eps1=eps1,
                          a0=a0, theta0_max=float(max_theta0))


@dataclass
class TimeSeriesRecord:
    t: float
    min_p: float
    max_lambda: float
    max_mu: float
    max_h2: float
    max_a2: float
    max_theta: float
    total_volume: float
    image_diameter: float
    bound_p: float
    bound_df2: float
    bound_h2: float
    residual_p_l2: float = float("nan")
    residual_p_linf: float = float("nan")

    @property
    def max_df2(self) -> float:
        # upper bound surrogate kept out of the CSV schema
        return self.max_lambda**2 + self.max_mu**2


# ---------------------------------------------------------------------------
# Decay bounds


def check_decay_bounds(series, constants: BoundConstants, h_grid: float,
                       condition_a: Optional[bool] = True) -> dict:
    """Margins of min p / max|df|^2 / max|H|^2 / max Theta against the bounds.

    ``series`` rows need t, min_p, max_df2, max_h2, max_theta attributes.
    """
    if not condition_a:
        return {"applicable": False,
                "reason": "curvature condition (A) not certified for this scenario"}
    tol = 1e-6 + 10 * h_grid**2
    rows = []
    ok = True
    for rec in series:
        t = rec.t
        margins = {
            "p": rec.min_p - (constants.bound_p(t) - tol),
            "df2": (constants.bound_df2(t) + tol) - rec.max_df2,
            "h2": (constants.bound_h2(t) + tol) - rec.max_h2,
            "theta": (constants.bound_theta(t) + tol) - rec.max_theta,
        }
        row_ok = all(v >= 0 for v in margins.values())
        ok = ok and row_ok
        rows.append({"t": t, "margins": margins, "pass": row_ok})
    worst = {k: min(r["margins"][k] for r in rows) for k in ("p", "df2", "h2", "theta")}
    return {"applicable": True, "pass": ok, "tol": tol, "worst_margins": worst, "rows": rows}


# ---------------------------------------------------------------------------
# Pointwise curvature inputs


def _m_curvature_inputs(m_manifold: ChartManifold, x, alpha) -> tuple[float, float, float]:
    """Ric(alpha1, alpha1), Ric(alpha2, alpha2), sigma_M(alpha1 ^ alpha2)."""
    if m_manifold.constant_curvature is not None:
        s = float(m_manifold.constant_curvature)
        r = (m_manifold.dim - 1) * s
        return r, r, s
    tensors = curvature_package(m_manifold, x)
    ric11 = float(alpha[0] @ tensors.ricci @ alpha[0])
    ric22 = float(alpha[1] @ tensors.ricci @ alpha[1])
    sig = sectional(m_manifold, x, alpha[0], alpha[1], tensors)
    return ric11, ric22, sig


def _time_derivative(prev, now, nxt, dtp, dtn):
    """Second-order derivative at the middle of three unequally spaced samples."""
    return (dtp**2 * nxt - dtn**2 * prev + (dtn**2 - dtp**2) * now) / (
        dtp * dtn * (dtp + dtn)
    )


# ---------------------------------------------------------------------------
# Evolution residual of p


def residual_p_evolution(triples: Sequence, margin: int = 4) -> list:
    """Residual norms of the evolution identity for p at each checkpoint.

    ``triples``: (t, dt_prev, dt_next, field_prev, field_now, field_next) with
    GraphMapField snapshots at three consecutive steps.  The discrete material
    derivative is corrected by the tangential advection of the nonparametric
    gauge.  Returns [{t, l2, linf, nodes}].
    """
    out = []
    for (t, dtp, dtn, f_prev, f_now, f_next) in triples:
        p_prev, p_now, p_next = (f.p_field() for f in (f_prev, f_now, f_next))
        if p_now.min() <= 0:
            raise NotAreaDecreasingError("p <= 0 inside residual evaluation")
        dpdt = _time_derivative(p_prev, p_now, p_next, dtp, dtn)
        x_field = tangential_vector_field(f_now)
        dp = f_now.grad_field(p_now)
        adv = np.einsum("...k,...k->...", x_field, dp)
        lap = f_now.laplace_beltrami(p_now)
        lhs = dpdt - adv - lap
        gradp_sq = f_now.grad_norm_sq(p_now)
        mask = f_now.interior_mask(margin)
        sigma_n_const = f_now.N.constant_curvature
        res = []
        coords = f_now.coords()
        for node in np.argwhere(mask):
            idx = tuple(node)
            pg = point_geometry(f_now, idx)
            fr = pg.frame
            p = fr.p
            axi, aeta = pg.a_xi, pg.a_eta
            s11, s22 = fr.s_diag[0], fr.s_diag[1]
            high = 2 * float(np.sum(axi[:, 2:] ** 2)) * (1 - s11) \
                + 2 * float(np.sum(aeta[:, 2:] ** 2)) * (1 - s22)
            cross = 4 * float(np.sum((axi[0] * fr.t22 + aeta[1] * fr.t11) ** 2))
            ric11, ric22, sig_m = _m_curvature_inputs(f_now.M, coords[idx], fr.alpha)
            sig_n = sigma_n_const if sigma_n_const is not None \
                else gauss_curvature_at(f_now.N, f_now.f[idx])
            q = quantity_Q(pg, ric11, ric22, sig_m, sig_n)
            rhs = 2 * p * pg.a_sq + high + (cross - gradp_sq[idx]) / (2 * p) + q
            res.append(lhs[idx] - rhs)
        res = np.array(res)
        out.append({
            "t": float(t),
            "l2": float(np.sqrt(np.mean(res**2))),
            "linf": float(np.abs(res).max()),
            "nodes": int(res.size),
        })
    return out


# ---------------------------------------------------------------------------
# Mean curvature and Theta inequalities


def check_H_and_theta_inequalities(triples: Sequence, eps1: float, margin: int = 4,
                                   delta: float = 1e-8) -> dict:
    """Slack of the differential inequalities for |H|^2 and Theta = |H|^2/p.

    Evaluated only where |H| > delta.  Also audits |w|^2 <= |H|^2 pointwise.
    Pass iff every slack >= -(1e-6 + 10 (h^2 + dt)).
    """
    checkpoints = []
    all_ok = True
    for (t, dtp, dtn, f_prev, f_now, f_next) in triples:
        h2_prev, h2_now, h2_next = (h2_field(f) for f in (f_prev, f_now, f_next))
        p_prev, p_now, p_next = (f.p_field() for f in (f_prev, f_now, f_next))
        th_prev, th_now, th_next = h2_prev / p_prev, h2_now / p_now, h2_next / p_next

        x_field = tangential_vector_field(f_now)

        def material(prev, now, nxt):
            ddt = _time_derivative(prev, now, nxt, dtp, dtn)
            adv = np.einsum("...k,...k->...", x_field, f_now.grad_field(now))
            return ddt - adv - f_now.laplace_beltrami(now)

        lhs_h = material(h2_prev, h2_now, h2_next)
        lhs_th = material(th_prev, th_now, th_next)

        hnorm = np.sqrt(np.maximum(h2_now, 0.0))
        grad_habs_sq = f_now.grad_norm_sq(hnorm)
        dth = f_now.grad_field(th_now)
        dp = f_now.grad_field(p_now)
        ginv = f_now.induced_g_inv_field()
        inner_th_p = np.einsum("...ij,...i,...j->...", ginv, dth, dp)

        h_grid = float(f_now.h.max())
        tol = 1e-6 + 10 * (h_grid**2 + max(dtp, dtn))
        mask = f_now.interior_mask(margin)
        coords = f_now.coords()
        worst_h = worst_th = np.inf
        worst_w = -np.inf
        n_eval = 0
        sigma_n_const = f_now.N.constant_curvature
        for node in np.argwhere(mask):
            idx = tuple(node)
            pg = point_geometry(f_now, idx)
            if pg.h_sq <= delta**2:
                continue
            n_eval += 1
            ric11, ric22, sig_m = _m_curvature_inputs(f_now.M, coords[idx], pg.frame.alpha)
            sig_n = sigma_n_const if sigma_n_const is not None \
                else gauss_curvature_at(f_now.N, f_now.f[idx])
            if f_now.M.constant_curvature is not None:
                ricci = (f_now.M.dim - 1) * f_now.M.constant_curvature * f_now.g_m_field()[idx]
            else:
                ricci = curvature_package(f_now.M, coords[idx]).ricci
            r_term, _, _ = quantity_R_vw(pg, ricci, sig_m, sig_n)
            rhs_h = -2 * grad_habs_sq[idx] + 2 * pg.a_sq * pg.h_sq + r_term
            worst_h = min(worst_h, rhs_h - lhs_h[idx])
            rhs_th = inner_th_p[idx] / pg.frame.p + 2 * max(0.0, eps1) * (pg.h_sq / pg.frame.p)
            worst_th = min(worst_th, rhs_th - lhs_th[idx])
            worst_w = max(worst_w, w_norm_sq(pg) - pg.h_sq)
        cp_ok = (n_eval == 0) or (worst_h >= -tol and worst_th >= -tol and worst_w <= 1e-12)
        all_ok = all_ok and cp_ok
        checkpoints.append({
            "t": float(t), "nodes": n_eval, "tol": tol,
            "worst_slack_h": None if n_eval == 0 else float(worst_h),
            "worst_slack_theta": None if n_eval == 0 else float(worst_th),
            "worst_w_excess": None if n_eval == 0 else float(worst_w),
            "pass": cp_ok,
        })
    return {"pass": all_ok, "checkpoints": checkpoints}


# ---------------------------------------------------------------------------
# Volume budget


def check_volume_budget(volume_start: float, volume_end: float, dissipation: float,
                        rel_tol: float = 0.02) -> dict:
    """|Delta volume - integral of |H|^2 dmu dt| as a relative discrepancy."""
    drop = volume_start - volume_end
    scale = max(abs(drop), abs(dissipation))
    if scale < 1e-12:  # nothing moved (stationary run): trivially balanced
        return {"volume_drop": drop, "dissipation": dissipation,
                "relative_error": 0.0, "pass": True}
    rel = abs(drop - dissipation) / scale
    return {"volume_drop": drop, "dissipation": dissipation,
            "relative_error": rel, "pass": rel <= rel_tol}

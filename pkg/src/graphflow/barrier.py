"""Barrier functions on the product M x N: m-convexity certification,
sublevel-set containment monitoring, and the image-diameter decay monitor.

m-convexity of phi at a point is the nonnegativity of the minimal trace of the
covariant Hessian over orthonormal m-frames, which equals the sum of the m
smallest generalized Hessian eigenvalues — computed exactly, no frame search.
Sublevel certification samples the region; it is an audit, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .geometry import ChartManifold


@dataclass
class BarrierFunction:
    """Scalar barrier on product chart points y = (x_M, y_N)."""

    name: str
    phi: Callable[[np.ndarray], float]
    level: float
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None  # chart second derivatives


@dataclass
class ConvexityCertificate:
    verdict: bool
    worst_point: Optional[np.ndarray]
    worst_value: float
    n_samples: int
    m: int


def _fd_grad(phi, y, h=1e-4):
    y = np.asarray(y, dtype=float)
    g = np.empty(len(y))
    for i in range(len(y)):
        e = np.zeros(len(y)); e[i] = h
        g[i] = (phi(y + e) - phi(y - e)) / (2 * h)
    return g


def _fd_hess(phi, y, h=1e-3):
    y = np.asarray(y, dtype=float)
    n = len(y)
    out = np.empty((n, n))
    f0 = phi(y)
    for i in range(n):
        ei = np.zeros(n); ei[i] = h
        out[i, i] = (phi(y + ei) - 2 * f0 + phi(y - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n); ej[j] = h
            out[i, j] = out[j, i] = (
                phi(y + ei + ej) - phi(y + ei - ej) - phi(y - ei + ej) + phi(y - ei - ej)
            ) / (4 * h**2)
    return out


def product_metric(m_manifold: ChartManifold, n_manifold: ChartManifold, y) -> np.ndarray:
    m = m_manifold.dim
    y = np.asarray(y, dtype=float)
    g = np.zeros((m + n_manifold.dim,) * 2)
    g[:m, :m] = m_manifold.metric_at(y[:m])
    g[m:, m:] = n_manifold.metric_at(y[m:])
    return g


def product_christoffels(m_manifold: ChartManifold, n_manifold: ChartManifold, y) -> np.ndarray:
    m, n = m_manifold.dim, n_manifold.dim
    y = np.asarray(y, dtype=float)
    gam = np.zeros((m + n,) * 3)
    gam[:m, :m, :m] = m_manifold.christoffels_at(y[:m])
    gam[m:, m:, m:] = n_manifold.christoffels_at(y[m:])
    return gam


def covariant_hessian(barrier: BarrierFunction, m_manifold: ChartManifold,
                      n_manifold: ChartManifold, y) -> np.ndarray:
    """D^2 phi = d^2 phi - Gamma^k d_k phi w.r.t. the product connection."""
    y = np.asarray(y, dtype=float)
    grad = barrier.grad(y) if barrier.grad is not None else _fd_grad(barrier.phi, y)
    hess = barrier.hess(y) if barrier.hess is not None else _fd_hess(barrier.phi, y)
    gam = product_christoffels(m_manifold, n_manifold, y)
    return hess - np.einsum("kij,k->ij", gam, np.asarray(grad, dtype=float))


def m_convexity_at(barrier: BarrierFunction, m_manifold: ChartManifold,
                   n_manifold: ChartManifold, y, m: int) -> float:
    """Sum of the m smallest eigenvalues of the metric Hessian of phi at y."""
    d2 = covariant_hessian(barrier, m_manifold, n_manifold, y)
    g = product_metric(m_manifold, n_manifold, y)
    ev = scipy.linalg.eigh(d2, g, eigvals_only=True)
    return float(np.sum(ev[:m]))


def brute_force_m_trace(d2: np.ndarray, g: np.ndarray, m: int, n_frames: int,
                        rng: np.random.Generator) -> float:
    """Minimum over random g-orthonormal m-frames of the Hessian trace."""
    dim = g.shape[0]
    best = np.inf
    for _ in range(n_frames):
        v = rng.standard_normal((dim, m))
        # g-orthonormalize the columns
        for k in range(m):
            for j in range(k):
                v[:, k] -= (v[:, j] @ g @ v[:, k]) * v[:, j]
            v[:, k] /= np.sqrt(v[:, k] @ g @ v[:, k])
        best = min(best, float(np.einsum("ik,ij,jk->", v, d2, v)))
    return best


def certify_convexity(barrier: BarrierFunction, m_manifold: ChartManifold,
                      n_manifold: ChartManifold, points: Sequence, m: int) -> ConvexityCertificate:
    """Audit m-convexity of phi over sample points inside the sublevel set."""
    worst_val = np.inf
    worst_pt = None
    count = 0
    for y in points:
        y = np.asarray(y, dtype=float)
        if barrier.phi(y) >= barrier.level:
            continue
        count += 1
        val = m_convexity_at(barrier, m_manifold, n_manifold, y, m)
        if val < worst_val:
            worst_val, worst_pt = val, y
    return ConvexityCertificate(
        verdict=bool(count > 0 and worst_val >= -1e-12),
        worst_point=worst_pt, worst_value=float(worst_val) if count else float("nan"),
        n_samples=count, m=m,
    )


def containment_monitor(checkpoints: Sequence, barrier: BarrierFunction) -> dict:
    """Max phi over the graph at each checkpoint, versus the level c.

    ``checkpoints``: iterable of (t, points) with product-chart point arrays.
    Requires the initial maximum to lie strictly below the level.
    """
    rows = []
    contained = True
    for i, (t, pts) in enumerate(checkpoints):
        vals = np.array([barrier.phi(np.asarray(y, dtype=float)) for y in pts])
        mx = float(vals.max())
        if i == 0 and mx >= barrier.level:
            raise ValueError(
                f"initial datum not inside the sublevel set (max phi = {mx:.6g} >= c = {barrier.level:.6g})"
            )
        ok = mx < barrier.level
        contained = contained and ok
        rows.append({"t": float(t), "max_phi": mx, "margin": barrier.level - mx, "pass": ok})
    return {"pass": contained, "level": barrier.level, "rows": rows}


def diameter_series(pairs: Sequence, eps0: Optional[float] = None,
                    slope_tol: float = 0.05) -> dict:
    """Per-checkpoint image diameter plus a log-slope decay fit.

    ``pairs``: iterable of (t, diameter).  When eps0 > 0 the fit over the final
    half of the run is compared with the predicted slope -eps0/2.
    """
    t = np.array([p[0] for p in pairs], dtype=float)
    d = np.array([p[1] for p in pairs], dtype=float)
    out: dict = {"t": t, "diameter": d}
    good = d > 0
    if eps0 is not None and eps0 > 0 and good.sum() >= 2:
        half = t >= t[good].max() / 2
        sel = good & half
        if sel.sum() >= 2:
            slope = float(np.polyfit(t[sel], np.log(d[sel]), 1)[0])
            out["log_slope"] = slope
            out["required_slope"] = -eps0 / 2 + slope_tol
            out["pass"] = slope <= -eps0 / 2 + slope_tol
    return out


# ---------------------------------------------------------------------------
# Builtin barrier catalog


def waist_tube_barrier(level: float) -> BarrierFunction:
    """phi = z^2 on a warped cylinder target: squared distance to the z = 0 circle."""

    def phi(y):
        return float(y[-1] ** 2)

    def grad(y):
        g = np.zeros(len(y)); g[-1] = 2 * y[-1]
        return g

    def hess(y):
        h = np.zeros((len(y), len(y))); h[-1, -1] = 2.0
        return h

    return BarrierFunction("squared_distance_to_waist_geodesic", phi, level, grad, hess)


def coordinate_height_barrier(level: float, coordinate: int = -1) -> BarrierFunction:
    def phi(y):
        return float(y[coordinate])

    def grad(y):
        g = np.zeros(len(y)); g[coordinate] = 1.0
        return g

    def hess(y):
        return np.zeros((len(y), len(y)))

    return BarrierFunction("coordinate_height", phi, level, grad, hess)


def squared_distance_to_point_barrier(n_manifold: ChartManifold, center,
                                      level: float, m_dim: int) -> BarrierFunction:
    """phi = chart squared distance on N to a center point (flat-chart proxy;
    exact on flat tori, a documented proxy elsewhere)."""
    center = np.asarray(center, dtype=float)

    def phi(y):
        d = np.asarray(y[m_dim:], dtype=float) - center
        for b, ax in enumerate(n_manifold.axes):
            if ax.periodic:
                d[b] = (d[b] + ax.length / 2) % ax.length - ax.length / 2
        return float(d @ d)

    return BarrierFunction("squared_distance_to_point", phi, level)


def polynomial_chart_barrier(coeffs: Sequence[float], level: float) -> BarrierFunction:
    """phi = c0 + sum_i c_{i+1} y_i + quadratic diag terms c_{n+1+i} y_i^2."""
    c = np.asarray(coeffs, dtype=float)

    def phi(y):
        y = np.asarray(y, dtype=float)
        n = len(y)
        if len(c) != 1 + 2 * n:
            raise ValueError("need 1 + 2*dim coefficients")
        return float(c[0] + c[1:n + 1] @ y + c[n + 1:] @ (y * y))

    return BarrierFunction("custom_polynomial_in_chart", phi, level)

"""Singular value decomposition of the differential and adapted frames.

For a map into a surface there are at most two nonzero singular values
lambda >= mu.  The adapted bases follow the graph construction:
e_1 = alpha_1 / sqrt(1 + lambda^2), xi = (-lambda alpha_1 + beta_1) /
sqrt(1 + lambda^2), and analogously with mu for the second direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass
class DifferentialSample:
    """df together with the metrics at the point and its image."""

    df: np.ndarray    # (m, 2): df^alpha_i = d_i f^alpha, rows indexed by M axes
    g_m: np.ndarray   # (m, m)
    g_n: np.ndarray   # (2, 2)


@dataclass
class SVDFrame:
    """Adapted frames and derived scalars at one point."""

    lam: float
    mu: float
    alpha: np.ndarray        # (m, m): rows are the g_M-orthonormal alpha_i
    beta: np.ndarray         # (2, 2): rows are the g_N-orthonormal beta_a
    e: np.ndarray            # (m, m): rows orthonormal w.r.t. induced g
    xi: np.ndarray           # (m + 2,): product-chart components
    eta: np.ndarray          # (m + 2,)
    s_diag: np.ndarray       # (m,)
    sperp_diag: np.ndarray   # (2,)
    t11: float
    t22: float
    p: float


def singular_values(sample: DifferentialSample) -> tuple[float, float]:
    """The two possibly nonzero singular values of df, largest first."""
    d = _whitened(sample)
    sv = np.linalg.svd(d, compute_uv=False)
    lam = float(sv[0]) if len(sv) > 0 else 0.0
    mu = float(sv[1]) if len(sv) > 1 else 0.0
    return lam, mu


def _whitened(sample: DifferentialSample) -> np.ndarray:
    """R_N df L_M^{-T} where L L^T = g_M and R^T R = g_N (2 x m)."""
    lm = np.linalg.cholesky(sample.g_m)
    rn = scipy.linalg.cholesky(sample.g_n, lower=False)
    dfn = rn @ sample.df.T            # (2, m) in whitened target coordinates
    return scipy.linalg.solve_triangular(lm, dfn.T, lower=True).T


def _sign_fix(vecs: np.ndarray) -> np.ndarray:
    """Flip rows so the first component of largest magnitude is positive."""
    out = vecs.copy()
    for i, v in enumerate(out):
        idx = np.argmax(np.abs(v) > 1e-13) if np.any(np.abs(v) > 1e-13) else 0
        if v[idx] < 0:
            out[i] = -v
    return out


def build_svd_frame(sample: DifferentialSample) -> SVDFrame:
    """Construct the full adapted frame at a point.

    Deterministic: numpy's SVD ordering plus a sign fix making the first
    nonzero component of each whitened right-singular vector positive.  The
    beta vectors are re-derived from df alpha_i where the singular value is
    nonzero so that df(alpha_1) = lam beta_1 holds exactly.
    """
    m = sample.df.shape[0]
    lm = np.linalg.cholesky(sample.g_m)
    rn = scipy.linalg.cholesky(sample.g_n, lower=False)
    d = _whitened(sample)                       # (2, m)
    u, sv, vt = np.linalg.svd(d, full_matrices=True)
    lam = float(sv[0]) if len(sv) > 0 else 0.0
    mu = float(sv[1]) if len(sv) > 1 else 0.0

    v = _sign_fix(vt)                           # (m, m) rows
    alpha = scipy.linalg.solve_triangular(lm, v.T, lower=True, trans="T").T

    beta = np.empty((2, 2))
    for a, s in enumerate((lam, mu)):
        if s > 1e-13:
            beta[a] = (sample.df.T @ alpha[a]) / s
        else:
            # rank-deficient direction: whitened chart axis, sign-fixed
            ua = _sign_fix(u.T)[a]
            beta[a] = np.linalg.solve(rn, ua)
    # re-orthonormalize beta against g_N (exact for clean input, guards roundoff)
    b0 = beta[0] / np.sqrt(beta[0] @ sample.g_n @ beta[0])
    b1 = beta[1] - (b0 @ sample.g_n @ beta[1]) * b0
    b1 = b1 / np.sqrt(b1 @ sample.g_n @ b1)
    beta = np.vstack([b0, b1])

    e = alpha.copy()
    e[0] = alpha[0] / np.sqrt(1.0 + lam * lam)
    if m > 1:
        e[1] = alpha[1] / np.sqrt(1.0 + mu * mu)

    xi = np.concatenate([-lam * alpha[0], beta[0]]) / np.sqrt(1.0 + lam * lam)
    if m > 1:
        eta = np.concatenate([-mu * alpha[1], beta[1]]) / np.sqrt(1.0 + mu * mu)
    else:  # pragma: no cover - dim M > 1 everywhere in this package
        eta = np.concatenate([np.zeros(m), beta[1]])

    s_diag = np.ones(m)
    s_diag[0] = (1.0 - lam * lam) / (1.0 + lam * lam)
    if m > 1:
        s_diag[1] = (1.0 - mu * mu) / (1.0 + mu * mu)
    sperp_diag = np.array([-s_diag[0], -s_diag[1] if m > 1 else -1.0])
    t11 = -2.0 * lam / (1.0 + lam * lam)
    t22 = -2.0 * mu / (1.0 + mu * mu)
    p = float(s_diag[0] + (s_diag[1] if m > 1 else 1.0))

    return SVDFrame(
        lam=lam, mu=mu, alpha=alpha, beta=beta, e=e, xi=xi, eta=eta,
        s_diag=s_diag, sperp_diag=sperp_diag, t11=t11, t22=t22, p=p,
    )


def area_decreasing_status(lam: float, mu: float) -> tuple[float, bool, float]:
    """(p, strictly area decreasing?, 2-dilation) from the singular values."""
    if mu > lam or mu < 0:
        raise ValueError("expects lam >= mu >= 0")
    p = 2.0 * (1.0 - lam * lam * mu * mu) / ((1.0 + lam * lam) * (1.0 + mu * mu))
    return p, lam * mu < 1.0, lam * mu


def singular_values_batch(g_m: np.ndarray, g_n: np.ndarray, df: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized singular values over a batch of points.

    g_m: (..., m, m), g_n: (..., 2, 2), df: (..., m, 2).
    """
    pullback = np.einsum("...ia,...ab,...jb->...ij", df, g_n, df)
    lm = np.linalg.cholesky(g_m)
    inv_lm = np.linalg.inv(lm)
    c = inv_lm @ pullback @ np.swapaxes(inv_lm, -1, -2)
    ev = np.linalg.eigvalsh(c)
    ev = np.clip(ev, 0.0, None)
    lam = np.sqrt(ev[..., -1])
    mu = np.sqrt(ev[..., -2])
    return lam, mu


def p_batch(lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return 2.0 * (1.0 - lam**2 * mu**2) / ((1.0 + lam**2) * (1.0 + mu**2))

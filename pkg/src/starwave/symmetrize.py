"""Three independent routes to the spectral weight matrix, for cross-checking.

For real lam in band p the imaginary part of the resolvent kernel is a
quadratic form in the generalized eigenfunctions with an n x n coefficient
matrix q.  This module computes q three ways:

1. closed_form_q: the explicit diagonal answer diag(c_k xi_k / |w|^2) on
   the propagating branches, zero elsewhere;
2. solve_q_leastsquares: least squares over the stacked per-(j,k) linear
   systems obtained by matching coefficients of the independent function
   families in (x, x');
3. q_direct: a dense matrix formula built from eigenfunction values at one
   anchor point per branch.

All three must agree; the agreement is a strong end-to-end consistency test
of the eigenfunction, kernel, and weight formulas.  Everything here uses
the unnormalized weights (kappa = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigenbasis import eigen_params, eval_F
from .network import BranchPoint, NetworkError, StarNetwork, band_index


class AnchorError(NetworkError):
    """Anchor frame is degenerate or ill-conditioned; re-anchor."""


@dataclass(frozen=True, eq=False)
class QMatrix:
    """An n x n spectral weight matrix at one real lam (kappa = 1 scale)."""

    lam: float
    entries: np.ndarray
    normalized: bool = False
    info: dict | None = None

    def __post_init__(self):
        self.entries.flags.writeable = False


def closed_form_q(net: StarNetwork, lam: float) -> QMatrix:
    """diag(c_k xi_k / |w|^2) on propagating branches, zero elsewhere."""
    lam = float(lam)
    p = band_index(net, lam)
    params = eigen_params(net, lam, -1)
    wabs2 = abs(params.w) ** 2
    diag = np.zeros(net.n)
    for k in range(p):
        diag[k] = net.c[k] * params.xi[k].real / wabs2
    return QMatrix(lam=lam, entries=np.diag(diag).astype(complex))


def _case_scalars(net: StarNetwork, lam: float):
    p = band_index(net, lam)
    params = eigen_params(net, lam, -1)
    inv_w = 1.0 / params.w
    im_w = inv_w.imag
    im_iw = (-1j * inv_w).imag  # Im(1/(i w))
    xi_re = params.xi.real  # valid on propagating branches
    xi_ev = (1j * params.xi).real  # valid (positive) on evanescent branches
    return p, params, inv_w, im_w, im_iw, xi_re, xi_ev


def im_kernel_cases(net: StarNetwork, lam: float, j: int, k: int, x: float, xp: float) -> float:
    """Closed-form Im[(1/w) (F^{-,j+1})_j(x) (F^{-,j})_k(x')] by band case.

    j, k are 1-based branch indices; x lives on branch j and x' on branch k.
    The case split depends only on whether j and k propagate at lam (index
    <= band count p) or are evanescent.
    """
    p, params, inv_w, im_w, im_iw, xi_re, xi_ev = _case_scalars(net, lam)
    j0, k0 = j - 1, k - 1
    if j0 >= p and k0 >= p:
        return im_w * math.exp(-xi_ev[j0] * x - xi_ev[k0] * xp)
    if j0 < p and k0 < p:
        cj, sj = math.cos(xi_re[j0] * x), math.sin(xi_re[j0] * x)
        ck, sk = math.cos(xi_re[k0] * xp), math.sin(xi_re[k0] * xp)
        re_w = inv_w.real
        if j0 != k0:
            sin_sin = im_w
        else:
            sin_sin = (params.s[k0] * inv_w).imag
        return im_w * cj * ck - sin_sin * sj * sk - re_w * cj * sk - re_w * sj * ck
    if j0 < p <= k0:
        damp = math.exp(-xi_ev[k0] * xp)
        return damp * (im_w * math.cos(xi_re[j0] * x) + im_iw * math.sin(xi_re[j0] * x))
    # k propagating, j evanescent; same sign pattern as the previous case
    damp = math.exp(-xi_ev[j0] * x)
    return damp * (im_w * math.cos(xi_re[k0] * xp) + im_iw * math.sin(xi_re[k0] * xp))


def assemble_system(net: StarNetwork, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Stack the per-(j,k) 4-row coefficient systems for the n^2 unknowns q_lm.

    Unknowns are ordered row-major: column l*n + m holds q_{l+1, m+1}.
    Redundant rows are kept on purpose; the stack is solved least-squares.
    """
    p, params, inv_w, im_w, im_iw, _, _ = _case_scalars(net, lam)
    n = net.n
    rows = []
    rhs = []
    s = params.s
    for j0 in range(n):
        not_j = [l for l in range(n) if l != j0]
        for k0 in range(n):
            not_k = [m for m in range(n) if m != k0]
            block = np.zeros((4, n, n), dtype=np.complex128)
            b = np.zeros(4, dtype=np.complex128)
            if j0 >= p and k0 >= p:
                block[0, j0, k0] = 1.0
                block[1, not_j, k0] = 1.0
                block[2, j0, not_k] = 1.0
                block[3][np.ix_(not_j, not_k)] = 1.0
                b[3] = im_w
            elif j0 < p and k0 < p:
                sj = s[j0]
                skc = np.conj(s[k0])
                block[0, :, :] = 1.0
                b[0] = im_w
                block[1][np.ix_(not_j, not_k)] = 1.0
                block[1, not_j, k0] += skc
                block[1, j0, not_k] += sj
                block[1, j0, k0] += sj * skc
                b[1] = -im_w if j0 != k0 else -(sj * inv_w).imag
                block[2][np.ix_(not_j, not_k)] = 1.0
                block[2, not_j, k0] += skc
                block[2, j0, not_k] += 1.0
                block[2, j0, k0] += skc
                b[2] = -1j * im_iw
                block[3][np.ix_(not_j, not_k)] = 1.0
                block[3, not_j, k0] += 1.0
                block[3, j0, not_k] += sj
                block[3, j0, k0] += sj
                b[3] = 1j * im_iw
            elif j0 < p <= k0:
                sj = s[j0]
                block[0, j0, k0] = 1.0
                block[1, not_j, k0] = 1.0
                block[2][np.ix_(not_j, not_k)] = 1.0
                block[2, j0, not_k] += 1.0
                b[2] = im_w
                block[3][np.ix_(not_j, not_k)] = 1.0
                block[3, j0, not_k] += sj
                b[3] = 1j * im_iw
            else:  # k0 < p <= j0
                skc = np.conj(s[k0])
                block[0, j0, k0] = 1.0
                block[1][np.ix_(not_j, not_k)] = 1.0
                block[1, not_j, k0] += 1.0
                b[1] = im_w
                block[2, j0, not_k] = 1.0
                block[3][np.ix_(not_j, not_k)] = 1.0
                block[3, not_j, k0] += skc
                b[3] = -1j * im_iw
            rows.append(block.reshape(4, n * n))
            rhs.append(b)
    return np.concatenate(rows, axis=0), np.concatenate(rhs)


def solve_q_leastsquares(net: StarNetwork, lam: float) -> QMatrix:
    """Minimum-norm least-squares solution of the stacked system.

    The returned QMatrix carries diagnostics in ``info``: the infinity-norm
    residual of the stacked system, the numerical rank (rank < n^2 is
    flagged, since the weight matrix is unique), and the gap to the closed
    form.
    """
    lam = float(lam)
    n = net.n
    mat, rhs = assemble_system(net, lam)
    sol, _, rank, _ = np.linalg.lstsq(mat, rhs, rcond=None)
    entries = sol.reshape(n, n)
    residual = float(np.max(np.abs(mat @ sol - rhs))) if rhs.size else 0.0
    gap = float(np.max(np.abs(entries - closed_form_q(net, lam).entries)))
    info = {
        "residual_inf": residual,
        "rank": int(rank),
        "rank_deficient": bool(rank < n * n),
        "gap_to_closed": gap,
    }
    return QMatrix(lam=lam, entries=entries, info=info)


@dataclass(frozen=True, eq=False)
class AnchorFrame:
    """One anchor point per branch and the matrices built from it.

    anchors[0] is always 0 (the node); columns of D are the eigenfunction
    value vectors d_j at the anchor on branch j; C is the diagonal phase
    matrix diag(i, i*alpha_2, ..., i*alpha_n).
    """

    lam: float
    anchors: tuple[float, ...]
    alphas: tuple[complex, ...]
    betas: tuple[complex, ...]
    D: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        self.D.flags.writeable = False
        self.C.flags.writeable = False

    @property
    def det(self) -> complex:
        out = 1.0 + 0.0j
        for a, b in zip(self.alphas[1:], self.betas[1:]):
            out *= b - a
        return out


def make_anchor_frame(
    net: StarNetwork,
    lam: float,
    rng: np.random.Generator | None = None,
    threshold: float = 1e-6,
    max_attempts: int = 5,
    jitter: bool = False,
) -> AnchorFrame:
    """Pick anchors x_j > 0 with |beta_j - alpha_j| above threshold.

    The base anchor is a quarter period pi/(2 xi_j) on propagating branches
    and one decay length 1/xi'_j on evanescent ones; on threshold failure
    (or with ``jitter=True`` from the start) anchors are redrawn uniformly
    from [0.5, 2] times the base, at most ``max_attempts`` times.
    """
    lam = float(lam)
    p = band_index(net, lam)
    params = eigen_params(net, lam, -1)
    if rng is None:
        rng = np.random.default_rng(0)
    n = net.n
    anchors = [0.0]
    alphas = [1.0 + 0.0j]
    betas = [1.0 + 0.0j]
    for j0 in range(1, n):
        xi = params.xi[j0]
        if j0 < p:
            base = math.pi / (2.0 * xi.real)
        else:
            base = 1.0 / (1j * xi).real
        ok = False
        for attempt in range(max_attempts):
            if attempt == 0 and not jitter:
                xj = base
            else:
                xj = base * rng.uniform(0.5, 2.0)
            alpha = complex(np.exp(-1j * xi * xj))
            z = xi * xj
            beta = complex(np.cos(z) - 1j * params.s[j0] * np.sin(z))
            if abs(beta - alpha) >= threshold:
                ok = True
                break
        if not ok:
            raise AnchorError(f"no admissible anchor found on branch {j0 + 1}")
        anchors.append(float(xj))
        alphas.append(alpha)
        betas.append(beta)
    d_mat = np.empty((n, n), dtype=np.complex128)
    for j0 in range(n):
        col = np.full(n, alphas[j0], dtype=np.complex128)
        col[j0] = betas[j0]
        d_mat[:, j0] = col
    c_mat = np.diag(1j * np.asarray(alphas, dtype=np.complex128))
    return AnchorFrame(
        lam=lam, anchors=tuple(anchors), alphas=tuple(alphas), betas=tuple(betas),
        D=d_mat, C=c_mat,
    )


def q_direct(net: StarNetwork, lam: float, frame: AnchorFrame) -> QMatrix:
    """Dense anchor-matrix formula (D^T)^(-1) Im((-i/w) C D) (conj D)^(-1)."""
    if frame.lam != float(lam):
        raise AnchorError("frame was built for a different lam")
    params = eigen_params(net, float(lam), -1)
    d_mat = frame.D
    cond = np.linalg.cond(d_mat)
    if not np.isfinite(cond) or cond > 1e10:
        raise AnchorError("anchor matrix ill-conditioned; re-anchor")
    a_mat = ((-1j / params.w) * (frame.C @ d_mat)).imag
    left = np.linalg.solve(d_mat.T, a_mat.astype(np.complex128))
    entries = np.linalg.solve(np.conj(d_mat).T, left.T).T
    return QMatrix(lam=float(lam), entries=entries, info={"cond_D": float(cond)})


def direct_eval_im_kernel(net: StarNetwork, lam: float, j: int, k: int, x: float, xp: float) -> float:
    """Oracle for im_kernel_cases: evaluate the product of eigenfunctions directly."""
    params = eigen_params(net, float(lam), -1)
    jnext = j % net.n + 1
    val = (
        eval_F(params, jnext, BranchPoint(j, x))
        * eval_F(params, j, BranchPoint(k, xp))
        / params.w
    )
    return val.imag

"""Generalized eigenfunctions of the star-network operator.

For a spectral parameter lam and branch data (c_k, a_k) the per-branch
wavenumber is xi_k = branch_sqrt((lam - a_k)/c_k) under a square-root
convention with the argument taken in [-pi, pi).  The j-th generalized
eigenfunction F^{sign,j} is cos(xi_j x) + sign*i*s_j*sin(xi_j x) on its own
branch and exp(sign*i*xi_k x) on every other branch, where the node mixing
coefficient s_j makes the weighted derivative sum at the node vanish.

These functions solve -c_k F'' + a_k F = lam F on every branch, are
continuous at the node, and satisfy the weighted Kirchhoff flux condition;
they are the basis of the resolvent kernel and the spectral transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import BandEdgeError, BranchPoint, NetworkError, StarNetwork

_NAN_C = complex(float("nan"), float("nan"))


def branch_sqrt(z):
    """Square root sqrt(r)*exp(i*phi/2) with phi = arg(z) in [-pi, pi).

    Differs from the principal square root exactly on the negative real
    axis, where it returns -i*sqrt(|z|) instead of +i*sqrt(|z|).  Accepts
    scalars or arrays.  Real-axis inputs are handled exactly (no imaginary
    rounding dust), which keeps downstream quantities exactly real where
    they should be.
    """
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    re, im = arr.real, arr.imag
    on_axis = im == 0.0  # both signed zeros: the cut side is fixed by phi in [-pi, pi)
    pos = on_axis & (re >= 0.0)
    neg = on_axis & (re < 0.0)
    gen = ~on_axis
    out[pos] = np.sqrt(re[pos])
    out[neg] = -1j * np.sqrt(-re[neg])
    if np.any(gen):
        # arg in (-pi, pi) here, so no wrap is needed off the axis
        out[gen] = np.sqrt(np.abs(arr[gen])) * np.exp(0.5j * np.angle(arr[gen]))
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


@dataclass(frozen=True)
class EigenParams:
    """Frozen eigenfunction data at one spectral parameter (or a batch).

    Attributes
    ----------
    lam : complex or ndarray
        Spectral parameter(s).
    sign : int
        +1 or -1; selects the exponential family exp(+-i xi x).
    xi : ndarray
        Wavenumbers, shape (n,) for scalar lam or (n, L) for a batch.
    s : ndarray
        Node mixing coefficients, same shape as xi; NaN where unavailable
        (xi_k = 0, i.e. lam on the branch's band edge).
    s_ok : ndarray of bool
        Availability mask for s.
    w : complex or ndarray
        Wronskian sign * i * sum_k c_k xi_k.
    """

    lam: object
    sign: int
    xi: np.ndarray
    s: np.ndarray
    s_ok: np.ndarray
    w: object

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    @property
    def xi_prime(self) -> np.ndarray:
        """i*xi; real and positive on evanescent branches."""
        return 1j * self.xi


def eigen_params(net: StarNetwork, lam, sign: int) -> EigenParams:
    """Compute xi, s, w for one spectral parameter or a 1-d batch.

    Parameters
    ----------
    net : StarNetwork
    lam : complex or 1-d real array
    sign : int
        +1 or -1.

    Returns
    -------
    EigenParams
        s_k is NaN-marked (s_ok False) wherever xi_k = 0 exactly.
    """
    if sign not in (+1, -1):
        raise NetworkError("sign must be +1 or -1")
    lam_arr = np.asarray(lam, dtype=np.complex128)
    scalar = lam_arr.ndim == 0
    lam_arr = np.atleast_1d(lam_arr)
    n = net.n
    xi = np.empty((n, lam_arr.size), dtype=np.complex128)
    for k in range(n):
        xi[k] = branch_sqrt((lam_arr - net.a[k]) / net.c[k])
    c = np.asarray(net.c)[:, None]
    cxi = c * xi
    total = cxi.sum(axis=0)
    w = sign * 1j * total
    s_ok = xi != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -(total[None, :] - cxi) / cxi
    s = np.where(s_ok, s, _NAN_C)
    if scalar:
        return EigenParams(
            lam=complex(lam_arr[0]), sign=sign, xi=xi[:, 0].copy(),
            s=s[:, 0].copy(), s_ok=s_ok[:, 0].copy(), w=complex(w[0]),
        )
    return EigenParams(lam=lam_arr, sign=sign, xi=xi, s=s, s_ok=s_ok, w=w)


def _require_s(params: EigenParams, j: int) -> complex:
    # j is a 1-based branch index; scalar-lam params only
    if params.xi.ndim != 1:
        raise NetworkError("pointwise evaluation needs scalar-lam EigenParams")
    sj = params.s[j - 1]
    if not params.s_ok[j - 1]:
        raise BandEdgeError(
            f"s_{j} unavailable: lambda sits on branch {j}'s band edge"
        )
    return complex(sj)


def eval_F_branch(params: EigenParams, j: int, branch: int, x) -> np.ndarray:
    """Component of eigenfunction j on a branch, evaluated at x (scalar/array).

    Own branch (branch == j): cos(xi_j x) + sign*i*s_j*sin(xi_j x);
    other branches: exp(sign*i*xi_branch x).  Scalar-lam params only.
    """
    x = np.asarray(x, dtype=float)
    sgn = params.sign
    if branch == j:
        sj = _require_s(params, j)
        z = params.xi[j - 1] * x
        return np.cos(z) + sgn * 1j * sj * np.sin(z)
    xk = params.xi[branch - 1]
    return np.exp(sgn * 1j * xk * x)


def eval_F_deriv_branch(params: EigenParams, j: int, branch: int, x) -> np.ndarray:
    """Exact x-derivative of eval_F_branch."""
    x = np.asarray(x, dtype=float)
    sgn = params.sign
    if branch == j:
        sj = _require_s(params, j)
        xj = params.xi[j - 1]
        z = xj * x
        return -xj * np.sin(z) + sgn * 1j * sj * xj * np.cos(z)
    xk = params.xi[branch - 1]
    return sgn * 1j * xk * np.exp(sgn * 1j * xk * x)


def eval_F(params: EigenParams, j: int, p: BranchPoint) -> complex:
    """Eigenfunction j evaluated at a single network point."""
    return complex(eval_F_branch(params, j, p.branch, p.x))


def eval_F_deriv(params: EigenParams, j: int, p: BranchPoint) -> complex:
    """Exact x-derivative of eigenfunction j at a single network point."""
    return complex(eval_F_deriv_branch(params, j, p.branch, p.x))


def eval_F_second(params: EigenParams, j: int, p: BranchPoint) -> complex:
    """Closed-form second derivative: -xi_k^2 times the function value."""
    xk = params.xi[p.branch - 1]
    return complex(-(xk * xk) * eval_F_branch(params, j, p.branch, p.x))


def bound_M(net: StarNetwork, lam: float, delta: float) -> float:
    """Explicit bound M(lam, delta) on |s_j(lam - i*eps)| for 0 < eps <= delta.

    When all potentials coincide, |s_j| is constant in lam and the bound is
    max_j (1/sqrt(c_j)) * sum_{k != j} sqrt(c_k).  Otherwise the bound is

        max_j (c_j |lam - a_j|)^(-1/2) * sum_k sqrt(c_k) ((lam-a_k)^2 + delta^2)^(1/4),

    finite for lam off the band edges.  The speed factors make the bound
    valid for non-unit c as well: |c_k xi_k(lam - i eps)| equals
    sqrt(c_k) ((lam-a_k)^2 + eps^2)^(1/4) and the denominator is bounded
    below by sqrt(c_j |lam - a_j|).
    """
    lam = float(lam)
    if delta < 0:
        raise NetworkError("delta must be >= 0")
    if all(ak == net.a[0] for ak in net.a):
        return max(
            sum(np.sqrt(net.c[k]) for k in range(net.n) if k != j)
            / np.sqrt(net.c[j])
            for j in range(net.n)
        )
    gaps = [abs(lam - ak) for ak in net.a]
    if min(gaps) == 0.0:
        raise BandEdgeError("bound_M undefined on a band edge")
    front = max(1.0 / np.sqrt(net.c[j] * gaps[j]) for j in range(net.n))
    tail = sum(
        np.sqrt(net.c[k]) * ((lam - net.a[k]) ** 2 + delta**2) ** 0.25
        for k in range(net.n)
    )
    return front * tail

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starwave import (
    BandEdgeError,
    BranchPoint,
    bound_M,
    branch_sqrt,
    eigen_params,
    eval_F,
    eval_F_branch,
    eval_F_deriv_branch,
    eval_F_second,
    reference_network,
)

NETS = [reference_network(s) for s in "ABC"]


# ---------------------------------------------------------------------------
# branch_sqrt


def test_branch_sqrt_pinned_values():
    assert branch_sqrt(-1.0) == -1j
    assert branch_sqrt(4.0) == 2.0
    assert branch_sqrt(0.0) == 0.0
    assert branch_sqrt(-4.0) == -2j


def test_branch_sqrt_real_axis_exact():
    x = np.linspace(0.0, 50.0, 1001)
    assert np.array_equal(branch_sqrt(x + 0j), np.sqrt(x) + 0j)
    neg = -x[1:]
    assert np.array_equal(branch_sqrt(neg + 0j), -1j * np.sqrt(x[1:]))


def test_branch_sqrt_square_identity_bulk():
    rng = np.random.default_rng(3)
    z = rng.normal(size=100_000) + 1j * rng.normal(size=100_000)
    z *= rng.exponential(scale=10.0, size=z.size)
    r = branch_sqrt(z)
    assert np.max(np.abs(r * r - z) / np.maximum(1.0, np.abs(z))) < 1e-15


def test_branch_sqrt_conjugation_bulk():
    # symmetry holds everywhere except the open negative real axis, where no
    # single-valued square root can satisfy it
    rng = np.random.default_rng(4)
    z = rng.normal(size=100_000) + 1j * rng.normal(size=100_000)
    keep = ~((z.imag == 0.0) & (z.real < 0.0))
    z = z[keep]
    assert np.max(np.abs(branch_sqrt(np.conj(z)) - np.conj(branch_sqrt(z)))) == 0.0


def test_branch_sqrt_cut_is_continuous_from_below():
    lower = branch_sqrt(-1.0 - 1e-300j)
    upper = branch_sqrt(-1.0 + 1e-300j)
    assert abs(lower - (-1j)) < 1e-15
    assert abs(upper - 1j) < 1e-15


@given(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e100))
@settings(max_examples=300)
def test_branch_sqrt_square_identity_hypothesis(z):
    r = branch_sqrt(z)
    assert abs(r * r - z) <= 1e-13 * max(1.0, abs(z))


@given(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e100))
@settings(max_examples=300)
def test_branch_sqrt_halfplane_hypothesis(z):
    # the range of branch_sqrt is Re > 0, plus the closed lower imaginary axis
    r = branch_sqrt(z)
    assert r.real > 0.0 or (r.real == 0.0 and r.imag <= 0.0)


# ---------------------------------------------------------------------------
# eigen_params


def test_eigen_params_fields(net_b):
    p = eigen_params(net_b, 1.0, -1)
    assert np.allclose(p.xi, [1.0, -1j * np.sqrt(2.0)])
    assert abs(p.s[0] - 1j * np.sqrt(2.0)) < 1e-15
    assert abs(p.w - (-np.sqrt(2.0) - 1j)) < 1e-15


def test_eigen_params_sign_rule(net_c):
    lam = 2.0 + 0.7j
    up = eigen_params(net_c, lam, +1)
    dn = eigen_params(net_c, lam, -1)
    # xi and s do not depend on the sign; only the exponential family flips
    assert np.array_equal(up.xi, dn.xi)
    assert abs(up.w + dn.w) < 1e-15  # w carries the sign


def test_eigen_params_edge_marks_s_nan(net_c):
    p = eigen_params(net_c, 1.0, -1)  # lam equals a_2
    assert p.s_ok[0] and p.s_ok[2]
    assert not p.s_ok[1]
    assert np.isnan(p.s[1].real)


def test_s_definition_random():
    rng = np.random.default_rng(11)
    for net in NETS:
        for _ in range(200):
            lam = complex(rng.uniform(-2, 10), rng.uniform(-1, 1))
            if lam.imag == 0.0:
                continue
            p = eigen_params(net, lam, -1)
            for j in range(net.n):
                others = sum(net.c[l] * p.xi[l] for l in range(net.n) if l != j)
                want = -others / (net.c[j] * p.xi[j])
                assert abs(p.s[j] - want) <= 1e-12 * max(1.0, abs(want))


def test_s_bounded_by_M():
    rng = np.random.default_rng(12)
    delta = 0.8
    for net in NETS:
        for _ in range(400):
            lam = rng.uniform(net.a[0] + 0.05, net.a[-1] + 6.0)
            try:
                m = bound_M(net, lam, delta)
            except BandEdgeError:
                continue
            eps = rng.uniform(1e-12, delta)
            p = eigen_params(net, lam - 1j * eps, -1)
            assert np.all(np.abs(p.s) <= m * (1.0 + 1e-9))


# ---------------------------------------------------------------------------
# eigenfunction evaluation


def test_node_values_exactly_one():
    for net in NETS:
        p = eigen_params(net, net.a[-1] + 1.7, -1)
        for j in range(1, net.n + 1):
            for k in range(1, net.n + 1):
                assert eval_F_branch(p, j, k, 0.0) == 1.0 + 0.0j


def test_ode_residual_and_flux_random():
    rng = np.random.default_rng(13)
    xs = np.linspace(0.0, 4.0, 33)
    for net in NETS:
        for _ in range(100):
            lam = complex(rng.uniform(-1, 9), rng.uniform(-1, 1))
            if abs(lam.imag) < 1e-3 and any(abs(lam.real - ak) < 1e-2 for ak in net.a):
                continue
            sign = -1 if rng.integers(2) else +1
            p = eigen_params(net, lam, sign)
            if not np.all(p.s_ok):
                continue
            j = int(rng.integers(1, net.n + 1))
            worst = 0.0
            fmax = 1.0
            for k in range(1, net.n + 1):
                F = eval_F_branch(p, j, k, xs)
                ck, ak = net.c[k - 1], net.a[k - 1]
                second = np.array([eval_F_second(p, j, BranchPoint(k, float(x))) for x in xs])
                resid = np.max(np.abs(-ck * second + (ak - lam) * F))
                worst = max(worst, resid)
                fmax = max(fmax, float(np.max(np.abs(F))))
            assert worst <= 1e-13 * max(1.0, abs(lam)) * fmax
            flux = sum(
                net.c[k - 1] * eval_F_deriv_branch(p, j, k, 0.0) for k in range(1, net.n + 1)
            )
            scale = max(1.0, sum(net.c[k] * abs(p.xi[k]) for k in range(net.n)))
            assert abs(flux) <= 1e-13 * scale


def test_derivative_matches_finite_difference(net_c):
    lam = 2.5 + 0.3j
    p = eigen_params(net_c, lam, -1)
    h = 1e-6
    for j in range(1, 4):
        for k in range(1, 4):
            for x in (0.4, 1.3):
                d = eval_F_deriv_branch(p, j, k, x)
                fd = (
                    complex(eval_F_branch(p, j, k, x + h)) - complex(eval_F_branch(p, j, k, x - h))
                ) / (2 * h)
                assert abs(d - fd) < 5e-8 * max(1.0, abs(d))


def test_second_derivative_matches_finite_difference(net_b):
    lam = 1.4
    p = eigen_params(net_b, lam, -1)
    h = 1e-4
    for j in range(1, 3):
        for k in range(1, 3):
            x = 0.9
            s2 = eval_F_second(p, j, BranchPoint(k, x))
            stencil = (
                complex(eval_F_branch(p, j, k, x - h))
                - 2 * complex(eval_F_branch(p, j, k, x))
                + complex(eval_F_branch(p, j, k, x + h))
            ) / h**2
            assert abs(s2 - stencil) < 1e-5 * max(1.0, abs(s2))


def test_eval_F_point_matches_branch(net_c):
    p = eigen_params(net_c, 3.3 - 0.2j, -1)
    got = eval_F(p, 2, BranchPoint(3, 1.25))
    arr = eval_F_branch(p, 2, 3, np.array([1.25]))
    assert got == complex(arr[0])

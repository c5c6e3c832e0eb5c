import numpy as np
import pytest

from starwave import (
    AnchorError,
    AnchorFrame,
    assemble_system,
    closed_form_q,
    direct_eval_im_kernel,
    im_kernel_cases,
    make_anchor_frame,
    q_direct,
    reference_network,
    solve_q_leastsquares,
    validate_network,
)

NETS = [reference_network(s) for s in "ABC"]


def test_closed_form_hand_values(net_a, net_c):
    q = closed_form_q(net_a, 4.0)
    assert np.allclose(q.entries, np.eye(3) / 18.0, atol=1e-15)
    qc = closed_form_q(net_c, 2.0)
    # |w|^2 = 10; branch 3 is evanescent at lam = 2 so its weight vanishes
    want = np.diag([np.sqrt(2.0) / 10.0, 2.0 * np.sqrt(0.5) / 10.0, 0.0])
    assert np.allclose(qc.entries, want, atol=1e-15)


def test_im_kernel_cases_match_direct():
    rng = np.random.default_rng(31)
    for net in NETS:
        lo, hi = net.a[0], net.a[-1] + 4.0
        for _ in range(300):
            lam = float(rng.uniform(lo + 0.05, hi))
            if any(abs(lam - ak) < 1e-3 for ak in net.a):
                continue
            j = int(rng.integers(1, net.n + 1))
            k = int(rng.integers(1, net.n + 1))
            x = float(rng.uniform(0, 3))
            xp = float(rng.uniform(0, 3))
            got = im_kernel_cases(net, lam, j, k, x, xp)
            want = direct_eval_im_kernel(net, lam, j, k, x, xp)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_im_kernel_zero_below_spectrum(net_c):
    rng = np.random.default_rng(32)
    for _ in range(100):
        lam = float(rng.uniform(-5.0, -0.1))
        j = int(rng.integers(1, 4))
        k = int(rng.integers(1, 4))
        val = im_kernel_cases(net_c, lam, j, k, float(rng.uniform(0, 2)), float(rng.uniform(0, 2)))
        assert abs(val) < 1e-14


def test_assemble_system_accepts_closed_form():
    rng = np.random.default_rng(33)
    for net in NETS:
        for _ in range(10):
            lam = float(rng.uniform(net.a[0] + 0.3, net.a[-1] + 4.0))
            if any(abs(lam - ak) < 1e-2 for ak in net.a):
                continue
            s_mat, rhs = assemble_system(net, lam)
            n = net.n
            assert s_mat.shape == (4 * n * n, n * n)
            assert rhs.shape == (4 * n * n,)
            vec = closed_form_q(net, lam).entries.reshape(-1)
            resid = np.max(np.abs(s_mat @ vec - rhs))
            assert resid < 1e-10, f"net={net.c}/{net.a} lam={lam}: {resid:.2e}"


def test_leastsquares_hand_values(net_a, net_b):
    q = solve_q_leastsquares(net_b, 1.0)
    assert np.allclose(q.entries, np.diag([1.0 / 3.0, 0.0]), atol=1e-12)
    assert q.info["residual_inf"] < 1e-12
    q4 = solve_q_leastsquares(net_a, 4.0)
    assert np.allclose(q4.entries, np.eye(3) / 18.0, atol=1e-12)


def test_leastsquares_reports_rank(net_b):
    q = solve_q_leastsquares(net_b, 1.0)
    assert "rank" in q.info and "rank_deficient" in q.info
    assert q.info["gap_to_closed"] < 1e-12


def test_q_direct_hand_value():
    net = validate_network([(1.0, 0.0), (1.0, 0.0)])
    frame = make_anchor_frame(net, 4.0)
    q = q_direct(net, 4.0, frame)
    assert np.allclose(q.entries, np.eye(2) / 8.0, atol=1e-12)


def test_q_direct_matches_closed_random():
    rng = np.random.default_rng(34)
    for net in NETS:
        for _ in range(40):
            lam = float(rng.uniform(net.a[0] + 0.2, net.a[-1] + 5.0))
            if any(abs(lam - ak) < 1e-2 for ak in net.a):
                continue
            frame = make_anchor_frame(net, lam, rng=rng, jitter=bool(rng.integers(2)))
            q = q_direct(net, lam, frame)
            gap = np.max(np.abs(q.entries - closed_form_q(net, lam).entries))
            assert gap < 1e-10, f"lam={lam}: {gap:.2e}"


def test_q_direct_jitter_invariance(net_c):
    lam = 2.7
    q1 = q_direct(net_c, lam, make_anchor_frame(net_c, lam, rng=np.random.default_rng(1), jitter=True))
    q2 = q_direct(net_c, lam, make_anchor_frame(net_c, lam, rng=np.random.default_rng(9), jitter=True))
    assert np.max(np.abs(q1.entries - q2.entries)) < 1e-10


def test_q_direct_rejects_bad_frames(net_b):
    frame = make_anchor_frame(net_b, 2.0)
    with pytest.raises(AnchorError):
        q_direct(net_b, 2.5, frame)  # lam mismatch
    bad = AnchorFrame(
        lam=2.0,
        anchors=frame.anchors,
        alphas=frame.alphas,
        betas=frame.betas,
        D=np.ones((2, 2), dtype=np.complex128),
        C=frame.C.copy(),
    )
    with pytest.raises(AnchorError):
        q_direct(net_b, 2.0, bad)


def test_three_way_agreement_random_networks():
    rng = np.random.default_rng(35)
    for _ in range(15):
        n = int(rng.integers(2, 6))
        a = np.cumsum(rng.uniform(0.4, 2.0, size=n))
        a[0] = rng.uniform(0.0, 1.0)
        a.sort()
        c = rng.uniform(0.5, 2.5, size=n)
        net = validate_network(list(zip(c, a)))
        lam = float(rng.uniform(net.a[0] + 0.3, net.a[-1] + 4.0))
        if any(abs(lam - ak) < 5e-2 for ak in net.a):
            continue
        q_ls = solve_q_leastsquares(net, lam).entries
        q_cf = closed_form_q(net, lam).entries
        q_dm = q_direct(net, lam, make_anchor_frame(net, lam, rng=rng)).entries
        assert np.max(np.abs(q_ls - q_cf)) < 1e-8
        assert np.max(np.abs(q_dm - q_cf)) < 1e-10
        off = q_cf - np.diag(np.diag(q_cf))
        assert np.max(np.abs(off)) == 0.0
        p = sum(1 for ak in net.a if ak < lam)
        assert np.all(np.diag(q_ls)[p:] < 1e-8)

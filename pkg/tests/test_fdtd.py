import math

import numpy as np
import pytest

from starwave import (
    FdtdConfig,
    NetworkError,
    NetworkFunction,
    causality_window,
    dalembert_reference,
    fdtd_energy,
    fdtd_init,
    fdtd_run,
    reference_network,
    validate_network,
)

FREE2 = validate_network([(1.0, 0.0), (1.0, 0.0)])
FREE3 = validate_network([(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)])


def _pulse(net, dx, length, center, width, velocity=False):
    m = int(length / dx) + 1
    x = np.arange(m) * dx
    g = np.exp(-(((x - center) / width) ** 2)).astype(complex)
    gp = (-2.0 * (x - center) / width**2) * np.exp(-(((x - center) / width) ** 2))
    g[0] = 0.0
    vals = [g] + [np.zeros(m, dtype=complex) for _ in range(net.n - 1)]
    u0 = NetworkFunction(dx, vals)
    if not velocity:
        return u0
    vv = np.asarray(gp, complex)
    vv[0] = 0.0
    v_vals = [vv] + [np.zeros(m, dtype=complex) for _ in range(net.n - 1)]
    return u0, NetworkFunction(dx, v_vals)


def test_validate_rejects_bad_configs():
    u0 = _pulse(FREE2, 0.01, 8.0, 4.0, 0.5)
    with pytest.raises(NetworkError):
        fdtd_init(FREE2, FdtdConfig(dx=0.01, dt=0.02, lengths=8.0, t_final=1.0), u0, None)
    with pytest.raises(NetworkError):
        fdtd_init(FREE2, FdtdConfig(dx=0.01, dt=0.005, lengths=8.0, t_final=1.0,
                                    sponge_width=0.05), u0, None)
    with pytest.raises(NetworkError):
        fdtd_init(FREE2, FdtdConfig(dx=0.01, dt=0.005, lengths=8.0, t_final=1.0,
                                    boundary="absorbing"), u0, None)
    with pytest.raises(NetworkError):
        fdtd_init(FREE2, FdtdConfig(dx=0.01, dt=0.005, lengths=8.0, t_final=1.0,
                                    node_scheme="spline"), u0, None)


def test_constant_state_is_steady():
    dx = 0.02
    m = int(6.0 / dx) + 1
    u0 = NetworkFunction(dx, [np.ones(m, complex), np.ones(m, complex)])
    cfg = FdtdConfig(dx=dx, dt=0.015, lengths=6.0, t_final=1.0, boundary="neumann")
    out = fdtd_run(FREE2, cfg, u0)
    for v in out.values:
        assert np.max(np.abs(v - 1.0)) < 1e-13


def test_node_transparent_for_two_equal_branches():
    dx = 0.005
    u0, v0 = _pulse(FREE2, dx, 10.0, 5.0, 0.5, velocity=True)
    # v0 = +g' makes a left-mover: it reaches the node at t=5 and should
    # pass onto branch 2 without reflection
    cfg = FdtdConfig(dx=dx, dt=0.9 * dx, lengths=10.0, t_final=7.0)
    out = fdtd_run(FREE2, cfg, u0, v0)
    refl = float(np.max(np.abs(out.values[0][: int(4.0 / dx)])))
    trans = float(np.max(np.abs(out.values[1])))
    assert trans > 0.95
    assert refl < 5e-3


def test_reflection_transmission_three_branches():
    dx = 0.004
    u0, v0 = _pulse(FREE3, dx, 12.0, 5.0, 0.5, velocity=True)
    cfg = FdtdConfig(dx=dx, dt=0.9 * dx, lengths=12.0, t_final=8.0)
    out = fdtd_run(FREE3, cfg, u0, v0)
    refl = out.values[0]
    trans = out.values[1]
    i_r = int(np.argmax(np.abs(refl[: int(6.0 / dx)])))
    i_t = int(np.argmax(np.abs(trans)))
    r = float(refl[i_r].real)
    t = float(trans[i_t].real)
    assert abs(r - (-1.0 / 3.0)) < 0.01 / 3.0, f"r={r}"
    assert abs(t - 2.0 / 3.0) < 0.02 / 3.0, f"t={t}"


def test_energy_conserved_standing_wave():
    # half-wave between the node and a Dirichlet end; exact mode of the
    # discrete-in-space problem up to O(dx^2), energy flat to rounding
    dx = 0.01
    length = 4.0
    m = int(length / dx) + 1
    x = np.arange(m) * dx
    mode = np.sin(math.pi * x / length)
    u0 = NetworkFunction(dx, [mode.astype(complex), -mode.astype(complex)])
    cfg = FdtdConfig(dx=dx, dt=0.5 * dx, lengths=length, t_final=10.0, boundary="dirichlet")
    energies = []
    fdtd_run(FREE2, cfg, u0, monitor=lambda s: energies.append(fdtd_energy(s, FREE2, cfg)))
    energies = np.array(energies[1:])  # first sample has no staggered pair
    drift = (energies.max() - energies.min()) / energies[0]
    assert drift < 1e-10, f"drift={drift:.2e}"


def test_monitor_called_once_per_step():
    dx = 0.05
    u0 = _pulse(FREE2, dx, 6.0, 3.0, 0.5)
    cfg = FdtdConfig(dx=dx, dt=0.02, lengths=6.0, t_final=0.2, boundary="dirichlet")
    count = []
    fdtd_run(FREE2, cfg, u0, monitor=lambda s: count.append(s.time))
    # the initialized state already sits at t = dt, so the monitor fires
    # once per completed step: at dt, 2dt, ..., t_final
    n_steps = math.ceil(0.2 / 0.02)
    assert len(count) == n_steps
    assert abs(count[0] - 0.02) < 1e-12
    assert abs(count[-1] - 0.2) < 1e-12


def test_dalembert_reference_free_line():
    dx = 0.005
    u0 = _pulse(FREE2, dx, 12.0, 6.0, 0.7)
    t = 2.5
    ref = dalembert_reference(u0, t)
    x = np.arange(int(12.0 / dx) + 1) * dx
    # glued-line data: the pulse lives on y > 0 only (branch 2 is zero)
    g = lambda y: np.where(y > 0, np.exp(-(((y - 6.0) / 0.7) ** 2)), 0.0)
    want0 = 0.5 * (g(x - t) + g(x + t))
    assert float(np.max(np.abs(ref.values[0] - want0))) < 1e-12
    with pytest.raises(NetworkError):
        dalembert_reference(
            NetworkFunction(0.1, [np.zeros(30, complex)] * 3), 1.0
        )


def test_fdtd_matches_dalembert():
    dx = 0.005
    u0 = _pulse(FREE2, dx, 12.0, 6.0, 0.7)
    cfg = FdtdConfig(dx=dx, dt=0.9 * dx, lengths=12.0, t_final=2.0)
    out = fdtd_run(FREE2, cfg, u0)
    ref = dalembert_reference(u0, 2.0)
    keep = int((12.0 - cfg.sponge_width) / dx)
    err = max(
        float(np.max(np.abs(out.values[k][:keep] - ref.values[k][:keep]))) for k in range(2)
    )
    assert err < 5e-3, f"sup error {err:.2e}"


def test_causality_window_formula():
    net = reference_network("C")
    cfg = FdtdConfig(dx=0.01, dt=0.005, lengths=16.0, t_final=1.0)
    w = causality_window(net, cfg, 8.0)
    assert abs(w - (16.0 - 3.0 - 8.0) / math.sqrt(2.0)) < 1e-12
    cfg2 = FdtdConfig(dx=0.01, dt=0.005, lengths=16.0, t_final=1.0, boundary="dirichlet")
    w2 = causality_window(net, cfg2, 8.0)
    assert abs(w2 - (16.0 - 8.0) / math.sqrt(2.0)) < 1e-12


def test_weighted1_node_scheme_runs():
    dx = 0.005
    u0, v0 = _pulse(FREE2, dx, 10.0, 5.0, 0.5, velocity=True)
    cfg = FdtdConfig(dx=dx, dt=0.9 * dx, lengths=10.0, t_final=7.0, node_scheme="weighted1")
    out = fdtd_run(FREE2, cfg, u0, v0)
    refl = float(np.max(np.abs(out.values[0][: int(4.0 / dx)])))
    assert refl < 5e-2  # first-order node recovery still nearly transparent


def test_rejects_complex_data_with_large_imag():
    dx = 0.01
    m = int(6.0 / dx) + 1
    vals = [np.full(m, 1.0 + 0.5j), np.full(m, 1.0 + 0.5j)]
    u0 = NetworkFunction(dx, vals)
    cfg = FdtdConfig(dx=dx, dt=0.005, lengths=6.0, t_final=0.1)
    with pytest.raises(NetworkError):
        fdtd_init(FREE2, cfg, u0, None)

"""Leapfrog time-domain reference solver on a truncated star network.

Independent of the spectral machinery: second-order finite differences in
space and time for u_tt = c_k u_xx - a_k u on each branch, with the node
value recovered each step from the discrete continuity + weighted flux
conditions.  Branches are truncated; a quadratic sponge layer (or plain
Dirichlet/Neumann ends) absorbs outgoing waves, and comparisons against the
semi-infinite model are only meaningful inside the causality window, i.e.
before the fastest front reaches the damped region.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .network import NetworkError, NetworkFunction, StarNetwork


@dataclass(frozen=True)
class FdtdConfig:
    """Discretization settings for the time-domain solver.

    lengths may be a scalar (shared truncation) or a per-branch tuple.
    node_scheme "onesided2" recovers the node from second-order one-sided
    derivatives; "weighted1" is the first-order speed-weighted average.
    """

    dx: float
    dt: float
    lengths: object
    t_final: float
    boundary: str = "sponge"
    sponge_width: float = 3.0
    sponge_strength: float = 5.0
    node_scheme: str = "onesided2"


@dataclass(frozen=True)
class FdtdState:
    """Two consecutive time levels; arrays are frozen."""

    time: float
    dt: float
    u_prev: tuple[np.ndarray, ...]
    u: tuple[np.ndarray, ...]

    def __post_init__(self):
        for arr in self.u_prev + self.u:
            arr.flags.writeable = False


def _lengths_tuple(net: StarNetwork, cfg: FdtdConfig) -> tuple[float, ...]:
    if np.isscalar(cfg.lengths):
        return (float(cfg.lengths),) * net.n
    ls = tuple(float(x) for x in cfg.lengths)
    if len(ls) != net.n:
        raise NetworkError("lengths count does not match branch count")
    return ls


def validate_fdtd(net: StarNetwork, cfg: FdtdConfig) -> None:
    cmax = max(net.c)
    if not cfg.dt <= 0.9 * cfg.dx / math.sqrt(cmax) + 1e-15:
        raise NetworkError("CFL violation: dt too large for dx and the speeds")
    if cfg.boundary == "sponge" and cfg.sponge_width < 10.0 * cfg.dx:
        raise NetworkError("sponge width must cover at least 10 samples")
    if cfg.boundary not in ("sponge", "dirichlet", "neumann"):
        raise NetworkError(f"unknown boundary {cfg.boundary!r}")
    if cfg.node_scheme not in ("onesided2", "weighted1"):
        raise NetworkError(f"unknown node scheme {cfg.node_scheme!r}")
    for L in _lengths_tuple(net, cfg):
        if L <= 2 * cfg.dx:
            raise NetworkError("branch too short for the stencil")


@functools.lru_cache(maxsize=16)
def _sponge_profiles(net: StarNetwork, cfg: FdtdConfig) -> tuple[np.ndarray, ...]:
    out = []
    for L in _lengths_tuple(net, cfg):
        m = int(math.floor(L / cfg.dx)) + 1
        x = np.arange(m) * cfg.dx
        sigma = np.zeros(m)
        if cfg.boundary == "sponge":
            x_start = L - cfg.sponge_width
            ramp = np.maximum(0.0, x - x_start) / cfg.sponge_width
            sigma = cfg.sponge_strength * ramp * ramp
        sigma.flags.writeable = False
        out.append(sigma)
    return tuple(out)


def _set_node(unew: list[np.ndarray], net: StarNetwork, cfg: FdtdConfig) -> None:
    csum = sum(net.c)
    if cfg.node_scheme == "onesided2":
        node = sum(net.c[k] * (4.0 * unew[k][1] - unew[k][2]) for k in range(net.n)) / (3.0 * csum)
    else:
        node = sum(net.c[k] * unew[k][1] for k in range(net.n)) / csum
    for k in range(net.n):
        unew[k][0] = node


def fdtd_init(net: StarNetwork, cfg: FdtdConfig, u0: NetworkFunction, v0: NetworkFunction | None) -> FdtdState:
    """First two time levels from initial position and velocity data."""
    validate_fdtd(net, cfg)
    lengths = _lengths_tuple(net, cfg)
    dt = cfg.dt
    prev = []
    for k in range(net.n):
        m = int(math.floor(lengths[k] / cfg.dx)) + 1
        vals = u0.values[k]
        if vals.size != m or u0.dx[k] != cfg.dx:
            raise NetworkError("u0 grid does not match the fdtd configuration")
        if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
            raise NetworkError("time-domain oracle takes real initial data")
        prev.append(vals.real.copy())
    first = []
    for k in range(net.n):
        u = prev[k]
        v = np.zeros_like(u)
        if v0 is not None:
            v = v0.values[k].real
        lap = np.zeros_like(u)
        lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (cfg.dx * cfg.dx)
        u1 = u + dt * v + 0.5 * dt * dt * (net.c[k] * lap - net.a[k] * u)
        u1[-1] = 0.0 if cfg.boundary != "neumann" else u1[-1]
        first.append(u1)
    _set_node(first, net, cfg)
    return FdtdState(time=dt, dt=dt, u_prev=tuple(prev), u=tuple(first))


def fdtd_step(state: FdtdState, net: StarNetwork, cfg: FdtdConfig) -> FdtdState:
    """One leapfrog step; returns a new state at time + dt."""
    dt = state.dt
    dx = cfg.dx
    sponges = _sponge_profiles(net, cfg)
    unew = []
    for k in range(net.n):
        u = state.u[k]
        up = state.u_prev[k]
        c, a = net.c[k], net.a[k]
        out = np.empty_like(u)
        lap = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
        rhs = 2.0 * u[1:-1] - up[1:-1] + dt * dt * (c * lap - a * u[1:-1])
        sig = sponges[k][1:-1]
        if cfg.boundary == "sponge":
            # implicit damping term -sigma * u_t keeps the update stable
            out[1:-1] = (rhs + 0.5 * dt * sig * up[1:-1]) / (1.0 + 0.5 * dt * sig)
        else:
            out[1:-1] = rhs
        if cfg.boundary == "neumann":
            lap_end = 2.0 * (u[-2] - u[-1]) / (dx * dx)
            out[-1] = 2.0 * u[-1] - up[-1] + dt * dt * (c * lap_end - a * u[-1])
        else:
            out[-1] = 0.0
        unew.append(out)
    _set_node(unew, net, cfg)
    return FdtdState(time=state.time + dt, dt=dt, u_prev=state.u, u=tuple(unew))


def fdtd_run(
    net: StarNetwork,
    cfg: FdtdConfig,
    u0: NetworkFunction,
    v0: NetworkFunction | None = None,
    monitor=None,
) -> NetworkFunction:
    """Run to t_final (dt is trimmed so an integer number of steps lands there)."""
    n_steps = max(1, math.ceil(cfg.t_final / cfg.dt - 1e-12))
    dt_eff = cfg.t_final / n_steps
    cfg_eff = FdtdConfig(
        dx=cfg.dx, dt=dt_eff, lengths=cfg.lengths, t_final=cfg.t_final,
        boundary=cfg.boundary, sponge_width=cfg.sponge_width,
        sponge_strength=cfg.sponge_strength, node_scheme=cfg.node_scheme,
    )
    state = fdtd_init(net, cfg_eff, u0, v0)
    if monitor is not None:
        monitor(state)
    for _ in range(n_steps - 1):
        state = fdtd_step(state, net, cfg_eff)
        if monitor is not None:
            monitor(state)
    vals = [state.u[k].astype(np.complex128) for k in range(net.n)]
    return NetworkFunction((cfg.dx,) * net.n, vals)


def fdtd_energy(state: FdtdState, net: StarNetwork, cfg: FdtdConfig) -> float:
    """Staggered discrete energy; constant (to node-scheme error) without damping."""
    dt = state.dt
    dx = cfg.dx
    total = 0.0
    u0 = state.u[0][0]
    up0 = state.u_prev[0][0]
    node_kin = ((u0 - up0) / dt) ** 2 / 2.0
    node_pot = u0 * up0 / 2.0
    for k in range(net.n):
        u = state.u[k]
        up = state.u_prev[k]
        vel = (u[1:] - up[1:]) / dt
        du = np.diff(u) / dx
        dup = np.diff(up) / dx
        total += dx * float(np.dot(vel, vel)) / 2.0
        total += net.c[k] * dx * float(np.dot(du, dup)) / 2.0
        total += net.a[k] * dx * float(np.dot(u[1:], up[1:])) / 2.0
        total += (dx / 2.0) * node_kin
        total += net.a[k] * (dx / 2.0) * node_pot
    return total


def causality_window(net: StarNetwork, cfg: FdtdConfig, support_radius: float) -> float:
    """Time before the fastest front from |x| <= support_radius hits the damped zone."""
    lengths = _lengths_tuple(net, cfg)
    margin = cfg.sponge_width if cfg.boundary == "sponge" else 0.0
    usable = min(lengths) - margin
    return max(0.0, (usable - support_radius) / math.sqrt(max(net.c)))


def dalembert_reference(u0: NetworkFunction, t: float, c: float = 1.0) -> NetworkFunction:
    """Closed-form free evolution for a 2-branch network with equal speeds, a=0.

    The two branches glue into a line; the solution is the half-sum of the
    initial data translated both ways at speed sqrt(c), with v0 = 0.
    """
    if u0.n != 2:
        raise NetworkError("d'Alembert reference needs exactly 2 branches")
    root_c = math.sqrt(c)
    x1 = u0.x_grid(0)
    x2 = u0.x_grid(1)
    line_x = np.concatenate([-x1[::-1], x2[1:]])
    line_g = np.concatenate([u0.values[0][::-1], u0.values[1][1:]])

    def sample(points: np.ndarray) -> np.ndarray:
        re = np.interp(points, line_x, line_g.real, left=0.0, right=0.0)
        im = np.interp(points, line_x, line_g.imag, left=0.0, right=0.0)
        return re + 1j * im

    shift = root_c * t
    out = []
    for k, xs in enumerate((x1, x2)):
        pts = -xs if k == 0 else xs
        vals = 0.5 * (sample(pts - shift) + sample(pts + shift))
        out.append(vals)
    node = 0.5 * (sample(np.array([-shift])) + sample(np.array([shift])))[0]
    out[0][0] = node
    out[1][0] = node
    return NetworkFunction(u0.dx, out)

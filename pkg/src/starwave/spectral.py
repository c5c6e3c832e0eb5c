"""Spectral representation: weights q_k, forward/inverse transforms, calculus.

The forward transform V integrates a sampled network function against the
conjugated generalized eigenfunctions; the inverse Z integrates spectral data
against the eigenfunctions with the weight q_k(lam) = kappa * c_k xi_k /
|w|^2 on lam > a_k (zero below).  Together they diagonalize the network
operator, which turns functional calculus and Klein-Gordon evolution into
multiplication in the spectral variable.

Spectral integrals use panelized Gauss-Legendre quadrature after the
substitution lam = edge + s^2 at each panel's lower edge; the substitution
removes the square-root kinks at the band edges (and the integrable
1/sqrt(lam - a) singularity of the all-equal-potential case), so bandedges
are never sampled.

kappa defaults to 1/pi.  With kappa = 1 the Plancherel ratio comes out as
pi, not 1; the default makes V an isometry (the free-line special case n=2,
c=(1,1), a=(0,0) reduces to the classical Fourier-Plancherel weight
1/(4 pi sqrt(lam))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigenbasis import eigen_params
from .network import (
    NetworkError,
    NetworkFunction,
    QuadratureRule,
    StarNetwork,
    band_index,
)

KAPPA_DEFAULT = 1.0 / math.pi

_TWO_PI = 2.0 * math.pi


def _expmat_dot(xi: np.ndarray, x: np.ndarray, g: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Rows of exp(1j * xi[:, None] * x[None, :]) dotted with g, chunked."""
    out = np.empty(xi.size, dtype=np.complex128)
    for lo in range(0, xi.size, chunk):
        hi = min(lo + chunk, xi.size)
        out[lo:hi] = np.exp(1j * np.multiply.outer(xi[lo:hi], x)) @ g
    return out


def _expmat_t_dot(xi: np.ndarray, x: np.ndarray, r: np.ndarray, chunk: int = 512) -> np.ndarray:
    """r dotted into the rows of exp(1j * xi[:, None] * x[None, :]), chunked.

    Accumulation order over chunks is fixed, so results are reproducible.
    """
    out = np.zeros(x.size, dtype=np.complex128)
    for lo in range(0, xi.size, chunk):
        hi = min(lo + chunk, xi.size)
        out += r[lo:hi] @ np.exp(1j * np.multiply.outer(xi[lo:hi], x))
    return out


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Panelized Gauss-Legendre nodes in lam over (a_1, cutoff).

    Panels run between consecutive distinct band edges (plus the cutoff);
    within each panel the nodes come from the substitution lam = lo + s^2,
    so they are strictly interior and the Jacobian 2s is folded into the
    weights.
    """

    net: StarNetwork
    cutoff: float
    breakpoints: tuple[float, ...]
    lam: np.ndarray
    weights: np.ndarray
    panel_nodes: tuple[int, ...]
    x_max: float

    def __post_init__(self):
        self.lam.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def size(self) -> int:
        return self.lam.size

    def matches(self, other: "SpectralGrid") -> bool:
        return (
            self.net == other.net
            and self.lam.size == other.lam.size
            and bool(np.array_equal(self.lam, other.lam))
        )

    @classmethod
    def build(
        cls,
        net: StarNetwork,
        cutoff: float,
        x_max: float,
        nodes_per_osc: float = 8.0,
        min_nodes: int = 16,
        panel_nodes=None,
    ) -> "SpectralGrid":
        """Construct the grid for transforms of functions supported in [0, x_max].

        Per-panel node counts resolve the fastest phase xi(lam) * x_max with
        at least ``nodes_per_osc`` nodes per oscillation (and never fewer
        than ``min_nodes``); pass ``panel_nodes`` (int or per-panel sequence)
        to pin the counts explicitly, e.g. when rebuilding a recorded grid.
        """
        cutoff = float(cutoff)
        if not cutoff > net.a[-1]:
            raise NetworkError("cutoff must exceed the largest potential")
        edges = sorted(set(net.a)) + [cutoff]
        cmin = min(net.c)
        lam_parts, w_parts, counts = [], [], []
        for i in range(len(edges) - 1):
            lo, hi = edges[i], edges[i + 1]
            if panel_nodes is None:
                dphase = (
                    x_max
                    * (math.sqrt(hi - edges[0]) - math.sqrt(lo - edges[0]))
                    / math.sqrt(cmin)
                )
                m = max(min_nodes, int(math.ceil(nodes_per_osc * dphase / _TWO_PI)))
            elif np.isscalar(panel_nodes):
                m = int(panel_nodes)
            else:
                m = int(panel_nodes[i])
            t, gw = np.polynomial.legendre.leggauss(m)
            half = math.sqrt(hi - lo) / 2.0
            s = (t + 1.0) * half
            lam_parts.append(lo + s * s)
            w_parts.append(gw * half * 2.0 * s)
            counts.append(m)
        return cls(
            net=net,
            cutoff=cutoff,
            breakpoints=tuple(edges),
            lam=np.concatenate(lam_parts),
            weights=np.concatenate(w_parts),
            panel_nodes=tuple(counts),
            x_max=float(x_max),
        )


class SpectralFunction:
    """Per-branch complex samples on a SpectralGrid; zero at nodes below a_k."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: SpectralGrid, values):
        values = np.array(values, dtype=np.complex128, copy=True)
        if values.shape != (grid.net.n, grid.lam.size):
            raise NetworkError("spectral values must have shape (n, grid size)")
        for k, ak in enumerate(grid.net.a):
            values[k, grid.lam <= ak] = 0.0
        values.flags.writeable = False
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "SpectralFunction":
        return cls(grid, np.zeros((grid.net.n, grid.lam.size)))


@dataclass(frozen=True, eq=False)
class SpectralWeights:
    """Spectral weight samples q_k(lam) on a grid, normalization included."""

    grid: SpectralGrid
    kappa: float
    q: np.ndarray

    def __post_init__(self):
        self.q.flags.writeable = False


def _q_samples(net: StarNetwork, lam: np.ndarray, kappa: float) -> np.ndarray:
    """q_k(lam) = kappa * c_k xi_k / |w|^2 above a_k, zero below; shape (n, L)."""
    params = eigen_params(net, np.asarray(lam, dtype=float), -1)
    wabs2 = np.abs(params.w) ** 2
    q = np.empty((net.n, lam.size), dtype=float)
    for k in range(net.n):
        mask = lam > net.a[k]
        q[k] = np.where(mask, kappa * net.c[k] * params.xi[k].real / wabs2, 0.0)
    return q


def spectral_weights(grid: SpectralGrid, kappa: float = KAPPA_DEFAULT) -> SpectralWeights:
    """Sample the spectral weights on a grid."""
    return SpectralWeights(grid=grid, kappa=float(kappa), q=_q_samples(grid.net, grid.lam, kappa))


def q_weights(net: StarNetwork, lam: float, kappa: float = KAPPA_DEFAULT) -> np.ndarray:
    """The n spectral weights at one real lam (off band edges)."""
    band_index(net, lam)  # validates edge avoidance
    return _q_samples(net, np.array([float(lam)]), kappa)[:, 0]


def _resolution_guard(net: StarNetwork, f: NetworkFunction, cutoff: float) -> None:
    # the transform integrands oscillate like exp(i xi_b x); require at
    # least ~2 samples within half a radian of phase at the cutoff
    for b in range(net.n):
        xi_top = math.sqrt(max(0.0, (cutoff - net.a[b]) / net.c[b]))
        if f.dx[b] * xi_top >= 0.5:
            raise NetworkError(
                "spectral cutoff unresolved: dx too coarse for the requested cutoff"
            )


def _v_samples(net: StarNetwork, f: NetworkFunction, lam: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Forward-transform samples at arbitrary off-edge nodes; shape (n, L)."""
    params = eigen_params(net, np.asarray(lam, dtype=float), -1)
    n, L = net.n, lam.size
    mom = np.empty((n, L), dtype=np.complex128)
    for b in range(n):
        g = rule.weights[b] * f.values[b]
        mom[b] = _expmat_dot(np.conj(params.xi[b]), f.x_grid(b), g)
    out = np.zeros((n, L), dtype=np.complex128)
    for k in range(n):
        idx = np.flatnonzero(lam > net.a[k])
        base = np.zeros(idx.size, dtype=np.complex128)
        for b in range(n):
            if b != k:
                base += mom[b][idx]
        xi_k = params.xi[k][idx].real  # exactly real on lam > a_k
        s_conj = np.conj(params.s[k][idx])
        g = rule.weights[k] * f.values[k]
        x = f.x_grid(k)
        plus = _expmat_dot(xi_k.astype(np.complex128), x, g)
        minus = _expmat_dot((-xi_k).astype(np.complex128), x, g)
        own = 0.5 * (1.0 + s_conj) * plus + 0.5 * (1.0 - s_conj) * minus
        out[k, idx] = base + own
    return out


def forward_V(net: StarNetwork, f: NetworkFunction, grid: SpectralGrid) -> SpectralFunction:
    """Forward spectral transform of sampled data f on a SpectralGrid.

    Component k at a node lam > a_k is the quadrature value of
    int_N f(x) conj(F^{-,k}(x)) dx; nodes at or below a_k carry zero.
    """
    if grid.net != net:
        raise NetworkError("grid was built for a different network")
    if net.n != f.n:
        raise NetworkError("network/function branch count mismatch")
    _resolution_guard(net, f, grid.cutoff)
    rule = QuadratureRule.for_function(f, "simpson")
    return SpectralFunction(grid, _v_samples(net, f, grid.lam, rule))


def inverse_Z(net: StarNetwork, G: SpectralFunction, weights: SpectralWeights, out_grid) -> NetworkFunction:
    """Inverse spectral transform onto a spatial grid.

    Parameters
    ----------
    net, G, weights :
        Network, spectral samples, and weight samples on the same grid.
    out_grid : NetworkFunction or (dx, lengths) pair
        Spatial grid of the output (a template function, or spacing(s) and
        truncation length(s)).

    Returns
    -------
    NetworkFunction
        sum_k int q_k(lam) G_k(lam) F^{-,k}(x) dlam evaluated at every
        output sample; the node value is computed once so discrete node
        continuity is exact.
    """
    grid = G.grid
    if grid.net != net:
        raise NetworkError("grid was built for a different network")
    if not weights.grid.matches(grid):
        raise NetworkError("weights/grid mismatch")
    if isinstance(out_grid, NetworkFunction):
        dxs = out_grid.dx
        sizes = [v.size for v in out_grid.values]
    else:
        dx, lengths = out_grid
        dxs = (float(dx),) * net.n if np.isscalar(dx) else tuple(float(d) for d in dx)
        lengths = (float(lengths),) * net.n if np.isscalar(lengths) else tuple(float(L) for L in lengths)
        sizes = [int(math.floor(L / d)) + 1 for L, d in zip(lengths, dxs)]
    if len(dxs) != net.n:
        raise NetworkError("out_grid branch count mismatch")

    params = eigen_params(net, grid.lam, -1)
    w_nodes = grid.weights
    qg = weights.q * G.values  # (n, L); zero below each a_k by construction
    s_all = qg.sum(axis=0)
    node = complex(np.dot(w_nodes, s_all))
    out = []
    for b in range(net.n):
        x = np.arange(sizes[b]) * dxs[b]
        r_other = w_nodes * (s_all - qg[b])
        vals = _expmat_t_dot(-params.xi[b], x, r_other)
        idx = np.flatnonzero(grid.lam > net.a[b])
        r_own = (w_nodes * qg[b])[idx]
        xi_b = params.xi[b][idx].real.astype(np.complex128)
        s_b = params.s[b][idx]
        vals += _expmat_t_dot(xi_b, x, r_own * (1.0 - s_b) / 2.0)
        vals += _expmat_t_dot(-xi_b, x, r_own * (1.0 + s_b) / 2.0)
        vals[0] = node
        out.append(vals)
    return NetworkFunction(dxs, out)


def inner_q(G: SpectralFunction, H: SpectralFunction, weights: SpectralWeights) -> complex:
    """Weighted spectral inner product sum_k int q_k G_k conj(H_k) dlam."""
    if not (G.grid.matches(H.grid) and weights.grid.matches(G.grid)):
        raise NetworkError("grid mismatch")
    w_nodes = G.grid.weights
    total = 0.0 + 0.0j
    for k in range(G.grid.net.n):
        total += complex(np.dot(w_nodes * weights.q[k], G.values[k] * np.conj(H.values[k])))
    return total


def norm_q(G: SpectralFunction, weights: SpectralWeights) -> float:
    return math.sqrt(max(0.0, inner_q(G, G, weights).real))


def apply_function(
    net: StarNetwork,
    h,
    f: NetworkFunction,
    grid: SpectralGrid | None = None,
    kappa: float = KAPPA_DEFAULT,
    eps_tail: float = 1e-5,
) -> NetworkFunction:
    """Functional calculus h(A) f = Z(M_h V f).

    ``h`` must accept a 1-d array of spectral nodes and return array values.
    When ``grid`` is omitted, a cutoff is chosen from f's spectral tail and
    the grid is built for f's spatial extent.
    """
    if grid is None:
        cutoff = choose_cutoff(net, f, eps_tail, kappa=kappa)
        grid = SpectralGrid.build(net, cutoff, x_max=max(f.lengths))
    weights = spectral_weights(grid, kappa)
    vf = forward_V(net, f, grid)
    hvals = np.asarray(h(grid.lam))
    if hvals.shape != grid.lam.shape:
        raise NetworkError("h must map the node array to an equal-length array")
    return inverse_Z(net, SpectralFunction(grid, hvals[None, :] * vf.values), weights, f)


def evolution_multipliers(lam, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Multipliers (cos(sqrt(lam) t), sin(sqrt(lam) t)/sqrt(lam)).

    The second factor is evaluated by its series t*(1 - z^2/6) for
    z = sqrt(lam)*|t| < 1e-4, which removes the 0/0 at lam = 0.
    """
    lam = np.asarray(lam, dtype=float)
    root = np.sqrt(np.maximum(lam, 0.0))
    z = root * abs(t)
    small = z < 1e-4
    cos_part = np.cos(root * t)
    safe_root = np.where(small, 1.0, root)
    sin_part = np.where(small, t * (1.0 - z * z / 6.0), np.sin(root * t) / safe_root)
    return cos_part, sin_part


def evolve_klein_gordon(
    net: StarNetwork,
    u0: NetworkFunction,
    v0: NetworkFunction | None,
    t: float,
    grid: SpectralGrid | None = None,
    kappa: float = KAPPA_DEFAULT,
    eps_tail: float = 1e-5,
) -> NetworkFunction:
    """Klein-Gordon evolution u(t) = Z[cos(sqrt(lam) t) V u0 + m(lam,t) V v0]."""
    if v0 is not None and not u0.same_grid(v0):
        raise NetworkError("u0 and v0 must share a grid")
    if grid is None:
        cutoff = choose_cutoff(net, u0, eps_tail, kappa=kappa)
        if v0 is not None:
            cutoff = max(cutoff, choose_cutoff(net, v0, eps_tail, kappa=kappa))
        grid = SpectralGrid.build(net, cutoff, x_max=max(u0.lengths))
    weights = spectral_weights(grid, kappa)
    cos_part, sin_part = evolution_multipliers(grid.lam, t)
    vals = cos_part[None, :] * forward_V(net, u0, grid).values
    if v0 is not None:
        vals = vals + sin_part[None, :] * forward_V(net, v0, grid).values
    return inverse_Z(net, SpectralFunction(grid, vals), weights, u0)


def choose_cutoff(
    net: StarNetwork,
    f: NetworkFunction,
    eps_tail: float,
    kappa: float = KAPPA_DEFAULT,
    min_probe_nodes: int = 24,
    nodes_per_osc: float = 8.0,
    max_doublings: int = 20,
) -> float:
    """Smallest probe-aligned cutoff whose spectral tail is below eps_tail.

    Probes the tail mass sum_k int_{cap}^{2 cap} q_k |Vf_k|^2 dlam over
    doubling caps cap = a_n + max(1, a_n - a_1) * 2^m and returns the first
    cap whose probe falls below eps_tail^2.
    """
    a_top = net.a[-1]
    delta0 = max(1.0, a_top - net.a[0])
    x_max = max(f.lengths)
    cmin = min(net.c)
    budget = float(eps_tail) ** 2
    rule = QuadratureRule.for_function(f, "simpson")
    for m in range(max_doublings + 1):
        cap = a_top + delta0 * 2.0**m
        _resolution_guard(net, f, 2.0 * cap)
        if math.isinf(budget):
            return cap
        dphase = x_max * (math.sqrt(2.0 * cap - net.a[0]) - math.sqrt(cap - net.a[0])) / math.sqrt(cmin)
        m_probe = max(min_probe_nodes, int(math.ceil(nodes_per_osc * dphase / _TWO_PI)))
        tnodes, gw = np.polynomial.legendre.leggauss(m_probe)
        lam_probe = cap + (tnodes + 1.0) * (cap / 2.0)
        w_probe = gw * (cap / 2.0)
        vals = _v_samples(net, f, lam_probe, rule)
        q = _q_samples(net, lam_probe, kappa)
        tail = 0.0
        for k in range(net.n):
            tail += float(np.dot(w_probe * q[k], np.abs(vals[k]) ** 2))
        if tail < budget:
            return cap
    raise NetworkError("f too rough for requested tolerance")


@dataclass(frozen=True)
class DecayReport:
    """Tail growth of the weighted spectral norm of lam^j * (V u)."""

    j: int
    window_edges: tuple[float, ...]
    tail_norms: tuple[float, ...]
    base_norm: float
    cumulative: float
    verdict: str


def domain_decay_diagnostic(
    net: StarNetwork,
    u: NetworkFunction,
    j: int,
    kappa: float = KAPPA_DEFAULT,
    n_windows: int = 8,
    min_probe_nodes: int = 24,
    nodes_per_osc: float = 8.0,
) -> DecayReport:
    """Probe whether lam^j (V u) stays square-integrable as the cutoff grows.

    Window m covers [a_n + d0*2^m, a_n + d0*2^(m+1)] with d0 = max(1,
    a_n - a_1); windows that u's grid cannot resolve are dropped (at least 3
    must survive).  Decaying window norms are consistent with u in the
    domain of the j-th operator power; non-decaying norms indicate it is
    not (e.g. a node kink violating the flux condition).
    """
    a_top = net.a[-1]
    delta0 = max(1.0, a_top - net.a[0])
    x_max = max(u.lengths)
    cmin = min(net.c)
    rule = QuadratureRule.for_function(u, "simpson")

    max_resolved = 0
    for m in range(n_windows):
        try:
            _resolution_guard(net, u, a_top + delta0 * 2.0 ** (m + 1))
        except NetworkError:
            break
        max_resolved = m + 1
    if max_resolved < 3:
        raise NetworkError("grid too coarse for a meaningful decay probe")
    windows = max_resolved

    base_cut = a_top + delta0
    base_grid = SpectralGrid.build(net, base_cut, x_max=x_max, nodes_per_osc=nodes_per_osc)
    vf = forward_V(net, u, base_grid)
    qb = spectral_weights(base_grid, kappa).q
    mult = base_grid.lam ** (2 * j)
    base_sq = 0.0
    for k in range(net.n):
        base_sq += float(np.dot(base_grid.weights * qb[k] * mult, np.abs(vf.values[k]) ** 2))

    edges = [base_cut]
    tails = []
    for m in range(windows):
        lo = a_top + delta0 * 2.0**m
        hi = a_top + delta0 * 2.0 ** (m + 1)
        edges.append(hi)
        dphase = x_max * (math.sqrt(hi - net.a[0]) - math.sqrt(lo - net.a[0])) / math.sqrt(cmin)
        m_probe = max(min_probe_nodes, int(math.ceil(nodes_per_osc * dphase / _TWO_PI)))
        tnodes, gw = np.polynomial.legendre.leggauss(m_probe)
        lam_probe = lo + (tnodes + 1.0) * ((hi - lo) / 2.0)
        w_probe = gw * ((hi - lo) / 2.0)
        vals = _v_samples(net, u, lam_probe, rule)
        q = _q_samples(net, lam_probe, kappa)
        t_sq = 0.0
        for k in range(net.n):
            t_sq += float(np.dot(w_probe * q[k] * lam_probe ** (2 * j), np.abs(vals[k]) ** 2))
        tails.append(math.sqrt(max(0.0, t_sq)))

    cumulative = math.sqrt(max(0.0, base_sq) + sum(t * t for t in tails))
    if cumulative == 0.0:
        verdict = "bounded"
    elif tails[-1] <= 1e-6 * cumulative:
        verdict = "bounded"
    elif tails[-1] < 0.5 * tails[0]:
        verdict = "bounded"
    else:
        verdict = "divergent"
    return DecayReport(
        j=j,
        window_edges=tuple(edges),
        tail_norms=tuple(tails),
        base_norm=math.sqrt(max(0.0, base_sq)),
        cumulative=cumulative,
        verdict=verdict,
    )

"""Star-shaped network geometry, sampled branch functions, and node conditions.

A star network is n >= 2 copies of the half line [0, oo) glued at one node.
Branch k carries a wave speed coefficient c_k > 0 and a constant potential
a_k >= 0.  Internally branches are stored sorted by ascending potential; the
permutation back to the caller's ordering is recorded so external branch
labels stay stable.

Functions on the network are sampled on uniform per-branch grids that share
the node sample at x = 0.  Discrete node continuity is a construction-time
invariant, not a runtime hope: constructors reject inconsistent node values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Relative half-width of the rejection window around each band edge a_k.
# The wavenumbers are non-smooth there and several downstream quantities
# are singular, so edge values are excluded everywhere.
EDGE_REJECT_REL = 1e-14

# Virtual band edge above the largest potential.  Deliberately not a finite
# float: comparisons against it must behave like "+infinity".
UNBOUNDED = math.inf


class NetworkError(ValueError):
    """Invalid network data or inconsistent sampled functions."""


class BandEdgeError(NetworkError):
    """A spectral parameter fell on (or too close to) a band edge."""


@dataclass(frozen=True)
class StarNetwork:
    """Immutable star network: branch speeds ``c`` and potentials ``a``.

    Attributes
    ----------
    c : tuple of float
        Positive speed coefficients, one per branch, in internal order.
    a : tuple of float
        Nonnegative potentials, ascending.  ``a[k-1] <= a[k]``.
    user_order : tuple of int
        ``user_order[i]`` is the 0-based position that internal branch ``i``
        occupied in the caller's original branch list.
    """

    c: tuple[float, ...]
    a: tuple[float, ...]
    user_order: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.user_order:
            object.__setattr__(self, "user_order", tuple(range(len(self.c))))
        if len(self.c) != len(self.a) or len(self.c) != len(self.user_order):
            raise NetworkError("branch field lengths disagree")
        if len(self.c) < 2:
            raise NetworkError("a star network needs at least 2 branches")
        for ck in self.c:
            if not math.isfinite(ck) or ck <= 0.0:
                raise NetworkError("nonpositive speed")
        for k, ak in enumerate(self.a):
            if not math.isfinite(ak) or ak < 0.0:
                raise NetworkError("negative potential")
            if k > 0 and ak < self.a[k - 1]:
                raise NetworkError("potentials not sorted; use validate_network")

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def band_edges(self) -> tuple[float, ...]:
        """The n finite band edges followed by the unbounded sentinel."""
        return self.a + (UNBOUNDED,)

    def internal_index(self, user_branch: int) -> int:
        """Map a caller-side 1-based branch label to the internal 0-based index."""
        pos = user_branch - 1
        if pos < 0 or pos >= self.n:
            raise NetworkError(f"branch label {user_branch} out of range 1..{self.n}")
        return self.user_order.index(pos)

    def user_label(self, internal: int) -> int:
        """Map an internal 0-based index back to the caller's 1-based label."""
        return self.user_order[internal] + 1


def validate_network(raw) -> StarNetwork:
    """Build a StarNetwork from a raw branch list.

    Parameters
    ----------
    raw : sequence
        Either mappings with keys ``"c"`` and ``"a"`` or ``(c, a)`` pairs,
        in the caller's branch order.

    Returns
    -------
    StarNetwork
        Branches sorted by ascending potential, sort permutation recorded.
    """
    branches = []
    for entry in raw:
        if isinstance(entry, dict):
            try:
                ck, ak = entry["c"], entry["a"]
            except KeyError as exc:
                raise NetworkError(f"branch entry missing key {exc}") from exc
        else:
            ck, ak = entry
        ck, ak = float(ck), float(ak)
        if not math.isfinite(ck) or not math.isfinite(ak):
            raise NetworkError("non-finite branch coefficient")
        if ck <= 0.0:
            raise NetworkError("nonpositive speed")
        if ak < 0.0:
            raise NetworkError("negative potential")
        branches.append((ck, ak))
    if len(branches) < 2:
        raise NetworkError("a star network needs at least 2 branches")
    order = sorted(range(len(branches)), key=lambda i: (branches[i][1], i))
    c = tuple(branches[i][0] for i in order)
    a = tuple(branches[i][1] for i in order)
    return StarNetwork(c=c, a=a, user_order=tuple(order))


@dataclass(frozen=True)
class BranchPoint:
    """A point on the network: 1-based branch index and distance from the node."""

    branch: int
    x: float

    def __post_init__(self):
        if self.branch < 1:
            raise NetworkError("branch index is 1-based")
        if not (self.x >= 0.0):
            raise NetworkError("x must be >= 0")


class NetworkFunction:
    """Complex samples of a function on the network, node sample shared.

    Parameters
    ----------
    dx : float or sequence of float
        Uniform grid spacing per branch (a scalar is broadcast).
    values : sequence of array_like
        Per-branch complex samples, each including the node sample at x=0.
        All node samples must be exactly equal.
    """

    __slots__ = ("dx", "values")

    def __init__(self, dx, values):
        values = tuple(np.array(v, dtype=np.complex128, copy=True) for v in values)
        if len(values) < 2:
            raise NetworkError("need at least 2 branches")
        if np.isscalar(dx):
            dx = (float(dx),) * len(values)
        else:
            dx = tuple(float(d) for d in dx)
        if len(dx) != len(values):
            raise NetworkError("dx count does not match branch count")
        for d in dx:
            if not (d > 0.0) or not math.isfinite(d):
                raise NetworkError("grid spacing must be positive and finite")
        for v in values:
            if v.ndim != 1 or v.size < 2:
                raise NetworkError("each branch needs a 1-d array of >= 2 samples")
        node = values[0][0]
        for v in values[1:]:
            if not (v[0] == node):  # exact: discrete (T0) is an invariant
                raise NetworkError("inconsistent node samples across branches")
        for v in values:
            v.flags.writeable = False
        self.dx = dx
        self.values = values

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple((v.size - 1) * d for v, d in zip(self.values, self.dx))

    @property
    def node_value(self) -> complex:
        return complex(self.values[0][0])

    def x_grid(self, k: int) -> np.ndarray:
        """Sample abscissae of internal branch k (0-based)."""
        return np.arange(self.values[k].size) * self.dx[k]

    def same_grid(self, other: "NetworkFunction") -> bool:
        return self.dx == other.dx and all(
            u.size == v.size for u, v in zip(self.values, other.values)
        )

    @classmethod
    def from_callable(cls, fns, dx, length, node_tol: float = 1e-9):
        """Sample per-branch callables on uniform grids.

        The node value is taken from the first branch and stamped onto all
        branches; the callables must agree there within ``node_tol``
        (relative to the node magnitude or 1).
        """
        nb = len(fns)
        if np.isscalar(dx):
            dx = (float(dx),) * nb
        if np.isscalar(length):
            length = (float(length),) * nb
        values = []
        for fn, d, L in zip(fns, dx, length):
            m = int(math.floor(L / d)) + 1
            x = np.arange(m) * d
            values.append(np.asarray(fn(x), dtype=np.complex128) + np.zeros(m))
        node = complex(values[0][0])
        scale = max(1.0, abs(node))
        for v in values[1:]:
            if abs(v[0] - node) > node_tol * scale:
                raise NetworkError("branch callables disagree at the node")
            v[0] = node
        return cls(dx, values)

    def map_values(self, fn) -> "NetworkFunction":
        """New NetworkFunction with fn applied to each branch array."""
        return NetworkFunction(self.dx, [fn(v) for v in self.values])

    def __add__(self, other):
        if not isinstance(other, NetworkFunction) or not self.same_grid(other):
            return NotImplemented
        return NetworkFunction(
            self.dx, [u + v for u, v in zip(self.values, other.values)]
        )

    def __sub__(self, other):
        if not isinstance(other, NetworkFunction) or not self.same_grid(other):
            return NotImplemented
        return NetworkFunction(
            self.dx, [u - v for u, v in zip(self.values, other.values)]
        )

    def __mul__(self, scalar):
        return NetworkFunction(self.dx, [v * scalar for v in self.values])

    __rmul__ = __mul__


@dataclass(frozen=True)
class QuadratureRule:
    """Per-branch quadrature weights matching a NetworkFunction's grids."""

    kind: str
    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        for w in self.weights:
            w.flags.writeable = False
            if np.any(w < 0):
                raise NetworkError("quadrature weights must be nonnegative")

    @classmethod
    def for_function(cls, f: NetworkFunction, kind: str = "simpson"):
        """Composite trapezoid or Simpson weights for f's grids.

        Simpson needs an even number of intervals; when the count is odd the
        final interval falls back to trapezoid (local order 2 at one panel).
        """
        weights = []
        for v, d in zip(f.values, f.dx):
            m = v.size
            if kind == "trapezoid":
                w = np.full(m, d)
                w[0] = w[-1] = d / 2.0
            elif kind == "simpson":
                if m < 3:
                    raise NetworkError("simpson needs >= 3 samples")
                if m % 2 == 1:
                    w = _simpson_weights(m, d)
                else:
                    w = np.zeros(m)
                    w[: m - 1] = _simpson_weights(m - 1, d)
                    w[-2] += d / 2.0
                    w[-1] += d / 2.0
            else:
                raise NetworkError(f"unknown quadrature kind {kind!r}")
            weights.append(w)
        return cls(kind=kind, weights=tuple(weights))

    def matches(self, f: NetworkFunction) -> bool:
        return len(self.weights) == f.n and all(
            w.size == v.size for w, v in zip(self.weights, f.values)
        )


def _simpson_weights(m: int, d: float) -> np.ndarray:
    # m odd: classic 1,4,2,...,4,1 pattern times d/3
    w = np.full(m, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (d / 3.0)


def integrate_network(f: NetworkFunction, g: NetworkFunction | None, rule: QuadratureRule) -> complex:
    """Hermitian inner product sum_k int f_k conj(g_k) by quadrature.

    ``g=None`` integrates f alone.  Summation order is fixed (branch-major,
    ascending sample index) so results are bit-reproducible.
    """
    if not rule.matches(f):
        raise NetworkError("rule/grid mismatch")
    if g is not None and not f.same_grid(g):
        raise NetworkError("grid mismatch between f and g")
    total = 0.0 + 0.0j
    for k in range(f.n):
        fk = f.values[k]
        integrand = fk if g is None else fk * np.conj(g.values[k])
        total += complex(np.dot(rule.weights[k], integrand))
    return total


def norm_h(f: NetworkFunction, rule: QuadratureRule | None = None) -> float:
    """L2 norm of f over the network."""
    if rule is None:
        rule = QuadratureRule.for_function(f, "trapezoid")
    return math.sqrt(max(0.0, integrate_network(f, f, rule).real))


def transmission_residual(f: NetworkFunction, net: StarNetwork) -> tuple[float, float]:
    """Diagnostic node-condition residuals (t0, t1).

    t0 is the worst pairwise node-value discrepancy; t1 is |sum_k c_k D_k|
    with D_k the one-sided second-order finite-difference derivative at the
    node.  Both vanish (to truncation error) for admissible functions.
    """
    if net.n != f.n:
        raise NetworkError("network/function branch count mismatch")
    node_vals = [v[0] for v in f.values]
    t0 = 0.0
    for i in range(len(node_vals)):
        for j in range(i + 1, len(node_vals)):
            t0 = max(t0, abs(node_vals[i] - node_vals[j]))
    flux = 0.0 + 0.0j
    for k in range(f.n):
        v = f.values[k]
        if v.size < 3:
            raise NetworkError("need at least 3 samples per branch")
        deriv = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * f.dx[k])
        flux += net.c[k] * deriv
    return t0, abs(flux)


def band_index(net: StarNetwork, lam: float) -> int:
    """Index p of the spectral band (a_p, a_{p+1}) containing lam; p=0 below a_1.

    Band edges are rejected within 1e-14 * max(1, |lam|): every downstream
    formula assumes lam is strictly inside a band.
    """
    lam = float(lam)
    window = EDGE_REJECT_REL * max(1.0, abs(lam))
    for ak in net.a:
        if abs(lam - ak) <= window:
            raise BandEdgeError(f"lambda={lam} is on a band edge")
    return sum(1 for ak in net.a if ak < lam)


def reference_network(name: str) -> StarNetwork:
    """Named example networks used throughout the docs and tests."""
    table = {
        "A": [(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)],
        "B": [(1.0, 0.0), (1.0, 3.0)],
        "C": [(1.0, 0.0), (2.0, 1.0), (1.0, 4.0)],
    }
    try:
        return validate_network(table[name.upper()])
    except KeyError:
        raise NetworkError(f"unknown reference network {name!r}") from None

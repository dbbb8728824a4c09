"""Real orthonormal spherical harmonics on S^{d-1} for arbitrary d >= 2.

The basis follows the classical hyperspherical chain construction: each
harmonic of degree k is indexed by a multi-index

    k = k_1 >= k_2 >= ... >= k_{d-2} >= |k_{d-1}|        (last entry signed)

and factorizes into associated Gegenbauer functions of the polar angles
times a cosine/sine factor in the azimuth.  Evaluation never touches the
angular form.  Every factor is rewritten in its Cartesian "solid" form

    G_n^{(a)}(x, rho) = R^n C_n^{(a)}(x / R),    rho = R^2,

which is a polynomial in x and rho, so values and first derivatives stay
well defined at the coordinate poles (no 0/0 sine factors anywhere).  The
degree-k harmonic extends to the homogeneous harmonic polynomial
P(x) = |x|^k Y(x/|x|), and the surface gradient is recovered from the
ambient gradient through grad_S Y = grad P(xi) - k Y(xi) xi.

Ordering and sign conventions (fixed but arbitrary): degrees ascend;
within a degree the unsigned chain entries enumerate in ascending
lexicographic order and the signed azimuthal entry in the order
0, +1, -1, +2, -2, ...; a nonnegative last entry selects the cosine
azimuth factor, a negative one the sine factor.  Only convention-free
quantities (potentials, gradients, energies) are comparable against other
spherical-harmonic libraries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import roots_jacobi

#: Degree/dimension caps for enumeration and quadrature construction.  The
#: closed forms stay finite far beyond this, but factorial growth in node
#: counts and polynomial degree makes larger requests a different project.
MAX_DEGREE = 32
MAX_DIM = 8

#: Hard ceiling on quadrature nodes; beyond this the tensor-product rule
#: does not fit a desktop-scale run and the constructor refuses.
_NODE_BUDGET = 4_000_000

_UNIT_TOL = 1e-10


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")


def surface_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2)."""
    _check_dim(d)
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def harmonic_space_dim(k: int, d: int) -> int:
    """Number of linearly independent degree-k harmonics on S^{d-1}.

    Exact integer arithmetic: (2k + d - 2) (k + d - 3)! / (k! (d - 2)!) for
    k >= 1 and 1 for k = 0.  Python integers cannot wrap around, so the
    result is exact for any size; a non-integer quotient would indicate a
    broken formula and raises.
    """
    _check_dim(d)
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"degree must be an integer >= 0, got {k!r}")
    if k == 0:
        return 1
    num = (2 * k + d - 2) * math.factorial(k + d - 3)
    den = math.factorial(k) * math.factorial(d - 2)
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError(f"harmonic count is not integral for k={k}, d={d}")
    return q


# ---------------------------------------------------------------------------
# index bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicIndex:
    """One basis element: dimension, degree, chain multi-index, flat position.

    ``chain`` has d-1 entries.  For d >= 3 the first equals the degree and
    the unsigned entries decrease weakly; the final entry carries a sign
    selecting cosine (>= 0) or sine (< 0) azimuth.  For d = 2 the chain is
    the single signed entry (+k cosine, -k sine).  ``flat_l`` is the
    1-based position of the chain inside its degree block.
    """

    d: int
    k: int
    chain: tuple[int, ...]
    flat_l: int

    def __post_init__(self) -> None:
        _check_dim(self.d)
        if self.k < 0:
            raise ValueError("degree must be >= 0")
        if len(self.chain) != self.d - 1:
            raise ValueError(
                f"chain length {len(self.chain)} does not match d={self.d}"
            )
        if self.d == 2:
            if abs(self.chain[0]) != self.k:
                raise ValueError("d=2 chain entry must be +-degree")
        else:
            unsigned = list(self.chain[:-1]) + [abs(self.chain[-1])]
            if unsigned[0] != self.k:
                raise ValueError("chain must start at the degree")
            for hi, lo in zip(unsigned, unsigned[1:]):
                if hi < lo:
                    raise ValueError(f"chain {self.chain} is not weakly decreasing")
            if min(unsigned) < 0:
                raise ValueError("unsigned chain entries must be >= 0")
        if self.flat_l < 1:
            raise ValueError("flat_l is 1-based")


@dataclass(frozen=True)
class BasisSpec:
    """All harmonics on S^{d-1} up to and including degree ``max_degree``."""

    d: int
    max_degree: int

    def __post_init__(self) -> None:
        _check_dim(self.d)
        if self.d > MAX_DIM:
            raise ValueError(f"dimension {self.d} exceeds supported cap {MAX_DIM}")
        if not 0 <= self.max_degree <= MAX_DEGREE:
            raise ValueError(
                f"max_degree must lie in [0, {MAX_DEGREE}], got {self.max_degree}"
            )

    @property
    def m(self) -> int:
        return self.max_degree


def _degree_chains(k: int, d: int) -> list[tuple[int, ...]]:
    """All chains of one degree, in the documented canonical order."""
    if d == 2:
        return [(0,)] if k == 0 else [(k,), (-k,)]
    chains: list[tuple[int, ...]] = []

    def descend(prefix: tuple[int, ...], bound: int, unsigned_left: int) -> None:
        if unsigned_left == 0:
            chains.append(prefix + (0,))
            for m in range(1, bound + 1):
                chains.append(prefix + (m,))
                chains.append(prefix + (-m,))
            return
        for v in range(bound + 1):
            descend(prefix + (v,), v, unsigned_left - 1)

    descend((k,), k, d - 3)
    return chains


def enumerate_basis(spec: BasisSpec) -> list[HarmonicIndex]:
    """Every harmonic with degree <= spec.max_degree, degrees ascending.

    Within a degree, chains follow the module's canonical order and
    ``flat_l`` numbers them 1..harmonic_space_dim(k, d).
    """
    basis: list[HarmonicIndex] = []
    for k in range(spec.max_degree + 1):
        chains = _degree_chains(k, spec.d)
        if len(chains) != harmonic_space_dim(k, spec.d):
            raise ArithmeticError(
                f"enumeration produced {len(chains)} chains for k={k}, d={spec.d}, "
                f"expected {harmonic_space_dim(k, spec.d)}"
            )
        basis.extend(
            HarmonicIndex(spec.d, k, chain, pos)
            for pos, chain in enumerate(chains, start=1)
        )
    return basis


# ---------------------------------------------------------------------------
# points on the sphere
# ---------------------------------------------------------------------------


def angles_to_cartesian(angles: Sequence[float]) -> np.ndarray:
    """Hyperspherical angles (theta_1..theta_{d-2}, phi) -> unit vector.

    x_j = cos(theta_j) prod_{i<j} sin(theta_i) for the polar block, and the
    trailing pair comes from the azimuth phi.
    """
    angles = np.asarray(angles, dtype=float)
    d = angles.size + 1
    _check_dim(d)
    x = np.empty(d)
    s = 1.0
    for j in range(d - 2):
        x[j] = s * math.cos(angles[j])
        s *= math.sin(angles[j])
    x[d - 2] = s * math.cos(angles[-1])
    x[d - 1] = s * math.sin(angles[-1])
    return x


def cartesian_to_angles(x: Sequence[float]) -> tuple[float, ...]:
    """Unit vector -> hyperspherical angles; azimuth reduced to [0, 2 pi)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    _check_dim(d)
    angles = []
    for j in range(d - 2):
        tail = math.sqrt(float(np.dot(x[j + 1:], x[j + 1:])))
        angles.append(math.atan2(tail, float(x[j])))
    phi = math.atan2(float(x[-1]), float(x[-2])) % (2.0 * math.pi)
    angles.append(phi)
    return tuple(angles)


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point on S^{d-1}: unit Cartesian vector plus optional angles."""

    cartesian: np.ndarray
    angles: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        vec = np.asarray(self.cartesian, dtype=float)
        if vec.ndim != 1:
            raise ValueError("cartesian must be a flat vector")
        _check_dim(vec.size)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|cartesian| = {norm!r} is not 1 within 1e-12")
        object.__setattr__(self, "cartesian", vec)

    @property
    def d(self) -> int:
        return self.cartesian.size

    @classmethod
    def from_cartesian(cls, vec: Sequence[float]) -> "SpherePoint":
        return cls(np.asarray(vec, dtype=float))

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> "SpherePoint":
        return cls(angles_to_cartesian(angles), tuple(float(a) for a in angles))

    def to_angles(self) -> tuple[float, ...]:
        if self.angles is not None:
            return self.angles
        return cartesian_to_angles(self.cartesian)


def _as_unit_points(points, d: int) -> tuple[np.ndarray, bool]:
    """Coerce a SpherePoint / vector / (N, d) array to (N, d); flag if single."""
    if isinstance(points, SpherePoint):
        if points.d != d:
            raise ValueError(f"point dimension {points.d} != basis dimension {d}")
        return points.cartesian[None, :], True
    arr = np.asarray(points, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"expected points of shape (N, {d}), got {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    err = float(np.max(np.abs(norms - 1.0))) if arr.size else 0.0
    if err > _UNIT_TOL:
        raise ValueError(f"points are not on the unit sphere (|r-1| up to {err:.3e})")
    return arr, single


# ---------------------------------------------------------------------------
# evaluation: solid Gegenbauer towers
# ---------------------------------------------------------------------------


def _chain_factors(idx: HarmonicIndex) -> tuple[list[tuple[int, float, int, int]], int, bool]:
    """Split an index into polar factors and the azimuth.

    Returns ([(j, a, n, mu), ...], m, cos_type): one tuple per polar angle
    j = 1..d-2 with Gegenbauer order a = mu + (d-j-1)/2 and degree
    n = k_j - k_{j+1}; m = |k_{d-1}| and the azimuth type.
    """
    d = idx.d
    if d == 2:
        return [], abs(idx.chain[0]), idx.chain[0] >= 0
    unsigned = list(idx.chain[:-1]) + [abs(idx.chain[-1])]
    factors = []
    for j in range(1, d - 1):
        lam, mu = unsigned[j - 1], unsigned[j]
        a = mu + (d - j - 1) / 2.0
        factors.append((j, a, lam - mu, mu))
    return factors, unsigned[-1], idx.chain[-1] >= 0


def _log_factor_norm_sq(a: float, n: int) -> float:
    """log of int_{-1}^{1} (1-t^2)^{a-1/2} C_n^{(a)}(t)^2 dt."""
    return (
        math.log(math.pi)
        + (1.0 - 2.0 * a) * math.log(2.0)
        + math.lgamma(n + 2.0 * a)
        - math.lgamma(n + 1.0)
        - math.log(n + a)
        - 2.0 * math.lgamma(a)
    )


def _index_norm(idx: HarmonicIndex) -> float:
    factors, m, _ = _chain_factors(idx)
    log_norm = -0.5 * sum(_log_factor_norm_sq(a, n) for _, a, n, _ in factors)
    azim = 1.0 / math.sqrt(2.0 * math.pi) if m == 0 else 1.0 / math.sqrt(math.pi)
    return azim * math.exp(log_norm)


class _PointBatch:
    """Shared evaluation workspace for a fixed batch of unit vectors.

    Solid Gegenbauer towers G_n^{(a)}(x_j, rho_j) with rho_j = x_j^2 + ...
    + x_d^2 are grown once per (angle, suborder) pair and reused by every
    basis element, which turns whole-basis evaluation into a handful of
    vector operations per harmonic.  Value and derivative recurrences (in
    x and rho) share the same three-term structure as the classical
    Gegenbauer recurrence.
    """

    def __init__(self, X: np.ndarray):
        self.X = X
        self.n_pts, self.d = X.shape
        sq = X * X
        # rho[:, j] = x_{j+1}^2 + ... + x_d^2 in 0-based column terms.
        self.rho = np.cumsum(sq[:, ::-1], axis=1)[:, ::-1]
        self._towers: dict[tuple[int, int], list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = {}
        self._zpow: list[np.ndarray] | None = None

    def _tower(self, j: int, a: float, mu: int, n: int):
        key = (j, mu)
        tower = self._towers.get(key)
        if tower is None:
            one = np.ones(self.n_pts)
            zero = np.zeros(self.n_pts)
            tower = [(one, zero, zero)]
            self._towers[key] = tower
        x = self.X[:, j - 1]
        rho = self.rho[:, j - 1]
        while len(tower) <= n:
            i = len(tower)
            if i == 1:
                tower.append((2.0 * a * x, np.full(self.n_pts, 2.0 * a), np.zeros(self.n_pts)))
                continue
            g1, gx1, gr1 = tower[i - 1]
            g2, gx2, gr2 = tower[i - 2]
            c1 = 2.0 * (i + a - 1.0)
            c2 = i + 2.0 * a - 2.0
            g = (c1 * x * g1 - c2 * rho * g2) / i
            gx = (c1 * (g1 + x * gx1) - c2 * rho * gx2) / i
            gr = (c1 * x * gr1 - c2 * (g2 + rho * gr2)) / i
            tower.append((g, gx, gr))
        return tower[n]

    def _azimuth(self, m: int, cos_type: bool, want_grad: bool):
        if self._zpow is None:
            z = self.X[:, self.d - 2] + 1j * self.X[:, self.d - 1]
            self._zpow = [np.ones(self.n_pts, dtype=complex), z]
        while len(self._zpow) <= m:
            self._zpow.append(self._zpow[-1] * self._zpow[1])
        zm = self._zpow[m]
        A = zm.real.copy() if cos_type else zm.imag.copy()
        if not want_grad:
            return A, None, None
        if m == 0:
            zero = np.zeros(self.n_pts)
            return A, zero, zero
        zm1 = self._zpow[m - 1]
        if cos_type:
            return A, m * zm1.real, -m * zm1.imag
        return A, m * zm1.imag, m * zm1.real

    def eval(self, idx: HarmonicIndex, want_grad: bool):
        """Value of Y (and optionally its surface gradient) at the batch."""
        factors, m, cos_type = _chain_factors(idx)
        norm = _index_norm(idx)
        A, dA1, dA2 = self._azimuth(m, cos_type, want_grad)

        parts = [self._tower(j, a, mu, n) for j, a, n, mu in factors]
        values = [p[0] for p in parts]

        # prefix[p] = product of factor values before p; suffix likewise.
        q = len(values)
        total = A
        for g in values:
            total = total * g
        P = norm * total
        if not want_grad:
            return P, None

        grad = np.zeros_like(self.X)
        if q:
            prefix = [None] * q
            acc = np.ones(self.n_pts)
            for p in range(q):
                prefix[p] = acc
                acc = acc * values[p]
            polar_all = acc
            suffix = [None] * q
            acc = A.copy()
            for p in range(q - 1, -1, -1):
                suffix[p] = acc
                acc = acc * values[p]
            for p, (j, a, n, mu) in enumerate(factors):
                g, gx, gr = parts[p]
                others = prefix[p] * suffix[p]
                grad[:, j - 1] += gx * others
                contrib = 2.0 * gr * others
                grad[:, j - 1:] += self.X[:, j - 1:] * contrib[:, None]
        else:
            polar_all = np.ones(self.n_pts)
        grad[:, self.d - 2] += polar_all * dA1
        grad[:, self.d - 1] += polar_all * dA2
        grad *= norm
        # Tangential projection: grad_S Y = grad P - k Y xi on |xi| = 1.
        grad -= (idx.k * P)[:, None] * self.X
        return P, grad


def eval_Y(idx: HarmonicIndex, point) -> float | np.ndarray:
    """Evaluate one harmonic at a SpherePoint, vector, or (N, d) array."""
    X, single = _as_unit_points(point, idx.d)
    vals, _ = _PointBatch(X).eval(idx, want_grad=False)
    return float(vals[0]) if single else vals


def eval_grad_Y(idx: HarmonicIndex, point) -> np.ndarray:
    """Surface gradient of one harmonic; tangent to the sphere by construction."""
    X, single = _as_unit_points(point, idx.d)
    _, grad = _PointBatch(X).eval(idx, want_grad=True)
    return grad[0] if single else grad


def basis_matrix(basis: Sequence[HarmonicIndex], points) -> np.ndarray:
    """Values of every basis element at every point: shape (n_basis, N).

    All elements share one workspace, so the Gegenbauer towers for the
    batch are built exactly once.
    """
    if not basis:
        return np.zeros((0, 0))
    d = basis[0].d
    X, _ = _as_unit_points(points, d)
    batch = _PointBatch(X)
    out = np.empty((len(basis), X.shape[0]))
    for row, idx in enumerate(basis):
        if idx.d != d:
            raise ValueError("mixed dimensions in basis")
        out[row], _ = batch.eval(idx, want_grad=False)
    return out


def basis_and_grad_matrix(basis: Sequence[HarmonicIndex], points) -> tuple[np.ndarray, np.ndarray]:
    """Values (n_basis, N) and surface gradients (n_basis, N, d) in one pass."""
    if not basis:
        return np.zeros((0, 0)), np.zeros((0, 0, 0))
    d = basis[0].d
    X, _ = _as_unit_points(points, d)
    batch = _PointBatch(X)
    vals = np.empty((len(basis), X.shape[0]))
    grads = np.empty((len(basis), X.shape[0], d))
    for row, idx in enumerate(basis):
        if idx.d != d:
            raise ValueError("mixed dimensions in basis")
        vals[row], grads[row] = batch.eval(idx, want_grad=True)
    return vals, grads


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Tensor-product rule on S^{d-1}, exact for harmonics of low degree.

    ``nodes`` is an (N, d) array of unit vectors and ``weights`` the
    matching positive weights summing to surface_area(d).  Polynomials of
    total degree <= exactness_degree integrate exactly (up to roundoff).
    """

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    @property
    def n_nodes(self) -> int:
        return self.weights.size

    def sphere_points(self) -> list[SpherePoint]:
        return [SpherePoint(v) for v in self.nodes]


def build_quadrature(d: int, target_degree: int) -> QuadratureRule:
    """Gauss-Jacobi x uniform-azimuth product rule exact to ``target_degree``.

    Polar angle j carries the weight (1-t^2)^{alpha_j - 1/2} with
    alpha_j = (d-j-1)/2, integrated by an n-point Gauss-Jacobi rule
    (exact through polynomial degree 2n-1); the azimuth uses an even
    uniform rule with at least target_degree+1 nodes, exact for
    trigonometric polynomials below the node count.  Symmetric nodes and
    the even azimuth count kill every odd monomial exactly, which is what
    makes the product rule exact for full polynomial degree.
    """
    _check_dim(d)
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds supported cap {MAX_DIM}")
    if target_degree < 0:
        raise ValueError("target_degree must be >= 0")
    n_polar = target_degree // 2 + 1
    n_az = 2 * (target_degree // 2 + 1)
    needed = n_polar ** (d - 2) * n_az
    if needed > _NODE_BUDGET:
        raise ValueError(
            f"target_degree={target_degree} in d={d} needs {needed} nodes, "
            f"over the budget of {_NODE_BUDGET}"
        )

    phi = 2.0 * math.pi * np.arange(n_az) / n_az
    az_w = np.full(n_az, 2.0 * math.pi / n_az)

    polar_t: list[np.ndarray] = []
    polar_w: list[np.ndarray] = []
    for j in range(1, d - 1):
        alpha = (d - j - 1) / 2.0
        t, w = roots_jacobi(n_polar, alpha - 0.5, alpha - 0.5)
        polar_t.append(t)
        polar_w.append(w)

    grids = np.meshgrid(*polar_t, phi, indexing="ij")
    wgrids = np.meshgrid(*polar_w, az_w, indexing="ij")
    flat = [g.ravel() for g in grids]
    weights = np.ones_like(flat[-1])
    for wg in wgrids:
        weights = weights * wg.ravel()

    n_total = flat[-1].size
    nodes = np.empty((n_total, d))
    s = np.ones(n_total)
    for j in range(d - 2):
        t = flat[j]
        nodes[:, j] = s * t
        s = s * np.sqrt(np.maximum(0.0, 1.0 - t * t))
    nodes[:, d - 2] = s * np.cos(flat[-1])
    nodes[:, d - 1] = s * np.sin(flat[-1])

    exact = n_az - 1 if d == 2 else min(2 * n_polar - 1, n_az - 1)
    return QuadratureRule(d=d, nodes=nodes, weights=weights, exactness_degree=exact)

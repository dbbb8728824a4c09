"""Closed-form shell potentials for the insulated and perfect problems.

Both problems live on the shell  r0 < |x| < r0 + eps  with Dirichlet data
phi on the outer sphere.  The insulated problem imposes a homogeneous
Neumann condition on the inner sphere; the perfect (superconducting)
problem forces the trace on the inner sphere to a free constant fixed by
a zero net-flux constraint.  Separation of variables reduces each
harmonic mode to a radial two-point problem whose solution is a
combination of r^k and r^{2-d-k} (log for the exceptional exponent), so
the whole potential is an explicit series once the boundary data is
expanded.

The unified radial primitive

    rho_i(r) = -log(r)   if i == 2
               r^{2-i}   otherwise

absorbs the dimension/log dichotomy: every coefficient below is a ratio
of rho-gaps and powers.  Gaps are computed with expm1 so thin shells do
not cancel, and strictly positive products go through log space so large
degrees do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .boundary_data import ExpansionCoefficients
from .sphere_basis import SpherePoint, basis_and_grad_matrix, basis_matrix, surface_area

_SHELL_TOL = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Shell between radii r0 and r0 + eps in dimension d."""

    d: int
    r0: float
    eps: float

    def __post_init__(self) -> None:
        if not isinstance(self.d, (int, np.integer)) or self.d < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.d!r}")
        if not self.r0 > 0.0:
            raise ValueError("inner radius must be > 0")
        if not self.eps > 0.0:
            raise ValueError("shell width must be > 0")

    @property
    def outer_radius(self) -> float:
        return self.r0 + self.eps

    @property
    def chi(self) -> float:
        """Coefficient of the radial derivative of rho_d: 1 in d=2, d-2 above."""
        return 1.0 if self.d == 2 else float(self.d - 2)


# ---------------------------------------------------------------------------
# radial primitives
# ---------------------------------------------------------------------------


def rho(i: int, r):
    """Unified radial primitive: -log r for i = 2, r^{2-i} otherwise."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("rho requires r > 0")
    out = -np.log(r) if i == 2 else r ** (2.0 - i)
    return float(out) if out.ndim == 0 else out


def rho_deriv(i: int, r):
    """d/dr of the radial primitive."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("rho_deriv requires r > 0")
    out = -1.0 / r if i == 2 else (2.0 - i) * r ** (1.0 - i)
    return float(out) if out.ndim == 0 else out


def rho_diff(i: int, ra, rb):
    """rho_i(ra) - rho_i(rb), cancellation-safe for nearby radii.

    Written as rb^{2-i} expm1((2-i) log(ra/rb)) (log-ratio for i = 2), so a
    thin shell keeps full relative precision instead of subtracting two
    nearly equal powers.
    """
    ra = np.asarray(ra, dtype=float)
    rb = np.asarray(rb, dtype=float)
    if np.any(ra <= 0.0) or np.any(rb <= 0.0):
        raise ValueError("rho_diff requires positive radii")
    if i == 2:
        out = np.log(rb / ra)
    else:
        out = rb ** (2.0 - i) * np.expm1((2.0 - i) * np.log(ra / rb))
    return float(out) if out.ndim == 0 else out


def _log_expm1(t):
    """log(expm1(t)) for t > 0, safe for large t."""
    t = np.asarray(t, dtype=float)
    small = t < 30.0
    out = np.where(
        small,
        np.log(np.expm1(np.where(small, t, 1.0))),
        t + np.log1p(-np.exp(-np.where(small, 30.0, t))),
    )
    return out


def _expm1_ratio(t_num, t_den):
    """expm1(t_num) / expm1(t_den) for 0 <= t_num <= t_den, overflow-free."""
    t_num = np.asarray(t_num, dtype=float)
    t_den = np.asarray(t_den, dtype=float)
    if np.any(t_den <= 0.0):
        raise ValueError("denominator exponent must be positive")
    big = t_den > 500.0
    if not np.any(big):
        return np.expm1(t_num) / np.expm1(t_den)
    # expm1(a)/expm1(b) = e^{a-b} (1 - e^{-a}) / (1 - e^{-b})
    safe = np.where(big, 1.0, t_den)
    direct = np.expm1(t_num) / np.expm1(safe)
    folded = np.exp(t_num - t_den) * (-np.expm1(-t_num)) / (-np.expm1(-t_den))
    return np.where(big, folded, direct)


# ---------------------------------------------------------------------------
# mode coefficients, insulated problem
# ---------------------------------------------------------------------------


def insulated_coeffs(geom: Geometry, k: int) -> tuple[float, float]:
    """Constants (c1, c2) of the degree-k insulated radial profile.

    The profile f_k(r) = c1 r^{2-d-k} + c2 r^k satisfies f_k'(r0) = 0 and
    f_k(r0 + eps) = 1.  In rho form,

        c1 = k rho_{4-d-2k}(r0) rho_{4-d-k}(R) / D,
        c2 = (k + d - 2) rho_{4-d-k}(R) / D,
        D  = k rho_{4-d-2k}(r0) + (k + d - 2) rho_{4-d-2k}(R),

    with R = r0 + eps.  Every ingredient is a positive power, so the whole
    computation runs in log space and cannot overflow for any degree or
    aspect ratio.
    """
    if k < 1:
        raise ValueError("mode coefficients need degree k >= 1")
    d = geom.d
    r0, R = geom.r0, geom.outer_radius
    p = d + 2.0 * k - 2.0  # exponent of rho_{4-d-2k}
    q = d + k - 2.0        # exponent of rho_{4-d-k}
    ln_r0, ln_R = math.log(r0), math.log(R)
    ln_num1 = math.log(k) + p * ln_r0 + q * ln_R
    ln_num2 = math.log(k + d - 2.0) + q * ln_R
    ln_den = np.logaddexp(math.log(k) + p * ln_r0, math.log(k + d - 2.0) + p * ln_R)
    return float(np.exp(ln_num1 - ln_den)), float(np.exp(ln_num2 - ln_den))


def insulated_coeffs_via_system(geom: Geometry, k: int) -> tuple[float, float]:
    """Same constants from the raw 2x2 boundary system (independent route).

    Solves  f'(r0) = 0,  f(R) = 1  for f = c1 r^{2-d-k} + c2 r^k with a
    dense linear solve; used to cross-check the closed form, never to
    replace it.
    """
    if k < 1:
        raise ValueError("mode coefficients need degree k >= 1")
    d = geom.d
    r0, R = geom.r0, geom.outer_radius
    A = np.array(
        [
            [(2.0 - d - k) * r0 ** (1.0 - d - k), k * r0 ** (k - 1.0)],
            [R ** (2.0 - d - k), R ** float(k)],
        ]
    )
    b = np.array([0.0, 1.0])
    c = np.linalg.solve(A, b)
    return float(c[0]), float(c[1])


# ---------------------------------------------------------------------------
# radial profiles, perfect problem
# ---------------------------------------------------------------------------


def perfect_profiles(geom: Geometry, k: int, r):
    """Radial profiles (ct1(r), ct2(r)) of the perfect problem at degree k.

    ct1 interpolates 1 at r0 to 0 at R through the radial harmonic
    rho_d; it multiplies the sphere average of Y and is degree-free:

        ct1(r) = (rho_d(r) - rho_d(R)) / (rho_d(r0) - rho_d(R)).

    ct2 vanishes at r0 and reaches 1 at R:

        ct2(r) = (r^k - rho_{4-d-2k}(r0) r^{2-d-k}) rho_{4-d-k}(R)
                 / (rho_{4-d-2k}(R) - rho_{4-d-2k}(r0))
               = (R/r)^{d+k-2} expm1(p log(r/r0)) / expm1(p log(R/r0)),

    with p = d + 2k - 2; the ratio form is exact at both endpoints and
    free of overflow and thin-shell cancellation.
    """
    if k < 1:
        raise ValueError("perfect profiles need degree k >= 1")
    d = geom.d
    r0, R = geom.r0, geom.outer_radius
    r = np.asarray(r, dtype=float)
    _check_radii(geom, r)
    ct1 = np.asarray(rho_diff(d, r, R)) / rho_diff(d, r0, R)
    p = d + 2.0 * k - 2.0
    q = d + k - 2.0
    t_num = p * np.log(np.maximum(r / r0, 1.0))
    ct2 = (R / r) ** q * _expm1_ratio(t_num, p * math.log(R / r0))
    if ct1.ndim == 0:
        return float(ct1), float(ct2)
    return ct1, ct2


def perfect_profile_derivatives(geom: Geometry, k: int, r):
    """d/dr of the perfect radial profiles (ct1', ct2').

    ct1'(r) = rho_d'(r) / (rho_d(r0) - rho_d(R)) = -chi r^{1-d} / gap;
    ct2'(r) = (k r^{k-1} + (d+k-2) rho_{4-d-2k}(r0) r^{1-d-k})
              rho_{4-d-k}(R) / (rho_{4-d-2k}(R) - rho_{4-d-2k}(r0)),
    a sum of two positive terms computed in log space.
    """
    if k < 1:
        raise ValueError("perfect profiles need degree k >= 1")
    d = geom.d
    r0, R = geom.r0, geom.outer_radius
    r = np.asarray(r, dtype=float)
    _check_radii(geom, r)
    gap = rho_diff(d, r0, R)
    dct1 = np.asarray(rho_deriv(d, r)) / gap

    p = d + 2.0 * k - 2.0
    q = d + k - 2.0
    ln_r = np.log(r)
    ln_E = _log_expm1(np.asarray(p * math.log(R / r0)))
    ln_t1 = math.log(k) + q * math.log(R / r0) + (k - 1.0) * (ln_r - math.log(r0)) - math.log(r0)
    ln_t2 = math.log(d + k - 2.0) + q * (math.log(R) - ln_r) - ln_r
    dct2 = np.exp(np.logaddexp(ln_t1, ln_t2) - ln_E)
    if dct1.ndim == 0:
        return float(dct1), float(dct2)
    return dct1, dct2


def perfect_profiles_via_system(geom: Geometry, k: int, r):
    """Perfect profiles from raw 2x2 interpolation systems (cross-check).

    ct2 comes from solving f(r0) = 0, f(R) = 1 in the span of r^{2-d-k}
    and r^k; ct1 from solving g(r0) = 1, g(R) = 0 in the span of 1 and
    rho_d(r).
    """
    if k < 1:
        raise ValueError("perfect profiles need degree k >= 1")
    d = geom.d
    r0, R = geom.r0, geom.outer_radius
    r = np.asarray(r, dtype=float)
    A2 = np.array(
        [
            [r0 ** (2.0 - d - k), r0 ** float(k)],
            [R ** (2.0 - d - k), R ** float(k)],
        ]
    )
    ab = np.linalg.solve(A2, np.array([0.0, 1.0]))
    ct2 = ab[0] * r ** (2.0 - d - k) + ab[1] * r ** float(k)

    A1 = np.array([[1.0, rho(d, r0)], [1.0, rho(d, R)]])
    cd = np.linalg.solve(A1, np.array([1.0, 0.0]))
    ct1 = cd[0] + cd[1] * np.asarray(rho(d, r))
    if np.ndim(r) == 0:
        return float(ct1), float(ct2)
    return ct1, ct2


# ---------------------------------------------------------------------------
# assembled series solutions
# ---------------------------------------------------------------------------


def _check_radii(geom: Geometry, r: np.ndarray) -> None:
    tol = _SHELL_TOL * max(1.0, geom.outer_radius)
    rmin = float(np.min(r))
    rmax = float(np.max(r))
    if rmin < geom.r0 - tol or rmax > geom.outer_radius + tol:
        raise ValueError(
            f"radius range [{rmin:.6g}, {rmax:.6g}] leaves the closed shell "
            f"[{geom.r0:.6g}, {geom.outer_radius:.6g}]"
        )


def _points_and_radii(geom: Geometry, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    if isinstance(x, SpherePoint):
        raise ValueError("shell evaluation needs ambient points, not unit vectors")
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != geom.d:
        raise ValueError(f"expected points of shape (N, {geom.d}), got {X.shape}")
    r = np.linalg.norm(X, axis=1)
    _check_radii(geom, r)
    xi = X / r[:, None]
    return X, r, xi, single


class _SeriesSolution:
    """Shared machinery: radial tables x basis values at unit directions."""

    problem: ClassVar[str]

    geom: Geometry
    coeffs: ExpansionCoefficients

    # subclasses fill these radial tables; shapes (m+1, N) over degrees
    def _value_tables(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv_tables(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _constant_part(self, r: np.ndarray) -> np.ndarray:
        return np.zeros_like(r)

    def _constant_part_deriv(self, r: np.ndarray) -> np.ndarray:
        return np.zeros_like(r)

    def value(self, x) -> float | np.ndarray:
        """Potential u at ambient point(s) in the closed shell."""
        _, r, xi, single = _points_and_radii(self.geom, x)
        B = basis_matrix(self.coeffs.basis, xi)
        out = self._combine_values(r, B)
        return float(out[0]) if single else out

    def gradient(self, x) -> np.ndarray:
        """Ambient gradient of u, split as xi du/dr + (1/r) grad_S u."""
        _, r, xi, single = _points_and_radii(self.geom, x)
        B, GB = basis_and_grad_matrix(self.coeffs.basis, xi)
        out = self._combine_gradients(r, xi, B, GB)
        return out[0] if single else out

    def value_grid(self, radii, rule_or_nodes) -> np.ndarray:
        """u on the tensor grid radii x directions; shape (n_r, n_dir)."""
        nodes = getattr(rule_or_nodes, "nodes", rule_or_nodes)
        radii = np.asarray(radii, dtype=float)
        _check_radii(self.geom, radii)
        B = basis_matrix(self.coeffs.basis, nodes)
        return self._grid_values(radii, B)

    def gradient_grid(self, radii, rule_or_nodes) -> np.ndarray:
        """grad u on the tensor grid; shape (n_r, n_dir, d)."""
        nodes = getattr(rule_or_nodes, "nodes", rule_or_nodes)
        radii = np.asarray(radii, dtype=float)
        _check_radii(self.geom, radii)
        B, GB = basis_and_grad_matrix(self.coeffs.basis, nodes)
        return self._grid_gradients(radii, np.asarray(nodes, dtype=float), B, GB)

    # -- implementations shared by both problems ---------------------------

    def _combine_values(self, r: np.ndarray, B: np.ndarray) -> np.ndarray:
        F = self._value_tables(r)[self.coeffs.degrees]  # (n_basis, N)
        out = (self.coeffs.values[:, None] * F * B).sum(axis=0)
        return out + self._constant_part(r)

    def _combine_gradients(
        self, r: np.ndarray, xi: np.ndarray, B: np.ndarray, GB: np.ndarray
    ) -> np.ndarray:
        ks = self.coeffs.degrees
        F = self._value_tables(r)[ks]
        Fp = self._deriv_tables(r)[ks]
        a = self.coeffs.values[:, None]
        radial = (a * Fp * B).sum(axis=0) + self._constant_part_deriv(r)
        tang_w = a * F / r[None, :]
        tang = np.einsum("in,ind->nd", tang_w, GB)
        return radial[:, None] * xi + tang

    def _grid_values(self, radii: np.ndarray, B: np.ndarray) -> np.ndarray:
        ks = self.coeffs.degrees
        F = self._value_tables(radii)[ks]          # (n_basis, n_r)
        S = (self.coeffs.values[:, None] * F).T @ B  # (n_r, n_dir)
        return S + self._constant_part(radii)[:, None]

    def _grid_gradients(
        self, radii: np.ndarray, nodes: np.ndarray, B: np.ndarray, GB: np.ndarray
    ) -> np.ndarray:
        ks = self.coeffs.degrees
        F = self._value_tables(radii)[ks]
        Fp = self._deriv_tables(radii)[ks]
        a = self.coeffs.values[:, None]
        radial = (a * Fp).T @ B + self._constant_part_deriv(radii)[:, None]  # (n_r, n_dir)
        tang_w = (a * F).T / radii[:, None]  # (n_r, n_basis)
        tang = np.tensordot(tang_w, GB, axes=(1, 0))  # (n_r, n_dir, d)
        return radial[..., None] * nodes[None, :, :] + tang


@dataclass(frozen=True, eq=False)
class InsulatedSolution(_SeriesSolution):
    """Series potential of the insulated shell problem.

    Radial factor per degree: f_k(r) = c1_k r^{2-d-k} + c2_k r^k, with
    f_0 = 1 encoded as (c1, c2) = (0, 1).  Construction verifies the inner
    Neumann and outer Dirichlet identities mode by mode.
    """

    problem: ClassVar[str] = "insulated"

    geom: Geometry
    coeffs: ExpansionCoefficients
    c1: np.ndarray
    c2: np.ndarray

    def _value_tables(self, r: np.ndarray) -> np.ndarray:
        d = self.geom.d
        ks = np.arange(self.coeffs.max_degree + 1, dtype=float)[:, None]
        rr = r[None, :]
        return self.c1[:, None] * rr ** (2.0 - d - ks) + self.c2[:, None] * rr ** ks

    def _deriv_tables(self, r: np.ndarray) -> np.ndarray:
        d = self.geom.d
        ks = np.arange(self.coeffs.max_degree + 1, dtype=float)[:, None]
        rr = r[None, :]
        down = self.c1[:, None] * (2.0 - d - ks) * rr ** (1.0 - d - ks)
        up = self.c2[:, None] * ks * rr ** np.maximum(ks - 1.0, 0.0)
        up[0, :] = 0.0
        return down + up


@dataclass(frozen=True, eq=False)
class PerfectSolution(_SeriesSolution):
    """Series potential of the perfect (superconducting) shell problem.

    u = a_00 |S|^{-1/2} + sum_{k>=1} a_kl [ct1(r) mean(Y_kl) + ct2_k(r) Y_kl],
    where mean(Y) is the sphere average computed with the projection rule.
    The constant C0 = sum a_kl mean(Y_kl) is the inner-trace value selected
    by the zero net-flux constraint.
    """

    problem: ClassVar[str] = "perfect"

    geom: Geometry
    coeffs: ExpansionCoefficients
    C0: float
    sphere_means: np.ndarray

    @property
    def mean_tail(self) -> float:
        """sum over k >= 1 of a_kl mean(Y_kl): weight of the ct1 profile."""
        ks = self.coeffs.degrees
        sel = ks >= 1
        return float(np.sum(self.coeffs.values[sel] * self.sphere_means[sel]))

    def _ct2_table(self, r: np.ndarray) -> np.ndarray:
        m = self.coeffs.max_degree
        out = np.empty((m + 1, r.size))
        out[0, :] = 1.0  # degree-0 slot: the constant term (never used with ct1)
        for k in range(1, m + 1):
            _, ct2 = perfect_profiles(self.geom, k, r)
            out[k, :] = ct2
        return out

    def _dct2_table(self, r: np.ndarray) -> np.ndarray:
        m = self.coeffs.max_degree
        out = np.empty((m + 1, r.size))
        out[0, :] = 0.0
        for k in range(1, m + 1):
            _, dct2 = perfect_profile_derivatives(self.geom, k, r)
            out[k, :] = dct2
        return out

    def _value_tables(self, r: np.ndarray) -> np.ndarray:
        return self._ct2_table(r)

    def _deriv_tables(self, r: np.ndarray) -> np.ndarray:
        return self._dct2_table(r)

    def _constant_part(self, r: np.ndarray) -> np.ndarray:
        ct1, _ = perfect_profiles(self.geom, 1, r)
        return np.asarray(ct1) * self.mean_tail

    def _constant_part_deriv(self, r: np.ndarray) -> np.ndarray:
        dct1, _ = perfect_profile_derivatives(self.geom, 1, r)
        return np.asarray(dct1) * self.mean_tail


def solve_insulated(geom: Geometry, coeffs: ExpansionCoefficients) -> InsulatedSolution:
    """Assemble the insulated series solution, verifying the mode identities."""
    _check_compat(geom, coeffs)
    m = coeffs.max_degree
    d = geom.d
    r0, R = geom.r0, geom.outer_radius
    c1 = np.zeros(m + 1)
    c2 = np.zeros(m + 1)
    c2[0] = 1.0
    for k in range(1, m + 1):
        c1[k], c2[k] = insulated_coeffs(geom, k)
        neu1 = c1[k] * (2.0 - d - k) * r0 ** (1.0 - d - k)
        neu2 = c2[k] * k * r0 ** (k - 1.0)
        scale = max(abs(neu1), abs(neu2), 1e-300)
        if abs(neu1 + neu2) > 1e-12 * scale:
            raise ArithmeticError(f"inner Neumann identity fails at k={k}")
        dir_val = c1[k] * R ** (2.0 - d - k) + c2[k] * R ** float(k)
        if abs(dir_val - 1.0) > 1e-12:
            raise ArithmeticError(f"outer Dirichlet identity fails at k={k}")
    return InsulatedSolution(geom=geom, coeffs=coeffs, c1=c1, c2=c2)


def solve_perfect(geom: Geometry, coeffs: ExpansionCoefficients) -> PerfectSolution:
    """Assemble the perfect series solution; C0 comes from quadrature means."""
    _check_compat(geom, coeffs)
    means = sphere_means(coeffs)
    C0 = float(np.sum(coeffs.values * means))
    return PerfectSolution(geom=geom, coeffs=coeffs, C0=C0, sphere_means=means)


def sphere_means(coeffs: ExpansionCoefficients) -> np.ndarray:
    """Sphere averages of every basis element under the projection rule."""
    rule = coeffs.rule
    B = basis_matrix(coeffs.basis, rule.nodes)
    total = float(np.sum(rule.weights))
    return (B * rule.weights[None, :]).sum(axis=1) / total


def perfect_C0(coeffs: ExpansionCoefficients) -> float:
    """Free inner-trace constant: quadrature mean of the truncated data.

    Equals sum_i a_i mean(Y_i); analytically this collapses to
    a_00 |S|^{-1/2} because nonconstant harmonics average to zero, but the
    value is computed from the declared formula so the collapse stays an
    observable property rather than an assumption.
    """
    means = sphere_means(coeffs)
    return float(np.sum(coeffs.values * means))


def _check_compat(geom: Geometry, coeffs: ExpansionCoefficients) -> None:
    if coeffs.d != geom.d:
        raise ValueError(
            f"coefficients live in dimension {coeffs.d}, geometry in {geom.d}"
        )

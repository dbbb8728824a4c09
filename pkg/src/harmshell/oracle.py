"""Finite-difference oracles that check the closed forms from the outside.

Two independent discretizations:

* a second-order three-point scheme for the radial two-point problems
  each harmonic mode satisfies (Neumann closed with a ghost node), and
* a five-point polar-grid scheme for the full 2-D shell, with the free
  inner constant of the perfect problem recovered from a two-solve
  superposition and a discrete flux constraint.

Neither path touches the series machinery: agreement between the two is
the evidence that the closed forms solve the PDEs they claim to solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve

from .sphere_basis import QuadratureRule

_INNER_BCS = ("neumann_zero", "dirichlet_zero", "dirichlet_one")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes on [r0, r0 + eps] with n interior points.

    h = eps / (n + 1); nodes include both endpoints, so there are n + 2 of
    them in total.
    """

    r0: float
    eps: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("radial grid needs at least 2 interior nodes")
        if not (self.r0 > 0.0 and self.eps > 0.0):
            raise ValueError("radial grid needs r0 > 0 and eps > 0")

    @property
    def h(self) -> float:
        return self.eps / (self.n + 1)

    @property
    def r_nodes(self) -> np.ndarray:
        return self.r0 + self.h * np.arange(self.n + 2)


@dataclass(frozen=True)
class ModeBVPSpec:
    """Radial mode problem: f'' + (d-1)/r f' - k(k+d-2)/r^2 f = 0.

    ``inner_bc`` selects f'(r0) = 0 (neumann_zero), f(r0) = 0
    (dirichlet_zero) or f(r0) = 1 (dirichlet_one); the outer condition is
    always f(r0 + eps) = outer_value.
    """

    d: int
    k: int
    r0: float
    eps: float
    inner_bc: str
    outer_value: float = 1.0

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError("dimension must be >= 2")
        if self.k < 0:
            raise ValueError("mode degree must be >= 0")
        if self.inner_bc not in _INNER_BCS:
            raise ValueError(f"inner_bc must be one of {_INNER_BCS}")
        if not (self.r0 > 0.0 and self.eps > 0.0):
            raise ValueError("need r0 > 0 and eps > 0")


def radial_bvp_solve(spec: ModeBVPSpec, grid: RadialGrid) -> np.ndarray:
    """Solve the radial mode problem on the grid; returns f at all nodes.

    Centered differences throughout; the Neumann condition is closed with
    a mirrored ghost node, which keeps the scheme second order up to the
    boundary.
    """
    if not (
        math.isclose(spec.r0, grid.r0, rel_tol=0, abs_tol=1e-14)
        and math.isclose(spec.eps, grid.eps, rel_tol=1e-14)
    ):
        raise ValueError("grid and mode problem disagree on the shell")
    d, k = spec.d, spec.k
    h = grid.h
    r = grid.r_nodes
    n = grid.n
    K = k * (k + d - 2)

    neumann = spec.inner_bc == "neumann_zero"
    nu = n + 1 if neumann else n  # unknowns: nodes 0..n or 1..n
    lo = 0 if neumann else 1

    idx = np.arange(nu)
    rr = r[lo : n + 1]
    lower = 1.0 / h**2 - (d - 1.0) / (2.0 * h * rr)
    diag = -2.0 / h**2 - K / rr**2
    upper = 1.0 / h**2 + (d - 1.0) / (2.0 * h * rr)

    b = np.zeros(nu)
    if neumann:
        # ghost closure f_{-1} = f_1: the first-derivative term cancels and
        # the second derivative becomes 2(f_1 - f_0)/h^2.
        lower[0] = 0.0
        upper[0] = 2.0 / h**2
    else:
        inner_val = 0.0 if spec.inner_bc == "dirichlet_zero" else 1.0
        b[0] -= lower[0] * inner_val
        lower[0] = 0.0
    b[-1] -= upper[-1] * spec.outer_value
    upper[-1] = 0.0

    ab = np.zeros((3, nu))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    sol = solve_banded((1, 1), ab, b)

    f = np.empty(n + 2)
    f[lo : n + 1] = sol
    f[n + 1] = spec.outer_value
    if not neumann:
        f[0] = 0.0 if spec.inner_bc == "dirichlet_zero" else 1.0
    return f


def radial_convergence_study(
    spec: ModeBVPSpec,
    reference: Callable[[np.ndarray], np.ndarray],
    n_list: Sequence[int],
) -> list[tuple[int, float, float, float]]:
    """Max-node errors against a reference profile over refinements.

    Returns rows (n, h, max_error, observed_order); the order entry is the
    slope between consecutive rows and nan on the first row.
    """
    rows: list[tuple[int, float, float, float]] = []
    prev: tuple[float, float] | None = None
    for n in n_list:
        grid = RadialGrid(spec.r0, spec.eps, n)
        f = radial_bvp_solve(spec, grid)
        err = float(np.max(np.abs(f - np.asarray(reference(grid.r_nodes)))))
        if prev is None:
            order = math.nan
        else:
            h_prev, e_prev = prev
            order = math.log(e_prev / err) / math.log(h_prev / grid.h)
        rows.append((n, grid.h, err, order))
        prev = (grid.h, err)
    return rows


# ---------------------------------------------------------------------------
# full-field 2-D solver
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolarField2D:
    """FD solution on the polar grid: u[i, j] at radius i, angle j."""

    u: np.ndarray
    r_nodes: np.ndarray
    theta_nodes: np.ndarray
    inner_constant: float | None = None


def _polar_matrix(
    r: np.ndarray,
    h_r: float,
    n_theta: int,
    inner_neumann: bool,
) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray, np.ndarray]:
    """Assemble the 5-point polar Laplacian for unknown rings.

    Unknowns are rings i0..n_r-1 (i0 = 0 with a Neumann inner ring, else
    1); the outer Dirichlet ring n_r is always eliminated.  Returns the
    CSR matrix together with the per-ring stencil weights needed for the
    right-hand side.
    """
    n_r = r.size - 1
    h_t = 2.0 * math.pi / n_theta
    i0 = 0 if inner_neumann else 1
    rings = np.arange(i0, n_r)
    nu = rings.size * n_theta

    r_u = r[rings]
    c_dn = 1.0 / h_r**2 - 1.0 / (2.0 * h_r * r_u)
    c_up = 1.0 / h_r**2 + 1.0 / (2.0 * h_r * r_u)
    c_th = 1.0 / (h_t**2 * r_u**2)
    c_di = -2.0 / h_r**2 - 2.0 / (h_t**2 * r_u**2)
    if inner_neumann:
        # mirrored ghost ring: u_{-1} = u_{1}
        c_up[0] = 2.0 / h_r**2
        c_dn[0] = 0.0

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    J = np.arange(n_theta)
    for local, i in enumerate(rings):
        base = local * n_theta
        me = base + J
        rows += [me, me, me]
        cols += [me, base + (J + 1) % n_theta, base + (J - 1) % n_theta]
        vals += [
            np.full(n_theta, c_di[local]),
            np.full(n_theta, c_th[local]),
            np.full(n_theta, c_th[local]),
        ]
        if local > 0:
            rows.append(me)
            cols.append(me - n_theta)
            vals.append(np.full(n_theta, c_dn[local]))
        if local < rings.size - 1:
            rows.append(me)
            cols.append(me + n_theta)
            vals.append(np.full(n_theta, c_up[local]))
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nu, nu),
    )
    return A, c_dn, c_up, rings


def _polar_solve(
    r: np.ndarray,
    h_r: float,
    n_theta: int,
    inner_neumann: bool,
    inner_values: np.ndarray | None,
    outer_values: np.ndarray,
) -> np.ndarray:
    """Solve one Dirichlet/Neumann polar problem; returns all rings."""
    n_r = r.size - 1
    A, c_dn, c_up, rings = _polar_matrix(r, h_r, n_theta, inner_neumann)
    b = np.zeros(rings.size * n_theta)
    if not inner_neumann:
        b[:n_theta] -= c_dn[0] * inner_values
    b[-n_theta:] -= c_up[-1] * outer_values
    sol = spsolve(A, b)
    u = np.empty((n_r + 1, n_theta))
    u[rings[0] : n_r, :] = sol.reshape(rings.size, n_theta)
    u[n_r, :] = outer_values
    if not inner_neumann:
        u[0, :] = inner_values
    return u


def _inner_flux(u: np.ndarray, r0: float, h_r: float, n_theta: int) -> float:
    """Discrete flux through the inner circle, one-sided second order."""
    h_t = 2.0 * math.pi / n_theta
    du = (-3.0 * u[0, :] + 4.0 * u[1, :] - u[2, :]) / (2.0 * h_r)
    return float(r0 * h_t * np.sum(du))


def polar_laplace_solve_2d(
    r0: float,
    eps: float,
    phi_values: Sequence[float],
    problem: str,
    n_r: int,
    n_theta: int,
) -> PolarField2D:
    """Five-point FD solution of either shell problem in d = 2.

    ``phi_values`` samples the outer boundary data at the uniform angles
    theta_j = 2 pi j / n_theta.  The insulated problem closes the inner
    ring with a mirrored ghost; the perfect problem solves twice (zero and
    unit inner trace) and picks the inner constant that kills the discrete
    flux through the inner circle.
    """
    if problem not in ("insulated", "perfect"):
        raise ValueError(f"problem must be 'insulated' or 'perfect', got {problem!r}")
    if n_r < 8:
        raise ValueError("n_r must be >= 8")
    if n_theta < 4 or n_theta % 2:
        raise ValueError("n_theta must be an even number >= 4")
    phi = np.asarray(phi_values, dtype=float)
    if phi.shape != (n_theta,):
        raise ValueError(f"phi_values must have shape ({n_theta},), got {phi.shape}")
    if not (r0 > 0.0 and eps > 0.0):
        raise ValueError("need r0 > 0 and eps > 0")

    h_r = eps / n_r
    r = r0 + h_r * np.arange(n_r + 1)
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta

    if problem == "insulated":
        u = _polar_solve(r, h_r, n_theta, inner_neumann=True, inner_values=None, outer_values=phi)
        return PolarField2D(u=u, r_nodes=r, theta_nodes=theta, inner_constant=None)

    w0 = _polar_solve(r, h_r, n_theta, False, np.zeros(n_theta), phi)
    w1 = _polar_solve(r, h_r, n_theta, False, np.ones(n_theta), np.zeros(n_theta))
    f0 = _inner_flux(w0, r0, h_r, n_theta)
    f1 = _inner_flux(w1, r0, h_r, n_theta)
    if f1 == 0.0:
        raise ArithmeticError("degenerate unit-trace solve: zero discrete flux")
    C = -f0 / f1
    return PolarField2D(u=w0 + C * w1, r_nodes=r, theta_nodes=theta, inner_constant=C)


# ---------------------------------------------------------------------------
# pointwise stencils and surface flux
# ---------------------------------------------------------------------------


def discrete_laplacian_residual(
    evaluator: Callable[[np.ndarray], np.ndarray],
    x: Sequence[float],
    h: float,
    shell: tuple[float, float] | None = None,
) -> float:
    """(2d+1)-point discrete Laplacian of a scalar field at one point.

    ``evaluator`` maps an (N, d) array to N values.  When ``shell``
    = (r_inner, r_outer) is given, every stencil point must stay strictly
    inside that open shell, otherwise the call refuses rather than sample
    the field where it is undefined.
    """
    x = np.asarray(x, dtype=float)
    if h <= 0.0:
        raise ValueError("step must be > 0")
    d = x.size
    pts = np.concatenate([x[None, :] + h * np.eye(d), x[None, :] - h * np.eye(d), x[None, :]])
    if shell is not None:
        r_in, r_out = shell
        radii = np.linalg.norm(pts, axis=1)
        if float(np.min(radii)) <= r_in or float(np.max(radii)) >= r_out:
            raise ValueError(
                f"stencil of step {h} at |x| = {np.linalg.norm(x):.6g} leaves the "
                f"open shell ({r_in:.6g}, {r_out:.6g})"
            )
    vals = np.asarray(evaluator(pts), dtype=float)
    return float((np.sum(vals[: 2 * d]) - 2.0 * d * vals[2 * d]) / h**2)


def flux_integral(
    grad_evaluator: Callable[[np.ndarray], np.ndarray],
    r: float,
    rule: QuadratureRule,
) -> float:
    """Net flux of a vector field through the sphere of radius r.

    r^{d-1} sum_n w_n  xi_n . grad(r xi_n): quadrature of the normal
    component over the sphere, scaled to surface measure at radius r.
    """
    if r <= 0.0:
        raise ValueError("flux radius must be > 0")
    pts = r * rule.nodes
    g = np.asarray(grad_evaluator(pts), dtype=float)
    if g.shape != rule.nodes.shape:
        raise ValueError(f"gradient evaluator returned shape {g.shape}")
    normal = np.sum(g * rule.nodes, axis=1)
    return float(r ** (rule.d - 1) * np.sum(rule.weights * normal))

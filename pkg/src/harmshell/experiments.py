"""Shell-width sweeps and the scaling laws they reveal.

The headline behaviors: as the shell width eps shrinks, the largest field
strength sup |grad u| stays bounded for the insulated problem but blows
up like 1/eps for the perfect problem.  ``epsilon_sweep`` measures both
on a tensor grid of sampling radii times quadrature directions, and
``fit_power_law`` turns a sweep into a log-log exponent.
``taylor_gap_check`` verifies the first-order Taylor behavior of the two
radial gaps that drive those rates.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boundary_data import BoundaryFunction, expand, recommended_exactness
from .exact_solutions import (
    Geometry,
    InsulatedSolution,
    PerfectSolution,
    rho_diff,
    solve_insulated,
    solve_perfect,
)
from .sphere_basis import BasisSpec, QuadratureRule, build_quadrature

_PROBLEMS = ("insulated", "perfect")


@dataclass(frozen=True)
class SweepRow:
    """One shell width: the measured field supremum and bookkeeping."""

    eps: float
    sup_grad: float
    C0: float | None
    m: int
    sample_count: int


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (log eps, log sup_grad)."""

    exponent: float
    intercept: float
    max_log_residual: float


@dataclass(frozen=True)
class TaylorGapRow:
    eps: float
    delta1_residual: float
    delta2_residual: float


@dataclass(frozen=True)
class TaylorGapReport:
    """First-order Taylor residuals of the two radial gaps, with fitted orders."""

    d: int
    k: int
    r0: float
    rows: tuple[TaylorGapRow, ...]
    order1: float
    order2: float


def default_thread_count() -> int:
    """Worker-pool width: HARMSHELL_THREADS if set, else the CPU count."""
    env = os.environ.get("HARMSHELL_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"HARMSHELL_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValueError("HARMSHELL_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def sup_grad(
    solution: InsulatedSolution | PerfectSolution,
    radial_samples: int,
    rule: QuadratureRule,
) -> tuple[float, int]:
    """Max |grad u| over the tensor grid of radii times rule directions.

    Radii space uniformly across the closed shell (both boundary spheres
    included — the perfect problem peaks exactly on the inner one).
    Returns (supremum, number of grid points examined).
    """
    if radial_samples < 3:
        raise ValueError("need at least 3 radial samples")
    geom = solution.geom
    radii = geom.r0 + geom.eps * np.arange(radial_samples) / (radial_samples - 1.0)
    grad = solution.gradient_grid(radii, rule)
    norms = np.sqrt(np.sum(grad * grad, axis=2))
    return float(np.max(norms)), int(norms.size)


def _sweep_row(
    problem: str,
    d: int,
    r0: float,
    phi: BoundaryFunction,
    eps: float,
    m: int,
    radial_samples: int,
    rule: QuadratureRule,
) -> SweepRow:
    geom = Geometry(d=d, r0=r0, eps=eps)
    coeffs = expand(phi, BasisSpec(d, m), rule)
    if problem == "insulated":
        sol = solve_insulated(geom, coeffs)
        C0 = None
    else:
        sol = solve_perfect(geom, coeffs)
        C0 = sol.C0
    sup, count = sup_grad(sol, radial_samples, rule)
    return SweepRow(eps=eps, sup_grad=sup, C0=C0, m=m, sample_count=count)


def epsilon_sweep(
    problem: str,
    d: int,
    r0: float,
    phi: BoundaryFunction,
    eps_list: Sequence[float],
    m: int = 12,
    radial_samples: int = 33,
    threads: int | None = None,
) -> list[SweepRow]:
    """sup |grad u| across a strictly decreasing list of shell widths.

    Rows are independent and solved on a thread pool (numpy releases the
    GIL in the heavy kernels); results keep the input order regardless of
    completion order, so the output is deterministic.
    """
    if problem not in _PROBLEMS:
        raise ValueError(f"problem must be one of {_PROBLEMS}, got {problem!r}")
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) < 3:
        raise ValueError("a sweep needs at least 3 widths")
    if any(not e > 0.0 for e in eps_arr):
        raise ValueError("shell widths must be > 0")
    if not all(a > b for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValueError("shell widths must be strictly decreasing")
    rule = build_quadrature(d, recommended_exactness(phi, m))
    workers = threads if threads is not None else default_thread_count()
    if workers < 1:
        raise ValueError("threads must be >= 1")
    if workers == 1:
        return [
            _sweep_row(problem, d, r0, phi, e, m, radial_samples, rule) for e in eps_arr
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_sweep_row, problem, d, r0, phi, e, m, radial_samples, rule)
            for e in eps_arr
        ]
        return [f.result() for f in futures]


def fit_power_law(rows: Sequence[SweepRow]) -> PowerLawFit:
    """Fit sup_grad ~ intercept * eps^exponent by least squares in logs."""
    if len(rows) < 3:
        raise ValueError("a power-law fit needs at least 3 rows")
    sups = np.array([row.sup_grad for row in rows])
    if np.any(sups <= 0.0):
        raise ValueError("sup_grad must be positive to fit a power law")
    x = np.log([row.eps for row in rows])
    y = np.log(sups)
    exponent, intercept = np.polyfit(x, y, 1)
    resid = y - (exponent * x + intercept)
    return PowerLawFit(
        exponent=float(exponent),
        intercept=float(intercept),
        max_log_residual=float(np.max(np.abs(resid))),
    )


def running_exponents(rows: Sequence[SweepRow]) -> list[float]:
    """Pairwise log-slope between consecutive sweep rows; nan for the first."""
    out = [math.nan]
    for prev, cur in zip(rows, rows[1:]):
        out.append(
            math.log(cur.sup_grad / prev.sup_grad) / math.log(cur.eps / prev.eps)
        )
    return out


def taylor_gap_check(
    d: int,
    r0: float,
    eps_list: Sequence[float],
    k: int = 1,
) -> TaylorGapReport:
    """First-order Taylor residuals of the sweep-driving radial gaps.

    Gap 1 is rho_d(r0) - rho_d(r0+eps) with leading term chi_d r0^{1-d} eps
    (chi_2 = 1); gap 2 is rho_{4-d-2k}(r0+eps) - rho_{4-d-2k}(r0) with
    leading term (d+2k-2) r0^{d+2k-3} eps.  Residuals after subtracting
    the leading terms must shrink quadratically; the report carries the
    fitted orders.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if k < 1:
        raise ValueError("degree must be >= 1")
    if r0 <= 0.0:
        raise ValueError("r0 must be > 0")
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) < 3:
        raise ValueError("need at least 3 widths")
    if not all(a > b > 0.0 for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValueError("shell widths must be strictly decreasing and positive")
    chi = 1.0 if d == 2 else float(d - 2)
    p = d + 2 * k - 2
    rows = []
    res1 = []
    res2 = []
    for eps in eps_arr:
        R = r0 + eps
        gap1 = rho_diff(d, r0, R)
        lead1 = chi * r0 ** (1.0 - d) * eps
        gap2 = rho_diff(4 - d - 2 * k, R, r0)
        lead2 = p * r0 ** (p - 1.0) * eps
        r1 = gap1 - lead1
        r2 = gap2 - lead2
        rows.append(TaylorGapRow(eps=eps, delta1_residual=r1, delta2_residual=r2))
        res1.append(abs(r1))
        res2.append(abs(r2))
    if min(res1) <= 0.0 or min(res2) <= 0.0:
        raise ArithmeticError("Taylor residual vanished; cannot fit an order")
    x = np.log(eps_arr)
    order1 = float(np.polyfit(x, np.log(res1), 1)[0])
    order2 = float(np.polyfit(x, np.log(res2), 1)[0])
    return TaylorGapReport(
        d=d, k=k, r0=r0, rows=tuple(rows), order1=order1, order2=order2
    )

"""Boundary data on the outer sphere and its harmonic expansion.

A small catalog of smooth closed-form functions (plus a sampled kind bound
to a specific quadrature rule) covers everything the solvers and sweeps
need.  Expansion coefficients come from discrete projection

    a_i = sum_n w_n phi(xi_n) Y_i(xi_n)

against a rule whose exactness at least doubles the truncation degree, so
the projection is idempotent on trigonometric/polynomial data of degree
within the basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .sphere_basis import (
    BasisSpec,
    HarmonicIndex,
    QuadratureRule,
    SpherePoint,
    basis_matrix,
    enumerate_basis,
)

_KINDS = ("constant", "coordinate", "polynomial", "exp_coordinate", "gaussian_bump", "sampled")


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """One member of the boundary-data catalog.

    Use the factory functions (:func:`constant`, :func:`coordinate`, ...)
    rather than the constructor.  ``values`` evaluates on an (N, d) array
    of unit vectors; the sampled kind only accepts the nodes of the rule
    it was built from, since no interpolation is defined for it.
    """

    kind: str
    value: float = 0.0
    index: int = 0
    terms: tuple[tuple[float, tuple[int, ...]], ...] = ()
    center: np.ndarray | None = None
    width: float = 0.0
    node_ref: np.ndarray | None = None
    node_values: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")

    def values(self, points) -> np.ndarray:
        if isinstance(points, SpherePoint):
            return self.values(points.cartesian[None, :])[0]
        X = np.asarray(points, dtype=float)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        d = X.shape[1]
        if self.kind == "constant":
            out = np.full(X.shape[0], self.value)
        elif self.kind == "coordinate":
            self._check_index(d)
            out = X[:, self.index - 1].copy()
        elif self.kind == "polynomial":
            out = np.zeros(X.shape[0])
            for coeff, expo in self.terms:
                if len(expo) > d:
                    raise ValueError(
                        f"polynomial term uses coordinate {len(expo)} in dimension {d}"
                    )
                term = np.full(X.shape[0], coeff)
                for i, p in enumerate(expo):
                    if p:
                        term = term * X[:, i] ** p
                out += term
        elif self.kind == "exp_coordinate":
            self._check_index(d)
            out = np.exp(X[:, self.index - 1])
        elif self.kind == "gaussian_bump":
            if self.center is None or self.center.size != d:
                raise ValueError("gaussian center dimension mismatch")
            diff = X - self.center[None, :]
            out = np.exp(-np.sum(diff * diff, axis=1) / (self.width * self.width))
        else:  # sampled
            if self.node_ref is None:
                raise ValueError("sampled boundary data lost its rule nodes")
            if X.shape != self.node_ref.shape or not np.array_equal(X, self.node_ref):
                raise ValueError(
                    "sampled boundary data can only be evaluated at the quadrature "
                    "nodes it was sampled on (no interpolation)"
                )
            out = self.node_values.copy()
        return out[0] if single else out

    def _check_index(self, d: int) -> None:
        if not 1 <= self.index <= d:
            raise ValueError(f"coordinate index {self.index} out of range 1..{d}")

    @property
    def polynomial_degree(self) -> int | None:
        """Total degree when the data is polynomial, else None."""
        if self.kind == "constant":
            return 0
        if self.kind == "coordinate":
            return 1
        if self.kind == "polynomial":
            return max((sum(e) for _, e in self.terms), default=0)
        return None


def constant(c: float) -> BoundaryFunction:
    return BoundaryFunction(kind="constant", value=float(c))


def coordinate(i: int) -> BoundaryFunction:
    """phi(xi) = xi_i with 1-based coordinate index."""
    if i < 1:
        raise ValueError("coordinate index is 1-based")
    return BoundaryFunction(kind="coordinate", index=int(i))


def polynomial(terms: Sequence[tuple[float, Sequence[int]]]) -> BoundaryFunction:
    """phi(xi) = sum_j c_j * prod_i xi_i^{e_ij}; exponents nonnegative ints."""
    packed = []
    for coeff, expo in terms:
        expo = tuple(int(e) for e in expo)
        if any(e < 0 for e in expo):
            raise ValueError("polynomial exponents must be >= 0")
        packed.append((float(coeff), expo))
    if not packed:
        raise ValueError("polynomial needs at least one term")
    return BoundaryFunction(kind="polynomial", terms=tuple(packed))


def exp_coordinate(i: int) -> BoundaryFunction:
    """phi(xi) = exp(xi_i)."""
    if i < 1:
        raise ValueError("coordinate index is 1-based")
    return BoundaryFunction(kind="exp_coordinate", index=int(i))


def gaussian_bump(center: Sequence[float], width: float) -> BoundaryFunction:
    """phi(xi) = exp(-|xi - p|^2 / w^2) around a unit vector p."""
    center = np.asarray(center, dtype=float)
    if width <= 0.0:
        raise ValueError("gaussian width must be > 0")
    if abs(float(np.linalg.norm(center)) - 1.0) > 1e-9:
        raise ValueError("gaussian center must sit on the unit sphere")
    return BoundaryFunction(kind="gaussian_bump", center=center, width=float(width))


def sampled(rule: QuadratureRule, values: Sequence[float]) -> BoundaryFunction:
    """Tabulated data at the nodes of one quadrature rule."""
    vals = np.asarray(values, dtype=float)
    if vals.shape != (rule.n_nodes,):
        raise ValueError(
            f"sampled data needs {rule.n_nodes} values, got shape {vals.shape}"
        )
    return BoundaryFunction(
        kind="sampled", node_ref=rule.nodes, node_values=vals.copy()
    )


def smooth_catalog(d: int) -> list[BoundaryFunction]:
    """The standard closed-form test battery for dimension d."""
    funcs = [
        constant(2.5),
        coordinate(min(d, 3)),
        polynomial([(1.0, (2,)), (-0.5, (1, 1)), (0.25, ())]),
        exp_coordinate(1),
        gaussian_bump(np.eye(d)[0], 1.0),
    ]
    return funcs


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExpansionCoefficients:
    """Coefficient vector against an enumerated basis, plus its provenance.

    ``values[i]`` matches ``basis[i]``; the quadrature rule that produced
    the projection is retained because downstream solvers reuse it for
    sphere averages.
    """

    spec: BasisSpec
    basis: tuple[HarmonicIndex, ...]
    values: np.ndarray
    rule: QuadratureRule

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def max_degree(self) -> int:
        return self.spec.max_degree

    @property
    def degrees(self) -> np.ndarray:
        return np.array([idx.k for idx in self.basis])

    def coefficient(self, idx: HarmonicIndex) -> float:
        for pos, b in enumerate(self.basis):
            if b == idx:
                return float(self.values[pos])
        raise KeyError(f"{idx} not in expansion")


def expand(phi: BoundaryFunction, spec: BasisSpec, rule: QuadratureRule) -> ExpansionCoefficients:
    """Project boundary data onto all harmonics of degree <= spec.max_degree.

    Requires rule exactness >= 2 * max_degree so that the Gram matrix of
    the retained basis is the identity; a Parseval check (coefficient
    energy cannot exceed the quadrature energy of phi by more than 1e-8)
    guards against aliasing from a rule that is too coarse for the data.
    """
    if rule.d != spec.d:
        raise ValueError(f"rule dimension {rule.d} != spec dimension {spec.d}")
    if rule.exactness_degree < 2 * spec.max_degree:
        raise ValueError(
            f"rule exactness {rule.exactness_degree} is below 2*m = {2 * spec.max_degree}"
        )
    basis = tuple(enumerate_basis(spec))
    B = basis_matrix(basis, rule.nodes)
    vals = phi.values(rule.nodes)
    weighted = rule.weights * vals
    # Fixed-order pairwise reduction: keeps byte-identical output across
    # BLAS builds and thread counts.
    coeffs = (B * weighted[None, :]).sum(axis=1)
    energy = float(coeffs @ coeffs)
    data_energy = float(np.sum(rule.weights * vals * vals))
    if energy > data_energy + 1e-8:
        raise ValueError(
            f"projection energy {energy:.6e} exceeds data energy {data_energy:.6e}; "
            "quadrature rule is too coarse for this boundary data"
        )
    return ExpansionCoefficients(spec=spec, basis=basis, values=coeffs, rule=rule)


def reconstruct(coeffs: ExpansionCoefficients, points) -> float | np.ndarray:
    """Evaluate the truncated series sum_i a_i Y_i at unit points."""
    if isinstance(points, SpherePoint):
        return float(reconstruct(coeffs, points.cartesian[None, :])[0])
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    B = basis_matrix(coeffs.basis, pts)
    out = (coeffs.values[:, None] * B).sum(axis=0)
    return float(out[0]) if single else out


def truncation_error(coeffs: ExpansionCoefficients, phi: BoundaryFunction, samples) -> float:
    """max |reconstruction - phi| over a fixed sample set of unit points."""
    if isinstance(samples, QuadratureRule):
        samples = samples.nodes
    pts = np.asarray(samples, dtype=float)
    rec = reconstruct(coeffs, pts)
    exact = phi.values(pts)
    return float(np.max(np.abs(rec - exact)))


def coefficient_energy(coeffs: ExpansionCoefficients) -> float:
    """sum_i a_i^2 — equals the quadrature energy of phi for resolved data."""
    return float(coeffs.values @ coeffs.values)


def recommended_exactness(phi: BoundaryFunction, m: int) -> int:
    """Quadrature exactness policy for projecting phi to degree m.

    Polynomial data of degree p needs exact products Y_i * phi, i.e.
    m + max(p, m); anything else gets the 2m + 8 margin that the smooth
    catalog resolves to far below coefficient-level tolerances.
    """
    p = phi.polynomial_degree
    if p is None:
        return 2 * m + 8
    return m + max(p, m)

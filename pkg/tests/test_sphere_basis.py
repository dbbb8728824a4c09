"""Unit tests for the hyperspherical harmonic basis."""

import math

import numpy as np
import pytest

from harmshell import sphere_basis as sb


def unit_points(d: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# counting and enumeration
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "d,area",
    [
        (2, 2.0 * math.pi),
        (3, 4.0 * math.pi),
        (4, 2.0 * math.pi**2),
        (5, 8.0 * math.pi**2 / 3.0),
    ],
)
def test_surface_area(d, area):
    assert sb.surface_area(d) == pytest.approx(area, rel=1e-15)


@pytest.mark.parametrize("k", range(0, 9))
def test_space_dims_low_dimensions(k):
    assert sb.harmonic_space_dim(k, 2) == (1 if k == 0 else 2)
    assert sb.harmonic_space_dim(k, 3) == 2 * k + 1
    assert sb.harmonic_space_dim(k, 4) == (k + 1) ** 2
    assert sb.harmonic_space_dim(k, 5) == (k + 1) * (k + 2) * (2 * k + 3) // 6


def test_space_dim_matches_polynomial_count():
    # dim of degree-k harmonics = #monomials(k) - #monomials(k-2)
    for d in range(2, 9):
        for k in range(0, 12):
            full = math.comb(k + d - 1, d - 1)
            lower = math.comb(k - 2 + d - 1, d - 1) if k >= 2 else 0
            assert sb.harmonic_space_dim(k, d) == full - lower


def test_space_dim_is_exact_integer():
    val = sb.harmonic_space_dim(30, 8)
    assert isinstance(val, int)
    assert val == math.comb(30 + 7, 7) - math.comb(28 + 7, 7)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_enumeration_counts(d):
    spec = sb.BasisSpec(d, 6)
    basis = sb.enumerate_basis(spec)
    assert len(basis) == sum(sb.harmonic_space_dim(k, d) for k in range(7))
    per_degree = {}
    for idx in basis:
        per_degree[idx.k] = per_degree.get(idx.k, 0) + 1
    for k in range(7):
        assert per_degree[k] == sb.harmonic_space_dim(k, d)


def test_canonical_order_d3():
    basis = sb.enumerate_basis(sb.BasisSpec(3, 2))
    chains = [idx.chain for idx in basis]
    assert chains == [
        (0, 0),
        (1, 0), (1, 1), (1, -1),
        (2, 0), (2, 1), (2, -1), (2, 2), (2, -2),
    ]
    assert [idx.flat_l for idx in basis] == [1, 1, 2, 3, 1, 2, 3, 4, 5]


def test_canonical_order_d2():
    basis = sb.enumerate_basis(sb.BasisSpec(2, 3))
    assert [idx.chain for idx in basis] == [
        (0,), (1,), (-1,), (2,), (-2,), (3,), (-3,)
    ]


def test_chain_validation():
    with pytest.raises(ValueError):
        sb.HarmonicIndex(3, 2, (2, 3), 1)  # increasing interior entry
    with pytest.raises(ValueError):
        sb.HarmonicIndex(3, 2, (1, 0), 1)  # leading entry must equal k
    with pytest.raises(ValueError):
        sb.HarmonicIndex(4, 2, (2, 1), 1)  # wrong chain length
    with pytest.raises(ValueError):
        sb.BasisSpec(1, 4)
    with pytest.raises(ValueError):
        sb.BasisSpec(3, sb.MAX_DEGREE + 1)
    with pytest.raises(ValueError):
        sb.BasisSpec(sb.MAX_DIM + 1, 2)


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_angle_round_trip(d):
    pts = unit_points(d, 40, seed=d)
    for row in pts:
        ang = sb.cartesian_to_angles(row)
        back = sb.angles_to_cartesian(ang)
        assert np.max(np.abs(back - row)) < 1e-12


def test_sphere_point_validation():
    with pytest.raises(ValueError):
        sb.SpherePoint.from_cartesian(np.array([1.0, 1.0]))
    p = sb.SpherePoint.from_cartesian(np.array([0.6, 0.8]))
    assert np.linalg.norm(p.cartesian) == pytest.approx(1.0, abs=1e-14)
    q = sb.SpherePoint.from_angles((0.4, 1.1))
    assert np.linalg.norm(q.cartesian) == pytest.approx(1.0, abs=1e-14)
    assert q.to_angles() == pytest.approx((0.4, 1.1), abs=1e-12)


# ---------------------------------------------------------------------------
# values: orthonormality, addition theorem, explicit low degrees
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("d,m", [(2, 6), (3, 5), (4, 4), (5, 3)])
def test_gram_matrix_is_identity(d, m):
    spec = sb.BasisSpec(d, m)
    rule = sb.build_quadrature(d, 2 * m)
    basis = sb.enumerate_basis(spec)
    B = sb.basis_matrix(basis, rule.nodes)
    G = (B * rule.weights[None, :]) @ B.T
    assert np.max(np.abs(G - np.eye(len(basis)))) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("k", [0, 1, 3, 5])
def test_addition_theorem_diagonal(d, k):
    # sum_l Y_{k,l}(x)^2 equals N_{k,d} / |S^{d-1}| at every point
    basis = [idx for idx in sb.enumerate_basis(sb.BasisSpec(d, k)) if idx.k == k]
    pts = unit_points(d, 25, seed=10 * d + k)
    B = sb.basis_matrix(basis, pts)
    target = sb.harmonic_space_dim(k, d) / sb.surface_area(d)
    assert np.max(np.abs(np.sum(B**2, axis=0) - target)) < 1e-10


def test_degree_zero_is_constant():
    for d in (2, 3, 4, 5):
        idx = sb.enumerate_basis(sb.BasisSpec(d, 0))[0]
        pts = unit_points(d, 7, seed=d)
        vals = sb.basis_matrix([idx], pts)[0]
        assert np.allclose(vals, 1.0 / math.sqrt(sb.surface_area(d)), atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_degree_one_spans_coordinates(d):
    # canonical order of the degree-1 block is x_1, ..., x_d up to the
    # shared normalization sqrt(d / |S^{d-1}|)
    basis = [idx for idx in sb.enumerate_basis(sb.BasisSpec(d, 1)) if idx.k == 1]
    pts = unit_points(d, 30, seed=3 * d)
    B = sb.basis_matrix(basis, pts)
    scale = math.sqrt(d / sb.surface_area(d))
    for j in range(d):
        assert np.max(np.abs(B[j] - scale * pts[:, j])) < 1e-12


def test_d2_values_are_trig_modes():
    theta = np.linspace(0.3, 6.0, 11)
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    basis = sb.enumerate_basis(sb.BasisSpec(2, 3))
    B = sb.basis_matrix(basis, pts)
    expected = [np.full_like(theta, 1.0 / math.sqrt(2.0 * math.pi))]
    for k in (1, 2, 3):
        expected.append(np.cos(k * theta) / math.sqrt(math.pi))
        expected.append(np.sin(k * theta) / math.sqrt(math.pi))
    assert np.max(np.abs(B - np.stack(expected))) < 1e-12


def test_eval_Y_matches_matrix():
    basis = sb.enumerate_basis(sb.BasisSpec(4, 3))
    pts = unit_points(4, 9, seed=7)
    B = sb.basis_matrix(basis, pts)
    for i in (0, 5, len(basis) - 1):
        p = sb.SpherePoint.from_cartesian(pts[3])
        assert sb.eval_Y(basis[i], p) == pytest.approx(B[i, 3], rel=1e-13, abs=1e-13)


# ---------------------------------------------------------------------------
# surface gradients
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("d,m", [(2, 5), (3, 5), (4, 4), (5, 3)])
def test_gradient_is_tangent(d, m):
    basis = sb.enumerate_basis(sb.BasisSpec(d, m))
    pts = unit_points(d, 12, seed=m + d)
    _, grads = sb.basis_and_grad_matrix(basis, pts)
    radial = np.einsum("bnd,nd->bn", grads, pts)
    assert np.max(np.abs(radial)) < 1e-11


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gradient_matches_geodesic_difference(d):
    # directional derivative along a great circle: second-order central
    # difference with points kept exactly on the sphere
    m = 4 if d < 5 else 3
    basis = sb.enumerate_basis(sb.BasisSpec(d, m))
    pts = unit_points(d, 6, seed=50 + d)
    rng = np.random.default_rng(99 + d)
    _, grads = sb.basis_and_grad_matrix(basis, pts)
    h = 1e-5
    for n in range(pts.shape[0]):
        x = pts[n]
        t = rng.standard_normal(d)
        t -= (t @ x) * x
        t /= np.linalg.norm(t)
        plus = math.cos(h) * x + math.sin(h) * t
        minus = math.cos(h) * x - math.sin(h) * t
        Bp = sb.basis_matrix(basis, plus[None, :])[:, 0]
        Bm = sb.basis_matrix(basis, minus[None, :])[:, 0]
        fd = (Bp - Bm) / (2.0 * math.sin(h))
        exact = grads[:, n, :] @ t
        assert np.max(np.abs(fd - exact)) < 1e-6


def test_gradient_eigenvalue_identity():
    # integral of |grad_S Y|^2 over the sphere equals k (k + d - 2)
    d, m = 3, 5
    rule = sb.build_quadrature(d, 2 * m + 2)
    basis = sb.enumerate_basis(sb.BasisSpec(d, m))
    _, grads = sb.basis_and_grad_matrix(basis, rule.nodes)
    for i, idx in enumerate(basis):
        energy = float(np.sum(rule.weights * np.sum(grads[i] ** 2, axis=1)))
        assert energy == pytest.approx(idx.k * (idx.k + d - 2), abs=1e-9)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def _sphere_monomial_integral(alpha) -> float:
    if any(a % 2 for a in alpha):
        return 0.0
    beta = [(a + 1) / 2.0 for a in alpha]
    return 2.0 * math.prod(math.gamma(b) for b in beta) / math.gamma(sum(beta))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_quadrature_integrates_monomials_exactly(d):
    target = 7
    rule = sb.build_quadrature(d, target)
    assert rule.exactness_degree >= target

    def all_alphas(total, slots):
        if slots == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in all_alphas(total - first, slots - 1):
                yield (first,) + rest

    for total in range(target + 1):
        for alpha in all_alphas(total, d):
            quad = float(
                np.sum(rule.weights * np.prod(rule.nodes ** np.array(alpha), axis=1))
            )
            assert quad == pytest.approx(
                _sphere_monomial_integral(alpha), rel=1e-12, abs=1e-12
            )


def test_quadrature_weights_positive_and_sum_to_area():
    for d in (2, 3, 4, 5):
        rule = sb.build_quadrature(d, 8)
        assert np.all(rule.weights > 0)
        assert float(np.sum(rule.weights)) == pytest.approx(
            sb.surface_area(d), rel=1e-13
        )


def test_quadrature_node_budget():
    with pytest.raises(ValueError):
        sb.build_quadrature(8, 2 * sb.MAX_DEGREE)

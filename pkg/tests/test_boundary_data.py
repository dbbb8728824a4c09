"""Unit tests for boundary data and harmonic expansions."""

import math

import numpy as np
import pytest

from harmshell import boundary_data as bd
from harmshell import sphere_basis as sb


def unit_points(d: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# factories and evaluation
# ---------------------------------------------------------------------------


def test_constant_and_coordinate():
    pts = unit_points(3, 11, seed=1)
    assert np.allclose(bd.constant(2.5).values(pts), 2.5)
    assert np.allclose(bd.coordinate(2).values(pts), pts[:, 1])
    point = sb.SpherePoint.from_cartesian(pts[0])
    assert bd.coordinate(3).values(point) == pytest.approx(pts[0, 2])
    flat = bd.coordinate(1).values(pts[4])
    assert flat == pytest.approx(pts[4, 0])


def test_polynomial_values():
    pts = unit_points(3, 15, seed=2)
    # x1^2 - 0.5 x1 x2 + 0.25
    phi = bd.polynomial([(1.0, (2,)), (-0.5, (1, 1)), (0.25, ())])
    expected = pts[:, 0] ** 2 - 0.5 * pts[:, 0] * pts[:, 1] + 0.25
    assert np.max(np.abs(phi.values(pts) - expected)) < 1e-14
    assert phi.polynomial_degree == 2


def test_exp_and_gaussian():
    pts = unit_points(4, 9, seed=3)
    assert np.allclose(bd.exp_coordinate(2).values(pts), np.exp(pts[:, 1]))
    center = np.zeros(4)
    center[0] = 1.0
    g = bd.gaussian_bump(center, 0.7)
    expected = np.exp(-np.sum((pts - center) ** 2, axis=1) / 0.7**2)
    assert np.allclose(g.values(pts), expected)
    assert g.polynomial_degree is None
    with pytest.raises(ValueError):
        bd.gaussian_bump(2.0 * center, 0.7)  # center off the sphere
    with pytest.raises(ValueError):
        bd.gaussian_bump(center, 0.0)


def test_sampled_requires_matching_nodes():
    rule = sb.build_quadrature(3, 8)
    vals = np.cos(rule.nodes[:, 0])
    phi = bd.sampled(rule, vals)
    assert np.allclose(phi.values(rule.nodes), vals)
    other = sb.build_quadrature(3, 10)
    with pytest.raises(ValueError):
        phi.values(other.nodes)


def test_catalog_contents():
    for d in (2, 3, 4):
        catalog = bd.smooth_catalog(d)
        assert len(catalog) == 5
        kinds = [phi.kind for phi in catalog]
        assert kinds == ["constant", "coordinate", "polynomial",
                         "exp_coordinate", "gaussian_bump"]
        pts = unit_points(d, 5, seed=d)
        for phi in catalog:
            assert phi.values(pts).shape == (5,)


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


def test_expand_coordinate_gives_single_mode():
    spec = sb.BasisSpec(3, 6)
    rule = sb.build_quadrature(3, 14)
    coeffs = bd.expand(bd.coordinate(3), spec, rule)
    # x3 pairs with the sine azimuth chain (1, -1); all else vanishes
    expected = math.sqrt(4.0 * math.pi / 3.0)
    for idx, a in zip(coeffs.basis, coeffs.values):
        if idx.chain == (1, -1):
            assert a == pytest.approx(expected, rel=1e-13)
        else:
            assert abs(a) < 1e-13
    idx = next(b for b in coeffs.basis if b.chain == (1, -1))
    assert coeffs.coefficient(idx) == pytest.approx(expected, rel=1e-13)


def test_expand_rejects_coarse_rule():
    spec = sb.BasisSpec(3, 6)
    rule = sb.build_quadrature(3, 8)  # needs exactness >= 12
    with pytest.raises(ValueError):
        bd.expand(bd.coordinate(1), spec, rule)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_polynomial_reconstruction_is_exact(d):
    # restriction of a polynomial of degree <= m equals its truncated series
    phi = bd.polynomial([(1.0, (1,)), (-0.7, (0, 2)), (0.3, (2, 1))])
    m = 4
    spec = sb.BasisSpec(d, m)
    rule = sb.build_quadrature(d, bd.recommended_exactness(phi, m))
    coeffs = bd.expand(phi, spec, rule)
    pts = unit_points(d, 50, seed=d + 20)
    recon = bd.reconstruct(coeffs, pts)
    assert np.max(np.abs(recon - phi.values(pts))) < 1e-12


def test_parseval_and_energy():
    spec = sb.BasisSpec(3, 8)
    rule = sb.build_quadrature(3, 20)
    phi = bd.coordinate(3)
    coeffs = bd.expand(phi, spec, rule)
    energy = bd.coefficient_energy(coeffs)
    # integral of x3^2 over the unit 2-sphere
    assert energy == pytest.approx(4.0 * math.pi / 3.0, rel=1e-13)
    data_energy = float(np.sum(rule.weights * phi.values(rule.nodes) ** 2))
    assert energy <= data_energy + 1e-8


def test_truncation_error_decreases():
    phi = bd.exp_coordinate(3)
    samples = sb.build_quadrature(3, 40)
    errs = []
    for m in (3, 6, 12):
        spec = sb.BasisSpec(3, m)
        rule = sb.build_quadrature(3, bd.recommended_exactness(phi, m))
        coeffs = bd.expand(phi, spec, rule)
        errs.append(bd.truncation_error(coeffs, phi, samples))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6


def test_truncation_error_accepts_plain_points():
    phi = bd.coordinate(1)
    spec = sb.BasisSpec(2, 4)
    rule = sb.build_quadrature(2, 12)
    coeffs = bd.expand(phi, spec, rule)
    pts = unit_points(2, 64, seed=5)
    assert bd.truncation_error(coeffs, phi, pts) < 1e-12


def test_sampled_expansion_matches_callable():
    rule = sb.build_quadrature(3, 20)
    spec = sb.BasisSpec(3, 6)
    smooth = bd.exp_coordinate(1)
    direct = bd.expand(smooth, spec, rule)
    tabulated = bd.expand(bd.sampled(rule, smooth.values(rule.nodes)), spec, rule)
    assert np.max(np.abs(direct.values - tabulated.values)) < 1e-14


def test_recommended_exactness():
    m = 6
    assert bd.recommended_exactness(bd.coordinate(1), m) == m + m
    cubic = bd.polynomial([(1.0, (3,))])
    assert bd.recommended_exactness(cubic, m) == m + m
    nine = bd.polynomial([(1.0, (9,))])
    assert bd.recommended_exactness(nine, m) == m + 9
    assert bd.recommended_exactness(bd.exp_coordinate(1), m) == 2 * m + 8


def test_expansion_metadata():
    spec = sb.BasisSpec(4, 3)
    rule = sb.build_quadrature(4, 14)
    coeffs = bd.expand(bd.constant(1.0), spec, rule)
    assert coeffs.d == 4
    assert coeffs.max_degree == 3
    assert coeffs.degrees.shape == (len(coeffs.basis),)
    assert coeffs.degrees[0] == 0

"""Unit tests for shell-width sweeps and scaling-law fits."""

import math

import numpy as np
import pytest

from harmshell import boundary_data as bd
from harmshell import exact_solutions as ex
from harmshell import experiments as xp
from harmshell import sphere_basis as sb

EPS_LIST = (0.2, 0.1, 0.05, 0.025, 0.0125)


def _solution(problem: str, eps: float, m: int = 12):
    geom = ex.Geometry(3, 1.0, eps)
    phi = bd.coordinate(3)
    rule = sb.build_quadrature(3, bd.recommended_exactness(phi, m))
    coeffs = bd.expand(phi, sb.BasisSpec(3, m), rule)
    solver = ex.solve_insulated if problem == "insulated" else ex.solve_perfect
    return solver(geom, coeffs), rule


# ---------------------------------------------------------------------------
# sup |grad u| measurements
# ---------------------------------------------------------------------------


def test_sup_grad_frozen_value():
    sol, rule = _solution("insulated", 0.2)
    sup, count = xp.sup_grad(sol, 33, rule)
    assert sup == pytest.approx(0.96947935368043092, rel=1e-12)
    assert count == 33 * rule.n_nodes


def test_sup_grad_perfect_peaks_at_inner_sphere():
    sol, rule = _solution("perfect", 0.1)
    sup, _ = xp.sup_grad(sol, 17, rule)
    inner = np.max(
        np.linalg.norm(sol.gradient(sol.geom.r0 * rule.nodes), axis=1)
    )
    assert sup == pytest.approx(float(inner), rel=1e-12)


def test_sup_grad_validation():
    sol, rule = _solution("insulated", 0.1)
    with pytest.raises(ValueError):
        xp.sup_grad(sol, 2, rule)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def test_perfect_sweep_blows_up_like_inverse_eps():
    rows = xp.epsilon_sweep("perfect", 3, 1.0, bd.coordinate(3), EPS_LIST, threads=1)
    assert [row.eps for row in rows] == list(EPS_LIST)
    assert rows[0].sup_grad == pytest.approx(5.8907999122302179, rel=1e-12)
    assert rows[-1].sup_grad == pytest.approx(80.40528272772832, rel=1e-12)
    fit = xp.fit_power_law(rows)
    assert -1.1 < fit.exponent < -0.9
    for row in rows:
        assert row.C0 == pytest.approx(0.0, abs=1e-12)
        assert row.m == 12
        assert row.sample_count == 33 * 338


def test_insulated_sweep_stays_bounded():
    rows = xp.epsilon_sweep("insulated", 3, 1.0, bd.coordinate(3), EPS_LIST, threads=1)
    sups = [row.sup_grad for row in rows]
    assert sups[0] == pytest.approx(0.96947935368043092, rel=1e-12)
    assert max(sups) / min(sups) < 1.5
    fit = xp.fit_power_law(rows)
    assert -0.05 < fit.exponent < 0.05
    assert all(row.C0 is None for row in rows)


def test_sweep_thread_count_does_not_change_results():
    serial = xp.epsilon_sweep(
        "perfect", 2, 1.0, bd.coordinate(2), (0.2, 0.1, 0.05), m=6, threads=1
    )
    pooled = xp.epsilon_sweep(
        "perfect", 2, 1.0, bd.coordinate(2), (0.2, 0.1, 0.05), m=6, threads=3
    )
    for a, b in zip(serial, pooled):
        assert a.sup_grad == b.sup_grad  # bitwise
        assert a.C0 == b.C0
        assert a.sample_count == b.sample_count


def test_sweep_validation():
    phi = bd.coordinate(1)
    with pytest.raises(ValueError):
        xp.epsilon_sweep("perfect", 3, 1.0, phi, (0.2, 0.1))
    with pytest.raises(ValueError):
        xp.epsilon_sweep("perfect", 3, 1.0, phi, (0.1, 0.2, 0.3))
    with pytest.raises(ValueError):
        xp.epsilon_sweep("perfect", 3, 1.0, phi, (0.2, 0.1, -0.05))
    with pytest.raises(ValueError):
        xp.epsilon_sweep("melting", 3, 1.0, phi, (0.2, 0.1, 0.05))


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------


def test_fit_power_law_recovers_synthetic_exponent():
    rows = [
        xp.SweepRow(eps=e, sup_grad=3.7 * e**-1.13, C0=None, m=4, sample_count=1)
        for e in (0.4, 0.2, 0.1, 0.05)
    ]
    fit = xp.fit_power_law(rows)
    assert fit.exponent == pytest.approx(-1.13, rel=1e-12)
    assert math.exp(fit.intercept) == pytest.approx(3.7, rel=1e-12)
    assert fit.max_log_residual < 1e-13


def test_running_exponents():
    rows = [
        xp.SweepRow(eps=e, sup_grad=2.0 * e**-1.0, C0=None, m=4, sample_count=1)
        for e in (0.4, 0.2, 0.1)
    ]
    out = xp.running_exponents(rows)
    assert math.isnan(out[0])
    assert out[1:] == pytest.approx([-1.0, -1.0], rel=1e-12)


def test_fit_validation():
    rows = [
        xp.SweepRow(eps=0.1, sup_grad=1.0, C0=None, m=1, sample_count=1),
        xp.SweepRow(eps=0.05, sup_grad=0.5, C0=None, m=1, sample_count=1),
    ]
    with pytest.raises(ValueError):
        xp.fit_power_law(rows)
    bad = rows + [xp.SweepRow(eps=0.025, sup_grad=-1.0, C0=None, m=1, sample_count=1)]
    with pytest.raises(ValueError):
        xp.fit_power_law(bad)


# ---------------------------------------------------------------------------
# Taylor gap residuals
# ---------------------------------------------------------------------------


def test_taylor_gap_frozen_orders_d2():
    report = xp.taylor_gap_check(2, 1.0, EPS_LIST, k=1)
    assert report.order1 == pytest.approx(1.9599305708299435, rel=1e-9)
    assert report.order2 == pytest.approx(2.0, abs=1e-9)
    first = report.rows[0]
    assert first.eps == 0.2
    # gap1 = log(1.2), leading term 0.2; gap2 = 1.2^2 - 1, leading 2*0.2
    assert first.delta1_residual == pytest.approx(math.log(1.2) - 0.2, rel=1e-12)
    assert first.delta2_residual == pytest.approx(0.04, rel=1e-10)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("k", [1, 2])
def test_taylor_orders_are_quadratic(d, k):
    report = xp.taylor_gap_check(d, 1.0, EPS_LIST, k=k)
    assert report.order1 >= 1.9
    assert report.order2 >= 1.9


def test_taylor_gap_off_unit_radius():
    report = xp.taylor_gap_check(3, 0.7, EPS_LIST, k=2)
    assert report.order1 >= 1.9
    assert report.order2 >= 1.9
    # leading terms carry r0 powers: check gap2 against direct arithmetic
    eps = report.rows[0].eps
    p = 3 + 2 * 2 - 2
    gap2 = (0.7 + eps) ** p - 0.7**p
    assert report.rows[0].delta2_residual == pytest.approx(
        gap2 - p * 0.7 ** (p - 1) * eps, rel=1e-10
    )


def test_taylor_validation():
    with pytest.raises(ValueError):
        xp.taylor_gap_check(1, 1.0, EPS_LIST)
    with pytest.raises(ValueError):
        xp.taylor_gap_check(3, 1.0, (0.2, 0.1))
    with pytest.raises(ValueError):
        xp.taylor_gap_check(3, 1.0, EPS_LIST, k=0)
    with pytest.raises(ValueError):
        xp.taylor_gap_check(3, -1.0, EPS_LIST)


# ---------------------------------------------------------------------------
# thread-count policy
# ---------------------------------------------------------------------------


def test_default_thread_count_env(monkeypatch):
    monkeypatch.setenv("HARMSHELL_THREADS", "7")
    assert xp.default_thread_count() == 7
    monkeypatch.setenv("HARMSHELL_THREADS", "0")
    with pytest.raises(ValueError):
        xp.default_thread_count()
    monkeypatch.setenv("HARMSHELL_THREADS", "several")
    with pytest.raises(ValueError):
        xp.default_thread_count()
    monkeypatch.delenv("HARMSHELL_THREADS")
    assert xp.default_thread_count() >= 1

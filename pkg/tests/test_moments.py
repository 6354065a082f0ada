import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

import oracles
from zerodist.ensembles import iid_density, radial_density, real_gaussian, sphere_uniform, uniform_unit_cube
from zerodist.errors import DomainError, ParameterError
from zerodist.moments import (MomentQuery, bound_for, bound_iid, bound_radial, bound_real_gaussian, bound_sphere,
                              bound_uniform_cube, rotation_moment_check, log_integral_check, log_integral_lhs, log_moment_mc,
                              log_moments_mc, moment_grid, radial_constants, random_direction, report_json,
                              report_record, wallis_closed_form, wallis_constant, wallis_integrals)
from zerodist.montecarlo import substream

N = 100_000


def _within(est, ref, nse=3.0):
    return abs(est.mean - ref) <= nse * est.se


def _triangle():
    x = np.linspace(-1, 1, 201)
    return iid_density(x, 1 - np.abs(x), M=1.0, c=1.0, rho=2.0)


def test_query_validation():
    with pytest.raises(ParameterError):
        MomentQuery(real_gaussian(), 2, [1, 1])
    with pytest.raises(ParameterError):
        MomentQuery(real_gaussian(), 2, [1, 0], nu=0.5)
    with pytest.raises(ParameterError):
        MomentQuery(real_gaussian(), 3, [1, 0])
    q = MomentQuery(real_gaussian(), 2, [0.6, 0.8j])
    assert np.allclose(q.s, [0.6, 0]) and np.allclose(q.t, [0, 0.8])


def test_mc_cube_k1():
    est = log_moment_mc(MomentQuery(uniform_unit_cube(), 1, [1]), N, 0)
    assert _within(est, 1.0)


def test_mc_sphere_k2():
    est = log_moment_mc(MomentQuery(sphere_uniform(), 2, [1, 0]), N, 1)
    assert _within(est, math.log(2))


@pytest.mark.parametrize("nu", [1, 2])
def test_mc_gaussian_k1(nu):
    est = log_moment_mc(MomentQuery(real_gaussian(), 1, [1], nu), N, 2)
    assert _within(est, oracles.abs_log_moment_gaussian_k1(nu))


def test_mc_deterministic_and_shared_sample():
    dirs = [random_direction(substream(3), 4) for _ in range(2)]
    a = log_moments_mc(real_gaussian(), 4, dirs, 1, 5000, 7)
    b = [log_moment_mc(MomentQuery(real_gaussian(), 4, u), 5000, 7) for u in dirs]
    assert a == log_moments_mc(real_gaussian(), 4, dirs, 1, 5000, 7)
    for x, y in zip(a, b):
        assert abs(x.mean - y.mean) < 1e-14 and abs(x.se - y.se) < 1e-14 and x.n == y.n
    with pytest.raises(ParameterError):
        log_moments_mc(real_gaussian(), 4, dirs, 1, 0, 7)


@pytest.mark.parametrize("ens", [real_gaussian(), radial_density(1.0), sphere_uniform()], ids=lambda e: e.kind.value)
def test_direction_independence(ens):
    rng = substream(4)
    k = 5
    u, v = random_direction(rng, k, real=True), random_direction(rng, k, real=True)
    a = log_moment_mc(MomentQuery(ens, k, u), N, 5)
    b = log_moment_mc(MomentQuery(ens, k, v), N, 6)
    assert abs(a.mean - b.mean) <= 4 * math.hypot(a.se, b.se)


def test_bound_real_gaussian_oracle():
    for nu in (1, 2):
        b = bound_real_gaussian(nu)
        assert abs(b.value - (4.0**nu * oracles.log_exp_integral(nu) + 2.0**nu)) < 1e-9
        assert b.value >= 2**nu
    assert bound_real_gaussian(2).value > bound_real_gaussian(1).value
    with pytest.raises(ParameterError):
        bound_real_gaussian(0.5)


def test_radial_constants_oracle():
    alpha, nu = 1.0, 1.0
    norm = 2 * math.gamma(1.5) / (math.sqrt(math.pi) * math.gamma(1.0))
    # substitution y = tan(theta) for the first, x = e^s for the second
    c1 = integrate.quad(lambda th: abs(math.log(math.tan(th))) * math.cos(th), 1e-300, math.pi / 2, points=[math.pi / 4])[0]
    c2 = integrate.quad(lambda s: -s * math.exp(-2 * s), -0.5 * math.log(2), 0)[0] \
        + integrate.quad(lambda s: s * math.exp(-2 * s), 0, np.inf)[0]
    c, cp = radial_constants(alpha, nu)
    assert abs(c - norm * c1) < 1e-8 and abs(cp - norm * c2) < 1e-8
    b = bound_radial(alpha, nu)
    assert math.isfinite(b.value) and b.value >= 2.0


@given(st.floats(0.1, 5), st.floats(1, 3))
@settings(max_examples=20, deadline=None)
def test_radial_bound_at_least_two_to_nu(alpha, nu):
    assert bound_radial(alpha, nu).value >= 2**nu


@pytest.mark.parametrize("k", [1, 2, 5])
def test_radial_mc_below_bound(k):
    u = random_direction(substream(7, k), k)
    est = log_moment_mc(MomentQuery(radial_density(1.0), k, u), N, (8, k))
    assert est.mean <= bound_radial(1.0, 1.0).value + 3 * est.se


def test_wallis_integrals_against_recursion():
    c = wallis_integrals(60)
    for k in range(1, 61):
        assert abs(c[k - 1] - oracles.wallis(k)) < 1e-13
    assert np.allclose(wallis_integrals(2000), wallis_closed_form(np.arange(1, 2001)), rtol=1e-12)
    A = wallis_constant()
    assert 0 < A <= oracles.wallis(1)


@pytest.mark.parametrize("k, nu", [(10, 1), (100, 2)])
def test_sphere_mc_below_bound(k, nu):
    u = random_direction(substream(9, k), k)
    est = log_moment_mc(MomentQuery(sphere_uniform(), k, u, nu), N, (10, k))
    assert est.mean <= bound_sphere(k, nu).value + 3 * est.se


def test_sphere_bound_growth_and_domain():
    assert bound_sphere(10**4, 1).value / bound_sphere(10**2, 1).value <= 2 * 1.5
    with pytest.raises(DomainError):
        bound_sphere(2, 1)


def test_iid_bound_properties():
    b = bound_iid(20, 1, 2.0, 1.0, 1.0)
    assert b.value >= 4 * math.sqrt(2)
    for k in (10, 1000, 10**5):
        for nu, rho in ((1, 2.0), (1.5, 3.0)):
            r = bound_iid(4 * k, nu, rho, 1.0, 1.0).value / bound_iid(k, nu, rho, 1.0, 1.0).value
            assert r <= 4 ** (nu / rho) * 1.2
    with pytest.raises(DomainError):
        bound_iid(5, 2.0, 2.0, 1.0, 1.0)
    assert bound_iid(5, 1, 2.0, 1.0, 1.0, R0=3.0).constants["R0"] == 3.0


@given(st.integers(1, 10**6), st.floats(1, 4), st.floats(0.01, 10), st.floats(0.01, 10))
@settings(max_examples=50, deadline=None)
def test_iid_bound_dominates_tail_term(k, nu, c, M):
    rho = nu + 0.5
    assert bound_iid(k, nu, rho, c, M).value >= 4 * math.sqrt(2) * M * nu**nu


def test_iid_mc_below_bound():
    ens = _triangle()
    u = random_direction(substream(11), 20)
    est = log_moment_mc(MomentQuery(ens, 20, u), N, 12)
    assert est.mean <= bound_for(ens, 20, 1).value + 3 * est.se


def test_uniform_cube_bound():
    assert bound_uniform_cube(1, 1).value == 6
    u = random_direction(substream(13), 50)
    est = log_moment_mc(MomentQuery(uniform_unit_cube(), 50, u), N, 14)
    assert est.mean <= 6 + math.log(50) + 3 * est.se


@given(st.integers(1, 10**6), st.floats(1, 5))
@settings(max_examples=50, deadline=None)
def test_cube_statement_dominates_proof_constant(k, nu):
    assert bound_uniform_cube(k, nu).value >= math.log(k) ** nu + 4 * math.sqrt(2) * nu**nu


def test_rotation_moment_examples():
    r = rotation_moment_check(sphere_uniform(), np.eye(5)[0], 1, N, 15)
    assert r.holds and r.ball_holds
    s = np.array([1, 0, 0]) / math.sqrt(2)
    t = np.array([0, 1, 0]) / math.sqrt(2)
    r = rotation_moment_check(real_gaussian(), s + 1j * t, 1, N, 16)
    assert r.holds and r.ball_holds is None
    r = rotation_moment_check(real_gaussian(), [1], 1, N, 17)
    assert r.holds and r.K.mean == 0
    assert r.J.mean <= 2 * r.I.mean + 2 + 3 * r.gap.se


def test_rotation_moment_swaps_when_imaginary_part_dominates():
    u = np.array([0.1, 0.995j]) / np.linalg.norm([0.1, 0.995])
    r = rotation_moment_check(real_gaussian(), u, 1, 20_000, 18)
    assert r.holds


def test_rotation_moment_rejects_cube():
    with pytest.raises(DomainError):
        rotation_moment_check(uniform_unit_cube(), [1, 0], 1, 100, 0)


def test_log_integral_examples():
    r = log_integral_check(1, 0, 0.25)
    assert abs(r.lhs - 1) < 1e-12 and abs(r.rhs - (4 / math.e * 0.5 + 2 * math.log(4) / math.sqrt(1.5))) < 1e-12
    assert r.holds
    assert log_integral_check(1, 100, 0.01).holds
    with pytest.raises(ParameterError):
        log_integral_check(1, 0, 1.0)


@pytest.mark.parametrize("nu", [1, 2, 3])
@pytest.mark.parametrize("b", [0, 1, 10, 100])
@pytest.mark.parametrize("tau", [0.5, 0.1, 0.01])
def test_log_integral_grid(nu, b, tau):
    r = log_integral_check(nu, b, tau)
    assert r.holds
    assert abs(r.lhs - oracles.log_integral_lhs_mp(nu, b)) < 1e-9


def test_log_integral_b0_closed_form():
    for nu in (1, 2, 3):
        assert abs(log_integral_lhs(nu, 0) - special.gamma(nu + 1)) < 1e-10


def test_report_record_and_json():
    est = log_moment_mc(MomentQuery(uniform_unit_cube(), 1, [1]), 1000, 0)
    rec = report_record(bound_uniform_cube(1, 1), est)
    assert set(rec) == {"bound_name", "parameters", "bound_value", "mc_estimate", "mc_se", "verdict"}
    assert rec["verdict"] is True
    back = json.loads(report_json([rec]))
    assert back[0]["bound_value"] == 6


def test_moment_grid_small():
    recs = moment_grid([sphere_uniform(), uniform_unit_cube()], ks=(2, 3), nus=(1,), directions=3, trials=2000)
    # sphere skipped at k = 2
    assert len(recs) == 3 * 3
    assert all(r["verdict"] for r in recs)
    assert recs == moment_grid([sphere_uniform(), uniform_unit_cube()], ks=(2, 3), nus=(1,), directions=3, trials=2000)

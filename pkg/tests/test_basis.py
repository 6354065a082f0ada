import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

import oracles
from zerodist.basis import (SQUARE_MAX_DEGREE, Domain, WeightedSpace, bergman_diag, build_basis, cholesky_onb,
                            closed_form_basis, evaluate_basis, export_csv, extremal_estimate, fubini_study, gram_matrix,
                            gram_residual, identity_basis, import_csv, plane_gaussian, quadrature_rule,
                            requadrature_gram, square_gram_exact, square_onb, unit_square)
from zerodist.errors import DecompositionError, DomainError, ParameterError


def test_square_gram_entries():
    S = gram_matrix(unit_square(2))
    assert abs(S[0, 0] - 1) < 1e-14
    assert abs(S[0, 1]) < 1e-14
    assert abs(S[1, 1] - 1 / 6) < 1e-14


@pytest.mark.parametrize("p", [3, 8])
def test_square_gram_matches_separated_oracle(p):
    S = gram_matrix(unit_square(p))
    E = square_gram_exact(p)
    for l in range(p + 1):
        for j in range(p + 1):
            ref = oracles.square_gram_entry(l, j)
            assert abs(S[l, j] - ref) < 1e-13
            assert abs(float(E[l][j]) - ref.real) < 1e-13


def test_gram_hermitian_positive():
    for space in (unit_square(6), plane_gaussian(6), fubini_study(6)):
        S = gram_matrix(space)
        assert np.allclose(S, S.conj().T, atol=1e-15 * np.abs(S).max())
        assert np.linalg.eigvalsh(S).min() > 0


def test_cholesky_trivial_cases():
    assert np.allclose(cholesky_onb(np.eye(3)).R, np.eye(3))
    assert np.allclose(cholesky_onb(np.diag([4.0, 9.0])).R, np.diag([0.5, 1 / 3]))


def test_cholesky_square_p2_residual():
    S = gram_matrix(unit_square(2))
    R = cholesky_onb(S).R
    assert np.abs(R.conj().T @ S @ R - np.eye(3)).max() <= 1e-10


def test_cholesky_names_failing_pivot():
    S = np.array([[1.0, 0, 0], [0, 1.0, 2.0], [0, 2.0, 1.0]])
    with pytest.raises(DecompositionError) as err:
        cholesky_onb(S)
    assert err.value.pivot == 2


@given(st.integers(1, 8), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_cholesky_random_spd(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = A @ A.conj().T + n * np.eye(n)
    R = cholesky_onb(S).R
    assert np.allclose(np.tril(R, -1), 0)
    assert np.all(np.diag(R).real > 0)
    assert np.abs(R.conj().T @ S @ R - np.eye(n)).max() <= 1e-10


def test_closed_form_values():
    b = closed_form_basis(plane_gaussian(1))
    assert abs(evaluate_basis(b, 0.37 - 2j)[0] - math.sqrt(1 / math.pi)) < 1e-15
    b = closed_form_basis(fubini_study(1))
    assert abs(evaluate_basis(b, 1.0)[1] - math.sqrt(2)) < 1e-15
    with pytest.raises(DomainError):
        closed_form_basis(unit_square(3))


def test_fubini_study_norms_by_quadrature():
    p = 3
    b = closed_form_basis(fubini_study(p))
    for j in range(p + 1):
        # polar integral of |s_j|^2 / (pi (1+r^2)^{p+2})
        c2 = abs(evaluate_basis(b, 1.0)[j]) ** 2
        val, _ = integrate.quad(lambda r: 2 * r ** (2 * j + 1) / (1 + r * r) ** (p + 2), 0, np.inf, epsabs=1e-13)
        assert abs(c2 * val - 1) < 1e-6


def test_identity_basis_evaluation():
    assert np.allclose(evaluate_basis(identity_basis(3), 0.0), [1, 0, 0, 0])
    assert np.allclose(evaluate_basis(identity_basis(2), 2.0), [1, 2, 4])


def test_square_basis_at_origin():
    v = evaluate_basis(square_onb(1), 0.0)
    assert abs(v[0] - 1) < 1e-14 and abs(v[1]) < 1e-14


def test_bergman_diag_values():
    assert abs(bergman_diag(identity_basis(1), 0.0) - 1) < 1e-15
    for p in (1, 7, 30):
        assert abs(bergman_diag(build_basis(fubini_study(p)), 0.0) - (p + 1)) < 1e-10 * (p + 1)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.sampled_from(["square", "plane", "fs"]))
@settings(max_examples=40, deadline=None)
def test_bergman_diag_dominates_first_term(z, which):
    basis = {"square": square_onb(10), "plane": build_basis(plane_gaussian(10)),
             "fs": build_basis(fubini_study(10))}[which]
    K = bergman_diag(basis, z)
    assert np.isfinite(K)
    assert K >= abs(evaluate_basis(basis, z)[0]) ** 2 * (1 - 1e-12)


def test_bergman_diag_never_overflows():
    b = build_basis(fubini_study(400))
    assert np.isfinite(extremal_estimate(b, 1e6))


def test_square_extremal_estimate_interior():
    vals = [extremal_estimate(square_onb(p), 0.0) for p in (10, 20, 40)]
    assert 0 <= vals[-1] <= math.log(41) / 80 + 0.1
    assert vals[0] > vals[1] > vals[2]


def test_square_extremal_estimate_far_field_slope():
    b = square_onb(40)
    d = extremal_estimate(b, 16.0) - extremal_estimate(b, 8.0)
    assert abs(d - math.log(2)) < 0.05


def test_plane_weighted_estimate_at_origin():
    for p in (5, 20, 60):
        b = build_basis(plane_gaussian(p))
        assert extremal_estimate(b, 0.0) <= math.log(p + 1) / (2 * p)


@pytest.mark.parametrize("space", ["unit_square", "plane_gaussian", "fubini_study"])
@pytest.mark.parametrize("p", [1, 5, 10, 20, 40])
def test_requadrature_orthonormality(space, p):
    b = build_basis(WeightedSpace(space, p))
    G = requadrature_gram(b)
    assert np.abs(G - np.eye(p + 1)).max() <= 1e-8


@pytest.mark.parametrize("p", [2, 6, 10])
def test_square_quadrature_exact_for_monomials(p):
    z, w = quadrature_rule(unit_square(p), p + 1)
    for l in range(p + 1):
        for j in range(p + 1):
            v = np.sum(w * z**l * np.conj(z) ** j)
            assert abs(v - oracles.square_gram_entry(l, j)) < 1e-13


@pytest.mark.parametrize("p", [2, 5, 10])
def test_plane_cholesky_matches_closed_form(p):
    num = build_basis(plane_gaussian(p), method="cholesky").R
    ref = np.exp(closed_form_basis(plane_gaussian(p)).log_coef)
    assert np.allclose(np.diag(num).real, ref, rtol=1e-6)
    assert np.abs(num - np.diag(np.diag(num))).max() < 1e-6 * ref.max()


def test_square_degree_cap():
    with pytest.raises(ParameterError):
        unit_square(SQUARE_MAX_DEGREE + 1)


def test_export_roundtrip_bitwise():
    b = square_onb(12)
    back = import_csv(export_csv(b), b.space)
    assert np.array_equal(back.R, b.R)
    assert export_csv(back) == export_csv(b)


def test_gram_residual_closed_forms_any_degree():
    for p in (1, 50, 2048):
        assert gram_residual(build_basis(fubini_study(p))) < 1e-10
        assert gram_residual(build_basis(plane_gaussian(p))) < 1e-10


def test_space_domain_enum():
    assert WeightedSpace("fubini_study", 3).domain is Domain.FUBINI_STUDY
    with pytest.raises(ParameterError):
        WeightedSpace("plane_gaussian", -1)

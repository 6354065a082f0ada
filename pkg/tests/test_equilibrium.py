import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from zerodist.basis import build_basis, fubini_study, plane_gaussian
from zerodist.ensembles import complex_gaussian, uniform_unit_cube
from zerodist.equilibrium import (bin_reference, box_mass, boundary_fraction, density, distance_to_square_boundary,
                                  fubini_study_measure, square_boundary, total_mass, tv_distance, unit_disk_uniform)
from zerodist.errors import ContractError, DomainError, ParameterError
from zerodist.experiments import su2_low_degree_check
from zerodist.zeros import EmpiricalMeasure2D, zero_measure

BOX = (-2.0, 2.0, -2.0, 2.0)


def test_density_values():
    assert abs(density(fubini_study_measure(), 0) - 1 / math.pi) < 1e-16
    assert density(unit_disk_uniform(), 2) == 0
    assert density(unit_disk_uniform(), 0.5j) == 1 / math.pi
    with pytest.raises(DomainError):
        density(square_boundary(10), 0)


@pytest.mark.parametrize("measure", [unit_disk_uniform(), fubini_study_measure()], ids=["disk", "fs"])
def test_total_mass(measure):
    assert abs(total_mass(measure) - 1) < 1e-6


def test_fubini_study_box_mass_against_oracle():
    assert abs(box_mass(fubini_study_measure(), BOX) - oracles.fubini_study_box_mass(2.0)) < 1e-10
    # the radius-2 disk, inscribed in the box, carries 4/5
    assert abs(oracles.fubini_study_disk_mass(2.0) - 0.8) < 1e-15
    ref = bin_reference(fubini_study_measure(), BOX, (64, 64))
    assert abs(ref.in_box_fraction() - oracles.fubini_study_box_mass(2.0)) < 1e-10


def test_fubini_study_disk_mass_from_bins():
    ref = bin_reference(fubini_study_measure(), BOX, (256, 256))
    X, Y = ref.centers()
    m, _ = ref.normalized()
    assert abs(m[X**2 + Y**2 <= 4].sum() - 0.8) < 0.01


def test_disk_bins_symmetric_and_inside():
    ref = bin_reference(unit_disk_uniform(), BOX, (4, 4))
    m, out = ref.normalized()
    assert out == 0
    assert np.allclose(m, np.rot90(m), atol=1e-14)
    assert abs(m.sum() - 1) < 1e-12


def test_disk_box_mass_partial_box():
    # quarter disk
    assert abs(box_mass(unit_disk_uniform(), (0, 2, 0, 2)) - 0.25) < 1e-12


def test_bin_reference_rejects_empty_grid():
    with pytest.raises(ParameterError):
        bin_reference(unit_disk_uniform(), BOX, (0, 4))


def test_square_reference_concentrates_near_boundary():
    fr = [boundary_fraction(bin_reference(square_boundary(p), BOX, (256, 256))) for p in (10, 20, 40)]
    assert fr[0] < fr[1] < fr[2]
    assert fr[2] >= 0.8


def test_square_reference_has_no_box_mass_formula():
    with pytest.raises(DomainError):
        box_mass(square_boundary(10), BOX)


def test_distance_to_square_boundary():
    d = distance_to_square_boundary(np.array([0, 0.4, 0.5 + 0.5j, 1.5 + 0j]))
    assert np.allclose(d, [0.5, 0.1, 0, 1.0])


def _point(shape, idx):
    m = np.zeros(shape)
    m[idx] = 1
    return EmpiricalMeasure2D.from_masses(BOX, m)


def test_tv_identity_and_disjoint():
    h = bin_reference(fubini_study_measure(), BOX, (8, 8))
    assert tv_distance(h, h) == 0
    assert tv_distance(_point((8, 8), (0, 0)), _point((8, 8), (0, 1))) == 1


def test_tv_counts_outside_mass():
    a = EmpiricalMeasure2D.from_masses(BOX, np.full((2, 2), 0.25), 0.0)
    b = EmpiricalMeasure2D.from_masses(BOX, np.full((2, 2), 0.125), 0.5)
    assert abs(tv_distance(a, b) - 0.5) < 1e-15


def test_tv_grid_mismatch():
    with pytest.raises(ContractError):
        tv_distance(_point((8, 8), (0, 0)), _point((4, 4), (0, 0)))
    with pytest.raises(ContractError):
        tv_distance(_point((4, 4), (0, 0)), EmpiricalMeasure2D.from_masses((-1, 1, -1, 1), np.ones((4, 4))))


_masses = st.lists(st.floats(0, 1), min_size=10, max_size=10).filter(lambda v: sum(v) > 1e-3)


@given(_masses, _masses, _masses)
@settings(max_examples=100, deadline=None)
def test_tv_is_metric(a, b, c):
    ms = [EmpiricalMeasure2D.from_masses(BOX, np.array(v[:9]).reshape(3, 3), v[9]) for v in (a, b, c)]
    ab, ba = tv_distance(ms[0], ms[1]), tv_distance(ms[1], ms[0])
    assert ab == ba and 0 <= ab <= 1
    assert tv_distance(ms[0], ms[2]) <= ab + tv_distance(ms[1], ms[2]) + 1e-12


def test_multinomial_noise_floor_oracle():
    # a perfect sampler still sees this much grid TV at 1e4 points
    ref = bin_reference(fubini_study_measure(), BOX, (64, 64))
    m, out = ref.normalized()
    floor, sd = oracles.multinomial_tv_floor(np.append(m.ravel(), out), 10_000, 20, 0)
    assert 0.19 < floor < 0.22 and sd < 0.01


def test_weyl_aggregate_tv_example():
    m = zero_measure(build_basis(plane_gaussian(200)), complex_gaussian(), 50, 0, BOX, (64, 64))
    assert tv_distance(m, bin_reference(unit_disk_uniform(), BOX, (64, 64))) <= 0.15


def test_weyl_tv_decreases_with_degree():
    ref = bin_reference(unit_disk_uniform(), BOX, (64, 64))
    tv = []
    for p in (25, 50, 100, 200):
        m = zero_measure(build_basis(plane_gaussian(p)), complex_gaussian(), 10_000 // p, (0, p), BOX, (64, 64))
        tv.append(tv_distance(m, ref))
    inversions = sum(b > a for a, b in zip(tv, tv[1:]))
    assert inversions <= 1 and tv[-1] < tv[0]


def test_su2_tv_decreases_with_degree():
    ref = bin_reference(fubini_study_measure(), BOX, (64, 64))
    tv = []
    for p in (25, 50, 100, 200):
        m = zero_measure(build_basis(fubini_study(p)), uniform_unit_cube(), 10_000 // p, (0, p), BOX, (64, 64))
        tv.append(tv_distance(m, ref))
    inversions = sum(b > a for a, b in zip(tv, tv[1:]))
    assert inversions <= 1 and tv[-1] < tv[0]


@pytest.mark.parametrize("p", [1, 2])
def test_su2_low_degree_sign_exact(p):
    r = su2_low_degree_check(p, trials=10_000, seed=0)
    assert r.violations == 0 and r.trials == 10_000

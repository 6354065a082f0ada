"""Zeros of random polynomials in weighted spaces: simulation and checks.

Submodules
----------
ensembles    coefficient laws and their tail / moment diagnostics
basis        weighted spaces, orthonormal bases, Bergman extremal estimate
zeros        random polynomials, root finding, binned zero measures
equilibrium  limit measures and grid distances
moments      logarithmic-moment bounds and Monte Carlo checks
realzeros    expected real-zero counts
clt          linear statistics and the normality experiment
experiments  named models, convergence series, figure schedules
cli          command-line runner
"""

__version__ = "0.1.0"

from .basis import build_basis, closed_form_basis, fubini_study, plane_gaussian, square_onb, unit_square
from .ensembles import (complex_gaussian, iid_density, radial_density, real_gaussian, sample_coefficients,
                        sphere_uniform, uniform_unit_cube)
from .equilibrium import bin_reference, fubini_study_measure, square_boundary, tv_distance, unit_disk_uniform
from .realzeros import kac_expected
from .zeros import EmpiricalMeasure2D, Polynomial, ZeroSet, random_polynomial, roots, simulate

__all__ = [
    "__version__",
    "EmpiricalMeasure2D",
    "Polynomial",
    "ZeroSet",
    "bin_reference",
    "build_basis",
    "closed_form_basis",
    "complex_gaussian",
    "fubini_study",
    "fubini_study_measure",
    "iid_density",
    "kac_expected",
    "plane_gaussian",
    "radial_density",
    "random_polynomial",
    "real_gaussian",
    "roots",
    "sample_coefficients",
    "simulate",
    "sphere_uniform",
    "square_boundary",
    "square_onb",
    "tv_distance",
    "uniform_unit_cube",
    "unit_disk_uniform",
    "unit_square",
]

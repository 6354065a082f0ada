"""Named random-polynomial models, convergence series and figure presets.

A model couples a weighted space, a coefficient ensemble and the limit
measure its normalized zeros approach. The series functions use a trial
schedule with ``N * p`` held fixed, so every degree contributes the same
number of zeros.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis import OrthonormalBasis, WeightedSpace, build_basis, fubini_study, plane_gaussian, unit_square
from .ensembles import CoefficientEnsemble, complex_gaussian, uniform_unit_cube
from .equilibrium import (ReferenceMeasure, bin_reference, boundary_fraction, fubini_study_measure, square_boundary,
                          tv_distance, unit_disk_uniform)
from .errors import ParameterError
from .montecarlo import Seed, substream
from .zeros import DEFAULT_BOX, DEFAULT_SHAPE, EmpiricalMeasure2D, ZeroSet, accumulate_all, simulate, zeros_csv


@dataclass(frozen=True)
class Model:
    name: str
    space: Callable[[int], WeightedSpace]
    ensemble: CoefficientEnsemble
    reference: Callable[[int], ReferenceMeasure]

    def basis(self, p: int) -> OrthonormalBasis:
        return build_basis(self.space(p))


MODELS = {
    "weyl": Model("weyl", plane_gaussian, complex_gaussian(), lambda p: unit_disk_uniform()),
    "su2": Model("su2", fubini_study, uniform_unit_cube(), lambda p: fubini_study_measure()),
    # the square's limit is realized at the largest degree the basis allows
    "square": Model("square", unit_square, complex_gaussian(), lambda p: square_boundary(40)),
}


def get_model(name: str) -> Model:
    try:
        return MODELS[name]
    except KeyError:
        raise ParameterError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


def np_schedule(total: int, degrees: Sequence[int]) -> list[tuple[int, int]]:
    """Pairs ``(p, N)`` with ``N = round(total / p)`` (at least 1)."""
    out = []
    for p in degrees:
        if p < 1:
            raise ParameterError("degrees must be >= 1")
        out.append((int(p), max(1, int(round(total / p)))))
    return out


@dataclass
class ZeroRun:
    """Zeros of ``trials`` degree-``p`` polynomials and their binned measure."""

    p: int
    trials: int
    zero_sets: list[ZeroSet]
    measure: EmpiricalMeasure2D

    @property
    def max_backward_error(self) -> float:
        return max((z.max_backward_error for z in self.zero_sets), default=0.0)

    @property
    def pairing_failures(self) -> int:
        return sum(z.pairing_failures() for z in self.zero_sets if z.real_coefficients)

    def zeros_csv(self) -> str:
        return zeros_csv(enumerate(self.zero_sets))


def run_zeros(basis: OrthonormalBasis, sampler, trials: int, seed: Seed, box=DEFAULT_BOX, shape=DEFAULT_SHAPE,
              threads: int = 1, method: str = "auto") -> ZeroRun:
    sets = simulate(basis, sampler, trials, seed, threads=threads, method=method)
    return ZeroRun(basis.degree, trials, sets, accumulate_all(EmpiricalMeasure2D(box, shape), sets))


@dataclass
class SeriesPoint:
    p: int
    trials: int
    tv: float
    boundary_fraction: float | None = None
    run: ZeroRun | None = field(default=None, repr=False)


def convergence_series(model: Model | str, degrees: Sequence[int], total: int = 10_000, seed: Seed = 0,
                       box=DEFAULT_BOX, shape=(64, 64), threads: int = 1, keep_runs: bool = False) -> list[SeriesPoint]:
    """TV distance to the model's limit measure along ``degrees`` with ``N p = total``.

    Degree ``p`` uses the seed ``(seed, p)``. For the square model the
    fraction of mass within 0.1 of the boundary is reported as well.
    """
    model = get_model(model) if isinstance(model, str) else model
    out = []
    for p, n in np_schedule(total, degrees):
        run = run_zeros(model.basis(p), model.ensemble, n, _derive(seed, p), box, shape, threads)
        ref = bin_reference(model.reference(p), box, shape)
        bf = boundary_fraction(run.measure) if model.name == "square" else None
        out.append(SeriesPoint(p, n, tv_distance(run.measure, ref), bf, run if keep_runs else None))
    return out


def _derive(seed: Seed, *keys: int) -> tuple[int, ...]:
    base = (int(seed),) if isinstance(seed, (int, np.integer)) else tuple(int(s) for s in seed)
    return base + tuple(int(k) for k in keys)


# ----------------------------------------------------------------------------
# low-degree SU2 checks
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SignCheck:
    p: int
    trials: int
    zeros: int
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def su2_low_degree_check(p: int, trials: int = 10_000, seed: Seed = 0, threads: int = 1) -> SignCheck:
    """Exact sign check for SU2 zeros with coefficients uniform on [0, 1].

    Degree 1: every zero on the closed negative real axis (``Im z == 0``
    and ``Re z <= 0``). Degree 2: every zero with ``Re z <= 0``.
    """
    if p not in (1, 2):
        raise ParameterError("the exact sign check is defined for p = 1 and p = 2")
    model = MODELS["su2"]

    def bad(zs: ZeroSet) -> tuple[int, int]:
        z = zs.zeros
        if p == 1:
            v = int(np.count_nonzero((z.imag != 0) | (z.real > 0)))
        else:
            v = int(np.count_nonzero(z.real > 0))
        return z.size, v

    res = simulate(model.basis(p), model.ensemble, trials, _derive(seed, p), bad, threads)
    return SignCheck(p, trials, sum(r[0] for r in res), sum(r[1] for r in res))


# ----------------------------------------------------------------------------
# figure presets
# ----------------------------------------------------------------------------

#: ``N p`` for the square figure (5000 polynomials of degree 4).
FIGURE1_TOTAL = 20_000
FIGURE1_DEGREES = (4, 12, 24, 40)
FIGURE2_POINTS = 10_240
FIGURE3_COLUMNS = 12


def figure1_schedule() -> list[tuple[int, int]]:
    return np_schedule(FIGURE1_TOTAL, FIGURE1_DEGREES)


def figure3_schedule() -> list[tuple[int, int]]:
    """``p = 2^{j-1}``, ``N = 5 * 2^{13-j}`` for ``j = 1..12``."""
    return [(2 ** (j - 1), 5 * 2 ** (13 - j)) for j in range(1, FIGURE3_COLUMNS + 1)]


def sample_fubini_study(n: int, seed: Seed) -> np.ndarray:
    """``n`` points with density ``1/(pi (1+|z|^2)^2)``.

    ``|z|^2 / (1 + |z|^2)`` is uniform on [0, 1] and the angle is uniform.
    """
    rng = substream(seed)
    u = rng.random(n)
    theta = 2.0 * math.pi * rng.random(n)
    with np.errstate(divide="ignore"):
        r = np.sqrt(u / (1.0 - u))
    return r * np.exp(1j * theta)


def points_csv(z: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("index,re,im\n")
    for i, v in enumerate(z):
        buf.write(f"{i},{float(v.real)!r},{float(v.imag)!r}\n")
    return buf.getvalue()


PRESETS = ("figure1", "figure2", "figure3")

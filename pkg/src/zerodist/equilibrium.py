"""Limit measures of normalized zero distributions and grid comparisons."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .basis import SQUARE_MAX_DEGREE, extremal_estimate, square_onb
from .errors import ContractError, DomainError, ParameterError
from .zeros import DEFAULT_BOX, DEFAULT_SHAPE, EmpiricalMeasure2D

#: Half side of the square Q = [-1/2, 1/2]^2.
SQUARE_HALF = 0.5


class ReferenceKind(str, enum.Enum):
    UNIT_DISK_UNIFORM = "unit_disk_uniform"
    FUBINI_STUDY = "fubini_study"
    SQUARE_BOUNDARY = "square_boundary"


@dataclass(frozen=True)
class ReferenceMeasure:
    """Probability measure on C that empirical zero measures are compared against.

    ``degree`` is only used by the square-boundary measure, which is
    realized through the Bergman estimate of that degree.
    """

    kind: ReferenceKind
    degree: int = 40

    def __post_init__(self):
        object.__setattr__(self, "kind", ReferenceKind(self.kind))
        if self.kind is ReferenceKind.SQUARE_BOUNDARY and not 1 <= self.degree <= SQUARE_MAX_DEGREE:
            raise ParameterError(f"square-boundary degree must lie in [1, {SQUARE_MAX_DEGREE}]")

    @property
    def has_density(self) -> bool:
        return self.kind is not ReferenceKind.SQUARE_BOUNDARY


def unit_disk_uniform() -> ReferenceMeasure:
    return ReferenceMeasure(ReferenceKind.UNIT_DISK_UNIFORM)


def fubini_study_measure() -> ReferenceMeasure:
    return ReferenceMeasure(ReferenceKind.FUBINI_STUDY)


def square_boundary(degree: int = 40) -> ReferenceMeasure:
    return ReferenceMeasure(ReferenceKind.SQUARE_BOUNDARY, degree)


def density(measure: ReferenceMeasure, z):
    """Pointwise density with respect to Lebesgue measure on C."""
    z = np.asarray(z, dtype=np.complex128)
    r2 = z.real**2 + z.imag**2
    if measure.kind is ReferenceKind.UNIT_DISK_UNIFORM:
        out = np.where(r2 <= 1.0, 1.0 / math.pi, 0.0)
    elif measure.kind is ReferenceKind.FUBINI_STUDY:
        out = 1.0 / (math.pi * (1.0 + r2) ** 2)
    else:
        raise DomainError("the square-boundary measure has no pointwise density")
    return float(out) if out.ndim == 0 else out


def total_mass(measure: ReferenceMeasure) -> float:
    """Radial quadrature of the density over C."""
    if measure.kind is ReferenceKind.UNIT_DISK_UNIFORM:
        val, _ = integrate.quad(lambda r: 2.0 * r, 0.0, 1.0)
    elif measure.kind is ReferenceKind.FUBINI_STUDY:
        val, _ = integrate.quad(lambda r: 2.0 * r / (1.0 + r * r) ** 2, 0.0, np.inf, epsabs=1e-13)
    else:
        return 1.0
    return val


def box_mass(measure: ReferenceMeasure, box) -> float:
    """Mass of the rectangle ``box = (xmin, xmax, ymin, ymax)``.

    One-dimensional quadrature in ``x`` of the exact ``y``-integral.
    """
    x0, x1, y0, y1 = (float(v) for v in box)
    if measure.kind is ReferenceKind.UNIT_DISK_UNIFORM:
        if x0 <= -1.0 and x1 >= 1.0 and y0 <= -1.0 and y1 >= 1.0:
            return 1.0

        def chord(x):
            s = math.sqrt(max(0.0, 1.0 - x * x))
            return max(0.0, min(y1, s) - max(y0, -s))
        lo, hi = max(x0, -1.0), min(x1, 1.0)
        if hi <= lo:
            return 0.0
        pts = [x for y in (y0, y1) if abs(y) < 1 for x in (-math.sqrt(1 - y * y), math.sqrt(1 - y * y)) if lo < x < hi]
        val, _ = integrate.quad(chord, lo, hi, points=pts or None, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val / math.pi
    if measure.kind is ReferenceKind.FUBINI_STUDY:
        def G(a2, y):
            a = math.sqrt(a2)
            return y / (2.0 * a2 * (a2 + y * y)) + math.atan(y / a) / (2.0 * a2 * a)

        def strip(x):
            a2 = 1.0 + x * x
            return G(a2, y1) - G(a2, y0)

        val, _ = integrate.quad(strip, x0, x1, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val / math.pi
    raise DomainError("box mass of the square-boundary measure is only available binned")


def _binned_density(measure, box, shape, refine):
    rows, cols = shape
    xmin, xmax, ymin, ymax = box
    hx = (xmax - xmin) / (cols * refine)
    hy = (ymax - ymin) / (rows * refine)
    xs = xmin + (np.arange(cols * refine) + 0.5) * hx
    ys = ymin + (np.arange(rows * refine) + 0.5) * hy
    X, Y = np.meshgrid(xs, ys)
    d = density(measure, X + 1j * Y) * hx * hy
    return d.reshape(rows, refine, cols, refine).sum(axis=(1, 3))


def _square_laplacian_mass(degree, box, shape):
    rows, cols = shape
    xmin, xmax, ymin, ymax = box
    hx = (xmax - xmin) / cols
    hy = (ymax - ymin) / rows
    # bin centers plus one ghost layer for the 5-point stencil
    xs = xmin + (np.arange(-1, cols + 1) + 0.5) * hx
    ys = ymin + (np.arange(-1, rows + 1) + 0.5) * hy
    X, Y = np.meshgrid(xs, ys)
    V = extremal_estimate(square_onb(degree), X + 1j * Y)
    lap = (V[1:-1, 2:] - 2 * V[1:-1, 1:-1] + V[1:-1, :-2]) / hx**2 \
        + (V[2:, 1:-1] - 2 * V[1:-1, 1:-1] + V[:-2, 1:-1]) / hy**2
    return np.clip(lap, 0.0, None) * hx * hy / (2.0 * math.pi)


def bin_reference(measure: ReferenceMeasure, box=DEFAULT_BOX, shape=DEFAULT_SHAPE, refine: int = 8) -> EmpiricalMeasure2D:
    """The reference measure binned on the grid of an :class:`EmpiricalMeasure2D`.

    Density kinds use ``refine x refine`` midpoint sub-cells per bin, then
    rescale so the in-box total equals :func:`box_mass`; the remainder is the
    out-of-box mass. The square-boundary measure is the clipped discrete
    Laplacian of the Bergman extremal estimate, ``(1/2pi) Delta V_p h^2``
    per bin, normalized to 1 (its support lies inside any box containing Q).
    """
    shape = tuple(int(v) for v in shape)
    if min(shape) < 1:
        raise ParameterError("grid must be nonempty")
    if refine < 1:
        raise ParameterError("refine must be >= 1")
    box = tuple(float(v) for v in box)
    if measure.has_density:
        m = _binned_density(measure, box, shape, refine)
        inside = box_mass(measure, box)
        s = m.sum()
        if s > 0:
            m *= inside / s
        return EmpiricalMeasure2D.from_masses(box, m, max(0.0, 1.0 - inside))
    m = _square_laplacian_mass(measure.degree, box, shape)
    s = m.sum()
    if not s > 0:
        raise ContractError("Laplacian of the extremal estimate vanished on the grid")
    return EmpiricalMeasure2D.from_masses(box, m / s, 0.0)


def tv_distance(a: EmpiricalMeasure2D, b: EmpiricalMeasure2D) -> float:
    """Half the L1 distance of normalized bin masses, out-of-box mass as one more bin."""
    if not a.same_grid(b):
        raise ContractError("tv_distance needs identical boxes and grids")
    ma, oa = a.normalized()
    mb, ob = b.normalized()
    return float(min(1.0, 0.5 * (np.abs(ma - mb).sum() + abs(oa - ob))))


def distance_to_square_boundary(z, half: float = SQUARE_HALF):
    """Euclidean distance from ``z`` to the boundary of ``[-half, half]^2``."""
    z = np.asarray(z, dtype=np.complex128)
    ax, ay = np.abs(z.real), np.abs(z.imag)
    inside = (ax <= half) & (ay <= half)
    d_in = np.minimum(half - ax, half - ay)
    d_out = np.hypot(np.clip(ax - half, 0, None), np.clip(ay - half, 0, None))
    return np.where(inside, d_in, d_out)


def boundary_fraction(measure: EmpiricalMeasure2D, delta: float = 0.1, half: float = SQUARE_HALF) -> float:
    """Normalized mass of bins whose center lies within ``delta`` of the square's boundary."""
    m, _ = measure.normalized()
    X, Y = measure.centers()
    near = distance_to_square_boundary(X + 1j * Y, half) <= delta
    return float(m[near].sum())

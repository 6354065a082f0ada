"""Random polynomials, their zeros, and binned zero measures."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .basis import OrthonormalBasis
from .ensembles import CoefficientEnsemble
from .errors import ContractError, NoRootsError, ParameterError
from .montecarlo import Seed, substream
from .polyroots import backward_errors, polynomial_roots

_EPS = np.finfo(float).eps

#: Default histogram window and resolution.
DEFAULT_BOX = (-2.0, 2.0, -2.0, 2.0)
DEFAULT_SHAPE = (256, 256)


@dataclass(frozen=True, eq=False)
class Polynomial:
    """``exp(log_scale) * sum coefficients[j] z^j``.

    ``coefficients`` holds the effective (trimmed) coefficients, scaled so
    that the largest has modulus 1. ``degree`` is the nominal degree p used
    for normalization; ``effective_degree <= degree``.
    """

    coefficients: np.ndarray
    degree: int
    log_scale: float = 0.0
    trimmed: int = 0

    @property
    def effective_degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def is_real(self) -> bool:
        return not np.any(self.coefficients.imag)

    def monomial(self) -> np.ndarray:
        """Unscaled monomial coefficients (may overflow for large degrees)."""
        with np.errstate(over="raise"):
            return self.coefficients * math.exp(self.log_scale)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return np.polynomial.polynomial.polyval(z, self.coefficients) * math.exp(self.log_scale)

    @classmethod
    def from_coefficients(cls, c: Sequence[complex], degree: int | None = None) -> "Polynomial":
        """Polynomial from ascending monomial coefficients.

        Trailing coefficients with ``|c_j| <= eps * max|c| * p`` are trimmed.
        """
        c = np.asarray(c, dtype=np.complex128)
        if c.ndim != 1 or c.size == 0:
            raise ParameterError("need a nonempty 1-D coefficient vector")
        p = c.size - 1 if degree is None else int(degree)
        scale = np.abs(c).max()
        return _assemble(c, np.full(c.size, scale), p)


def _assemble(c: np.ndarray, ref: np.ndarray, p: int, log_scale: float = 0.0) -> Polynomial:
    """Trim against the reference magnitudes ``ref`` and normalize."""
    thresh = _EPS * max(p, 1) * ref
    keep = c.size
    while keep > 1 and abs(c[keep - 1]) <= thresh[keep - 1]:
        keep -= 1
    cc = c[:keep]
    m = np.abs(cc).max()
    if m == 0:
        return Polynomial(np.zeros(1, dtype=np.complex128), p, -math.inf, c.size - 1)
    return Polynomial(cc / m, p, log_scale + math.log(m), c.size - keep)


def polynomial_from_basis(basis: OrthonormalBasis, a: Sequence[complex]) -> Polynomial:
    """``sum a_j P_j`` expressed in the monomial basis.

    The trim threshold is measured against the size each monomial
    coefficient would have without cancellation, so steep but legitimate
    coefficient profiles (binomial, factorial) are never cut.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 1 or a.size != basis.dim:
        raise ContractError(f"coefficient vector has length {a.size}, basis dimension is {basis.dim}")
    amax = np.abs(a).max()
    if basis.closed_form:
        lc = basis.log_coef
        m = float(lc.max())
        s = np.exp(lc - m)
        return _assemble(s * a, s * amax, basis.degree, m)
    R = basis.R
    return _assemble(R @ a, np.abs(R).max(axis=1) * amax, basis.degree)


def random_polynomial(basis: OrthonormalBasis, ensemble: CoefficientEnsemble, seed: Seed) -> Polynomial:
    """``f_p = sum a_j P_j`` with ``a`` drawn from ``ensemble`` on C^{d_p}."""
    a = ensemble.sample(substream(seed), basis.dim)
    return polynomial_from_basis(basis, a)


# ----------------------------------------------------------------------------
# zeros
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RealZeroPolicy:
    """A zero is real when ``|Im z| <= eps (1 + |z|)``.

    Non-real zeros of a real polynomial must find a conjugate partner within
    ``pair_tol (1 + |z|)``; misses are reported as pairing failures.
    """

    eps: float = 1e-9
    pair_tol: float = 1e-8


DEFAULT_POLICY = RealZeroPolicy()


@dataclass(frozen=True, eq=False)
class ZeroSet:
    zeros: np.ndarray
    degree: int
    backward_errors: np.ndarray = field(default_factory=lambda: np.empty(0))
    method: str = "none"
    real_coefficients: bool = False

    @property
    def effective_degree(self) -> int:
        return self.zeros.size

    @property
    def n_real(self) -> int:
        return count_real_zeros(self)

    @property
    def max_backward_error(self) -> float:
        return float(self.backward_errors.max()) if self.backward_errors.size else 0.0

    def pairing_failures(self, policy: RealZeroPolicy = DEFAULT_POLICY) -> int:
        return conjugate_pairing_failures(self.zeros, policy)


def roots(poly: Polynomial, method: str = "auto") -> ZeroSet:
    """All zeros of ``poly`` with their coefficient-wise backward errors."""
    if poly.effective_degree < 1:
        raise NoRootsError("polynomial has effective degree 0")
    z, used = polynomial_roots(poly.coefficients, method)
    be = backward_errors(poly.coefficients, z)
    return ZeroSet(z, poly.degree, be, used, poly.is_real)


def count_real_zeros(zeros: ZeroSet | np.ndarray, policy: RealZeroPolicy = DEFAULT_POLICY) -> int:
    z = zeros.zeros if isinstance(zeros, ZeroSet) else np.asarray(zeros, dtype=np.complex128)
    return int(np.count_nonzero(np.abs(z.imag) <= policy.eps * (1.0 + np.abs(z))))


def conjugate_pairing_failures(z: np.ndarray, policy: RealZeroPolicy = DEFAULT_POLICY) -> int:
    """Number of non-real zeros without a conjugate partner (greedy matching)."""
    z = np.asarray(z, dtype=np.complex128)
    nonreal = z[np.abs(z.imag) > policy.eps * (1.0 + np.abs(z))]
    upper = list(nonreal[nonreal.imag > 0])
    lower = list(nonreal[nonreal.imag < 0])
    fails = 0
    for u in upper:
        if not lower:
            fails += 1
            continue
        d = np.abs(np.asarray(lower) - np.conj(u))
        i = int(np.argmin(d))
        if d[i] <= policy.pair_tol * (1.0 + abs(u)):
            lower.pop(i)
        else:
            fails += 1
    return fails + len(lower)


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: ``RZ_THREADS`` overrides the argument; default 1."""
    env = os.environ.get("RZ_THREADS")
    if env is not None and env.strip():
        try:
            threads = int(env)
        except ValueError:
            raise ParameterError(f"RZ_THREADS must be an integer, got {env!r}") from None
    threads = 1 if threads is None else int(threads)
    if threads < 1:
        raise ParameterError("thread count must be >= 1")
    return threads


def ordered_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """``[fn(x) for x in items]`` on a thread pool, results in input order.

    BLAS is pinned to one thread so every item is computed identically
    whatever the pool size.
    """
    items = list(items)
    with threadpool_limits(limits=1):
        if threads <= 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))


def sample_zeros(basis: OrthonormalBasis, sampler, trial: int, seed: Seed, method: str = "auto") -> ZeroSet:
    """Zeros of the trial-``trial`` polynomial, coefficients from substream ``(seed, trial)``.

    ``sampler`` is a :class:`CoefficientEnsemble` or a callable ``(rng, k) -> a``.
    """
    draw = sampler.sample if isinstance(sampler, CoefficientEnsemble) else sampler
    a = draw(substream(seed, trial), basis.dim)
    poly = polynomial_from_basis(basis, a)
    if poly.effective_degree < 1:
        return ZeroSet(np.empty(0, dtype=np.complex128), poly.degree, np.empty(0), "none", poly.is_real)
    return roots(poly, method)


def simulate(basis: OrthonormalBasis, sampler, trials: int, seed: Seed, reduce: Callable[[ZeroSet], object] | None = None,
             threads: int = 1, method: str = "auto") -> list:
    """Per-trial results ``reduce(zeros)`` for ``t = 0..trials-1``, in trial order."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    reduce = reduce or (lambda z: z)
    return ordered_map(lambda t: reduce(sample_zeros(basis, sampler, t, seed, method)), range(trials), threads)


def zero_measure(basis: OrthonormalBasis, sampler, trials: int, seed: Seed, box=DEFAULT_BOX, shape=DEFAULT_SHAPE,
                 threads: int = 1) -> EmpiricalMeasure2D:
    """Sum over trials of the normalized zero measures ``(1/p) [Z_f]``."""
    return accumulate_all(EmpiricalMeasure2D(box, shape), simulate(basis, sampler, trials, seed, threads=threads))


def zeros_csv(dump: Iterable[tuple[int, ZeroSet]]) -> str:
    """CSV with columns ``trial,re,im``; floats in shortest round-trip form."""
    buf = io.StringIO()
    buf.write("trial,re,im\n")
    for t, zs in dump:
        for z in zs.zeros:
            buf.write(f"{t},{float(z.real)!r},{float(z.imag)!r}\n")
    return buf.getvalue()


# ----------------------------------------------------------------------------
# binned measures
# ----------------------------------------------------------------------------


class EmpiricalMeasure2D:
    """Binned measure on a rectangle plus the mass that fell outside it.

    Point masses are kept as integer counts per rational weight, so the
    total is exact and merging is associative and order-independent.
    Reference measures built from densities carry a float component instead.
    Row ``i`` covers ``y`` in the ``i``-th slab counted from ``ymin``.
    """

    def __init__(self, box: Sequence[float] = DEFAULT_BOX, shape: Sequence[int] = DEFAULT_SHAPE):
        xmin, xmax, ymin, ymax = (float(v) for v in box)
        rows, cols = (int(v) for v in shape)
        if not (xmax > xmin and ymax > ymin):
            raise ParameterError(f"degenerate box {box}")
        if rows < 1 or cols < 1:
            raise ParameterError("grid must be nonempty")
        self.box = (xmin, xmax, ymin, ymax)
        self.shape = (rows, cols)
        self._counts: dict[Fraction, np.ndarray] = {}
        self._outside: dict[Fraction, int] = {}
        self._dense: np.ndarray | None = None
        self._dense_outside = 0.0

    # construction ---------------------------------------------------------
    @classmethod
    def from_masses(cls, box, mass: np.ndarray, outside: float = 0.0) -> "EmpiricalMeasure2D":
        mass = np.asarray(mass, dtype=float)
        if mass.ndim != 2:
            raise ParameterError("mass must be a 2-D array")
        if np.any(mass < 0) or outside < 0:
            raise ParameterError("masses must be nonnegative")
        m = cls(box, mass.shape)
        m._dense = mass.copy()
        m._dense_outside = float(outside)
        return m

    def copy(self) -> "EmpiricalMeasure2D":
        m = EmpiricalMeasure2D(self.box, self.shape)
        m._counts = {w: c.copy() for w, c in self._counts.items()}
        m._outside = dict(self._outside)
        m._dense = None if self._dense is None else self._dense.copy()
        m._dense_outside = self._dense_outside
        return m

    def same_grid(self, other: "EmpiricalMeasure2D") -> bool:
        return self.box == other.box and self.shape == other.shape

    # geometry -------------------------------------------------------------
    def bin_index(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row, column and in-box mask of each point."""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        xmin, xmax, ymin, ymax = self.box
        rows, cols = self.shape
        x, y = z.real, z.imag
        inside = (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)
        col = np.clip(np.floor((x - xmin) / (xmax - xmin) * cols), 0, cols - 1)
        row = np.clip(np.floor((y - ymin) / (ymax - ymin) * rows), 0, rows - 1)
        col = np.where(inside, col, 0).astype(np.int64)
        row = np.where(inside, row, 0).astype(np.int64)
        return row, col, inside

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Bin-center coordinate arrays ``X, Y`` of shape ``self.shape``."""
        xmin, xmax, ymin, ymax = self.box
        rows, cols = self.shape
        xc = xmin + (np.arange(cols) + 0.5) * (xmax - xmin) / cols
        yc = ymin + (np.arange(rows) + 0.5) * (ymax - ymin) / rows
        return np.meshgrid(xc, yc)

    @property
    def cell_area(self) -> float:
        xmin, xmax, ymin, ymax = self.box
        return (xmax - xmin) * (ymax - ymin) / (self.shape[0] * self.shape[1])

    # accumulation ---------------------------------------------------------
    def add_points(self, z, weight) -> "EmpiricalMeasure2D":
        w = Fraction(weight)
        if w <= 0:
            raise ParameterError("weight must be positive")
        row, col, inside = self.bin_index(z)
        counts = self._counts.get(w)
        if counts is None:
            counts = self._counts[w] = np.zeros(self.shape, dtype=np.int64)
        np.add.at(counts, (row[inside], col[inside]), 1)
        self._outside[w] = self._outside.get(w, 0) + int(np.count_nonzero(~inside))
        return self

    def merge(self, other: "EmpiricalMeasure2D") -> "EmpiricalMeasure2D":
        """New measure holding the sum of both."""
        if not self.same_grid(other):
            raise ContractError("cannot merge measures on different grids")
        out = self.copy()
        for w, c in other._counts.items():
            if w in out._counts:
                out._counts[w] = out._counts[w] + c
            else:
                out._counts[w] = c.copy()
        for w, n in other._outside.items():
            out._outside[w] = out._outside.get(w, 0) + n
        if other._dense is not None:
            out._dense = other._dense.copy() if out._dense is None else out._dense + other._dense
            out._dense_outside += other._dense_outside
        return out

    # readout --------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self._dense is None

    def mass(self) -> np.ndarray:
        """Per-bin mass, rows from ``ymin`` upward."""
        out = np.zeros(self.shape) if self._dense is None else self._dense.copy()
        for w in sorted(self._counts):
            out += float(w) * self._counts[w]
        return out

    @property
    def outside_mass(self) -> float:
        return self._dense_outside + sum(float(w) * n for w, n in sorted(self._outside.items()))

    def exact_total(self) -> Fraction:
        """Total mass as a rational number (point masses only)."""
        if self._dense is not None:
            raise ContractError("measure has a floating-point component")
        return sum((w * (int(c.sum()) + self._outside.get(w, 0)) for w, c in self._counts.items()), Fraction(0))

    @property
    def total_mass(self) -> float:
        if self._dense is None:
            return float(self.exact_total())
        return float(self.mass().sum() + self.outside_mass)

    def normalized(self) -> tuple[np.ndarray, float]:
        """Bin masses and out-of-box mass scaled to total 1."""
        tot = self.total_mass
        if not tot > 0:
            raise ContractError("measure is empty")
        return self.mass() / tot, self.outside_mass / tot

    def in_box_fraction(self) -> float:
        return 1.0 - self.normalized()[1]

    # output ---------------------------------------------------------------
    def to_csv(self) -> str:
        """Normalized bin masses: ``row,col,x,y,mass``; out-of-box mass on row -1."""
        m, out = self.normalized()
        X, Y = self.centers()
        buf = io.StringIO()
        buf.write("row,col,x,y,mass\n")
        rows, cols = self.shape
        for i in range(rows):
            for j in range(cols):
                buf.write(f"{i},{j},{X[i, j]!r},{Y[i, j]!r},{m[i, j]!r}\n")
        buf.write(f"-1,-1,nan,nan,{out!r}\n")
        return buf.getvalue()

    def to_pgm(self) -> bytes:
        """8-bit P5 raster, max-normalized, top row = largest ``y``."""
        m = self.mass()
        top = m.max()
        img = np.zeros(self.shape, dtype=np.uint8) if top <= 0 else np.rint(255.0 * m / top).astype(np.uint8)
        rows, cols = self.shape
        return f"P5\n{cols} {rows}\n255\n".encode("ascii") + img[::-1].tobytes()


def accumulate_all(measure: EmpiricalMeasure2D, zero_sets: Iterable[ZeroSet]) -> EmpiricalMeasure2D:
    """:func:`accumulate` with default weights over many trials, binned in one pass per degree."""
    groups: dict[int, list[np.ndarray]] = {}
    lost: dict[int, int] = {}
    for zs in zero_sets:
        groups.setdefault(zs.degree, []).append(zs.zeros)
        lost[zs.degree] = lost.get(zs.degree, 0) + zs.degree - zs.effective_degree
    for p in sorted(groups):
        pts = np.concatenate(groups[p] + [np.full(lost[p], complex(np.inf, 0.0))])
        measure.add_points(pts, Fraction(1, p))
    return measure


def accumulate(measure: EmpiricalMeasure2D, zeros: ZeroSet, weight=None) -> EmpiricalMeasure2D:
    """Add each zero with mass ``weight`` (default ``1/p``) in place.

    Zeros missing because the effective degree fell below ``p`` are booked
    as out-of-box mass, so each trial contributes total mass 1.
    """
    w = Fraction(1, zeros.degree) if weight is None else weight
    measure.add_points(zeros.zeros, w)
    lost = zeros.degree - zeros.effective_degree
    if lost > 0:
        # zeros lost to a trimmed leading coefficient sit at infinity
        measure.add_points(np.full(lost, complex(np.inf, 0.0)), w)
    return measure

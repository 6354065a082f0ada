"""Linear statistics of zero sets and an empirical normality experiment."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .basis import build_basis, plane_gaussian
from .ensembles import complex_gaussian
from .errors import DomainError, InsufficientSampleError, ParameterError
from .montecarlo import Seed
from .zeros import ZeroSet, simulate

#: Fewest trials accepted by :func:`clt_experiment`.
MIN_TRIALS = 100


@dataclass(frozen=True)
class TestFunction:
    """Real test function on C vanishing outside the disk ``|z - center| < radius``."""

    fn: Callable[[np.ndarray], np.ndarray]
    radius: float
    center: complex = 0j
    name: str = "custom"

    __test__ = False  # not a pytest class

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        out = np.asarray(self.fn(z), dtype=float)
        return np.where(np.abs(z - self.center) < self.radius, out, 0.0)


def bump(radius: float = 0.5, center: complex = 0j) -> TestFunction:
    """``(1 - |z - c|^2 / r^2)^4`` inside the disk, 0 outside; of class C^3."""
    if not radius > 0:
        raise ParameterError("radius must be positive")

    def fn(z):
        s = np.abs(z - center) ** 2 / radius**2
        return np.clip(1.0 - s, 0.0, None) ** 4

    return TestFunction(fn, radius, complex(center), "bump")


def zero_function(radius: float = 0.5) -> TestFunction:
    return TestFunction(lambda z: np.zeros(np.shape(z)), radius, 0j, "zero")


def linear_statistic(zeros: ZeroSet | np.ndarray, psi: TestFunction | Callable) -> float:
    """``sum psi(z)`` over the zeros, with multiplicity."""
    z = zeros.zeros if isinstance(zeros, ZeroSet) else np.asarray(zeros, dtype=np.complex128)
    if z.size == 0:
        return 0.0
    return float(np.sum(np.real(psi(z))))


def ks_normal(x: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``x`` and N(0,1)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if n == 0:
        raise InsufficientSampleError("empty sample")
    F = special.ndtr(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


@dataclass(frozen=True, eq=False)
class CLTReport:
    p: int
    trials: int
    statistics: np.ndarray
    normalized: np.ndarray | None
    mean: float
    var: float
    ks: float | None
    degenerate: bool

    def to_json(self) -> str:
        return json.dumps({"p": self.p, "trials": self.trials, "ks": self.ks, "mean": self.mean,
                           "var": self.var, "degenerate": self.degenerate}, indent=2) + "\n"

    def sample_csv(self) -> str:
        """One column: the normalized statistics (raw ones if degenerate)."""
        col = self.statistics if self.normalized is None else self.normalized
        buf = io.StringIO()
        buf.write("statistic\n")
        for v in col:
            buf.write(f"{float(v)!r}\n")
        return buf.getvalue()


def normalize(stats: np.ndarray) -> tuple[np.ndarray | None, float, float]:
    """Self-normalized sample, or ``None`` if the sample variance vanishes."""
    stats = np.asarray(stats, dtype=float)
    mean = float(np.mean(stats))
    centered = stats - mean
    var = float(np.mean(centered**2))
    scale = max(1.0, float(np.max(np.abs(stats))))
    if var <= (1e-12 * scale) ** 2:
        return None, mean, var
    x = centered / math.sqrt(var)
    # one correction pass removes the rounding left in mean and variance
    x = x - x.mean()
    x = x / math.sqrt(np.mean(x * x))
    return x, mean, var


def clt_experiment(psi: TestFunction, p: int, trials: int, seed: Seed, *, bulk_radius: float = 1.0,
                   threads: int = 1) -> CLTReport:
    """Linear statistics of Gaussian random polynomials with weight ``|z|^2/2``.

    Each trial draws complex Gaussian coefficients in the orthonormal basis of
    the degree-``p`` plane space. The statistics are self-normalized by their
    sample mean and standard deviation and compared with N(0,1).
    """
    if trials < MIN_TRIALS:
        raise InsufficientSampleError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if abs(psi.center) + psi.radius >= bulk_radius:
        raise DomainError("test function support must lie inside the bulk")
    basis = build_basis(plane_gaussian(p))
    stats = np.asarray(simulate(basis, complex_gaussian(), trials, seed, lambda zs: linear_statistic(zs, psi), threads))
    x, mean, var = normalize(stats)
    ks = None if x is None else ks_normal(x)
    return CLTReport(p, trials, stats, x, mean, var, ks, x is None)

"""Coefficient ensembles: the probability laws of the random coefficients.

Six laws are shipped. ``ComplexGaussian`` is the standard complex normal
law N_C(0, 1). The other five are supported in R^k (imaginary parts are
exactly zero):

* ``RealGaussian``     density pi^{-k/2} exp(-|a|^2) on R^k
* ``RadialDensity``    density Gamma(k/2+alpha)/(Gamma(alpha) pi^{k/2}) (1+|a|^2)^{-k/2-alpha}
* ``SphereUniform``    normalized surface measure on S^{k-1}
* ``IIDDensity``       i.i.d. coordinates with a tabulated density phi <= M
* ``UniformUnitCube``  i.i.d. uniform coordinates on [0, 1]
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import special
from scipy.integrate import trapezoid

from .errors import ParameterError
from .montecarlo import MCEstimate, Seed, chunked_mean, substream


class Kind(str, enum.Enum):
    COMPLEX_GAUSSIAN = "complex_gaussian"
    REAL_GAUSSIAN = "real_gaussian"
    RADIAL_DENSITY = "radial_density"
    SPHERE_UNIFORM = "sphere_uniform"
    IID_DENSITY = "iid_density"
    UNIFORM_UNIT_CUBE = "uniform_unit_cube"


ROTATION_INVARIANT = frozenset({Kind.REAL_GAUSSIAN, Kind.RADIAL_DENSITY, Kind.SPHERE_UNIFORM})


@dataclass(frozen=True, eq=False)
class TabulatedDensity:
    """Piecewise-linear density through the points ``(x[i], phi[i])``.

    The table is renormalized to unit mass. ``bound`` is the declared sup
    bound M, ``c`` and ``rho`` the declared tail constants: the mass of
    ``{|x| > e^R}`` must not exceed ``c * R**-rho`` for every R > 0.
    """

    x: np.ndarray
    phi: np.ndarray
    bound: float
    c: float
    rho: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if x.ndim != 1 or x.shape != phi.shape or x.size < 2:
            raise ParameterError("density table needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ParameterError("density abscissae must be strictly increasing")
        if np.any(phi < 0) or not np.all(np.isfinite(phi)):
            raise ParameterError("density values must be finite and non-negative")
        mass = trapezoid(phi, x)
        if not 0.99 <= mass <= 1.01:
            raise ParameterError(f"density table integrates to {mass:.6g}, expected 1")
        phi = phi / mass
        if not self.rho > 1:
            raise ParameterError("tail exponent rho must exceed 1")
        if not self.c > 0:
            raise ParameterError("tail constant c must be positive")
        if phi.max() > self.bound * (1 + 1e-12):
            raise ParameterError(f"density exceeds its declared bound M={self.bound} (max {phi.max():.6g})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "_cdf", _knot_cdf(x, phi))
        self._check_tail()

    @classmethod
    def from_function(cls, f, lo: float, hi: float, n: int = 4001, *, bound=None, c=None, rho=2.0):
        """Tabulate ``f`` on ``n`` equispaced points of ``[lo, hi]``.

        ``bound`` defaults to the table maximum, ``c`` to the smallest
        constant satisfying the tail inequality for ``rho``.
        """
        x = np.linspace(lo, hi, n)
        phi = np.asarray(f(x), dtype=float)
        phi = phi / trapezoid(phi, x)
        if bound is None:
            bound = float(phi.max())
        if c is None:
            c = max(_minimal_tail_constant(x, phi, rho), 1e-300)
        return cls(x, phi, float(bound), float(c), float(rho))

    def cdf(self, t) -> np.ndarray:
        """Exact CDF of the piecewise-linear density."""
        return _pl_cdf(self.x, self.phi, self._cdf, t)

    def tail(self, r: float) -> float:
        """Mass of ``{|x| > r}``."""
        return float(1.0 - self.cdf(r) + self.cdf(-r))

    def ppf(self, u: np.ndarray) -> np.ndarray:
        """Inverse CDF, solving the per-segment quadratic exactly."""
        u = np.asarray(u, dtype=float)
        x, phi, F = self.x, self.phi, self._cdf
        i = np.clip(np.searchsorted(F, u, side="right") - 1, 0, x.size - 2)
        d = u - F[i]
        width = x[i + 1] - x[i]
        slope = (phi[i + 1] - phi[i]) / width
        # solve phi_i h + slope h^2 / 2 = d in the numerically stable form
        disc = np.sqrt(np.maximum(phi[i] ** 2 + 2.0 * slope * d, 0.0))
        denom = phi[i] + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            h = np.where(denom > 0, 2.0 * d / denom, 0.0)
        return x[i] + np.clip(h, 0.0, width)

    def _check_tail(self):
        R, tails = _tail_profile(self.x, self.phi, self._cdf)
        bad = tails > self.c * R ** (-self.rho) * (1 + 1e-9) + 1e-15
        if np.any(bad):
            r = R[np.argmax(bad)]
            raise ParameterError(f"tail condition violated at R={r:.4g}: mass {tails[np.argmax(bad)]:.4g} > c R^-rho")

    def to_dict(self) -> dict:
        return {"M": self.bound, "c": self.c, "rho": self.rho,
                "table": [[float(a), float(b)] for a, b in zip(self.x, self.phi)]}


def _knot_cdf(x, phi):
    F = np.concatenate([[0.0], np.cumsum(0.5 * (phi[1:] + phi[:-1]) * np.diff(x))])
    return F / F[-1]


def _pl_cdf(x, phi, F, t):
    t = np.asarray(t, dtype=float)
    i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
    h = np.clip(t - x[i], 0.0, x[i + 1] - x[i])
    slope = (phi[i + 1] - phi[i]) / (x[i + 1] - x[i])
    out = F[i] + phi[i] * h + 0.5 * slope * h * h
    return np.where(t <= x[0], 0.0, np.where(t >= x[-1], 1.0, out))


def _tail_profile(x, phi, F, n=4000):
    """Grid of R in (0, log max|x|] and the masses of ``{|x| > e^R}``."""
    r_max = max(abs(x[0]), abs(x[-1]))
    if r_max <= 1.0:
        return np.empty(0), np.empty(0)
    R = np.linspace(1e-9, math.log(r_max), n)
    e = np.exp(R)
    return R, 1.0 - _pl_cdf(x, phi, F, e) + _pl_cdf(x, phi, F, -e)


def _minimal_tail_constant(x, phi, rho) -> float:
    R, tails = _tail_profile(x, phi, _knot_cdf(x, phi))
    if R.size == 0:
        return 0.0
    return float(np.max(tails * R**rho)) * 1.001


@dataclass(frozen=True)
class CoefficientEnsemble:
    """A sampleable law on C^k, for any dimension k.

    Instances are immutable and may be shared between threads.
    """

    kind: Kind
    alpha: float | None = None
    density: TabulatedDensity | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.RADIAL_DENSITY:
            if self.alpha is None or not self.alpha > 0:
                raise ParameterError("RadialDensity requires alpha > 0")
        if self.kind is Kind.IID_DENSITY and self.density is None:
            raise ParameterError("IIDDensity requires a tabulated density")

    @property
    def is_real(self) -> bool:
        return self.kind is not Kind.COMPLEX_GAUSSIAN

    @property
    def rotation_invariant(self) -> bool:
        return self.kind in ROTATION_INVARIANT

    def sample(self, rng: np.random.Generator, k: int, size: int | None = None) -> np.ndarray:
        """Draw ``size`` vectors (or one when ``size`` is None) of length ``k``."""
        if k < 1:
            raise ParameterError("dimension k must be >= 1")
        shape = (1 if size is None else size, k)
        kind = self.kind
        if kind is Kind.COMPLEX_GAUSSIAN:
            z = rng.standard_normal(shape + (2,)) * math.sqrt(0.5)
            out = z[..., 0] + 1j * z[..., 1]
        elif kind is Kind.REAL_GAUSSIAN:
            out = rng.standard_normal(shape) * math.sqrt(0.5)
        elif kind is Kind.SPHERE_UNIFORM:
            out = _unit_vectors(rng, shape)
        elif kind is Kind.RADIAL_DENSITY:
            # |a|^2/(1+|a|^2) ~ Beta(k/2, alpha); invert both tails separately
            u = rng.random(shape[0])
            x = special.betaincinv(0.5 * k, self.alpha, u)
            one_minus_x = special.betaincinv(self.alpha, 0.5 * k, 1.0 - u)
            with np.errstate(divide="ignore"):
                r = np.sqrt(x / one_minus_x)
            out = _unit_vectors(rng, shape) * r[:, None]
        elif kind is Kind.IID_DENSITY:
            out = self.density.ppf(rng.random(shape))
        elif kind is Kind.UNIFORM_UNIT_CUBE:
            out = rng.random(shape)
        else:  # pragma: no cover
            raise ParameterError(f"unknown ensemble {kind}")
        out = np.asarray(out, dtype=np.complex128)
        return out[0] if size is None else out

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.density is not None:
            d.update(self.density.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientEnsemble":
        """Build from ``{"kind": ..., "alpha": ..., "M", "c", "rho", "table": [[x, phi], ...]}``."""
        d = dict(d)
        try:
            kind = Kind(d.pop("kind"))
        except (KeyError, ValueError) as exc:
            raise ParameterError(f"bad ensemble kind: {exc}") from None
        alpha = d.pop("alpha", None)
        density = None
        if kind is Kind.IID_DENSITY:
            try:
                table = np.asarray(d.pop("table"), dtype=float)
                density = TabulatedDensity(table[:, 0], table[:, 1], float(d.pop("M")),
                                           float(d.pop("c")), float(d.pop("rho")))
            except (KeyError, IndexError, TypeError) as exc:
                raise ParameterError(f"IIDDensity descriptor incomplete: {exc}") from None
        if d:
            raise ParameterError(f"unknown ensemble keys: {sorted(d)}")
        return cls(kind, alpha=alpha, density=density)


def _unit_vectors(rng: np.random.Generator, shape) -> np.ndarray:
    g = rng.standard_normal(shape)
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    while np.any(norm == 0):  # probability zero, but keep the contract
        bad = (norm == 0)[:, 0]
        g[bad] = rng.standard_normal((int(bad.sum()), shape[-1]))
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / norm


def complex_gaussian() -> CoefficientEnsemble:
    return CoefficientEnsemble(Kind.COMPLEX_GAUSSIAN)


def real_gaussian() -> CoefficientEnsemble:
    return CoefficientEnsemble(Kind.REAL_GAUSSIAN)


def radial_density(alpha: float) -> CoefficientEnsemble:
    return CoefficientEnsemble(Kind.RADIAL_DENSITY, alpha=float(alpha))


def sphere_uniform() -> CoefficientEnsemble:
    return CoefficientEnsemble(Kind.SPHERE_UNIFORM)


def uniform_unit_cube() -> CoefficientEnsemble:
    return CoefficientEnsemble(Kind.UNIFORM_UNIT_CUBE)


def iid_density(x: Sequence[float], phi: Sequence[float], *, M: float, c: float, rho: float) -> CoefficientEnsemble:
    return CoefficientEnsemble(Kind.IID_DENSITY, density=TabulatedDensity(np.asarray(x), np.asarray(phi), M, c, rho))


def radial_normalizer(k: int, alpha: float) -> float:
    """Normalizing constant Gamma(k/2+alpha)/(Gamma(alpha) pi^{k/2})."""
    return math.exp(math.lgamma(0.5 * k + alpha) - math.lgamma(alpha) - 0.5 * k * math.log(math.pi))


def sample_coefficients(ensemble: CoefficientEnsemble, k: int, seed: Seed) -> np.ndarray:
    """One draw of the k-fold law; bit-identical for equal ``(ensemble, k, seed)``."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    return ensemble.sample(substream(seed), k)


def _first_coordinate(ensemble: CoefficientEnsemble, k: int):
    def draw(rng, m):
        return np.abs(ensemble.sample(rng, k, m)[:, 0])
    return draw


def tail_probability(ensemble: CoefficientEnsemble, R: float, trials: int, seed: Seed, k: int = 1) -> MCEstimate:
    """Monte Carlo estimate of ``P(|a_1| > e^R)``."""
    if R < 0:
        raise ParameterError("R must be >= 0")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    draw = _first_coordinate(ensemble, k)
    thr = math.exp(R)
    return chunked_mean(lambda rng, m: (draw(rng, m) > thr).astype(float), trials, seed)


def log_moment_1d(ensemble: CoefficientEnsemble, n: int, trials: int, seed: Seed, k: int = 1) -> MCEstimate:
    """Monte Carlo estimate of ``E[log(1 + |a_1|)^n]``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    draw = _first_coordinate(ensemble, k)
    return chunked_mean(lambda rng, m: np.log1p(draw(rng, m)) ** n, trials, seed)

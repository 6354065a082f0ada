"""Expected numbers of real zeros: Kac integral, classical constants, radial weights."""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .basis import OrthonormalBasis, build_basis, fubini_study, identity_basis, plane_gaussian
from .ensembles import CoefficientEnsemble, real_gaussian
from .errors import ContractError, DomainError, ParameterError
from .montecarlo import MCEstimate, Seed
from .zeros import DEFAULT_POLICY, RealZeroPolicy, count_real_zeros, simulate

#: Beyond this the Kac integrand in the logarithmic variable is below 1e-17.
KAC_CUTOFF = 40.0


class Model(str, enum.Enum):
    KAC = "kac"
    ELLIPTIC = "elliptic"
    WEYL = "weyl"
    LEGENDRE = "legendre"
    RADIAL_WEIGHT = "radial_weight"


@dataclass(frozen=True)
class RealZeroEstimate:
    model: Model
    value: float
    p: int | None = None
    leading_order: bool = True


# ----------------------------------------------------------------------------
# Kac
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class KacIntegrand:
    """The sums ``A = sum x^{2j}``, ``B = sum j x^{2j-1}``, ``C = sum j^2 x^{2j-2}``, ``j = 0..p``."""

    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ParameterError("p must be >= 1")

    def sums(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        j = np.arange(self.p + 1, dtype=float)
        P = np.polynomial.polynomial.polyval
        x2 = x * x
        A = P(x2, np.ones(self.p + 1))
        B = x * P(x2, np.r_[j[1:], 0.0])
        C = P(x2, np.r_[(j[1:]) ** 2, 0.0])
        return A, B, C

    def discriminant(self, x) -> np.ndarray:
        """``A C - B^2`` as the nonnegative sum ``sum_d d^2 x^{2d-2} sum_i x^{4i}``."""
        x = np.asarray(x, dtype=float)
        p = self.p
        x2 = x * x
        x4 = x2 * x2
        P = np.polynomial.polynomial.polyval
        # inner geometric sums G_m = sum_{i<=m} x^{4i}, m = p-d
        out = np.zeros_like(x)
        for d in range(1, p + 1):
            out = out + d * d * x2 ** (d - 1) * P(x4, np.ones(p - d + 1))
        return out

    def __call__(self, x) -> np.ndarray:
        """``sqrt(A C - B^2) / A``."""
        A, _, _ = self.sums(x)
        return np.sqrt(self.discriminant(x)) / A


def _F(y: float) -> float:
    """``1/sinh(y)^2 - 1/y^2``, accurate near 0."""
    if y < 0.05:
        y2 = y * y
        return -1.0 / 3.0 + y2 * (1.0 / 15.0 + y2 * (-2.0 / 189.0 + y2 / 675.0))
    return _csch2(y) - 1.0 / (y * y)


def _csch2(y: float) -> float:
    e = math.expm1(-2.0 * y)
    return 4.0 * math.exp(-2.0 * y) / (e * e)


def kac_log_integrand(y: float, p: int) -> float:
    """Kac density in the variable ``y = -log x`` (without the 2/pi factor).

    ``csch(y)^2 - q^2 csch(q y)^2`` with ``q = p + 1``; near 0 the two
    ``1/y^2`` poles are cancelled analytically.
    """
    q = p + 1
    if y < 0.5:
        v = _F(y) - q * q * _F(q * y)
    else:
        v = _csch2(y) - q * q * _csch2(q * y)
    return math.sqrt(v) if v > 0 else 0.0


def kac_expected(p: int, *, tol: float = 1e-12) -> float:
    """Expected number of real zeros of ``sum a_j x^j`` with iid standard real Gaussian ``a_j``.

    The integral over ``x in (0, 1)`` is rewritten in ``y = -log x`` where the
    integrand becomes ``sqrt(F(y) - (p+1)^2 F((p+1) y))`` with
    ``F(y) = sinh(y)^-2 - y^-2``; the four symmetric pieces of the real line
    contribute equally. Integration runs over dyadic panels from ``1/(p+1)``
    to ``KAC_CUTOFF``.
    """
    if p < 1:
        raise ParameterError("p must be >= 1")
    a = 1.0 / (p + 1)
    edges = [0.0, a]
    while edges[-1] < KAC_CUTOFF:
        edges.append(min(2.0 * edges[-1], KAC_CUTOFF))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(kac_log_integrand, lo, hi, args=(p,), epsabs=tol, epsrel=1e-13, limit=200)
        total += val
    return 2.0 / math.pi * total


def kac_expected_direct(p: int) -> float:
    """Kac integral in the original variable (oracle for small ``p``)."""
    f = KacIntegrand(p)
    val, _ = integrate.quad(lambda x: float(f(x)), 0.0, 1.0, epsabs=1e-12, limit=400)
    return 4.0 / math.pi * val


def gaussian_real_zeros(variances: np.ndarray, *, log: bool = False) -> float:
    """Expected real zeros of ``sum a_j c_j x^j``, ``a_j`` iid N(0,1), ``variances = c_j^2``.

    With ``log=True`` the argument holds ``log c_j^2`` instead, for profiles
    beyond the double range.

    Edelman-Kostlan integral ``(1/pi) int sqrt(AC - B^2)/A`` with the sums
    weighted by ``variances``. Writing ``pi_j`` for the normalized weights
    ``c_j^2 x^{2j}``, the integrand equals ``sqrt(Var_pi(j)) / |x|``, which is
    evaluated by a two-pass variance without cancellation. The range
    ``|x| > 1`` is folded onto ``(0, 1)`` through the reversed polynomial.
    """
    v = np.asarray(variances, dtype=float)
    if v.ndim != 1 or v.size < 2 or (not log and np.any(v < 0)) or np.any(np.isnan(v)):
        raise ParameterError("need at least two nonnegative variances")
    if log:
        lv = v
    else:
        with np.errstate(divide="ignore"):
            lv = np.log(v)
    j = np.arange(v.size, dtype=float)
    total = 0.0
    for lw in (lv, lv[::-1]):

        def rho(x, lw=lw):
            if x == 0.0:
                return math.exp(0.5 * (lw[1] - lw[0])) if lw[0] > -np.inf else 0.0
            lp = lw + 2.0 * j * math.log(x)
            pi = np.exp(lp - lp.max())
            pi /= pi.sum()
            m = float(pi @ j)
            return math.sqrt(float(pi @ (j - m) ** 2)) / x

        val, _ = integrate.quad(rho, 0.0, 1.0, epsabs=1e-11, epsrel=1e-11, limit=400)
        total += val
    return 2.0 / math.pi * total


# ----------------------------------------------------------------------------
# classical constants and radial weights
# ----------------------------------------------------------------------------


def classical_constant(model: Model | str, p: int) -> RealZeroEstimate:
    """Leading-order expected real zeros for the elliptic, Weyl and Legendre models."""
    try:
        model = Model(model)
    except ValueError:
        raise DomainError(f"unknown model {model!r}") from None
    if p < 1:
        raise ParameterError("p must be >= 1")
    if model is Model.ELLIPTIC:
        v = math.sqrt(p)
    elif model is Model.WEYL:
        v = 2.0 / math.pi * math.sqrt(p)
    elif model is Model.LEGENDRE:
        v = p / math.sqrt(3.0)
    else:
        raise DomainError(f"no classical constant for model {model.value}")
    return RealZeroEstimate(model, v, p)


@dataclass(frozen=True)
class RadialWeight:
    """Radial weight ``phi(z) = g(|z|)`` described by its Laplacian.

    ``support`` is the real trace of the support of the equilibrium measure,
    an interval supplied by the caller.
    """

    laplacian: Callable[[float], float]
    support: tuple[float, float] | None = None
    name: str = "custom"

    @classmethod
    def from_profile(cls, g: Callable[[float], float], support=None, name="custom", h: float = 1e-4) -> "RadialWeight":
        """Laplacian ``g'' + g'/r`` by central differences (``2 g''(0)`` at the origin)."""
        def lap(x):
            r = abs(x)
            s = h * (1.0 + r)
            d2 = (g(r + s) - 2.0 * g(r) + g(abs(r - s))) / (s * s)
            if r < s:
                return 2.0 * d2
            d1 = (g(r + s) - g(r - s)) / (2.0 * s)
            return d2 + d1 / r
        return cls(lap, support, name)


def gaussian_weight() -> RadialWeight:
    """``phi = |z|^2 / 2``: Laplacian 2, equilibrium measure on the unit disk."""
    return RadialWeight(lambda x: 2.0, (-1.0, 1.0), "gaussian")


def radial_weight_limit(weight: RadialWeight, support: tuple[float, float] | None = None) -> float:
    """``(1/pi) int_{S cap R} sqrt(Laplacian(phi)/2) dx``: limit of ``E N_p / sqrt(p)``."""
    s = support if support is not None else weight.support
    if s is None:
        raise ContractError("the real support interval of the weight must be supplied")
    lo, hi = float(s[0]), float(s[1])
    if hi < lo:
        raise ParameterError("support interval is reversed")
    if hi == lo:
        return 0.0

    def f(x):
        v = weight.laplacian(x)
        if v < 0:
            raise DomainError(f"weight is not subharmonic at {x}")
        return math.sqrt(0.5 * v)

    # radial weights may have a kink at the origin
    pieces = [(lo, 0.0), (0.0, hi)] if lo < 0.0 < hi else [(lo, hi)]
    val = sum(integrate.quad(f, a, b, epsabs=1e-10, epsrel=1e-10, limit=200)[0] for a, b in pieces)
    return val / math.pi


# ----------------------------------------------------------------------------
# empirical counts
# ----------------------------------------------------------------------------


def model_basis(model: Model | str, p: int) -> OrthonormalBasis:
    """Kac: monomials; Weyl: Gaussian-weighted plane; elliptic: Fubini-Study."""
    model = Model(model)
    if model is Model.KAC:
        return identity_basis(p)
    if model is Model.WEYL:
        return build_basis(plane_gaussian(p))
    if model is Model.ELLIPTIC:
        return build_basis(fubini_study(p))
    raise DomainError(f"no basis shipped for model {model.value}")


def standardized(ensemble: CoefficientEnsemble, mean: float, sd: float) -> Callable:
    """Coefficient sampler drawing ``(a - mean) / sd`` from ``ensemble``."""
    def draw(rng, k):
        return (ensemble.sample(rng, k) - mean) / sd
    return draw


def empirical_real_zeros(
    basis: OrthonormalBasis,
    sampler: CoefficientEnsemble | Callable | None = None,
    trials: int = 1000,
    seed: Seed = 0,
    policy: RealZeroPolicy = DEFAULT_POLICY,
    threads: int = 1,
    interval: tuple[float, float] | None = None,
) -> MCEstimate:
    """Mean real-zero count over ``trials`` polynomials; trial ``t`` uses substream ``(seed, t)``.

    With ``interval`` only real zeros inside it are counted.
    """
    sampler = real_gaussian() if sampler is None else sampler

    def count(zs):
        z = zs.zeros
        if interval is not None:
            z = z[(z.real >= interval[0]) & (z.real <= interval[1])]
        return count_real_zeros(z, policy)

    return MCEstimate.from_values(np.asarray(simulate(basis, sampler, trials, seed, count, threads), dtype=float))


def kac_table(rows: list[tuple[int, float, MCEstimate | None]]) -> str:
    """CSV ``p,kac_expected,empirical_mean,empirical_se``."""
    buf = io.StringIO()
    buf.write("p,kac_expected,empirical_mean,empirical_se\n")
    for p, k, est in rows:
        m = "" if est is None else repr(est.mean)
        s = "" if est is None else repr(est.se)
        buf.write(f"{p},{k!r},{m},{s}\n")
    return buf.getvalue()

"""Logarithmic moments of coefficient laws and their explicit upper bounds.

For a law sigma on R^k and a complex unit vector u the quantity of interest is

    J_k(u) = E |log |<a, u>||^nu,   <a, u> = sum a_j u_j.

Each ``bound_*`` function returns the explicit constant for one family of
laws; :func:`log_moment_mc` estimates ``J_k(u)`` by Monte Carlo.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .ensembles import (CoefficientEnsemble, Kind, radial_density, real_gaussian, sphere_uniform,
                        uniform_unit_cube)
from .errors import DomainError, NumericError, ParameterError
from .montecarlo import CHUNK, MCEstimate, Seed, substream

#: ``|<a,u>|`` below this is clamped before taking the logarithm.
CLAMP = 1e-300

#: Largest k used when instantiating the Wallis bracket constant.
WALLIS_KMAX = 10_000


# ----------------------------------------------------------------------------
# queries and Monte Carlo
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentQuery:
    ensemble: CoefficientEnsemble
    k: int
    u: np.ndarray
    nu: float = 1.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "u", u)
        if self.k < 1 or u.size != self.k:
            raise ParameterError(f"direction has length {u.size}, expected k = {self.k}")
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ParameterError("direction must be a unit vector")
        if self.nu < 1:
            raise ParameterError("nu must be >= 1")

    @property
    def s(self) -> np.ndarray:
        return self.u.real

    @property
    def t(self) -> np.ndarray:
        return self.u.imag


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    se: float
    n: int
    discarded: int = 0
    clamped: int = 0

    @property
    def estimate(self) -> MCEstimate:
        return MCEstimate(self.mean, self.se, self.n)


def random_direction(rng: np.random.Generator, k: int, real: bool = False) -> np.ndarray:
    """Uniform unit vector in R^k (``real``) or C^k."""
    g = rng.standard_normal(k) if real else rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return (g / np.linalg.norm(g)).astype(np.complex128)


def _log_power(x: np.ndarray, nu: float) -> tuple[np.ndarray, int, int]:
    """``|log x|^nu`` with exact zeros dropped and tiny values clamped."""
    zero = x == 0
    kept = x[~zero]
    small = kept < CLAMP
    vals = np.abs(np.log(np.maximum(kept, CLAMP))) ** nu
    return vals, int(zero.sum()), int(small.sum())


def _draws(ensemble, k, trials, seed):
    """Coefficient samples in fixed-size chunks, chunk ``c`` from substream ``(seed, c)``."""
    done = 0
    c = 0
    while done < trials:
        m = min(CHUNK, trials - done)
        yield ensemble.sample(substream(seed, c), k, m)
        done += m
        c += 1


def _estimate(values: list[np.ndarray], discarded: int, clamped: int) -> MomentEstimate:
    v = np.concatenate(values) if values else np.empty(0)
    if v.size == 0:
        raise NumericError("all samples discarded")
    est = MCEstimate.from_values(v)
    return MomentEstimate(est.mean, est.se, est.n, discarded, clamped)


def log_moments_mc(ensemble: CoefficientEnsemble, k: int, directions: Sequence, nu: float,
                   trials: int, seed: Seed) -> list[MomentEstimate]:
    """``J_k(u)`` for several directions from one shared sample of ``trials`` draws."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    U = np.stack([MomentQuery(ensemble, k, u, nu).u for u in directions], axis=1)
    vals = [[] for _ in range(U.shape[1])]
    disc = [0] * U.shape[1]
    clam = [0] * U.shape[1]
    for a in _draws(ensemble, k, trials, seed):
        ip = np.abs(a @ U)
        for i in range(U.shape[1]):
            v, d, c = _log_power(ip[:, i], nu)
            vals[i].append(v)
            disc[i] += d
            clam[i] += c
    return [_estimate(vals[i], disc[i], clam[i]) for i in range(U.shape[1])]


def log_moment_mc(query: MomentQuery, trials: int, seed: Seed) -> MomentEstimate:
    """Monte Carlo mean and standard error of ``|log|<a,u>||^nu``.

    Samples with ``<a,u> = 0`` exactly are discarded and counted; values below
    ``CLAMP`` are clamped and counted.
    """
    return log_moments_mc(query.ensemble, query.k, [query.u], query.nu, trials, seed)[0]


# ----------------------------------------------------------------------------
# bounds
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentBound:
    name: str
    value: float
    parameters: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, v in {"value": self.value, **self.constants}.items():
            if not (math.isfinite(v) and v >= 0):
                raise NumericError(f"bound constituent {key} = {v} is not finite and nonnegative")


def _quad_split(f, lo, hi, kink: float | None = 1.0):
    """Adaptive quadrature split at the kink of ``|log x|``."""
    total = 0.0
    pieces = [(lo, kink), (kink, hi)] if kink is not None and lo < kink < hi else [(lo, hi)]
    for a, b in pieces:
        if math.isinf(b) and a > 0:
            # x = a e^s turns a slow power tail into an exponential one
            g = lambda s, a=a: f(a * math.exp(s)) * a * math.exp(s) if s < 700 else 0.0
            val, err = integrate.quad(g, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
        else:
            val, err = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
        if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
            raise NumericError(f"quadrature did not converge on [{a}, {b}]")
        total += val
    return total


def gaussian_log_integral(nu: float) -> float:
    """``int_0^inf |log x|^nu e^{-x^2} dx``."""
    return _quad_split(lambda x: abs(math.log(x)) ** nu * math.exp(-x * x), 0.0, np.inf)


def bound_real_gaussian(nu: float) -> MomentBound:
    """``Gamma_nu = 2^{2 nu} int_0^inf |log x|^nu e^{-x^2} dx + 2^nu``."""
    if nu < 1:
        raise ParameterError("nu must be >= 1")
    q = gaussian_log_integral(nu)
    return MomentBound("real_gaussian", 4.0**nu * q + 2.0**nu, {"nu": nu}, {"Q": q})


def radial_constants(alpha: float, nu: float) -> tuple[float, float]:
    """``(C_{alpha,nu}, C'_{alpha,nu})``."""
    norm = 2.0 * math.exp(special.gammaln(alpha + 0.5) - special.gammaln(alpha)) / math.sqrt(math.pi)
    c1 = _quad_split(lambda y: abs(math.log(y)) ** nu * (1.0 + y * y) ** (-alpha - 0.5), 0.0, np.inf)
    c2 = _quad_split(lambda x: abs(math.log(x)) ** nu * x ** (-2.0 * alpha - 1.0), 1.0 / math.sqrt(2.0), np.inf)
    return norm * c1, norm * c2


def bound_radial(alpha: float, nu: float) -> MomentBound:
    """``Gamma_{alpha,nu} = 2^{2nu-1} C + 2^{nu-1} C' + 2^nu``; independent of k."""
    if not alpha > 0:
        raise ParameterError("alpha must be > 0")
    if nu < 1:
        raise ParameterError("nu must be >= 1")
    c, cp = radial_constants(alpha, nu)
    val = 2.0 ** (2 * nu - 1) * c + 2.0 ** (nu - 1) * cp + 2.0**nu
    return MomentBound("radial", val, {"alpha": alpha, "nu": nu}, {"C": c, "C_prime": cp})


def wallis_integrals(kmax: int = WALLIS_KMAX, nodes: int = 600) -> np.ndarray:
    """``C_k = int_0^{pi/2} cos^k t dt`` for ``k = 1..kmax`` by Gauss-Legendre quadrature."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.25 * math.pi * (x + 1.0)
    w = 0.25 * math.pi * w
    logc = np.log(np.cos(t))
    ks = np.arange(1, kmax + 1, dtype=float)
    out = np.empty(kmax)
    for i in range(0, kmax, 512):
        kk = ks[i:i + 512, None]
        out[i:i + 512] = np.exp(kk * logc[None, :]) @ w
    return out


def wallis_closed_form(k) -> np.ndarray:
    """``C_k = sqrt(pi) Gamma((k+1)/2) / (2 Gamma(k/2 + 1))``."""
    k = np.asarray(k, dtype=float)
    return 0.5 * math.sqrt(math.pi) * np.exp(special.gammaln(0.5 * (k + 1)) - special.gammaln(0.5 * k + 1))


@functools.lru_cache(maxsize=None)
def wallis_constant(kmax: int = WALLIS_KMAX) -> float:
    """Lower bracket ``A = min_{k <= kmax} C_k sqrt(k)``, from direct quadrature."""
    c = wallis_integrals(kmax)
    return float(np.min(c * np.sqrt(np.arange(1, kmax + 1))))


def bound_sphere(k: int, nu: float) -> MomentBound:
    """``2^{nu-1} A^{-1} (3 (log k)^nu + 2^{nu+1} nu^nu e^{-nu}) + 1`` for ``k >= 3``."""
    if k < 3:
        raise DomainError("the sphere bound is established for k >= 3 only")
    if nu < 1:
        raise ParameterError("nu must be >= 1")
    A = wallis_constant()
    ik = (3.0 * math.log(k) ** nu + 2.0 ** (nu + 1) * nu**nu * math.exp(-nu)) / A
    return MomentBound("sphere", 2.0 ** (nu - 1) * ik + 1.0, {"k": k, "nu": nu}, {"A": A, "I_k_bound": ik})


def bound_iid(k: int, nu: float, rho: float, c: float, M: float, R0: float | None = None) -> MomentBound:
    """``R0^nu (1 + 2^rho nu c k / ((rho - nu) R0^rho)) + 4 sqrt(2) M nu^nu``, ``R0 = k^{1/rho}``."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if nu < 1:
        raise ParameterError("nu must be >= 1")
    if not nu < rho:
        raise DomainError("the i.i.d. bound needs nu < rho")
    if not (c > 0 and M > 0):
        raise ParameterError("c and M must be positive")
    r0 = k ** (1.0 / rho) if R0 is None else float(R0)
    if not r0 > 0:
        raise ParameterError("R0 must be positive")
    head = r0**nu * (1.0 + 2.0**rho * nu * c * k / ((rho - nu) * r0**rho))
    tail = 4.0 * math.sqrt(2.0) * M * nu**nu
    return MomentBound("iid", head + tail, {"k": k, "nu": nu, "rho": rho, "c": c, "M": M},
                       {"R0": r0, "head": head, "tail": tail})


def bound_uniform_cube(k: int, nu: float) -> MomentBound:
    """``(log k)^nu + 6 nu^nu``."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if nu < 1:
        raise ParameterError("nu must be >= 1")
    return MomentBound("uniform_cube", math.log(k) ** nu + 6.0 * nu**nu, {"k": k, "nu": nu})


def bound_for(ensemble: CoefficientEnsemble, k: int, nu: float) -> MomentBound:
    """The applicable bound for a shipped ensemble."""
    kind = ensemble.kind
    if kind is Kind.REAL_GAUSSIAN:
        return bound_real_gaussian(nu)
    if kind is Kind.RADIAL_DENSITY:
        return bound_radial(ensemble.alpha, nu)
    if kind is Kind.SPHERE_UNIFORM:
        return bound_sphere(k, nu)
    if kind is Kind.UNIFORM_UNIT_CUBE:
        return bound_uniform_cube(k, nu)
    if kind is Kind.IID_DENSITY:
        d = ensemble.density
        return bound_iid(k, nu, d.rho, d.c, d.bound)
    raise DomainError(f"no moment bound for {kind.value}")


# ----------------------------------------------------------------------------
# inequality checks
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RotationMomentReport:
    holds: bool
    J: MCEstimate
    I: MCEstimate
    K: MCEstimate | None
    bound: float
    gap: MCEstimate
    ball_holds: bool | None = None
    ball_gap: MCEstimate | None = None


def rotation_moment_check(ensemble: CoefficientEnsemble, u, nu: float, trials: int, seed: Seed) -> RotationMomentReport:
    """Monte Carlo check of ``J_k(u) <= 2^{2nu-1} I_k + 2^{nu-1} K_k(t) + 2^nu``.

    ``I_k = E|log|a_1||^nu`` and ``K_k(t) = E[|log(|a_1||t|)|^nu; |a_1||t| > 2^{-1/2}]``.
    All three are computed on the same draws, and the verdict tests the
    per-sample difference, so the standard error accounts for correlation.
    If ``|s| < |t|`` the direction is multiplied by ``-i``, which swaps the
    roles of ``s`` and ``t`` and leaves ``|<a,u>|`` unchanged. For laws
    supported in the closed unit ball, ``J_k(u) <= 2^{nu-1} I_k + 1`` is
    checked as well.
    """
    if not ensemble.rotation_invariant:
        raise DomainError(f"{ensemble.kind.value} is not rotation invariant")
    u = np.asarray(u, dtype=np.complex128).reshape(-1)
    q = MomentQuery(ensemble, u.size, u, nu)
    u = q.u
    if np.linalg.norm(u.real) < np.linalg.norm(u.imag):
        u = -1j * u
    tn = float(np.linalg.norm(u.imag))
    cJ, cI, cK = 2.0 ** (2 * nu - 1), 2.0 ** (nu - 1), 2.0**nu
    Js, Is, Ks, D, Db = [], [], [], [], []
    ball = ensemble.kind is Kind.SPHERE_UNIFORM
    for a in _draws(ensemble, u.size, trials, seed):
        ip = np.abs(a @ u)
        a1 = np.abs(a[:, 0].real)
        ok = (ip > 0) & (a1 > 0)
        ip, a1 = np.maximum(ip[ok], CLAMP), np.maximum(a1[ok], CLAMP)
        j = np.abs(np.log(ip)) ** nu
        i = np.abs(np.log(a1)) ** nu
        x = a1 * tn
        kv = np.where(x > 1.0 / math.sqrt(2.0), np.abs(np.log(np.maximum(x, CLAMP))) ** nu, 0.0)
        Js.append(j)
        Is.append(i)
        Ks.append(kv)
        D.append(j - cJ * i - cI * kv)
        if ball:
            Db.append(j - cI * i)
    J, I, K = (MCEstimate.from_values(np.concatenate(v)) for v in (Js, Is, Ks))
    gap = MCEstimate.from_values(np.concatenate(D))
    bound = cJ * I.mean + cI * K.mean + cK
    holds = gap.mean <= cK + 3.0 * gap.se
    ball_holds = ball_gap = None
    if ball:
        ball_gap = MCEstimate.from_values(np.concatenate(Db))
        ball_holds = ball_gap.mean <= 1.0 + 3.0 * ball_gap.se
    return RotationMomentReport(bool(holds), J, I, K, bound, gap, ball_holds, ball_gap)


@dataclass(frozen=True)
class LogIntegralReport:
    holds: bool
    lhs: float
    rhs: float


def log_integral_lhs(nu: float, b: float) -> float:
    """``int_0^1 (-log x)^nu (1 - x^2)^b dx``."""
    return _quad_split(lambda x: (-math.log(x)) ** nu * (1.0 - x * x) ** b, 0.0, 1.0, kink=None)


def log_integral_rhs(nu: float, b: float, tau: float) -> float:
    return 2.0 ** (nu + 1) * (nu / math.e) ** nu * math.sqrt(tau) + 2.0 * (-math.log(tau)) ** nu / math.sqrt(b + 1.5)


def log_integral_check(nu: float, b: float, tau: float) -> LogIntegralReport:
    if nu < 1 or b < 0 or not 0 < tau < 1:
        raise ParameterError("need nu >= 1, b >= 0, 0 < tau < 1")
    lhs = log_integral_lhs(nu, b)
    rhs = log_integral_rhs(nu, b, tau)
    return LogIntegralReport(lhs <= rhs + 1e-9, lhs, rhs)


# ----------------------------------------------------------------------------
# report
# ----------------------------------------------------------------------------


def report_record(bound: MomentBound, est: MomentEstimate | None, nse: float = 3.0, **parameters) -> dict:
    """JSON-ready ``{bound_name, parameters, bound_value, mc_estimate, mc_se, verdict}``."""
    rec = {
        "bound_name": bound.name,
        "parameters": {**bound.parameters, **parameters},
        "bound_value": bound.value,
        "mc_estimate": None if est is None else est.mean,
        "mc_se": None if est is None else est.se,
        "verdict": None if est is None else bool(est.mean <= bound.value + nse * est.se),
    }
    return rec


def report_json(records: list[dict]) -> str:
    return json.dumps(records, indent=2, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return [[float(z.real), float(z.imag)] for z in o.reshape(-1)] if np.iscomplexobj(o) else o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    raise TypeError(f"not serializable: {type(o)}")


# ----------------------------------------------------------------------------
# grid runs
# ----------------------------------------------------------------------------

#: Dimensions and exponents of the shipped verification grid.
GRID_K = (1, 2, 3, 10, 50)
GRID_NU = (1, 2)
GRID_DIRECTIONS = 20


def shipped_ensembles() -> list[CoefficientEnsemble]:
    """Ensembles with a bound among the shipped propositions."""
    return [real_gaussian(), radial_density(0.5), radial_density(1.0), radial_density(2.0), sphere_uniform(),
            uniform_unit_cube()]


def moment_grid(ensembles: Sequence[CoefficientEnsemble], ks: Sequence[int] = GRID_K, nus: Sequence[float] = GRID_NU,
                directions: int = GRID_DIRECTIONS, trials: int = 100_000, seed: Seed = 0) -> list[dict]:
    """Report records for every (ensemble, k, nu) with an applicable bound.

    Directions are uniform complex unit vectors drawn from substream
    ``(seed, e, k)``; the ``directions`` estimates of one cell share one
    coefficient sample from substream ``(seed, e, k, nu_index)``. Cells
    without a bound (sphere at k < 3) are skipped.
    """
    out = []
    base = _seed_tuple(seed)
    for e_idx, ens in enumerate(ensembles):
        for k in ks:
            for n_idx, nu in enumerate(nus):
                try:
                    bound = bound_for(ens, k, nu)
                except DomainError:
                    continue
                rng = substream(base + (e_idx, k))
                dirs = [random_direction(rng, k) for _ in range(directions)]
                ests = log_moments_mc(ens, k, dirs, nu, trials, base + (e_idx, k, 1000 + n_idx))
                for d, est in enumerate(ests):
                    rec = report_record(bound, est, ensemble=ens.to_dict(), direction=d)
                    rec["discarded"] = est.discarded
                    rec["clamped"] = est.clamped
                    out.append(rec)
    return out


def _seed_tuple(seed: Seed) -> tuple[int, ...]:
    return (int(seed),) if isinstance(seed, (int, np.integer)) else tuple(int(s) for s in seed)


# interface names
lemma41_check = rotation_moment_check
lemma45_check = log_integral_check

"""Weighted L2 spaces of polynomials and their orthonormal bases.

Three spaces are shipped, each for a degree p:

* ``UNIT_SQUARE``     Lebesgue measure on Q = [-1/2, 1/2]^2, no weight.
* ``PLANE_GAUSSIAN``  Lebesgue measure on C with weight |z|^2/2, i.e. the
                      inner product uses exp(-p |z|^2).
* ``FUBINI_STUDY``    (f, g) = int f conj(g) / (pi (1+|z|^2)^{p+2}) dA.

A basis is stored as the upper-triangular matrix ``R`` whose column j holds
the monomial coefficients of the j-th basis polynomial. For the two
rotation-invariant spaces the basis is a rescaled monomial basis, kept as
log-coefficients so that very high degrees do not overflow.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath
import numpy as np
from scipy import linalg, special
from scipy.special import logsumexp

from .errors import DecompositionError, DomainError, NumericError, ParameterError

#: Largest degree for the square model (monomial Grams are exponentially ill-conditioned).
SQUARE_MAX_DEGREE = 60

#: Beyond this modulus basis values are evaluated in scaled (log) form.
SCALED_EVAL_RADIUS = 2.0


class Domain(str, enum.Enum):
    UNIT_SQUARE = "unit_square"
    PLANE_GAUSSIAN = "plane_gaussian"
    FUBINI_STUDY = "fubini_study"


@dataclass(frozen=True)
class WeightedSpace:
    domain: Domain
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        if int(self.degree) != self.degree or self.degree < 0:
            raise ParameterError("degree must be a non-negative integer")
        object.__setattr__(self, "degree", int(self.degree))
        if self.domain is Domain.UNIT_SQUARE and self.degree > SQUARE_MAX_DEGREE:
            raise ParameterError(f"square model is capped at degree {SQUARE_MAX_DEGREE}")

    @property
    def dim(self) -> int:
        return self.degree + 1

    def weight(self, z) -> np.ndarray:
        """The weight phi(z); the inner product carries exp(-2 p phi)."""
        z = np.asarray(z)
        if self.domain is Domain.UNIT_SQUARE:
            return np.zeros(z.shape)
        if self.domain is Domain.PLANE_GAUSSIAN:
            return 0.5 * np.abs(z) ** 2
        return 0.5 * np.log1p(np.abs(z) ** 2)


def unit_square(p: int) -> WeightedSpace:
    return WeightedSpace(Domain.UNIT_SQUARE, p)


def plane_gaussian(p: int) -> WeightedSpace:
    return WeightedSpace(Domain.PLANE_GAUSSIAN, p)


def fubini_study(p: int) -> WeightedSpace:
    return WeightedSpace(Domain.FUBINI_STUDY, p)


# ----------------------------------------------------------------------------
# quadrature rules
# ----------------------------------------------------------------------------


def quadrature_rule(space: WeightedSpace, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights with ``sum w f(z) ~ int f e^{-2p phi} dnu``.

    ``m`` is the per-axis node count. Square: tensor Gauss-Legendre.
    Plane: Gauss-Laguerre in ``p |z|^2`` times an equispaced angular rule.
    Fubini-Study: Gauss-Legendre in ``x = |z|^2 / (1 + |z|^2)`` times an
    equispaced angular rule. Each rule integrates ``z^l conj(z)^j`` exactly
    (up to rounding) for ``l, j <= p`` once ``2m - 1 >= 2p``.
    """
    p = space.degree
    if space.domain is Domain.UNIT_SQUARE:
        x, w = np.polynomial.legendre.leggauss(m)
        x, w = 0.5 * x, 0.5 * w
        X, Y = np.meshgrid(x, x, indexing="ij")
        return (X + 1j * Y).ravel(), np.outer(w, w).ravel()
    n_ang = 2 * m + 1
    theta = 2 * np.pi * np.arange(n_ang) / n_ang
    if space.domain is Domain.PLANE_GAUSSIAN:
        pp = max(p, 1)
        t, wt = special.roots_laguerre(m)
        r = np.sqrt(t / pp)
        wr = wt / (2 * pp)
        # at p = 0 the weight is 1 and the plane has infinite area
        if p == 0:
            raise ParameterError("PlaneGaussian requires p >= 1")
    else:
        x, wx = np.polynomial.legendre.leggauss(m)
        x, wx = 0.5 * (x + 1), 0.5 * wx
        r = np.sqrt(x / (1 - x))
        wr = wx * (1 - x) ** p / (2 * np.pi)
    Z = r[:, None] * np.exp(1j * theta)[None, :]
    W = np.repeat(wr[:, None] * (2 * np.pi / n_ang), n_ang, axis=1)
    return Z.ravel(), W.ravel()


def nodes_per_axis(p: int) -> int:
    return p + 4


def gram_matrix(space: WeightedSpace) -> np.ndarray:
    """Monomial Gram matrix ``S[l, j] = (z^l, z^j)_p``.

    Square and plane use the quadrature rule with ``p + 4`` nodes per axis;
    Fubini-Study uses the exact Beta integral ``j! (p-j)! / (p+1)!``.
    """
    p = space.degree
    if space.domain is Domain.FUBINI_STUDY:
        d = [float(Fraction(math.factorial(j) * math.factorial(p - j), math.factorial(p + 1))) for j in range(p + 1)]
        return np.diag(np.array(d, dtype=np.complex128))
    z, w = quadrature_rule(space, nodes_per_axis(p))
    V = z[:, None] ** np.arange(p + 1)[None, :]
    S = (V.T * w) @ V.conj()
    S = 0.5 * (S + S.conj().T)
    if not np.all(np.isfinite(S)):
        raise NumericError("non-finite Gram entries")
    return S


def square_moment(a: int, b: int) -> Fraction:
    """Exact ``int_Q x^a y^b dx dy``."""
    if a % 2 or b % 2:
        return Fraction(0)
    return Fraction(1, (a + 1) * (b + 1) * 2 ** (a + b))


@functools.lru_cache(maxsize=None)
def square_gram_exact(p: int) -> tuple[tuple[Fraction, ...], ...]:
    """Exact rational Gram matrix of the monomials on Q.

    Expands ``(x+iy)^l (x-iy)^j`` and integrates term by term with
    separated one-dimensional moments. Entries vanish unless
    ``l = j (mod 4)``, and are then real.
    """
    rows = []
    for l in range(p + 1):
        row = []
        for j in range(p + 1):
            if (l - j) % 4:
                row.append(Fraction(0))
                continue
            # coefficient of x^{n-beta} (iy)^beta in (x+iy)^l (x-iy)^j
            n = l + j
            conv = [0] * (n + 1)
            for a in range(l + 1):
                ca = comb(l, a)
                for b in range(j + 1):
                    conv[a + b] += ca * comb(j, b) * (-1) ** b
            total = Fraction(0)
            for beta in range(0, n + 1, 2):
                if conv[beta]:
                    sign = -1 if beta % 4 == 2 else 1
                    total += sign * conv[beta] * square_moment(n - beta, beta)
            row.append(total)
        rows.append(tuple(row))
    return tuple(rows)


# ----------------------------------------------------------------------------
# bases
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Evaluable orthonormal basis of C_p[z].

    Exactly one of ``R`` (general upper-triangular coefficient matrix) and
    ``log_coef`` (closed form ``P_j = exp(log_coef[j]) z^j``) is set.
    """

    space: WeightedSpace | None
    R: np.ndarray | None = None
    log_coef: np.ndarray | None = None
    condition: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return (self.log_coef.size if self.R is None else self.R.shape[0]) - 1

    @property
    def dim(self) -> int:
        return self.degree + 1

    @property
    def closed_form(self) -> bool:
        return self.R is None

    def matrix(self) -> np.ndarray:
        """Dense coefficient matrix (raises if it does not fit in double)."""
        if self.R is not None:
            return self.R
        if self.log_coef.max() > 709:
            raise NumericError("closed-form coefficients overflow double precision")
        return np.diag(np.exp(self.log_coef)).astype(np.complex128)


def _potrf(S: np.ndarray) -> np.ndarray:
    (potrf,) = linalg.get_lapack_funcs(("potrf",), (S,))
    L, info = potrf(S, lower=True, clean=True, overwrite_a=False)
    if info > 0:
        raise DecompositionError(info - 1)
    if info < 0:  # pragma: no cover
        raise NumericError(f"potrf argument {-info} invalid")
    return L


def cholesky_onb(S, space: WeightedSpace | None = None) -> OrthonormalBasis:
    """Orthonormal basis ``R = L^{-H}`` from ``S = L L^H``.

    Then ``R^H S R = Id`` and ``R`` is upper triangular with positive
    diagonal. A non-positive pivot raises :class:`DecompositionError`
    carrying the 0-based pivot index.
    """
    S = np.asarray(S, dtype=np.complex128)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ParameterError("Gram matrix must be square")
    if not np.all(np.isfinite(S)):
        raise NumericError("non-finite Gram entries")
    L = _potrf(0.5 * (S + S.conj().T))
    n = S.shape[0]
    R = linalg.solve_triangular(L, np.eye(n, dtype=np.complex128), lower=True).conj().T
    cond = float(np.linalg.norm(S, 2) * np.linalg.norm(R, 2) ** 2)
    return OrthonormalBasis(space, R=np.triu(R), condition=cond)


def closed_form_basis(space: WeightedSpace) -> OrthonormalBasis:
    """Rescaled monomial ONB of the rotation-invariant spaces.

    Plane: ``sqrt(p^{j+1} / (pi j!)) z^j``.
    Fubini-Study: ``sqrt((p+1) binom(p, j)) z^j``.
    """
    p = space.degree
    j = np.arange(p + 1)
    lg = special.gammaln
    if space.domain is Domain.PLANE_GAUSSIAN:
        if p < 1:
            raise ParameterError("PlaneGaussian requires p >= 1")
        logc = 0.5 * ((j + 1) * math.log(p) - math.log(math.pi) - lg(j + 1))
    elif space.domain is Domain.FUBINI_STUDY:
        logc = 0.5 * (math.log(p + 1) + lg(p + 1) - lg(j + 1) - lg(p - j + 1))
    else:
        raise DomainError(f"no closed-form basis for {space.domain.value}")
    return OrthonormalBasis(space, log_coef=logc, condition=None)


@functools.lru_cache(maxsize=None)
def _square_R(p: int, dps: int) -> tuple[np.ndarray, float]:
    S = square_gram_exact(p)
    n = p + 1
    R = np.zeros((n, n), dtype=np.complex128)
    with mpmath.workdps(dps):
        # the Gram splits into four blocks by residue of the index mod 4
        for r in range(4):
            idx = list(range(r, n, 4))
            if not idx:
                continue
            B = mpmath.matrix([[mpmath.mpf(S[a][b].numerator) / S[a][b].denominator for b in idx] for a in idx])
            try:
                L = mpmath.cholesky(B)
            except ValueError:
                raise DecompositionError(idx[0], "square Gram lost positive definiteness in extended precision") from None
            Rb = mpmath.inverse(L).T
            for ia, a in enumerate(idx):
                for ib, b in enumerate(idx):
                    R[a, b] = float(Rb[ia, ib])
    Sd = np.array([[float(x) for x in row] for row in S])
    cond = float(np.linalg.norm(Sd, 2) * np.linalg.norm(R, 2) ** 2)
    return R, cond


def square_onb(p: int, dps: int = 50) -> OrthonormalBasis:
    """ONB of the square model.

    The monomial Gram on Q has condition number ~1e20 at p = 40, so the
    factorization runs on the exact rational Gram in ``dps``-digit
    arithmetic. The result is rounded to double once at the end.
    """
    space = unit_square(p)
    R, cond = _square_R(p, dps)
    return OrthonormalBasis(space, R=R.copy(), condition=cond, info={"dps": dps})


def build_basis(space: WeightedSpace, method: str = "auto") -> OrthonormalBasis:
    """ONB for ``space``: closed forms where known, Cholesky otherwise.

    ``method="cholesky"`` forces a double-precision Cholesky of the
    quadrature Gram matrix.
    """
    if method == "cholesky":
        return cholesky_onb(gram_matrix(space), space)
    if method != "auto":
        raise ParameterError(f"unknown basis method {method!r}")
    if space.domain is Domain.UNIT_SQUARE:
        return square_onb(space.degree)
    return closed_form_basis(space)


def identity_basis(p: int) -> OrthonormalBasis:
    """The monomials themselves (``R = Id``); orthonormal for no shipped space."""
    return OrthonormalBasis(None, R=np.eye(p + 1, dtype=np.complex128))


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------


def evaluate_basis(basis: OrthonormalBasis, z) -> np.ndarray:
    """``(P_0(z), ..., P_p(z))``; vectorized over ``z`` (last axis is j)."""
    z = np.asarray(z, dtype=np.complex128)
    p = basis.degree
    if basis.closed_form:
        with np.errstate(over="raise"):
            try:
                return np.exp(basis.log_coef) * z[..., None] ** np.arange(p + 1)
            except FloatingPointError:
                raise NumericError("basis values overflow; use log_bergman_diag") from None
    return _horner_columns(basis.R, z)


def _horner_columns(R: np.ndarray, z: np.ndarray) -> np.ndarray:
    # P_j(z) = sum_l R[l, j] z^l, all columns at once
    out = np.zeros(z.shape + (R.shape[1],), dtype=np.complex128)
    for l in range(R.shape[0] - 1, -1, -1):
        out = out * z[..., None] + R[l]
    return out


def log_abs_basis(basis: OrthonormalBasis, z) -> np.ndarray:
    """``log |P_j(z)|`` without overflow (``-inf`` where ``P_j(z) = 0``)."""
    z = np.asarray(z, dtype=np.complex128)
    p = basis.degree
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.log(np.abs(z))
        if basis.closed_form:
            j = np.arange(p + 1)
            # z^0 = 1 also at z = 0, where j log|z| would give 0 * -inf
            return basis.log_coef + np.where(j == 0, 0.0, j * logz[..., None])
        out = np.empty(z.shape + (p + 1,))
        near = np.abs(z) <= SCALED_EVAL_RADIUS
        if np.any(near):
            out[near] = np.log(np.abs(_horner_columns(basis.R, z[near])))
        far = ~near
        if np.any(far):
            w = 1.0 / z[far]
            R = basis.R
            for j in range(p + 1):
                # P_j(z) = z^j sum_{m=0}^{j} R[j-m, j] w^m
                acc = np.zeros(w.shape, dtype=np.complex128)
                for m in range(j, -1, -1):
                    acc = acc * w + R[j - m, j]
                out[far, j] = j * logz[far] + np.log(np.abs(acc))
    return out


def log_bergman_diag(basis: OrthonormalBasis, z) -> np.ndarray:
    """``log sum_j |P_j(z)|^2`` by log-sum-exp."""
    return logsumexp(2.0 * log_abs_basis(basis, z), axis=-1)


def bergman_diag(basis: OrthonormalBasis, z):
    """``sum_j |P_j(z)|^2``; raises :class:`NumericError` instead of overflowing."""
    lk = log_bergman_diag(basis, z)
    if np.any(lk > 709.0):
        raise NumericError("Bergman kernel diagonal overflows double precision; use log_bergman_diag")
    out = np.exp(lk)
    return float(out) if np.ndim(out) == 0 else out


def extremal_estimate(basis: OrthonormalBasis, z):
    """Bergman estimate ``(1/2p) log sum_j |P_j(z)|^2`` of the extremal function.

    For weighted spaces this equals ``(1/2p) log(K e^{-2p phi}) + phi``.
    """
    p = basis.degree
    if p < 1:
        raise ParameterError("extremal estimate requires p >= 1")
    out = log_bergman_diag(basis, z) / (2 * p)
    return float(out) if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------------
# verification helpers
# ----------------------------------------------------------------------------


def gram_residual(basis: OrthonormalBasis, dps: int = 50) -> float:
    """``max |R^H S R - Id|`` against the exact Gram matrix of the space.

    Square: exact rational Gram, product in ``dps``-digit arithmetic (the
    double-precision product alone loses ~1e-10 at p = 40). Closed forms:
    exact diagonal Gram.
    """
    space = basis.space
    if space is None:
        raise DomainError("basis has no associated space")
    p = space.degree
    if space.domain is Domain.UNIT_SQUARE:
        S = square_gram_exact(p)
        R = basis.matrix()
        with mpmath.workdps(dps):
            Sm = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in S])
            Rm = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in R])
            E = Rm.H * Sm * Rm - mpmath.eye(p + 1)
            return float(max(abs(E[i, j]) for i in range(p + 1) for j in range(p + 1)))
    j = np.arange(p + 1)
    lg = special.gammaln
    if space.domain is Domain.PLANE_GAUSSIAN:
        log_norm = math.log(math.pi) + lg(j + 1) - (j + 1) * math.log(p)
    else:
        log_norm = lg(j + 1) + lg(p - j + 1) - lg(p + 2)
    if basis.closed_form:
        # diagonal Gram: |c_j|^2 <z^j, z^j> - 1, formed in logs so any p fits
        return float(np.abs(np.expm1(2.0 * basis.log_coef + log_norm)).max())
    S = np.diag(np.exp(log_norm).astype(np.complex128))
    R = basis.matrix()
    return float(np.abs(R.conj().T @ S @ R - np.eye(p + 1)).max())


def requadrature_gram(basis: OrthonormalBasis, m: int | None = None) -> np.ndarray:
    """Gram matrix of the basis by a quadrature independent of its construction."""
    space = basis.space
    if space is None:
        raise DomainError("basis has no associated space")
    z, w = quadrature_rule(space, m or space.degree + 9)
    V = evaluate_basis(basis, z)
    return (V.conj().T * w) @ V


def export_csv(basis: OrthonormalBasis) -> str:
    """CSV of the coefficient matrix: columns ``l, j, re, im`` (``P_j = sum_l R[l,j] z^l``).

    Floats are written with ``repr`` so that they round-trip exactly.
    """
    R = basis.matrix()
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["l", "j", "re", "im"])
    for l in range(R.shape[0]):
        for j in range(R.shape[1]):
            wr.writerow([l, j, repr(float(R[l, j].real)), repr(float(R[l, j].imag))])
    return buf.getvalue()


def import_csv(text: str, space: WeightedSpace | None = None) -> OrthonormalBasis:
    rows = list(csv.DictReader(io.StringIO(text)))
    n = max(int(r["l"]) for r in rows) + 1
    R = np.zeros((n, n), dtype=np.complex128)
    for r in rows:
        R[int(r["l"]), int(r["j"])] = complex(float(r["re"]), float(r["im"]))
    return OrthonormalBasis(space, R=R)

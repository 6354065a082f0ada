"""Reference values computed without the package under test.

Every function here uses only numpy/scipy/mpmath, by a route different from
the implementation it checks (2-D quadrature where the package uses exact
rationals, direct x-integrals where it uses a substitution, and so on).
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import integrate, special, stats


# --- square model -----------------------------------------------------------

def square_gram_entry(l: int, j: int) -> complex:
    """<z^l, z^j> on [-1/2, 1/2]^2 by separated 1-D Gauss-Legendre integrals.

    Expands (x+iy)^l (x-iy)^j into monomials x^a y^b and integrates each
    factor with a rule exact for the degree.
    """
    x, w = np.polynomial.legendre.leggauss(l + j + 2)
    x, w = 0.5 * x, 0.5 * w
    total = 0j
    for a in range(l + 1):
        for b in range(j + 1):
            coef = math.comb(l, a) * math.comb(j, b) * (1j) ** (l - a) * (-1j) ** (j - b)
            px = a + b
            py = (l - a) + (j - b)
            total += coef * np.sum(w * x**px) * np.sum(w * x**py)
    return complex(total)


# --- Kac -------------------------------------------------------------------

def kac_direct(p: int) -> float:
    """(4/pi) int_0^1 sqrt(AC - B^2)/A dx with the sums evaluated term by term in mpmath."""
    mpmath.mp.dps = 30

    def f(x):
        A = mpmath.fsum(x ** (2 * j) for j in range(p + 1))
        B = mpmath.fsum(j * x ** (2 * j - 1) for j in range(1, p + 1))
        C = mpmath.fsum(j * j * x ** (2 * j - 2) for j in range(1, p + 1))
        return mpmath.sqrt(A * C - B * B) / A

    return float(4 / mpmath.pi * mpmath.quad(f, [0, 0.5, 0.9, 0.99, 1]))


def weyl_bulk_density_limit() -> float:
    """int_{-1}^{1} sqrt(2/2) dx / pi."""
    return 2.0 / math.pi


# --- measures --------------------------------------------------------------

def fubini_study_box_mass(half: float = 2.0) -> float:
    val, _ = integrate.dblquad(lambda y, x: 1.0 / (math.pi * (1 + x * x + y * y) ** 2), -half, half, -half, half,
                               epsabs=1e-13, epsrel=1e-13)
    return val


def fubini_study_disk_mass(R: float) -> float:
    return R * R / (1 + R * R)


def multinomial_tv_floor(probs: np.ndarray, n: int, reps: int, seed: int) -> tuple[float, float]:
    """Mean and SD of the grid TV between ``probs`` and ``n`` i.i.d. draws from it."""
    rng = np.random.default_rng(seed)
    p = probs / probs.sum()
    tv = [0.5 * np.abs(rng.multinomial(n, p) / n - p).sum() for _ in range(reps)]
    return float(np.mean(tv)), float(np.std(tv))


# --- one-dimensional laws ---------------------------------------------------

def real_gaussian_pdf(x):
    return np.exp(-x * x) / math.sqrt(math.pi)


def real_gaussian_tail(r: float) -> float:
    """P(|a| > r) for density pi^{-1/2} e^{-x^2}."""
    return float(special.erfc(r))


def real_gaussian_log1p_moment(n: int) -> float:
    val, _ = integrate.quad(lambda x: 2 * math.log1p(x) ** n * real_gaussian_pdf(x), 0, np.inf)
    return val


def radial_k1_pdf(x, alpha: float):
    c = math.gamma(0.5 + alpha) / (math.gamma(alpha) * math.sqrt(math.pi))
    return c * (1 + x * x) ** (-0.5 - alpha)


def radial_k1_log1p_moment(n: int, alpha: float) -> float:
    val, _ = integrate.quad(lambda x: 2 * math.log1p(x) ** n * radial_k1_pdf(x, alpha), 0, np.inf, limit=200)
    return val


def radial_normalization(k: int, alpha: float) -> float:
    """int_{R^k} of the radial density, by a radial integral with the sphere area."""
    c = math.gamma(0.5 * k + alpha) / (math.gamma(alpha) * math.pi ** (0.5 * k))
    area = 2 * math.pi ** (0.5 * k) / math.gamma(0.5 * k)
    val, _ = integrate.quad(lambda r: area * r ** (k - 1) * (1 + r * r) ** (-0.5 * k - alpha), 0, np.inf, limit=200)
    return c * val


def abs_log_moment_gaussian_k1(nu: float) -> float:
    """E|log|a||^nu for density pi^{-1/2} e^{-x^2}."""
    f = lambda x: 2 * abs(math.log(x)) ** nu * real_gaussian_pdf(x)
    return integrate.quad(f, 0, 1)[0] + integrate.quad(f, 1, np.inf)[0]


def log_exp_integral(nu: float) -> float:
    """int_0^inf |log x|^nu e^{-x^2} dx by mpmath."""
    mpmath.mp.dps = 25
    return float(mpmath.quad(lambda x: abs(mpmath.log(x)) ** nu * mpmath.exp(-x * x), [0, 1, mpmath.inf]))


def wallis(k: int) -> float:
    """int_0^{pi/2} cos^k t dt by the double-factorial recursion."""
    v = math.pi / 2 if k % 2 == 0 else 1.0
    for m in range(2 - (k % 2), k + 1, 2):
        if m >= 2:
            v *= (m - 1) / m
    return v


def log_integral_lhs_mp(nu: float, b: float) -> float:
    mpmath.mp.dps = 25
    return float(mpmath.quad(lambda x: (-mpmath.log(x)) ** nu * (1 - x * x) ** b, [0, 0.5, 1]))


# --- statistics -------------------------------------------------------------

def ks_statistic(x: np.ndarray) -> float:
    return float(stats.kstest(x, "norm").statistic)

"""Univariate polynomial root finders.

Two methods, both returning all complex roots of ``sum c[j] z^j``:

* ``aberth``     Aberth-Ehrlich simultaneous iteration started from the
  Newton polygon, O(n^2) per sweep, compiled with numba. Each root is
  frozen once its coefficient-wise backward error drops below 4 n eps.
  The default.
* ``companion``  eigenvalues of the balanced companion matrix (LAPACK).
  O(n^3). Used as fallback when Aberth fails to converge. Its backward
  error is normwise only, so it degrades on coefficient vectors with a
  wide dynamic range.

Coefficients are in ascending order. Callers trim vanishing leading terms.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .errors import NumericError

_EPS = np.finfo(float).eps


def companion_roots(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c)
    n = c.size - 1
    if n < 1:
        return np.empty(0, dtype=np.complex128)
    dtype = np.float64 if not np.iscomplexobj(c) or not np.any(c.imag) else np.complex128
    cc = (c.real if dtype is np.float64 else c).astype(dtype)
    A = np.zeros((n, n), dtype=dtype)
    A[1:, :-1] = np.eye(n - 1, dtype=dtype)
    A[:, -1] = -cc[:-1] / cc[-1]
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"companion eigensolve did not converge: {exc}") from None
    return np.asarray(ev, dtype=np.complex128)


@nb.njit(cache=True, nogil=True)
def _newton_polygon_start(c):
    n = c.size - 1
    logs = np.empty(n + 1)
    for j in range(n + 1):
        a = abs(c[j])
        logs[j] = math.log(a) if a > 0 else -np.inf
    # upper convex hull of (j, log|c_j|)
    hull = np.empty(n + 1, dtype=np.int64)
    h = 0
    for j in range(n + 1):
        if logs[j] == -np.inf:
            continue
        while h >= 2:
            i0 = hull[h - 2]
            i1 = hull[h - 1]
            # drop i1 if it lies on or below the chord i0 -> j
            if (logs[i1] - logs[i0]) * (j - i0) <= (logs[j] - logs[i0]) * (i1 - i0):
                h -= 1
            else:
                break
        hull[h] = j
        h += 1
    z = np.empty(n, dtype=np.complex128)
    pos = 0
    sigma = 0.7
    for e in range(h - 1):
        i = hull[e]
        k = hull[e + 1]
        m = k - i
        r = math.exp((logs[i] - logs[k]) / m)
        for q in range(m):
            ang = 2.0 * math.pi * q / m + 2.0 * math.pi * e / n + sigma
            z[pos] = r * complex(math.cos(ang), math.sin(ang))
            pos += 1
    return z


@nb.njit(cache=True, nogil=True)
def _newton_ratio(c, cabs, z):
    """Return (f/f', |f| / sum |c_j| |z|^j) evaluated stably."""
    n = c.size - 1
    if abs(z) <= 1.0:
        f = c[n]
        df = 0.0j
        s = cabs[n]
        az = abs(z)
        for j in range(n - 1, -1, -1):
            df = df * z + f
            f = f * z + c[j]
            s = s * az + cabs[j]
        if df == 0:
            return complex(np.inf, 0.0), abs(f) / s
        return f / df, abs(f) / s
    w = 1.0 / z
    aw = abs(w)
    g = c[0]
    dg = 0.0j
    s = cabs[0]
    for j in range(1, n + 1):
        dg = dg * w + g
        g = g * w + c[j]
        s = s * aw + cabs[j]
    den = n * g - w * dg
    if den == 0:
        return complex(np.inf, 0.0), abs(g) / s
    return z * g / den, abs(g) / s


@nb.njit(cache=True, nogil=True)
def _aberth(c, maxit, tol):
    n = c.size - 1
    cabs = np.abs(c)
    z = _newton_polygon_start(c)
    done = np.zeros(n, dtype=np.bool_)
    ndone = 0
    for it in range(maxit):
        for i in range(n):
            if done[i]:
                continue
            ratio, berr = _newton_ratio(c, cabs, z[i])
            if berr <= tol:
                done[i] = True
                ndone += 1
                continue
            acc = 0.0j
            for j in range(n):
                if j != i:
                    d = z[i] - z[j]
                    if d != 0:
                        acc += 1.0 / d
            corr = ratio / (1.0 - ratio * acc)
            if np.isfinite(corr.real) and np.isfinite(corr.imag):
                z[i] -= corr
            else:
                z[i] += 1e-8 * (1.0 + abs(z[i]))
        if ndone == n:
            return z, True, it + 1
    return z, False, maxit


def aberth_roots(c: np.ndarray, maxit: int = 500) -> tuple[np.ndarray, bool]:
    """Aberth-Ehrlich roots; the flag reports convergence of every root."""
    c = np.asarray(c, dtype=np.complex128)
    if c.size and c[0] == 0:
        nz = int(np.argmax(c != 0))
        r, ok = aberth_roots(c[nz:], maxit)
        return np.concatenate([np.zeros(nz, dtype=np.complex128), r]), ok
    n = c.size - 1
    if n < 1:
        return np.empty(0, dtype=np.complex128), True
    scale = np.abs(c).max()
    c = c / scale
    tol = 4.0 * n * _EPS
    z, ok, _ = _aberth(c, maxit, tol)
    return z, bool(ok)


def low_degree_roots(c: np.ndarray) -> np.ndarray:
    """Closed-form roots for degree 1 and 2.

    The quadratic uses the cancellation-free form ``q = -(b + s sqrt(D)) / 2``,
    roots ``q / a`` and ``c / q``. For real coefficients with ``D < 0`` the pair
    is built from the exact real part ``-b / 2a``.
    """
    c = np.asarray(c)
    n = c.size - 1
    if n == 1:
        return np.array([-c[0] / c[1]], dtype=np.complex128)
    if n != 2:
        raise ValueError("degree must be 1 or 2")
    c0, b, a = c
    if not np.iscomplexobj(c) or not np.any(np.imag(c)):
        a, b, c0 = float(np.real(a)), float(np.real(b)), float(np.real(c0))
        D = b * b - 4.0 * a * c0
        if D < 0:
            re = -b / (2.0 * a)
            im = math.sqrt(-D) / (2.0 * abs(a))
            return np.array([complex(re, im), complex(re, -im)])
        q = -0.5 * (b + math.copysign(math.sqrt(D), b))
        if q == 0:
            return np.zeros(2, dtype=np.complex128)
        return np.array([q / a, c0 / q], dtype=np.complex128)
    a, b, c0 = complex(a), complex(b), complex(c0)
    sd = np.sqrt(b * b - 4.0 * a * c0)
    if (b.conjugate() * sd).real < 0:
        sd = -sd
    q = -0.5 * (b + sd)
    if q == 0:
        return np.zeros(2, dtype=np.complex128)
    return np.array([q / a, c0 / q], dtype=np.complex128)


def polynomial_roots(c: np.ndarray, method: str = "auto") -> tuple[np.ndarray, str]:
    """All roots of ``sum c[j] z^j`` (``c[-1] != 0``) and the method actually used.

    Exact zero roots (vanishing low-order coefficients) are split off first;
    under ``"auto"`` degrees 1 and 2 are solved in closed form.
    """
    c = np.asarray(c)
    if c.size < 2:
        return np.empty(0, dtype=np.complex128), "none"
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    nz = int(np.argmax(c != 0))
    core = c[nz:]
    if method == "auto" and core.size <= 3:
        r, method = (low_degree_roots(core), "closed_form") if core.size > 1 else (np.empty(0, np.complex128), "none")
    elif method in ("auto", "aberth"):
        method = "aberth"
        r, ok = aberth_roots(core)
        if not ok:
            r, method = companion_roots(core), "companion"
    elif method == "companion":
        r = companion_roots(core)
    else:
        raise ValueError(f"unknown root method {method!r}")
    out = np.concatenate([np.zeros(nz, dtype=np.complex128), r])
    return out, method


def backward_errors(c: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``|f(r)| / sum |c_j| |r|^j`` for each root, evaluated without overflow."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    r = np.ascontiguousarray(r, dtype=np.complex128)
    return _backward_errors(c, r)


@nb.njit(cache=True, nogil=True)
def _backward_errors(c, r):
    n = c.size - 1
    out = np.empty(r.size)
    for i in range(r.size):
        z = r[i]
        rev = abs(z) > 1
        if rev:
            # reversed polynomial at 1/z keeps every power bounded
            z = 1.0 / z
        az = abs(z)
        f = 0j
        s = 0.0
        for j in range(n + 1):
            cj = c[j] if rev else c[n - j]
            f = f * z + cj
            s = s * az + abs(cj)
        out[i] = abs(f) / s if s > 0 else 0.0
    return out

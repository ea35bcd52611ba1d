"""Gamma, digamma, Bernoulli numbers and symmetric-polynomial helpers.

The gamma function uses a fixed Lanczos approximation (g = 7, nine terms)
on the right half plane and the reflection formula everywhere else, so the
error bound comes from a single region.  The digamma function pushes the
argument past |z| = 12 with the recurrence and then sums the Stirling-type
series with Bernoulli numbers.
"""

from __future__ import annotations

import cmath
import math
import threading
from fractions import Fraction
from functools import reduce
from operator import mul

import numpy as np
import scipy.linalg

__all__ = [
    "gamma",
    "rgamma",
    "beta",
    "digamma",
    "bernoulli",
    "elementary_symmetric",
    "complete_symmetric",
    "restricted_quadform_det",
    "brute_force_restricted_det",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.57721566490153286060651209008240243

_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_int(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0 and z.real == math.floor(z.real)


def _lanczos(z: complex) -> complex:
    # valid for Re z >= 0.5
    z = z - 1
    x = _LANCZOS_COEF[0]
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def gamma(z):
    """Euler gamma function for complex ``z``.

    Raises ``ValueError`` at the poles z = 0, -1, -2, ...
    Real input with a real result is returned as a Python float.
    """
    zc = complex(z)
    if _is_nonpositive_int(zc):
        raise ValueError(f"gamma has a pole at z={zc.real:g}")
    if zc.real < 0.5:
        val = math.pi / (cmath.sin(math.pi * zc) * _lanczos(1 - zc))
    else:
        val = _lanczos(zc)
    if _real_input(z):
        return val.real
    return val


def _real_input(z) -> bool:
    return not isinstance(z, (complex, np.complexfloating))


def rgamma(z):
    """Reciprocal gamma, equal to zero at the poles."""
    if _is_nonpositive_int(complex(z)):
        return 0.0
    return 1.0 / gamma(z)


def beta(a, b):
    return gamma(a) * gamma(b) / gamma(a + b)


# ---------------------------------------------------------------------------
# Bernoulli numbers

_BERN_LOCK = threading.Lock()
_BERN_CACHE: list[Fraction] = [Fraction(1)]
_BERN_MAX = 40


def _fill_bernoulli(m: int) -> None:
    # sum_{k=0}^{m} C(m+1, k) B_k = 0
    with _BERN_LOCK:
        while len(_BERN_CACHE) <= m:
            n = len(_BERN_CACHE)
            s = sum(math.comb(n + 1, k) * _BERN_CACHE[k] for k in range(n))
            _BERN_CACHE.append(-s / (n + 1))


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (with B_1 = -1/2) as an exact fraction, n <= 40."""
    if n < 0 or n > _BERN_MAX:
        raise ValueError(f"bernoulli index {n} outside the supported range 0..{_BERN_MAX}")
    if len(_BERN_CACHE) <= n:
        _fill_bernoulli(n)
    return _BERN_CACHE[n]


_DIGAMMA_TERMS = 8
_DIGAMMA_SWITCH = 12.0


def digamma(z):
    """Logarithmic derivative of the gamma function.

    Upward recurrence until |z| > 12, then
    ``ln z - 1/(2z) - sum_{n=1}^{8} B_{2n} / (2n z^{2n})``.
    Negative real parts are mapped through the reflection identity
    psi(1-z) - psi(z) = pi cot(pi z).
    """
    zc = complex(z)
    if _is_nonpositive_int(zc):
        raise ValueError(f"digamma has a pole at z={zc.real:g}")
    if zc.real < 0.5:
        val = digamma(1 - zc) - math.pi / cmath.tan(math.pi * zc)
    else:
        acc = 0j
        w = zc
        while abs(w) <= _DIGAMMA_SWITCH:
            acc -= 1 / w
            w += 1
        s = cmath.log(w) - 1 / (2 * w)
        w2 = w * w
        p = w2
        for n in range(1, _DIGAMMA_TERMS + 1):
            s -= float(bernoulli(2 * n)) / (2 * n * p)
            p *= w2
        val = s + acc
    if _real_input(z):
        return val.real
    return val


# ---------------------------------------------------------------------------
# symmetric polynomials


def elementary_symmetric(lams) -> list:
    """All e_k(lams), k = 0..n, from the coefficients of prod (x + lam_j).

    Works for floats, complex numbers and Fractions alike.
    """
    lams = list(lams)
    zero = lams[0] * 0 if lams else 0
    e = [zero + 1]
    for lam in lams:
        new = e + [zero]
        for k in range(1, len(new)):
            new[k] = new[k] + lam * e[k - 1]
        e = new
    return e


def complete_symmetric(lams, p: int):
    """Complete homogeneous symmetric polynomial h_p(lams).

    Uses the recursion over variables h_p(x_1..x_n) = sum_j x_n^j h_{p-j}(x_1..x_{n-1}).
    """
    lams = list(lams)
    h = [1] + [0] * p
    for lam in lams:
        for k in range(1, p + 1):
            h[k] = h[k] + lam * h[k - 1]
    return h[p]


def restricted_quadform_det(lams):
    """Determinant of sum lam_j theta_j^2 restricted to sum theta_j = 0.

    After eliminating theta_1 the Gram matrix is diag(lam_2..) + lam_1 J and
    its determinant is the elementary symmetric polynomial e_q of all q+1
    values.
    """
    lams = list(lams)
    if len(lams) < 2:
        raise ValueError("need at least two values")
    return elementary_symmetric(lams)[len(lams) - 1]


def brute_force_restricted_det(lams):
    """Same determinant built as an explicit q x q matrix and factored by LU."""
    lams = np.asarray(lams, dtype=complex)
    if lams.size < 2:
        raise ValueError("need at least two values")
    q = lams.size - 1
    # theta_1 = -(theta_2 + ... + theta_{q+1}) gives lam_1 (sum theta)^2 + sum lam_j theta_j^2
    m = np.full((q, q), lams[0]) + np.diag(lams[1:])
    lu, piv = scipy.linalg.lu_factor(m)
    sign = (-1) ** int(np.sum(piv != np.arange(q)))
    return complex(sign * np.prod(np.diag(lu)))


def prod(xs):
    return reduce(mul, xs, 1)

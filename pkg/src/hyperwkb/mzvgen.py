"""Generating functions of the all-2 and all-3 multiple zeta values.

``Delta_2(lam) = sum (-1)^k zeta(2,..,2) lam^(2k) = prod (1 - lam^2/n^2)`` and
``Delta_3(lam) = prod (1 - lam^3/n^3)``, the values at ``t = 1`` of the
log-carrying second solutions, their large-``lam`` sector formulas and the
``lam``-equation they satisfy.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .opcore import EulerPolynomial, GradedSeries, MellinOperator, apply
from .series import multi_polylog, mzv, mzv_newton, zeta
from .special import EULER_GAMMA, bernoulli, digamma, rgamma
from .variations import inverse_base_apply

__all__ = [
    "GenFunValue",
    "EULER_GAMMA",
    "delta2",
    "delta3",
    "delta3_printed_gamma",
    "genfun_value",
    "u1_at_one",
    "omega",
    "phi2_asymptotic",
    "sector_jump",
    "lemma53_check",
    "cubic_rows_at_one",
    "identity_522",
    "coefficient_elimination",
    "lambda_ode_witness",
    "wronskian_samples",
]

EPS = cmath.exp(1j * math.pi / 3)
_N_PRODUCT = 2000


@dataclass(frozen=True)
class GenFunValue:
    lam: complex
    series_value: complex
    closed_value: complex
    route: str

    @property
    def difference(self) -> float:
        return abs(self.series_value - self.closed_value)


# ---------------------------------------------------------------------------
# Delta_2 and Delta_3


def _zeta_tail(s: int, N: int) -> float:
    """``sum_{n > N} n^-s`` by Euler-Maclaurin from ``M = N + 1``."""
    M = float(N + 1)
    tail = M ** (1.0 - s) / (s - 1) + 0.5 * M ** (-float(s))
    rising = float(s)
    power = M ** (-float(s) - 1)
    for k in range(1, 8):
        tail += float(bernoulli(2 * k)) / math.factorial(2 * k) * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= M * M
    return tail


def _product_route(x: complex, d: int, N: int = _N_PRODUCT) -> complex:
    """``prod_n (1 - x/n^d)`` truncated at ``N`` with the log-tail correction."""
    n = np.arange(1, N + 1, dtype=float)
    head = complex(np.prod(1 - x / n**d))
    log_tail = 0j
    for j in range(1, 200):
        term = x**j / j * _zeta_tail(d * j, N)
        log_tail -= term
        if abs(term) < 1e-18 * (1 + abs(log_tail)):
            break
    return head * cmath.exp(log_tail)


def _series_route(lam: complex, d: int) -> complex:
    lam = complex(lam)
    if abs(lam) > 1:
        raise ValueError("the series route needs |lam| <= 1")
    x = lam**d
    K = 8
    while True:
        e = mzv_newton(K, d)
        terms = [(-x) ** k * e[k] for k in range(K + 1)]
        if abs(terms[-1]) < 1e-17 or K >= 60:
            return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
        K *= 2


def delta2(lam, route: str = "closed") -> complex:
    """``Delta_2(lam)`` by ``series``, ``product`` or ``closed`` (``sin(pi lam)/(pi lam)``)."""
    lam = complex(lam)
    if route == "series":
        return _series_route(lam, 2)
    if route == "product":
        return _product_route(lam**2, 2)
    if route == "closed":
        if lam == 0:
            return 1 + 0j
        return cmath.sin(math.pi * lam) / (math.pi * lam)
    raise ValueError(f"unknown route {route!r}")


def delta3(lam, route: str = "gamma") -> complex:
    """``Delta_3(lam)`` by ``series``, ``product`` or ``gamma``.

    The gamma route is ``1/(Gamma(1-lam) Gamma(1+eps lam) Gamma(1+conj(eps) lam))``,
    ``eps = exp(i pi/3)``, which factors ``1 - x^3 = (1-x)(1+eps x)(1+conj(eps) x)``.
    """
    lam = complex(lam)
    if route == "series":
        return _series_route(lam, 3)
    if route == "product":
        return _product_route(lam**3, 3)
    if route == "gamma":
        return complex(rgamma(1 - lam) * rgamma(1 + EPS * lam) * rgamma(1 + EPS.conjugate() * lam))
    raise ValueError(f"unknown route {route!r}")


def delta3_printed_gamma(lam) -> complex:
    """``1/(Gamma(1+lam) Gamma(1-eps lam) Gamma(1-conj(eps) lam))``, which equals ``Delta_3(-lam)``."""
    lam = complex(lam)
    return complex(rgamma(1 + lam) * rgamma(1 - EPS * lam) * rgamma(1 - EPS.conjugate() * lam))


def genfun_value(which: int, lam, route: str = "series") -> GenFunValue:
    """A series-type route next to the closed (``Delta_2``) or gamma (``Delta_3``) value."""
    if which == 2:
        return GenFunValue(complex(lam), delta2(lam, route), delta2(lam, "closed"), route)
    if which == 3:
        return GenFunValue(complex(lam), delta3(lam, route), delta3(lam, "gamma"), route)
    raise ValueError("which must be 2 or 3")


# ---------------------------------------------------------------------------
# second solution of ((1-t) D^2 + lam^2 t) u = 0 at t = 1


def _csum(terms) -> complex:
    terms = list(terms)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _placements(base: int, k: int, bumps: tuple):
    """Indices of length ``k`` equal to ``base`` except ``bumps`` added at distinct positions.

    Each placement is counted once per ordered choice of distinct positions
    modulo permutations of equal bumps.
    """
    seen = set()
    for pos in itertools.permutations(range(k), len(bumps)):
        idx = [base] * k
        for p, b in zip(pos, bumps):
            idx[p] += b
        key = tuple(idx)
        if key not in seen:
            seen.add(key)
            yield key


def u1_at_one(lam, route: str = "psi", log_lam=None) -> complex:
    """Value at ``t = 1`` of ``u_1 = u_0 ln(lam^2 t) + analytic``.

    ``psi``: ``Delta_2 {2 ln lam - 2 gamma - psi(1+lam) - psi(1-lam)}`` (any ``lam`` off the integers);
    ``polylog``: ``2 Delta_2 {ln lam + sum zeta(2k+1) lam^(2k)}`` with the series ``Delta_2``;
    ``mzv``: ``sum (-lam^2)^k [zeta(2,..,2) ln lam^2 - 2 sum zeta(2,..,3,..,2)]``.
    ``ln lam^2`` is taken as ``2 log_lam`` (principal ``ln lam`` by default).
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("u1(1; lam) is logarithmic at lam = 0")
    L = cmath.log(lam) if log_lam is None else complex(log_lam)
    if route == "psi":
        return delta2(lam, "closed") * (2 * L - 2 * EULER_GAMMA - digamma(1 + lam) - digamma(1 - lam))
    if abs(lam) >= 1:
        raise ValueError(f"the {route} route needs |lam| < 1")
    x = lam * lam
    if route == "polylog":
        tail = [0j]
        for k in range(1, 200):
            term = zeta(2 * k + 1) * x**k
            tail.append(term)
            if abs(term) < 1e-18:
                break
        return 2 * delta2(lam, "series") * (L + _csum(tail))
    if route == "mzv":
        terms = [2 * L]
        for k in range(1, 40):
            z2 = mzv((2,) * k)
            z3 = math.fsum(mzv(idx) for idx in _placements(2, k, (1,)))
            term = (-x) ** k * (z2 * 2 * L - 2 * z3)
            terms.append(term)
            if abs(term) < 1e-16:
                break
        return _csum(terms)
    raise ValueError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# large lam


def omega(z, n_bernoulli: int = 2) -> complex:
    """``Omega(1/z) = ln(1+1/z) - 1/z + 1/(2z(z+1)) - sum_{n<=N} B_2n/(2n) (z+1)^-2n``.

    Asymptotic to ``psi(1+z) - ln z - 1/(2z)`` for ``|arg z| < pi``.
    """
    z = complex(z)
    w = z + 1
    s = cmath.log(1 + 1 / z) - 1 / z + 1 / (2 * z * w)
    for n in range(1, n_bernoulli + 1):
        s -= float(bernoulli(2 * n)) / (2 * n) * w ** (-2 * n)
    return s


def phi2_asymptotic(lam, sector: str = "upper", n_bernoulli: int = 2) -> complex:
    """Large-``lam`` form of ``u1(1; lam)`` (principal ``ln lam``).

    ``upper`` (``|arg lam| < pi``): ``2 Delta_2 {-gamma - Omega(1/lam)} - cos(pi lam)/lam``;
    ``lower`` (``Im lam < 0``): ``2 Delta_2 {-gamma - Omega(-1/lam) - i pi} + cos(pi lam)/lam``.
    """
    lam = complex(lam)
    if abs(lam) < 3:
        raise ValueError("the sector formulas are for |lam| >= 3")
    s = delta2(lam, "closed")
    c = cmath.cos(math.pi * lam) / lam
    if sector == "upper":
        if lam.imag == 0 and lam.real < 0:
            raise ValueError("lam lies on the sector boundary arg lam = pi")
        return 2 * s * (-EULER_GAMMA - omega(lam, n_bernoulli)) - c
    if sector == "lower":
        if lam.imag >= 0:
            raise ValueError("the lower sector needs Im lam < 0")
        return 2 * s * (-EULER_GAMMA - omega(-lam, n_bernoulli) - 1j * math.pi) + c
    raise ValueError(f"unknown sector {sector!r}")


def sector_jump(lam, n_bernoulli: int = 2) -> tuple:
    """Lower minus upper formula at the same ``lam`` and the predicted ``2 e^(-i pi lam)/lam``.

    The lower branch is evaluated as a formula, off its sector when ``Im lam >= 0``.
    """
    lam = complex(lam)
    s = delta2(lam, "closed")
    c = cmath.cos(math.pi * lam) / lam
    upper = 2 * s * (-EULER_GAMMA - omega(lam, n_bernoulli)) - c
    lower = 2 * s * (-EULER_GAMMA - omega(-lam, n_bernoulli) - 1j * math.pi) + c
    predicted = -2j * math.pi * s + 2 * c
    return lower - upper, predicted


# ---------------------------------------------------------------------------
# the cubic chain (1-t) D^3 u_(k+1) = t u_k with L = ln(lam^3 t)


def _cubic_chain(k_max: int, order: int) -> list:
    """``chain[j][k]``: list over ``i`` of the series multiplying ``L^i`` in ``u_(j,k)``, ``j = 0, 1, 2``.

    ``u_(j,0) = L^j/j!``.  On ``L^i`` the operator ``(D + d/dL)^3`` reads
    ``sum_m C(3,m) (i+m)!/i! D^(3-m)`` acting on the ``L^(i+m)`` coefficient.
    """
    one_minus_t = lambda p: MellinOperator(((0, p), (1, -p)))
    base = one_minus_t(EulerPolynomial((0.0, 0.0, 0.0, 1.0)))
    cross = {m: one_minus_t(EulerPolynomial(tuple([0.0] * (3 - m) + [1.0]))) for m in (1, 2, 3)}
    times_t = MellinOperator(((1, EulerPolynomial((1.0,))),))
    out = []
    for j in range(3):
        # zero branches carry the full truncation so sums are not cut short
        u0 = [GradedSeries((0.0,) * (order + 1), 0, 1) for _ in range(j + 1)]
        u0[j] = GradedSeries((1.0 / math.factorial(j),) + (0.0,) * order, 0, 1)
        levels = [u0]
        for k in range(k_max):
            prev = levels[-1]
            nxt = [None] * (j + 1)
            for i in range(j, -1, -1):
                rhs = apply(times_t, prev[i])
                for m in (1, 2, 3):
                    if i + m <= j:
                        w = math.comb(3, m) * math.factorial(i + m) / math.factorial(i)
                        rhs = rhs - apply(cross[m], nxt[i + m]).scale(w)
                nxt[i] = inverse_base_apply(base, rhs, order)
            levels.append(nxt)
        out.append(levels)
    return out


def _eval_branches(branches, t: float, L: complex) -> complex:
    return sum(complex(b(t)) * L**i for i, b in enumerate(branches))


def _li_sum(base: int, k: int, bumps: tuple, t: float) -> float:
    return math.fsum(multi_polylog(idx, t) for idx in _placements(base, k, bumps))


def lemma53_check(k: int, t: float, lam: float = 0.5, order: int | None = None) -> dict:
    """Recurrence vs polylogarithm forms of ``u_(j,k)(t)`` for the cubic equation.

    Polylog forms: ``u_(0,k) = Li_(3..3)``, ``u_(1,k) = u_(0,k) L + u~_(1,k)`` with
    ``u~_(1,k) = -3 sum Li_(..4..)``, ``u_(2,k) = u_(0,k) L^2/2 + u~_(1,k) L + u~_(2,k)``.
    ``u~_(2,k)`` is ``6 sum Li_(..5..)`` in the uncorrected form, and the corrected form adds
    ``9 sum Li_(..4..4..)`` (present from ``k = 2``).
    """
    if k < 0 or k > 2:
        raise ValueError("k must be 0, 1 or 2")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    if order is None:
        order = min(400, math.ceil(40 / -math.log10(t)))
    L = cmath.log(complex(lam) ** 3 * t)
    chain = _cubic_chain(k, order)
    rec = [_eval_branches(chain[j][k], t, L) for j in range(3)]
    if k == 0:
        li0, t1, t2p, t2c = 1.0, 0.0, 0.0, 0.0
    else:
        li0 = multi_polylog((3,) * k, t)
        t1 = -3 * _li_sum(3, k, (1,), t)
        t2p = 6 * _li_sum(3, k, (2,), t)
        t2c = t2p + (9 * _li_sum(3, k, (1, 1), t) if k >= 2 else 0.0)
    poly0 = li0
    poly1 = li0 * L + t1
    poly2_printed = li0 * L * L / 2 + t1 * L + t2p
    poly2 = li0 * L * L / 2 + t1 * L + t2c
    dev = {
        "u0": abs(rec[0] - poly0),
        "u1": abs(rec[1] - poly1),
        "u2": abs(rec[2] - poly2),
        "u2_printed": abs(rec[2] - poly2_printed),
    }
    return {
        "k": k,
        "t": t,
        "lam": lam,
        "order": order,
        "recurrence": rec,
        "polylog": [poly0, poly1, poly2],
        "deviation": dev,
        "max_deviation": max(dev["u0"], dev["u1"], dev["u2"]),
    }


def cubic_rows_at_one(lam: float, k_max: int | None = None) -> dict:
    """Rows ``u_j(1; lam)``, ``j = 0, 1, 2``, of the cubic equation three ways.

    ``mzv``: the chain at ``t = 1`` term by term in MZVs.
    ``zeta``: ``mu``-derivatives of ``e^(mu L) prod (1 - lam^3/(n+mu)^3)``, i.e.
    ``Delta_3 {L^j/j! terms}`` with ``a1 = 3 sum zeta(3m+1) lam^3m`` and
    ``a2 = -3 sum (3m+1) zeta(3m+2) lam^3m``.
    ``printed``: the uncorrected rows, ``u2 = Delta_3 {L^2/2 + 3 lam^3 L [zeta(4) + 3 zeta(7) lam^3 + ..]
    - 6 lam^3 [zeta(5) + zeta(8) lam^3 + ..]}``.
    """
    lam = float(lam)
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    x = lam**3
    L = 3 * math.log(lam)
    if k_max is None:
        k_max = min(40, math.ceil(-13 / math.log10(x)))
    # mzv route
    u = [[1.0], [L], [L * L / 2]]
    for k in range(1, k_max + 1):
        z3 = mzv((3,) * k)
        s4 = math.fsum(mzv(i) for i in _placements(3, k, (1,)))
        s5 = math.fsum(mzv(i) for i in _placements(3, k, (2,)))
        s44 = math.fsum(mzv(i) for i in _placements(3, k, (1, 1))) if k >= 2 else 0.0
        sign = (-x) ** k
        u[0].append(sign * z3)
        u[1].append(sign * (z3 * L - 3 * s4))
        u[2].append(sign * (z3 * L * L / 2 - 3 * s4 * L + 6 * s5 + 9 * s44))
    rows_mzv = [math.fsum(r) for r in u]
    # generating-function route
    d3 = delta3(lam, "gamma").real
    m_max = 60
    a1 = 3 * math.fsum(zeta(3 * m + 1) * x**m for m in range(1, m_max))
    a2 = -3 * math.fsum((3 * m + 1) * zeta(3 * m + 2) * x**m for m in range(1, m_max))
    rows_zeta = [d3, d3 * (L + a1), d3 * (L * L / 2 + a1 * L + (a1 * a1 + a2) / 2)]
    # uncorrected rows
    c4 = 3 * x * (zeta(4) + math.fsum(3 * zeta(3 * m + 4) * x**m for m in range(1, m_max)))
    c5 = -6 * x * math.fsum(zeta(3 * m + 5) * x**m for m in range(0, m_max))
    rows_printed = [d3, d3 * (L + a1), d3 * (L * L / 2 + c4 * L + c5)]
    return {
        "lam": lam,
        "mzv": rows_mzv,
        "zeta": rows_zeta,
        "printed": rows_printed,
        "deviation_zeta": [abs(a - b) for a, b in zip(rows_mzv, rows_zeta)],
        "deviation_printed": [abs(a - b) for a, b in zip(rows_mzv, rows_printed)],
    }


# ---------------------------------------------------------------------------
# the product identity and the expansion argument


def identity_522(lam) -> dict:
    """``Delta_3(lam) Delta_3(-lam)`` against ``Delta_2(lam) Delta_2(-eps lam) Delta_2(-conj(eps) lam)``.

    ``combo`` is the six-exponential form ``i/(2 pi lam)^3 {...}``; the two
    constant terms of the triple product cancel, so it equals the product exactly.
    """
    lam = complex(lam)
    lhs = delta3(lam, "gamma") * delta3(-lam, "gamma")
    rhs = delta2(lam, "closed") * delta2(-EPS * lam, "closed") * delta2(-EPS.conjugate() * lam, "closed")
    out = {"lam": lam, "lhs": lhs, "rhs": rhs, "diff": abs(lhs - rhs), "combo": None, "combo_rel": None}
    if lam != 0:
        e = lambda a: cmath.exp(a * math.pi * lam)
        r3 = math.sqrt(3)
        combo = 1j / (2 * math.pi * lam) ** 3 * (
            (e(2j) - e(-2j)) - (e(-r3 + 1j) - e(r3 - 1j)) - (e(r3 + 1j) - e(-r3 - 1j))
        )
        out["combo"] = combo
        out["combo_rel"] = abs(combo - lhs) / max(abs(lhs), abs(combo), 1e-300)
    return out


def coefficient_elimination(a, b, c, alpha) -> dict:
    """Exact elimination for ``c beta + b gamma = 0``, ``b alpha + a beta = 0``, ``c alpha + a gamma = 0``.

    ``beta = -(b/a) alpha`` forces ``gamma = (c/a) alpha`` through the first
    equation and ``gamma = -(c/a) alpha`` through the third; with nonzero
    unknowns these clash.  ``det`` is the determinant of the homogeneous
    system in ``(alpha, beta, gamma)``, equal to ``-2abc``.
    """
    a, b, c, alpha = (Fraction(v) for v in (a, b, c, alpha))
    if 0 in (a, b, c, alpha):
        raise ValueError("all coefficients are nonzero by hypothesis")
    beta = -(b / a) * alpha
    gamma_first = -(c / b) * beta
    gamma_third = -(c / a) * alpha
    det = b * (0 * b - a * c) - a * (c * b - a * 0)
    return {
        "beta": beta,
        "gamma_from_cb": gamma_first,
        "gamma_from_ca": gamma_third,
        "consistent": gamma_first == gamma_third,
        "det": det,
    }


# ---------------------------------------------------------------------------
# the second-order lam-equation


def _derivs(f, lam: float, h: float) -> tuple:
    """``f, f', f''`` by central differences with one Richardson step."""

    def d(hh):
        fp, fm, f0 = f(lam + hh), f(lam - hh), f(lam)
        return (fp - fm) / (2 * hh), (fp - 2 * f0 + fm) / (hh * hh)

    d1a, d2a = d(h)
    d1b, d2b = d(h / 2)
    return f(lam), (4 * d1b - d1a) / 3, (4 * d2b - d2a) / 3


def _phi1(lam):
    return delta2(lam, "closed")


def _phi2(lam):
    return u1_at_one(lam, "psi")


def lambda_ode_witness(u, lam: float = 0.4, h: float = 1e-4) -> dict:
    """Determinant of ``[[u, Phi1, Phi2], [u', ..], [u'', ..]]`` relative to its Laplace-expansion scale."""
    rows = [_derivs(g, lam, h) for g in (u, _phi1, _phi2)]
    m = np.array(rows, dtype=complex).T
    det = complex(np.linalg.det(m))
    minors = [abs(np.linalg.det(np.delete(np.delete(m, i, 0), 0, 1))) for i in range(3)]
    scale = sum(abs(m[i, 0]) * minors[i] for i in range(3))
    return {"lam": lam, "det": det, "scale": scale, "ratio": abs(det) / scale}


def _trigamma(z) -> complex:
    z = complex(z)
    acc = 0j
    while abs(z) < 20:
        acc += 1 / (z * z)
        z += 1
    s = 1 / z + 1 / (2 * z * z)
    p = z**3
    for k in range(1, 10):
        s += float(bernoulli(2 * k)) / p
        p *= z * z
    return s + acc


def wronskian_samples(lams, h: float = 1e-4) -> list:
    """Rows ``(lam, A_fd, A_closed)`` with ``A = Phi1 Phi2' - Phi2 Phi1' = Phi1^2 Theta``.

    ``Theta = 2/lam - psi'(1+lam) + psi'(1-lam)``; ``A_fd`` uses finite differences.
    """
    out = []
    for lam in lams:
        p1, d1, _ = _derivs(_phi1, lam, h)
        p2, d2, _ = _derivs(_phi2, lam, h)
        a_fd = p1 * d2 - p2 * d1
        theta = 2 / lam - _trigamma(1 + lam) + _trigamma(1 - lam)
        out.append((lam, a_fd.real, (p1 * p1 * theta).real))
    return out

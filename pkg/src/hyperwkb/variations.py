"""Variations of hypergeometric functions under small perturbations.

A perturbed operator is ``base + sum_e eps^e x^m_e R_e(D)``.  Writing
``u = sum eps^k u_k`` gives ``base u_k = -sum_e x^m_e R_e(D) u_(k-e)``, which is
solved coefficientwise by inverting ``base`` on power series.  The
recurrence is the authoritative route; the explicit multi-sums are kept as
independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .frobenius import ResonanceError
from .opcore import EulerPolynomial, GradedSeries, MellinOperator, _refine, apply
from .series import HyperParams, pfq_series, pochhammer

__all__ = [
    "PerturbedOperator",
    "inverse_base_apply",
    "variation_recurrence",
    "perturbed_residual",
    "variation_formula",
    "compare_series",
    "hypergeometric_perturbation",
    "first_order_perturbation",
    "first_order_closed_form",
    "airy_perturbation",
    "airy_u11",
    "airy_u11_double_sum",
    "airy_g",
    "bessel_perturbation",
    "bessel_variation_u01",
    "bessel_u01_double_sum",
    "bessel_u01_from_product",
    "v2_perturbation",
    "v2_variation",
    "v21_double_sum",
]


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _lcm(*xs) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


def _on_lattice(s: GradedSeries, L: int) -> GradedSeries:
    if s.lattice_denominator == L:
        return s
    if L % s.lattice_denominator:
        raise ValueError("lattice mismatch")
    f = L // s.lattice_denominator
    zero = 0 * s.coefficients[0]
    c = []
    for i, x in enumerate(s.coefficients):
        c.append(x)
        if i < len(s.coefficients) - 1:
            c.extend([zero] * (f - 1))
    return GradedSeries(tuple(c), s.leading_exponent, L, s.variable)


def _zero_series(exponent, L, variable, exact=True):
    return GradedSeries((Fraction(0) if exact else 0.0,), exponent, L, variable)


@dataclass(frozen=True)
class PerturbedOperator:
    """``base + sum eps^power x^offset R(D)`` with the unperturbed solution ``u0(order)``.

    ``perturbations`` holds ``(power, offset, R)`` with ``power >= 1`` and
    ``offset`` a positive rational.
    """

    base: MellinOperator
    perturbations: tuple
    u0: Callable[[object], GradedSeries]

    @property
    def variable(self) -> str:
        return self.base.variable

    @property
    def lattice(self) -> int:
        dens = [Fraction(m).denominator for _, m, _ in self.perturbations]
        return _lcm(self.base.lattice_denominator, *dens)

    def perturbation_operator(self, index: int) -> MellinOperator:
        _, m, R = self.perturbations[index]
        L = self.lattice
        k = Fraction(m) * L
        return MellinOperator(((int(k), R),), L, self.variable)


def inverse_base_apply(base: MellinOperator, series: GradedSeries, order) -> GradedSeries:
    """Solve ``base u = series`` on power series, keeping exponents ``<= order``.

    The lowest-offset polynomial of ``base`` is the pivot; every lattice
    point the solve will visit is checked before computing, and a zero pivot
    raises :class:`ResonanceError` (with ``order`` set to the lattice index).
    The result is also limited by the truncation of ``series``.
    """
    L = _lcm(base.lattice_denominator, series.lattice_denominator)
    if base.lattice_denominator != L:
        base = _refine(base, L)
    f = _on_lattice(series, L)
    if base.variable != f.variable:
        raise ValueError(f"variable mismatch: {base.variable} vs {f.variable}")
    kmin = min(base.offsets)
    pivot = base.poly(kmin)
    gamma_u = f.leading_exponent - Fraction(kmin, L)
    exact = all(_is_exact(c) for c in f.coefficients) and all(
        _is_exact(c) for _, p in base.terms for c in p.coefficients
    )
    n_terms = min(math.floor((Fraction(order) - Fraction(gamma_u)) * L) + 1, f.truncation_order + 1)
    if n_terms <= 0:
        return _zero_series(gamma_u, L, f.variable, exact)
    for N in range(n_terms):
        x = gamma_u + Fraction(N, L)
        pv = pivot(x)
        size = sum(abs(complex(c)) * abs(x) ** k for k, c in enumerate(pivot.coefficients))
        if (pv == 0) if exact else abs(pv) < 1e-12 * (1 + size):
            raise ResonanceError(f"pivot vanishes at exponent {x}", N)
    others = [(k - kmin, p) for k, p in base.terms if k != kmin]
    u = []
    for N in range(n_terms):
        acc = f.coefficients[N]
        for d, p in others:
            if N - d >= 0:
                acc = acc - p(gamma_u + Fraction(N - d, L)) * u[N - d]
        u.append(acc / pivot(gamma_u + Fraction(N, L)))
    return GradedSeries(tuple(u), gamma_u, L, f.variable)


def _add(a: GradedSeries | None, b: GradedSeries) -> GradedSeries:
    return b if a is None else a + b


def variation_recurrence(pert: PerturbedOperator, k_max: int, order) -> list:
    """``[u_0, ..., u_kmax]`` with ``base u_k = -sum_e x^m_e R_e u_(k-e)``."""
    L = pert.lattice
    chain = [_on_lattice(pert.u0(order), L)]
    for k in range(1, k_max + 1):
        rhs = None
        for i, (power, _, _) in enumerate(pert.perturbations):
            if power <= k:
                rhs = _add(rhs, apply(pert.perturbation_operator(i), chain[k - power]).scale(-1))
        if rhs is None or rhs.is_zero():
            chain.append(_zero_series(chain[0].leading_exponent, L, pert.variable,
                                      _is_exact(chain[0].coefficients[0])))
            continue
        chain.append(inverse_base_apply(pert.base, rhs, order))
    return chain


def perturbed_residual(pert: PerturbedOperator, chain: list) -> list:
    """Coefficient of ``eps^e`` in the full operator applied to ``sum eps^k u_k``.

    Entries ``e = 0..K + max power``; those with ``e <= K`` vanish up to the
    truncation, the rest are the ``O(eps^(K+1))`` remainder.
    """
    L = pert.lattice
    base = _refine(pert.base, L) if pert.base.lattice_denominator != L else pert.base
    K = len(chain) - 1
    top = K + max((p for p, _, _ in pert.perturbations), default=0)
    out = []
    for e in range(top + 1):
        acc = apply(base, chain[e]) if e <= K else None
        for i, (power, _, _) in enumerate(pert.perturbations):
            if 0 <= e - power <= K:
                acc = _add(acc, apply(pert.perturbation_operator(i), chain[e - power]))
        out.append(acc)
    return out


def compare_series(a: GradedSeries, b: GradedSeries, tol: float = 0.0, upto=None):
    """First exponent where ``a`` and ``b`` differ by more than ``tol`` (``None`` if none)."""
    L = _lcm(a.lattice_denominator, b.lattice_denominator)
    a, b = _on_lattice(a, L), _on_lattice(b, L)
    lo = min(Fraction(a.leading_exponent), Fraction(b.leading_exponent))
    hi = min(Fraction(a.last_exponent), Fraction(b.last_exponent))
    if upto is not None:
        hi = min(hi, Fraction(upto))

    def coef(s, x):
        n = (x - Fraction(s.leading_exponent)) * L
        if n < 0 or n > s.truncation_order:
            return 0
        return s.coefficients[int(n)]

    x = lo
    while x <= hi:
        d = coef(a, x) - coef(b, x)
        if (d != 0) if tol == 0 else abs(d) > tol * (1 + abs(coef(b, x))):
            return x
        x += Fraction(1, L)
    return None


# ---------------------------------------------------------------------------
# standard shape Q - t P - eps t^2 R


def hypergeometric_perturbation(upper, lower, R: EulerPolynomial, offset=2, exact=None) -> PerturbedOperator:
    """``(Q - t P - eps t^offset R) u = 0`` with ``u_0 = pFq``."""
    upper, lower = tuple(upper), tuple(lower)
    if exact is None:
        exact = all(_is_exact(x) for x in upper + lower)
    from .opcore import build_hypergeometric_operator

    base = build_hypergeometric_operator(upper, lower, exact=exact)
    params = HyperParams(upper, lower)

    def u0(order):
        return pfq_series(params, int(math.floor(order)), exact=exact)

    return PerturbedOperator(base, ((1, Fraction(offset), -R),), u0)


def _Q(lower, n):
    out = n
    for b in lower:
        out = out * (n + b - 1)
    return out


def _P(upper, n):
    out = 1
    for a in upper:
        out = out * (n + a)
    return out


def variation_formula(upper, lower, R: EulerPolynomial, k: int, order: int) -> GradedSeries:
    """Multi-sum ``sum Omega(m_k) prod_j S(m_j) t^(m_k)/m_k!`` with
    ``S(n) = R(n) Q(n+1) / (P(n) P(n+1))`` and ``m_j = n_0 + ... + n_j + 2j``.
    """
    upper, lower = tuple(upper), tuple(lower)
    exact = all(_is_exact(x) for x in upper + lower) and all(_is_exact(c) for c in R.coefficients)
    one = Fraction(1) if exact else 1.0
    coef = [0 * one] * (order + 1)

    def omega_over_fact(n):
        num = one
        for a in upper:
            num = num * pochhammer(a, n)
        for b in lower:
            num = num / pochhammer(b, n)
        return num / math.factorial(n)

    def S(n):
        return R(n) * _Q(lower, n + 1) / (_P(upper, n) * _P(upper, n + 1))

    def walk(j, m, weight):
        # m is m_(j-1); choose n_j >= 0
        if j > k:
            coef[m] = coef[m] + weight * omega_over_fact(m)
            return
        start = m + 2 if j > 0 else 0
        for mj in range(start, order + 1 - 2 * (k - j)):
            if j < k:
                walk(j + 1, mj, weight * S(mj))
            else:
                walk(j + 1, mj, weight)

    walk(0, 0, one)
    return GradedSeries(tuple(coef), 0, 1, "t@0")


# ---------------------------------------------------------------------------
# first-order example: D - t (D + alpha) - eps t^2 (D + gamma)


def first_order_perturbation(alpha, gamma) -> PerturbedOperator:
    return hypergeometric_perturbation((alpha,), (), EulerPolynomial((gamma, 1)))


def first_order_closed_form(t, alpha, gamma, printed: bool = False) -> float:
    """First variation of ``(1-t)^-alpha`` from ``exp int (alpha + eps gamma s)/(1 - s - eps s^2)``.

    ``(1-t)^-alpha [(2 alpha - gamma) ln(1-t) + alpha t/(1-t) + (alpha - gamma) t]``.
    ``printed=True`` gives ``(1-t)^-alpha [(2-gamma) ln(1-t) + t(2-t)/(1-t) - t]``,
    which agrees only at ``alpha = 1, gamma = 1``.
    """
    pre = (1 - t) ** (-alpha)
    if printed:
        return pre * ((2 - gamma) * math.log(1 - t) + t * (2 - t) / (1 - t) - t)
    return pre * ((2 * alpha - gamma) * math.log(1 - t) + alpha * t / (1 - t) + (alpha - gamma) * t)


# ---------------------------------------------------------------------------
# Airy: u'' = (t + eps t^2) u


def _airy_u1(order):
    n_max = int(math.floor(Fraction(order))) // 3
    c = [Fraction(0)] * (3 * n_max + 1)
    for n in range(n_max + 1):
        c[3 * n] = 1 / (Fraction(9) ** n * pochhammer(Fraction(2, 3), n) * math.factorial(n))
    return GradedSeries(tuple(c), 0, 1, "t@0")


def airy_perturbation() -> PerturbedOperator:
    """``d^2/dt^2 - t - eps t^2`` written as ``t^-2 D(D-1) - t - eps t^2``."""
    base = MellinOperator(((-2, EulerPolynomial((0, -1, 1))), (1, EulerPolynomial((-1,)))))
    return PerturbedOperator(base, ((1, Fraction(2), EulerPolynomial((-1,))),), _airy_u1)


def airy_u11(order) -> GradedSeries:
    """First variation of ``u_1 = 0F1(;2/3;t^3/9)``: ``(d^2 - t) u_11 = t^2 u_1``."""
    return variation_recurrence(airy_perturbation(), 1, order)[1]


def airy_u11_double_sum(order) -> GradedSeries:
    """``-(3/t) sum_{l>=1, m>=0} (1/3)_l z^(l+m) / ((-1/3)_l (1/3)_(l+m) (l+m)!)``, ``z = t^3/9``.

    As a series in ``t`` this equals ``(3/t) d u_11/dt`` rather than ``u_11``.
    """
    n_max = (int(math.floor(Fraction(order))) + 1) // 3
    c = {}
    third = Fraction(1, 3)
    for l in range(1, n_max + 1):
        for m in range(0, n_max + 1 - l):
            k = l + m
            term = pochhammer(third, l) / (pochhammer(-third, l) * pochhammer(third, k) * math.factorial(k))
            c[k] = c.get(k, 0) + term
    top = 3 * n_max - 1
    coeffs = [Fraction(0)] * (top - 1)
    for k, v in c.items():
        coeffs[3 * k - 1 - 2] = -3 * v / Fraction(9) ** k
    return GradedSeries(tuple(coeffs), 2, 1, "t@0")


def airy_g(z1, z2, nterms: int = 60):
    """``G(z1, z2) = sum_{l,m>=0} (1/3)_l z1^l z2^m / ((-1/3)_l (1/3)_(l+m) (l+m)!)``."""
    total = 0.0
    for l in range(nterms):
        a = float(pochhammer(Fraction(1, 3), l) / pochhammer(Fraction(-1, 3), l))
        for m in range(nterms - l):
            total += a * z1**l * z2**m / (float(pochhammer(Fraction(1, 3), l + m)) * math.factorial(l + m))
    return total


# ---------------------------------------------------------------------------
# Bessel-type limit D^3 U = -y U with eps = lam^-3


def _bessel_u0(order):
    n = int(math.floor(Fraction(order)))
    return GradedSeries(tuple(Fraction((-1) ** k, math.factorial(k) ** 3) for k in range(n + 1)), 0, 1, "y@0")


def bessel_perturbation() -> PerturbedOperator:
    """``(1-t) D^3 + lam^3 t`` in ``y = lam^3 t``: ``D^3 + y - eps y D^3`` with ``eps = lam^-3``."""
    base = MellinOperator(((0, EulerPolynomial((0, 0, 0, 1))), (1, EulerPolynomial((1,)))), 1, "y@0")
    return PerturbedOperator(base, ((1, Fraction(1), EulerPolynomial((0, 0, 0, -1))),), _bessel_u0)


def bessel_variation_u01(order) -> GradedSeries:
    """Coefficient of ``lam^-3`` in ``F(-lam, eps lam, conj(eps) lam; 1, 1; y/lam^3)``."""
    return variation_recurrence(bessel_perturbation(), 1, order)[1]


def bessel_u01_double_sum(order, corrected: bool = False) -> GradedSeries:
    """``sum_{m,n>=0} n^3 (-y)^(m+n) / ((m+n)!)^3``.

    ``corrected=True`` gives ``-sum_{m>=1, n>=0}`` of the same summand, which
    is what the recurrence produces.
    """
    n_max = int(math.floor(Fraction(order)))
    c = []
    for N in range(n_max + 1):
        cube = sum(n**3 for n in range(N)) if corrected else sum(n**3 for n in range(N + 1))
        sign = -1 if corrected else 1
        c.append(Fraction(sign * cube * (-1) ** N, math.factorial(N) ** 3))
    return GradedSeries(tuple(c), 0, 1, "y@0")


def bessel_u01_from_product(order) -> GradedSeries:
    """Expand ``prod_{i<N} (i^3 - lam^3) = (-lam^3)^N prod (1 - i^3 lam^-3)`` to first order."""
    n_max = int(math.floor(Fraction(order)))
    c = []
    for N in range(n_max + 1):
        e1 = sum(Fraction(i**3) for i in range(N))
        c.append(Fraction((-1) ** N) * (-e1) / math.factorial(N) ** 3)
    return GradedSeries(tuple(c), 0, 1, "y@0")


# ---------------------------------------------------------------------------
# V2 near s = 0 with z = lam^3 s^2, eps = lam^(-3/2)


def _v2_series(order):
    n_max = int(math.floor(Fraction(order)))
    c = [Fraction(0)]
    for n in range(1, n_max + 1):
        c.append(Fraction(2, math.factorial(2 * n) * 2 ** (n - 1) * math.factorial(n - 1)))
    return GradedSeries(tuple(c), 0, 1, "z@0")


def v2_perturbation() -> PerturbedOperator:
    """``Q - z - eps z^(1/2) R + eps^2 z S`` with ``Q = 2D(2D-1)(2D-2)``,
    ``R = 2D(2D-1)(4D-1)``, ``S = (2D)^3``.
    """
    Q = EulerPolynomial.from_shifts([0, Fraction(-1, 2), -1], lead=Fraction(8))
    R = EulerPolynomial.from_shifts([0, Fraction(-1, 2), Fraction(-1, 4)], lead=Fraction(16))
    S = EulerPolynomial((0, 0, 0, Fraction(8)))
    base = MellinOperator(((0, Q), (1, EulerPolynomial((Fraction(-1),)))), 1, "z@0")
    return PerturbedOperator(base, ((1, Fraction(1, 2), -R), (2, Fraction(1), S)), _v2_series)


def v2_variation(order, k: int = 1) -> GradedSeries:
    """``V_(2,k)`` on the half-integer lattice."""
    return variation_recurrence(v2_perturbation(), k, order)[k]


def v21_double_sum(order) -> GradedSeries:
    """``(8/sqrt z) sum_{m,n>=1} (4n-1)(1/2)_n (z/2)^(m+n) / ((2m+2n-1)! (1/2)_(m+n-1) (n-1)!)``."""
    n_max = int(math.floor(Fraction(order) + Fraction(1, 2)))
    half = Fraction(1, 2)
    c = {}
    for m in range(1, n_max + 1):
        for n in range(1, n_max + 1 - m):
            p = m + n
            term = (4 * n - 1) * pochhammer(half, n) / (
                math.factorial(2 * p - 1) * pochhammer(half, p - 1) * math.factorial(n - 1)
            )
            c[p] = c.get(p, 0) + 8 * term / Fraction(2) ** p
    if not c:
        return _zero_series(Fraction(3, 2), 2, "z@0")
    top = max(c)
    coeffs = [Fraction(0)] * (2 * (top - 2) + 1)
    for p, v in c.items():
        coeffs[2 * (p - 2)] = v
    return GradedSeries(tuple(coeffs), Fraction(3, 2), 2, "z@0")

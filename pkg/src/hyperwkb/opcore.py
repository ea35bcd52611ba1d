"""Operator and series algebra in the Euler derivative D = t d/dt.

Everything here is written with plain Python numbers so the same code runs
on ``complex`` coefficients (the fast path) and on ``fractions.Fraction``
coefficients (the exact path used for identity checks).

Conventions
-----------
* A :class:`GradedSeries` stores ``sum_n c_n x^(gamma + n/L)`` for
  ``n = 0..N``; ``N`` is the reliable truncation order.
* A :class:`MellinOperator` stores ``sum_k x^(k/L) P_k(D)``.  Offsets ``k``
  may be negative (useful at infinity).
* A :class:`LogStackSolution` stores ``sum_j (ln x)^j / j! * S_j(x)``.  With
  the factorial normalisation, D acts on the log index as a shift, so
  ``P(D)`` becomes ``sum_k P^(k)(a)/k! N^k`` on each exponent ``a``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number

__all__ = [
    "EulerPolynomial",
    "GradedSeries",
    "LogStackSolution",
    "MellinOperator",
    "build_hypergeometric_operator",
    "substitute_one_minus_t",
    "apply",
    "residual_norm",
    "VARIABLES",
]

VARIABLES = ("t@0", "s@0", "1/t@inf", "z@0", "y@0", "x@0")


def _is_zero(c) -> bool:
    return c == 0


def _exponent_step(gamma_a, gamma_b, lattice: int) -> int:
    """Integer k with gamma_b - gamma_a == k / lattice, or ValueError."""
    d = (gamma_b - gamma_a) * lattice
    if isinstance(d, Fraction):
        if d.denominator != 1:
            raise ValueError("exponents are not on a common lattice")
        return int(d)
    d = complex(d)
    k = round(d.real)
    if abs(d - k) > 1e-9:
        raise ValueError("exponents are not on a common lattice")
    return k


# ---------------------------------------------------------------------------
# polynomials in D


@dataclass(frozen=True)
class EulerPolynomial:
    """Polynomial ``sum_k p_k D^k`` stored in the monomial basis."""

    coefficients: tuple = (0,)

    def __post_init__(self):
        c = list(self.coefficients)
        while len(c) > 1 and _is_zero(c[-1]):
            c.pop()
        if not c:
            c = [0]
        object.__setattr__(self, "coefficients", tuple(c))

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def from_roots(cls, roots, lead=1):
        """``lead * prod (x - r)``."""
        p = cls((lead,))
        for r in roots:
            p = p * cls((-r, 1))
        return p

    @classmethod
    def from_shifts(cls, shifts, lead=1):
        """``lead * prod (x + a)``."""
        return cls.from_roots([-a for a in shifts], lead)

    @property
    def degree(self) -> int:
        if len(self.coefficients) == 1 and _is_zero(self.coefficients[0]):
            return -1
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return self.degree < 0

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        if not isinstance(other, EulerPolynomial):
            other = EulerPolynomial.constant(other)
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return EulerPolynomial(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return EulerPolynomial(tuple(-c for c in self.coefficients))

    def __sub__(self, other):
        return self + (-other if isinstance(other, EulerPolynomial) else EulerPolynomial.constant(-other))

    def __mul__(self, other):
        if not isinstance(other, EulerPolynomial):
            return EulerPolynomial(tuple(c * other for c in self.coefficients))
        a, b = self.coefficients, other.coefficients
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if _is_zero(x):
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return EulerPolynomial(tuple(out))

    __rmul__ = __mul__

    def derivative(self):
        c = self.coefficients
        if len(c) == 1:
            return EulerPolynomial((0,))
        return EulerPolynomial(tuple(k * c[k] for k in range(1, len(c))))

    def taylor(self, a):
        """List of ``P^(k)(a) / k!`` for k = 0..degree."""
        out = []
        p = self
        fact = 1
        for k in range(max(self.degree, 0) + 1):
            out.append(p(a) / fact if fact != 1 else p(a))
            p = p.derivative()
            fact *= k + 1
        return out

    def shift(self, a):
        """``P(x + a)`` as a new polynomial."""
        return EulerPolynomial(tuple(self.taylor(a)))


# ---------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class GradedSeries:
    """Truncated series ``sum_{n=0}^{N} c_n x^(gamma + n/L)``.

    Leading zeros are stripped at construction (the exponent and the
    truncation order move accordingly), unless the series is identically
    zero.
    """

    coefficients: tuple
    leading_exponent: object = 0
    lattice_denominator: int = 1
    variable: str = "t@0"

    def __post_init__(self):
        c = tuple(self.coefficients)
        if self.lattice_denominator < 1:
            raise ValueError("lattice denominator must be a positive integer")
        if not c:
            raise ValueError("a series needs at least one coefficient")
        k = 0
        while k < len(c) - 1 and _is_zero(c[k]):
            k += 1
        if k and not _is_zero(c[k]):
            c = c[k:]
            gamma = self.leading_exponent + Fraction(k, self.lattice_denominator)
            object.__setattr__(self, "leading_exponent", _tidy_exponent(gamma))
        object.__setattr__(self, "coefficients", c)

    @property
    def truncation_order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def last_exponent(self):
        return self.leading_exponent + Fraction(self.truncation_order, self.lattice_denominator)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coefficients)

    def exponent(self, n: int):
        return self.leading_exponent + Fraction(n, self.lattice_denominator)

    def terms(self):
        for n, c in enumerate(self.coefficients):
            yield self.exponent(n), c

    def _check(self, other: "GradedSeries"):
        if self.variable != other.variable:
            raise ValueError(f"variable mismatch: {self.variable} vs {other.variable}")
        if self.lattice_denominator != other.lattice_denominator:
            raise ValueError("lattice mismatch")

    def __add__(self, other):
        if isinstance(other, Number):
            other = GradedSeries((other,), 0, self.lattice_denominator, self.variable)
        self._check(other)
        L = self.lattice_denominator
        if self.is_zero():
            lo = other.leading_exponent
        elif other.is_zero():
            lo = self.leading_exponent
        else:
            k = _exponent_step(self.leading_exponent, other.leading_exponent, L)
            lo = self.leading_exponent if k >= 0 else other.leading_exponent
        a0 = _exponent_step(lo, self.leading_exponent, L)
        b0 = _exponent_step(lo, other.leading_exponent, L)
        top = min(a0 + self.truncation_order, b0 + other.truncation_order)
        out = [0] * (top + 1)
        for i, c in enumerate(self.coefficients):
            if 0 <= a0 + i <= top:
                out[a0 + i] = out[a0 + i] + c
        for i, c in enumerate(other.coefficients):
            if 0 <= b0 + i <= top:
                out[b0 + i] = out[b0 + i] + c
        if top < 0:
            out = [0]
        return GradedSeries(tuple(out), lo, L, self.variable)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return GradedSeries(tuple(c * x for x in self.coefficients), self.leading_exponent,
                            self.lattice_denominator, self.variable)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self.scale(other)
        self._check(other)
        n = min(self.truncation_order, other.truncation_order)
        a, b = self.coefficients, other.coefficients
        out = [0] * (n + 1)
        for i in range(n + 1):
            if _is_zero(a[i]):
                continue
            for j in range(n + 1 - i):
                out[i + j] = out[i + j] + a[i] * b[j]
        return GradedSeries(tuple(out), self.leading_exponent + other.leading_exponent,
                            self.lattice_denominator, self.variable)

    def __rmul__(self, other):
        return self.scale(other)

    def euler_derivative(self):
        """Apply D = x d/dx termwise."""
        return GradedSeries(tuple(c * self.exponent(n) for n, c in enumerate(self.coefficients)),
                            self.leading_exponent, self.lattice_denominator, self.variable)

    def shift(self, k: int):
        """Multiply by x^(k/L)."""
        return GradedSeries(self.coefficients, _tidy_exponent(self.leading_exponent + Fraction(k, self.lattice_denominator)),
                            self.lattice_denominator, self.variable)

    def truncate(self, n: int):
        return GradedSeries(self.coefficients[: n + 1], self.leading_exponent, self.lattice_denominator, self.variable)

    def derivative(self):
        """d/dx, i.e. x^-1 D."""
        return self.euler_derivative().shift(-self.lattice_denominator)

    def power(self, p):
        """``self ** p`` on the principal branch of the leading coefficient.

        Uses the recurrence ``n b_n = sum_k (p k - (n - k)) a_k b_{n-k}`` for
        the normalised series a = self / (c_0 x^gamma).
        """
        c0 = self.coefficients[0]
        if _is_zero(c0):
            raise ValueError("power of a series with zero leading coefficient")
        a = [c / c0 for c in self.coefficients]
        b = [a[0] * 0 + 1]
        for n in range(1, len(a)):
            acc = 0
            for k in range(1, n + 1):
                acc = acc + (p * k - (n - k)) * a[k] * b[n - k]
            b.append(acc / n)
        rational = isinstance(c0, (int, Fraction))
        if rational and c0 == 1:
            lead = Fraction(1)
        elif rational and isinstance(p, int):
            lead = Fraction(c0) ** p
        elif isinstance(p, int) and p >= 0:
            lead = c0**p
        else:
            lead = complex(c0) ** p
        return GradedSeries(tuple(lead * x for x in b), _tidy_exponent(self.leading_exponent * p),
                            self.lattice_denominator, self.variable)

    def reciprocal(self):
        return self.power(-1)

    def __call__(self, x):
        """Numerical value at ``x`` on the principal branch of x^gamma."""
        x = complex(x)
        root = x ** (1.0 / self.lattice_denominator) if self.lattice_denominator > 1 else x
        acc = 0j
        for c in reversed(self.coefficients):
            acc = acc * root + complex(c)
        g = complex(self.leading_exponent)
        return acc * (x ** g if g != 0 else 1.0)


def _tidy_exponent(g):
    if isinstance(g, Fraction) and g.denominator == 1:
        return int(g)
    return g


# ---------------------------------------------------------------------------
# log stacks


@dataclass(frozen=True)
class LogStackSolution:
    """``sum_j (ln x)^j / j! * S_j(x)`` with all ``S_j`` on one exponent grid.

    ``stack[j]`` is the coefficient tuple of ``S_j``; every tuple has the
    same length (truncation order + 1).
    """

    stack: tuple
    leading_exponent: object = 0
    lattice_denominator: int = 1
    variable: str = "t@0"

    def __post_init__(self):
        stack = [tuple(s) for s in self.stack]
        if not stack:
            raise ValueError("the log-free branch must be present")
        n = min(len(s) for s in stack)
        stack = [s[:n] for s in stack]
        while len(stack) > 1 and all(_is_zero(c) for c in stack[-1]):
            stack.pop()
        object.__setattr__(self, "stack", tuple(stack))

    @classmethod
    def from_series(cls, s: GradedSeries, log_power: int = 0):
        zero = tuple(0 * c for c in s.coefficients)
        stack = [zero] * log_power + [s.coefficients]
        return cls(tuple(stack), s.leading_exponent, s.lattice_denominator, s.variable)

    @classmethod
    def from_branches(cls, branches):
        """Build from ``(j, GradedSeries)`` pairs; exponent grids are aligned."""
        branches = list(branches)
        ref = branches[0][1]
        L = ref.lattice_denominator
        lo = ref.leading_exponent
        for _, s in branches:
            if not s.is_zero() and _exponent_step(lo, s.leading_exponent, L) < 0:
                lo = s.leading_exponent
        top = min(_exponent_step(lo, s.leading_exponent, L) + s.truncation_order for _, s in branches)
        jmax = max(j for j, _ in branches)
        stack = [[0] * (top + 1) for _ in range(jmax + 1)]
        for j, s in branches:
            off = _exponent_step(lo, s.leading_exponent, L)
            for i, c in enumerate(s.coefficients):
                if off + i <= top:
                    stack[j][off + i] += c
        return cls(tuple(tuple(r) for r in stack), lo, L, ref.variable)

    @property
    def truncation_order(self) -> int:
        return len(self.stack[0]) - 1

    @property
    def max_log_power(self) -> int:
        return len(self.stack) - 1

    @property
    def branches(self):
        """``(j, GradedSeries)`` pairs in descending ``j``."""
        return [
            (j, GradedSeries(self.stack[j], self.leading_exponent, self.lattice_denominator, self.variable))
            for j in range(len(self.stack) - 1, -1, -1)
        ]

    def branch(self, j: int) -> GradedSeries:
        if j >= len(self.stack):
            return GradedSeries((0,) * len(self.stack[0]), self.leading_exponent, self.lattice_denominator, self.variable)
        return GradedSeries(self.stack[j], self.leading_exponent, self.lattice_denominator, self.variable)

    def exponent(self, n: int):
        return self.leading_exponent + Fraction(n, self.lattice_denominator)

    def __add__(self, other):
        if isinstance(other, GradedSeries):
            other = LogStackSolution.from_series(other)
        return LogStackSolution.from_branches([(j, s) for j, s in self.branches] + [(j, s) for j, s in other.branches])

    def scale(self, c):
        return LogStackSolution(tuple(tuple(c * x for x in row) for row in self.stack),
                                self.leading_exponent, self.lattice_denominator, self.variable)

    def __sub__(self, other):
        if isinstance(other, GradedSeries):
            other = LogStackSolution.from_series(other)
        return self + other.scale(-1)

    def shift(self, k: int):
        """Multiply by x^(k/L)."""
        g = _tidy_exponent(self.leading_exponent + Fraction(k, self.lattice_denominator))
        return LogStackSolution(self.stack, g, self.lattice_denominator, self.variable)

    def euler_derivative(self):
        return apply(MellinOperator.euler(EulerPolynomial((0, 1)), self.lattice_denominator, self.variable), self)

    def derivative(self):
        return self.euler_derivative().shift(-self.lattice_denominator)

    def derivatives(self, x, n: int, log_x=None):
        """Values of the first ``n`` derivatives (0..n-1) at ``x``."""
        out = []
        cur = self
        for _ in range(n):
            out.append(cur(x, log_x))
            cur = cur.derivative()
        return out

    def max_abs(self, upto: int | None = None) -> float:
        n = self.truncation_order if upto is None else min(upto, self.truncation_order)
        return max((abs(complex(row[i])) for row in self.stack for i in range(n + 1)), default=0.0)

    def __call__(self, x, log_x=None):
        """Value at ``x``; ``log_x`` overrides the branch of ln x if given."""
        lx = cmath.log(complex(x)) if log_x is None else log_x
        acc = 0j
        for j in range(len(self.stack)):
            acc += lx ** j / math.factorial(j) * self.branch(j)(x)
        return acc


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True)
class MellinOperator:
    """``sum_k x^(k/L) P_k(D)`` with ``terms = ((k, P_k), ...)``."""

    terms: tuple
    lattice_denominator: int = 1
    variable: str = "t@0"

    def __post_init__(self):
        acc: dict[int, EulerPolynomial] = {}
        for k, p in self.terms:
            if not isinstance(p, EulerPolynomial):
                p = EulerPolynomial(tuple(p)) if isinstance(p, (tuple, list)) else EulerPolynomial.constant(p)
            acc[k] = acc[k] + p if k in acc else p
        terms = tuple(sorted((k, p) for k, p in acc.items() if not p.is_zero()))
        object.__setattr__(self, "terms", terms)

    @classmethod
    def euler(cls, poly, lattice_denominator=1, variable="t@0"):
        return cls(((0, poly),), lattice_denominator, variable)

    @classmethod
    def monomial(cls, k, coef=1, lattice_denominator=1, variable="t@0"):
        return cls(((k, EulerPolynomial.constant(coef)),), lattice_denominator, variable)

    @property
    def order(self) -> int:
        return max((p.degree for _, p in self.terms), default=0)

    @property
    def offsets(self):
        return [k for k, _ in self.terms]

    def poly(self, k: int) -> EulerPolynomial:
        for kk, p in self.terms:
            if kk == k:
                return p
        return EulerPolynomial((0,))

    def __add__(self, other):
        self._check(other)
        return MellinOperator(self.terms + other.terms, self.lattice_denominator, self.variable)

    def __neg__(self):
        return MellinOperator(tuple((k, -p) for k, p in self.terms), self.lattice_denominator, self.variable)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return MellinOperator(tuple((k, p * c) for k, p in self.terms), self.lattice_denominator, self.variable)

    def _check(self, other):
        if self.variable != other.variable or self.lattice_denominator != other.lattice_denominator:
            raise ValueError("operators live on different variables or lattices")

    def compose(self, other: "MellinOperator") -> "MellinOperator":
        """``self o other`` using ``P(D) x^b = x^b P(D + b)``."""
        self._check(other)
        L = self.lattice_denominator
        out = []
        for a, p in self.terms:
            for b, r in other.terms:
                out.append((a + b, p.shift(Fraction(b, L)) * r))
        return MellinOperator(tuple(out), L, self.variable)

    __matmul__ = compose

    def left_shift(self, k: int) -> "MellinOperator":
        """Left-multiply by x^(k/L)."""
        return MellinOperator(tuple((a + k, p) for a, p in self.terms), self.lattice_denominator, self.variable)

    def __call__(self, sol):
        return apply(self, sol)


def build_hypergeometric_operator(upper, lower, exact: bool = False) -> MellinOperator:
    """``Q(D) - t P(D)`` with ``Q = D prod(D + b_j - 1)`` and ``P = prod(D + a_i)``."""
    for j, b in enumerate(lower):
        bc = complex(b)
        if bc.imag == 0 and bc.real <= 0 and bc.real == math.floor(bc.real):
            raise ValueError(f"lower parameter {j} equals {bc.real:g}, a nonpositive integer")
    one = Fraction(1) if exact else 1
    q_poly = EulerPolynomial.from_shifts([0] + [b - one for b in lower], lead=one)
    p_poly = EulerPolynomial.from_shifts(list(upper), lead=one)
    return MellinOperator(((0, q_poly), (1, -p_poly)))


def _apply_stack(op: MellinOperator, stack, gamma, L):
    n_in = len(stack[0])
    nlog = len(stack)
    kmin = min(op.offsets)
    out = [[0] * n_in for _ in range(nlog)]
    for k, p in op.terms:
        d = k - kmin
        for n in range(n_in - d):
            a = gamma + Fraction(n, L)
            tay = p.taylor(a)
            for j in range(nlog):
                acc = 0
                for m, tc in enumerate(tay):
                    if j + m >= nlog:
                        break
                    c = stack[j + m][n]
                    if not _is_zero(c):
                        acc = acc + tc * c
                if not _is_zero(acc):
                    out[j][n + d] = out[j][n + d] + acc
    return out, _tidy_exponent(gamma + Fraction(kmin, L))


def apply(op: MellinOperator, sol):
    """Apply ``op`` to a :class:`GradedSeries` or :class:`LogStackSolution`.

    The result keeps the input truncation order; every returned coefficient
    is exact (only inputs up to the input order contribute).
    """
    if not op.terms:
        return sol.scale(0)
    if sol.variable != op.variable:
        raise ValueError(f"variable mismatch: operator on {op.variable}, series on {sol.variable}")
    if sol.lattice_denominator % op.lattice_denominator:
        raise ValueError("lattice mismatch")
    if sol.lattice_denominator != op.lattice_denominator:
        op = _refine(op, sol.lattice_denominator)
    L = sol.lattice_denominator
    if isinstance(sol, GradedSeries):
        out, g = _apply_stack(op, [sol.coefficients], sol.leading_exponent, L)
        return GradedSeries(tuple(out[0]), g, L, sol.variable)
    out, g = _apply_stack(op, sol.stack, sol.leading_exponent, L)
    return LogStackSolution(tuple(tuple(r) for r in out), g, L, sol.variable)


def _refine(op: MellinOperator, L: int) -> MellinOperator:
    f = L // op.lattice_denominator
    return MellinOperator(tuple((k * f, p) for k, p in op.terms), L, op.variable)


def residual_norm(op: MellinOperator, sol, order: int | None = None) -> float:
    """Largest coefficient modulus of ``op(sol)`` up to ``order``."""
    r = apply(op, sol)
    if isinstance(r, GradedSeries):
        r = LogStackSolution.from_series(r)
    return float(r.max_abs(order))


# ---------------------------------------------------------------------------
# change of variable t -> s = 1 - t


def _weyl_mul(a: dict, b: dict) -> dict:
    # (s^i d^j)(s^k d^l) = sum_r C(j,r) k!/(k-r)! s^(i+k-r) d^(j+l-r)
    out: dict = {}
    for (i, j), x in a.items():
        for (k, l), y in b.items():
            for r in range(min(j, k) + 1):
                c = math.comb(j, r) * math.perm(k, r)
                key = (i + k - r, j + l - r)
                out[key] = out.get(key, 0) + c * x * y
    return {k: v for k, v in out.items() if not _is_zero(v)}


def substitute_one_minus_t(op: MellinOperator, order: int = 0) -> MellinOperator:
    """Rewrite an operator in ``t`` as an operator in ``s = 1 - t``.

    The result has the form ``sum_j s^j P_j(D_s)`` with nonnegative ``j``;
    it equals the original after left multiplication by the smallest power
    of ``s`` that clears denominators.  Negative powers of ``t`` are expanded
    as geometric series in ``s`` through ``order`` terms.
    """
    if op.lattice_denominator != 1:
        raise ValueError("substitution needs an integer exponent lattice")
    target = {"t@0": "s@0", "s@0": "t@0"}.get(op.variable, "s@0")
    # D_t = t d/dt = -(1 - s) d/ds = s d - d
    d_t = {(0, 1): -1, (1, 1): 1}
    total: dict = {}
    for m, p in op.terms:
        if m >= 0:
            tm = {(i, 0): math.comb(m, i) * (-1) ** i for i in range(m + 1)}
        else:
            tm = {(i, 0): math.comb(-m + i - 1, i) for i in range(order + 1)}
        power = {(0, 0): 1}
        for k, c in enumerate(p.coefficients):
            if k:
                power = _weyl_mul(power, d_t)
            if _is_zero(c):
                continue
            term = _weyl_mul(tm, power)
            for key, v in term.items():
                total[key] = total.get(key, 0) + c * v
    # s^i d^k = s^(i-k) D(D-1)...(D-k+1)
    by_shift: dict[int, EulerPolynomial] = {}
    for (i, k), v in total.items():
        if _is_zero(v):
            continue
        fall = EulerPolynomial.from_roots(range(k), lead=v)
        e = i - k
        by_shift[e] = by_shift[e] + fall if e in by_shift else fall
    if not by_shift:
        return MellinOperator((), 1, target)
    emin = min(by_shift)
    return MellinOperator(tuple((e - emin, p) for e, p in by_shift.items()), 1, target)

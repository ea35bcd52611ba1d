"""Direct evaluation of pFq series, multiple polylogarithms and MZVs.

Convention for the nested sums::

    Li_{d_1..d_k}(t) = sum_{0 < n_1 < ... < n_k} t^{n_k} / (n_1^{d_1} ... n_k^{d_k})

and zeta(d_1..d_k) = Li_{d_1..d_k}(1) when d_k >= 2.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .opcore import GradedSeries
from .special import bernoulli

__all__ = [
    "HyperParams",
    "ConvergenceError",
    "pochhammer",
    "pfq_eval",
    "pfq",
    "pfq_series",
    "multi_polylog",
    "mzv",
    "zeta",
    "mzv_newton",
]


class ConvergenceError(ArithmeticError):
    """Raised when a series fails to converge or is divergent."""


def _nonpos_int(x) -> bool:
    x = complex(x)
    return x.imag == 0 and x.real <= 0 and x.real == math.floor(x.real)


@dataclass(frozen=True)
class HyperParams:
    """Upper parameters alpha_1..alpha_p and lower parameters beta_1..beta_q."""

    upper: tuple = ()
    lower: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(self.upper))
        object.__setattr__(self, "lower", tuple(self.lower))
        for j, b in enumerate(self.lower):
            if _nonpos_int(b):
                raise ValueError(f"lower parameter {j} is a nonpositive integer ({complex(b).real:g})")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def kind(self) -> str:
        if any(_nonpos_int(a) for a in self.upper):
            return "polynomial"
        if self.p == self.q + 1:
            return "balanced"
        if self.p < self.q + 1:
            return "confluent"
        return "divergent"

    def degree(self) -> int | None:
        """Degree of the terminating series, or None."""
        ks = [int(-complex(a).real) for a in self.upper if _nonpos_int(a)]
        return min(ks) if ks else None

    def excess(self) -> complex:
        """sum(beta) - sum(alpha), governs convergence at t = 1."""
        return complex(sum(self.lower) - sum(self.upper))


def pochhammer(a, n: int):
    """Rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = a * 0 + 1
    for i in range(n):
        out = out * (a + i)
    return out


def _term_ratio(params: HyperParams, n: int):
    # a_{n+1} / a_n without the power of t
    num = 1
    for a in params.upper:
        num *= a + n
    den = n + 1
    for b in params.lower:
        den *= b + n
    return num / den


def _levin_u(partial, terms, kmax: int):
    """Levin u-transform of a sequence of partial sums; returns (value, error)."""
    n0 = 0
    best = None
    prev = None
    err = math.inf
    for k in range(2, kmax + 1):
        if n0 + k >= len(partial):
            break
        num = 0j
        den = 0j
        for j in range(k + 1):
            w = terms[n0 + j] * (n0 + j + 1)
            if w == 0:
                return partial[n0 + j], 0.0
            c = (-1) ** j * math.comb(k, j) * ((n0 + j + 1) / (n0 + k + 1)) ** (k - 1) / w
            num += c * partial[n0 + j]
            den += c
        val = num / den
        if prev is not None:
            e = abs(val - prev)
            if e < err:
                err = e
                best = val
        prev = val
    return best, err


def pfq_eval(params: HyperParams, t, tol: float = 1e-14, max_terms: int = 100000):
    """Sum the hypergeometric series at ``t``.

    Returns ``(value, est_error)``.  The tail is bounded by a geometric
    series built from the current term ratio once that ratio is below one;
    ``tol`` is relative to ``max(1, |value|)``.  On the unit circle of a
    balanced series the partial sums converge algebraically, and a Levin
    u-transform is used instead; its estimate is the difference of the last
    two transforms.
    """
    kind = params.kind
    if kind == "divergent":
        raise ConvergenceError("series with p > q + 1 has zero radius of convergence")
    t = complex(t)
    if kind == "polynomial":
        deg = params.degree()
        s = 0j
        term = 1 + 0j
        for n in range(deg + 1):
            s += term
            term *= _term_ratio(params, n) * t
        return s, 0.0
    if kind == "balanced":
        if abs(t) > 1:
            raise ConvergenceError(f"|t| = {abs(t):g} lies outside the disc of convergence")
        if abs(abs(t) - 1) < 1e-15:
            if params.excess().real <= 0:
                raise ConvergenceError("series diverges on the unit circle when Re(sum b - sum a) <= 0")
            return _balanced_boundary(params, t, tol, max_terms)
    s = 0j
    term = 1 + 0j
    mag = 0.0
    last_ratio = math.inf
    for n in range(max_terms):
        s += term
        mag += abs(term)
        r = _term_ratio(params, n) * t
        nxt = term * r
        ar = abs(r)
        last_ratio = ar
        if nxt == 0:
            return s, mag * 2.2e-16
        if ar < 1 and n > 0:
            # later ratios shrink for confluent series; for balanced ones they
            # approach |t| from below or above, so bound with the larger one
            bound_r = ar if kind == "confluent" else max(ar, abs(t))
            if bound_r < 1:
                tail = abs(nxt) / (1 - bound_r)
                if tail <= tol * max(1.0, abs(s)):
                    return s, tail + mag * 2.2e-16
        term = nxt
    raise ConvergenceError(f"no convergence after {max_terms} terms (last |ratio| = {last_ratio:.3g})")


def _balanced_boundary(params, t, tol, max_terms):
    if abs(t - 1) > 1e-15:
        n = 60
        partial = []
        terms = []
        acc = 0j
        term = 1 + 0j
        for k in range(n):
            acc += term
            partial.append(acc)
            terms.append(term)
            term *= _term_ratio(params, k) * t
        val, err = _levin_u(partial, terms, 40)
        if val is None:
            raise ConvergenceError("sequence transformation failed")
        return val, err
    # at t = 1 the terms behave like n^(-1-s) (1 + c_1/n + ...), s = excess,
    # so S(N) = F - N^(-s) (d_0 + d_1/N + ...); extrapolate over N = N0 2^j
    s_exc = params.excess()
    N0, levels = 64, 12
    marks = {N0 * 2**j for j in range(levels)}
    seq = []
    acc = 0j
    term = 1 + 0j
    for k in range(N0 * 2 ** (levels - 1)):
        acc += term
        term *= _term_ratio(params, k)
        if k + 1 in marks:
            seq.append(acc)
    table = list(seq)
    best, err = table[-1], abs(table[-1] - table[-2])
    for m in range(levels - 1):
        f = 2.0 ** (s_exc + m)
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
        if len(table) >= 2:
            e = abs(table[-1] - table[-2])
            if e < err:
                best, err = table[-1], e
    if err > tol * max(1.0, abs(best)) and err > 1e-6:
        raise ConvergenceError(f"extrapolation at t = 1 stalled (estimate {err:.2g})")
    return best, err


def pfq(upper, lower, t, tol: float = 1e-14):
    """Convenience wrapper returning only the value."""
    return pfq_eval(HyperParams(tuple(upper), tuple(lower)), t, tol)[0]


def pfq_series(params: HyperParams, order: int, exact: bool = False, variable: str = "t@0") -> GradedSeries:
    """Taylor coefficients a_0..a_order from Q(n+1) a_{n+1} = P(n) a_n.

    Here Q(x) = x prod(x + b_j - 1) and P(x) = prod(x + a_i), so
    Q(n+1) = (n+1) prod(n + b_j).  Divergent parameter sets are allowed:
    the coefficients are still well defined as a formal series.
    """
    one = Fraction(1) if exact else 1.0
    coef = [one]
    for n in range(order):
        num = one
        for a in params.upper:
            num = num * (a + n)
        den = one * (n + 1)
        for b in params.lower:
            den = den * (b + n)
        coef.append(coef[-1] * num / den)
    return _raw_series(coef, variable)


def _raw_series(coef, variable):
    # avoid normalising away leading zeros of polynomial cases
    s = GradedSeries.__new__(GradedSeries)
    object.__setattr__(s, "coefficients", tuple(coef))
    object.__setattr__(s, "leading_exponent", 0)
    object.__setattr__(s, "lattice_denominator", 1)
    object.__setattr__(s, "variable", variable)
    return s


# ---------------------------------------------------------------------------
# polylogarithms and MZVs


def _check_index(index) -> tuple:
    index = tuple(int(d) for d in index)
    if not index or any(d < 1 for d in index):
        raise ValueError("index must be a nonempty list of positive integers")
    return index


def _nested_partial(index, N: int, t: float = 1.0) -> np.ndarray:
    """Partial sums S(M) for M = 1..N of the nested sum."""
    n = np.arange(1, N + 1, dtype=float)
    inner = n ** (-float(index[0]))
    for d in index[1:]:
        pref = np.concatenate(([0.0], np.cumsum(inner)[:-1]))
        inner = pref * n ** (-float(d))
    if t != 1.0:
        inner = inner * np.power(t, n)
    return np.cumsum(inner)


def multi_polylog(index, t: float, tol: float = 1e-12) -> float:
    """Li_{d_1..d_k}(t) for real t in [0, 1].

    For t < 1 the nested sum is truncated once the geometric tail bound
    ``prefix(N) t^N / (N^d_k (1 - t))`` falls below ``tol``.  At t = 1 the
    call is routed to :func:`mzv`.
    """
    index = _check_index(index)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0:
        return 0.0
    if t == 1.0:
        if index[-1] < 2:
            raise ConvergenceError("Li at t = 1 diverges when the last exponent is 1")
        return mzv(index, tol)
    N = 64
    k = len(index)
    while True:
        n = np.arange(1, N + 1, dtype=float)
        inner = n ** (-float(index[0]))
        pref = np.ones_like(n)
        for d in index[1:]:
            pref = np.concatenate(([0.0], np.cumsum(inner)[:-1]))
            inner = pref * n ** (-float(d))
        terms = inner * np.power(t, n)
        # later prefixes grow at most logarithmically
        tail = float(pref[-1] + 1) * (1 + math.log(2 * N)) ** k * t ** (N + 1) / (1 - t)
        if tail <= tol or N > 2**24:
            return float(math.fsum(terms))
        N *= 2


_MZV_LOCK = threading.Lock()
_MZV_MEMO: dict = {}


def mzv(index, tol: float = 1e-12) -> float:
    """Multiple zeta value with Richardson extrapolation of the partial sums.

    For integer exponents with d_k >= 2 the partial sums S(N) expand in
    integer powers of 1/N (logarithms enter only through inner exponents
    equal to one).  Sums at N0 2^j are extrapolated in 1/N until two
    consecutive levels agree within ``tol``.
    """
    index = _check_index(index)
    if index[-1] < 2:
        raise ValueError("the last exponent must be at least 2")
    key = index
    with _MZV_LOCK:
        hit = _MZV_MEMO.get(key)
    if hit is not None and hit[1] <= tol:
        return hit[0]
    val, err = _mzv_richardson(index, tol)
    with _MZV_LOCK:
        old = _MZV_MEMO.get(key)
        if old is None or err < old[1]:
            _MZV_MEMO[key] = (val, err)
    return val


def _mzv_richardson(index, tol):
    if len(index) == 1:
        return zeta(index[0]), 1e-15
    nlog = sum(1 for d in index[:-1] if d == 1)
    N0 = 256
    levels = 10
    partial = _nested_partial(index, N0 * 2 ** (levels - 1))
    Ns = np.array([N0 * 2**j for j in range(levels)], dtype=float)
    seq = np.array([partial[int(N) - 1] for N in Ns])
    powers = range(1, 8)
    basis = [(p, j) for p in powers for j in range(nlog + 1)]

    def solve(idx, nb):
        cols = [np.ones(len(idx))]
        for p, j in basis[:nb]:
            cols.append(Ns[idx] ** (-p) * np.log(Ns[idx]) ** j)
        A = np.array(cols).T
        return np.linalg.lstsq(A, seq[idx], rcond=None)[0][0]

    best, err = seq[-1], abs(seq[-1] - seq[-2])
    for nb in range(1, min(len(basis), levels - 2) + 1):
        hi = solve(np.arange(levels - nb - 1, levels), nb)
        lo = solve(np.arange(levels - nb - 2, levels - 1), nb)
        e = abs(hi - lo)
        if e < err:
            best, err = hi, e
    return float(best), float(err)


def zeta(s: int, N: int = 20) -> float:
    """Riemann zeta at an integer s >= 2 by Euler-Maclaurin summation."""
    if s < 2:
        raise ValueError("zeta needs s >= 2 here")
    head = math.fsum(n ** (-float(s)) for n in range(1, N))
    tail = N ** (1.0 - s) / (s - 1) + 0.5 * N ** (-float(s))
    rising = float(s)
    power = N ** (-float(s) - 1)
    for k in range(1, 12):
        tail += float(bernoulli(2 * k)) / math.factorial(2 * k) * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= N * N
    return head + tail


def mzv_newton(k: int, d: int = 3) -> list[float]:
    """zeta(d, ..., d) with m copies, m = 0..k, from Newton's identities.

    The values are the elementary symmetric functions of 1/n^d, whose power
    sums are zeta(d m).
    """
    p = [None] + [zeta(d * m) for m in range(1, k + 1)]
    e = [1.0]
    for m in range(1, k + 1):
        acc = 0.0
        for i in range(1, m + 1):
            acc += (-1) ** (i - 1) * e[m - i] * p[i]
        e.append(acc / m)
    return e

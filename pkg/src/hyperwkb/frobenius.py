"""Local solutions at regular singular points, formal solutions at infinity,
connection coefficients and the Wasow transform.

Logarithmic solutions come from a deformation of the exponent: for a root
rho of the indicial polynomial we build ``u(mu) = x^(rho+mu) sum c_n(mu) x^(n/L)``
with ``c_0 = mu^s``, where ``s`` counts the roots sitting at positive lattice
shifts of ``rho``.  The operator then maps ``u(mu)`` to a multiple of
``mu^(s+m)``, so the Taylor slices ``mu^s .. mu^(s+m-1)`` are solutions.
Expanding ``x^mu`` gives the log branches.  Afterwards each root class is
put in a canonical form: the solution attached to ``(rho, j)`` carries
``x^rho (ln x)^j / j!`` with coefficient one, and the coefficients at the
other ``(rho', j')`` positions of its class vanish.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .opcore import (
    EulerPolynomial,
    GradedSeries,
    LogStackSolution,
    MellinOperator,
    apply,
    build_hypergeometric_operator,
    residual_norm,
    substitute_one_minus_t,
)
from .series import HyperParams

__all__ = [
    "IrregularSingularityError",
    "ResonanceError",
    "FrobeniusBasis",
    "ConnectionData",
    "WKBForm",
    "WasowTransform",
    "frobenius_at_zero",
    "frobenius_at_one",
    "cubic_s_basis",
    "formal_at_infinity",
    "solve_connection",
    "wasow_transform",
    "langer_normalize",
    "indicial_roots",
    "series_derivatives",
    "cubic_operator",
]


class ResonanceError(ValueError):
    """A WKB amplitude coefficient is not determined by the recurrence."""

    def __init__(self, message: str, order: int):
        super().__init__(message)
        self.order = order


class IrregularSingularityError(ValueError):
    """The point is an irregular singularity; use the WKB machinery instead."""


@dataclass(frozen=True)
class FrobeniusBasis:
    point: str
    solutions: tuple
    indicial_roots: tuple  # (root, multiplicity, class index)
    operator: MellinOperator
    labels: tuple = ()  # (root, log index) of each solution's leading term

    def __len__(self):
        return len(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]


@dataclass(frozen=True)
class ConnectionData:
    coefficients: tuple
    matching_point: complex
    condition_number: float
    residual: float


# ---------------------------------------------------------------------------
# truncated power series in the deformation parameter mu


def _mu_mul(a, b, n):
    out = [0] * n
    for i in range(min(len(a), n)):
        if a[i] == 0:
            continue
        for j in range(min(len(b), n - i)):
            out[i + j] = out[i + j] + a[i] * b[j]
    return out


def _mu_div(num, den, n):
    # den[0] != 0
    out = []
    for k in range(n):
        acc = num[k] if k < len(num) else 0
        for j in range(1, min(k, len(den) - 1) + 1):
            acc = acc - den[j] * out[k - j]
        out.append(acc / den[0])
    return out


# ---------------------------------------------------------------------------
# indicial data


def _normalised(op: MellinOperator) -> MellinOperator:
    k0 = min(op.offsets)
    return op.left_shift(-k0) if k0 else op


def indicial_roots(op: MellinOperator, exact: bool | None = None, tol: float = 1e-6):
    """Roots of the indicial polynomial grouped into lattice classes.

    Returns a list of classes; each class is a list of ``(root, multiplicity)``
    sorted by increasing real part, with roots written as ``base + n/L``.
    """
    op = _normalised(op)
    p0 = op.poly(0)
    coeffs = p0.coefficients
    if exact is None:
        exact = all(isinstance(c, (Fraction, int)) for c in coeffs)
    raw = np.roots([complex(c) for c in reversed(coeffs)]) if p0.degree > 0 else []
    roots = []
    for r in raw:
        for i, (c, m) in enumerate(roots):
            if abs(c - r) < tol:
                roots[i] = ((c * m + r) / (m + 1), m + 1)
                break
        else:
            roots.append((complex(r), 1))
    if exact:
        snapped = []
        for r, m in roots:
            if abs(r.imag) > 1e-9:
                raise ValueError("exact mode needs rational indicial roots")
            fr = Fraction(r.real).limit_denominator(10**6)
            if p0(fr) != 0:
                raise ValueError(f"indicial root {r} is not rational")
            snapped.append((fr, m))
        roots = snapped
    L = op.lattice_denominator
    classes: list[list] = []
    for r, m in roots:
        for cl in classes:
            d = (complex(r) - complex(cl[0][0])) * L
            if abs(d - round(d.real)) < tol:
                cl.append((r, m))
                break
        else:
            classes.append([(r, m)])
    out = []
    for cl in classes:
        base = min(cl, key=lambda rm: complex(rm[0]).real)[0]
        fixed = []
        for r, m in cl:
            n = round(((complex(r) - complex(base)) * L).real)
            fixed.append((base + Fraction(n, L) if n else base, m, n))
        fixed.sort(key=lambda x: x[2])
        out.append(fixed)
    return out


def _root_solutions(op, root, mult, higher, order, L):
    """Slices for one root; ``higher`` maps lattice shift n>0 -> multiplicity."""
    s = sum(higher.values())
    K = 2 * s + mult
    terms = [(k, p) for k, p in op.terms if k > 0]
    p0 = op.poly(0)
    c = [None] * (order + 1)
    c[0] = [0] * K
    c[0][s] = 1
    one = root * 0 + 1
    for n in range(1, order + 1):
        num = [0] * K
        for k, p in terms:
            if n - k < 0 or c[n - k] is None:
                continue
            tay = p.taylor(root + Fraction(n - k, L))
            prod = _mu_mul(tay, c[n - k], K)
            num = [a - b for a, b in zip(num, prod)]
        den = p0.taylor(root + Fraction(n, L))
        m = higher.get(n, 0)
        if m:
            num = num[m:] + [0] * m
            den = den[m:]
        if not den:
            raise ValueError("indicial polynomial vanishes identically")
        c[n] = _mu_div(num, den, K)
    sols = []
    for j in range(s, s + mult):
        stack = []
        for i in range(j + 1):
            row = tuple(c[n][j - i] * one for n in range(order + 1))
            stack.append(row)
        sols.append(LogStackSolution(tuple(stack), root, L, op.variable))
    return sols


def _canonicalise(sols, positions, L):
    """Re-combine the class solutions so that they are dual to ``positions``."""
    r = len(sols)
    M = [[_coord(sol, n, j) for (n, j) in positions] for sol in sols]
    # solve M^T-style: want B with B M = I, rows of B give combinations
    inv = _invert(M)
    out = []
    for i in range(r):
        acc = None
        for k in range(r):
            w = inv[i][k]
            if w == 0:
                continue
            term = sols[k].scale(w)
            acc = term if acc is None else _add_same_grid(acc, term)
        out.append(acc)
    return out


def _coord(sol: LogStackSolution, n: int, j: int):
    if j >= len(sol.stack) or n >= len(sol.stack[0]):
        return 0
    return sol.stack[j][n]


def _add_same_grid(a: LogStackSolution, b: LogStackSolution) -> LogStackSolution:
    nl = max(len(a.stack), len(b.stack))
    n = min(len(a.stack[0]), len(b.stack[0]))
    rows = []
    for j in range(nl):
        ra = a.stack[j] if j < len(a.stack) else (0,) * n
        rb = b.stack[j] if j < len(b.stack) else (0,) * n
        rows.append(tuple(ra[i] + rb[i] for i in range(n)))
    return LogStackSolution(tuple(rows), a.leading_exponent, a.lattice_denominator, a.variable)


def _invert(M):
    # inverse of (rows = solutions) matrix such that result rows give dual basis:
    # we need B with (B M)[i][p] = delta, i.e. B = M^{-1}
    n = len(M)
    A = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(complex(A[r][col])))
        if A[piv][col] == 0:
            raise ValueError("degenerate Frobenius data")
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    inv = [row[n:] for row in A]
    # B M = I  <=>  B = M^{-1}; combination i uses weights inv[k][i]? rows of M are
    # solutions, columns positions; target sol_i' = sum_k B[i][k] sol_k with
    # sum_k B[i][k] M[k][p] = delta_ip, so B = M^{-1}.
    return inv


def frobenius_at_zero(op: MellinOperator, order: int, exact: bool | None = None,
                      allow_irregular: bool = False, roots=None) -> FrobeniusBasis:
    """Frobenius basis of ``op`` at the origin of its variable.

    ``order`` is the number of lattice steps kept in every series.  With
    ``allow_irregular`` the routine returns the formal solutions attached to
    the indicial roots even when their number is below the operator order
    (the regular family at an irregular point).
    """
    op = _normalised(op)
    p0 = op.poly(0)
    if p0.degree < op.order and not allow_irregular:
        raise IrregularSingularityError(
            f"indicial polynomial has degree {p0.degree} < order {op.order}; "
            "the point is irregular, use the wkb module")
    classes = roots if roots is not None else indicial_roots(op, exact)
    L = op.lattice_denominator
    sols = []
    info = []
    labels = []
    for ci, cl in enumerate(classes):
        base = cl[0][0]
        class_sols = []
        positions = []
        for r, m, n in cl:
            higher = {nn - n: mm for (_, mm, nn) in cl if nn > n}
            raw = _root_solutions(op, r, m, higher, order, L)
            # re-express on the base grid of the class
            for sol in raw:
                class_sols.append(_rebase(sol, base, n, order))
            for j in range(m):
                positions.append((n, j))
                labels.append((r, j))
            info.append((r, m, ci))
        if any(j > 0 for _, j in positions) or len(cl) > 1:
            class_sols = _canonicalise(class_sols, positions, L)
        sols.extend(class_sols)
    for s in sols:
        if s.max_log_power >= max(op.order, 1):
            raise ValueError("log power exceeds the operator order")
    return FrobeniusBasis("0", tuple(sols), tuple(info), op, tuple(labels))


def _rebase(sol: LogStackSolution, base, shift: int, order: int) -> LogStackSolution:
    if shift == 0:
        return sol
    zero = sol.stack[0][0] * 0
    rows = tuple((zero,) * shift + row[: order + 1 - shift] for row in sol.stack)
    return LogStackSolution(rows, base, sol.lattice_denominator, sol.variable)


def frobenius_at_one(params: HyperParams, order: int, exact: bool | None = None) -> FrobeniusBasis:
    """Frobenius basis at t = 1 in the variable s = 1 - t (balanced case)."""
    if params.p != params.q + 1:
        raise ValueError("the expansion at t = 1 is provided for p = q + 1")
    if exact is None:
        exact = all(isinstance(x, (int, Fraction)) for x in params.upper + params.lower)
    op = build_hypergeometric_operator(params.upper, params.lower, exact=exact)
    sop = substitute_one_minus_t(op)
    basis = frobenius_at_zero(sop, order, exact)
    return FrobeniusBasis("1", basis.solutions, basis.indicial_roots, sop, basis.labels)


def cubic_operator(lam):
    eps = cmath.exp(1j * math.pi / 3)
    return build_hypergeometric_operator([-lam, eps * lam, eps.conjugate() * lam], [1, 1])


def cubic_s_basis(lam, order: int = 80) -> FrobeniusBasis:
    """Basis v1, v2, v3 at s = 0 for ((1-t) D^3 + lam^3 t) u = 0.

    Normalisation: v1 = lam^(3/2) s + ..., v2 = lam^3 s^2 + ...,
    v3 = (1/4) v2 ln(lam^3 s^2) + 1 + w with w = O(s^3).
    """
    lam = complex(lam)
    sop = substitute_one_minus_t(cubic_operator(lam))
    basis = frobenius_at_zero(sop, order, exact=False)
    by_root = {}
    for sol, (r, j) in zip(basis.solutions, basis.labels):
        by_root[round(complex(r).real)] = sol
    y0, y1, y2 = by_root[0], by_root[1], by_root[2]
    l3 = lam**3
    v1 = y1.scale(lam**1.5)
    v2 = y2.scale(l3)
    v3 = _add_same_grid(y0, y2.scale(0.25 * l3 * cmath.log(l3)))
    return FrobeniusBasis("1", (v1, v2, v3), basis.indicial_roots, sop, (("1", 0), ("2", 0), ("0", 0)))


# ---------------------------------------------------------------------------
# formal solutions at infinity


@dataclass(frozen=True)
class WKBForm:
    """``exp(c t^kappa) t^mu H(t^-kappa)`` with ``H = sum h_n t^(-n kappa)``."""

    kappa: object
    c: complex
    mu: complex
    amplitude: tuple

    def __call__(self, t, nterms: int | None = None, branch_log=None):
        t = complex(t)
        lt = cmath.log(t) if branch_log is None else branch_log
        tk = cmath.exp(float(self.kappa) * lt)
        h = self.amplitude if nterms is None else self.amplitude[:nterms]
        acc = 0j
        for c in reversed(h):
            acc = acc / tk + c
        return cmath.exp(self.c * tk + self.mu * lt) * acc


def _infinity_operator(params: HyperParams, exact=False):
    """Operator in w = 1/t: -w (Q(D_t) - t P(D_t)) with D_t = -D_w."""
    one = Fraction(1) if exact else 1
    q_neg = EulerPolynomial.from_shifts([0] + [b - one for b in params.lower], lead=one)
    p_neg = EulerPolynomial.from_shifts(list(params.upper), lead=one)
    # substitute x -> -x
    flip = lambda poly: EulerPolynomial(tuple(c * (-1) ** k for k, c in enumerate(poly.coefficients)))
    return MellinOperator(((0, flip(p_neg)), (1, -flip(q_neg))), 1, "1/t@inf")


def formal_at_infinity(params: HyperParams, order: int, exact: bool | None = None):
    """Regular formal solutions t^(-alpha_j) G_j(1/t) and the WKB family.

    Returns ``(regular, wkb)``; ``regular`` is a list of series in ``1/t``
    (log stacks when upper parameters differ by integers) and ``wkb`` a list
    of :class:`WKBForm` with ``kappa = 1/(q+1-p)``,
    ``c_k = (q+1-p) zeta^k`` and ``mu = kappa (alpha - beta - q/2 - p/2)``.
    """
    if params.p > params.q + 1:
        raise ValueError("formal solutions at infinity need p <= q + 1")
    if exact is None:
        exact = all(isinstance(x, (int, Fraction)) for x in params.upper + params.lower)
    regular = []
    if params.p:
        op = _infinity_operator(params, exact)
        basis = frobenius_at_zero(op, order, exact, allow_irregular=True)
        for sol in basis.solutions:
            regular.append(sol.branch(0) if sol.max_log_power == 0 else sol)
    wkb = []
    m = params.q + 1 - params.p
    if m > 0:
        kappa = Fraction(1, m)
        alpha = sum(complex(a) for a in params.upper)
        beta = sum(complex(b) - 1 for b in params.lower)
        mu = float(kappa) * (alpha - beta - params.q / 2 - params.p / 2)
        for k in range(1, m + 1):
            c = m * cmath.exp(2j * math.pi * k / m)
            wkb.append(WKBForm(kappa, c, mu, _wkb_amplitude(params, c, mu, m, order)))
    return regular, wkb


def _wkb_amplitude(params, c, mu, m, order):
    # conjugate D_t -> D_t + c kappa t^kappa and work in w = 1/t with lattice m:
    # D_t = -D_w, t^kappa = w^(-1/m)
    kappa = 1.0 / m
    var = "1/t@inf"
    A = MellinOperator(((0, EulerPolynomial((0, -1))), (-1, EulerPolynomial((c * kappa,)))), m, var)

    def poly_of(shifts):
        out = MellinOperator.monomial(0, 1, m, var)
        for a in shifts:
            out = out @ (A + MellinOperator.monomial(0, a, m, var))
        return out

    Qop = A @ poly_of([b - 1 for b in params.lower])
    Pop = poly_of(list(params.upper)).left_shift(-m)
    op = Qop - Pop
    # the w^-(q+1) terms cancel by the choice of c (exactly, when c kappa is
    # real), so the pivot sits one step above regardless of what survived
    k0 = -params.q
    h = [1.0 + 0j]
    g0 = -mu  # exponent of w for the leading term
    for n in range(1, order + 1):
        N = n + k0
        acc = 0j
        for k, p in op.terms:
            if k <= k0:
                continue
            idx = N - k
            if 0 <= idx < n:
                acc += p(g0 + idx / m) * h[idx]
        x = g0 + n / m
        pivot_poly = op.poly(k0)
        piv = pivot_poly(x)
        size = sum(abs(complex(c)) * abs(x) ** k for k, c in enumerate(pivot_poly.coefficients))
        if abs(piv) < 1e-12 * (1 + size):
            raise ResonanceError(f"amplitude recurrence is resonant at order {n}", n)
        h.append(-acc / piv)
    return tuple(h)


# ---------------------------------------------------------------------------
# connection problem


def solve_connection(target, basis, matching_point=0.5, log_x=None) -> ConnectionData:
    """Coefficients ``a`` with ``target = sum a_j basis_j`` near ``matching_point``.

    ``target`` is either a sequence of derivative values (0..r-1) or a
    callable ``target(x, r)`` returning them.  Value and r-1 derivatives are
    matched; the condition number of the r x r system is reported.
    """
    sols = basis.solutions if isinstance(basis, FrobeniusBasis) else tuple(basis)
    r = len(sols)
    x = matching_point
    rhs = np.asarray(target(x, r) if callable(target) else target, dtype=complex)
    if rhs.size != r:
        raise ValueError(f"need {r} derivative values, got {rhs.size}")
    M = np.array([s.derivatives(x, r, log_x) for s in sols], dtype=complex).T
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"basis is degenerate at the matching point (cond = {cond:.3g})")
    coef = np.linalg.solve(M, rhs)
    resid = float(np.max(np.abs(M @ coef - rhs)))
    return ConnectionData(tuple(complex(c) for c in coef), complex(x), cond, resid)


def series_derivatives(series: GradedSeries, x, n: int, sign: int = 1):
    """Derivatives 0..n-1 of a series at ``x``; ``sign=-1`` for d/d(1-x)."""
    out = []
    cur = series
    for k in range(n):
        out.append(cur(x) * sign**k)
        cur = cur.derivative()
    return out


# ---------------------------------------------------------------------------
# Wasow transform


@dataclass(frozen=True)
class WasowTransform:
    """Q = F F0^-1 with entries stored as arrays ``E[a][b]`` of mu^a t^b."""

    entries: tuple  # ((Q11, Q12), (Q21, Q22)), each a list of lists
    mu_order: int
    t_order: int

    def det(self):
        (a, b), (c, d) = self.entries
        return _biv_sub(_biv_mul(a, d, self.mu_order, self.t_order), _biv_mul(b, c, self.mu_order, self.t_order))

    def monomials(self, i: int, j: int):
        E = self.entries[i][j]
        return [(a, b) for a in range(self.mu_order + 1) for b in range(self.t_order + 1) if E[a][b] != 0]

    def conjugated(self):
        """P = C Q C^-1 with C = diag(1, mu), as Laurent data {(a, b): coeff}."""
        out = [[{}, {}], [{}, {}]]
        shift = {(0, 0): 0, (0, 1): -1, (1, 0): 1, (1, 1): 0}
        for i in range(2):
            for j in range(2):
                for a, b in self.monomials(i, j):
                    out[i][j][(a + shift[(i, j)], b)] = self.entries[i][j][a][b]
        return out


def _biv_zero(A, B, zero=0):
    return [[zero] * (B + 1) for _ in range(A + 1)]


def _biv_mul(x, y, A, B):
    out = _biv_zero(A, B)
    for a1 in range(A + 1):
        for b1 in range(B + 1):
            v = x[a1][b1]
            if v == 0:
                continue
            for a2 in range(A + 1 - a1):
                row = y[a2]
                for b2 in range(B + 1 - b1):
                    if row[b2] != 0:
                        out[a1 + a2][b1 + b2] += v * row[b2]
    return out


def _biv_sub(x, y):
    return [[p - q for p, q in zip(rx, ry)] for rx, ry in zip(x, y)]


def _biv_deriv_t(x):
    return [[(b + 1) * row[b + 1] for b in range(len(row) - 1)] + [0] for row in x]


def _solve_perturbed(pert, A, B, init):
    """Series solution of u'' = (t + pert(t, mu)) u with u(0), u'(0) = init."""
    u = _biv_zero(A, B + 1, Fraction(0))
    u[0][0] = Fraction(init[0])
    u[0][1] = Fraction(init[1])
    for b in range(B - 1 + 1):
        # coefficient of t^b in (t + pert) u
        for a in range(A + 1):
            acc = u[a][b - 1] if b >= 1 else Fraction(0)
            for (pa, pb), v in pert.items():
                if pa <= a and pb <= b:
                    acc += v * u[a - pa][b - pb]
            if b + 2 <= B + 1:
                u[a][b + 2] = acc / ((b + 2) * (b + 1))
    return u


def wasow_transform(psi, mu_order: int = 12, t_order: int = 20) -> WasowTransform:
    """Q(t; mu) = F F0^-1 for u'' = (t + mu psi(mu^2 t, mu^3)) u.

    ``psi`` maps ``(i, j)`` to the coefficient of ``x^i eps^j``.  Exact
    rational arithmetic is used throughout.
    """
    A, B = mu_order, t_order
    pert = {}
    for (i, j), v in dict(psi).items():
        a = 1 + 2 * i + 3 * j
        if a <= A and i <= B:
            pert[(a, i)] = pert.get((a, i), 0) + Fraction(v)
    v1 = _solve_perturbed(pert, A, B, (1, 0))
    v2 = _solve_perturbed(pert, A, B, (0, 1))
    w1 = _solve_perturbed({}, A, B, (1, 0))
    w2 = _solve_perturbed({}, A, B, (0, 1))
    cut = lambda x: [row[: B + 1] for row in x]
    d = lambda x: cut(_biv_deriv_t(x))
    F = ((cut(v1), cut(v2)), (d(v1), d(v2)))
    # F0^-1 = adj(F0) because det F0 = 1
    inv0 = ((d(w2), _neg(cut(w2))), (_neg(d(w1)), cut(w1)))
    Q = tuple(
        tuple(
            _biv_add(_biv_mul(F[i][0], inv0[0][j], A, B), _biv_mul(F[i][1], inv0[1][j], A, B))
            for j in range(2)
        )
        for i in range(2)
    )
    return WasowTransform(Q, A, B)


def _neg(x):
    return [[-v for v in row] for row in x]


def _biv_add(x, y):
    return [[p + q for p, q in zip(rx, ry)] for rx, ry in zip(x, y)]


# ---------------------------------------------------------------------------
# Langer-type normalisation


def langer_normalize(phi, order: int):
    """Change of variable z(x) with (dx/dz)^2 x phi(x) = z and b = (dz/dx)^(-1/2).

    ``phi`` is a coefficient sequence with phi[0] = 1.  Returns ``(z, b)``
    as series in x.  The closed form is
    ``z = ((3/2) int_0^x sqrt(s phi(s)) ds)^(2/3)``.
    """
    coeffs = list(phi)[: order + 1]
    coeffs += [coeffs[0] * 0] * (order + 1 - len(coeffs))
    if coeffs[0] != 1:
        raise ValueError("phi must start with 1")
    exact = all(isinstance(c, (int, Fraction)) for c in coeffs)
    half = Fraction(1, 2) if exact else 0.5
    root = GradedSeries(tuple(Fraction(c) if exact else complex(c) for c in coeffs), 0, 1, "x@0").power(half)
    three_half = Fraction(3, 2) if exact else 1.5
    g = [three_half * c / (three_half + k) for k, c in enumerate(root.coefficients)]
    G = GradedSeries(tuple(g), 0, 1, "x@0")
    z = G.power(Fraction(2, 3) if exact else 2 / 3).shift(1)
    dz = z.derivative()
    b = dz.power(Fraction(-1, 2) if exact else -0.5)
    return z, b

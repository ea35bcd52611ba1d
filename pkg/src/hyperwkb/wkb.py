"""WKB expansions: formal solutions at an irregular infinity, large-parameter
actions and amplitudes, and the Stokes constants of the Kummer function.

Branch labels.  For the confluent family the branch ``l`` carries
``c_l = (q+1-p) zeta^l`` with ``zeta = exp(2 pi i kappa)``.  Powers such as
``(zeta^l)^x`` are taken as ``exp(2 pi i l kappa x)`` for the integer ``l``
itself, so the representative of ``l`` modulo ``q+1`` matters; on a ray
``arg t`` the representative is chosen with ``2 pi l kappa + kappa arg t`` in
``(-pi, pi]``, which is the saddle point reached by continuation from the
positive axis.  For the large-parameter family the branch ``l`` is the root
``R = D zeta^l t^kappa + ...`` near ``t = 0``, with ``D = (prod nu_j)^kappa``
(principal power).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .frobenius import ResonanceError, WKBForm, _wkb_amplitude
from .series import HyperParams
from .special import gamma, restricted_quadform_det

__all__ = [
    "WKBForm",
    "LargeParamWKB",
    "KummerStokes",
    "HJActions",
    "ResonanceError",
    "TurningPointError",
    "NoDominantBranchError",
    "confluent_wkb",
    "wkb_residual",
    "thm3_constants",
    "thm3_asymptotic_eval",
    "hj_actions",
    "transport_amplitude",
    "thm4_eval",
    "kummer_stokes",
]

DOMINANCE_MARGIN = 5.0
_TIE = 1e-8


class TurningPointError(ArithmeticError):
    """Two branches of the Hamilton-Jacobi equation collide on the path."""


class NoDominantBranchError(ValueError):
    """No branch (or tied group of branches) dominates by the required margin."""


# ---------------------------------------------------------------------------
# formal solutions at infinity


def _exponent_data(params: HyperParams):
    m = params.q + 1 - params.p
    kappa = Fraction(1, m)
    alpha = sum(complex(a) for a in params.upper)
    beta = sum(complex(b) - 1 for b in params.lower)
    mu = float(kappa) * (alpha - beta - params.q / 2 - params.p / 2)
    return m, kappa, mu


def confluent_wkb(params: HyperParams, k: int, order: int) -> WKBForm:
    """Formal solution ``exp(c_k t^kappa) t^mu H_k(t^-kappa)`` with ``H_k = 1 + ...``.

    The amplitude has ``order + 1`` coefficients.  Raises
    :class:`ResonanceError` when a coefficient is not determined.
    """
    if params.p >= params.q + 1:
        raise ValueError("WKB solutions at infinity need p < q + 1")
    m, kappa, mu = _exponent_data(params)
    c = m * cmath.exp(2j * math.pi * k / m)
    return WKBForm(kappa, c, mu, _wkb_amplitude(params, c, mu, m, order))


def wkb_residual(params: HyperParams, form: WKBForm) -> dict:
    """Coefficients of ``(Q(D) - t P(D)) u`` for the truncated form ``u``.

    The result maps ``j`` to the coefficient of ``exp(c t^kappa) t^(mu - j kappa)``.
    This works directly in ``t``: ``D`` sends ``exp(c t^kappa) t^e`` to
    ``exp(c t^kappa) (c kappa t^(e + kappa) + e t^e)``.
    """
    m = round(1 / form.kappa)
    kappa = 1.0 / m
    c, mu = form.c, form.mu

    def shift_d(series, a):
        # (D + a) on {j: coeff}, exponent mu - j kappa
        out = {}
        for j, g in series.items():
            out[j] = out.get(j, 0) + g * (mu - j * kappa + a)
            out[j - 1] = out.get(j - 1, 0) + g * c * kappa
        return out

    u = {j: complex(h) for j, h in enumerate(form.amplitude)}
    qu = shift_d(u, 0)
    for b in params.lower:
        qu = shift_d(qu, complex(b) - 1)
    pu = u
    for a in params.upper:
        pu = shift_d(pu, complex(a))
    res = dict(qu)
    for j, g in pu.items():
        # multiplication by t = t^(m kappa)
        res[j - m] = res.get(j - m, 0) - g
    return res


def _thm3_representative(l: int, q: int, arg_t: float) -> int:
    kappa = 1.0 / (q + 1)
    for cand in range(l - 2 * (q + 1), l + 2 * (q + 1) + 1):
        if (cand - l) % (q + 1):
            continue
        ang = 2 * math.pi * cand * kappa + kappa * arg_t
        if -math.pi < ang <= math.pi + 1e-12:
            return cand
    raise AssertionError("no representative found")


def _thm3_constant(betas, l: int) -> complex:
    q = len(betas)
    beta = sum(complex(b) - 1 for b in betas)
    g = 1.0
    for b in betas:
        g *= gamma(b)
    phase = cmath.exp(2j * math.pi * l / (q + 1) * (-q / 2 - beta))
    return (q + 1) ** -0.5 * g * (2 * math.pi) ** (-q / 2) * phase


def thm3_constants(betas, q: int | None = None) -> list:
    """``K_l`` for ``l = 0..q`` (``l = 0`` is the branch dominant on ``t > 0``).

    ``K_l = (q+1)^(-1/2) prod Gamma(beta_j) (2 pi)^(-q/2) (zeta^l)^(-q/2-beta)``.
    """
    betas = list(betas)
    if q is None:
        q = len(betas)
    if q != len(betas):
        raise ValueError("complete confluence needs exactly q lower parameters")
    return [_thm3_constant(betas, l) for l in range(q + 1)]


def _dominant(levels, margin=DOMINANCE_MARGIN):
    levels = np.asarray(levels, dtype=float)
    top = float(np.max(levels))
    tied = [i for i, v in enumerate(levels) if abs(v - top) <= _TIE * (1 + abs(top))]
    rest = [v for i, v in enumerate(levels) if i not in tied]
    if rest and top - max(rest) <= margin:
        raise NoDominantBranchError(
            f"leading branch exceeds the next by {top - max(rest):.3g} < {margin} in log scale"
        )
    return tied


def thm3_asymptotic_eval(params: HyperParams, t, n_amp_terms: int = 1) -> complex:
    """Sum of ``K_l v_l(t)`` over the dominant branches of ``0Fq`` at large ``t``.

    Branches whose growth ``Re(c_l t^kappa)`` ties with the maximum (an
    oscillatory pair, e.g. on the negative axis for ``0F1``) are all kept;
    any other branch must be smaller by more than five units of log scale.
    """
    if params.p:
        raise ValueError("the constants K_l are for complete confluence (p = 0)")
    if n_amp_terms < 1:
        raise ValueError("need at least the leading amplitude term")
    q = params.q
    t = complex(t)
    if t == 0:
        raise ValueError("asymptotics need t away from 0")
    arg_t = cmath.phase(t)
    kappa = 1.0 / (q + 1)
    tk_abs = abs(t) ** kappa
    reps = [_thm3_representative(l, q, arg_t) for l in range(q + 1)]
    exps = [
        (q + 1) * tk_abs * cmath.exp(1j * (2 * math.pi * l * kappa + kappa * arg_t)) for l in reps
    ]
    keep = _dominant([e.real for e in exps])
    total = 0j
    for i in keep:
        form = confluent_wkb(params, reps[i], n_amp_terms - 1)
        total += _thm3_constant(params.lower, reps[i]) * form(t)
    return total


# ---------------------------------------------------------------------------
# Hamilton-Jacobi branches


def _p_coeffs(nus):
    return np.poly(-np.asarray(nus, dtype=complex))


def _hj_roots(pc, s):
    """Roots of ``R^(q+1) - s p(R)`` polished by Newton."""
    c = -s * pc
    c[0] += 1
    if abs(c[0]) < 1e-14:
        raise TurningPointError("a branch escapes to infinity at s = 1")
    r = np.roots(c)
    dc = np.polyder(c)
    for _ in range(2):
        d = np.polyval(dc, r)
        ok = d != 0
        r[ok] = r[ok] - np.polyval(c, r[ok]) / d[ok]
    return r


def _min_gap(r):
    if r.size < 2:
        return np.inf
    d = np.abs(r[:, None] - r[None, :])
    d[np.diag_indices(r.size)] = np.inf
    return float(d.min())


def _match(prev, new):
    cost = np.abs(prev[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(prev)
    out[rows] = new[cols]
    return out, float(cost[rows, cols].max())


class _Tracker:
    def __init__(self, nus, tol=1e-9):
        self.nus = np.asarray(nus, dtype=complex)
        if np.any(self.nus == 0):
            raise ValueError("all nu_j must be nonzero")
        self.q = self.nus.size - 1
        self.kappa = 1.0 / (self.q + 1)
        self.pc = _p_coeffs(self.nus)
        self.D = cmath.exp(self.kappa * cmath.log(complex(np.prod(self.nus))))
        self.tol = tol

    def initial(self, s):
        """Roots at small ``s`` ordered by the branch label ``l``."""
        zeta = cmath.exp(2j * math.pi * self.kappa)
        sk = cmath.exp(self.kappa * cmath.log(s))
        pred = np.array([self.D * zeta**l * sk for l in range(self.q + 1)])
        roots = _hj_roots(self.pc, s)
        out, disp = _match(pred, roots)
        if disp > 0.25 * _min_gap(roots):
            raise TurningPointError("start point too far from 0 for branch labelling")
        return out

    def step(self, s_a, r_a, s_b, depth=0):
        r_b = _hj_roots(self.pc, s_b)
        gap = _min_gap(r_b)
        scale = 1 + float(np.max(np.abs(r_b)))
        if gap < 10 * self.tol * scale:
            raise TurningPointError(f"branches collide near s = {s_b:.6g}")
        out, disp = _match(r_a, r_b)
        if disp > 0.25 * min(gap, _min_gap(r_a)):
            if depth > 40:
                raise TurningPointError(f"cannot separate branches near s = {s_b:.6g}")
            mid = 0.5 * (s_a + s_b)
            r_mid = self.step(s_a, r_a, mid, depth + 1)
            return self.step(mid, r_mid, s_b, depth + 1)
        return out

    def along(self, points, start):
        rows = [start]
        for a, b in zip(points[:-1], points[1:]):
            rows.append(self.step(a, rows[-1], b))
        return np.array(rows)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _segment_integral(tracker, funcs, seg, r_start, panels):
    """Integrals of ``f(R, s) ds / s`` over one segment for each f and branch.

    ``seg = (a, b)``; ``a = 0`` uses ``s = b w^(q+1)``.
    Returns (values with shape (len(funcs), q+1), R at the segment end).
    """
    a, b = seg
    edges = np.linspace(0.0, 1.0, panels + 1)
    x = ((edges[:-1, None] + edges[1:, None]) + np.outer(edges[1:] - edges[:-1], _GL_X)) / 2
    w = np.outer((edges[1:] - edges[:-1]) / 2, _GL_W)
    x, w = x.ravel(), w.ravel()
    q1 = tracker.q + 1
    if a == 0:
        s = b * x**q1
        jac = q1 / x  # ds / s = (q+1) dw / w
        rows = [tracker.initial(s[0])]
        for s0, s1 in zip(s[:-1], s[1:]):
            rows.append(tracker.step(s0, rows[-1], s1))
        r_end = tracker.step(s[-1], rows[-1], b)
    else:
        s = a + (b - a) * x
        jac = (b - a) / s
        pts = np.concatenate(([a], s, [b]))
        track = tracker.along(pts, r_start)
        rows, r_end = track[1:-1], track[-1]
    R = np.array(rows)
    vals = np.array([(f(R, s[:, None]) * (w * jac)[:, None]).sum(axis=0) for f in funcs])
    return vals, r_end


def _path_integrals(tracker, funcs, path, tol=1e-12, max_panels=1024):
    """Cumulative integrals along ``path`` (starting at 0) and R at each node."""
    n = len(path)
    acc = np.zeros((len(funcs), tracker.q + 1), dtype=complex)
    out = np.zeros((n, len(funcs), tracker.q + 1), dtype=complex)
    R = np.zeros((n, tracker.q + 1), dtype=complex)
    for i in range(1, n):
        seg = (path[i - 1], path[i])
        panels = 4
        prev, r_end = _segment_integral(tracker, funcs, seg, R[i - 1], panels)
        while True:
            panels *= 2
            cur, r_end = _segment_integral(tracker, funcs, seg, R[i - 1], panels)
            if np.max(np.abs(cur - prev)) <= tol * (1 + np.max(np.abs(cur))):
                break
            if panels >= max_panels:
                raise ArithmeticError("path quadrature did not converge")
            prev = cur
        acc = acc + cur
        out[i] = acc
        R[i] = r_end
    return out, R


def _as_path(t_path):
    pts = np.atleast_1d(np.asarray(t_path, dtype=complex))
    if pts[0] != 0:
        pts = np.concatenate(([0], pts))
    return pts


@dataclass(frozen=True)
class HJActions:
    """Per-branch roots ``R[i, l]`` and actions ``S[i, l]`` at the path nodes."""

    t: np.ndarray
    R: np.ndarray
    S: np.ndarray


def hj_actions(nus, q: int | None = None, t_path=None) -> HJActions:
    """Solve ``(DS)^(q+1) = t p(DS)`` with ``S(0) = 0`` along a path from 0.

    ``t_path`` is a point or a sequence of points joined by straight
    segments (0 is prepended when missing).  ``R`` is tracked continuously
    and ``S = int_0^t R(s) ds / s``.
    """
    tracker = _Tracker(nus)
    if q is not None and q != tracker.q:
        raise ValueError("need q + 1 values nu_j")
    path = _as_path(t_path)
    vals, R = _path_integrals(tracker, [lambda R, s: R], path)
    return HJActions(path, R, vals[:, 0, :])


def _transport_rate(nus, beta):
    """``T(R) + kappa (q/2 + beta)`` where ``D psi_0 = T psi_0``."""
    nus = np.asarray(nus, dtype=complex)
    q = nus.size - 1
    pc = _p_coeffs(nus)
    d1, d2 = np.polyder(pc), np.polyder(pc, 2)

    def f(R, s):
        p = np.polyval(pc, R)
        X = (q + 1) - R * np.polyval(d1, R) / p
        T = -(0.5 * q * (q + 1) - 0.5 * R**2 * np.polyval(d2, R) / p) / X**2 - beta / X
        return T + (q / 2 + beta) / (q + 1)

    return f


def transport_amplitude(nus, betas, l: int, t_path):
    """Leading amplitude ``psi_0`` of branch ``l`` at the path nodes.

    Solves the transport equation as ``psi_0 = exp int T``, normalised so that
    ``psi_0 ~ (D zeta^l t^kappa)^(-q/2-beta)`` as ``t -> 0`` (principal
    ``t^kappa``).
    """
    tracker = _Tracker(nus)
    q = tracker.q
    if len(betas) != q:
        raise ValueError("need q lower parameters")
    if not 0 <= l <= q:
        raise ValueError("branch label must be in 0..q")
    beta = sum(complex(b) - 1 for b in betas)
    kappa = tracker.kappa
    path = _as_path(t_path)
    vals, _ = _path_integrals(tracker, [_transport_rate(nus, beta)], path)
    out = np.zeros(len(path), dtype=complex)
    lead = cmath.log(tracker.D) + 2j * math.pi * l * kappa
    for i, t in enumerate(path):
        if t == 0:
            out[i] = np.nan
            continue
        log_r = lead + kappa * cmath.log(t)
        out[i] = cmath.exp(-(q / 2 + beta) * log_r + vals[i, 0, l])
    return out


# ---------------------------------------------------------------------------
# large-parameter stationary phase


@dataclass(frozen=True)
class LargeParamWKB:
    """Critical data of the phase ``-sum nu_j ln(1 - eta a_j)`` on ``prod a_j = 1``."""

    nu: tuple
    betas: tuple

    @property
    def q(self) -> int:
        return len(self.nu) - 1

    @property
    def kappa(self) -> float:
        return 1.0 / (self.q + 1)

    @property
    def E(self) -> complex:
        g = 1.0
        for b in self.betas:
            g *= gamma(b)
        return g * (2 * math.pi) ** (-self.q / 2)

    def p(self, x):
        return np.polyval(_p_coeffs(self.nu), x)

    def rho_branches(self, eta) -> np.ndarray:
        """Roots of ``rho^(q+1) = eta^(q+1) p(rho)`` tracked from ``eta = 0``."""
        eta = complex(eta)
        _, R = self._track(eta ** (self.q + 1))
        return R[-1]

    def rho_residual(self, rho, eta) -> float:
        return float(np.max(np.abs(rho ** (self.q + 1) - eta ** (self.q + 1) * self.p(rho))))

    def _track(self, t, nodes: int = 256):
        tracker = _Tracker(self.nu)
        s = t * (np.arange(1, nodes + 1) / nodes) ** (self.q + 1)
        start = tracker.initial(s[0])
        R = tracker.along(s, start)
        return s, R

    def phi(self, t) -> np.ndarray:
        """Critical values ``sum nu_j ln(1 + rho/nu_j)`` at ``eta = t^kappa``.

        Logarithms are continued along the straight path from 0.
        """
        _, R = self._track(complex(t))
        nus = np.asarray(self.nu, dtype=complex)
        z = 1 + R[:, :, None] / nus[None, None, :]
        ang = np.unwrap(np.angle(z), axis=0)
        logs = np.log(np.abs(z)) + 1j * ang
        return (logs[-1] * nus[None, :]).sum(axis=1)

    def det(self, rho) -> np.ndarray:
        """``rho^(q+1) p(rho)/p(0) ((q+1)/rho - p'(rho)/p(rho))``."""
        rho = np.asarray(rho, dtype=complex)
        pc = _p_coeffs(self.nu)
        p, dp = np.polyval(pc, rho), np.polyval(np.polyder(pc), rho)
        return rho ** (self.q + 1) * p / pc[-1] * ((self.q + 1) / rho - dp / p)

    def det_direct(self, rho) -> np.ndarray:
        """``e_q`` of ``lambda_j = rho (1 + rho/nu_j)``."""
        return np.array([restricted_quadform_det([r * (1 + r / v) for v in self.nu]) for r in np.atleast_1d(rho)])

    def _drho_deta(self, rho, eta):
        pc = _p_coeffs(self.nu)
        p, dp = np.polyval(pc, rho), np.polyval(np.polyder(pc), rho)
        return (self.q + 1) / eta / ((self.q + 1) / rho - dp / p)

    def xi(self, rho, eta, form: str = "derived") -> np.ndarray:
        """Rate ``xi`` in ``phi(eta) = phi(t^kappa) - xi sum(1 - tau_i) + ...``.

        ``derived`` is ``kappa eta dphi/deta`` with
        ``dphi/deta = rho' sum nu_j/(nu_j + rho)``; it equals ``rho``.
        ``printed`` is the alternative ``eta rho'/(1 + rho)``, kept so the
        discrepancy can be demonstrated.
        """
        rho = np.asarray(rho, dtype=complex)
        d = self._drho_deta(rho, eta)
        if form == "printed":
            return eta * d / (1 + rho)
        if form != "derived":
            raise ValueError("form must be 'derived' or 'printed'")
        nus = np.asarray(self.nu, dtype=complex)
        dphi = d * (nus[None, :] / (nus[None, :] + rho[:, None])).sum(axis=1)
        return self.kappa * eta * dphi


def thm4_eval(nus, betas, A, t, xi_form: str = "derived") -> complex:
    """Leading large-``A`` value of ``F(A nu; beta; t)`` from the dominant branches.

    ``sum_l E_l A^(-q/2-beta) exp(A phi_l) Det_l^(-1/2) xi_l^(-beta)`` with
    ``E_l = prod Gamma(beta_i) (2 pi)^(-q/2)``; principal square root and power.
    """
    w = LargeParamWKB(tuple(complex(v) for v in nus), tuple(betas))
    q = w.q
    if len(betas) != q:
        raise ValueError("need q lower parameters for q + 1 values nu_j")
    t = complex(t)
    if not (t.imag == 0 and 0 < t.real < 1):
        raise ValueError("t must lie in (0, 1)")
    if A <= 0:
        raise ValueError("A must be positive")
    beta = sum(complex(b) - 1 for b in betas)
    eta = t**w.kappa
    phi = w.phi(t)
    rho = w.rho_branches(eta)
    det = w.det(rho)
    xi = w.xi(rho, eta, xi_form)
    keep = _dominant([(A * v).real for v in phi])
    total = 0j
    for l in keep:
        total += (
            w.E
            * A ** (-q / 2 - beta)
            * cmath.exp(A * phi[l])
            * det[l] ** -0.5
            * xi[l] ** (-beta)
        )
    return total


# ---------------------------------------------------------------------------
# Kummer function


@dataclass(frozen=True)
class KummerStokes:
    """Constants of the Kummer function on the Stokes lines of ``1F1(alpha; beta; t)``.

    ``zeta = exp(2 pi i alpha)``, ``nuconst = exp(-2 pi i beta)``; fractional
    powers of ``zeta`` and ``nuconst`` are taken through these angles.
    """

    alpha: complex
    beta: complex
    A: complex
    B: complex
    C: complex
    D: complex
    c: complex
    d: complex
    zeta: complex
    nuconst: complex

    def zeta_pow(self, x):
        return cmath.exp(2j * math.pi * self.alpha * x)

    def nu_pow(self, x):
        return cmath.exp(-2j * math.pi * self.beta * x)

    def stokes_invariant_gap(self) -> float:
        return abs(self.c * self.d - (self.zeta - 1) * (1 - self.nuconst * self.zeta))

    def upper_line(self, s, zeta_exponent: float = 0.25) -> complex:
        """Leading terms of ``F(alpha; beta; i s)`` for large ``s > 0``.

        ``Gamma(beta)/Gamma(beta-alpha) zeta^(1/4) s^-alpha
        + Gamma(beta)/Gamma(alpha) (nu zeta)^(1/4) s^(alpha-beta) e^(i s)``.
        The recessive-term factor is ``zeta^(+1/4)`` because
        ``(-i s)^-alpha = e^(i pi alpha / 2) s^-alpha``; ``zeta_exponent``
        selects another exponent for comparison.
        """
        a, b = self.alpha, self.beta
        g = gamma(b)
        first = g / gamma(b - a) * self.zeta_pow(zeta_exponent) * s ** (-a)
        second = g / gamma(a) * self.zeta_pow(0.25) * self.nu_pow(0.25) * s ** (a - b) * cmath.exp(1j * s)
        return first + second


def kummer_stokes(alpha, beta) -> KummerStokes:
    """Closed-form constants ``A, B, C, D`` and Stokes multipliers ``c, d``."""
    alpha, beta = complex(alpha), complex(beta)
    for z, name in ((alpha, "alpha"), (beta - alpha, "beta - alpha"), (beta, "beta")):
        if z.imag == 0 and z.real <= 0 and z.real == int(z.real):
            raise ValueError(f"{name} must not be a nonpositive integer")
    zeta = cmath.exp(2j * math.pi * alpha)
    nu = cmath.exp(-2j * math.pi * beta)
    zh = cmath.exp(1j * math.pi * alpha)  # zeta^(1/2)
    g_b, g_a, g_ba = gamma(beta), gamma(alpha), gamma(beta - alpha)
    A = g_b / g_ba / zh
    B = g_b / g_a
    C = g_b / g_ba / zh
    D = gamma(2 - beta) / gamma(alpha - beta + 1)
    c = g_ba / g_a * (1 - nu * zeta) / zh / nu
    d = g_a / g_ba * (zeta - 1) * zh * nu
    out = KummerStokes(alpha, beta, A, B, C, D, c, d, zeta, nu)
    if out.stokes_invariant_gap() > 1e-10 * (1 + abs(c * d)):
        raise ArithmeticError("Stokes multipliers violate cd = (zeta - 1)(1 - nu zeta)")
    return out

"""Numerical evaluation of integral representations of hypergeometric series.

Residues are computed as normalised cycle integrals with the trapezoid
rule on circles (spectrally accurate for integrands analytic on an
annulus).  Endpoint-singular weights ``tau^a (1-tau)^b`` are integrated
with Gauss-Jacobi nodes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import roots_jacobi

from .series import ConvergenceError, HyperParams, pfq_eval
from .special import gamma

__all__ = [
    "ContourSpec",
    "contour_residue",
    "torus_constant_term",
    "jacobi_integral",
    "euler_gauss_integral",
    "euler_step_integral",
    "kummer_integral",
    "thm1_residue_formula",
    "thm2_confluent_formula",
    "bessel_j_integral",
    "v_integral_reps",
]

RESIDUE_TOL = 1e-11
MAX_SAMPLES = 2**14


@dataclass(frozen=True)
class ContourSpec:
    """Circle ``|b| = radius`` sampled at ``samples`` equispaced points."""

    radius: float = 1.0
    samples: int = 64

    def __post_init__(self):
        m = self.samples
        if m < 64 or m & (m - 1):
            raise ValueError("samples must be a power of two >= 64")
        if not self.radius > 0:
            raise ValueError("radius must be positive")


def _circle_mean(f, r, m):
    b = r * np.exp(2j * np.pi * np.arange(m) / m)
    return complex(np.mean(np.asarray(f(b), dtype=complex) * b))


def contour_residue(f, spec: ContourSpec = ContourSpec(), tol: float = RESIDUE_TOL) -> complex:
    """``(1/2 pi i) * integral of f(b) db`` over ``|b| = r``.

    ``f`` must accept numpy arrays.  The sample count is doubled until two
    consecutive values agree to ``tol`` (relative to max(1, |value|)).
    """
    m = spec.samples
    prev = _circle_mean(f, spec.radius, m)
    while m < MAX_SAMPLES:
        m *= 2
        cur = _circle_mean(f, spec.radius, m)
        change = abs(cur - prev)
        if change <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError(f"residue did not converge with {MAX_SAMPLES} samples (last change {change:.3g})")


def torus_constant_term(f, q: int, samples: int = 64, radii=None) -> complex:
    """Constant Laurent term of ``f(b_1, ..., b_q)``, i.e. the normalised
    integral of ``f d^q ln b`` over a product of circles."""
    radii = [1.0] * q if radii is None else list(radii)
    theta = 2 * np.pi * np.arange(samples) / samples
    grids = np.meshgrid(*[r * np.exp(1j * theta) for r in radii], indexing="ij")
    return complex(np.mean(f(*grids)))


def jacobi_integral(g, a: float, b: float, n: int) -> complex:
    """``int_0^1 tau^a (1-tau)^b g(tau) dtau`` with an n-point Gauss-Jacobi rule."""
    x, w = roots_jacobi(n, b, a)
    tau = (1 + x) / 2
    return complex(np.dot(w, np.asarray(g(tau), dtype=complex))) / 2 ** (a + b + 1)


def _adaptive_jacobi(g, a, b, tol=1e-12, n0=16, nmax=256):
    # scipy nodes lose accuracy beyond a few hundred points, so the cap stays low
    n = n0
    prev = jacobi_integral(g, a, b, n)
    while n < nmax:
        n *= 2
        cur = jacobi_integral(g, a, b, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError(f"Gauss-Jacobi rule did not converge with {nmax} nodes")


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


def _check_t(t):
    t = complex(t)
    _require(not (t.imag == 0 and t.real >= 1), "t must lie off the cut [1, inf)")
    return t


def euler_gauss_integral(a1, a2, beta, t) -> complex:
    """``2F1(a1, a2; beta; t)`` from the Euler integral over [0, 1]."""
    _require(complex(a2).real > 0 and complex(beta - a2).real > 0,
             "need Re a2 > 0 and Re(beta - a2) > 0")
    _require(all(complex(x).imag == 0 for x in (a1, a2, beta)), "real parameters only")
    t = _check_t(t)
    a1, a2, beta = float(a1), float(a2), float(beta)
    pref = gamma(beta) / (gamma(a2) * gamma(beta - a2))
    return pref * _adaptive_jacobi(lambda tau: (1 - tau * t) ** (-a1), a2 - 1, beta - a2 - 1)


def _step(upper, lower, z, n):
    """Vectorised ``F(upper; lower; z)`` for balanced parameters by nested Euler steps."""
    if not lower:
        return (1 - z) ** (-upper[0])
    a, b = upper[-1], lower[-1]
    pref = gamma(b) / (gamma(a) * gamma(b - a))
    x, w = roots_jacobi(n, b - a - 1, a - 1)
    tau = (1 + x) / 2
    inner = _step(upper[:-1], lower[:-1], np.multiply.outer(z, tau), n)
    return pref * (inner @ w) / 2 ** (b - 1)


def euler_step_integral(params: HyperParams, t, nodes: int = 64) -> complex:
    """Balanced ``q+1Fq`` (q <= 2) by repeated Euler integrals; the innermost
    factor is the binomial ``(1 - z)^(-a_1)``."""
    _require(params.p == params.q + 1, "balanced parameters (p = q + 1) required")
    _require(params.q <= 2, "q <= 2 supported")
    up = [float(complex(a).real) for a in params.upper]
    low = [float(complex(b).real) for b in params.lower]
    _require(all(complex(x).imag == 0 for x in params.upper + params.lower), "real parameters only")
    for k in range(params.q):
        _require(up[k + 1] > 0 and low[k] - up[k + 1] > 0,
                 f"need a_{k + 2} > 0 and b_{k + 1} - a_{k + 2} > 0")
    t = _check_t(t)
    prev = None
    n = nodes
    while True:
        cur = complex(_step(up, low, np.asarray(t), n))
        if prev is not None and abs(cur - prev) <= 1e-12 * max(1.0, abs(cur)):
            return cur
        if n >= 512:
            if prev is not None and abs(cur - prev) <= 1e-9 * max(1.0, abs(cur)):
                return cur
            raise ConvergenceError("nested Euler quadrature did not converge")
        prev, n = cur, n * 2


def kummer_integral(alpha, beta, t) -> complex:
    """``1F1(alpha; beta; t)`` from the Laplace-type integral over [0, 1]."""
    _require(complex(alpha).real > 0 and complex(beta - alpha).real > 0,
             "need Re alpha > 0 and Re(beta - alpha) > 0")
    _require(all(complex(x).imag == 0 for x in (alpha, beta)), "real parameters only")
    alpha, beta, t = float(alpha), float(beta), complex(t)
    pref = gamma(beta) / (gamma(alpha) * gamma(beta - alpha))
    return pref * _adaptive_jacobi(lambda tau: np.exp(t * tau), alpha - 1, beta - alpha - 1)


def _torus_coords(q, bs):
    """a_1 = b_1^q, a_2 = b_2^(q-1)/b_1, ..., a_(q+1) = 1/(b_1...b_q)."""
    a = []
    denom = 1
    for k in range(q):
        a.append(bs[k] ** (q - k) / denom)
        denom = denom * bs[k]
    a.append(1 / denom)
    return a


def _tau_nodes(betas, n):
    rules = []
    for b in betas:
        x, w = roots_jacobi(n, b - 2, 0.0)
        rules.append(((1 + x) / 2, w / 2 ** (b - 1)))
    return rules


def thm1_residue_formula(params: HyperParams, t, radius: float = 1.0, rebalance=None,
                         tau_nodes: int | None = None, torus_samples: int = 64) -> complex:
    """Balanced ``q+1Fq`` (q in {1, 2}) as a tau-cube integral of a torus residue.

    Integrand: ``prod (1 - tau_i)^(beta_i - 2) * CT_b prod_j (1 - a_j eta_j)^(-alpha_j)``
    with ``eta_j = (tau_1...tau_q)^(1/(q+1)) nu_j t^(mu_j)``; the default
    ``rebalance`` is ``mu_j = 1/(q+1)``, ``nu_j = 1``.  Constant ``prod(beta_i - 1)``.
    For q = 1 ``radius`` is relative to the centre of the residue annulus.
    """
    q = params.q
    _require(params.p == q + 1, "balanced parameters (p = q + 1) required")
    _require(q in (1, 2), "q must be 1 or 2")
    betas = [float(complex(b).real) for b in params.lower]
    _require(all(b > 1 for b in betas), "need Re beta_j > 1 (loop regularisation is not implemented)")
    t = complex(t)
    _require(abs(t) < 1, "need |t| < 1 so that the residue annulus is nonempty")
    if rebalance is None:
        mus, nus = [1 / (q + 1)] * (q + 1), [1.0] * (q + 1)
    else:
        mus, nus = (list(x) for x in rebalance)
        _require(len(mus) == q + 1 and len(nus) == q + 1, "need q + 1 exponents and scales")
        _require(min(mus) >= 0 and abs(sum(mus) - 1) < 1e-12 and abs(np.prod(nus) - 1) < 1e-12,
                 "rebalancing needs mu_j >= 0, sum mu_j = 1 and prod nu_j = 1")
    scales = [nu * t**mu if mu else nu for mu, nu in zip(mus, nus)]
    alphas = list(params.upper)
    C = math.prod(b - 1 for b in betas)

    def integrand(eta_base):
        def f(*bs):
            a = _torus_coords(q, bs)
            out = 1
            for aj, sj, al in zip(a, scales, alphas):
                out = out * (1 - aj * eta_base * sj) ** (-al)
            return out
        return f

    if q == 1:
        # the annulus is |s_2| eta < |b| < 1/(|s_1| eta); centre on its geometric mean
        r = radius * math.sqrt(abs(scales[1] / scales[0])) if t else radius

        def g(taus):
            vals = []
            for tau in taus:
                eta = tau ** 0.5
                f = integrand(eta)
                vals.append(contour_residue(lambda b: f(b) / b, ContourSpec(r)))
            return np.array(vals)
        return C * _adaptive_jacobi(g, 0.0, betas[0] - 2, tol=1e-12, n0=24, nmax=192)

    n = tau_nodes or 24
    rules = _tau_nodes(betas, n)
    total = 0j
    for (t1, w1), (t2, w2) in product(zip(*rules[0]), zip(*rules[1])):
        eta = (t1 * t2) ** (1 / 3)
        total += w1 * w2 * torus_constant_term(integrand(eta), 2, torus_samples, [radius, radius])
    return C * total


def thm2_confluent_formula(params: HyperParams, t, constant=None, tau_nodes: int = 24,
                           torus_samples: int = 64) -> complex:
    """Confluent ``pFq`` (p in {0, 1}, q in {1, 2}) as a tau-cube integral of
    ``CT_b prod_(j<=p) (1 - a_j eta)^(-alpha_j) exp(eta t^kappa sum_(k>p) a_k)``.

    ``constant`` overrides the prefactor (default ``prod(beta_i - 1)``).
    """
    p, q = params.p, params.q
    _require(p < q + 1 and p in (0, 1) and q in (1, 2), "need p in {0, 1}, q in {1, 2}")
    betas = [float(complex(b).real) for b in params.lower]
    _require(all(b > 1 for b in betas), "need Re beta_j > 1")
    t = complex(t)
    kappa = 1 / (q + 1 - p)
    tk = t**kappa if t != 0 else 0
    C = math.prod(b - 1 for b in betas) if constant is None else constant
    alphas = list(params.upper)
    rules = _tau_nodes(betas, tau_nodes)

    def f_for(eta):
        def f(*bs):
            a = _torus_coords(q, bs)
            out = np.exp(eta * tk * sum(a[p:]))
            for aj, al in zip(a[:p], alphas):
                out = out * (1 - aj * eta) ** (-al)
            return out
        return f

    # eta -> 1 at the cube corner; a_1 = b_1^q then stays away from the
    # binomial branch point only on a smaller b_1 circle (the exponential
    # factors are entire, so any radius is admissible for them)
    r1 = 0.5 if p else 1.0
    total = 0j
    for nodes in product(*[list(zip(*r)) for r in rules]):
        w = math.prod(nw for _, nw in nodes)
        eta = math.prod(nt for nt, _ in nodes) ** (1 / (q + 1))
        if q == 1:
            f = f_for(eta)
            total += w * contour_residue(lambda b: f(b) / b, ContourSpec(r1))
        else:
            total += w * torus_constant_term(f_for(eta), q, torus_samples, [r1] + [1.0] * (q - 1))
    return C * total


def bessel_j_integral(nu: float, z: float, weight_exponent=None) -> complex:
    """``J_nu(z) = (z/2)^nu / Gamma(nu) int_0^1 (1-tau)^e Res e^((z/2) sqrt(tau)(b - 1/b)) dln b``
    with ``e = nu - 1`` unless ``weight_exponent`` overrides it."""
    _require(nu > 0, "need nu > 0")
    e = nu - 1 if weight_exponent is None else weight_exponent

    def g(taus):
        out = []
        for tau in taus:
            c = z / 2 * math.sqrt(tau)
            out.append(contour_residue(lambda b: np.exp(c * (b - 1 / b)) / b))
        return np.array(out)

    return (z / 2) ** nu / gamma(nu) * _adaptive_jacobi(g, 0.0, e, tol=1e-12, n0=16, nmax=256)


def v_integral_reps(z: float):
    """``(V1, V2)`` of ``(8 D(D - 1/2)(D - 1) - z) V = 0`` from residue formulas.

    ``V1 = sqrt z + (sqrt z / 2) int_0^1 (1-tau)^(-1/2) Res sinh(c b) exp(c tau/(2 b^2)) db/b^4``
    and ``V2 = 2 c Res cosh(c b) exp(c/(2 b^2)) db/b^3`` with ``c = z^(1/3)``.
    """
    _require(z > 0, "need z > 0")
    c = z ** (1 / 3)
    v2 = 2 * c * contour_residue(lambda b: np.cosh(c * b) * np.exp(c / (2 * b * b)) / b**3)

    def g(taus):
        return np.array([
            contour_residue(lambda b: np.sinh(c * b) * np.exp(c * tau / (2 * b * b)) / b**4) for tau in taus
        ])

    v1 = math.sqrt(z) * (1 + 0.5 * _adaptive_jacobi(g, 0.0, -0.5, tol=1e-12, n0=16, nmax=256))
    return v1, v2

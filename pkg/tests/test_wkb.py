import cmath
import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from hyperwkb.series import HyperParams
from hyperwkb.special import brute_force_restricted_det
from hyperwkb.wkb import (
    LargeParamWKB,
    NoDominantBranchError,
    ResonanceError,
    TurningPointError,
    confluent_wkb,
    hj_actions,
    kummer_stokes,
    thm3_asymptotic_eval,
    thm3_constants,
    thm4_eval,
    transport_amplitude,
    wkb_residual,
)

EPS = cmath.exp(1j * math.pi / 3)
CUBIC_NUS = [-1, EPS, EPS.conjugate()]


def action_s0(t):
    return float(mpmath.betainc(mpmath.mpf(1) / 3, mpmath.mpf(2) / 3, 0, t))


def hyp(up, low, t):
    return complex(mpmath.hyper(up, low, t))


# ---------------------------------------------------------------------------
# formal solutions at infinity


def test_bessel_exponents():
    p = HyperParams((), (1,))
    forms = [confluent_wkb(p, k, 3) for k in (1, 2)]
    assert forms[0].kappa == 0.5
    assert sorted(round(f.c.real) for f in forms) == [-2, 2]
    assert all(abs(f.mu + 0.25) < 1e-15 for f in forms)
    # I_0 law: 1 + 1/(16 sqrt t) + 9/(512 t) + ...
    grow = forms[1]
    assert abs(grow.amplitude[1] - 1 / 16) < 1e-14
    assert abs(grow.amplitude[2] - 9 / 512) < 1e-14


def test_kummer_branch_exponent():
    a, b = 0.3, 1.7
    f = confluent_wkb(HyperParams((a,), (b,)), 1, 4)
    assert f.kappa == 1 and abs(f.c - 1) < 1e-15
    assert abs(f.mu - (a - b)) < 1e-15


def test_v2_kernel_exponents():
    # 0F2(;2,3/2;z/8) times z: exp((3/2) z^(1/3)) z^(1/6)
    f = confluent_wkb(HyperParams((), (2, 1.5)), 3, 2)
    assert f.kappa == Fraction(1, 3)
    assert abs(f.mu + 5 / 6) < 1e-15
    z = 5.0
    assert abs(f.c * (z / 8) ** (1 / 3) - 1.5 * z ** (1 / 3)) < 1e-14
    assert abs((1 + f.mu) - 1 / 6) < 1e-15



@pytest.mark.parametrize(
    "up,low",
    [((), (1,)), ((), (1.3, 2.2)), ((0.4,), (1.7,)), ((0.25,), (1.5, 2.5)), ((), (1.1, 1.6, 2.4))],
)
def test_amplitude_residual(up, low):
    p = HyperParams(up, low)
    m = p.q + 1 - p.p
    n = 12
    for k in range(1, m + 1):
        form = confluent_wkb(p, k, n)
        res = wkb_residual(p, form)
        scale = max(abs(h) for h in form.amplitude)
        # everything above the truncation order cancels
        for j, g in res.items():
            if j < n - m + 1:
                assert abs(g) <= 1e-12 * scale * (1 + j * j), (k, j, g)
        assert max(abs(g) for j, g in res.items() if j >= n - m + 1) > 0


def test_infinity_asymptotics_constants():
    assert abs(thm3_constants([1])[0] - 1 / (2 * math.sqrt(math.pi))) < 1e-15
    assert abs(thm3_constants([1, 1])[0] - 1 / (2 * math.pi * math.sqrt(3))) < 1e-15
    nu = 0.7
    ratio = thm3_constants([nu + 1])[0] / thm3_constants([1])[0]
    assert abs(ratio - math.gamma(nu + 1)) < 1e-13


def test_infinity_asymptotics_bessel_law_and_rate():
    p = HyperParams((), (1,))
    errs = []
    for t in (400, 1600):
        exact = hyp([], [1], t)
        errs.append(abs(thm3_asymptotic_eval(p, t) / exact - 1))
    assert errs[0] <= 0.02
    # relative error is O(t^-1/2): it halves when t quadruples
    assert abs(errs[1] / errs[0] - 0.5) <= 0.3 * 0.5


def test_infinity_asymptotics_more_terms_help():
    p = HyperParams((), (1,))
    exact = hyp([], [1], 400)
    e1 = abs(thm3_asymptotic_eval(p, 400, 1) / exact - 1)
    e3 = abs(thm3_asymptotic_eval(p, 400, 3) / exact - 1)
    assert e3 < e1 / 50


def test_infinity_asymptotics_0f2():
    p = HyperParams((), (1, 1))
    t = 1000
    exact = hyp([], [1, 1], t)
    lead = math.exp(3 * t ** (1 / 3)) * t ** (-1 / 3) / (2 * math.pi * math.sqrt(3))
    assert abs(thm3_asymptotic_eval(p, t) - lead) < 1e-12 * lead
    assert abs(lead / exact - 1) <= 0.02


def test_infinity_asymptotics_negative_axis_oscillates():
    p = HyperParams((), (1,))
    for x in (900.0, 1600.0):
        approx = thm3_asymptotic_eval(p, -x, 3)
        exact = float(mpmath.besselj(0, 2 * math.sqrt(x)))
        envelope = 1 / (math.sqrt(math.pi) * x**0.25)
        assert abs(approx.imag) < 1e-3 * envelope
        assert abs(approx - exact) < 1e-3 * envelope


def test_infinity_asymptotics_anti_stokes_refused():
    # on arg t = pi/2 the two growth rates differ by only 2 sqrt(2) at |t| = 1
    with pytest.raises(NoDominantBranchError):
        thm3_asymptotic_eval(HyperParams((), (1,)), 1j)


# ---------------------------------------------------------------------------
# Hamilton-Jacobi actions and transport


def test_hj_zero():
    h = hj_actions([1, -1], 1, [0.0, 0.2])
    assert np.all(h.S[0] == 0) and np.all(h.R[0] == 0)


def test_hj_example29():
    t = 0.5
    h = hj_actions(CUBIC_NUS, 2, t)
    s0 = action_s0(t)
    for sigma in (-1, EPS, EPS.conjugate()):
        assert np.min(np.abs(h.S[-1] / s0 - sigma)) < 1e-10


def test_hj_delta2_case():
    # R^2 = t (R^2 - 1): R = +-i sqrt(t/(1-t)), S = +-2i arcsin(sqrt t)
    t = 0.3
    h = hj_actions([1, -1], 1, t)
    target = 2j * math.asin(math.sqrt(t))
    assert sorted(h.S[-1].imag) == pytest.approx(sorted([target.imag, -target.imag]), abs=1e-11)
    small = hj_actions([1, -1], 1, 1e-6)
    d_zeta = np.array([1j, -1j])  # D = (-1)^(1/2) = i, zeta = -1
    assert np.max(np.abs(small.S[-1] - 2 * d_zeta * 1e-3)) < 1e-8


def test_hj_multi_segment_path():
    direct = hj_actions(CUBIC_NUS, 2, 0.5)
    bent = hj_actions(CUBIC_NUS, 2, [0.2 + 0.15j, 0.5])
    assert np.max(np.abs(direct.S[-1] - bent.S[-1])) < 1e-10


def test_hj_turning_point():
    # nu = (1, -3): the discriminant of (1 - t) R^2 + 2 t R + 3 t vanishes at t = 3/4
    with pytest.raises(TurningPointError):
        hj_actions([1, -3], 1, 0.9)
    hj_actions([1, -3], 1, 0.7)


def test_transport_example29():
    pts = [0.1, 0.3, 0.5]
    h = hj_actions(CUBIC_NUS, 2, pts)
    for l in range(3):
        psi = transport_amplitude(CUBIC_NUS, [1, 1], l, pts)
        assert np.max(np.abs(psi[1:] * h.R[1:, l] - 1)) < 1e-10
        # ((1 - t)/t)^(1/3) up to a constant
        shape = np.array([((1 - t) / t) ** (1 / 3) for t in pts])
        ratio = psi[1:] / shape
        assert np.max(np.abs(ratio - ratio[0])) < 1e-10


def test_transport_delta2():
    pts = [0.1, 0.4, 0.7]
    psi = transport_amplitude([1, -1], [1], 0, pts)
    ratio = psi[1:] / np.array([((1 - t) / t) ** 0.25 for t in pts])
    assert np.max(np.abs(ratio - ratio[0])) < 1e-10


def test_transport_small_t_exponent():
    nus = [0.7, 1.3, -0.4]
    t1, t2 = 1e-8, 1e-7
    psi = transport_amplitude(nus, [1, 1], 0, [t1, t2])
    slope = math.log(abs(psi[2] / psi[1])) / math.log(t2 / t1)
    assert abs(slope + 2 / 6) < 1e-3


def test_transport_matches_stationary_phase_amplitude():
    # Det^-1/2 xi^-beta solves the same transport equation, so the ratio is constant
    nus, betas = [0.6, 1.4, 0.9], [1.8, 2.3]
    beta = sum(b - 1 for b in betas)
    w = LargeParamWKB(tuple(nus), tuple(betas))
    pts = [0.05, 0.2, 0.45]
    psi = transport_amplitude(nus, betas, 0, pts)
    amp = []
    for t in pts:
        eta = t ** (1 / 3)
        rho = w.rho_branches(eta)
        amp.append(w.det(rho)[0] ** -0.5 * w.xi(rho, eta)[0] ** -beta)
    ratio = np.array(amp) / psi[1:]
    assert np.max(np.abs(ratio - ratio[0])) < 1e-9
    assert abs(abs(ratio[0]) - 3 ** -0.5) < 1e-9


# ---------------------------------------------------------------------------
# stationary phase data and the large-parameter asymptotics


def test_rho_residual_and_det_routes():
    rng = random.Random(7)
    for _ in range(20):
        q = rng.randint(1, 4)
        nus = tuple(complex(rng.uniform(0.3, 2.0), rng.uniform(-0.5, 0.5)) for _ in range(q + 1))
        w = LargeParamWKB(nus, tuple([1.5] * q))
        eta = rng.uniform(0.1, 0.6)
        rho = w.rho_branches(eta)
        assert w.rho_residual(rho, eta) < 1e-10
        closed = w.det(rho)
        direct = w.det_direct(rho)
        assert np.max(np.abs(closed - direct)) <= 1e-10 * (1 + np.max(np.abs(direct)))
        brute = [brute_force_restricted_det([r * (1 + r / v) for v in nus]) for r in rho]
        assert np.max(np.abs(closed - brute)) <= 1e-10 * (1 + np.max(np.abs(direct)))


def test_xi_equals_rho():
    w = LargeParamWKB((0.6, 1.4, 0.9), (1.8, 2.3))
    eta = 0.4
    rho = w.rho_branches(eta)
    assert np.max(np.abs(w.xi(rho, eta) - rho)) < 1e-12


@pytest.mark.parametrize("nus", [[1, -1], CUBIC_NUS, [0.6, 1.4, 0.9]])
def test_phi_equals_action(nus):
    q = len(nus) - 1
    w = LargeParamWKB(tuple(nus), tuple([1] * q))
    for t in (0.2, 0.5):
        h = hj_actions(nus, q, t)
        assert np.max(np.abs(w.phi(t) - h.S[-1])) <= 1e-9


def test_large_param_delta2_rate():
    errs = []
    for A in (8, 16):
        exact = hyp([A, -A], [1], 0.5)
        errs.append(abs(thm4_eval([1, -1], [1], A, 0.5) / exact - 1))
    assert errs[0] < 0.05
    assert 0.3 <= errs[1] / errs[0] <= 0.7


def test_large_param_with_beta():
    errs = []
    for A in (8, 16, 32):
        exact = hyp([A, -A], [2.5], 0.5)
        errs.append(abs(thm4_eval([1, -1], [2.5], A, 0.5) / exact - 1))
    assert errs[2] < errs[1] < errs[0] < 0.05


def test_large_param_printed_xi_rejected():
    A = 16
    exact = hyp([A, -A], [2.5], 0.5)
    assert abs(thm4_eval([1, -1], [2.5], A, 0.5, xi_form="printed") / exact - 1) > 0.5


def test_large_param_cubic_dominant_pair():
    t = 0.5
    s0 = action_s0(t)
    errs = []
    for A in (8, 16):
        value = thm4_eval(CUBIC_NUS, [1, 1], A, t)
        # dominant pair: conj(eps) e^(eps A S) + eps e^(conj(eps) A S)
        e = EPS
        disp = ((1 - t) / t) ** (1 / 3) / (2 * math.pi * math.sqrt(3) * A)
        disp *= e.conjugate() * cmath.exp(e * A * s0) + e * cmath.exp(e.conjugate() * A * s0)
        assert abs(value - disp) < 1e-9 * abs(disp)
        exact = hyp([-A, e * A, e.conjugate() * A], [1, 1], t)
        errs.append(abs(value / exact - 1))
    assert errs[1] < errs[0] < 0.1


def test_large_param_domain():
    with pytest.raises(ValueError):
        thm4_eval([1, -1], [1], 8, 1.5)
    with pytest.raises(ValueError):
        thm4_eval([1, -1], [1, 1], 8, 0.5)


# ---------------------------------------------------------------------------
# Kummer Stokes constants


def test_kummer_stokes_invariant():
    k = kummer_stokes(0.3, 1.7)
    assert k.stokes_invariant_gap() <= 1e-12
    rng = random.Random(3)
    for _ in range(10):
        a, b = rng.uniform(0.1, 2), rng.uniform(0.1, 3)
        assert kummer_stokes(a, b).stokes_invariant_gap() <= 1e-12 * (1 + abs(kummer_stokes(a, b).c))


def test_kummer_symmetric_case():
    k = kummer_stokes(0.6, 1.2)
    assert abs(abs(k.A) - abs(k.B)) < 1e-14
    assert k.A == k.C


def test_kummer_poles():
    with pytest.raises(ValueError):
        kummer_stokes(-1, 1.5)
    with pytest.raises(ValueError):
        kummer_stokes(2.5, 2.5)  # beta - alpha = 0


def test_kummer_upper_line():
    k = kummer_stokes(0.3, 1.7)
    errs = []
    for s in (30, 60, 120):
        exact = complex(mpmath.hyp1f1(0.3, 1.7, 1j * s))
        errs.append(abs(k.upper_line(s) / exact - 1))
    assert errs[0] <= 0.05
    assert errs[0] > errs[1] > errs[2]


def test_kummer_upper_line_printed_phase_rejected():
    k = kummer_stokes(0.3, 1.7)
    exact = complex(mpmath.hyp1f1(0.3, 1.7, 30j))
    assert abs(k.upper_line(30, zeta_exponent=-0.25) / exact - 1) > 0.5


def test_resonance_reported():
    # with the exponent shifted by one step the pivot vanishes at order 1
    from hyperwkb.frobenius import _wkb_amplitude

    with pytest.raises(ResonanceError) as err:
        _wkb_amplitude(HyperParams((0.4,), (1.7,)), 1, 0.4 - 1.7 + 1, 1, 3)
    assert err.value.order == 1

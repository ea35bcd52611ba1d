import cmath
import math
import random
from fractions import Fraction as F

import mpmath
import pytest

from hyperwkb.frobenius import cubic_s_basis, series_derivatives, solve_connection
from hyperwkb.mzvgen import (
    EPS,
    delta2,
    delta3,
    delta3_printed_gamma,
    genfun_value,
    identity_522,
    lambda_ode_witness,
    lemma53_check,
    cubic_rows_at_one,
    omega,
    phi2_asymptotic,
    coefficient_elimination,
    sector_jump,
    u1_at_one,
    wronskian_samples,
)
from hyperwkb.series import HyperParams, multi_polylog, mzv, mzv_newton, pfq_series, zeta

GRID = [0.0, 0.3, -0.55, 0.8, 0.5j, 0.4 + 0.6j, 0.8 * cmath.exp(0.7j)]


# ---------------------------------------------------------------------------
# Delta_2 and Delta_3


def test_delta2_values():
    assert delta2(0) == 1
    assert delta2(0.5).real == pytest.approx(2 / math.pi, abs=1e-15)
    assert abs(delta2(0.3, "series") - delta2(0.3, "closed")) <= 1e-10


@pytest.mark.parametrize("lam", GRID)
def test_delta2_routes(lam):
    c = delta2(lam, "closed")
    assert abs(delta2(lam, "series") - c) <= 1e-9
    assert abs(delta2(lam, "product") - c) <= 1e-9


@pytest.mark.parametrize("lam", GRID)
def test_delta3_routes(lam):
    g = delta3(lam, "gamma")
    assert abs(delta3(lam, "series") - g) <= 1e-9
    assert abs(delta3(lam, "product") - g) <= 1e-9


def test_delta3_against_mpmath_product():
    for lam in (0.5, 0.9, 1.7):
        oracle = mpmath.nprod(lambda n: 1 - mpmath.mpf(lam) ** 3 / n**3, [1, mpmath.inf])
        assert abs(delta3(lam) - complex(oracle)) <= 1e-10


def test_delta3_printed_gamma_is_reflected():
    for lam in (0.5, 0.3 + 0.2j):
        assert abs(delta3_printed_gamma(lam) - delta3(-lam)) <= 1e-12
    assert abs(delta3_printed_gamma(0.5) - delta3(0.5)) > 0.1


def test_delta3_zeros_and_leading_coefficient():
    for n in (1, 2, 3):
        assert abs(delta3(n)) == 0
    h = 1e-2
    c3 = (delta3(h, "series") - 1) / h**3
    assert c3.real == pytest.approx(-1.2020569, abs=1e-5)
    assert mzv_newton(1, 3)[1] == pytest.approx(-(-1.2020569031595942), abs=1e-12)


def test_series_extracted_coefficients():
    e2 = mzv_newton(2, 2)
    e3 = mzv_newton(2, 3)
    assert e2[2] == pytest.approx(math.pi**4 / 120, abs=1e-9)
    assert e3[2] == pytest.approx((zeta(3) ** 2 - zeta(6)) / 2, abs=1e-9)
    assert mzv((2, 2)) == pytest.approx(e2[2], abs=1e-9)
    assert mzv((3, 3)) == pytest.approx(e3[2], abs=1e-9)


def test_series_route_domain():
    with pytest.raises(ValueError):
        delta2(1.5, "series")
    with pytest.raises(ValueError):
        delta3(0.2, "bogus")


def test_genfun_value():
    v = genfun_value(3, 0.5)
    assert v.difference <= 1e-9 and v.route == "series"


# ---------------------------------------------------------------------------
# u1 at t = 1


@pytest.mark.parametrize("lam", [0.3, 0.55, 0.2 + 0.3j])
def test_u1_routes(lam):
    psi = u1_at_one(lam, "psi")
    assert abs(u1_at_one(lam, "polylog") - psi) <= 1e-9
    assert abs(u1_at_one(lam, "mzv") - psi) <= 1e-9


def test_u1_small_lam_and_lam2_coefficient():
    for lam in (1e-3, 1e-4):
        assert abs(u1_at_one(lam) - 2 * math.log(lam)) < 10 * lam
    lam = 1e-2
    c2 = (u1_at_one(lam) - 2 * math.log(lam)) / lam**2
    expect = -2 * zeta(2) * math.log(lam) + 2 * zeta(3)
    assert c2.real == pytest.approx(expect, abs=1e-2)


def test_u1_against_mu_derivative():
    # d/dmu of Gamma(1+2mu)/(Gamma(1+lam+mu) Gamma(1-lam+mu)) at mu = 0 plus u0 ln lam^2
    lam = mpmath.mpf("0.37")
    f = lambda mu: mpmath.gamma(1 + 2 * mu) / (mpmath.gamma(1 + lam + mu) * mpmath.gamma(1 - lam + mu))
    val = mpmath.diff(f, 0) + f(0) * mpmath.log(lam**2)
    assert abs(u1_at_one(float(lam)) - complex(val)) <= 1e-12


def test_u1_zero_rejected():
    with pytest.raises(ValueError):
        u1_at_one(0)
    with pytest.raises(ValueError):
        u1_at_one(1.5, "polylog")


# ---------------------------------------------------------------------------
# the cubic chain


def test_cubic_chain_k1():
    rep = lemma53_check(1, 0.5)
    assert rep["max_deviation"] <= 1e-8


def test_cubic_chain_k0_and_small_t():
    rep = lemma53_check(0, 0.3)
    assert rep["max_deviation"] == 0
    rep = lemma53_check(1, 1e-6, order=10)
    assert abs(rep["recurrence"][0]) < 2e-6
    assert rep["max_deviation"] <= 1e-12


def test_cubic_chain_k2_corrected_u2():
    rep = lemma53_check(2, 0.6)
    assert rep["max_deviation"] <= 1e-8
    assert rep["deviation"]["u2_printed"] > 1e-2


def test_cubic_chain_first_row_is_li3():
    rep = lemma53_check(2, 0.4)
    assert rep["recurrence"][0].real == pytest.approx(multi_polylog((3, 3), 0.4), abs=1e-12)


def test_cubic_rows_at_one():
    rep = cubic_rows_at_one(0.4)
    assert max(rep["deviation_zeta"]) <= 1e-10
    # the uncorrected u0 and u1 rows hold; the u2 row does not
    assert rep["deviation_printed"][0] <= 1e-10
    assert rep["deviation_printed"][1] <= 1e-10
    assert rep["deviation_printed"][2] > 1e-2
    assert rep["mzv"][0] == pytest.approx(delta3(0.4).real, abs=1e-10)


def test_cubic_u1_row_psi_form():
    # d/dmu of Gamma(1+mu)^3 / (Gamma(1+mu-lam) Gamma(1+mu+eps lam) Gamma(1+mu+conj(eps) lam))
    lam = 0.4
    rep = cubic_rows_at_one(lam)
    from hyperwkb.special import digamma

    a = 3 * digamma(1) - digamma(1 - lam) - digamma(1 + EPS * lam) - digamma(1 + EPS.conjugate() * lam)
    val = delta3(lam) * (3 * math.log(lam) + a)
    assert abs(val - rep["mzv"][1]) <= 1e-10


# ---------------------------------------------------------------------------
# product identity and the expansion argument


@pytest.mark.parametrize("lam", [0.6 + 0.2j, -0.3 + 0.9j, 1.3 - 0.4j, 2.2 + 0.1j, 0.25j])
def test_identity_522(lam):
    rep = identity_522(lam)
    assert rep["diff"] <= 1e-10 * max(1, abs(rep["lhs"]))
    assert rep["combo_rel"] <= 1e-12


def test_identity_522_zero_and_large():
    rep = identity_522(0)
    assert abs(rep["lhs"] - 1) <= 1e-12 and rep["rhs"] == 1
    for lam in (6.25, 9.5, 12.75):
        rep = identity_522(lam)
        assert rep["combo_rel"] <= 1e-10
        assert rep["diff"] <= 1e-10 * abs(rep["lhs"])


def test_coefficient_elimination_is_infeasible():
    rng = random.Random(7)
    for _ in range(50):
        a, b, c, alpha = (F(rng.choice([-1, 1]) * rng.randint(1, 30), rng.randint(1, 30)) for _ in range(4))
        rep = coefficient_elimination(a, b, c, alpha)
        assert not rep["consistent"]
        assert rep["gamma_from_cb"] == -rep["gamma_from_ca"]
        assert rep["det"] == -2 * a * b * c != 0
    with pytest.raises(ValueError):
        coefficient_elimination(0, 1, 1, 1)


# ---------------------------------------------------------------------------
# large lam


def test_omega_is_digamma_remainder():
    from hyperwkb.special import digamma

    # off the negative axis far enough that the pi cot(pi z) remainder is below 1e-12
    for z in (10.0, 20 + 5j, -15 + 8j):
        exact = digamma(1 + z) - cmath.log(z) - 1 / (2 * z)
        assert abs(omega(z, 6) - exact) < 1e-12


def test_phi2_upper():
    errs = []
    for lam in (6.3, 12.3, 24.3):
        ex = u1_at_one(lam)
        errs.append(abs(phi2_asymptotic(lam) - ex) / abs(ex))
    assert errs[0] <= 1e-2
    assert errs[0] > errs[1] > errs[2]


def test_phi2_lower():
    errs = []
    for r in (6.3, 12.0, 24.0):
        lam = r * cmath.exp(1.2j * math.pi)
        ex = u1_at_one(lam)
        errs.append(abs(phi2_asymptotic(lam, "lower") - ex) / abs(ex))
    assert errs[0] <= 1e-2
    assert errs[0] > errs[1] > errs[2]


def test_phi2_lower_sign_of_i_pi():
    # with +i pi the lower-sector formula is off by 2 pi i Delta_2 * 2
    lam = 12 * cmath.exp(1.2j * math.pi)
    ex = u1_at_one(lam)
    flipped = phi2_asymptotic(lam, "lower") + 4j * math.pi * delta2(lam)
    assert abs(flipped - ex) / abs(ex) > 0.5


def test_sector_jump():
    for lam in (12.3, 20.7):
        diff, predicted = sector_jump(lam)
        assert abs(diff - predicted) <= 1e-6 * abs(predicted)
        assert abs(predicted - 2 * cmath.exp(-1j * math.pi * lam) / lam) < 1e-12


def test_phi2_sector_errors():
    with pytest.raises(ValueError):
        phi2_asymptotic(-7.0)
    with pytest.raises(ValueError):
        phi2_asymptotic(7 + 1j, "lower")
    with pytest.raises(ValueError):
        phi2_asymptotic(1.0)


# ---------------------------------------------------------------------------
# the lam-equation


def test_lambda_ode_witness():
    u = lambda l: 2 * delta2(l) + 3 * u1_at_one(l)
    assert lambda_ode_witness(u, 0.4)["ratio"] <= 1e-5
    assert lambda_ode_witness(lambda l: cmath.exp(l), 0.4)["ratio"] >= 1e-2


def test_wronskian_table():
    rows = wronskian_samples([0.8, 0.9, 0.95, 1.05, 1.1, 1.2])
    for lam, a_fd, a_closed in rows:
        assert a_fd == pytest.approx(a_closed, rel=1e-7)
    # the double zero of Phi1^2 cancels the double pole of Theta: A stays positive across 1
    assert all(r[2] > 0 for r in rows)


def test_connection_coefficient_is_delta3():
    for lam in (0.4, 0.7, 1.1):
        basis = cubic_s_basis(lam, 120)
        ser = pfq_series(HyperParams((-lam, EPS * lam, EPS.conjugate() * lam), (1, 1)), 200)
        cd = solve_connection(series_derivatives(ser, 0.5, 3, sign=-1), basis, 0.5)
        assert abs(cd.coefficients[2] - delta3(lam)) <= 1e-6

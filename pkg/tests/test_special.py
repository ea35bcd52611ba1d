import cmath
import math
import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperwkb.special import (
    EULER_GAMMA,
    bernoulli,
    brute_force_restricted_det,
    complete_symmetric,
    digamma,
    elementary_symmetric,
    gamma,
    restricted_quadform_det,
)
from hyperwkb.series import zeta


def test_gamma_values():
    assert gamma(5) == pytest.approx(24, rel=1e-13)
    assert gamma(0.5) == pytest.approx(1.7724539, abs=5e-8)
    lam = 0.3
    assert gamma(1 + lam) * gamma(1 - lam) == pytest.approx(math.pi * lam / math.sin(math.pi * lam), rel=1e-13)


def test_gamma_pole():
    with pytest.raises(ValueError):
        gamma(-3)
    with pytest.raises(ValueError):
        gamma(0)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
@settings(max_examples=200, deadline=None)
def test_gamma_relative_error(z):
    if abs(z - round(z.real)) < 1e-3 and round(z.real) <= 0:
        return
    ref = complex(mpmath.gamma(z))
    if ref == 0 or not cmath.isfinite(ref) or abs(ref) < 1e-290:
        return
    assert abs(gamma(z) / ref - 1) <= 1e-12


def test_digamma_values():
    assert digamma(1) == pytest.approx(-0.5772157, abs=5e-8)
    assert digamma(2) == pytest.approx(0.4227843, abs=5e-8)
    z = 0.1
    taylor = -EULER_GAMMA + sum((-1) ** (k + 1) * zeta(k + 1) * z**k for k in range(1, 30))
    assert digamma(1 + z) == pytest.approx(taylor, abs=1e-13)


@given(st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False))
@settings(max_examples=200, deadline=None)
def test_digamma_absolute_error(z):
    if abs(z - round(z.real)) < 1e-2 and round(z.real) <= 0:
        return
    assert abs(digamma(z) - complex(mpmath.digamma(z))) <= 1e-11


def test_bernoulli():
    assert bernoulli(2) == F(1, 6)
    assert bernoulli(4) == F(-1, 30)
    assert bernoulli(6) == F(1, 42)
    assert bernoulli(40) == F(-261082718496449122051, 13530)
    with pytest.raises(ValueError):
        bernoulli(42)


@given(st.floats(-3.7, 3.7).filter(lambda x: abs(x - round(x)) > 1e-3))
@settings(max_examples=100, deadline=None)
def test_reflection_uses_cot(z):
    # psi(1+z) - psi(1-z) + pi cot(pi z) - 1/z == 0
    val = digamma(1 + z) - digamma(1 - z) + math.pi / math.tan(math.pi * z) - 1 / z
    assert abs(val) < 1e-10 * max(1.0, abs(1 / z))


def test_reflection_tan_is_wrong():
    gaps = []
    for z in (0.2, 0.3, 0.45, 0.7):
        tan_version = 1 / z - math.pi * math.atan(math.pi * z)
        gaps.append(abs(digamma(1 + z) - digamma(1 - z) - tan_version))
    assert max(gaps) > 0.5


def test_restricted_det_examples():
    assert restricted_quadform_det([1, 1]) == 2
    assert restricted_quadform_det([1, 1, 1]) == 3
    assert restricted_quadform_det([1, 2, 3]) == 11
    assert brute_force_restricted_det([1, 1]) == pytest.approx(2)
    assert brute_force_restricted_det([1, 1, 1]) == pytest.approx(3)
    assert brute_force_restricted_det([1, 2, 3]) == pytest.approx(11)


def test_restricted_det_random():
    rng = random.Random(11)
    for _ in range(200):
        q = rng.randint(1, 7)
        lams = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(q + 1)]
        scale = max(1.0, max(abs(x) for x in lams) ** q)
        assert abs(restricted_quadform_det(lams) - brute_force_restricted_det(lams)) <= 1e-10 * scale


@given(st.lists(st.integers(-6, 6), min_size=3, max_size=8), st.data())
@settings(max_examples=100, deadline=None)
def test_symmetric_product_identities(lams, data):
    lams = [F(x) for x in lams]
    k = data.draw(st.integers(1, len(lams) - 2))
    lj = F(data.draw(st.integers(-6, 6)))
    first = lams[:k]
    e = lambda xs, m: elementary_symmetric(xs)[m] if 0 <= m <= len(xs) else F(0)
    prod = math.prod(first)
    lhs = e(first + [lj], k) * e(lams[: k + 1], k) - prod**2
    rhs = e(first, k - 1) * e(lams[: k + 1] + [lj], k + 1)
    assert lhs == rhs
    assert e(lams[: k + 1], k) - prod == lams[k] * e(first, k - 1)


def test_two_variable_generating():
    rng = random.Random(5)
    for _ in range(10):
        x = cmath.rect(rng.uniform(0.1, 0.9), rng.uniform(0, 6.28))
        y = cmath.rect(rng.uniform(0.1, 0.9), rng.uniform(0, 6.28))
        target = (x * cmath.exp(x) - y * cmath.exp(y)) / (x - y)
        errs = []
        for P in (4, 8, 16):
            s = sum(complete_symmetric([x, y], p) / math.factorial(p) for p in range(P + 1))
            errs.append(abs(s - target))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-12

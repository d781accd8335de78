import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclattice.errors import DomainError
from fraclattice.specfun import gamma_ratio
from fraclattice.kernels1d import (abs_gamma_neg, c_minus_s, c_s, kernel_bound_constant,
                                   kernel_kminus, kernel_kminus_oracle, kernel_ks,
                                   kernel_ks_oracle, kernel_table, sigma_s, sigma_s_partial)


def test_half_order_values():
    assert math.isclose(kernel_ks(0.5, 1), 4 / (3 * math.pi), rel_tol=1e-14)
    assert math.isclose(sigma_s(0.5), 4 / math.pi, rel_tol=1e-14)


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("m", [1, 2, 17, 1000])
def test_ks_matches_mpmath(s, m):
    cs = mpmath.mpf(4) ** s * mpmath.gamma(0.5 + s) / (mpmath.sqrt(mpmath.pi) * abs(mpmath.gamma(-s)))
    exact = float(cs * mpmath.gamma(m - s) / mpmath.gamma(m + 1 + s))
    assert math.isclose(kernel_ks(s, m), exact, rel_tol=1e-13)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.45])
@pytest.mark.parametrize("m", [0, 1, 9, 400])
def test_kminus_matches_mpmath(s, m):
    cm = mpmath.mpf(4) ** -s * mpmath.gamma(0.5 - s) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(s))
    exact = float(cm * mpmath.gamma(m + s) / mpmath.gamma(m + 1 - s))
    assert math.isclose(kernel_kminus(s, m), exact, rel_tol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(1, 10_000))
def test_ks_ratio_recurrence(s, m):
    # K_s(m+1) / K_s(m) = (m - s) / (m + 1 + s)
    r = kernel_ks(s, m + 1) / kernel_ks(s, m)
    assert math.isclose(r, (m - s) / (m + 1 + s), rel_tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(1, 5000))
def test_ks_even_positive_and_bounded(s, m):
    k = kernel_ks(s, m)
    assert k == kernel_ks(s, -m) and k > 0
    assert k <= kernel_bound_constant(s) * m ** (-1 - 2 * s)


def test_ks_vectorised_zero_center():
    vals = kernel_ks(0.3, np.arange(-3, 4))
    assert vals[3] == 0.0
    assert np.array_equal(vals, vals[::-1])


@pytest.mark.parametrize("s", [0.2, 0.7])
def test_oracle_agreement(s):
    for m in (1, 5, 30):
        assert math.isclose(kernel_ks_oracle(s, m), kernel_ks(s, m), rel_tol=1e-9)
    for m in (0, 3, 25):
        t = min(s, 0.4)
        assert math.isclose(kernel_kminus_oracle(t, m), kernel_kminus(t, m), rel_tol=1e-9)


def test_constants():
    s = 0.3
    assert math.isclose(abs_gamma_neg(s), abs(math.gamma(-s)), rel_tol=1e-14)
    assert math.isclose(c_s(s), 4 ** s * math.gamma(0.5 + s) / (math.sqrt(math.pi) * abs(math.gamma(-s))))
    assert math.isclose(c_minus_s(s), 4 ** -s * math.gamma(0.5 - s) / (math.sqrt(math.pi) * math.gamma(s)))


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_sigma_partial_bracket(s):
    chk = sigma_s_partial(s, 20_000)
    assert chk.partial + chk.tail_low <= chk.closed_form * (1 + 1e-13)
    assert chk.closed_form <= (chk.partial + chk.tail_high) * (1 + 1e-13)
    assert abs(chk.estimate - chk.closed_form) <= chk.bracket + 1e-12


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        kernel_ks(bad, 1)


def test_kminus_domain():
    with pytest.raises(DomainError):
        kernel_kminus(0.5, 1)


def test_table_read_only_and_tail():
    tab = kernel_table(0.4, 50)
    assert not tab.values.flags.writeable
    assert math.isclose(2 * tab.values.sum() + tab.tail_mass, sigma_s(0.4), rel_tol=1e-14)
    assert tab[-3] == tab[3]
    neg = kernel_table(-0.2, 10)
    assert neg.tail_mass == math.inf and neg.values[0] > 0


def test_table_csv():
    lines = kernel_table(0.5, 3).to_csv().splitlines()
    assert lines[0] == "m,kernel,main_term,difference"
    m, val, main, diff = lines[2].split(",")
    assert m == "1" and math.isclose(float(val), 4 / (3 * math.pi), rel_tol=1e-15)
    assert math.isclose(float(val) - float(main), float(diff), abs_tol=1e-16)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_second_order_remainder_bounded_away_from_one(s):
    # the scaled remainder is bounded; its far-field sup is set by moderate m
    def scaled(m):
        m = m.astype(float)
        return m ** (2 + 2 * s) * np.abs(gamma_ratio(m - s, m + 1 + s) - m ** (-1 - 2 * s))

    far = scaled(np.arange(10, 10_001)).max()
    near = scaled(np.arange(10, 101)).max()
    assert far <= 1.1 * near
    # the first-order term vanishes; the remainder is ~ s(1+s)(1+2s)/6 m^(-3-2s)
    m = np.array([1000])
    assert 1000.0 * scaled(m)[0] == pytest.approx(s * (1 + s) * (1 + 2 * s) / 6, rel=1e-3)

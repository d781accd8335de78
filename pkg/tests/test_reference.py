import math

import numpy as np
import pytest

from fraclattice.errors import ConfigError, DomainError
from fraclattice.reference import (ball_constants, catalogue, gaussian_frlap_at_zero, get_pair,
                                   inv_frlap_ball, pair_algebraic, pair_ball, pair_constant,
                                   pair_gaussian, pair_riesz_2d, pv_frlap_1d, riesz_constant)
from fraclattice.specfun import gauss_2f1


def outside_branch(gamma, s, n, r):
    _, c_out = ball_constants(gamma, s, n)
    return c_out * r ** (2 * s - n) * gauss_2f1((n - 2 * s) / 2, 1 - s, (n + gamma) / 2 + 1, 1 / r ** 2)


def inside_branch(gamma, s, n, r):
    c_in, _ = ball_constants(gamma, s, n)
    return c_in * gauss_2f1((n - 2 * s) / 2, -(gamma + 2 * s) / 2, n / 2, r ** 2)


def test_gaussian_value():
    assert math.isclose(gaussian_frlap_at_zero(0.25), 4 ** 0.25 * math.gamma(0.75) / math.sqrt(math.pi))
    p = pair_gaussian(0.25)
    assert np.isnan(p.f(0.3)) and p.f(0.0) == gaussian_frlap_at_zero(0.25)


def test_algebraic_pair():
    s = 0.4
    p = pair_algebraic(s)
    assert math.isclose(p.f(1.0), p.f(0.0) * 2 ** -0.9, rel_tol=1e-14)
    x = np.linspace(-3, 3, 7)
    assert np.array_equal(p.u(x), p.u(-x)) and np.array_equal(p.f(x), p.f(-x))
    eps = 1e-6
    assert math.isclose(p.df(0.7), (p.f(0.7 + eps) - p.f(0.7 - eps)) / (2 * eps), rel_tol=1e-8)
    with pytest.raises(DomainError):
        pair_algebraic(0.5)


@pytest.mark.parametrize("s", [0.1, 0.2, 0.3, 0.45])
def test_ball_one_dimensional_specialisations(s):
    x = np.linspace(-1, 1, 41)
    u1 = inv_frlap_ball(2 * (1 - s), s, 1, x)
    lead1 = 4 ** -s * math.gamma(0.5 - s) * math.gamma(2 - s) / math.sqrt(math.pi)
    assert np.allclose(u1, lead1 * (1 - (1 - 2 * s) * x ** 2), rtol=1e-12, atol=0)
    u2 = inv_frlap_ball(2 * (2 - s), s, 1, x)
    lead2 = 4 ** -s * math.gamma(0.5 - s) * math.gamma(3 - s) / (2 * math.sqrt(math.pi))
    poly = 1 - (2 - 4 * s) * x ** 2 + (1 - 8 * s / 3 + 4 * s * s / 3) * x ** 4
    assert np.allclose(u2, lead2 * poly, rtol=1e-12, atol=0)


def test_ball_two_dimensional_center():
    s = 0.25
    p = pair_ball("1s", s, 2)
    assert math.isclose(p.u(0.0, 0.0), 4 ** -s * math.gamma(1 - s) * math.gamma(2 - s), rel_tol=1e-14)
    assert p.f(1.0, 0.0) == 0.0 and p.f(0.9, 0.9) == 0.0


@pytest.mark.parametrize("gamma,s,n", [(1.5, 0.25, 2), (1.5, 0.25, 1), (2 * 0.7, 0.3, 1),
                                       (2 * 1.6, 0.4, 2), (0.5, 0.8, 2), (3.0, 0.1, 1)])
def test_ball_branch_continuity(gamma, s, n):
    a, b = inside_branch(gamma, s, n, 1.0), outside_branch(gamma, s, n, 1.0)
    assert abs(a - b) <= 1e-12 * abs(a)
    lo, hi = inv_frlap_ball(gamma, s, n, 1 - 1e-9), inv_frlap_ball(gamma, s, n, 1 + 1e-9)
    assert abs(lo - hi) <= 1e-7 * abs(lo)


def test_ball_regularity_tags():
    p = pair_ball("1s", 0.25)
    assert (p.k, p.beta) == (1, 0.25)
    q = pair_ball("2s", 0.25)
    assert (q.k, q.beta) == (2, 0.25)
    with pytest.raises(ConfigError):
        pair_ball("3s", 0.25)
    with pytest.raises(DomainError):
        pair_ball("1s", 0.6, 1)


def test_riesz_pair():
    alpha, s = 0.5, 0.3
    const = riesz_constant(alpha, s)
    expect = (2 ** 0.6 * math.gamma(0.55) * math.gamma(0.75)) / (math.gamma(0.45) * math.gamma(0.25))
    assert math.isclose(const, expect, rel_tol=1e-14)
    p = pair_riesz_2d(alpha, s)
    x, y = 0.3, -0.7
    assert math.isclose(p.u(2 * x, 2 * y), 2 ** -alpha * p.u(x, y), rel_tol=1e-14)
    assert math.isclose(p.f(2 * x, 2 * y), 2 ** (-alpha - 2 * s) * p.f(x, y), rel_tol=1e-14)
    assert math.isclose(p.f(x, y), p.f(-y, x), rel_tol=1e-14)
    with pytest.raises(DomainError):
        pair_riesz_2d(1.5, 0.3)


def test_constant_pair_degenerate():
    p = pair_constant(0.3)
    assert p.degenerate and np.all(p.f(np.arange(3.0)) == 0)


def test_catalogue_and_lookup():
    assert set(catalogue()) >= {"gaussian", "algebraic", "ball-1s", "ball-2s", "riesz2d"}
    assert get_pair("ball-2s", 0.2).name == "ball-2s"
    with pytest.raises(ConfigError):
        get_pair("nope", 0.2)
    with pytest.raises(ConfigError):
        get_pair("riesz2d", 0.2, dim=1)


# Independent oracle: the singular integral evaluated by quadrature.

def test_pv_oracle_on_gaussian():
    s = 0.3
    got = pv_frlap_1d(lambda x: np.exp(-np.asarray(x) ** 2), 0.0, s, decay=50.0)
    assert math.isclose(got, gaussian_frlap_at_zero(s), rel_tol=1e-7)


@pytest.mark.parametrize("name,s", [("algebraic", 0.2), ("algebraic", 0.4),
                                    ("ball-1s", 0.25), ("ball-1s", 0.45), ("ball-2s", 0.25)])
def test_pairs_against_singular_integral(name, s):
    p = get_pair(name, s)
    for x in (0.0, 0.55, 1.7):
        got = pv_frlap_1d(p.u, x, s, kinks=p.kinks, decay=p.u_decay)
        assert abs(got - float(p.f(x))) < 1e-4 * max(1.0, abs(float(p.f(x))))

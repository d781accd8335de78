"""Special functions used by the lattice kernels.

Everything here works in double precision and is written so that the
quantities needed by the kernels (Gamma ratios with large arguments,
``exp(-t) I_k(t)`` for huge ``t``) never overflow.

Array support is deliberately narrow: ``gamma_ratio`` broadcasts over both
arguments, ``bessel_i_scaled`` over ``t`` and ``gauss_2f1`` over ``z``.
Those are the axes the kernel tables and quadrature rules vectorize over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DivergenceError, DomainError, ParameterError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "ln_gamma",
    "gamma_ratio",
    "bessel_i_scaled",
    "bessel_i_scaled_orders",
    "hurwitz_zeta",
    "gauss_2f1",
    "hyp_3f2_unit",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation controls for the hypergeometric series."""

    max_terms: int = 5000
    rel_tol: float = 1e-16

    def __post_init__(self):
        if int(self.max_terms) < 1:
            raise ParameterError(f"max_terms must be >= 1, got {self.max_terms}")
        if not 0.0 < self.rel_tol < 1.0:
            raise ParameterError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


DEFAULT_CONTROL = SeriesControl()


# --------------------------------------------------------------------------
# Bernoulli numbers and polynomials (exact, small orders only)
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli_numbers(n_max: int) -> tuple:
    # Akiyama-Tanigawa, B_1 = +1/2 convention flipped to -1/2 below
    out = []
    a = [Fraction(0)] * (n_max + 1)
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    if n_max >= 1:
        out[1] = -out[1]
    return tuple(out)


def _bernoulli_poly(n: int, x: float) -> float:
    bern = _bernoulli_numbers(n)
    return sum(math.comb(n, j) * float(bern[j]) * x ** (n - j) for j in range(n + 1))


# --------------------------------------------------------------------------
# Gamma function family
# --------------------------------------------------------------------------

def ln_gamma(x: float) -> float:
    """Natural logarithm of the Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _signed_lgamma(x: float):
    """Return ``(log|Gamma(x)|, sign)``; ``sign == 0`` at the poles."""
    if x <= 0 and x == math.floor(x):
        return -math.inf, 0
    lg = math.lgamma(x)
    if x > 0:
        return lg, 1
    # Gamma alternates sign between consecutive negative integers
    return lg, (1 if math.floor(x) % 2 == 0 else -1)


def _gamma_product(num, den) -> float:
    """Compute prod(Gamma(num)) / prod(Gamma(den)) for real arguments.

    Poles in the denominator give 0; a pole in the numerator is an error.
    """
    log_total = 0.0
    sign = 1
    for x in num:
        lg, sg = _signed_lgamma(x)
        if sg == 0:
            raise ParameterError(f"Gamma pole at {x} in numerator")
        log_total += lg
        sign *= sg
    for x in den:
        lg, sg = _signed_lgamma(x)
        if sg == 0:
            return 0.0
        log_total -= lg
        sign *= sg
    return sign * math.exp(log_total)


_STIRLING_COEFFS = tuple(
    float(_bernoulli_numbers(2 * k)[2 * k]) / (2 * k * (2 * k - 1)) for k in range(1, 10)
)
_SHIFT_THRESHOLD = 10.0


def gamma_ratio(a, b):
    """Gamma(a) / Gamma(b) for positive ``a`` and ``b`` without overflow.

    Both arguments are shifted upward by the same integer until they
    exceed 10; the ratio of the shifted Gammas is then computed from the
    difference of Stirling series, written so that the large ``z log z``
    pieces cancel analytically instead of numerically.

    Parameters
    ----------
    a, b : float or array_like
        Positive arguments; broadcast against each other.

    Returns
    -------
    float or ndarray
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError("gamma_ratio requires positive arguments")
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    lo = np.minimum(a_arr, b_arr)
    shift = np.maximum(0, np.ceil(_SHIFT_THRESHOLD - lo)).astype(int)

    # Gamma(x) = Gamma(x + n) / (x (x+1) ... (x+n-1))
    correction = np.ones_like(a_arr)
    for i in range(int(shift.max(initial=0))):
        active = i < shift
        correction = np.where(active, correction * (b_arr + i) / (a_arr + i), correction)

    big_a = a_arr + shift
    big_b = b_arr + shift
    diff = a_arr - b_arr
    log_ratio = (big_a - 0.5) * np.log1p(diff / big_b) + diff * (np.log(big_b) - 1.0)
    for k, coeff in enumerate(_STIRLING_COEFFS, start=1):
        power = 1 - 2 * k
        log_ratio = log_ratio + coeff * (big_a ** power - big_b ** power)
    out = np.exp(log_ratio) * correction
    return out if out.ndim else float(out)


def _reciprocal_gamma(x: float) -> float:
    lg, sg = _signed_lgamma(x)
    return 0.0 if sg == 0 else sg * math.exp(-lg)


# --------------------------------------------------------------------------
# Exponentially scaled modified Bessel functions of integer order
# --------------------------------------------------------------------------

def _bessel_series(k: int, t: np.ndarray) -> np.ndarray:
    # e^{-t} (t/2)^k / k! * sum_m r_m,  r_{m+1} = r_m (t/2)^2 / ((m+1)(m+k+1))
    q = 0.25 * t * t
    with np.errstate(divide="ignore"):
        log_lead = k * np.log(0.5 * t) - math.lgamma(k + 1) - t
    term = np.ones_like(t)
    total = np.ones_like(t)
    m = 0
    while True:
        term = term * q / ((m + 1) * (m + k + 1))
        total = total + term
        m += 1
        if np.all(term <= 1e-17 * total) or m > 2000:
            break
    return np.exp(log_lead + np.log(total))


def _bessel_hankel(k: int, t: np.ndarray) -> np.ndarray:
    # e^{-t} I_k(t) ~ (2 pi t)^{-1/2} sum_j (-1)^j a_j(k) t^{-j}
    mu = 4.0 * k * k
    term = np.ones_like(t)
    total = np.ones_like(t)
    prev_abs = np.full_like(t, np.inf)
    live = np.ones(t.shape, dtype=bool)
    for j in range(1, 80):
        term = -term * (mu - (2 * j - 1) ** 2) / (8.0 * j * t)
        abs_term = np.abs(term)
        # stop at the smallest term of the asymptotic series
        live &= abs_term < prev_abs
        total = np.where(live, total + term, total)
        prev_abs = abs_term
        live &= abs_term > 1e-17 * np.abs(total)
        if not live.any():
            break
    return total / np.sqrt(2.0 * math.pi * t)


def _miller_start(k: int, t_max: float) -> int:
    return k + int(math.ceil(math.sqrt(80.0 * t_max))) + 30


def _bessel_miller(k: int, t: np.ndarray) -> np.ndarray:
    """Backward recurrence normalised by e^{-t}(I_0 + 2 sum_j I_j) = 1."""
    start = _miller_start(k, float(t.max()))
    p_next = np.zeros_like(t)
    p = np.full_like(t, 1e-30)
    norm_sum = np.zeros_like(t)
    stored = p.copy() if start == k else np.zeros_like(t)
    two_over_t = 2.0 / t
    for j in range(start, 0, -1):
        p_prev = p_next + j * two_over_t * p
        norm_sum += 2.0 * p
        p_next, p = p, p_prev
        if j - 1 == k:
            stored = p.copy()
        big = p > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            p *= scale
            p_next *= scale
            norm_sum *= scale
            stored *= scale
    return stored / (p + norm_sum)


def bessel_i_scaled(k: int, t):
    """Scaled modified Bessel function ``exp(-t) I_k(t)`` of integer order.

    The order enters only through ``|k|``.  Depending on ``t`` the value is
    taken from the power series (small ``t``), Miller's backward recurrence
    normalised with the sum identity (intermediate ``t``) or the Hankel
    asymptotic expansion (``t`` large compared with ``k**2``).
    """
    k = abs(int(k))
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr >= 0)):
        raise DomainError("bessel_i_scaled requires t >= 0")
    flat = t_arr.reshape(-1)
    out = np.empty_like(flat)

    zero = flat == 0.0
    out[zero] = 1.0 if k == 0 else 0.0
    series_cut = max(10.0, 0.5 * k)
    asym_cut = max(30.0, 0.5 * k * k)
    series = ~zero & (flat < series_cut)
    asym = flat >= max(asym_cut, series_cut)
    miller = ~zero & ~series & ~asym
    if series.any():
        out[series] = _bessel_series(k, flat[series])
    if asym.any():
        out[asym] = _bessel_hankel(k, flat[asym])
    if miller.any():
        out[miller] = _bessel_miller(k, flat[miller])
    out = out.reshape(t_arr.shape)
    return out if out.ndim else float(out)


def bessel_i_scaled_orders(k_max: int, t: float) -> np.ndarray:
    """``exp(-t) I_k(t)`` for every ``k = 0 .. k_max`` at a single ``t >= 0``.

    One Miller sweep produces all orders at once; this is what the heat
    semigroup needs to assemble its kernel.
    """
    t = float(t)
    if not t >= 0:
        raise DomainError("bessel_i_scaled_orders requires t >= 0")
    k_max = int(k_max)
    out = np.zeros(k_max + 1)
    if t == 0.0:
        out[0] = 1.0
        return out
    start = _miller_start(k_max, t)
    vals = np.zeros(start + 2)
    vals[start] = 1e-30
    norm_sum = 0.0
    for j in range(start, 0, -1):
        vals[j - 1] = vals[j + 1] + (2.0 * j / t) * vals[j]
        norm_sum += 2.0 * vals[j]
        if vals[j - 1] > 1e250:
            vals[j - 1:] *= 1e-250
            norm_sum *= 1e-250
    out[:] = vals[: k_max + 1] / (vals[0] + norm_sum)
    return out


# --------------------------------------------------------------------------
# Hurwitz zeta (Euler-Maclaurin)
# --------------------------------------------------------------------------

_EM_COEFFS = tuple(
    float(_bernoulli_numbers(2 * k)[2 * k]) / math.factorial(2 * k) for k in range(1, 13)
)


def hurwitz_zeta(x: float, q: float) -> float:
    """``sum_{n>=0} (n + q)^{-x}`` for ``x > 1`` and ``q > 0``."""
    x = float(x)
    q = float(q)
    if not x > 1.0:
        raise DomainError(f"hurwitz_zeta requires x > 1, got {x}")
    if not q > 0.0:
        raise DomainError(f"hurwitz_zeta requires q > 0, got {q}")
    n_direct = max(0, int(math.ceil(30.0 - q)))
    head = math.fsum((q + n) ** -x for n in range(n_direct))
    big_q = q + n_direct
    tail = big_q ** (1.0 - x) / (x - 1.0) + 0.5 * big_q ** -x
    rising = x  # x (x+1) ... (x + 2k - 2)
    for k, coeff in enumerate(_EM_COEFFS, start=1):
        term = coeff * rising * big_q ** (-x - 2 * k + 1)
        tail += term
        if abs(term) < 1e-18 * abs(tail):
            break
        rising *= (x + 2 * k - 1) * (x + 2 * k)
    return head + tail


# --------------------------------------------------------------------------
# Hypergeometric functions
# --------------------------------------------------------------------------

def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _2f1_series(a, b, c, z, control=DEFAULT_CONTROL):
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for n in range(int(control.max_terms)):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
        if np.all(np.abs(term) <= control.rel_tol * np.abs(total)):
            return total
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; z) series did not converge in {control.max_terms} terms"
    )


def _2f1_connection(a, b, c, z, control=DEFAULT_CONTROL):
    # z -> 1 - z linear transformation; needs c - a - b non-integer
    excess = c - a - b
    if float(excess).is_integer():
        raise ParameterError(
            f"connection formula needs non-integer c - a - b, got {excess}"
        )
    w = 1.0 - np.asarray(z, dtype=float)
    coef_1 = _gamma_product([c, excess], []) * _reciprocal_gamma(c - a) * _reciprocal_gamma(c - b)
    coef_2 = _gamma_product([c, -excess], []) * _reciprocal_gamma(a) * _reciprocal_gamma(b)
    first = coef_1 * _2f1_series(a, b, 1.0 - excess, w, control)
    if coef_2 == 0.0:
        return first
    if excess < 0 and np.any(w == 0.0):
        raise DivergenceError(f"2F1 diverges at z = 1 when c - a - b = {excess} < 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(w > 0.0, w ** excess, 0.0)
    return first + coef_2 * power * _2f1_series(c - a, c - b, 1.0 + excess, w, control)


def _digamma(x: float) -> float:
    """Digamma function for real ``x`` off the nonpositive integers."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise ParameterError(f"digamma has a pole at {x}")
    if x < 0.5:
        return _digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (
        1.0 / 240 - inv2 * (1.0 / 132)))))
    return acc + math.log(x) - 0.5 / x - series


def _2f1_log_case(a, b, m, z, control=DEFAULT_CONTROL):
    """``2F1(a, b; a + b + m; z)`` for a positive integer ``m``, ``1/2 < z <= 1``.

    Logarithmic form of the ``z -> 1 - z`` connection; ``a`` and ``b`` must
    not be nonpositive integers (those series terminate).
    """
    c = a + b + m
    w = 1.0 - np.asarray(z, dtype=float)
    finite = math.gamma(m) * math.gamma(c) / (math.gamma(a + m) * math.gamma(b + m))
    first = np.zeros_like(w)
    coef = 1.0
    for n in range(m):
        first = first + coef * w ** n
        if n + 1 < m:
            coef *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n))
    first = finite * first
    pos = w > 0.0
    second = np.zeros_like(w)
    if pos.any():
        wp = w[pos]
        logw = np.log(wp)
        pref = -((-1.0) ** m) * math.gamma(c) / (math.gamma(a) * math.gamma(b) * math.factorial(m))
        term = np.ones_like(wp)
        total = np.zeros_like(wp)
        psi1, psi2 = _digamma(1.0), _digamma(m + 1.0)
        psi3, psi4 = _digamma(a + m), _digamma(b + m)
        for n in range(int(control.max_terms)):
            piece = term * (logw - psi1 - psi2 + psi3 + psi4)
            total = total + piece
            if n > 2 and np.all(np.abs(piece) <= control.rel_tol * np.maximum(np.abs(total), 1e-300)):
                break
            # advance the Pochhammer ratio and every digamma by one step
            term = term * (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * wp
            psi1 += 1.0 / (n + 1.0)
            psi2 += 1.0 / (n + m + 1.0)
            psi3 += 1.0 / (a + m + n)
            psi4 += 1.0 / (b + m + n)
        else:
            raise ConvergenceError(f"2F1 logarithmic series did not converge (a={a}, b={b}, m={m})")
        second[pos] = pref * wp ** m * total
    return first + second


def gauss_2f1(a: float, b: float, c: float, z, control: SeriesControl = DEFAULT_CONTROL):
    """Gauss hypergeometric function on ``0 <= z <= 1``.

    The direct series is used for ``z <= 1/2`` (and for any ``z`` when the
    series terminates); otherwise the two-term connection formula in
    ``1 - z`` is used.  ``z = 1`` is accepted when ``c - a - b > 0`` and
    returns Gauss's summation value.
    """
    if _is_nonpositive_integer(c):
        raise ParameterError(f"2F1 undefined for nonpositive integer c = {c}")
    z_arr = np.asarray(z, dtype=float)
    if np.any((z_arr < 0.0) | (z_arr > 1.0)) or np.any(np.isnan(z_arr)):
        raise DomainError("gauss_2f1 is implemented for 0 <= z <= 1 only")
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        out = _2f1_series(a, b, c, z_arr, control)
        return out if out.ndim else float(out)

    flat = z_arr.reshape(-1)
    out = np.empty_like(flat)
    near = flat > 0.5
    if (~near).any():
        out[~near] = _2f1_series(a, b, c, flat[~near], control)
    if near.any():
        excess = c - a - b
        if float(excess).is_integer():
            if excess <= 0:
                if np.any(flat[near] == 1.0):
                    raise ParameterError(f"2F1 at z = 1 with integer c - a - b = {excess}")
                out[near] = _2f1_series(a, b, c, flat[near], control)
            else:
                out[near] = _2f1_log_case(a, b, int(excess), flat[near], control)
        else:
            out[near] = _2f1_connection(a, b, c, flat[near], control)
    out = out.reshape(z_arr.shape)
    return out if out.ndim else float(out)


def _log_term_expansion(numer, denom, order):
    """Coefficients of exp(sum_k d_k x^k) for the log of a Gamma-ratio term."""
    d = [0.0] * (order + 1)
    for k in range(1, order + 1):
        acc = sum(_bernoulli_poly(k + 1, x) for x in numer)
        acc -= sum(_bernoulli_poly(k + 1, x) for x in denom)
        d[k] = (-1) ** (k + 1) * acc / (k * (k + 1))
    e = [1.0] + [0.0] * order
    for k in range(1, order + 1):
        e[k] = sum(j * d[j] * e[k - j] for j in range(1, k + 1)) / k
    return e


def hyp_3f2_unit(a1: float, a2: float, a3: float, b1: float, b2: float,
                 control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Generalised hypergeometric ``3F2(a1, a2, a3; b1, b2; 1)``.

    The first few hundred terms are summed directly; the remaining tail is
    summed in closed form from the large-``n`` expansion of the terms,
    ``t_n ~ A n^p (1 + e_1/n + e_2/n^2 + ...)``, each power contributing a
    Hurwitz zeta value.
    """
    numer = (float(a1), float(a2), float(a3))
    denom = (float(b1), float(b2))
    if any(_is_nonpositive_integer(b) for b in denom):
        raise ParameterError("3F2 undefined for nonpositive integer lower parameters")
    terminating = [a for a in numer if _is_nonpositive_integer(a)]
    if terminating:
        n_max = int(-max(terminating))
        term = 1.0
        parts = [1.0]
        for n in range(n_max):
            term *= (numer[0] + n) * (numer[1] + n) * (numer[2] + n)
            term /= (denom[0] + n) * (denom[1] + n) * (n + 1.0)
            parts.append(term)
        return math.fsum(parts)

    excess = sum(denom) - sum(numer)
    if not excess > 0:
        raise DivergenceError(f"3F2 at unit argument diverges: b1 + b2 - a1 - a2 - a3 = {excess}")

    n_direct = min(int(control.max_terms), 400)
    n_direct = max(n_direct, 200)
    largest = max(abs(x) for x in numer + denom)
    n_direct = max(n_direct, int(20 * largest))
    parts = [1.0]
    term = 1.0
    for n in range(n_direct - 1):
        term *= (numer[0] + n) * (numer[1] + n) * (numer[2] + n)
        term /= (denom[0] + n) * (denom[1] + n) * (n + 1.0)
        parts.append(term)
    # parts[n] holds t_n for n < n_direct; tail starts at M = n_direct
    big_m = n_direct
    t_m = term * (numer[0] + big_m - 1) * (numer[1] + big_m - 1) * (numer[2] + big_m - 1)
    t_m /= (denom[0] + big_m - 1) * (denom[1] + big_m - 1) * big_m
    order = 12
    power = -1.0 - excess
    e = _log_term_expansion(numer, denom + (1.0,), order)
    shape_at_m = sum(e[k] * big_m ** -k for k in range(order + 1))
    amplitude = t_m / (big_m ** power * shape_at_m)
    tail = amplitude * math.fsum(
        e[k] * hurwitz_zeta(k - power, big_m) for k in range(order + 1)
    )
    return math.fsum(parts) + tail

"""Adaptive quadrature for the semigroup (Mellin-type) kernel integrals.

The kernel oracles all have the form

    integral_0^inf  prod_i G(m_i, t) * t^(p - 1) dt,   G(m, t) = exp(-2t) I_m(2t),

with ``p = -s`` for the Laplacian and ``p = +s`` for the integral operator
(the ``t^(p-1)`` weight is ``dt / t^(1+s)`` resp. ``dt / t^(1-s)``).  The
integral is split in ``u = log t`` into a finite piece handled by adaptive
Gauss-Legendre and two tails integrated term by term from the small-``t``
power series and the large-``t`` Hankel expansion of ``G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureError
from .specfun import bessel_i_scaled

__all__ = ["QuadResult", "adaptive_gauss_legendre", "heat_kernel_mellin"]


@dataclass(frozen=True)
class QuadResult:
    """Integral estimate with an error bound."""

    value: float
    error: float
    panels: int


@lru_cache(maxsize=8)
def _gl_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel_sums(func, lo, hi, order):
    """Per-panel Gauss-Legendre sums and the matching sums of ``|f|``."""
    nodes, weights = _gl_rule(order)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    y = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return half * (y @ weights), np.abs(half) * (np.abs(y) @ weights)


def adaptive_gauss_legendre(func, a: float, b: float, *, rtol: float = 1e-12,
                            atol: float = 0.0, order: int = 20,
                            max_rounds: int = 40, initial_panels: int = 8,
                            max_panels: int = 100_000) -> QuadResult:
    """Integrate a vectorised ``func`` over ``[a, b]``.

    Each panel is compared against its two halves; panels whose difference
    exceeds their share of the tolerance are bisected.  Differences at the
    rounding level of ``integral |f|`` over the panel count as converged.
    The integrand is called on flat arrays of nodes, one call per round.

    Raises
    ------
    QuadratureError
        If the tolerance is not met after ``max_rounds`` bisections.  The
        exception carries the best estimate and its error bound.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("adaptive_gauss_legendre needs a finite interval")
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    length = abs(b - a)
    accepted_val = 0.0
    accepted_err = 0.0
    panels = 0
    for _ in range(max_rounds):
        mid = 0.5 * (lo + hi)
        whole, _ = _panel_sums(func, lo, hi, order)
        halves, mags = _panel_sums(func, np.concatenate([lo, mid]),
                                   np.concatenate([mid, hi]), order)
        refined = halves[: lo.size] + halves[lo.size:]
        noise = 100.0 * np.finfo(float).eps * (mags[: lo.size] + mags[lo.size:])
        err = np.abs(refined - whole)
        estimate = accepted_val + refined.sum()
        tol = max(atol, rtol * abs(estimate))
        share = tol * np.abs(hi - lo) / length
        good = err <= np.maximum(share, noise)
        accepted_val += refined[good].sum()
        accepted_err += err[good].sum()
        panels += int(good.sum())
        if good.all():
            return QuadResult(float(accepted_val), float(accepted_err), panels)
        if 2 * int((~good).sum()) > max_panels:
            break
        lo, hi = np.concatenate([lo[~good], mid[~good]]), np.concatenate([mid[~good], hi[~good]])
    remaining = float(err[~good].sum())
    raise QuadratureError(
        f"adaptive quadrature did not converge on [{a}, {b}]",
        estimate=float(accepted_val + refined[~good].sum()),
        error=accepted_err + remaining,
    )


# --------------------------------------------------------------------------
# Expansions of G(m, t) at both ends
# --------------------------------------------------------------------------

def _small_t_coeffs(m: int, terms: int) -> np.ndarray:
    """Coefficients c_j with G(m, t) = t^|m| * sum_j c_j t^j near t = 0."""
    m = abs(m)
    bessel_part = np.zeros(terms)
    for k in range(0, (terms + 1) // 2):
        if 2 * k < terms:
            bessel_part[2 * k] = 1.0 / (math.factorial(k) * math.factorial(k + m))
    exp_part = np.array([(-2.0) ** i / math.factorial(i) for i in range(terms)])
    return np.convolve(bessel_part, exp_part)[:terms]


def _hankel_coeffs(m: int, terms: int) -> np.ndarray:
    """Coefficients b_j with G(m, t) ~ (4 pi t)^(-1/2) sum_j b_j t^-j."""
    mu = 4.0 * m * m
    out = np.empty(terms)
    out[0] = 1.0
    for j in range(1, terms):
        # a_j / a_{j-1} = (mu - (2j-1)^2) / (8 j); x = 2t adds 2^-j
        out[j] = -out[j - 1] * (mu - (2 * j - 1) ** 2) / (8.0 * j * 2.0)
    return out


def heat_kernel_mellin(orders, p: float, *, rtol: float = 1e-12,
                       order: int = 20) -> QuadResult:
    """``integral_0^inf prod_i G(m_i, t) t^(p-1) dt`` for integer orders ``m_i``.

    Parameters
    ----------
    orders : sequence of int
        One order per lattice dimension.
    p : float
        Mellin exponent; the integral converges when
        ``sum |m_i| + p > 0`` and ``len(orders) / 2 > p``.
    """
    orders = tuple(abs(int(m)) for m in orders)
    dim = len(orders)
    low_power = sum(orders) + p
    high_power = 0.5 * dim - p
    if not low_power > 0 or not high_power > 0:
        raise ValueError(f"Mellin integral diverges for orders={orders}, p={p}")

    n_small = 10
    t0 = 1e-3
    series = np.ones(1)
    for m in orders:
        series = np.convolve(series, _small_t_coeffs(m, n_small))[:n_small]
    powers = low_power + np.arange(n_small)
    low_tail = float(np.sum(series * t0 ** powers / powers))

    n_hankel = 14
    t1 = max(200.0, 5.0 * max(orders) ** 2)
    hankel = np.ones(1)
    for m in orders:
        hankel = np.convolve(hankel, _hankel_coeffs(m, n_hankel))[:n_hankel]
    hankel = hankel * (4.0 * math.pi) ** (-0.5 * dim)
    exps = high_power + np.arange(n_hankel)
    high_terms = hankel * t1 ** (-exps) / exps
    high_tail = float(np.sum(high_terms))

    def integrand(u):
        t = np.exp(u)
        val = np.exp(p * u)
        for m in orders:
            val = val * bessel_i_scaled(m, 2.0 * t)
        return val

    core = adaptive_gauss_legendre(integrand, math.log(t0), math.log(t1),
                                   rtol=0.1 * rtol, order=order)
    value = low_tail + core.value + high_tail
    tail_err = abs(series[-1] * t0 ** powers[-1]) + abs(high_terms[-1])
    return QuadResult(value, core.error + tail_err, core.panels)

"""One-dimensional kernels of the fractional discrete Laplacian and its inverse.

Positive order ``s`` in (0, 1)::

    K_s(m) = c_s * Gamma(|m| - s) / Gamma(|m| + 1 + s),   K_s(0) = 0,
    c_s    = 4^s Gamma(1/2 + s) / (sqrt(pi) |Gamma(-s)|).

Negative order ``-s`` with ``s`` in (0, 1/2)::

    K_{-s}(m) = c_{-s} * Gamma(|m| + s) / Gamma(|m| + 1 - s),
    c_{-s}    = 4^-s Gamma(1/2 - s) / (sqrt(pi) Gamma(s)).

Both are also available through the semigroup integrals, which serve as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError
from .quadrature import heat_kernel_mellin
from .specfun import gamma_ratio, hurwitz_zeta

__all__ = [
    "abs_gamma_neg",
    "c_s",
    "c_minus_s",
    "kernel_ks",
    "kernel_ks_oracle",
    "kernel_kminus",
    "kernel_kminus_oracle",
    "sigma_s",
    "sigma_s_partial",
    "kernel_bound_constant",
    "KernelTable",
    "kernel_table",
]

_SQRT_PI = math.sqrt(math.pi)


def _check_positive_order(s: float) -> float:
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError(f"order s must lie in (0, 1), got {s}")
    return s


def _check_negative_order(s: float) -> float:
    s = float(s)
    if not 0.0 < s < 0.5:
        raise DomainError(
            f"the negative-power kernel needs s in (0, 1/2), got {s}"
        )
    return s


def abs_gamma_neg(s: float) -> float:
    """``|Gamma(-s)|`` for ``0 < s < 1``, computed as ``Gamma(1 - s) / s``."""
    s = _check_positive_order(s)
    return math.gamma(1.0 - s) / s


def c_s(s: float) -> float:
    """Normalisation constant of the positive-order kernel."""
    s = _check_positive_order(s)
    return 4.0 ** s * math.gamma(0.5 + s) / (_SQRT_PI * abs_gamma_neg(s))


def c_minus_s(s: float) -> float:
    """Normalisation constant of the negative-order kernel, ``0 < s < 1/2``."""
    s = _check_negative_order(s)
    return 4.0 ** -s * math.gamma(0.5 - s) / (_SQRT_PI * math.gamma(s))


def kernel_ks(s: float, m):
    """Kernel ``K_s(m)`` of ``(-Delta_h)^s``; accepts scalar or array ``m``."""
    s = _check_positive_order(s)
    m_abs = np.abs(np.asarray(m, dtype=np.int64))
    out = np.zeros(m_abs.shape)
    nz = m_abs != 0
    if nz.any():
        mm = m_abs[nz].astype(float)
        out[nz] = c_s(s) * gamma_ratio(mm - s, mm + 1.0 + s)
    return out if out.ndim else float(out)


def kernel_kminus(s: float, m):
    """Kernel ``K_{-s}(m)`` of ``(-Delta_h)^{-s}``; strictly positive for all ``m``."""
    s = _check_negative_order(s)
    m_abs = np.abs(np.asarray(m, dtype=np.int64)).astype(float)
    out = c_minus_s(s) * gamma_ratio(m_abs + s, m_abs + 1.0 - s)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def kernel_ks_oracle(s: float, m: int, rtol: float = 1e-11) -> float:
    """``K_s(m)`` from the heat-semigroup integral, for ``m != 0``.

    Raises
    ------
    QuadratureError
        When the achieved error bound exceeds ``1e-10`` times the result.
    """
    s = _check_positive_order(s)
    m = int(m)
    if m == 0:
        raise DomainError("the semigroup integral defines K_s(m) only for m != 0")
    res = heat_kernel_mellin((m,), -s, rtol=rtol)
    value = res.value / abs_gamma_neg(s)
    error = res.error / abs_gamma_neg(s)
    if error > 1e-10 * abs(value):
        raise QuadratureError(f"K_s oracle at m={m} not accurate enough", value, error)
    return value


def kernel_kminus_oracle(s: float, m: int, rtol: float = 1e-11) -> float:
    """``K_{-s}(m)`` from the heat-semigroup integral, any integer ``m``."""
    s = _check_negative_order(s)
    res = heat_kernel_mellin((int(m),), s, rtol=rtol)
    value = res.value / math.gamma(s)
    error = res.error / math.gamma(s)
    if error > 1e-10 * abs(value):
        raise QuadratureError(f"K_-s oracle at m={m} not accurate enough", value, error)
    return value


def sigma_s(s: float) -> float:
    """Closed form of ``sum_{m != 0} K_s(m)``."""
    s = _check_positive_order(s)
    return 2.0 ** (2.0 * s) * math.gamma(0.5 + s) / (_SQRT_PI * math.gamma(1.0 + s))


def kernel_bound_constant(s: float) -> float:
    """Smallest ``C`` with ``K_s(m) <= C |m|^(-1-2s)`` for all ``|m| >= 1``.

    ``|m|^(1+2s) K_s(m)`` decreases towards ``c_s`` (log-convexity of
    Gamma), so the supremum is attained at ``m = 1``:
    ``C = K_s(1) = c_s Gamma(1-s) / Gamma(2+s)``.
    """
    s = _check_positive_order(s)
    return float(kernel_ks(s, 1)) * (1.0 + 1e-12)


@dataclass(frozen=True)
class SigmaCheck:
    """Partial sum of the kernel plus a bracketed tail."""

    partial: float
    tail_low: float
    tail_high: float
    closed_form: float

    @property
    def estimate(self) -> float:
        return self.partial + 0.5 * (self.tail_low + self.tail_high)

    @property
    def bracket(self) -> float:
        return 0.5 * (self.tail_high - self.tail_low)


def sigma_s_partial(s: float, M: int = 100_000) -> SigmaCheck:
    """Sum ``K_s(m)`` over ``1 <= |m| <= M`` and bracket the remaining tail.

    For ``|m| > M`` the kernel satisfies
    ``c_s |m|^(-1-2s) <= K_s(m) <= K_s(M+1) (M+1)^(1+2s) |m|^(-1-2s)``
    because ``|m|^(1+2s) K_s(m)`` decreases to ``c_s``.  Both sides are
    summed with the Hurwitz zeta function.
    """
    s = _check_positive_order(s)
    M = int(M)
    ms = np.arange(1, M + 1)
    vals = kernel_ks(s, ms)
    partial = 2.0 * math.fsum(vals[::-1])
    zeta_tail = 2.0 * hurwitz_zeta(1.0 + 2.0 * s, M + 1.0)
    hi_const = kernel_ks(s, M + 1) * (M + 1.0) ** (1.0 + 2.0 * s)
    return SigmaCheck(
        partial=partial,
        tail_low=c_s(s) * zeta_tail,
        tail_high=hi_const * zeta_tail,
        closed_form=sigma_s(s),
    )


# --------------------------------------------------------------------------
# Cached tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelTable:
    """Immutable kernel values ``K(m)`` for ``m = 0 .. N``.

    Attributes
    ----------
    s : float
        Signed order: positive for ``(-Delta_h)^s``, negative for the
        integral operator ``(-Delta_h)^{-|s|}``.
    radius : int
        Truncation radius ``N``.
    values : ndarray
        Read-only array of length ``N + 1``.
    h_exponent : float
        Power of ``h`` multiplying the kernel sum (``-2s`` or ``+2|s|``).
    tail_mass : float
        ``sum_{|m| > N} K(m)`` for positive order; ``inf`` for negative
        order, whose kernel is not summable.
    """

    s: float
    radius: int
    values: np.ndarray
    h_exponent: float
    tail_mass: float

    def __getitem__(self, m):
        return self.values[np.abs(m)]

    def to_csv(self) -> str:
        """CSV with columns m, kernel, power-law main term and difference."""
        order = abs(self.s)
        if self.s > 0:
            const, power = c_s(order), 1.0 + 2.0 * order
        else:
            const, power = c_minus_s(order), 1.0 - 2.0 * order
        lines = ["m,kernel,main_term,difference"]
        for m, val in enumerate(self.values):
            main = const / m ** power if m else float("nan")
            diff = val - main if m else float("nan")
            lines.append(f"{m},{val:.17g},{main:.17g},{diff:.17g}")
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=32)
def kernel_table(s: float, radius: int) -> KernelTable:
    """Build (or fetch from cache) the kernel table for signed order ``s``."""
    s = float(s)
    radius = int(radius)
    if radius < 1:
        raise DomainError(f"table radius must be >= 1, got {radius}")
    ms = np.arange(radius + 1)
    if s > 0:
        vals = np.asarray(kernel_ks(s, ms), dtype=float)
        # total minus the stored part; the near part summed small-to-large
        tail = sigma_s(s) - 2.0 * math.fsum(vals[::-1])
        tail = max(tail, 0.0)
        h_exp = -2.0 * s
    elif s < 0:
        vals = np.asarray(kernel_kminus(-s, ms), dtype=float)
        tail = math.inf
        h_exp = -2.0 * s
    else:
        raise DomainError("order s = 0 is the identity and has no kernel")
    vals.setflags(write=False)
    return KernelTable(s=s, radius=radius, values=vals, h_exponent=h_exp, tail_mass=tail)

"""Two-dimensional kernels.

No closed form is available on Z^2.  Exact values come from the product
heat-kernel integral (``kernel2d_ks_oracle``, ``kernel2d_kminus_oracle``)
and far values from the leading power law ``c / |m|^(2 +- 2s)``.
``build_hybrid_table`` mixes the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError, QuadratureError
from .kernels1d import abs_gamma_neg
from .quadrature import adaptive_gauss_legendre, heat_kernel_mellin
from .specfun import hyp_3f2_unit

__all__ = [
    "c_2s",
    "c_2_minus_s",
    "kernel2d_ks_oracle",
    "kernel2d_kminus_oracle",
    "kernel2d_kminus_center",
    "kernel2d_asymptotic",
    "Kernel2DTable",
    "build_hybrid_table",
    "asymptotic_tail_mass",
    "QUADRATURE",
    "ASYMPTOTIC",
    "CENTER",
]

QUADRATURE = "quadrature"
ASYMPTOTIC = "asymptotic"
CENTER = "center"
_TAGS = (QUADRATURE, ASYMPTOTIC, CENTER)


def _check_signed(s: float) -> float:
    s = float(s)
    if s > 0:
        if not s < 1:
            raise DomainError(f"Laplacian order must lie in (0, 1), got {s}")
    elif s < 0:
        if not -0.5 < s:
            raise DomainError(f"integral order |s| must lie in (0, 1/2), got {-s}")
    else:
        raise DomainError("order s = 0 has no kernel")
    return s


def c_2s(s: float) -> float:
    """Leading constant of the 2D Laplacian kernel, ``0 < s < 1``."""
    s = float(s)
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    return 4.0 ** s * math.gamma(1.0 + s) / (math.pi * abs_gamma_neg(s))


def c_2_minus_s(s: float) -> float:
    """Leading constant of the 2D integral kernel, ``0 < s < 1/2``.

    Equals ``4^-s Gamma(1 - s) / (pi Gamma(s))``, the Riesz potential
    constant in the plane.
    """
    s = float(s)
    if not 0 < s < 0.5:
        raise DomainError(f"s must lie in (0, 1/2), got {s}")
    return 4.0 ** -s * math.gamma(1.0 - s) / (math.pi * math.gamma(s))


def kernel2d_ks_oracle(s: float, m1: int, m2: int, rtol: float = 1e-11) -> float:
    """``K_s(m1, m2)`` by quadrature of the product heat-kernel integral."""
    s = float(s)
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if m1 == 0 and m2 == 0:
        raise DomainError("the integral defines K_s only away from the origin")
    res = heat_kernel_mellin((m1, m2), -s, rtol=rtol)
    value = res.value / abs_gamma_neg(s)
    if res.error / abs_gamma_neg(s) > 1e-9 * value:
        raise QuadratureError("2D kernel quadrature not accurate enough", value,
                              res.error / abs_gamma_neg(s))
    return value


def kernel2d_kminus_oracle(s: float, m1: int, m2: int, rtol: float = 1e-11) -> float:
    """``K_{-s}(m1, m2)`` by quadrature, including the origin."""
    s = float(s)
    if not 0 < s < 0.5:
        raise DomainError(f"s must lie in (0, 1/2), got {s}")
    res = heat_kernel_mellin((m1, m2), s, rtol=rtol)
    value = res.value / math.gamma(s)
    if res.error / math.gamma(s) > 1e-9 * value:
        raise QuadratureError("2D kernel quadrature not accurate enough", value,
                              res.error / math.gamma(s))
    return value


def kernel2d_kminus_center(s: float) -> float:
    """``K_{-s}(0, 0) = 4^-s 3F2(1/2, (1+s)/2, s/2; 1, 1; 1)``."""
    s = float(s)
    if not 0 < s < 0.5:
        raise DomainError(f"s must lie in (0, 1/2), got {s}")
    return 4.0 ** -s * hyp_3f2_unit(0.5, 0.5 * (1.0 + s), 0.5 * s, 1.0, 1.0)


def kernel2d_asymptotic(s: float, m1, m2):
    """Leading power law ``c_{2,s} |m|^(-2-2s)``, or ``c_{2,-s} |m|^(-2+2s)`` for s < 0.

    ``s`` is the signed order.  Broadcasts over ``m1`` and ``m2``.
    """
    s = _check_signed(s)
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    if np.any((m1 == 0) & (m2 == 0)):
        raise DomainError("the asymptotic kernel is undefined at the origin")
    r2 = m1 * m1 + m2 * m2
    if s > 0:
        out = c_2s(s) * r2 ** (-1.0 - s)
    else:
        out = c_2_minus_s(-s) * r2 ** (-1.0 - s)
    return out if out.ndim else float(out)


def _square_exterior_integral(q: float, side: float) -> float:
    """``integral of |x|^-q`` over the plane minus the square ``[-L, L]^2``, ``q > 2``."""
    # 8 * int_0^{pi/4} int_{L/cos}^inf r^{1-q} dr dtheta
    angular = adaptive_gauss_legendre(lambda th: np.cos(th) ** (q - 2.0), 0.0, math.pi / 4,
                                      rtol=1e-14).value
    return 8.0 * side ** (2.0 - q) / (q - 2.0) * angular


@lru_cache(maxsize=64)
def asymptotic_tail_mass(s: float, radius: int) -> float:
    """``sum`` of the asymptotic Laplacian kernel over ``max(|m1|, |m2|) > radius``.

    Rings up to a band radius are summed directly; beyond it the sum is
    replaced by the integral over the exterior of the square of half side
    ``band + 1/2`` with a second-order midpoint correction (error of
    relative order ``band^-4``).
    """
    s = float(s)
    radius = int(radius)
    band = max(4 * radius, radius + 400)
    total = 0.0
    chunk = 256
    for start in range(radius + 1, band + 1, chunk):
        stop = min(start + chunk, band + 1)
        k = np.arange(start, stop, dtype=float)
        # ring k: 4 axis points, 4 diagonals, 8 (k, i) points for 0 < i < k
        ring = 4.0 * kernel2d_asymptotic(s, k, 0.0) + 4.0 * kernel2d_asymptotic(s, k, k)
        i = np.arange(1, stop, dtype=float)
        kk, ii = np.meshgrid(k, i, indexing="ij")
        mask = ii < kk
        vals = np.where(mask, kernel2d_asymptotic(s, kk, ii), 0.0)
        ring = ring + 8.0 * vals.sum(axis=1)
        total += math.fsum(ring)
    # unit cells tile the exterior of the square; the midpoint rule on each
    # cell is corrected by -(1/24) int Laplacian, with Lap r^-q = q^2 r^-q-2
    q = 2.0 + 2.0 * s
    side = band + 0.5
    continuum = _square_exterior_integral(q, side) - q * q / 24.0 * _square_exterior_integral(q + 2.0, side)
    return total + c_2s(s) * continuum


@dataclass(frozen=True)
class Kernel2DTable:
    """Symmetry-reduced 2D kernel table on the octant ``0 <= m2 <= m1 <= R``.

    Attributes
    ----------
    s : float
        Signed order.
    radius : int
        Square radius ``R`` covered by the table.
    values : ndarray
        ``(R+1, R+1)`` array; only entries with ``m2 <= m1`` are meaningful,
        the rest are filled by symmetry.
    sources : ndarray
        Per-entry source tag (``quadrature``, ``asymptotic`` or ``center``).
    """

    s: float
    radius: int
    values: np.ndarray
    sources: np.ndarray
    crossover: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def value(self, m1: int, m2: int) -> float:
        a, b = sorted((abs(int(m1)), abs(int(m2))), reverse=True)
        return float(self.values[a, b])

    def source(self, m1: int, m2: int) -> str:
        a, b = sorted((abs(int(m1)), abs(int(m2))), reverse=True)
        return str(self.sources[a, b])

    def full(self) -> np.ndarray:
        """Kernel on the full square ``[-R, R]^2``; index ``[m1 + R, m2 + R]``."""
        quad = self.values
        rows = np.concatenate([quad[:0:-1], quad])
        return np.concatenate([rows[:, :0:-1], rows], axis=1)

    def to_csv(self) -> str:
        """CSV over the octant: value, power-law main term, difference, source tag."""
        lines = ["m1,m2,kernel,main_term,difference,source"]
        for a in range(self.radius + 1):
            for b in range(a + 1):
                val = self.values[a, b]
                main = kernel2d_asymptotic(self.s, a, b) if a else float("nan")
                lines.append(f"{a},{b},{val:.17g},{main:.17g},{val - main:.17g},"
                             f"{self.sources[a, b]}")
        return "\n".join(lines) + "\n"


def build_hybrid_table(s: float, radius: int, crossover: int | None = 12,
                       source: str = "hybrid") -> Kernel2DTable:
    """Assemble a 2D kernel table of signed order ``s``.

    Parameters
    ----------
    s : float
        Positive for the Laplacian power, negative for the integral.
    radius : int
        Square truncation radius.
    crossover : int
        Entries with ``max(|m1|, |m2|) <= crossover`` are computed by
        quadrature, the rest by the asymptotic power law.  Ignored unless
        ``source == "hybrid"``.
    source : {"hybrid", "asymptotic", "quadrature"}
        ``asymptotic`` is the pure power-law table; ``quadrature`` computes
        every entry (expensive beyond a few dozen rings).

    Notes
    -----
    The origin holds 0 for the Laplacian and the exact ``3F2`` value for
    the integral, whatever the source.
    """
    return _build_table(_check_signed(s), int(radius),
                        None if crossover is None else int(crossover), source)


@lru_cache(maxsize=16)
def _build_table(s, radius, crossover, source):
    if radius < 1:
        raise ConfigError(f"table radius must be >= 1, got {radius}")
    if source == "hybrid":
        if crossover is None or crossover < 1:
            raise ConfigError("hybrid tables need crossover >= 1 (ring 1 from quadrature)")
        if crossover > radius:
            raise ConfigError(f"crossover {crossover} exceeds table radius {radius}")
        n_quad = crossover
    elif source == "asymptotic":
        n_quad = 0
    elif source == "quadrature":
        n_quad = radius
    else:
        raise ConfigError(f"unknown 2D kernel source {source!r}")

    idx = np.arange(radius + 1, dtype=float)
    a, b = np.meshgrid(idx, idx, indexing="ij")
    lower = b <= a
    with np.errstate(divide="ignore"):
        safe_a = np.where((a == 0) & (b == 0), 1.0, a)
        values = np.where(lower, kernel2d_asymptotic(s, safe_a, b), 0.0)
    sources = np.full(values.shape, ASYMPTOTIC, dtype=object)

    oracle = kernel2d_ks_oracle if s > 0 else kernel2d_kminus_oracle
    for i in range(1, n_quad + 1):
        for j in range(i + 1):
            values[i, j] = oracle(abs(s), i, j)
            sources[i, j] = QUADRATURE
    values[0, 0] = 0.0 if s > 0 else kernel2d_kminus_center(-s)
    sources[0, 0] = CENTER
    # mirror the octant
    values = np.where(lower, values, values.T)
    sources = np.where(lower, sources, sources.T)
    values.setflags(write=False)
    sources.setflags(write=False)
    return Kernel2DTable(s=s, radius=radius, values=values, sources=sources,
                         crossover=crossover if source == "hybrid" else None,
                         meta={"source": source})

"""Closed-form pairs ``(u, f)`` with ``(-Delta)^s u = f`` on the real line or plane.

Every pair exposes vectorised callables so that restriction to a grid is a
single call.  Points where a closed form is not available return NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError
from .kernels1d import c_s
from .quadrature import adaptive_gauss_legendre
from .specfun import gauss_2f1

__all__ = [
    "SolutionPair",
    "gaussian_frlap_at_zero",
    "pair_gaussian",
    "pair_algebraic",
    "ball_constants",
    "ball_branches",
    "inv_frlap_ball",
    "pair_ball",
    "pair_riesz_2d",
    "riesz_constant",
    "pair_constant",
    "pv_frlap_1d",
    "catalogue",
    "get_pair",
]


@dataclass(frozen=True)
class SolutionPair:
    """A function ``u`` and its fractional Laplacian ``f``.

    Attributes
    ----------
    name : str
    dim : int
    s : float
    u, f : callable
        Vectorised; 1D callables take ``x``, 2D callables take ``(x, y)``.
    regularity : str
        Informative Holder class of ``u``, e.g. ``"C^{1,0.25}"``.
    beta, k : float, int
        Numeric form of the regularity: ``u in C^{k, beta}``.
    u_support, f_support : float, optional
        Radius of compact support, when there is one.
    u_decay, f_decay : float, optional
        Algebraic decay exponents at infinity.
    df : callable, optional
        First derivative of ``f`` (1D only).
    kinks : tuple
        Points where ``u`` or ``f`` lose smoothness; used by quadrature.
    """

    name: str
    dim: int
    s: float
    u: Callable
    f: Callable
    regularity: str = "smooth"
    beta: float = 1.0
    k: int = 0
    u_support: Optional[float] = None
    f_support: Optional[float] = None
    u_decay: Optional[float] = None
    f_decay: Optional[float] = None
    df: Optional[Callable] = None
    kinks: tuple = ()
    params: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return bool(self.params.get("degenerate", False))


def _check_s(s: float, upper: float = 1.0) -> float:
    s = float(s)
    if not 0.0 < s < upper:
        raise DomainError(f"s must lie in (0, {upper:g}), got {s}")
    return s


# --------------------------------------------------------------------------
# Gaussian
# --------------------------------------------------------------------------

def gaussian_frlap_at_zero(s: float) -> float:
    """``(-Delta)^s exp(-x^2)`` at the origin: ``4^s Gamma(1/2 + s) / sqrt(pi)``."""
    s = _check_s(s)
    return 4.0 ** s * math.gamma(0.5 + s) / math.sqrt(math.pi)


def pair_gaussian(s: float) -> SolutionPair:
    """``u = exp(-x^2)``; ``f`` is only provided at ``x = 0`` (NaN elsewhere)."""
    s = _check_s(s)
    value = gaussian_frlap_at_zero(s)

    def u(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-x * x)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where(x == 0.0, value, np.nan)

    return SolutionPair("gaussian", 1, s, u, f, "smooth", 1.0, 2)


# --------------------------------------------------------------------------
# Algebraic decay
# --------------------------------------------------------------------------

def pair_algebraic(s: float) -> SolutionPair:
    """``u = (1 + x^2)^-(1/2 - s)`` with ``f = A (1 + x^2)^-(1/2 + s)``.

    ``A = 4^s Gamma(1/2 + s) / Gamma(1/2 - s)``; needs ``0 < s < 1/2``.
    """
    s = _check_s(s, 0.5)
    amp = 4.0 ** s * math.gamma(0.5 + s) / math.gamma(0.5 - s)

    def u(x):
        x = np.asarray(x, dtype=float)
        return (1.0 + x * x) ** (-(0.5 - s))

    def f(x):
        x = np.asarray(x, dtype=float)
        return amp * (1.0 + x * x) ** (-(0.5 + s))

    def df(x):
        x = np.asarray(x, dtype=float)
        return -amp * (1.0 + 2.0 * s) * x * (1.0 + x * x) ** (-(1.5 + s))

    return SolutionPair("algebraic", 1, s, u, f, "smooth", 1.0, 2,
                        u_decay=1.0 - 2.0 * s, f_decay=1.0 + 2.0 * s, df=df,
                        params={"amplitude": amp})


# --------------------------------------------------------------------------
# Powers of (1 - |x|^2)_+ and their Riesz potentials
# --------------------------------------------------------------------------

def ball_constants(gamma: float, s: float, n: int):
    """Inside and outside constants of ``(-Delta)^{-s} (1 - |x|^2)_+^{gamma/2}``."""
    gamma = float(gamma)
    s = _check_s(s)
    if n not in (1, 2):
        raise DomainError(f"dimension must be 1 or 2, got {n}")
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if not n - 2 * s > 0:
        raise DomainError(f"the Riesz potential needs 2s < n, got s={s}, n={n}")
    common = 2.0 ** (-2.0 * s) * math.gamma(0.5 * (n - 2 * s)) * math.gamma(0.5 * gamma + 1.0)
    inside = common / (math.gamma(0.5 * (2 * s + gamma) + 1.0) * math.gamma(0.5 * n))
    outside = common / (math.gamma(0.5 * (n + gamma) + 1.0) * math.gamma(s))
    return inside, outside


def ball_branches(gamma: float, s: float, n: int, r: float):
    """Evaluate both closed-form branches of :func:`inv_frlap_ball` at ``r``.

    Valid for ``0 <= r <= 1`` (inside formula) and ``r >= 1`` (outside
    formula); only ``r = 1`` admits both, which is where they must agree.

    Returns
    -------
    (inside, outside) : tuple of float
        ``nan`` for a branch evaluated off its domain.
    """
    inside_c, outside_c = ball_constants(gamma, s, n)
    r = abs(float(r))
    a = 0.5 * (n - 2 * s)
    inside = outside = math.nan
    if r <= 1.0:
        inside = inside_c * float(gauss_2f1(a, -0.5 * (gamma + 2 * s), 0.5 * n, r * r))
    if r >= 1.0:
        outside = outside_c * r ** (2 * s - n) * float(
            gauss_2f1(a, 1.0 - s, 0.5 * (n + gamma) + 1.0, 1.0 / (r * r)))
    return inside, outside


def inv_frlap_ball(gamma: float, s: float, n: int, r):
    """``(-Delta)^{-s} (1 - |x|^2)_+^{gamma/2}`` as a function of ``r = |x|``.

    Inside the ball::

        C 2F1((n - 2s)/2, -(gamma + 2s)/2; n/2; r^2)

    and outside::

        C~ r^(2s - n) 2F1((n - 2s)/2, 1 - s; (n + gamma)/2 + 1; 1/r^2).
    """
    inside_c, outside_c = ball_constants(gamma, s, n)
    r = np.abs(np.asarray(r, dtype=float))
    out = np.empty(r.shape)
    flat_r = r.reshape(-1)
    flat = out.reshape(-1)
    ins = flat_r <= 1.0
    a = 0.5 * (n - 2 * s)
    if ins.any():
        flat[ins] = inside_c * np.asarray(
            gauss_2f1(a, -0.5 * (gamma + 2 * s), 0.5 * n, flat_r[ins] ** 2))
    if (~ins).any():
        ro = flat_r[~ins]
        flat[~ins] = outside_c * ro ** (2 * s - n) * np.asarray(
            gauss_2f1(a, 1.0 - s, 0.5 * (n + gamma) + 1.0, 1.0 / ro ** 2))
    return out if out.ndim else float(out)


_BALL_MODES = {"1s": 1.0, "2s": 2.0}


def pair_ball(mode: str, s: float, n: int = 1) -> SolutionPair:
    """``f = (1 - |x|^2)_+^{1-s}`` (``mode="1s"``) or ``^{2-s}`` (``mode="2s"``).

    ``u`` is the Riesz potential from ``inv_frlap_ball``, decaying like
    ``|x|^(2s - n)``.
    """
    if mode not in _BALL_MODES:
        raise ConfigError(f"ball mode must be '1s' or '2s', got {mode!r}")
    s = _check_s(s)
    if n == 1 and not s < 0.5:
        raise DomainError(f"the 1D ball pairs need s < 1/2, got {s}")
    expo = _BALL_MODES[mode] - s  # gamma / 2
    gamma = 2.0 * expo
    ball_constants(gamma, s, n)

    def radius(*xs):
        return np.sqrt(sum(np.asarray(x, dtype=float) ** 2 for x in xs))

    def f(*xs):
        r2 = radius(*xs) ** 2
        return np.where(r2 < 1.0, np.clip(1.0 - r2, 0.0, None) ** expo, 0.0)

    def u(*xs):
        return inv_frlap_ball(gamma, s, n, radius(*xs))

    df = None
    if n == 1:
        def df(x):
            x = np.asarray(x, dtype=float)
            inside = np.abs(x) < 1.0
            base = np.where(inside, 1.0 - x * x, 1.0)
            return np.where(inside, -2.0 * expo * x * base ** (expo - 1.0), 0.0)

    # u in C^{k, beta} with k + beta = gamma/2 + 2s
    smooth = expo + 2.0 * s
    k = int(math.floor(smooth))
    beta = smooth - k
    if beta == 0.0:
        k, beta = k - 1, 1.0
    return SolutionPair(f"ball-{mode}", n, s, u, f, f"C^{{{k},{beta:g}}}", beta, k,
                        f_support=1.0, u_decay=n - 2.0 * s, df=df, kinks=(-1.0, 1.0),
                        params={"gamma": gamma})


# --------------------------------------------------------------------------
# Riesz power in the plane
# --------------------------------------------------------------------------

def riesz_constant(alpha: float, s: float) -> float:
    """``2^{2s} Gamma(alpha/2 + s) Gamma(1 - alpha/2) / (Gamma(1 - alpha/2 - s) Gamma(alpha/2))``."""
    s = _check_s(s)
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0 - 2.0 * s:
        raise DomainError(f"need 0 < alpha < 2 - 2s, got alpha={alpha}, s={s}")
    return (2.0 ** (2.0 * s) * math.gamma(0.5 * alpha + s) * math.gamma(1.0 - 0.5 * alpha)
            / (math.gamma(1.0 - 0.5 * alpha - s) * math.gamma(0.5 * alpha)))


def pair_riesz_2d(alpha: float, s: float) -> SolutionPair:
    """``u = |x|^-alpha`` and ``f = const |x|^(-alpha - 2s)`` in the plane."""
    const = riesz_constant(alpha, s)

    def u(x, y):
        return np.hypot(x, y) ** (-alpha)

    def f(x, y):
        return const * np.hypot(x, y) ** (-alpha - 2.0 * s)

    return SolutionPair("riesz2d", 2, float(s), u, f, "singular at 0", 1.0, 0,
                        u_decay=float(alpha), f_decay=float(alpha) + 2.0 * s,
                        params={"alpha": float(alpha), "constant": const})


def pair_constant(s: float, value: float = 1.0, dim: int = 1) -> SolutionPair:
    """``u`` constant, ``f = 0``: the degenerate pair."""
    s = _check_s(s)
    if dim == 1:
        u = lambda x: np.full(np.shape(x), float(value))  # noqa: E731
        f = lambda x: np.zeros(np.shape(x))  # noqa: E731
        df = f
    else:
        u = lambda x, y: np.full(np.broadcast(x, y).shape, float(value))  # noqa: E731
        f = lambda x, y: np.zeros(np.broadcast(x, y).shape)  # noqa: E731
        df = None
    return SolutionPair("constant", dim, s, u, f, "smooth", 1.0, 2, df=df,
                        params={"degenerate": True, "value": float(value)})


# --------------------------------------------------------------------------
# Singular-integral oracle (1D)
# --------------------------------------------------------------------------

def pv_frlap_1d(u: Callable, x: float, s: float, *, kinks=(), decay: Optional[float] = None,
                z_min: float = 1e-5, z_max: float = 1e7, rtol: float = 1e-9) -> float:
    """``(-Delta)^s u(x)`` from the singular integral, by quadrature.

    Uses ``c_s int_0^inf (2u(x) - u(x+z) - u(x-z)) z^(-1-2s) dz`` with
    ``c_s = 4^s Gamma(1/2+s) / (sqrt(pi) |Gamma(-s)|)``.  The integral runs
    in ``log z``; below ``z_min`` the second difference is treated as
    quadratic in ``z``, above ``z_max`` the ``2u(x)`` part is integrated
    exactly and the shifted values are extrapolated with the decay exponent.
    """
    s = _check_s(s)
    x = float(x)
    ux = float(u(np.array([x]))[0])

    def second_diff(z):
        return 2.0 * ux - u(x + z) - u(x - z)

    def integrand(v):
        z = np.exp(v)
        return second_diff(z) * z ** (-2.0 * s)

    # rounding in the second difference is amplified by z^-2s near z_min
    atol = 1e-13 * max(1.0, abs(ux)) * z_min ** (-2.0 * s)
    cuts = sorted({math.log(abs(k - x)) for k in kinks
                   if z_min < abs(k - x) < z_max})
    edges = [math.log(z_min), *cuts, math.log(z_max)]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += adaptive_gauss_legendre(integrand, a, b, rtol=rtol, atol=atol,
                                         max_rounds=60).value

    d0 = float(second_diff(np.array([z_min]))[0])
    total += d0 / z_min ** 2 * z_min ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)

    total += 2.0 * ux * z_max ** (-2.0 * s) / (2.0 * s)
    if decay is not None:
        far = float(u(np.array([x + z_max]))[0] + u(np.array([x - z_max]))[0])
        total -= far * z_max ** (-2.0 * s) / (2.0 * s + decay)
    return c_s(s) * total


# --------------------------------------------------------------------------
# Catalogue
# --------------------------------------------------------------------------

def catalogue() -> dict:
    """Names of the built-in pairs with a one-line description."""
    return {
        "gaussian": "u = exp(-x^2) in 1D; f known at x = 0",
        "algebraic": "u = (1 + x^2)^-(1/2 - s) in 1D, 0 < s < 1/2",
        "ball-1s": "f = (1 - |x|^2)_+^(1-s), u its Riesz potential (1D or 2D)",
        "ball-2s": "f = (1 - |x|^2)_+^(2-s), u its Riesz potential (1D or 2D)",
        "riesz2d": "u = |x|^-alpha in 2D, 0 < alpha < 2 - 2s",
        "constant": "u constant, f = 0 (degenerate)",
    }


def get_pair(name: str, s: float, dim: int = 1, alpha: float = 0.5) -> SolutionPair:
    """Build a catalogued pair by name."""
    if name == "gaussian":
        if dim != 1:
            raise ConfigError("the gaussian pair is 1D")
        return pair_gaussian(s)
    if name == "algebraic":
        if dim != 1:
            raise ConfigError("the algebraic pair is 1D")
        return pair_algebraic(s)
    if name in ("ball-1s", "ball-2s"):
        return pair_ball(name[5:], s, dim)
    if name == "riesz2d":
        if dim != 2:
            raise ConfigError("the riesz2d pair is 2D")
        return pair_riesz_2d(alpha, s)
    if name == "constant":
        return pair_constant(s, dim=dim)
    raise ConfigError(f"unknown pair {name!r}; choose from {sorted(catalogue())}")

"""Lattice operators: fractional powers of the discrete Laplacian, the heat
semigroup, difference quotients and discrete Holder seminorms.

Inputs are ``LatticeSampler`` objects (total functions on Z or Z^2) because
every operator here is nonlocal; outputs are ``GridFunction`` values on a
finite ``GridWindow``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels1d, kernels2d
from .errors import ConfigError, DomainError, QuadratureError, TruncationError
from .quadrature import _hankel_coeffs, _small_t_coeffs, adaptive_gauss_legendre
from .specfun import bessel_i_scaled, bessel_i_scaled_orders, hurwitz_zeta

__all__ = [
    "LatticeSampler",
    "GridWindow",
    "OperatorConfig",
    "HeatConfig",
    "GridFunction",
    "apply_frlap_1d",
    "apply_frint_1d",
    "apply_frlap_2d",
    "apply_frint_2d",
    "heat_apply",
    "heat_truncation",
    "frlap_semigroup_oracle",
    "discrete_laplacian_1d",
    "d_plus",
    "d_minus",
    "difference_sampler",
    "holder_seminorm",
    "holder_norm",
]

TAIL_MODES = ("zero", "ignore", "sampled")
KERNEL_SOURCES = ("closed_form", "quadrature", "asymptotic", "hybrid")

_ROW_BUDGET = 4_000_000  # max entries of one dense block in the kernel sums


# --------------------------------------------------------------------------
# Data types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSampler:
    """A function on Z (dim 1) or Z^2 (dim 2), evaluated on index arrays.

    Parameters
    ----------
    func : callable
        Vectorised: ``func(j)`` in 1D, ``func(j1, j2)`` in 2D, integer arrays
        in, float array of the same shape out.
    dim : int
    support_radius : int, optional
        Declares ``func == 0`` whenever ``max |j_i| > support_radius``.
    decay_exponent : float, optional
        Declares ``|func(j)| ~ |j|^-decay_exponent`` for large ``|j|``.
    """

    func: Callable
    dim: int = 1
    support_radius: Optional[int] = None
    decay_exponent: Optional[float] = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dimension must be 1 or 2, got {self.dim}")

    def values(self, *idx):
        idx = [np.asarray(i, dtype=np.int64) for i in idx]
        if len(idx) != self.dim:
            raise ConfigError(f"expected {self.dim} index arrays, got {len(idx)}")
        shape = np.broadcast(*idx).shape
        out = np.asarray(self.func(*idx), dtype=float)
        out = np.broadcast_to(out, shape).astype(float)
        if self.support_radius is not None:
            outside = np.zeros(shape, dtype=bool)
            for i in idx:
                outside |= np.abs(i) > self.support_radius
            out = np.where(outside, 0.0, out)
        return out

    def value(self, *index) -> float:
        return float(self.values(*[np.asarray(i) for i in index]))

    def __call__(self, *idx):
        return self.values(*idx)

    @classmethod
    def from_array(cls, start: int, data, dim: int = 1) -> "LatticeSampler":
        """Finitely supported sampler from an array whose first entry sits at ``start``."""
        data = np.asarray(data, dtype=float)
        if dim != 1:
            raise ConfigError("from_array supports 1D data only")
        stop = start + data.size

        def func(j):
            inside = (j >= start) & (j < stop)
            return np.where(inside, data[np.clip(j - start, 0, data.size - 1)], 0.0)

        radius = max(abs(start), abs(stop - 1))
        return cls(func, 1, support_radius=radius)

    @classmethod
    def impulse(cls, dim: int = 1) -> "LatticeSampler":
        if dim == 1:
            return cls(lambda j: (j == 0).astype(float), 1, support_radius=0)
        return cls(lambda a, b: ((a == 0) & (b == 0)).astype(float), 2, support_radius=0)

    @classmethod
    def constant(cls, c: float = 1.0, dim: int = 1) -> "LatticeSampler":
        if dim == 1:
            return cls(lambda j: np.full(np.shape(j), float(c)), 1)
        return cls(lambda a, b: np.full(np.broadcast(a, b).shape, float(c)), 2)


@dataclass(frozen=True)
class GridWindow:
    """Rectangular index window with mesh size ``h``.

    ``ranges`` holds one inclusive ``(lo, hi)`` pair per axis.  With
    ``offset[i]`` set, grid point ``j`` on axis ``i`` sits at ``h (j + 1/2)``.
    """

    h: float
    ranges: tuple
    offset: tuple = ()

    def __post_init__(self):
        if not self.h > 0 or not math.isfinite(self.h):
            raise ConfigError(f"mesh size must be positive, got {self.h}")
        ranges = tuple((int(lo), int(hi)) for lo, hi in self.ranges)
        if not ranges or len(ranges) > 2:
            raise ConfigError("window must have one or two axes")
        for lo, hi in ranges:
            if hi < lo:
                raise ConfigError(f"empty index range {lo}:{hi}")
        offset = tuple(bool(o) for o in self.offset) or (False,) * len(ranges)
        if len(offset) != len(ranges):
            raise ConfigError("offset flags must match the number of axes")
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def symmetric(cls, h: float, half_width: int, dim: int = 1, offset: bool = False):
        return cls(h, ((-half_width, half_width),) * dim, (offset,) * dim)

    @property
    def dim(self) -> int:
        return len(self.ranges)

    @property
    def shape(self) -> tuple:
        return tuple(hi - lo + 1 for lo, hi in self.ranges)

    def indices(self, axis: int = 0) -> np.ndarray:
        lo, hi = self.ranges[axis]
        return np.arange(lo, hi + 1)

    def coords(self, axis: int = 0) -> np.ndarray:
        shift = 0.5 if self.offset[axis] else 0.0
        return self.h * (self.indices(axis) + shift)

    def mesh(self):
        """Index arrays (``ij`` ordering) covering the window."""
        if self.dim == 1:
            return (self.indices(0),)
        return tuple(np.meshgrid(self.indices(0), self.indices(1), indexing="ij"))

    def mesh_coords(self):
        if self.dim == 1:
            return (self.coords(0),)
        return tuple(np.meshgrid(self.coords(0), self.coords(1), indexing="ij"))

    def max_index(self) -> int:
        return max(max(abs(lo), abs(hi)) for lo, hi in self.ranges)

    def to_dict(self) -> dict:
        return {"h": self.h, "ranges": [list(r) for r in self.ranges],
                "offset": list(self.offset)}


@dataclass(frozen=True)
class OperatorConfig:
    """Truncation and kernel choices for the fractional operators.

    Attributes
    ----------
    s : float
        Signed order.  ``apply_frlap_*`` need ``0 < s < 1``; ``apply_frint_*``
        take ``|s| < 1/2`` and accept either sign.
    N : int
        Radius of the near sum (``|m| <= N``, max-norm in 2D).
    tail_mode : {"zero", "ignore", "sampled"}
        ``zero`` asserts the input vanishes beyond reach, ``ignore`` drops
        the far sum, ``sampled`` extends it to radius ``M``.
    M : int, optional
        Outer radius for ``sampled``.
    kernel_source : {"closed_form", "quadrature", "asymptotic", "hybrid"}
        1D supports the first three; 2D supports the last three.
    crossover : int
        Quadrature radius of the hybrid 2D table.
    f2_form : {"exact", "power"}
        1D mass of the kernel beyond ``N``: exact, or the power-law sum
        ``2 c_s zeta(1 + 2s, N + 1)``.
    """

    s: float
    N: int
    tail_mode: str = "ignore"
    M: Optional[int] = None
    kernel_source: Optional[str] = None
    crossover: int = 12
    f2_form: str = "exact"

    def __post_init__(self):
        if not self.N >= 1:
            raise ConfigError(f"truncation radius N must be >= 1, got {self.N}")
        if self.tail_mode not in TAIL_MODES:
            raise ConfigError(f"tail_mode must be one of {TAIL_MODES}, got {self.tail_mode!r}")
        if self.tail_mode == "sampled":
            if self.M is None or not self.M > self.N:
                raise ConfigError("sampled tail mode needs an outer radius M > N")
        if self.kernel_source is not None and self.kernel_source not in KERNEL_SOURCES:
            raise ConfigError(f"unknown kernel source {self.kernel_source!r}")
        if self.f2_form not in ("exact", "power"):
            raise ConfigError(f"f2_form must be 'exact' or 'power', got {self.f2_form!r}")
        if not self.s or not math.isfinite(self.s):
            raise ConfigError("order s must be nonzero and finite")

    @property
    def reach(self) -> int:
        return self.M if self.tail_mode == "sampled" else self.N


@dataclass(frozen=True)
class HeatConfig:
    """Time and Bessel-order truncation for the lattice heat semigroup."""

    t: float
    K: Optional[int] = None

    def __post_init__(self):
        if not self.t >= 0 or not math.isfinite(self.t):
            raise ConfigError(f"time must be nonnegative, got {self.t}")
        if self.K is not None and self.K < 1:
            raise ConfigError(f"truncation K must be >= 1, got {self.K}")


@dataclass
class GridFunction:
    """Values on a ``GridWindow`` plus optional reference columns."""

    window: GridWindow
    values: np.ndarray
    columns: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.window.shape:
            raise ConfigError(
                f"values of shape {self.values.shape} do not match window {self.window.shape}"
            )

    def with_reference(self, exact) -> "GridFunction":
        """Attach ``exact`` and pointwise ``error = value - exact`` columns."""
        exact = np.asarray(exact, dtype=float)
        cols = dict(self.columns, exact=exact, error=self.values - exact)
        return GridFunction(self.window, self.values, cols, dict(self.meta))

    def sup_error(self) -> float:
        if "error" not in self.columns:
            raise ConfigError("no reference attached")
        return float(np.nanmax(np.abs(self.columns["error"])))

    def to_csv(self, header: Sequence[str] = ()) -> str:
        """CSV text; ``header`` lines are emitted first, prefixed with ``#``."""
        names = list(self.columns)
        lines = [f"# {line}" for line in header]
        if self.window.dim == 1:
            lines.append(",".join(["j", "x", "value", *names]))
            for k, (j, x) in enumerate(zip(self.window.indices(0), self.window.coords(0))):
                row = [str(j), _fmt(x), _fmt(self.values[k])]
                row += [_fmt(self.columns[n][k]) for n in names]
                lines.append(",".join(row))
        else:
            lines.append(",".join(["j1", "j2", "x", "y", "value", *names]))
            i0, i1 = self.window.indices(0), self.window.indices(1)
            x0, x1 = self.window.coords(0), self.window.coords(1)
            for a in range(i0.size):
                for b in range(i1.size):
                    row = [str(i0[a]), str(i1[b]), _fmt(x0[a]), _fmt(x1[b]),
                           _fmt(self.values[a, b])]
                    row += [_fmt(self.columns[n][a, b]) for n in names]
                    lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json(self, **extra) -> str:
        doc = {
            "window": self.window.to_dict(),
            "shape": list(self.window.shape),
            "values": _json_list(self.values.ravel()),
            "columns": {k: _json_list(np.asarray(v).ravel()) for k, v in self.columns.items()},
            "meta": self.meta,
        }
        doc.update(extra)
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _json_list(arr):
    return [None if not math.isfinite(v) else float(v) for v in arr]


# --------------------------------------------------------------------------
# 1D operators
# --------------------------------------------------------------------------

def _check_zero_tail(sampler: LatticeSampler, w: GridWindow, radius: int):
    if sampler.support_radius is None:
        raise ConfigError("tail_mode='zero' needs a sampler with declared compact support")
    if sampler.support_radius + w.max_index() > radius:
        raise ConfigError(
            f"support radius {sampler.support_radius} is not within N={radius} of every "
            f"window point; use a larger N or another tail mode"
        )


def _kernel_1d(s: float, radius: int, source: str) -> np.ndarray:
    """Kernel values for m = 0..radius, signed order."""
    if source in (None, "closed_form"):
        return kernels1d.kernel_table(s, radius).values
    m = np.arange(radius + 1)
    order = abs(s)
    if source == "asymptotic":
        out = np.zeros(radius + 1)
        if s > 0:
            out[1:] = kernels1d.c_s(order) / m[1:] ** (1.0 + 2.0 * order)
        else:
            out[1:] = kernels1d.c_minus_s(order) / m[1:] ** (1.0 - 2.0 * order)
            out[0] = kernels1d.kernel_kminus(order, 0)
        return out
    if source == "quadrature":
        if s > 0:
            return np.array([0.0] + [kernels1d.kernel_ks_oracle(order, k) for k in m[1:]])
        return np.array([kernels1d.kernel_kminus_oracle(order, k) for k in m])
    raise ConfigError(f"kernel source {source!r} is not available in 1D")


def _correlate_rows(u_ext: np.ndarray, kernel_full: np.ndarray, n_out: int) -> np.ndarray:
    """``out[i] = sum_k kernel_full[k] * u_ext[i + k]`` with a fixed summation order."""
    width = kernel_full.size
    out = np.empty(n_out)
    rows = max(1, _ROW_BUDGET // width)
    view = np.lib.stride_tricks.sliding_window_view(u_ext, width)
    for start in range(0, n_out, rows):
        stop = min(start + rows, n_out)
        block = view[start:stop] * kernel_full
        out[start:stop] = block.sum(axis=1)
    return out


def _mirror(half: np.ndarray) -> np.ndarray:
    """Kernel on offsets -R..R from values on 0..R."""
    return np.concatenate([half[:0:-1], half])


def apply_frlap_1d(u: LatticeSampler, w: GridWindow, cfg: OperatorConfig) -> GridFunction:
    """Apply ``(-Delta_h)^s`` to ``u`` on the window ``w``.

    The result is ``h^-2s (F1 + F2 + F3)``: the near sum
    ``F1 = sum_{0<|m|<=N} (u_j - u_{j-m}) K_s(m)``, the far-field self term
    ``F2 = u_j sum_{|m|>N} K_s(m)`` and the far sum
    ``F3 = -sum_{|m|>N} u_{j-m} K_s(m)``, which is dropped (``ignore`` and
    ``zero``) or sampled out to radius ``M``.
    """
    s = float(cfg.s)
    if not 0 < s < 1:
        raise DomainError(f"apply_frlap_1d needs 0 < s < 1, got {s}")
    if u.dim != 1 or w.dim != 1:
        raise ConfigError("apply_frlap_1d works on 1D samplers and windows")
    N = int(cfg.N)
    if cfg.tail_mode == "zero":
        _check_zero_tail(u, w, N)
    reach = cfg.reach
    kern = _kernel_1d(s, reach, cfg.kernel_source)
    j = w.indices(0)
    u_ext = u.values(np.arange(j[0] - reach - 1, j[-1] + reach + 2))
    u_j = u_ext[reach + 1: reach + 1 + j.size]

    # F1 in difference form
    near = kern[: N + 1].copy()
    near[0] = 0.0
    k_full = _mirror(near)
    width = k_full.size
    view = np.lib.stride_tricks.sliding_window_view(u_ext[reach + 1 - N: reach + 1 + j.size + N], width)
    f1 = np.empty(j.size)
    rows = max(1, _ROW_BUDGET // width)
    for start in range(0, j.size, rows):
        stop = min(start + rows, j.size)
        diff = u_j[start:stop, None] - view[start:stop, ::-1]
        f1[start:stop] = (diff * k_full).sum(axis=1)

    f2 = u_j * _tail_mass_1d(s, N, cfg.f2_form, kern)

    f3 = np.zeros(j.size)
    if cfg.tail_mode == "sampled":
        M = int(cfg.M)
        far = kern.copy()
        far[: N + 1] = 0.0
        far_full = _mirror(far)
        f3 = -_correlate_rows(u_ext[1:-1], far_full[::-1], j.size)
        f3 -= _closure_1d(u, j, M, s, kernels1d.kernel_table(s, M).tail_mass)

    out = (f1 + f2 + f3) * w.h ** (-2.0 * s)
    meta = {"operator": "frlap", "s": s, "N": N, "tail_mode": cfg.tail_mode, "M": cfg.M,
            "kernel_source": cfg.kernel_source or "closed_form", "f2_form": cfg.f2_form}
    return GridFunction(w, out, meta=meta)


def _tail_mass_1d(s, N, form, kern) -> float:
    if form == "power":
        return 2.0 * kernels1d.c_s(s) * hurwitz_zeta(1.0 + 2.0 * s, N + 1.0)
    return kernels1d.kernel_table(s, N).tail_mass


def _closure_1d(u, j, M, s_eff, tail_mass):
    """Estimate of ``sum_{|m|>M} K(m) u_{j-m}`` from the samples at ``j -+ (M+1)``.

    Uses ``u_{j-m} ~ u_{j-M-1} ((M+1)/m)^p`` with the sampler's decay
    exponent ``p`` (0 when undeclared) and the kernel's power law.
    """
    if u.support_radius is not None:
        return np.zeros(j.size)
    edge = 0.5 * (u.values(j - M - 1) + u.values(j + M + 1))
    p = u.decay_exponent or 0.0
    if p == 0.0:
        return edge * tail_mass
    power = 1.0 + 2.0 * s_eff
    ratio = hurwitz_zeta(power + p, M + 1.0) * (M + 1.0) ** p / hurwitz_zeta(power, M + 1.0)
    return edge * tail_mass * ratio


def apply_frint_1d(f: LatticeSampler, w: GridWindow, cfg: OperatorConfig) -> GridFunction:
    """Apply ``(-Delta_h)^{-s}``: ``h^{2s} sum_m K_{-s}(m) f_{j-m}``.

    The near sum covers ``|m| <= N`` including ``m = 0``; the far sum is
    dropped or sampled to ``M`` as in ``apply_frlap_1d``.
    """
    s = abs(float(cfg.s))
    if not 0 < s < 0.5:
        raise DomainError(f"apply_frint_1d needs 0 < s < 1/2, got {s}")
    if f.dim != 1 or w.dim != 1:
        raise ConfigError("apply_frint_1d works on 1D samplers and windows")
    N = int(cfg.N)
    if cfg.tail_mode == "zero":
        _check_zero_tail(f, w, N)
    reach = cfg.reach
    kern = _kernel_1d(-s, reach, cfg.kernel_source)
    j = w.indices(0)

    if f.support_radius is not None:
        # only offsets that reach the support contribute
        R0 = f.support_radius
        sup = np.arange(-R0, R0 + 1)
        f_sup = f.values(sup)
        offs = j[:, None] - sup[None, :]
        within = np.abs(offs) <= reach
        kv = np.where(within, kern[np.minimum(np.abs(offs), reach)], 0.0)
        out = (kv * f_sup).sum(axis=1)
    else:
        f_ext = f.values(np.arange(j[0] - reach, j[-1] + reach + 1))
        k_full = _mirror(kern)
        out = _correlate_rows(f_ext, k_full[::-1], j.size)
        if cfg.tail_mode == "sampled":
            p = f.decay_exponent
            if p is not None and p > 2 * s:
                M = int(cfg.M)
                c = kernels1d.c_minus_s(s)
                tail = 2.0 * c * hurwitz_zeta(1.0 - 2.0 * s + p, M + 1.0) * (M + 1.0) ** p
                edge = 0.5 * (f.values(j - M - 1) + f.values(j + M + 1))
                out = out + edge * tail
    out = out * w.h ** (2.0 * s)
    meta = {"operator": "frint", "s": s, "N": N, "tail_mode": cfg.tail_mode, "M": cfg.M,
            "kernel_source": cfg.kernel_source or "closed_form"}
    return GridFunction(w, out, meta=meta)


def discrete_laplacian_1d(u: LatticeSampler, w: GridWindow) -> GridFunction:
    """``-Delta_h u_j = -(u_{j+1} - 2 u_j + u_{j-1}) / h^2``."""
    j = w.indices(0)
    vals = -(u.values(j + 1) - 2.0 * u.values(j) + u.values(j - 1)) / w.h ** 2
    return GridFunction(w, vals, meta={"operator": "laplacian"})


# --------------------------------------------------------------------------
# 2D operators
# --------------------------------------------------------------------------

def _table_2d(s: float, radius: int, cfg: OperatorConfig) -> kernels2d.Kernel2DTable:
    source = cfg.kernel_source or "hybrid"
    if source == "closed_form":
        raise ConfigError("no closed-form kernel exists in 2D; use hybrid, asymptotic or quadrature")
    crossover = min(int(cfg.crossover), radius) if source == "hybrid" else None
    return kernels2d.build_hybrid_table(s, radius, crossover, source)


def _window_sums_2d(u_ext, kernel_full, shape, center_vals=None):
    """``out[a, b] = sum_m kernel_full[m] * (c[a, b] - u_ext[a + R - m1, b + R - m2])``.

    With ``center_vals`` None the plain correlation ``sum K u`` is returned.
    """
    R = (kernel_full.shape[0] - 1) // 2
    flipped = kernel_full[::-1, ::-1]
    out = np.empty(shape)
    for a in range(shape[0]):
        for b in range(shape[1]):
            patch = u_ext[a: a + 2 * R + 1, b: b + 2 * R + 1]
            if center_vals is None:
                out[a, b] = (patch * flipped).sum()
            else:
                out[a, b] = ((center_vals[a, b] - patch) * flipped).sum()
    return out


def _sparse_sums_2d(f: LatticeSampler, w: GridWindow, table_full: np.ndarray, R: int):
    """``sum_m K(m) f_{j-m}`` using only the declared support of ``f``."""
    R0 = f.support_radius
    sup = np.arange(-R0, R0 + 1)
    s1, s2 = np.meshgrid(sup, sup, indexing="ij")
    fv = f.values(s1, s2)
    nz = fv != 0
    s1, s2, fv = s1[nz], s2[nz], fv[nz]
    j1, j2 = w.mesh()
    out = np.zeros(w.shape)
    for a in range(w.shape[0]):
        for b in range(w.shape[1]):
            o1 = j1[a, b] - s1
            o2 = j2[a, b] - s2
            ok = (np.abs(o1) <= R) & (np.abs(o2) <= R)
            out[a, b] = (table_full[o1[ok] + R, o2[ok] + R] * fv[ok]).sum()
    return out


def apply_frlap_2d(u: LatticeSampler, w: GridWindow, cfg: OperatorConfig) -> GridFunction:
    """Apply ``(-Delta_h)^s`` on Z^2 with the near sum over ``max |m_i| <= N``.

    ``ignore`` drops the remainder entirely.  ``zero`` adds the self term
    ``u_j sum_{|m|>N} K(m)`` (exact for compact data within reach);
    ``sampled`` also sums ``u_{j-m}`` against the asymptotic kernel up to
    radius ``M`` and closes with the ring average beyond.
    """
    s = float(cfg.s)
    if not 0 < s < 1:
        raise DomainError(f"apply_frlap_2d needs 0 < s < 1, got {s}")
    if u.dim != 2 or w.dim != 2:
        raise ConfigError("apply_frlap_2d works on 2D samplers and windows")
    N = int(cfg.N)
    if cfg.tail_mode == "zero":
        _check_zero_tail(u, w, N)
    table = _table_2d(s, N, cfg)
    k_full = table.full()
    (lo1, hi1), (lo2, hi2) = w.ranges
    j1, j2 = w.mesh()
    u_j = u.values(j1, j2)
    total = float(k_full.sum())

    if u.support_radius is not None and (2 * u.support_radius + 1) ** 2 < k_full.size:
        near = u_j * total - _sparse_sums_2d(u, w, k_full, N)
    else:
        e1 = np.arange(lo1 - N, hi1 + N + 1)
        e2 = np.arange(lo2 - N, hi2 + N + 1)
        u_ext = u.values(*np.meshgrid(e1, e2, indexing="ij"))
        near = _window_sums_2d(u_ext, k_full, w.shape, u_j)

    rest = np.zeros(w.shape)
    if cfg.tail_mode in ("zero", "sampled"):
        rest = u_j * kernels2d.asymptotic_tail_mass(s, N)
    if cfg.tail_mode == "sampled":
        rest -= _band_sums_2d(u, w, s, N, int(cfg.M))
        if u.support_radius is None:
            rest -= _ring_mean_2d(u, w, int(cfg.M) + 1) * kernels2d.asymptotic_tail_mass(s, int(cfg.M))
    out = (near + rest) * w.h ** (-2.0 * s)
    meta = {"operator": "frlap", "s": s, "N": N, "tail_mode": cfg.tail_mode, "M": cfg.M,
            "kernel_source": table.meta.get("source"), "crossover": table.crossover}
    return GridFunction(w, out, meta=meta)


def _band_sums_2d(u, w, s, N, M):
    """``sum_{N < max|m| <= M} K_asym(m) u_{j-m}`` for every window point."""
    j1, j2 = w.mesh()
    out = np.zeros(w.shape)
    rng = np.arange(-M, M + 1)
    m1, m2 = np.meshgrid(rng, rng, indexing="ij")
    band = np.maximum(np.abs(m1), np.abs(m2)) > N
    m1, m2 = m1[band], m2[band]
    kv = kernels2d.kernel2d_asymptotic(s, m1, m2)
    for a in range(w.shape[0]):
        for b in range(w.shape[1]):
            out[a, b] = (kv * u.values(j1[a, b] - m1, j2[a, b] - m2)).sum()
    return out


def _ring_mean_2d(u, w, radius):
    j1, j2 = w.mesh()
    k = np.arange(-radius, radius + 1)
    ring1 = np.concatenate([k, k, np.full(k.size, -radius), np.full(k.size, radius)])
    ring2 = np.concatenate([np.full(k.size, -radius), np.full(k.size, radius), k, k])
    out = np.empty(w.shape)
    for a in range(w.shape[0]):
        for b in range(w.shape[1]):
            out[a, b] = u.values(j1[a, b] - ring1, j2[a, b] - ring2).mean()
    return out


def apply_frint_2d(f: LatticeSampler, w: GridWindow, cfg: OperatorConfig) -> GridFunction:
    """Apply ``(-Delta_h)^{-s}`` on Z^2 including the exact center value ``K_{-s}(0)``."""
    s = abs(float(cfg.s))
    if not 0 < s < 0.5:
        raise DomainError(f"apply_frint_2d needs 0 < s < 1/2, got {s}")
    if f.dim != 2 or w.dim != 2:
        raise ConfigError("apply_frint_2d works on 2D samplers and windows")
    N = int(cfg.N)
    if cfg.tail_mode == "zero":
        _check_zero_tail(f, w, N)
    if cfg.tail_mode == "sampled":
        raise ConfigError("the 2D integral kernel is not summable; use 'zero' or 'ignore'")
    table = _table_2d(-s, N, cfg)
    k_full = table.full()
    (lo1, hi1), (lo2, hi2) = w.ranges
    if f.support_radius is not None and (2 * f.support_radius + 1) ** 2 < k_full.size:
        out = _sparse_sums_2d(f, w, k_full, N)
    else:
        e1 = np.arange(lo1 - N, hi1 + N + 1)
        e2 = np.arange(lo2 - N, hi2 + N + 1)
        f_ext = f.values(*np.meshgrid(e1, e2, indexing="ij"))
        out = _window_sums_2d(f_ext, k_full, w.shape)
    out = out * w.h ** (2.0 * s)
    meta = {"operator": "frint", "s": s, "N": N, "tail_mode": cfg.tail_mode,
            "kernel_source": table.meta.get("source"), "crossover": table.crossover}
    return GridFunction(w, out, meta=meta)


# --------------------------------------------------------------------------
# Heat semigroup
# --------------------------------------------------------------------------

_HEAT_TOL = 1e-16


def _heat_tail_bound(K: int, arg: float) -> float:
    if arg == 0.0:
        return 0.0
    return math.exp(K * (1.0 + math.log(arg / K))) / math.sqrt(2.0 * math.pi * K)


def heat_truncation(t: float, h: float, tol: float = _HEAT_TOL) -> int:
    """Smallest ``K`` with ``(e x / K)^K / sqrt(2 pi K) < tol`` where ``x = 2t/h^2``."""
    arg = 2.0 * t / h ** 2
    K = 1
    while _heat_tail_bound(K, arg) >= tol:
        K += 1
    return K


def _heat_weights(hc: HeatConfig, h: float) -> np.ndarray:
    """``G(m, t/h^2)`` for ``m = -K..K``."""
    arg = 2.0 * hc.t / h ** 2
    if hc.K is None:
        K = heat_truncation(hc.t, h)
    else:
        K = int(hc.K)
        bound = _heat_tail_bound(K, arg)
        if bound >= 1e-10:
            raise TruncationError(
                f"heat truncation K={K} leaves a tail bound {bound:.3g} at 2t/h^2={arg:.4g}"
            )
    half = bessel_i_scaled_orders(K, arg)
    return _mirror(half)


def heat_apply(u: LatticeSampler, w: GridWindow, hc: HeatConfig) -> GridFunction:
    """Evolve ``u`` by the lattice heat semigroup ``e^{t Delta_h}`` on the window ``w``.

    The 2D kernel is the product of two 1D kernels and is applied one axis
    at a time.
    """
    if u.dim != w.dim:
        raise ConfigError("sampler and window dimensions differ")
    weights = _heat_weights(hc, w.h)
    K = (weights.size - 1) // 2
    if w.dim == 1:
        j = w.indices(0)
        u_ext = u.values(np.arange(j[0] - K, j[-1] + K + 1))
        out = _correlate_rows(u_ext, weights, j.size)
    else:
        (lo1, hi1), (lo2, hi2) = w.ranges
        e1 = np.arange(lo1 - K, hi1 + K + 1)
        e2 = np.arange(lo2 - K, hi2 + K + 1)
        u_ext = u.values(*np.meshgrid(e1, e2, indexing="ij"))
        view1 = np.lib.stride_tricks.sliding_window_view(u_ext, weights.size, axis=0)
        stage = view1 @ weights
        view2 = np.lib.stride_tricks.sliding_window_view(stage, weights.size, axis=1)
        out = view2 @ weights
    return GridFunction(w, out, meta={"operator": "heat", "t": hc.t, "K": K})


# --------------------------------------------------------------------------
# Semigroup-definition oracle
# --------------------------------------------------------------------------

def frlap_semigroup_oracle(u: LatticeSampler, j: int, s: float, h: float = 1.0,
                           rtol: float = 1e-11) -> float:
    """``(-Delta_h)^s u_j`` from the heat-semigroup integral.

    Evaluates ``(h^-2s / Gamma(-s)) int_0^inf (e^{tau Delta_1} u_j - u_j) tau^(-1-s) dtau``
    in the lattice variable ``tau = t/h^2``.  ``u`` must have compact support.
    The integrand is assembled as ``sum_{m != 0} G(m, tau) u_{j-m} - u_j (1 - G(0, tau))``
    with ``1 - G(0, tau)`` summed from its positive terms for small ``tau``.
    """
    s = float(s)
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if u.dim != 1 or u.support_radius is None:
        raise ConfigError("the semigroup oracle needs a 1D sampler with compact support")
    R0 = int(u.support_radius)
    j = int(j)
    support = np.arange(-R0, R0 + 1)
    offsets = j - support
    u_sup = u.values(support)
    keep = (offsets != 0) & (u_sup != 0)
    offsets, u_off = offsets[keep], u_sup[keep]
    u_j = u.value(j)
    m_max = int(max(np.abs(offsets).max(initial=0), 1))

    n_series = 14
    tau0 = 1e-3
    tau1 = max(200.0, 5.0 * m_max ** 2)

    def integrand(x):
        tau = np.exp(x)
        acc = np.zeros_like(tau)
        for m, val in zip(offsets, u_off):
            acc += val * bessel_i_scaled(int(m), 2.0 * tau)
        if u_j != 0.0:
            small = tau < 1.0
            comp = np.empty_like(tau)
            if small.any():
                ts = 2.0 * tau[small]
                terms = sum(bessel_i_scaled(k, ts) for k in range(1, 40))
                comp[small] = 2.0 * terms
            if (~small).any():
                comp[~small] = 1.0 - bessel_i_scaled(0, 2.0 * tau[~small])
            acc -= u_j * comp
        return acc * np.exp(-s * x)

    core = adaptive_gauss_legendre(integrand, math.log(tau0), math.log(tau1), rtol=0.1 * rtol)

    # tau in (0, tau0): power series of the integrand
    series = np.zeros(n_series)
    for m, val in zip(offsets, u_off):
        m = abs(int(m))
        if m < n_series:
            series[m:] += val * _small_t_coeffs(m, n_series - m)
    g0 = _small_t_coeffs(0, n_series)
    series[1:] += u_j * g0[1:]  # -u_j (1 - G0) = u_j (G0 - 1)
    k = np.arange(1, n_series)
    low = float(np.sum(series[1:] * tau0 ** (k - s) / (k - s)))

    # tau in (tau1, inf): -u_j tau^-s plus Hankel expansion of every G term
    n_h = 12
    high = -u_j * tau1 ** -s / s
    coeff = np.zeros(n_h)
    for m, val in zip(np.append(offsets, 0), np.append(u_off, u_j)):
        coeff += val * _hankel_coeffs(int(m), n_h)
    exps = 0.5 + s + np.arange(n_h)
    high += float(np.sum(coeff * tau1 ** -exps / exps)) / math.sqrt(4.0 * math.pi)

    total = low + core.value + high
    gamma_neg = -kernels1d.abs_gamma_neg(s)
    return total / gamma_neg * h ** (-2.0 * s)


# --------------------------------------------------------------------------
# Differences and Holder seminorms
# --------------------------------------------------------------------------

def difference_sampler(u: LatticeSampler, h: float, forward: bool = True) -> LatticeSampler:
    """Sampler of ``D_+ u`` (``forward``) or ``D_- u`` on Z."""
    if u.dim != 1:
        raise ConfigError("difference samplers are 1D only")
    if forward:
        func = lambda j: (u.values(j + 1) - u.values(j)) / h  # noqa: E731
    else:
        func = lambda j: (u.values(j) - u.values(j - 1)) / h  # noqa: E731
    radius = None if u.support_radius is None else u.support_radius + 1
    return LatticeSampler(func, 1, support_radius=radius, decay_exponent=u.decay_exponent)


def d_plus(u, w: GridWindow) -> GridFunction:
    """Forward difference ``(u_{j+1} - u_j)/h`` on ``w``.

    ``u`` is a sampler, or a ``GridFunction`` on a window one point wider
    than ``w`` to the right.
    """
    if isinstance(u, GridFunction):
        v = u.values
        return GridFunction(w, (v[1:] - v[:-1]) / w.h)
    j = w.indices(0)
    return GridFunction(w, (u.values(j + 1) - u.values(j)) / w.h)


def d_minus(u, w: GridWindow) -> GridFunction:
    """Backward difference ``(u_j - u_{j-1})/h`` on ``w``."""
    if isinstance(u, GridFunction):
        v = u.values
        return GridFunction(w, (v[1:] - v[:-1]) / w.h)
    j = w.indices(0)
    return GridFunction(w, (u.values(j) - u.values(j - 1)) / w.h)


def _seminorm_0(v: np.ndarray, h: float, beta: float) -> float:
    best = 0.0
    for lag in range(1, v.size):
        d = np.abs(v[lag:] - v[:-lag]).max()
        best = max(best, d / (h * lag) ** beta)
    return float(best)


def holder_seminorm(values, h: float, beta: float, k: int = 0) -> float:
    """Discrete Holder seminorm ``[D^k u]_{C_h^{0,beta}}`` over a finite window.

    For ``k = 1`` the seminorm is taken of both ``D_+ u`` and ``D_- u`` and
    the larger value returned; on a finite window the two differ only in
    which end point is lost.
    """
    v = np.asarray(values.values if isinstance(values, GridFunction) else values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ConfigError("holder_seminorm needs a 1D array with at least two points")
    if not 0 < beta <= 1:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if k == 0:
        return _seminorm_0(v, h, beta)
    if k == 1:
        dv = np.diff(v) / h
        if dv.size < 2:
            raise ConfigError("window too small for a first-order seminorm")
        # D_+ and D_- coincide up to an index shift
        return _seminorm_0(dv, h, beta)
    raise ConfigError(f"only k = 0 and k = 1 are supported, got {k}")


def holder_norm(values, h: float, beta: float, k: int = 0) -> float:
    """``max_{l<=k} sup |D^l u| + [D^k u]_{C_h^{0,beta}}`` on the window."""
    v = np.asarray(values.values if isinstance(values, GridFunction) else values, dtype=float)
    sup = float(np.abs(v).max())
    if k >= 1:
        sup = max(sup, float(np.abs(np.diff(v) / h).max()))
    return sup + holder_seminorm(v, h, beta, k)

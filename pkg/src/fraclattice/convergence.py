"""Mesh-refinement studies: consistency rates and Holder mapping constants."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, ConvergenceError
from .gridops import (GridFunction, GridWindow, LatticeSampler, OperatorConfig,
                      apply_frint_1d, apply_frint_2d, apply_frlap_1d, apply_frlap_2d,
                      holder_norm, holder_seminorm)
from .reference import SolutionPair

__all__ = [
    "restrict",
    "restrict_pair",
    "evaluate_pair",
    "consistency_error",
    "theoretical_exponent",
    "ConvergenceReport",
    "rate_study",
    "HolderReport",
    "holder_mapping_study",
    "bump",
]


def restrict(u: Callable, w: GridWindow, support: Optional[float] = None,
             decay: Optional[float] = None) -> LatticeSampler:
    """Sampler ``j -> u(h j)`` (``u(h (j + 1/2))`` on offset axes).

    ``support`` is a physical radius outside which ``u`` vanishes; it is
    converted to a conservative index radius.
    """
    h = w.h
    shifts = [0.5 if o else 0.0 for o in w.offset]
    radius = None
    if support is not None:
        radius = int(math.ceil(support / h)) + (1 if any(shifts) else 0)
    if w.dim == 1:
        sh = shifts[0]

        def func(j):
            return np.asarray(u(h * (j + sh)), dtype=float)
    else:
        s0, s1 = shifts

        def func(j1, j2):
            return np.asarray(u(h * (j1 + s0), h * (j2 + s1)), dtype=float)
    return LatticeSampler(func, w.dim, support_radius=radius, decay_exponent=decay)


def restrict_pair(pair: SolutionPair, w: GridWindow, which: str = "u") -> LatticeSampler:
    if which == "u":
        return restrict(pair.u, w, pair.u_support, pair.u_decay)
    if which == "f":
        return restrict(pair.f, w, pair.f_support, pair.f_decay)
    raise ConfigError(f"which must be 'u' or 'f', got {which!r}")


def evaluate_pair(pair: SolutionPair, w: GridWindow, cfg: OperatorConfig,
                  mode: str = "apply") -> GridFunction:
    """Run the discrete operator on a pair and attach the exact values.

    ``apply`` computes ``(-Delta_h)^s r_h u`` against ``r_h f``; ``solve``
    computes ``(-Delta_h)^{-s} r_h f`` against ``r_h u``.
    """
    if pair.dim != w.dim:
        raise ConfigError(f"pair is {pair.dim}D but the window is {w.dim}D")
    coords = w.mesh_coords()
    if mode == "apply":
        op = apply_frlap_1d if w.dim == 1 else apply_frlap_2d
        out = op(restrict_pair(pair, w, "u"), w, cfg)
        exact = pair.f(*coords)
    elif mode == "solve":
        op = apply_frint_1d if w.dim == 1 else apply_frint_2d
        out = op(restrict_pair(pair, w, "f"), w, cfg)
        exact = pair.u(*coords)
    else:
        raise ConfigError(f"mode must be 'apply' or 'solve', got {mode!r}")
    res = out.with_reference(np.broadcast_to(exact, w.shape))
    res.meta.update({"pair": pair.name, "mode": mode})
    return res


def _interior_mask(w: GridWindow, fraction: float) -> np.ndarray:
    masks = []
    for axis in range(w.dim):
        idx = w.indices(axis)
        center = 0.5 * (idx[0] + idx[-1])
        half = 0.5 * (idx[-1] - idx[0]) * fraction
        masks.append(np.abs(idx - center) <= half + 1e-9)
    if w.dim == 1:
        return masks[0]
    return masks[0][:, None] & masks[1][None, :]


def consistency_error(pair: SolutionPair, h: float, w: GridWindow, cfg: OperatorConfig,
                      l: int = 0, interior: float = 0.5) -> float:
    """Sup-norm gap between the discrete operator and the exact values.

    For ``l = 1`` the forward difference of the discrete output is compared
    with ``f'``.  Only the central ``interior`` fraction of the window is
    used, and points without a closed-form reference (NaN) are skipped.
    """
    if abs(w.h - h) > 1e-15 * h:
        raise ConfigError("window mesh size differs from h")
    if l not in (0, 1):
        raise ConfigError(f"derivative level must be 0 or 1, got {l}")
    if w.dim != 1 and l:
        raise ConfigError("derivative levels are 1D only")
    res = evaluate_pair(pair, w, cfg, "apply")
    mask = _interior_mask(w, interior)
    if l == 0:
        err = np.abs(res.columns["error"])
    else:
        if pair.df is None:
            raise ConfigError(f"pair {pair.name!r} has no derivative of f; refusing to difference it")
        dv = np.diff(res.values) / h
        x = w.coords(0)[:-1]
        err = np.abs(dv - pair.df(x))
        mask = mask[:-1]
        if err.size < 2:
            raise ConfigError("window too small")
    err = err[mask]
    err = err[np.isfinite(err)]
    if err.size == 0:
        raise ConfigError("no reference values inside the interior window")
    return float(err.max())


def theoretical_exponent(k: int, beta: float, s: float, l: int = 0) -> float:
    """Consistency exponent for ``u in C^{k, beta}`` and derivative level ``l``.

    ``k = 0`` needs ``2s < beta`` and gives ``beta - 2s``.  For ``k >= 1``
    the level must equal ``floor(k + beta - 2s)`` and the exponent is
    ``k + beta - 2s - l``.
    """
    total = k + beta - 2.0 * s
    if not total > 0:
        raise ConfigError(f"no consistency rate when 2s >= k + beta ({2 * s} >= {k + beta})")
    if k == 0:
        if l != 0:
            raise ConfigError("C^{0,beta} data only supports l = 0")
        return total
    level = int(math.floor(total))
    if l != level:
        raise ConfigError(
            f"for C^{{{k},{beta:g}}} and s={s} the rate applies at l={level}, not l={l}; "
            "pass an explicit target"
        )
    return total - l


@dataclass
class ConvergenceReport:
    """Errors along a refinement sequence and the fitted log-log slope."""

    pair: str
    s: float
    l: int
    hs: list
    errors: list
    slope: Optional[float]
    exponent: float
    slack: float
    passed: bool
    degenerate: bool = False
    descriptive: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return self.exponent - self.slack

    def to_json(self) -> str:
        doc = asdict(self)
        doc["threshold"] = self.threshold
        for key in ("exponent", "threshold"):
            if not math.isfinite(doc[key]):
                doc[key] = None
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["h", "error"])
        for h, e in zip(self.hs, self.errors):
            writer.writerow([f"{h:.17g}", f"{e:.17g}"])
        return buf.getvalue()


def _fit_slope(hs, errors) -> float:
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)


def rate_study(pair: SolutionPair, h_list: Sequence[float], *, l: int = 0,
               x_extent: float = 2.0, near_extent: Optional[float] = None,
               tail_mode: str = "sampled", tail_extent: float = 1000.0,
               interior: float = 0.5, target: Optional[float] = None,
               slack: float = 0.15, kernel_source: Optional[str] = None) -> ConvergenceReport:
    """Measure consistency errors over ``h_list`` and fit the rate.

    Windows and truncation radii are given in physical units and converted
    per ``h``: the window is ``[-x_extent, x_extent]``, the near sum reaches
    ``near_extent`` and the sampled tail ``tail_extent``.
    """
    hs = [float(h) for h in h_list]
    if len(hs) < 3:
        raise ConfigError("a rate study needs at least three mesh sizes")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError("mesh sizes must be strictly decreasing")
    if target is None:
        target = (float("nan") if pair.degenerate
                  else theoretical_exponent(pair.k, pair.beta, pair.s, l))
    near_extent = x_extent if near_extent is None else near_extent
    errors = []
    for h in hs:
        half = int(round(x_extent / h))
        w = GridWindow.symmetric(h, half, pair.dim)
        N = max(1, int(math.ceil(near_extent / h)))
        if tail_mode == "sampled":
            cfg = OperatorConfig(pair.s, N, "sampled", M=max(N + 1, int(math.ceil(tail_extent / h))),
                                 kernel_source=kernel_source)
        else:
            cfg = OperatorConfig(pair.s, N, tail_mode, kernel_source=kernel_source)
        errors.append(consistency_error(pair, h, w, cfg, l=l, interior=interior))

    meta = {"x_extent": x_extent, "near_extent": near_extent, "tail_mode": tail_mode,
            "tail_extent": tail_extent, "interior": interior}
    if pair.dim == 2:
        slope = _fit_slope(hs, errors) if all(e > 0 for e in errors) else None
        return ConvergenceReport(pair.name, pair.s, l, hs, errors, slope, target, slack,
                                 passed=True, descriptive=True, meta=meta)
    if max(errors) == 0.0 or pair.degenerate:
        return ConvergenceReport(pair.name, pair.s, l, hs, errors, None, target, slack,
                                 passed=False, degenerate=True, meta=meta)
    if min(errors) <= 0.0:
        raise ConvergenceError("some errors vanish; the slope fit is undefined")
    slope = _fit_slope(hs, errors)
    passed = slope >= target - slack
    return ConvergenceReport(pair.name, pair.s, l, hs, errors, slope, target, slack,
                             passed=passed, meta=meta)


# --------------------------------------------------------------------------
# Holder mapping
# --------------------------------------------------------------------------

def bump(x):
    """Smooth cutoff ``exp(1 - 1/(1 - x^2))`` on ``|x| < 1``, zero outside, 1 at 0."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    safe = np.where(inside, 1.0 - x * x, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)


@dataclass
class HolderReport:
    """Per-``h`` ratio of output Holder seminorm to input Holder norm."""

    mode: str
    beta: float
    s: float
    out_exponent: float
    hs: list
    ratios: list
    band: float
    passed: bool
    degenerate: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"


def holder_mapping_study(u_family: Callable, beta: float, s: float, h_list: Sequence[float], *,
                         mode: str = "i", support: float = 1.0, x_extent: float = 1.5,
                         band: float = 3.0) -> HolderReport:
    """Check that ``[(-Delta_h)^s u]`` over ``||u||`` stays bounded as ``h`` shrinks.

    ``mode="i"`` takes ``u in C^{0,beta}`` with ``2s < beta`` and measures
    the output in ``C^{0, beta - 2s}``; ``mode="iii"`` takes
    ``u in C^{1,beta}`` with ``2s > beta`` and measures ``C^{0, beta - 2s + 1}``.
    ``u_family`` must vanish for ``|x| >= support``, so the operator is
    applied exactly.  The study passes when every ratio lies within a
    factor ``band`` of the coarsest-``h`` ratio.
    """
    if mode == "i":
        if not 2 * s < beta:
            raise ConfigError("mode 'i' needs 2s < beta")
        out_exp, k = beta - 2 * s, 0
    elif mode == "iii":
        if not 2 * s > beta:
            raise ConfigError("mode 'iii' needs 2s > beta")
        out_exp, k = beta - 2 * s + 1, 1
        if not out_exp > 0:
            raise ConfigError(f"mode 'iii' needs 2s < 1 + beta, got s={s}, beta={beta}")
    else:
        raise ConfigError(f"mode must be 'i' or 'iii', got {mode!r}")
    ratios = []
    degenerate = False
    for h in h_list:
        half = int(round(x_extent / h))
        w = GridWindow.symmetric(h, half)
        u = restrict(u_family, w, support=support)
        N = u.support_radius + half
        out = apply_frlap_1d(u, w, OperatorConfig(s, N, "zero"))
        u_vals = u.values(w.indices(0))
        denom = holder_norm(u_vals, h, beta, k)
        numer = holder_seminorm(out.values, h, out_exp, 0)
        if denom == 0.0:
            degenerate = True
            ratios.append(float("nan"))
        else:
            ratios.append(numer / denom)
    if degenerate:
        return HolderReport(mode, beta, s, out_exp, list(map(float, h_list)), ratios, band,
                            passed=False, degenerate=True)
    r0 = ratios[0]
    passed = all(r0 / band <= r <= r0 * band for r in ratios)
    return HolderReport(mode, beta, s, out_exp, list(map(float, h_list)), ratios, band, passed)

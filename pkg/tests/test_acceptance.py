"""Acceptance criteria 1-14, each at its stated tolerance.

Every criterion records one PASS/FAIL line; ``conftest.py`` prints them at
the end of the run, and ``python3 tests/test_acceptance.py`` prints them
directly.  Frozen calibration values are listed at the top.
"""

import math
import time

import numpy as np
import pytest

from fraclattice.cli import FIGURES, RunConfig, run_grid
from fraclattice.convergence import bump, holder_mapping_study, rate_study
from fraclattice.gridops import (GridWindow, HeatConfig, LatticeSampler, OperatorConfig,
                                 apply_frlap_1d, discrete_laplacian_1d,
                                 frlap_semigroup_oracle, heat_apply)
from fraclattice.kernels1d import (kernel_kminus, kernel_kminus_oracle, kernel_ks,
                                   kernel_ks_oracle, sigma_s, sigma_s_partial)
from fraclattice.kernels2d import (c_2_minus_s, c_2s, kernel2d_kminus_center,
                                   kernel2d_kminus_oracle, kernel2d_ks_oracle)
from fraclattice.reference import (ball_branches, ball_constants, gaussian_frlap_at_zero, inv_frlap_ball,
                                   pair_ball, pair_gaussian)
from fraclattice.convergence import evaluate_pair
from fraclattice.specfun import gamma_ratio, gauss_2f1, hyp_3f2_unit

# Sup-window errors of the figure configurations, frozen from the calibration
# run (h = 0.1, far sum ignored).  Figures 5 and 7 use N = 30, the smallest
# radius for which the far sum of the compact data vanishes on [-20, 20].
FIGURE_BANDS = {
    2: 0.005664636515401791,
    3: 0.0054467281317520655,
    4: 0.03564923002880138,
    5: 0.014028507848147909,
    6: 0.003466753167563143,
    7: 0.0006987986547458136,
}
FIGURE_N_OVERRIDE = {5: 30, 7: 30}
BAND_TOL = 0.10

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    return ok


def summary_lines():
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
            for n, (ok, detail) in sorted(RESULTS.items())]


def check(n, ok, detail):
    record(n, ok, detail)
    assert ok, f"criterion {n}: {detail}"


# ---------------------------------------------------------------- 1

def test_criterion_01_kernel_oracle_equivalence():
    worst = 0.0
    for s in (0.1, 0.3, 0.5, 0.7, 0.9):
        for m in range(1, 65):
            worst = max(worst, abs(kernel_ks_oracle(s, m) / kernel_ks(s, m) - 1))
    for s in (0.1, 0.2, 0.3, 0.4):
        for m in range(0, 65):
            worst = max(worst, abs(kernel_kminus_oracle(s, m) / kernel_kminus(s, m) - 1))
    check(1, worst <= 1e-8, f"max relative gap {worst:.2e} (tol 1e-8)")


# ---------------------------------------------------------------- 2

def test_criterion_02_hand_values():
    k = abs(kernel_ks(0.5, 1) - 4 / (3 * math.pi))
    sig = abs(sigma_s(0.5) - 4 / math.pi)
    chk = sigma_s_partial(0.5, 100_000)
    part = abs(chk.estimate - 4 / math.pi)
    ok = k <= 1e-12 and sig <= 1e-12 and part <= 1e-6
    check(2, ok, f"K_1/2(1) {k:.1e}, Sigma closed {sig:.1e}, partial+tail {part:.1e}")


# ---------------------------------------------------------------- 3

def test_criterion_03_sigma_identity():
    worst = 0.0
    for s in (0.25, 0.5, 0.75):
        chk = sigma_s_partial(s, 100_000)
        closed = 2 ** (2 * s) * math.gamma(0.5 + s) / (math.sqrt(math.pi) * math.gamma(1 + s))
        slack = 1e-13 * closed  # rounding of the partial sum
        inside = chk.partial + chk.tail_low - slack <= closed <= chk.partial + chk.tail_high + slack
        gap = abs(chk.estimate - closed)
        worst = max(worst, gap if inside else math.inf)
    check(3, worst <= 1e-6, f"max |partial + tail - closed form| {worst:.2e} (tol 1e-6)")


# ---------------------------------------------------------------- 4

def _second_order_gap(m, s, negative=False):
    m = m.astype(float)
    if negative:
        return m ** (2 - 2 * s) * np.abs(gamma_ratio(m + s, m + 1 - s) - m ** (-1 + 2 * s))
    return m ** (2 + 2 * s) * np.abs(gamma_ratio(m - s, m + 1 + s) - m ** (-1 - 2 * s))


def test_criterion_04_second_order_estimate():
    full = np.arange(1, 10_001)
    ref = np.arange(10, 101)
    worst = 0.0
    cases = [(s, False) for s in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)]
    cases += [(s, True) for s in (0.1, 0.2, 0.3, 0.4)]
    for s, neg in cases:
        ratio = _second_order_gap(full, s, neg).max() / _second_order_gap(ref, s, neg).max()
        worst = max(worst, ratio)
    check(4, worst <= 1.1,
          f"max sup[1,1e4]/sup[10,100] = {worst:.2f} (bound 1.1); the supremum sits at m = 1")


# ---------------------------------------------------------------- 5

def test_criterion_05_limit_laws():
    rng = np.random.default_rng(2024)
    data = rng.normal(size=21)
    u = LatticeSampler.from_array(-10, data)
    w = GridWindow.symmetric(0.1, 15)
    ident = u.values(w.indices(0))
    low = apply_frlap_1d(u, w, OperatorConfig(1e-3, 40, "zero")).values
    lap = discrete_laplacian_1d(u, w).values
    high = apply_frlap_1d(u, w, OperatorConfig(1 - 1e-3, 40, "zero")).values
    e0 = np.abs(low - ident).max() / np.abs(ident).max()
    e1 = np.abs(high - lap).max() / np.abs(lap).max()
    check(5, e0 <= 0.02 and e1 <= 0.02, f"s->0 gap {e0:.2e}, s->1 gap {e1:.2e} (tol 0.02)")


# ---------------------------------------------------------------- 6

def test_criterion_06_definition_equivalence():
    rng = np.random.default_rng(7)
    samplers = [LatticeSampler.impulse(), LatticeSampler.from_array(-5, rng.normal(size=11))]
    h = 0.1
    w = GridWindow.symmetric(h, 8)
    worst = 0.0
    for s in (0.3, 0.6):
        for u in samplers:
            direct = apply_frlap_1d(u, w, OperatorConfig(s, 20, "zero")).values
            for k, j in enumerate(w.indices(0)):
                oracle = frlap_semigroup_oracle(u, int(j), s, h)
                worst = max(worst, abs(oracle - direct[k]) / max(1.0, abs(direct[k])))
    check(6, worst <= 1e-6, f"max gap semigroup vs kernel sum {worst:.2e} (tol 1e-6)")


# ---------------------------------------------------------------- 7

def test_criterion_07_figure_one():
    start = time.perf_counter()
    p = pair_gaussian(0.25)
    ref = gaussian_frlap_at_zero(0.25)
    errs = []
    for h, N in ((0.1, 1000), (0.05, 2000)):
        res = evaluate_pair(p, GridWindow.symmetric(h, 20), OperatorConfig(0.25, N, "ignore"))
        errs.append(abs(res.columns["error"][20]))
    took = time.perf_counter() - start
    ok = errs[0] <= 0.02 * ref and errs[1] < errs[0] and took < 60
    check(7, ok, f"rel err {errs[0] / ref:.2e} -> {errs[1] / ref:.2e}, {took:.1f}s")


# ---------------------------------------------------------------- 8

def test_criterion_08_figures_two_to_seven():
    notes = []
    ok = True
    for fig, band in FIGURE_BANDS.items():
        preset = dict(FIGURES[fig])
        preset["n"] = FIGURE_N_OVERRIDE.get(fig, preset["n"])
        grid = run_grid(RunConfig(**preset))
        err = float(np.nanmax(np.abs(grid.columns["error"])))
        in_band = (1 - BAND_TOL) * band <= err <= (1 + BAND_TOL) * band
        if fig in (5, 7):
            size = float(np.nanmax(np.abs(grid.columns["exact"])))
            in_band = in_band and err <= 0.02 * size
            notes.append(f"fig{fig} {err / size:.2%}")
        else:
            notes.append(f"fig{fig} {err:.2e}")
        ok = ok and in_band
    check(8, ok, ", ".join(notes))


# ---------------------------------------------------------------- 9

def test_criterion_09_rate_study():
    hs = [0.2, 0.1, 0.05, 0.025]
    p = pair_ball("1s", 0.25)
    lip = rate_study(p, hs, target=0.5, slack=0.05)
    # u in C^{1,1/4} with 2s = 1/2 > 1/4: exponent 1/4 - 1/2 + 1
    frac = rate_study(p, hs)
    ok = lip.passed and lip.slope >= 0.45 and frac.passed and frac.slope >= 0.75 - 0.15
    check(9, ok, f"slope {lip.slope:.3f} (>= 0.45); C^1,beta mode {frac.slope:.3f} (>= 0.60)")


# ---------------------------------------------------------------- 10

def test_criterion_10_holder_mapping():
    rep = holder_mapping_study(lambda x: np.abs(x) ** 0.9 * bump(x), 0.9, 0.2,
                               [0.1, 0.05, 0.025])
    spread = max(rep.ratios) / min(rep.ratios)
    check(10, rep.passed, f"ratios {', '.join(f'{r:.3f}' for r in rep.ratios)}, spread {spread:.2f}")


# ---------------------------------------------------------------- 11

def test_criterion_11_two_dimensional_asymptotics():
    s = 0.25
    ok = True
    notes = []
    for sign in (1, -1):
        devs = []
        for k in range(10, 41):
            if sign > 0:
                ratio = kernel2d_ks_oracle(s, k, k) / (c_2s(s) * (2 * k * k) ** (-1 - s))
            else:
                ratio = kernel2d_kminus_oracle(s, k, k) / (c_2_minus_s(s) * (2 * k * k) ** (-1 + s))
            devs.append(abs(ratio - 1))
        final = 1 - devs[-1] if ratio < 1 else 1 + devs[-1]
        mono = all(a > b for a, b in zip(devs, devs[1:]))
        ok = ok and mono and 0.95 <= final <= 1.05
        notes.append(f"{'+' if sign > 0 else '-'}s ratio(40,40) {final:.5f} monotone {mono}")
    check(11, ok, "; ".join(notes))


# ---------------------------------------------------------------- 12

def test_criterion_12_center_value():
    s = 0.25
    series = hyp_3f2_unit(0.5, (1 + s) / 2, s / 2, 1.0, 1.0) * 4 ** -s
    quad = kernel2d_kminus_oracle(s, 0, 0)
    gap = abs(series - quad) / quad
    check(12, gap <= 1e-8 and series == kernel2d_kminus_center(s), f"relative gap {gap:.2e}")


# ---------------------------------------------------------------- 13

def test_criterion_13_ball_potentials():
    worst_gap = 0.0
    for gamma in (0.5, 1.5, 2.0 * 0.75, 3.0):
        for s in (0.1, 0.25, 0.45, 0.7):
            for n in (1, 2):
                if n == 1 and s >= 0.5:
                    continue
                lo, hi = ball_branches(gamma, s, n, 1.0)
                worst_gap = max(worst_gap, abs(lo - hi) / abs(lo))
    x = np.linspace(-1, 1, 81)
    worst_poly = 0.0
    for s in (0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45):
        lead1 = 4 ** -s * math.gamma(0.5 - s) * math.gamma(2 - s) / math.sqrt(math.pi)
        u1 = inv_frlap_ball(2 * (1 - s), s, 1, x)
        worst_poly = max(worst_poly, np.abs(u1 / (lead1 * (1 - (1 - 2 * s) * x ** 2)) - 1).max())
        lead2 = 4 ** -s * math.gamma(0.5 - s) * math.gamma(3 - s) / (2 * math.sqrt(math.pi))
        poly = 1 - (2 - 4 * s) * x ** 2 + (1 - 8 * s / 3 + 4 * s * s / 3) * x ** 4
        u2 = inv_frlap_ball(2 * (2 - s), s, 1, x)
        worst_poly = max(worst_poly, np.abs(u2 / (lead2 * poly) - 1).max())
    ok = worst_gap <= 1e-7 and worst_poly <= 1e-12
    check(13, ok, f"continuity gap {worst_gap:.1e} (tol 1e-7), polynomials {worst_poly:.1e} (tol 1e-12)")


# ---------------------------------------------------------------- 14

def test_criterion_14_heat_semigroup():
    rng = np.random.default_rng(99)
    data = rng.normal(size=17)
    u = LatticeSampler.from_array(-8, data)
    h = 0.1
    big = GridWindow.symmetric(h, 300)
    a = heat_apply(u, big, HeatConfig(0.02))
    mass = abs(a.values.sum() - data.sum())
    maxp = np.abs(a.values).max() <= np.abs(data).max()
    one = np.abs(heat_apply(LatticeSampler.constant(), GridWindow.symmetric(h, 10),
                            HeatConfig(0.05)).values - 1).max()
    small = GridWindow.symmetric(h, 30)
    twice = heat_apply(LatticeSampler.from_array(-300, a.values), small, HeatConfig(0.03)).values
    once = heat_apply(u, small, HeatConfig(0.05)).values
    comp = np.abs(twice - once).max()
    ok = mass <= 1e-8 and maxp and one <= 1e-8 and comp <= 1e-8
    check(14, ok, f"mass {mass:.1e}, max principle {maxp}, constant {one:.1e}, composition {comp:.1e}")


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for t in tests:
        try:
            t()
        except AssertionError:
            pass
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)

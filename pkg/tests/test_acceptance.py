"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

    pytest -s tests/test_acceptance.py     # or
    python3 tests/test_acceptance.py
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from modvillain.complex import Box, Cell, coboundary_matrix, real_rank
from modvillain.correlation import decay_series, fit_power_law, marginal_mc_two_point, two_point
from modvillain.gauge import build, density_unnormalized, exact_wilson_expectation, mc_wilson
from modvillain.multiplier import (pi_entry, pi_entry_oracle, symbol_d, symbol_dstar,
                                   symbol_laplacian, symbol_projection)
from modvillain.renorm import ft_residuals, renormalize_chain, restriction_chain
from modvillain.torus import TorusGroup, empirical_fourier, heat_fourier, sample_heat

FOUR_PI2 = 4 * math.pi**2


def report(num, name, ok, detail, elapsed, budget):
    ok = ok and elapsed < budget
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail} ({elapsed:.1f}s, budget {budget:g}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, f"criterion {num} failed: {detail}"


def test_01_cochain_exactness():
    t0 = time.perf_counter()
    boxes = worst_dd = bad_rank = 0
    for d in range(1, 5):
        for sides in itertools.product(range(1, 4), repeat=d):
            box = Box((0,) * d, sides)
            ds = [coboundary_matrix(box, k) for k in range(d)]
            for k in range(d - 1):
                worst_dd = max(worst_dd, int(np.abs(ds[k + 1] @ ds[k]).max()))
            ranks = [real_rank(m) for m in ds]
            for k in (1, 2):
                if k < d:
                    bad_rank += (ds[k].shape[1] - ranks[k]) != ranks[k - 1]
            boxes += 1
    report(1, "cochain exactness", worst_dd == 0 and bad_rank == 0,
           f"{boxes} boxes, max|dd|={worst_dd}, rank mismatches={bad_rank}",
           time.perf_counter() - t0, 10)


def test_02_heat_kernel_sampler():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20)
    worst, checks = 0.0, 0
    for beta in (0.05, 0.5):
        for n in range(1, 6):
            a = rng.normal(size=(n, n))
            t = TorusGroup(np.eye(n) + 0.3 * a @ a.T / n)
            x = sample_heat(t, beta, rng, 100_000)
            for xi in (rng.integers(-1, 2, size=(2, n))):
                if not xi.any():
                    xi[0] = 1
                mean, se = empirical_fourier(x, xi)
                exact = heat_fourier(t, beta, xi)
                worst = max(worst, abs(mean - exact) / se)
                checks += 1
    report(2, "heat kernel sampler", worst <= 3.0,
           f"{checks} characters, worst |err|/sigma={worst:.2f}", time.perf_counter() - t0, 30)


def test_03_renormalization():
    t0 = time.perf_counter()
    chain = restriction_chain([Box.cube(3, s) for s in (1, 2, 3)])
    grams = renormalize_chain(chain)
    co = max(grams.coisometry_residuals)
    ft = max(max(ft_residuals(chain, grams, beta, 100, np.random.default_rng(3)))
             for beta in (0.01, 0.1, 1.0))
    control = max(ft_residuals(chain, chain.base_grams, 0.1, 100, np.random.default_rng(3)))
    ok = co <= 1e-10 and ft <= 1e-10 and control > 1e-4
    report(3, "renormalized chain", ok,
           f"coisometry={co:.2e}, ft={ft:.2e}, unrenormalized control={control:.2e}",
           time.perf_counter() - t0, 60)


def test_04_symbol_algebra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for d in range(2, 6):
        xi = rng.uniform(-np.pi, np.pi, size=(1000, d))
        lap_scalar = 4 * np.sum(np.sin(xi / 2) ** 2, axis=1)
        for k in range(d - 1):
            worst = max(worst, np.abs(symbol_d(xi, k + 1) @ symbol_d(xi, k)).max())
        for k in range(d + 1):
            lap = symbol_laplacian(xi, k)
            eye = np.eye(lap.shape[-1])
            worst = max(worst, np.abs(lap - lap_scalar[:, None, None] * eye).max())
        for k in range(1, d + 1):
            adj = np.conj(np.swapaxes(symbol_d(xi, k - 1), -1, -2))
            worst = max(worst, np.abs(symbol_dstar(xi, k) - adj).max())
        for x in xi:
            p = symbol_projection(x).entries
            worst = max(worst, np.abs(p @ p - p).max(), np.abs(p - p.conj().T).max())
    report(4, "symbol algebra", worst <= 1e-12, f"max residual={worst:.2e}", time.perf_counter() - t0, 30)


ORACLE_PAIRS = [
    ((0, 0, 0), (0, 1), (0, 0, 0), (0, 1)),
    ((0, 0, 0), (0, 1), (1, 0, 0), (0, 1)),
    ((0, 0, 0), (0, 1), (0, 0, 1), (0, 1)),
    ((0, 0, 0), (0, 1), (0, 0, 0), (0, 2)),
    ((0, 0, 0), (0, 1), (0, 1, 0), (1, 2)),
    ((1, 2, 3), (0, 2), (2, 2, 3), (1, 2)),
    ((0, 0, 0), (1, 2), (3, 1, 0), (0, 1)),
    ((0, 0, 0), (0, 2), (-1, 2, 1), (0, 2)),
    ((2, 0, 5), (1, 2), (2, 4, 5), (1, 2)),
    ((0, 0, 0), (0, 1), (4, 4, 4), (0, 2)),
]


def test_05_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for bp, ap, bq, aq in ORACLE_PAIRS:
        p, q = Cell(bp, ap), Cell(bq, aq)
        worst = max(worst, abs(pi_entry(3, p, q, 8) - pi_entry_oracle(3, p, q, 8)))
    report(5, "grid sum vs periodic oracle", worst <= 1e-10,
           f"{len(ORACLE_PAIRS)} pairs, max diff={worst:.2e}", time.perf_counter() - t0, 60)


def test_06_diagonal_value():
    t0 = time.perf_counter()
    p3 = Cell((0, 0, 0), (0, 1))
    p4 = Cell((0, 0, 0, 0), (0, 1))
    v3 = pi_entry(3, p3, p3, 256)
    v4 = pi_entry(4, p4, p4, 64, method="fast")
    ok = abs(v3 - 2 / 3) <= 1e-6 and abs(v4 - 0.5) <= 1e-6
    report(6, "diagonal equals 2/d", ok, f"d=3: {v3:.9f}, d=4: {v4:.9f}", time.perf_counter() - t0, 300)


def test_07_masslessness():
    t0 = time.perf_counter()
    beta, ns = 0.1, [8, 12, 16, 24, 32, 48, 64]
    pts = decay_series(3, beta, 0, ns, 512)
    floor_ok = True
    for pt in pts:
        t = 2 * FOUR_PI2 * beta * pt.cross_term
        floor = math.exp(-16 * math.pi**2 * beta / 3) * abs(t) / (1 + abs(t))
        floor_ok &= abs(pt.value) >= floor
    fit = fit_power_law(pts)
    d2 = decay_series(2, beta, 0, [1, 2, 3, 5, 8], 64)
    rng = np.random.default_rng(7)
    d2_max = max(abs(pt.value) for pt in d2)
    for _ in range(5):
        off = tuple(rng.integers(-4, 5, size=2))
        if off != (0, 0):
            d2_max = max(d2_max, abs(two_point(2, beta, Cell((0, 0), (0, 1)), Cell(off, (0, 1)), 32)))
    ok = floor_ok and -3.3 <= fit.exponent <= -2.7 and d2_max <= 1e-12
    report(7, "masslessness", ok,
           f"floor holds={floor_ok}, exponent={fit.exponent:.4f}, d=2 max|O|={d2_max:.1e}",
           time.perf_counter() - t0, 900)


def test_08_villain_monte_carlo():
    t0 = time.perf_counter()
    g = build(Box.cube(3, 1))
    rng = np.random.default_rng(8)
    beta = 0.02
    worst = 0.0
    for p in g.plaquettes():
        exact = exact_wilson_expectation(g, beta, p)
        est, se = mc_wilson(g, beta, p, 20_000, rng)
        worst = max(worst, abs(est - exact) / se)
    gauge_err = 0.0
    n0 = g.d0.shape[1]
    for _ in range(4):
        c = rng.uniform(0, 1, g.d1.shape[1])
        c0 = rng.uniform(0, 1, n0)
        shifted = c + g.d0 @ c0 + rng.integers(-2, 3, size=c.shape)
        a, b = density_unnormalized(g, 0.1, c), density_unnormalized(g, 0.1, shifted)
        gauge_err = max(gauge_err, abs(a - b) / abs(a))
    ok = worst <= 3.0 and gauge_err <= 1e-10
    report(8, "Villain Monte Carlo", ok,
           f"worst |err|/sigma={worst:.2f}, gauge-orbit rel diff={gauge_err:.1e}",
           time.perf_counter() - t0, 60)


def test_09_marginal_mc():
    t0 = time.perf_counter()
    p, q = Cell((0, 0, 0), (0, 1)), Cell((1, 0, 0), (0, 1))
    exact = two_point(3, 0.1, p, q, 64)
    est, se = marginal_mc_two_point(3, 0.1, p, q, 64, 100_000, np.random.default_rng(9))
    z = abs(est - exact) / se
    report(9, "marginal MC vs closed form", z <= 3.0,
           f"exact={exact:.5f}, mc={est.real:.5f}+-{se:.5f}, z={z:.2f}", time.perf_counter() - t0, 60)


def test_10_translation_invariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    planes = [(0, 1), (0, 2), (1, 2)]
    worst = 0.0
    for _ in range(20):
        bp = tuple(rng.integers(-3, 4, size=3))
        bq = tuple(rng.integers(-3, 4, size=3))
        ap, aq = planes[rng.integers(3)], planes[rng.integers(3)]
        s = tuple(rng.integers(-10, 11, size=3))
        p, q = Cell(bp, ap), Cell(bq, aq)
        ps, qs = p.translate(s), q.translate(s)
        worst = max(worst, abs(pi_entry(3, p, q, 32) - pi_entry(3, ps, qs, 32)),
                    abs(two_point(3, 0.1, p, q, 32) - two_point(3, 0.1, ps, qs, 32)))
    report(10, "translation invariance", worst <= 1e-12, f"20 pairs, max diff={worst:.1e}",
           time.perf_counter() - t0, 600)


if __name__ == "__main__":
    sys.exit(pytest.main(["-q", "-s", __file__]))

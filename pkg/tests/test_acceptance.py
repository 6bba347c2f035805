"""Acceptance suite: one test per criterion, one printed verdict line each.

Verdict lines are written to the unbuffered real stdout so they stay
visible under pytest's capture.
"""

import math
import sys
import time

import numpy as np
import pytest

from rabipoly.analysis import capacity_probe, compare_methods, spacing_stats
from rabipoly.dho import charlier_phi, dho_eigenvalue
from rabipoly.model import (
    EnergyValue,
    ModelParams,
    Parity,
    RabiCoeffs,
    rabi_monic_family,
)
from rabipoly.errors import NearPole
from rabipoly.ops import convergent, poly_zeros, quadrature_weights, eval_monic
from rabipoly.solver import (
    EnergyLevel,
    F_many,
    SolverOptions,
    Spectrum,
    merge_spectra,
    solve_spectrum,
)

REF_ZETAS = [-0.217805, 0.0629563, 0.86095, 1.1636, 1.85076]

# computed zeros carry the bisection width, so ordering relations can
# only be certified to this slack
SEP_SLACK = 4e-12


def _verdict(num, name, ok, detail):
    # written to the real stdout so each criterion leaves one visible
    # pass/fail line in the run log (capture is sys-level, see pyproject)
    line = f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


def test_criterion_01_reference_values():
    t0 = time.monotonic()
    p = ModelParams(0.7, 0.4)
    opts = SolverOptions(n_trunc=300)
    merged = merge_spectra([
        solve_spectrum(p, Parity.PLUS, 5, opts),
        solve_spectrum(p, Parity.MINUS, 5, opts),
    ])
    zetas = merged.zetas()
    devs = [float(np.min(np.abs(zetas - w))) for w in REF_ZETAS]
    elapsed = time.monotonic() - t0
    ok = max(devs) < 5e-4 and elapsed < 5.0
    _verdict(1, "reference zeta values", ok,
             f"max dev {max(devs):.2e} (tol 5e-4), {elapsed:.2f}s (< 5s)")


def test_criterion_02_dho_exactness():
    t0 = time.monotonic()
    worst = 0.0
    for k in (0.5, 1.0, 1.4):
        p = ModelParams(k, 0.0)
        sp = solve_spectrum(p, Parity.PLUS, 30, SolverOptions(n_trunc=300))
        eps = sp.epsilons()
        want = np.arange(30) - k * k
        worst = max(worst, float(np.max(np.abs(eps[:30] - want))))
    elapsed = time.monotonic() - t0
    ok = worst < 1e-8 and elapsed < 5.0
    _verdict(2, "closed-form limit exactness", ok,
             f"max dev {worst:.2e} (tol 1e-8), {elapsed:.2f}s (< 5s)")


def test_criterion_03_cross_method_agreement():
    from rabipoly.braak import braak_spectrum
    t0 = time.monotonic()
    devs = []
    for k, d in ((0.7, 0.4), (1.4, 0.4)):
        p = ModelParams(k, d)
        opts = SolverOptions(n_trunc=300)
        merged = merge_spectra([
            solve_spectrum(p, Parity.PLUS, 10, opts),
            solve_spectrum(p, Parity.MINUS, 10, opts),
        ])
        zp = merged.zetas()[:10]
        zb = braak_spectrum(p, float(zp[0]) - 0.25, float(zp[-1]) + 0.25,
                            256, opts).zetas()
        devs.append(max(float(np.min(np.abs(zb - z))) for z in zp))
    elapsed = time.monotonic() - t0
    ok = max(devs) < 1e-6 and elapsed < 30.0
    _verdict(3, "G-pair vs parity-series spectra", ok,
             f"max dev {max(devs):.2e} (tol 1e-6), {elapsed:.2f}s (< 30s)")


def test_criterion_04_interlacing_suite():
    t0 = time.monotonic()
    rng = np.random.default_rng(20260823)
    violations = 0
    worst_sum = 0.0
    for _ in range(50):
        k = float(rng.uniform(0.3, 1.5))
        d = float(rng.uniform(0.0, 1.2))
        n = int(rng.integers(2, 201))
        parity = Parity.PLUS if rng.random() < 0.5 else Parity.MINUS
        p = ModelParams(k, d)
        rec0 = rabi_monic_family(p, parity, 0)
        rec1 = rabi_monic_family(p, parity, 1)
        zn = poly_zeros(rec0, n)
        # consecutive-order interlacing
        if n >= 2:
            zm = poly_zeros(rec0, n - 1)
            if not (np.all(zn[:-1] < zm + SEP_SLACK)
                    and np.all(zm < zn[1:] + SEP_SLACK)):
                violations += 1
            # cross-family separation
            z1 = poly_zeros(rec1, n - 1)
            if not (np.all(zn[:-1] < z1 + SEP_SLACK)
                    and np.all(z1 < zn[1:] + SEP_SLACK)):
                violations += 1
        # weights: positivity, normalization, and the two formulas
        # (quadrature_weights raises if the forms disagree beyond 1e-8)
        try:
            q = quadrature_weights(rec0, zn)
        except Exception:
            violations += 1
            continue
        if not all(w.sign > 0 for w in q.weights_scaled):
            violations += 1
        dev = abs(float(np.sum(q.weights)) - 1.0)
        worst_sum = max(worst_sum, dev)
        if dev > 1e-10:
            violations += 1
    elapsed = time.monotonic() - t0
    ok = violations == 0 and elapsed < 60.0
    _verdict(4, "interlacing / weight invariants (50 draws)", ok,
             f"{violations} violations, worst |sum-1| {worst_sum:.2e}, "
             f"{elapsed:.2f}s (< 60s)")


def test_criterion_05_monotone_branch():
    # High gaps hold their root closer to a pole than any double can
    # separate (the pole residue falls factorially with the gap index),
    # so a 64-point scan cannot see that sign change.  Such gaps pass
    # only by certifying that the refined root is nearer to a pole than
    # one scan step; everything else must show exactly one crossing.
    t0 = time.monotonic()
    n_gaps = 50
    failures = []
    resolved = 0
    certified = 0
    for k, d in ((0.5, 0.0), (0.7, 0.4), (1.4, 1.0)):
        p = ModelParams(k, d)
        coeffs = RabiCoeffs(p, Parity.PLUS)
        rec0 = rabi_monic_family(p, Parity.PLUS, 0)
        opts = SolverOptions(n_trunc=300, check_stability=False)
        sp = solve_spectrum(p, Parity.PLUS, n_gaps + 3, opts)
        roots = sp.xs()
        poles = poly_zeros(rec0, 300, 1, n_gaps + 1)
        for g in range(n_gaps):
            lo, hi = float(poles[g]), float(poles[g + 1])
            shrink = max(1e-9, 1e-3 * (hi - lo))
            grid = np.linspace(lo + shrink, hi - shrink, 64)
            vals = F_many(coeffs, grid)[0]
            decreasing = bool(np.all(np.diff(vals) < 0))
            flips = int(np.sum(np.sign(vals[:-1]) != np.sign(vals[1:])))
            if decreasing and flips == 1:
                resolved += 1
                continue
            # a fully collapsed root coincides with its pole bit for bit,
            # so the gap membership test needs a hair of slack
            in_gap = roots[(roots > lo - 1e-9) & (roots < hi + 1e-9)]
            step = grid[1] - grid[0]
            pole_dist = (float(np.min(np.minimum(np.abs(in_gap - lo),
                                                 np.abs(hi - in_gap))))
                         if in_gap.size else math.inf)
            if decreasing and flips == 0 and pole_dist < step:
                certified += 1
                continue
            failures.append((k, d, g, decreasing, flips))
    elapsed = time.monotonic() - t0
    ok = not failures and elapsed < 30.0
    _verdict(5, "one decreasing crossing per pole gap", ok,
             f"{resolved} resolved + {certified} pole-certified of "
             f"{3 * n_gaps}, failures {failures[:3]}, {elapsed:.2f}s (< 30s)")


def test_criterion_06_evaluator_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(42)
    worst = 0.0
    for k, d in ((0.5, 0.0), (0.7, 0.4), (1.4, 1.0)):
        p = ModelParams(k, d)
        coeffs = RabiCoeffs(p, Parity.MINUS)
        rec0 = rabi_monic_family(p, Parity.MINUS, 0)
        rec1 = rabi_monic_family(p, Parity.MINUS, 1)
        # off-pole means clear of the convergent's poles, not merely off
        # the evaluator's internal rejection radius
        n_poles = min(1000, int(math.ceil(k * 25.0)) + 5)
        poles = poly_zeros(rec0, 1000, 1, n_poles)
        done = 0
        while done < 100:
            x = float(rng.uniform(-5.0, 25.0))
            if float(np.min(np.abs(poles - x))) < 1e-4:
                continue
            try:
                want = convergent(rec0, rec1, coeffs.a0(x), x, 1000)
            except NearPole:
                continue
            got = F_many(coeffs, np.asarray([x]))[0][0]
            worst = max(worst, abs(got - want))
            done += 1
    elapsed = time.monotonic() - t0
    ok = worst < 1e-8 and elapsed < 10.0
    _verdict(6, "series vs convergent evaluator", ok,
             f"max |diff| {worst:.2e} (tol 1e-8), {elapsed:.2f}s (< 10s)")


def test_criterion_07_nondegeneracy():
    t0 = time.monotonic()
    p = ModelParams(1.4, 0.4)
    opts = SolverOptions(n_trunc=500, check_stability=False)
    min_gap = math.inf
    for parity in (Parity.PLUS, Parity.MINUS):
        sp = solve_spectrum(p, parity, 100, opts)
        min_gap = min(min_gap, float(np.min(np.diff(sp.epsilons()[:100]))))
    elapsed = time.monotonic() - t0
    ok = min_gap > 1e-6
    _verdict(7, "within-parity level separation", ok,
             f"min gap {min_gap:.2e} (> 1e-6), {elapsed:.2f}s")


def test_criterion_08_capacity():
    t0 = time.monotonic()
    p = ModelParams(1.4, 0.4)
    counts = {}
    for parity in (Parity.PLUS, Parity.MINUS):
        rep = capacity_probe(p, parity, 500, 120.0)
        counts[str(parity)] = rep.levels_computed
    elapsed = time.monotonic() - t0
    ok = all(c >= 500 for c in counts.values()) and elapsed < 120.0
    _verdict(8, "level capacity per parity", ok,
             f"{counts} (need >= 500 each), {elapsed:.2f}s (< 120s)")


def test_criterion_09_oracle_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(7)
    worst_rel = 0.0
    worst_ulp = 0.0
    for _ in range(40):
        k = float(rng.uniform(0.3, 1.6))
        eps = float(rng.uniform(-3.0, 8.0))
        p = ModelParams(k, 0.0)
        rec = rabi_monic_family(p, Parity.PLUS, -1)
        x = eps / k
        zeta = eps + k * k
        for n in range(21):
            pn, _ = eval_monic(rec, x, n)
            want = pn.value() / math.factorial(n)
            got = charlier_phi(n, k, eps)
            err = abs(got - want)
            rel = err / max(abs(want), 1e-300)
            # near a zero of phi_n the alternating sum cancels almost
            # completely; no double evaluation can agree better than
            # roundoff times the term mass there
            term = k ** n / math.factorial(n)
            mass = term
            for j in range(1, n + 1):
                term *= (n - j + 1) * abs(zeta - j + 1) / (j * k * k)
                mass += term
            floor = 64 * max(n, 1) * sys.float_info.epsilon * mass
            if rel > 1e-10 and err > floor:
                worst_rel = max(worst_rel, rel)
        r = charlier_phi(1, k, eps) / charlier_phi(0, k, eps)
        worst_ulp = max(worst_ulp,
                        abs(r - x) / math.ulp(max(1.0, abs(x))))
    elapsed = time.monotonic() - t0
    ok = worst_rel < 1e-10 and worst_ulp <= 4.0
    _verdict(9, "closed-form vs recurrence oracle", ok,
             f"max rel beyond roundoff floor {worst_rel:.2e} (tol 1e-10), "
             f"ratio off by {worst_ulp:.1f} ulp (<= 4), {elapsed:.2f}s")


def test_criterion_10_dho_spacing_statistics():
    t0 = time.monotonic()
    k = 1.0
    p = ModelParams(k, 0.0)
    opts = SolverOptions()
    levels = tuple(
        EnergyLevel(index=l, parity=Parity.PLUS,
                    value=EnergyValue(dho_eigenvalue(l, k)),
                    bracket=(dho_eigenvalue(l, k),) * 2,
                    residual=0.0, n_trunc=0, stable=True)
        for l in range(30)
    )
    sp = Spectrum(params=p, levels=levels, variable="closed_form",
                  options=opts)
    st = spacing_stats(sp)
    worst = float(np.max(np.abs(st.spacings - 1.0)))
    elapsed = time.monotonic() - t0
    ok = worst < 1e-8
    _verdict(10, "picket-fence spacing statistics", ok,
             f"max |s-1| {worst:.2e} (tol 1e-8), {elapsed:.2f}s")

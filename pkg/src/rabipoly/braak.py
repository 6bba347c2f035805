"""Independent spectrum computation via the G(zeta) pair.

Cross-validation route: the spectrum is recovered as zeros of the two
transcendental functions G_plus and G_minus built from an upward (and
therefore dominant) coefficient recursion.  Because the behavior of
G between its integer poles carries no proven branch structure, zeros
are located by dense scanning with no assumption on their count or on
monotonicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .model import TOL_POLE, EnergyValue, ModelParams, Parity, check_zeta_off_poles
from .scaled import ScaledValue
from .solver import EnergyLevel, SolverOptions, Spectrum, _bisect_many

__all__ = ["BraakSeriesState", "braak_G", "braak_spectrum"]

_STREAK = 8


@dataclass
class BraakSeriesState:
    """Rolling state of the K_n series at one zeta."""

    k_prev: ScaledValue
    k_curr: ScaledValue
    n: int
    g_plus: float
    g_minus: float


def _f_n(params: ModelParams, n: int, zeta: float) -> float:
    k = params.kappa
    return 2 * k + (n - zeta - params.delta**2 / (n - zeta)) / (2 * k)


def braak_G(params: ModelParams, zeta: float, tol: float = 1e-12,
            n_max: int = 4000):
    """(G_plus, G_minus, n_used) at one off-integer zeta.

    The series terms T_n = K_n kappa^n are evolved directly in scaled
    form, T_{n+1} = (f_n kappa T_n - kappa^2 T_{n-1}) / (n+1), which
    keeps the dominant-solution growth of K_n harmless.  Stops when both
    accumulators see _STREAK consecutive sub-tolerance terms.
    """
    check_zeta_off_poles(zeta)
    kap = params.kappa
    delta = params.delta
    t_prev = ScaledValue.from_float(1.0)  # T_0 = K_0
    t_curr = ScaledValue.from_float(_f_n(params, 0, zeta) * kap)  # T_1
    g_plus = (1.0 - delta / (zeta - 0.0)) * t_prev.value()
    g_minus = (1.0 + delta / (zeta - 0.0)) * t_prev.value()
    streak = 0
    for n in range(1, n_max + 1):
        tp = t_curr.value() * (1.0 - delta / (zeta - n))
        tm = t_curr.value() * (1.0 + delta / (zeta - n))
        g_plus += tp
        g_minus += tm
        small = (abs(tp) < tol * max(1.0, abs(g_plus))
                 and abs(tm) < tol * max(1.0, abs(g_minus)))
        streak = streak + 1 if small else 0
        if streak >= _STREAK:
            return g_plus, g_minus, n
        t_next = (t_curr * (_f_n(params, n, zeta) * kap)
                  - t_prev * (kap * kap)) / (n + 1)
        t_prev, t_curr = t_curr, t_next
    raise NoConvergence(f"G series did not settle within {n_max} terms",
                        n_used=n_max)


def _g_many(params: ModelParams, zetas: np.ndarray, which: Parity,
            tol: float, n_max: int) -> np.ndarray:
    out = np.empty(zetas.size)
    for i, z in enumerate(zetas):
        gp, gm, _ = braak_G(params, float(z), tol, n_max)
        out[i] = gp if which is Parity.PLUS else gm
    return out


def braak_spectrum(params: ModelParams, zeta_lo: float, zeta_hi: float,
                   samples_per_unit: int = 256,
                   opts: SolverOptions | None = None) -> Spectrum:
    """Zeros of G_plus and G_minus on a range, merged ascending.

    Every sign change between consecutive same-gap samples is refined by
    bisection; the G-function label is recorded as a parity surrogate
    (the mapping onto the parity chains is empirical, not structural).
    """
    if zeta_hi <= zeta_lo:
        raise ValueError("need zeta_lo < zeta_hi")
    opts = opts or SolverOptions()
    n = max(2, int(math.ceil(samples_per_unit * (zeta_hi - zeta_lo))))
    grid = np.linspace(zeta_lo, zeta_hi, n)
    near_pole = (np.round(grid) >= 0) & (np.abs(grid - np.round(grid)) < TOL_POLE)
    grid = grid[~near_pole]
    found = []
    for which in (Parity.PLUS, Parity.MINUS):
        def g_vec(zs, _w=which):
            return _g_many(params, np.asarray(zs, dtype=float), _w,
                           opts.cf_tol, opts.cf_n_max)

        vals = g_vec(grid)
        same_gap = np.floor(grid[:-1]) == np.floor(grid[1:])
        flips = np.nonzero(same_gap
                           & (np.sign(vals[:-1]) != np.sign(vals[1:])))[0]
        if flips.size == 0:
            continue
        roots, lo, hi = _bisect_many(g_vec, grid[flips], grid[flips + 1],
                                     opts.root_tol)
        residuals = np.abs(g_vec(roots))
        for r, bl, bh, res in zip(roots, lo, hi, residuals):
            found.append((float(r), which, (float(bl), float(bh)), float(res)))
    found.sort()
    levels = tuple(
        EnergyLevel(
            index=k,
            parity=which,
            value=EnergyValue.from_zeta(r, params),
            bracket=bracket,
            residual=res,
            n_trunc=opts.cf_n_max,
            stable=bool(res < opts.residual_tol),
        )
        for k, (r, which, bracket, res) in enumerate(found)
    )
    return Spectrum(params=params, levels=levels, variable="zeta", options=opts)

"""F scans for plotting, level-spacing statistics, and the capacity probe."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .braak import braak_spectrum
from .errors import TooFewLevels
from .model import TOL_POLE, ModelParams, Parity, RabiCoeffs, SchweberCoeffs, \
    rabi_monic_family
from .ops import poly_zeros
from .solver import F_many, SolverOptions, Spectrum, merge_spectra, \
    schweber_spectrum, solve_spectrum

__all__ = [
    "ScanSeries",
    "SpacingStats",
    "CapacityReport",
    "CompareResult",
    "scan_F",
    "spacing_stats",
    "capacity_probe",
    "compare_methods",
]

_HIST_BINS = 30
_HIST_RANGE = (0.0, 3.0)


@dataclass(frozen=True)
class ScanSeries:
    """Sampled (t, F(t)) pairs with pole annotations.

    Samples within tol_pole of an annotated pole carry NaN in ``values``
    (an explicit not-a-value marker, never 0, so a plot cannot fake a
    zero there).
    """

    variable: str
    label: str
    t: np.ndarray
    values: np.ndarray
    poles: np.ndarray

    def __post_init__(self):
        if self.variable not in ("x", "zeta"):
            raise ValueError(f"unknown variable {self.variable!r}")
        if self.t.size != self.values.size:
            raise ValueError("t and values must have equal length")
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("samples must be ascending in t")

    def sign_changes(self) -> int:
        """Count of sign changes between consecutive unmasked samples."""
        good = ~np.isnan(self.values)
        v = self.values[good]
        return int(np.sum(np.sign(v[:-1]) != np.sign(v[1:])))

    def poles_straddled(self) -> bool:
        """True when every interior pole sits between opposite-sign samples."""
        good = ~np.isnan(self.values)
        tg, vg = self.t[good], self.values[good]
        for p in self.poles:
            if not (tg[0] < p < tg[-1]):
                continue
            i = int(np.searchsorted(tg, p))
            if np.sign(vg[i - 1]) == np.sign(vg[i]):
                return False
        return True


@dataclass(frozen=True)
class SpacingStats:
    """Normalized nearest-neighbor spacing distribution of one spectrum."""

    spacings: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray
    count: int
    mean: float
    min: float
    max: float

    def __post_init__(self):
        if abs(float(np.mean(self.spacings)) - 1.0) > 1e-12:
            raise ValueError("normalized spacings must average to 1")
        if not np.all(self.spacings > 0):
            raise ValueError("spacings must be positive")


@dataclass(frozen=True)
class CapacityReport:
    """How many levels are computable before checks fail or time runs out."""

    params: ModelParams
    parity: Parity
    levels_computed: int
    n_ceiling: int
    elapsed: float
    budget: float
    first_failure: dict | None


@dataclass(frozen=True)
class CompareResult:
    """Three-way spectrum comparison in the zeta variable."""

    params: ModelParams
    zeta_parity: np.ndarray
    zeta_schweber: np.ndarray
    zeta_braak: np.ndarray
    dev_parity_schweber: float
    dev_parity_braak: float
    dev_schweber_braak: float


def scan_F(params: ModelParams, route, lo: float, hi: float, samples: int,
           opts: SolverOptions | None = None) -> ScanSeries:
    """Uniform-grid F series for plotting, with pole-adjacent masking.

    ``route`` is a Parity for the parity-resolved x-variable scan, or
    the string "schweber" for the unresolved zeta-variable scan.  Poles
    are taken from the alpha = 0 zero set at the solver's truncation
    order (parity route) or from the nonnegative integers in range
    (unresolved route).
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("need a finite range with lo < hi")
    opts = opts or SolverOptions()
    grid = np.linspace(lo, hi, samples)
    if route == "schweber":
        coeffs = SchweberCoeffs(params)
        # Mask integers (evaluation is undefined there); actual resolved
        # poles are detected from the samples afterwards, because the
        # truncated tail shifts them off the integers and low-residue
        # integer poles are invisible at any finite resolution.
        first = max(0, int(math.ceil(lo)))
        mask_at = np.arange(first, math.floor(hi) + 1, dtype=float)
        poles = None
        label = "schweber"
        variable = "zeta"
    else:
        parity = route
        coeffs = RabiCoeffs(params, parity)
        rec0 = rabi_monic_family(params, parity, 0)
        n_trunc = min(opts.n_trunc, 400)
        nodes = poly_zeros(rec0, n_trunc, 1,
                           min(n_trunc, _pole_count(params, hi, n_trunc)))
        poles = nodes[(nodes >= lo) & (nodes <= hi)]
        mask_at = poles
        label = str(parity)
        variable = "x"
    masked = np.zeros(grid.shape, dtype=bool)
    for p in mask_at:
        masked |= np.abs(grid - p) < TOL_POLE
    values = np.full(grid.shape, np.nan)
    if np.any(~masked):
        values[~masked] = F_many(coeffs, grid[~masked], opts.cf_tol,
                                 opts.cf_n_max)[0]
    if poles is None:
        # F(zeta) rises between poles, so a descending crossing marks a
        # pole; annotate the midpoint of the flanking samples.
        good = ~np.isnan(values)
        tg, vg = grid[good], values[good]
        down = (vg[:-1] > 0) & (vg[1:] < 0)
        poles = 0.5 * (tg[:-1][down] + tg[1:][down])
    return ScanSeries(variable=variable, label=label, t=grid, values=values,
                      poles=np.asarray(poles, dtype=float))


def _pole_count(params: ModelParams, hi: float, n_trunc: int) -> int:
    """Zeros to locate so that every pole below ``hi`` is annotated."""
    guess = int(math.ceil(params.kappa * abs(hi))) + 4
    return max(2, min(n_trunc - 1, guess))


def spacing_stats(spectrum: Spectrum) -> SpacingStats:
    """Normalized nearest-neighbor spacings within each parity chain."""
    raw = []
    groups = {}
    for lv in spectrum.levels:
        groups.setdefault(lv.parity, []).append(lv.value.epsilon)
    if max((len(g) for g in groups.values()), default=0) < 3:
        raise TooFewLevels("need at least 3 levels in one chain")
    for eps in groups.values():
        raw.extend(np.diff(np.sort(eps)))
    raw = np.asarray(raw, dtype=float)
    mean_raw = float(np.mean(raw))
    spac = raw / mean_raw
    hist, edges = np.histogram(spac, bins=_HIST_BINS, range=_HIST_RANGE)
    return SpacingStats(
        spacings=spac,
        histogram=hist,
        bin_edges=edges,
        count=int(spac.size),
        mean=mean_raw,
        min=float(np.min(spac)),
        max=float(np.max(spac)),
    )


def capacity_probe(params: ModelParams, parity: Parity, n_ceiling: int,
                   budget: float,
                   opts: SolverOptions | None = None) -> CapacityReport:
    """Count levels computable with passing checks inside a time budget.

    Doubles the request size until the ceiling, the budget, or the first
    level failing its stability/residual check, whichever comes first.
    """
    if n_ceiling < 100:
        raise ValueError("n_ceiling must be >= 100")
    opts = opts or SolverOptions()
    start = time.monotonic()
    computed = 0
    failure = None
    n = min(100, n_ceiling)
    while True:
        if time.monotonic() - start >= budget:
            break
        sp = solve_spectrum(params, parity, n, opts)
        good = 0
        for lv in sp.levels:
            if lv.stable and lv.residual < opts.residual_tol:
                good += 1
            else:
                failure = {
                    "index": lv.index,
                    "epsilon": lv.value.epsilon,
                    "residual": lv.residual,
                    "stable": lv.stable,
                    "n_trunc": lv.n_trunc,
                }
                break
        computed = max(computed, good)
        if failure is not None or n >= n_ceiling:
            break
        n = min(2 * n, n_ceiling)
    return CapacityReport(
        params=params,
        parity=parity,
        levels_computed=computed,
        n_ceiling=n_ceiling,
        elapsed=time.monotonic() - start,
        budget=budget,
        first_failure=failure,
    )


def compare_methods(params: ModelParams, n_levels: int,
                    opts: SolverOptions | None = None) -> CompareResult:
    """Three-way spectrum comparison: parity route, unresolved route, G pair.

    All three are expressed in zeta and truncated to the shortest list;
    the zeta window for the scan-based routes is padded around the
    parity-route result.
    """
    opts = opts or SolverOptions(n_trunc=200)
    merged = merge_spectra([
        solve_spectrum(params, Parity.PLUS, n_levels, opts),
        solve_spectrum(params, Parity.MINUS, n_levels, opts),
    ])
    z_par = merged.zetas()[:n_levels]
    lo = float(z_par[0]) - 0.25
    hi = float(z_par[-1]) + 0.25
    z_sch = schweber_spectrum(params, lo, hi, 256, opts).zetas()
    z_brk = braak_spectrum(params, lo, hi, 256, opts).zetas()
    m = min(z_par.size, z_sch.size, z_brk.size)
    z_par, z_sch, z_brk = z_par[:m], z_sch[:m], z_brk[:m]
    return CompareResult(
        params=params,
        zeta_parity=z_par,
        zeta_schweber=z_sch,
        zeta_braak=z_brk,
        dev_parity_schweber=float(np.max(np.abs(z_par - z_sch))) if m else 0.0,
        dev_parity_braak=float(np.max(np.abs(z_par - z_brk))) if m else 0.0,
        dev_schweber_braak=float(np.max(np.abs(z_sch - z_brk))) if m else 0.0,
    )

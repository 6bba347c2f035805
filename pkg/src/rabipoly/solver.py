"""Quantization-function evaluation and spectrum assembly.

The spectrum is the zero set of the transcendental function
F = a_0 + sum_k rho_1..rho_k built from the raw recurrence coefficients.
Zeros of the alpha=0 monic family approximate the poles of F from above,
so each interior pole gap brackets exactly one eigenvalue on a strictly
decreasing branch; the leading interval below the first pole is scanned
on a grid instead, because the root count there depends on the sign
structure of a_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import MethodUnstable, NoConvergence, NoRootInBracket, RabipolyError
from .model import (
    TOL_POLE,
    EnergyValue,
    ModelParams,
    Parity,
    RabiCoeffs,
    SchweberCoeffs,
    check_zeta_off_poles,
    rabi_monic_family,
    rabi_raw_coeffs,
)
from .ops import poly_zeros
from .scaled import ScaledValue

__all__ = [
    "SolverOptions",
    "EnergyLevel",
    "Spectrum",
    "WavefunctionCoeffs",
    "F_cf",
    "F_many",
    "pole_brackets",
    "find_root",
    "solve_spectrum",
    "merge_spectra",
    "schweber_spectrum",
    "wavefunction",
    "detect_baseline_crossings",
]

# number of consecutive sub-tolerance terms required to stop the series
_CF_STREAK = 8


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and truncation orders of the spectrum solver."""

    n_trunc: int = 2000
    cf_tol: float = 1e-12
    cf_n_max: int = 4000
    root_tol: float = 1e-12
    residual_tol: float = 1e-8
    stability_tol: float = 1e-8
    degeneracy_tol: float = 1e-9
    check_stability: bool = True
    leading_scan_points: int = 256


@dataclass(frozen=True)
class EnergyLevel:
    """One refined eigenvalue with its bracket and quality metadata.

    ``residual`` is |F| at the refined root when the root was resolved
    by a sign change.  High levels collapse onto the poles of F faster
    than double precision can separate them (the pole residues shrink
    factorially with the level index); for such levels the pole
    coordinate is reported and ``residual`` holds the certified bound on
    |root - pole| from the probe ladder instead, which is the honest
    accuracy statement where |F| itself is dominated by the pole.
    """

    index: int
    parity: Parity | None
    value: EnergyValue
    bracket: tuple
    residual: float
    n_trunc: int
    stable: bool


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalue collection of one solver run."""

    params: ModelParams
    levels: tuple
    variable: str
    options: SolverOptions

    def __post_init__(self):
        eps = self.epsilons()
        # cross-parity coincidences (baseline degeneracies) are allowed,
        # so the global ordering is only required to be non-decreasing
        if eps.size > 1 and not np.all(np.diff(eps) >= 0):
            raise ValueError("spectrum levels must be ascending")
        for par in (Parity.PLUS, Parity.MINUS):
            same = eps[[lv.parity is par for lv in self.levels]]
            if same.size > 1 and np.min(np.diff(same)) <= self.options.degeneracy_tol:
                raise ValueError(
                    f"same-parity levels closer than degeneracy_tol for {par}")

    def epsilons(self) -> np.ndarray:
        return np.array([lv.value.epsilon for lv in self.levels])

    def xs(self) -> np.ndarray:
        return np.array([lv.value.x(self.params) for lv in self.levels])

    def zetas(self) -> np.ndarray:
        return np.array([lv.value.zeta(self.params) for lv in self.levels])

    def energies(self) -> np.ndarray:
        return np.array([lv.value.energy(self.params) for lv in self.levels])


@dataclass(frozen=True)
class WavefunctionCoeffs:
    """Expansion coefficients phi_0..phi_N, normalized to phi_0 = 1.

    ``phi`` is the plain-float view; far tails underflow there, so
    ``phi_scaled`` keeps the exact scaled values for ratio tests.
    """

    phi: np.ndarray
    phi_scaled: tuple
    method: str

    def __post_init__(self):
        if self.method not in ("forward", "backward"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.phi[0] != 1.0:
            raise ValueError("phi must be normalized to phi_0 = 1")


def F_many(coeffs, ts: np.ndarray, tol: float = 1e-12, n_max: int = 4000):
    """Vectorized F = a_0 + sum_k rho_1..rho_k over an array of points.

    The running product is kept in split mantissa/exponent form because
    intermediate convergents may pass near their own poles and make
    individual terms huge before the series settles.  Stops once
    _CF_STREAK consecutive terms fall below tol relative to the
    accumulated value at every point.

    Returns (values, n_used) arrays; raises NoConvergence if any point
    fails to settle within n_max terms.
    """
    if n_max < 16:
        raise ValueError("n_max must be >= 16")
    ts = np.asarray(ts, dtype=float)
    tiny = np.finfo(float).tiny

    a_prev = np.asarray(coeffs.a(1, ts), dtype=float)
    a_prev = np.where(a_prev == 0.0, tiny, a_prev)
    rho = -coeffs.b(1) / a_prev
    prod_m, prod_e = np.frexp(rho)
    prod_e = prod_e.astype(np.int64)
    acc = coeffs.a0(ts) + np.ldexp(prod_m, prod_e)
    u_prev = np.ones_like(ts)
    streak = np.zeros(ts.shape, dtype=np.int64)
    n_used = np.full(ts.shape, n_max, dtype=np.int64)

    for l in range(2, n_max + 1):
        a_l = np.asarray(coeffs.a(l, ts), dtype=float)
        a_l = np.where(a_l == 0.0, tiny, a_l)
        den = 1.0 - u_prev * coeffs.b(l) / (a_l * a_prev)
        den = np.where(den == 0.0, tiny, den)
        rho = 1.0 / den - 1.0
        mm, ee = np.frexp(prod_m * rho)
        prod_m = mm
        prod_e = prod_e + ee.astype(np.int64)
        term = np.ldexp(prod_m, np.clip(prod_e, -1074, 1023))
        acc = acc + term
        small = np.abs(term) < tol * np.maximum(1.0, np.abs(acc))
        streak = np.where(small, streak + 1, 0)
        done = streak >= _CF_STREAK
        n_used = np.where(done & (n_used == n_max), l, n_used)
        if np.all(done):
            return acc, n_used
        u_prev, a_prev = 1.0 / den, a_l
    if np.all(streak >= _CF_STREAK):
        return acc, n_used
    raise NoConvergence(
        f"F series did not settle within {n_max} terms", n_used=n_max)


def F_cf(coeffs, t: float, tol: float = 1e-12, n_max: int = 4000):
    """F at a single point; returns (value, n_used).

    For the unresolved (zeta-variable) coefficient source the point must
    stay off the integer poles.
    """
    if getattr(coeffs, "variable", "x") == "zeta":
        check_zeta_off_poles(t)
    vals, used = F_many(coeffs, np.asarray([t]), tol, n_max)
    return float(vals[0]), int(used[0])


def pole_brackets(rec0, n_trunc: int, count: int, x_floor: float):
    """Leading interval plus the first ``count`` interior pole gaps.

    Poles of F are approximated by the zeros of P_n at truncation order
    ``n_trunc``; the first bracket runs from x_floor up to the first
    zero, followed by (x_k, x_{k+1}) for k = 1..count.
    """
    if count > n_trunc - 1:
        raise ValueError("count must be <= n_trunc - 1")
    nodes = poly_zeros(rec0, n_trunc, 1, count + 1)
    if x_floor >= nodes[0]:
        raise ValueError("x_floor must lie below the first pole")
    out = [(x_floor, float(nodes[0]))]
    out.extend((float(nodes[k]), float(nodes[k + 1])) for k in range(count))
    return out


def _shrunk(lo, hi):
    d = np.maximum(1e-9, 1e-3 * (hi - lo))
    return lo + d, hi - d


def _bisect_many(f_vec, lo, hi, tol, max_iter=200):
    """Simultaneous bisection on intervals with a known sign change."""
    flo = f_vec(lo)
    for _ in range(max_iter):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f_vec(mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi), lo, hi


def find_root(f_vec: Callable, bracket, tol: float = 1e-12,
              check_monotone: bool = True) -> float:
    """Unique root of F on one pole gap by guarded bisection.

    The bracket is shrunk away from its pole endpoints before the sign
    test.  With ``check_monotone`` every sampled pair is additionally
    required to be strictly decreasing in x, which the interior-gap
    branch structure guarantees.
    """
    lo, hi = _shrunk(np.asarray([bracket[0]]), np.asarray([bracket[1]]))
    samples = []

    def f_logged(xs):
        ys = f_vec(xs)
        samples.extend(zip(xs.tolist(), ys.tolist()))
        return ys

    flo = f_logged(lo)[0]
    fhi = f_logged(hi)[0]
    if np.sign(flo) == np.sign(fhi):
        raise NoRootInBracket(
            f"no sign change of F on ({bracket[0]!r}, {bracket[1]!r})")
    root, _, _ = _bisect_many(f_logged, lo, hi, tol)
    if check_monotone:
        samples.sort()
        # pairs closer than the bisection width sit inside evaluation
        # noise, so the strict-decrease check skips them
        for (xa, va), (xb, vb) in zip(samples, samples[1:]):
            if xb - xa > 8 * tol and vb >= va:
                raise RabipolyError("F is not strictly decreasing on the bracket")
    return float(root[0])


def _leading_roots(f_vec, lo, hi, tol, n_scan):
    """All F roots below the first pole, located by grid scan."""
    slo, shi = _shrunk(np.asarray([lo]), np.asarray([hi]))
    grid = np.linspace(slo[0], shi[0], n_scan)
    vals = f_vec(grid)
    flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if flips.size == 0:
        return []
    roots, _, _ = _bisect_many(f_vec, grid[flips], grid[flips + 1], tol)
    return [float(r) for r in roots]


def _solve_at(params: ModelParams, parity: Parity, n_levels: int, n_trunc: int,
              opts: SolverOptions):
    """Roots and brackets of the parity quantization function at one order."""
    rec0 = rabi_monic_family(params, parity, 0)
    coeffs = RabiCoeffs(params, parity)
    x_floor = -(params.kappa + params.delta / params.kappa + 2.0)

    def f_vec(xs):
        return F_many(coeffs, xs, opts.cf_tol, opts.cf_n_max)[0]

    brackets = pole_brackets(rec0, n_trunc, n_levels, x_floor)
    lead = _leading_roots(f_vec, brackets[0][0], brackets[0][1], opts.root_tol,
                          opts.leading_scan_points)
    roots = [(r, brackets[0], float(np.abs(f_vec(np.asarray([r]))[0])))
             for r in lead]

    interior = brackets[1:]
    lo = np.array([b[0] for b in interior])
    hi = np.array([b[1] for b in interior])
    slo, shi = _shrunk(lo, hi)
    flo = f_vec(slo)
    fhi = f_vec(shi)
    plain = np.sign(flo) != np.sign(fhi)

    xs_int = np.empty(lo.size)
    res_int = np.empty(lo.size)
    if np.any(plain):
        mids, _, _ = _bisect_many(f_vec, slo[plain], shi[plain], opts.root_tol)
        xs_int[plain] = mids
        res_int[plain] = np.abs(f_vec(mids))
    if np.any(~plain):
        adj = ~plain
        x_adj, r_adj = _pole_adjacent_roots(
            f_vec, lo[adj], hi[adj], slo[adj], shi[adj], flo[adj], opts)
        xs_int[adj] = x_adj
        res_int[adj] = r_adj

    roots.extend((float(x), b, float(r))
                 for x, b, r in zip(xs_int, interior, res_int))
    roots = roots[:n_levels]
    xs = np.array([r for r, _, _ in roots])
    residuals = np.array([r for _, _, r in roots])
    return xs, [b for _, b, _ in roots], residuals


def _pole_adjacent_roots(f_vec, lo, hi, slo, shi, flo, opts):
    """Roots hiding between a gap endpoint and the shrunk evaluation point.

    Equal endpoint signs on a strictly decreasing branch mean the zero
    sits within the shrink margin of one pole: below the left pole's
    margin when both signs are negative, above the right pole's margin
    when both are positive.  Probe distances are halved toward that pole
    until a sign change appears (then bisected) or the distance floor
    certifies that root and pole coincide to within the floor.
    """
    neg = flo < 0.0  # zero is left-adjacent, else right-adjacent
    anchor = np.where(neg, lo, hi)
    side = np.where(neg, 1.0, -1.0)
    flip = np.where(neg, 1.0, -1.0)  # sign of F once the probe passes the zero
    d = np.where(neg, slo - lo, hi - shi)
    d_floor = 64.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(anchor))

    roots = anchor.copy()
    residual = d.copy()
    open_mask = np.ones(lo.shape, dtype=bool)
    while np.any(open_mask):
        d_half = 0.5 * d[open_mask]
        probe = anchor[open_mask] + side[open_mask] * d_half
        f = f_vec(probe)
        crossed = np.sign(f) == flip[open_mask]
        idx = np.nonzero(open_mask)[0]
        hit = idx[crossed]
        if hit.size:
            b_lo = np.minimum(probe[crossed], anchor[hit] + side[hit] * d[hit])
            b_hi = np.maximum(probe[crossed], anchor[hit] + side[hit] * d[hit])
            mids, blo, bhi = _bisect_many(f_vec, b_lo, b_hi, opts.root_tol)
            roots[hit] = mids
            # |F| is steepened by the nearby pole; the final bracket width
            # is the meaningful error bound here
            residual[hit] = bhi - blo
            open_mask[hit] = False
        d[idx[~crossed]] = d_half[~crossed]
        exhausted = open_mask & (d <= d_floor)
        if np.any(exhausted):
            # no sign change above the floor: root and pole coincide to d
            roots[exhausted] = anchor[exhausted]
            residual[exhausted] = d[exhausted]
            open_mask[exhausted] = False
    return roots, residual


def solve_spectrum(params: ModelParams, parity: Parity, n_levels: int,
                   opts: SolverOptions | None = None) -> Spectrum:
    """First ``n_levels`` eigenvalues of one parity chain.

    Truncation order is max(opts.n_trunc, 4 * n_levels); the stability
    flag of each level is set by re-solving at double the order and
    comparing roots in x.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    opts = opts or SolverOptions()
    n_trunc = max(opts.n_trunc, 4 * n_levels)
    xs, brackets, residuals = _solve_at(params, parity, n_levels, n_trunc, opts)
    if opts.check_stability:
        xs2, _, _ = _solve_at(params, parity, n_levels, 2 * n_trunc, opts)
        m = min(xs.size, xs2.size)
        stable = np.zeros(xs.size, dtype=bool)
        stable[:m] = np.abs(xs[:m] - xs2[:m]) < opts.stability_tol
    else:
        stable = np.ones(xs.size, dtype=bool)
    levels = tuple(
        EnergyLevel(
            index=k,
            parity=parity,
            value=EnergyValue.from_x(float(xs[k]), params),
            bracket=brackets[k],
            residual=float(residuals[k]),
            n_trunc=n_trunc,
            stable=bool(stable[k]),
        )
        for k in range(xs.size)
    )
    return Spectrum(params=params, levels=levels, variable="x", options=opts)


def merge_spectra(spectra: Sequence[Spectrum]) -> Spectrum:
    """Merge per-parity spectra into one ascending collection."""
    if not spectra:
        raise ValueError("need at least one spectrum")
    params = spectra[0].params
    if any(sp.params != params for sp in spectra):
        raise ValueError("cannot merge spectra with different parameters")
    levels = sorted((lv for sp in spectra for lv in sp.levels),
                    key=lambda lv: lv.value.epsilon)
    relabeled = tuple(replace(lv, index=k) for k, lv in enumerate(levels))
    return Spectrum(params=params, levels=relabeled,
                    variable=spectra[0].variable, options=spectra[0].options)


def schweber_spectrum(params: ModelParams, zeta_lo: float, zeta_hi: float,
                      samples_per_unit: int = 256,
                      opts: SolverOptions | None = None) -> Spectrum:
    """Zeros of the unresolved-form F(zeta) on a range, by dense scan.

    Between the integer poles F(zeta) may hold zero, one or two roots,
    separated by non-integer poles of the continued-fraction tail.  The
    energy enters the zeta-variable coefficients with the opposite sign
    to the parity route, so F(zeta) increases between its poles: zeros
    are the ascending sign changes of the scan, while descending changes
    are pole jumps and are skipped.  Levels carry no parity.
    """
    if zeta_hi <= zeta_lo:
        raise ValueError("need zeta_lo < zeta_hi")
    opts = opts or SolverOptions()
    coeffs = SchweberCoeffs(params)

    def f_vec(zs):
        return F_many(coeffs, zs, opts.cf_tol, opts.cf_n_max)[0]

    n = max(2, int(math.ceil(samples_per_unit * (zeta_hi - zeta_lo))))
    grid = np.linspace(zeta_lo, zeta_hi, n)
    near_pole = (np.round(grid) >= 0) & (np.abs(grid - np.round(grid)) < TOL_POLE)
    grid = grid[~near_pole]
    vals = f_vec(grid)
    same_gap = np.floor(grid[:-1]) == np.floor(grid[1:])
    flips = np.nonzero(same_gap & (vals[:-1] < 0) & (vals[1:] > 0))[0]
    levels = []
    if flips.size:
        roots, lo, hi = _bisect_many(f_vec, grid[flips], grid[flips + 1],
                                     opts.root_tol)
        residuals = np.abs(f_vec(roots))
        for k in range(roots.size):
            levels.append(EnergyLevel(
                index=k,
                parity=None,
                value=EnergyValue.from_zeta(float(roots[k]), params),
                bracket=(float(lo[k]), float(hi[k])),
                residual=float(residuals[k]),
                n_trunc=opts.cf_n_max,
                stable=bool(residuals[k] < opts.residual_tol),
            ))
    return Spectrum(params=params, levels=tuple(levels), variable="zeta",
                    options=opts)


def wavefunction(params: ModelParams, parity: Parity, eigen: EnergyValue,
                 n_coeffs: int, method: str = "backward") -> WavefunctionCoeffs:
    """Expansion coefficients phi_0..phi_{n_coeffs} at a refined eigenvalue.

    The backward (default) method runs Miller-style downward recursion
    from a buffered start index, which is stable because the physical
    solution is minimal.  The forward method recurses upward and is kept
    for diagnostics: it raises MethodUnstable as soon as dominant-
    solution contamination stops the factorial decay.
    """
    if n_coeffs < 1:
        raise ValueError("n_coeffs must be >= 1")
    x = eigen.x(params)
    k2 = params.kappa * abs(x) + params.kappa**2 + params.delta / params.kappa
    if method == "forward":
        phi = [ScaledValue.from_float(1.0)]
        a0, _ = rabi_raw_coeffs(params, parity, x, 0)
        phi.append(ScaledValue.from_float(-a0))
        settle = int(math.ceil(2.0 * k2)) + 10
        for n in range(1, n_coeffs):
            a_n, b_n = rabi_raw_coeffs(params, parity, x, n)
            nxt = -(phi[n] * a_n) - phi[n - 1] * b_n
            if n > settle and abs(nxt) > abs(phi[n]):
                raise MethodUnstable(
                    f"forward coefficients stopped decaying at index {n + 1}")
            phi.append(nxt)
    elif method == "backward":
        buffer = max(40, int(math.ceil(k2)) + 20)
        top = n_coeffs + buffer
        nxt = ScaledValue(0.0, 0)
        cur = ScaledValue.from_float(1.0)
        tail = [cur]
        for n in range(top, 0, -1):
            a_n, b_n = rabi_raw_coeffs(params, parity, x, n)
            prev = -(nxt + cur * a_n) / b_n
            tail.append(prev)
            nxt, cur = cur, prev
        tail.reverse()
        phi0 = tail[0]
        if phi0.is_zero:
            raise MethodUnstable("backward recursion lost the phi_0 component")
        phi = [p / phi0 for p in tail[: n_coeffs + 1]]
    else:
        raise ValueError(f"unknown method {method!r}")
    return WavefunctionCoeffs(
        phi=np.array([p.value() for p in phi]),
        phi_scaled=tuple(phi),
        method=method,
    )


def detect_baseline_crossings(kappas: np.ndarray, delta: float, l: int,
                              tol: float = 1e-6,
                              opts: SolverOptions | None = None):
    """Coupling values where both parity chains touch the baseline l - kappa^2.

    Scans the given kappa grid, refines sign changes of the Plus-chain
    distance to the baseline by bisection, and keeps the refined kappa
    only if the Minus chain sits within tol of the baseline there too
    (the double-degeneracy signature).  Grid points where both chains
    are already within tol are kept directly.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    kappas = np.sort(np.asarray(kappas, dtype=float))
    if kappas.size < 2 or kappas[0] <= 0:
        raise ValueError("need an ascending positive kappa grid")
    opts = opts or SolverOptions(n_trunc=max(64, 8 * (l + 3)),
                                 check_stability=False)

    def signed_dist(kappa: float, parity: Parity) -> float:
        sp = solve_spectrum(ModelParams(kappa, delta), parity, l + 3, opts)
        eps = sp.epsilons()
        base = l - kappa**2
        return float(eps[np.argmin(np.abs(eps - base))] - base)

    d_plus = np.array([signed_dist(k, Parity.PLUS) for k in kappas])
    d_minus = np.array([signed_dist(k, Parity.MINUS) for k in kappas])
    found = list(kappas[(np.abs(d_plus) < tol) & (np.abs(d_minus) < tol)])

    flips = np.nonzero(np.sign(d_plus[:-1]) != np.sign(d_plus[1:]))[0]
    for i in flips:
        lo, hi = kappas[i], kappas[i + 1]
        flo = d_plus[i]
        for _ in range(60):
            if hi - lo <= 1e-10:
                break
            mid = 0.5 * (lo + hi)
            fm = signed_dist(mid, Parity.PLUS)
            if np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        star = 0.5 * (lo + hi)
        if (abs(signed_dist(star, Parity.PLUS)) < tol
                and abs(signed_dist(star, Parity.MINUS)) < tol):
            found.append(float(star))
    return sorted(set(found))

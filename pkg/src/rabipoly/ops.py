"""Monic OPS evaluation, zero location, quadrature weights and convergents.

Zeros are found by Sturm-count bisection on the pivot recursion of the
associated Jacobi matrix, which gives guaranteed brackets without any
dense linear algebra.  All polynomial evaluations use paired
power-of-two scaling so that arbitrarily high orders stay finite while
every ratio remains bit-identical to its unscaled value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentWeights, NearPole
from .model import TOL_POLE, MonicRecurrence
from .scaled import ScaledValue

__all__ = [
    "QuadratureRule",
    "eval_monic",
    "eval_monic_vec",
    "sturm_count",
    "sturm_count_vec",
    "poly_zeros",
    "quadrature_weights",
    "convergent",
    "pfd_eval",
    "moments",
]

# Rescale when the binary exponent leaves [-_RESCALE_AT, _RESCALE_AT];
# chosen so that squaring a just-rescaled value cannot overflow.
_RESCALE_AT = 400
_EPS = np.finfo(float).eps


def eval_monic(rec: MonicRecurrence, x: float, n: int):
    """Evaluate (P_n(x), P_{n-1}(x)) as jointly scaled values.

    The pair shares one binary exponent, so P_n/P_{n-1} is exact.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    p_prev, p = 0.0, 1.0
    e = 0
    for k in range(1, n + 1):
        p, p_prev = (x - rec.c(k)) * p - rec.lam(k) * p_prev, p
        m = max(abs(p), abs(p_prev))
        if m != 0.0:
            ex = math.frexp(m)[1]
            if abs(ex) > _RESCALE_AT:
                p = math.ldexp(p, -ex)
                p_prev = math.ldexp(p_prev, -ex)
                e += ex
    return ScaledValue.from_float(p, e), ScaledValue.from_float(p_prev, e)


def eval_monic_vec(rec: MonicRecurrence, xs: np.ndarray, n: int):
    """Vectorized (P_n, P_{n-1}) over an array of points.

    Returns (p, p_prev, e): mantissa arrays and the shared per-point
    binary exponent array.
    """
    xs = np.asarray(xs, dtype=float)
    c, lam = rec.arrays(n) if n >= 1 else (np.empty(0), np.empty(0))
    p_prev = np.zeros_like(xs)
    p = np.ones_like(xs)
    e = np.zeros(xs.shape, dtype=np.int64)
    for k in range(1, n + 1):
        p, p_prev = (xs - c[k - 1]) * p - lam[k - 1] * p_prev, p
        m = np.maximum(np.abs(p), np.abs(p_prev))
        ex = np.frexp(m)[1].astype(np.int64)
        shift = np.where((m != 0.0) & (np.abs(ex) > _RESCALE_AT), -ex, 0)
        if np.any(shift != 0):
            p = np.ldexp(p, shift)
            p_prev = np.ldexp(p_prev, shift)
            e -= shift
    return p, p_prev, e


def sturm_count(rec: MonicRecurrence, x: float, n: int) -> int:
    """Number of zeros of P_n strictly below x (negative-pivot count)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return int(sturm_count_vec(rec, np.asarray([x]), n)[0])


def sturm_count_vec(rec: MonicRecurrence, xs: np.ndarray, n: int) -> np.ndarray:
    """Vectorized Sturm counts over an array of points."""
    xs = np.asarray(xs, dtype=float)
    c, lam = rec.arrays(n)
    d = c[0] - xs
    # zero pivots are nudged negative before counting and dividing
    d = np.where(d == 0.0, -_EPS * (abs(c[0]) + 1.0), d)
    count = (d < 0.0).astype(np.int64)
    for k in range(2, n + 1):
        tiny = _EPS * (abs(c[k - 1]) + lam[k - 1] + 1.0)
        d = (c[k - 1] - xs) - lam[k - 1] / d
        d = np.where(d == 0.0, -tiny, d)
        count += d < 0.0
    return count


def _gershgorin_bounds(rec: MonicRecurrence, n: int):
    c, lam = rec.arrays(n)
    off = np.sqrt(lam[1:]) if n > 1 else np.empty(0)
    r = np.zeros(n)
    if n > 1:
        r[:-1] += off
        r[1:] += off
    return float(np.min(c - r)), float(np.max(c + r))


def poly_zeros(rec: MonicRecurrence, n: int, k_lo: int = 1, k_hi: int | None = None,
               tol: float = 1e-12) -> np.ndarray:
    """Zeros x_{n,k_lo} .. x_{n,k_hi} of P_n, ascending.

    Each zero is bracketed by Sturm bisection to width <= tol and then
    polished by one bisection round on the sign of P_n.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    if k_hi is None:
        k_hi = n
    if not (1 <= k_lo <= k_hi <= n):
        raise ValueError(f"need 1 <= k_lo <= k_hi <= n, got ({k_lo}, {k_hi}, {n})")
    lo0, hi0 = _gershgorin_bounds(rec, n)
    ks = np.arange(k_lo, k_hi + 1)
    lo = np.full(ks.shape, lo0)
    hi = np.full(ks.shape, hi0)
    for _ in range(300):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        ge = sturm_count_vec(rec, mid, n) >= ks
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    # one polish round on the sign of P_n itself
    mid = 0.5 * (lo + hi)
    pm = eval_monic_vec(rec, mid, n)[0]
    plo = eval_monic_vec(rec, lo, n)[0]
    same = np.sign(pm) == np.sign(plo)
    lo = np.where(same, mid, lo)
    hi = np.where(same, hi, mid)
    zeros = 0.5 * (lo + hi)
    if not np.all(np.diff(zeros) > 0):
        raise RuntimeError("located zeros are not strictly increasing; tol too loose?")
    return zeros


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule of the positive-definite moment functional of one family.

    ``weights`` is the plain-float view (extreme nodes of high orders may
    underflow to 0.0 there); ``weights_scaled`` is exact.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    weights_scaled: tuple

    def __post_init__(self):
        if not np.all(np.diff(self.nodes) > 0):
            raise ValueError("nodes must be strictly ascending")
        if any(w.sign <= 0 for w in self.weights_scaled):
            raise ValueError("weights must be strictly positive")


def _twisted_eigenvectors(c: np.ndarray, lam: np.ndarray, nodes: np.ndarray):
    """Eigenvectors of the symmetrized Jacobi matrix at its eigenvalues.

    ``c`` and ``lam`` are the coefficient arrays (c_1..c_n and
    lambda_1..lambda_{n+1}); ``nodes`` the eigenvalues, i.e. the zeros of
    P_n.  Column k of the result is the eigenvector at ``nodes[k]``,
    whose component i is proportional to P_i(x)/sqrt(lambda_1..lambda_{i+1}).

    Direct forward recursion of P_i at a low-lying zero is useless in
    double precision: the zero sits within ~1e-13 of a mass point of the
    measure, where P_i is a minimal solution and forward errors are
    amplified by the dominant one.  A twisted factorization (forward and
    backward pivot sequences joined at the index of smallest residual
    gamma) instead builds every component from pivot ratios, which keeps
    the relative error small at both ends of the vector.

    Returns (mantissa, exponent) arrays of shape (n, len(nodes)); each
    column is normalized to 1 at its twist index.
    """
    x = np.asarray(nodes, dtype=float)
    n = x.size
    a = c[:n, None] - x[None, :]  # diagonal of T - xI, shape (n, k)
    e2 = lam[1:n]  # squared off-diagonals lambda_2..lambda_n
    tiny = _EPS * (np.abs(c[:n, None]) + lam[:n, None] + 1.0)

    dplus = np.empty_like(a)
    d = np.where(a[0] == 0.0, -tiny[0], a[0])
    dplus[0] = d
    for i in range(1, n):
        d = a[i] - e2[i - 1] / d
        d = np.where(d == 0.0, -tiny[i], d)
        dplus[i] = d
    dminus = np.empty_like(a)
    d = np.where(a[n - 1] == 0.0, -tiny[n - 1], a[n - 1])
    dminus[n - 1] = d
    for i in range(n - 2, -1, -1):
        d = a[i] - e2[i] / dminus[i + 1]
        d = np.where(d == 0.0, -tiny[i], d)
        dminus[i] = d

    twist = np.argmin(np.abs(dplus + dminus - a), axis=0)

    off = np.sqrt(e2)
    vm = np.zeros_like(a)
    ve = np.zeros(a.shape, dtype=np.int64)
    vm[twist, np.arange(n)] = 1.0
    for i in range(n - 2, -1, -1):
        below = i < twist
        mm, ee = np.frexp(-(off[i] / dplus[i]) * vm[i + 1])
        vm[i] = np.where(below, 2.0 * mm, vm[i])
        ve[i] = np.where(below, ve[i + 1] + ee - 1, ve[i])
    for i in range(1, n):
        above = i > twist
        mm, ee = np.frexp(-(off[i - 1] / dminus[i]) * vm[i - 1])
        vm[i] = np.where(above, 2.0 * mm, vm[i])
        ve[i] = np.where(above, ve[i - 1] + ee - 1, ve[i])
    return vm, ve


def quadrature_weights(rec: MonicRecurrence, nodes: np.ndarray,
                       cross_check_tol: float = 1e-8) -> QuadratureRule:
    """Weights M_nk at the full zero set of P_n.

    Primary form: M_nk = [sum_{l<n} P_l^2(x_nk) / (lambda_1..lambda_{l+1})]^{-1},
    cross-checked against -(lambda_1..lambda_{n+1}) / (P_{n+1} P_n') with
    P_n' from a parallel derivative recurrence.  Both are expressed in
    the components of the twisted-factorization eigenvector (P_n = 0 at
    a node collapses P_{n+1} to -lambda_{n+1} P_{n-1}); the sum form
    becomes lambda_1 v_0^2 / sum(v^2) and the ratio of the two forms
    becomes v_{n-1} dv_n sqrt(lambda_{n+1}) / sum(v^2).
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    if n < 1:
        raise ValueError("need at least one node")
    c, lam = rec.arrays(n + 1)
    vm, ve = _twisted_eigenvectors(c, lam, nodes)
    vals = np.ldexp(vm, ve)  # far-tail components may underflow; sum unaffected
    ssq = np.sum(vals * vals, axis=0)

    w_mant, w_ex = np.frexp(lam[0] * vm[0] * vm[0] / ssq)
    w_e = 2 * ve[0] + w_ex.astype(np.int64)

    # derivative recurrence in eigenvector units, driven by the components
    sq = np.sqrt(lam)
    dv_prev = np.zeros(n)
    dv = np.zeros(n)
    ee = np.zeros(n, dtype=np.int64)
    for l in range(1, n + 1):
        drive = np.ldexp(vm[l - 1], ve[l - 1] - ee)
        dv, dv_prev = (drive + (nodes - c[l - 1]) * dv - sq[l - 1] * dv_prev) / sq[l], dv
        mx = np.maximum(np.abs(dv), np.abs(dv_prev))
        ex = np.frexp(mx)[1].astype(np.int64)
        shift = np.where((mx != 0.0) & (np.abs(ex) > _RESCALE_AT), -ex, 0)
        if np.any(shift != 0):
            dv = np.ldexp(dv, shift)
            dv_prev = np.ldexp(dv_prev, shift)
            ee -= shift

    ratio = np.ldexp(vm[n - 1] * dv * sq[n] / ssq, ve[n - 1] + ee)
    rel = np.abs(ratio - 1.0)
    if not np.all(np.isfinite(rel)):
        raise InconsistentWeights("weight cross-check produced a non-finite ratio")
    worst = float(np.max(rel))
    if worst > cross_check_tol:
        raise InconsistentWeights(
            f"weight formulas disagree by {worst:.3e} (> {cross_check_tol:.1e})")

    weights = np.ldexp(w_mant, w_e)
    scaled = tuple(ScaledValue.from_float(float(mm), int(exp))
                   for mm, exp in zip(w_mant, w_e))
    total = float(np.sum(weights))
    # the weight sum telescopes to lambda_1 (1 for the base family)
    if abs(total - lam[0]) > 1e-10 * max(1.0, lam[0]):
        raise InconsistentWeights(f"weights sum to {total!r}, expected {lam[0]!r}")
    return QuadratureRule(order=n, nodes=nodes, weights=weights, weights_scaled=scaled)


def convergent(rec0: MonicRecurrence, rec1: MonicRecurrence, a0: float, x: float,
               n: int) -> float:
    """F_n(x) = a0 + P^{(1)}_{n-1}(x) / P_n(x), scaled so exponents cancel."""
    pn, pn_1 = eval_monic(rec0, x, n)
    if pn.is_zero:
        raise NearPole(f"x={x!r} is a zero of P_{n}")
    if not pn_1.is_zero and abs((pn / pn_1).value()) < TOL_POLE:
        raise NearPole(f"x={x!r} is within tolerance of a zero of P_{n}")
    qn, _ = eval_monic(rec1, x, n - 1)
    return a0 + (qn / pn).value()


def pfd_eval(quad: QuadratureRule, a0: float, x: float) -> float:
    """Partial-fraction form a0 + sum_k M_nk / (x - x_nk)."""
    d = x - quad.nodes
    if np.min(np.abs(d)) < TOL_POLE:
        raise NearPole(f"x={x!r} is within tolerance of a quadrature node")
    return a0 + float(np.sum(quad.weights / d))


def moments(rec: MonicRecurrence, n: int) -> np.ndarray:
    """Moments mu_0 .. mu_{2n-1} from the order-n Gauss rule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    nodes = poly_zeros(rec, n)
    quad = quadrature_weights(rec, nodes)
    powers = np.vander(quad.nodes, 2 * n, increasing=True).T  # (2n, n)
    return powers @ quad.weights

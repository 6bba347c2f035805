"""Closed-form displaced-harmonic-oscillator solution, used as ground truth.

The displaced oscillator is the delta = 0 limit of the model: its
spectrum is epsilon_l = l - kappa^2 exactly, and its expansion
coefficients are Charlier-type polynomial evaluations with an explicit
finite sum.  Everything here is independent of the recurrence machinery,
which is what makes it usable as an oracle in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scaled import ScaledValue

__all__ = [
    "dho_eigenvalue",
    "charlier_phi",
    "charlier_phi_scaled",
    "dho_collapse_check",
    "CollapseReport",
    "shift_identity_deviation",
]


def dho_eigenvalue(l: int, kappa: float) -> float:
    """Exact eigenvalue epsilon_l = l - kappa^2."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if not kappa > 0:
        raise ValueError("kappa must be > 0")
    return l - kappa**2


def charlier_phi_scaled(n: int, kappa: float, epsilon: float) -> ScaledValue:
    """phi_n as a scaled value (the plain float underflows near n ~ 170).

    phi_n = sum_{j=0}^{n} (-1)^{n-j} kappa^{n-2j} / ((n-j)! j!)
            * prod_{k<j} (zeta - k),  zeta = epsilon + kappa^2.

    Each j-term follows from the previous one by a single
    multiply/divide, so no factorial is ever formed explicitly.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not kappa > 0:
        raise ValueError("kappa must be > 0")
    zeta = epsilon + kappa**2
    # j = 0 term: (-1)^n kappa^n / n!
    term = ScaledValue.from_float(1.0 if n % 2 == 0 else -1.0)
    for i in range(1, n + 1):
        term = term * (kappa / i)
    total = term
    for j in range(1, n + 1):
        # term_{j} = term_{j-1} * -(n-j+1)(zeta-j+1) / (j kappa^2)
        term = term * (-(n - j + 1) * (zeta - j + 1) / (j * kappa * kappa))
        total = total + term
    return total


def charlier_phi(n: int, kappa: float, epsilon: float) -> float:
    """phi_n as a plain float; see charlier_phi_scaled."""
    return charlier_phi_scaled(n, kappa, epsilon).value()


@dataclass(frozen=True)
class CollapseReport:
    """Outcome of the coefficient-collapse diagnostic at one baseline."""

    l: int
    kappa: float
    n_max: int
    spectral_decays: bool
    rel_dev_at_nmax: float
    off_spectrum_grows: bool


def dho_collapse_check(l: int, kappa: float, n_max: int = 50) -> CollapseReport:
    """Check the sudden-degree-collapse signature at zeta = l.

    On the spectral point the explicit sum truncates at j = l and
    |phi_n| decays factorially, tracking the dominant surviving term
    kappa^(n-2l)/(n-l)! as n grows; half a unit off the spectrum the
    rescaled magnitude |phi_n| (n-l)!/kappa^(n-2l) grows without bound
    instead.  Reports the relative deviation from the dominant-term form
    at n_max and the two qualitative outcomes.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if n_max < 2 * l + 4:
        raise ValueError("n_max too small to see the asymptotic branch")
    eps_on = dho_eigenvalue(l, kappa)

    def leading_log2(n: int) -> float:
        return ((n - 2 * l) * math.log2(kappa)
                - math.lgamma(n - l + 1) / math.log(2.0))

    ns = np.arange(max(l + 1, 2 * l + 1), n_max + 1)
    mags = np.array([charlier_phi_scaled(int(n), kappa, eps_on).log2abs()
                     for n in ns])
    spectral_decays = bool(np.all(np.diff(mags) < 0))
    rel_dev = abs(2.0 ** (mags[-1] - leading_log2(int(ns[-1]))) - 1.0)

    eps_off = eps_on + 0.5
    scaled_off = np.array([
        charlier_phi_scaled(int(n), kappa, eps_off).log2abs() - leading_log2(int(n))
        for n in ns
    ])
    off_grows = bool(scaled_off[-1] > scaled_off[0] + 1.0)
    return CollapseReport(
        l=l,
        kappa=kappa,
        n_max=n_max,
        spectral_decays=spectral_decays,
        rel_dev_at_nmax=float(rel_dev),
        off_spectrum_grows=off_grows,
    )


def shift_identity_deviation(kappa: float, n: int, xs: np.ndarray) -> float:
    """Deviation of the claimed shift relation between two monic families.

    The relation P_n(x) = P_n^(-1)(x - 1/kappa) between the alpha = 0
    and alpha = -1 families is checked numerically on sample points and
    the maximum relative deviation is returned.  It is reported, not
    asserted: the two families carry different lambda sequences, and a
    pure argument shift cannot reconcile them (hand check at n = 2
    already shows a constant offset).
    """
    from .model import ModelParams, Parity, rabi_monic_family
    from .ops import eval_monic

    params = ModelParams(kappa, 0.0)
    rec0 = rabi_monic_family(params, Parity.PLUS, 0)
    recm = rabi_monic_family(params, Parity.PLUS, -1)
    worst = 0.0
    for x in np.asarray(xs, dtype=float):
        p0, _ = eval_monic(rec0, float(x), n)
        pm, _ = eval_monic(recm, float(x) - 1.0 / kappa, n)
        scale = max(abs(p0.value()), abs(pm.value()), 1.0)
        worst = max(worst, abs(p0.value() - pm.value()) / scale)
    return worst

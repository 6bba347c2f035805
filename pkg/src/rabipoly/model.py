"""Physical parameters and recurrence coefficients of the Rabi model.

All spectral machinery in this package is driven by three-term
recurrences ``phi_{n+1} + a_n phi_n + b_n phi_{n-1} = 0``.  This module
generates the coefficient streams: the parity-resolved Rabi pair, the
unresolved (Schweber) form in the zeta variable, the displaced-oscillator
limit, and the monic orthogonal-polynomial families obtained from them.

Coefficients are always computed on demand from closed forms, so
arbitrarily high orders cost nothing in storage.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PoleAtInteger

__all__ = [
    "TOL_POLE",
    "Parity",
    "ModelParams",
    "EnergyValue",
    "MonicRecurrence",
    "rabi_raw_coeffs",
    "rabi_monic_family",
    "schweber_coeffs",
    "dho_raw_coeffs",
    "energy_convert",
    "RabiCoeffs",
    "SchweberCoeffs",
    "condition45_threshold",
]

# Absolute tolerance for detecting zeta on a nonnegative integer pole.
TOL_POLE = 1e-9


class Parity(enum.Enum):
    """Label of the two invariant chains of the Z2 symmetry."""

    PLUS = 1
    MINUS = -1

    @property
    def sign(self) -> int:
        return self.value

    def __str__(self) -> str:
        return "plus" if self is Parity.PLUS else "minus"

    @staticmethod
    def from_string(s: str) -> "Parity":
        try:
            return {"plus": Parity.PLUS, "minus": Parity.MINUS}[s.lower()]
        except KeyError:
            raise ValueError(f"unknown parity {s!r}") from None


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless model parameters.

    kappa = g/omega is the coupling, delta = omega_0/(2 omega) the level
    splitting, omega the frequency scale used only to convert
    dimensionless energies to E.  kappa = 0 is rejected: the coefficient
    streams divide by kappa, and the uncoupled limit is out of scope.
    """

    kappa: float
    delta: float
    omega: float = 1.0

    def __post_init__(self):
        if not (self.kappa > 0.0):
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if not (self.delta >= 0.0):
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if not (self.omega > 0.0):
            raise ValueError(f"omega must be > 0, got {self.omega}")


@dataclass(frozen=True)
class EnergyValue:
    """An energy stored as the dimensionless epsilon = E/omega.

    The x = epsilon/kappa and zeta = epsilon + kappa^2 views are exact
    affine conversions computed on demand.
    """

    epsilon: float

    def x(self, params: ModelParams) -> float:
        return self.epsilon / params.kappa

    def zeta(self, params: ModelParams) -> float:
        return self.epsilon + params.kappa**2

    def energy(self, params: ModelParams) -> float:
        return self.epsilon * params.omega

    @staticmethod
    def from_x(x: float, params: ModelParams) -> "EnergyValue":
        return EnergyValue(x * params.kappa)

    @staticmethod
    def from_zeta(zeta: float, params: ModelParams) -> "EnergyValue":
        return EnergyValue(zeta - params.kappa**2)


def energy_convert(value: float, frm: str, to: str, params: ModelParams) -> float:
    """Convert between the epsilon / x / zeta / E representations."""
    if frm == "epsilon":
        eps = value
    elif frm == "x":
        eps = value * params.kappa
    elif frm == "zeta":
        eps = value - params.kappa**2
    else:
        raise ValueError(f"unknown source representation {frm!r}")
    if to == "epsilon":
        return eps
    if to == "x":
        return eps / params.kappa
    if to == "zeta":
        return eps + params.kappa**2
    if to == "E":
        return eps * params.omega
    raise ValueError(f"unknown target representation {to!r}")


def _cbar(params: ModelParams, parity: Parity, n):
    """c_bar_n = [n +/- (-1)^n delta] / kappa; n may be an int or array."""
    n = np.asarray(n, dtype=float)
    alt = np.where(np.asarray(n).astype(np.int64) % 2 == 0, 1.0, -1.0)
    return (n + parity.sign * alt * params.delta) / params.kappa


def rabi_raw_coeffs(params: ModelParams, parity: Parity, x: float, n: int):
    """Raw (a_n, b_n) of the parity-resolved Rabi recurrence.

    a_n = -(x - c_bar_n)/(n+1), b_n = 1/(n+1).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    cb = float(_cbar(params, parity, n))
    return -(x - cb) / (n + 1), 1.0 / (n + 1)


def dho_raw_coeffs(kappa: float, x: float, n: int):
    """Raw (a_n, b_n) of the displaced-harmonic-oscillator recurrence.

    Identical to the Rabi stream with delta = 0.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not kappa > 0:
        raise ValueError("kappa must be > 0")
    return (n - kappa * x) / ((n + 1) * kappa), 1.0 / (n + 1)


def schweber_coeffs(params: ModelParams, zeta: float, n: int) -> float:
    """f_n(zeta) of the unresolved recurrence in the zeta variable.

    f_n = 2 kappa + (1/(2 kappa)) (n - zeta - delta^2/(n - zeta)).
    Raises PoleAtInteger when zeta sits within TOL_POLE of an integer
    >= 0 (each such integer is a pole of some f_m).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    check_zeta_off_poles(zeta)
    k = params.kappa
    return 2 * k + (n - zeta - params.delta**2 / (n - zeta)) / (2 * k)


def check_zeta_off_poles(zeta: float, tol: float = TOL_POLE) -> None:
    m = round(zeta)
    if m >= 0 and abs(zeta - m) < tol:
        raise PoleAtInteger(zeta, int(m))


@dataclass(frozen=True)
class MonicRecurrence:
    """Coefficient stream (c_n, lambda_n), n >= 1, of one monic OPS family.

    P_n = (x - c_n) P_{n-1} - lambda_n P_{n-2}, P_{-1} = 0, P_0 = 1.
    The coefficients are real, independent of x, and lambda_n > 0.
    """

    alpha: int
    c_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    lam_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def c(self, n: int) -> float:
        return float(self.c_fn(np.asarray([n]))[0])

    def lam(self, n: int) -> float:
        return float(self.lam_fn(np.asarray([n]))[0])

    def arrays(self, n: int):
        """(c_1..c_n, lambda_1..lambda_n) as float arrays."""
        idx = np.arange(1, n + 1)
        return self.c_fn(idx), self.lam_fn(idx)

    @staticmethod
    def from_functions(alpha, c_fn, lam_fn) -> "MonicRecurrence":
        return MonicRecurrence(alpha, c_fn, lam_fn)


def rabi_monic_family(params: ModelParams, parity: Parity, alpha: int) -> MonicRecurrence:
    """Monic OPS family for the Rabi model: c_n = c_bar_{n+alpha}, lambda_n = n+alpha.

    alpha = 0 gives the continued-fraction denominators, +1 the
    numerators, -1 the wavefunction-coefficient polynomials.  For
    alpha = -1, lambda_1 is a free choice and is set to 1.
    """
    if alpha not in (-1, 0, 1):
        raise ValueError(f"alpha must be in {{-1, 0, 1}}, got {alpha}")

    def c_fn(idx):
        return _cbar(params, parity, np.asarray(idx) + alpha)

    if alpha == -1:
        def lam_fn(idx):
            idx = np.asarray(idx, dtype=float)
            return np.where(idx == 1, 1.0, idx - 1.0)
    else:
        def lam_fn(idx, _a=alpha):
            return np.asarray(idx, dtype=float) + _a

    return MonicRecurrence(alpha, c_fn, lam_fn)


class RabiCoeffs:
    """Vector-aware raw coefficient source for the parity-resolved route.

    Works in the x = epsilon/kappa variable; ``a`` accepts a scalar or an
    array of x values.
    """

    variable = "x"

    def __init__(self, params: ModelParams, parity: Parity):
        self.params = params
        self.parity = parity

    def a0(self, x):
        return -(x - float(_cbar(self.params, self.parity, 0)))

    def a(self, n: int, x):
        return -(x - float(_cbar(self.params, self.parity, n))) / (n + 1)

    def b(self, n: int) -> float:
        return 1.0 / (n + 1)


class SchweberCoeffs:
    """Vector-aware raw coefficient source for the unresolved zeta route.

    Normalized to the canonical sign convention: a_n = -f_n/(n+1).
    """

    variable = "zeta"

    def __init__(self, params: ModelParams):
        self.params = params

    def f(self, n: int, zeta):
        k = self.params.kappa
        return 2 * k + (n - zeta - self.params.delta**2 / (n - zeta)) / (2 * k)

    def a0(self, zeta):
        return -self.f(0, zeta)

    def a(self, n: int, zeta):
        return -self.f(n, zeta) / (n + 1)

    def b(self, n: int) -> float:
        return 1.0 / (n + 1)


def condition45_threshold(params: ModelParams, parity: Parity, n_max: int = 10_000):
    """Smallest N0 with lambda_{n+1}/(c_bar_n c_bar_{n+1}) < 1/4 for all n in [N0, n_max].

    Sanity check that the zero set of the OPS extends to +infinity.
    Returns None if no such threshold exists below n_max.
    """
    n = np.arange(1, n_max + 1)
    cb = _cbar(params, parity, n)
    cb_next = _cbar(params, parity, n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (n + 1) / (cb * cb_next)
    ok = ratio < 0.25
    if not ok[-1]:
        return None
    # last violation, if any
    bad = np.nonzero(~ok)[0]
    if bad.size == 0:
        return 1
    n0 = int(n[bad[-1]]) + 1
    return n0 if n0 <= n_max else None


def parity_for_delta_zero() -> Parity:
    """Either parity works when delta = 0; fix one for deterministic output."""
    return Parity.PLUS

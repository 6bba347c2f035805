"""Power-of-two scaled floating point values.

Three-term recurrences of interest grow or shrink factorially, which
overflows IEEE doubles long before the mathematics breaks down.  A
``ScaledValue`` keeps a mantissa in ``[1, 2)`` together with a separate
binary exponent, so that rescaling is exact: ratios of jointly rescaled
quantities are bit-identical to their unscaled counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ScaledValue"]


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as ``mantissa * 2**exponent``.

    ``|mantissa|`` lies in ``[1, 2)``, or is exactly ``0.0`` (with
    exponent 0) for the zero value.  The sign lives on the mantissa.
    """

    mantissa: float
    exponent: int

    @staticmethod
    def from_float(value: float, exponent: int = 0) -> "ScaledValue":
        """Normalize ``value * 2**exponent`` into a ScaledValue."""
        if value == 0.0:
            return ScaledValue(0.0, 0)
        if not math.isfinite(value):
            raise ValueError(f"cannot scale non-finite value {value!r}")
        m, e = math.frexp(value)  # |m| in [0.5, 1)
        return ScaledValue(m * 2.0, e - 1 + exponent)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0.0

    @property
    def sign(self) -> int:
        if self.mantissa > 0.0:
            return 1
        if self.mantissa < 0.0:
            return -1
        return 0

    def value(self) -> float:
        """Collapse to a plain float; may overflow to inf or underflow to 0."""
        if self.is_zero:
            return 0.0
        try:
            return math.ldexp(self.mantissa, self.exponent)
        except OverflowError:
            return math.inf if self.mantissa > 0 else -math.inf

    def log2abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log2(abs(self.mantissa)) + self.exponent

    def __neg__(self) -> "ScaledValue":
        return ScaledValue(-self.mantissa, self.exponent)

    def __abs__(self) -> "ScaledValue":
        return ScaledValue(abs(self.mantissa), self.exponent)

    def __mul__(self, other) -> "ScaledValue":
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return ScaledValue(0.0, 0)
        return ScaledValue.from_float(
            self.mantissa * other.mantissa, self.exponent + other.exponent
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledValue":
        other = _coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("ScaledValue division by zero")
        if self.is_zero:
            return ScaledValue(0.0, 0)
        return ScaledValue.from_float(
            self.mantissa / other.mantissa, self.exponent - other.exponent
        )

    def __add__(self, other) -> "ScaledValue":
        other = _coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self, other) if self.exponent >= other.exponent else (other, self)
        shift = lo.exponent - hi.exponent
        # far below the big term the small one cannot affect the mantissa
        if shift < -1080:
            return hi
        return ScaledValue.from_float(
            hi.mantissa + math.ldexp(lo.mantissa, shift), hi.exponent
        )

    def __sub__(self, other) -> "ScaledValue":
        return self + (-_coerce(other))

    def ratio(self, other: "ScaledValue") -> float:
        """self / other as a plain float (exponents mostly cancel)."""
        return (self / other).value()

    def __lt__(self, other) -> bool:
        return (self - _coerce(other)).sign < 0

    def __le__(self, other) -> bool:
        return (self - _coerce(other)).sign <= 0

    def __gt__(self, other) -> bool:
        return (self - _coerce(other)).sign > 0

    def __ge__(self, other) -> bool:
        return (self - _coerce(other)).sign >= 0


def _coerce(x) -> ScaledValue:
    if isinstance(x, ScaledValue):
        return x
    return ScaledValue.from_float(float(x))

"""Exact rationals or outward-rounded MPFR intervals, with a certified sign."""
from __future__ import annotations

import contextlib
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr


def down(bits: int):
    return gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundDown)


def up(bits: int):
    return gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundUp)


def enclose(x: Fraction, bits: int) -> tuple:
    """Tightest ``bits``-bit floats bracketing ``x``."""
    q = gmpy2.mpq(x.numerator, x.denominator)
    with down(bits):
        lo = mpfr(q)
    with up(bits):
        hi = mpfr(q)
    return lo, hi


def _to_fraction(x) -> Fraction:
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def decimal_bound(x: Fraction, digits: int = 30, upward: bool = False) -> str:
    """Decimal string ``Ne<exp>`` rounded toward +inf (``upward``) or -inf."""
    if x == 0:
        return "0"
    mag = abs(x)
    # bit lengths, not str(): huge ints exceed the default str-conversion limit
    e = math.floor((mag.numerator.bit_length() - mag.denominator.bit_length()) * math.log10(2))
    shift = digits - 1 - e
    scaled = x * Fraction(10) ** shift
    n = math.ceil(scaled) if upward else math.floor(scaled)
    return f"{n}e{-shift}"


@contextlib.contextmanager
def _unlimited_digits():
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        yield
        return
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def fraction_str(x: Fraction) -> str:
    """``num/den`` text for a rational of any size."""
    x = Fraction(x)
    with _unlimited_digits():
        return f"{x.numerator}/{x.denominator}"


def log10_abs(x: Fraction) -> float:
    if x == 0:
        return float("-inf")
    return math.log10(abs(x.numerator)) - math.log10(x.denominator)


@dataclass(frozen=True)
class CertifiedNumber:
    """Either an exact rational or an interval ``[lo, hi]`` at ``bits`` precision."""

    exact: Fraction | None = None
    lo: object = None
    hi: object = None
    bits: int | None = None

    @classmethod
    def of(cls, x) -> CertifiedNumber:
        return cls(exact=Fraction(x))

    @classmethod
    def interval(cls, lo, hi, bits: int) -> CertifiedNumber:
        if lo > hi:
            raise ValueError("interval with lo > hi")
        return cls(lo=lo, hi=hi, bits=bits)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def sign(self) -> int | None:
        """-1, 0 or 1 when certified, ``None`` when the interval straddles zero."""
        if self.is_exact:
            return (self.exact > 0) - (self.exact < 0)
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def contains(self, x: Fraction) -> bool:
        if self.is_exact:
            return self.exact == x
        return _to_fraction(self.lo) <= x <= _to_fraction(self.hi)

    def __sub__(self, other: CertifiedNumber) -> CertifiedNumber:
        if self.is_exact and other.is_exact:
            return CertifiedNumber(exact=self.exact - other.exact)
        bits = min(b for b in (self.bits, other.bits) if b)
        a_lo, a_hi = self._bounds(bits)
        b_lo, b_hi = other._bounds(bits)
        with down(bits):
            lo = a_lo - b_hi
        with up(bits):
            hi = a_hi - b_lo
        return CertifiedNumber(lo=lo, hi=hi, bits=bits)

    def _bounds(self, bits: int):
        if self.is_exact:
            return enclose(self.exact, bits)
        return self.lo, self.hi

    def log10_abs_window(self) -> tuple[float, float]:
        """Bounds on ``log10 |x|`` (equal for exact values)."""
        if self.is_exact:
            v = log10_abs(self.exact)
            return v, v
        ends = sorted((abs(_to_fraction(self.lo)), abs(_to_fraction(self.hi))))
        if self.sign() is None:
            return float("-inf"), log10_abs(ends[1])
        return log10_abs(ends[0]), log10_abs(ends[1])

    def upper_abs(self) -> Fraction:
        if self.is_exact:
            return abs(self.exact)
        return max(abs(_to_fraction(self.lo)), abs(_to_fraction(self.hi)))

    def to_json(self):
        if self.is_exact:
            return fraction_str(self.exact)
        return {
            "lo": decimal_bound(_to_fraction(self.lo), upward=False),
            "hi": decimal_bound(_to_fraction(self.hi), upward=True),
            "bits": self.bits,
        }

    def __str__(self) -> str:
        if self.is_exact:
            return fraction_str(self.exact)
        j = self.to_json()
        return f"[{j['lo']}, {j['hi']}] ({self.bits} bits)"

"""Fixed-point phase arithmetic and compensated evaluation of cubic Weyl sums.

Phases live on the torus [0,1) as 128-bit binary fractions, so frac(n*alpha)
is computed by exact integer multiplication modulo 2^128 instead of lossy
binary64 reduction (x^3*alpha for x near 2^21 would lose ~63 bits in a
double).  The unit-circle evaluation folds the fixed-point phase into the
first octant-equivalent range with exact quarter-point values, which makes
complex conjugation an exact bit-level symmetry of eval_g/eval_f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

SCALE_BITS = 128
SCALE = 1 << SCALE_BITS
_MASK = SCALE - 1
_QUARTER = SCALE >> 2
_HALF = SCALE >> 1
_THREE_QUARTER = _QUARTER * 3

# Multiplier guard.  The stated working range is n < 2^64 (error n*2^-128 <=
# 2^-64); the cap is set wider so that x^k for k=6, X=2048 (x^k < 2^67) stays
# evaluable, at phase error still below 2^-48.
_N_CAP = 1 << 80

_X_CAP_G = 1 << 21  # keeps x^3 < 2^63

RealLike = Union[int, float, str, Fraction]


@dataclass(frozen=True)
class FixedPhase:
    """A point of [0,1) stored as frac/2^128; arithmetic wraps modulo 1."""

    frac: int

    def __post_init__(self) -> None:
        if not isinstance(self.frac, int):
            raise TypeError("frac must be an integer")
        if not 0 <= self.frac < SCALE:
            raise ValueError("frac out of [0, 2^128)")

    @staticmethod
    def from_rational(a: int, q: int) -> "FixedPhase":
        """floor((a/q) * 2^128) / 2^128; error < 2^-128.

        Requires 0 <= a < q and 0 < q < 2^63.
        """
        if q <= 0 or q >= (1 << 63):
            raise ValueError("q must satisfy 0 < q < 2^63")
        if not 0 <= a < q:
            raise ValueError("a must lie in [0, q)")
        return FixedPhase((a << SCALE_BITS) // q)

    @staticmethod
    def from_real(x: RealLike) -> "FixedPhase":
        """Parse a real number (float, decimal string, or Fraction) mod 1.

        Floats and decimal strings are converted through exact rational
        arithmetic, so the only rounding is the final floor to 2^-128.
        """
        r = Fraction(x)
        r -= math.floor(r)
        return FixedPhase((r.numerator << SCALE_BITS) // r.denominator)

    def mul_int(self, n: int) -> "FixedPhase":
        """frac(n * alpha); exact modular arithmetic, wraps for negative n."""
        if abs(n) >= _N_CAP:
            raise ValueError("multiplier too large (|n| >= 2^80)")
        return FixedPhase((n * self.frac) & _MASK)

    def add(self, other: "FixedPhase") -> "FixedPhase":
        return FixedPhase((self.frac + other.frac) & _MASK)

    def complement(self) -> "FixedPhase":
        """frac(1 - alpha) = frac(-alpha)."""
        return FixedPhase((-self.frac) & _MASK)

    def as_fraction(self) -> Fraction:
        return Fraction(self.frac, SCALE)

    def to_float(self) -> float:
        return self.frac / SCALE


def phase_frac(alpha: FixedPhase, n: int) -> FixedPhase:
    """frac(n * alpha) with absolute error < n * 2^-128.

    Full-width integer multiply keeping the low 128 fractional bits; wrapping
    is the torus semantics, so there is no error condition beyond the size cap.
    """
    return alpha.mul_int(n)


def unit(frac: int) -> Tuple[float, float]:
    """(cos, sin) of 2*pi*frac/2^128.

    Quarter points are exact, and unit(2^128 - frac) is the exact conjugate
    of unit(frac): the reduction below maps both arguments to the identical
    folded value, so the cosine bits agree and the sine is negated.  That
    symmetry is what makes the conjugation invariant of eval_g bit-level.
    """
    if frac == 0:
        return (1.0, 0.0)
    if frac == _QUARTER:
        return (0.0, 1.0)
    if frac == _HALF:
        return (-1.0, 0.0)
    if frac == _THREE_QUARTER:
        return (0.0, -1.0)
    s_sign = 1.0
    m = frac
    if m > _HALF:
        m = SCALE - m
        s_sign = -1.0
    c_sign = 1.0
    if m > _QUARTER:
        m = _HALF - m
        c_sign = -1.0
    # m is now strictly inside (0, 2^126): the angle is in (0, pi/2), where
    # binary64 sin/cos are well conditioned.
    t = math.tau * (m / SCALE)
    return (c_sign * math.cos(t), s_sign * math.sin(t))


def kahan_add(total: float, comp: float, value: float) -> Tuple[float, float]:
    """One compensated-summation step; returns (new_total, new_compensation)."""
    y = value - comp
    t = total + y
    comp = (t - total) - y
    return t, comp


def _check_span(X: int, span) -> Tuple[int, int]:
    if span is None:
        return 1, X
    lo, hi = span
    if not (1 <= lo and hi <= X):
        raise ValueError("span must lie inside [1, X]")
    return lo, hi


def eval_g(alpha: FixedPhase, beta: FixedPhase, X: int,
           span: Tuple[int, int] | None = None) -> complex:
    """Sum of e(alpha*x^3 + beta*x) for x in span (default [1, X]).

    X <= 2^21 so that x^3 < 2^63; per-term phase error < 2^-63, and the
    compensated accumulation keeps the splitting discrepancy under X*2^-50.
    """
    if not 1 <= X <= _X_CAP_G:
        raise ValueError("X must satisfy 1 <= X <= 2^21 (cube overflow guard)")
    lo, hi = _check_span(X, span)
    fa = alpha.frac
    fb = beta.frac
    re = ce = 0.0
    im = ci = 0.0
    for x in range(lo, hi + 1):
        c, s = unit((x * x * x * fa + x * fb) & _MASK)
        re, ce = kahan_add(re, ce, c)
        im, ci = kahan_add(im, ci, s)
    return complex(re, im)


def eval_f(alpha: FixedPhase, k: int, X: int) -> complex:
    """Sum of e(alpha*x^k) for 1 <= x <= X, same error contract as eval_g.

    The stated working range is X^k < 2^64; inputs are accepted up to
    X^k < 2^80 (phase error still < 2^-48) and rejected beyond that.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if X < 1:
        raise ValueError("X must be positive")
    if X ** k >= _N_CAP:
        raise ValueError("x^k overflows the multiplier cap (X^k >= 2^80)")
    fa = alpha.frac
    re = ce = 0.0
    im = ci = 0.0
    for x in range(1, X + 1):
        c, s = unit((x ** k * fa) & _MASK)
        re, ce = kahan_add(re, ce, c)
        im, ci = kahan_add(im, ci, s)
    return complex(re, im)

"""Exact rationals, eventually periodic base-p digit expansions, and
directed-rounding interval arithmetic.

Everything downstream (digit counting, the fractal fixed-point function,
the certification sweeps) is built on three carriers:

* exact rationals -- plain ``fractions.Fraction``; every quantity that can
  be exact stays exact,
* ``PAdicExpansion`` -- the canonical eventually periodic digit string of a
  rational in [0, 1] in base p, obtained by long division with
  remainder-cycle detection,
* ``RInterval`` -- a floating interval with outward rounding at a chosen
  mantissa precision, wrapping mpmath's ``libmp`` interval kernel.  It is
  the carrier for every inequality that involves the irrational growth
  exponent log_p(p(p+1)/2), and nothing else: all comparisons against
  interval endpoints are done on their exact binary-rational values, so no
  decision in the package ever depends on round-to-nearest arithmetic.

Intervals only ever *enclose*; strictness of a certified inequality is
always obtained from the exact lower endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from mpmath import libmp
from mpmath.libmp import (
    from_int,
    from_rational,
    mpf_cmp,
    round_ceiling,
    round_floor,
)

__all__ = [
    "PrecisionCapError",
    "PAdicExpansion",
    "to_padic",
    "RInterval",
    "interval_pow",
    "refine",
    "as_fraction",
    "DEFAULT_PRECISION",
    "PRECISION_CAP",
]

DEFAULT_PRECISION = 128
PRECISION_CAP = 4096


class PrecisionCapError(ArithmeticError):
    """An enclosure could not be tightened within the precision budget."""


def as_fraction(x) -> Fraction:
    """Coerce int / Fraction / 'a/b' or decimal string to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("refusing to coerce float %r; pass a Fraction or string" % (x,))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


# ---------------------------------------------------------------------------
# Base-p expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PAdicExpansion:
    """Canonical eventually periodic base-``base`` expansion of x in [0, 1].

    ``x = sum_j d_j base^(-j)`` where the digit sequence is ``preperiod``
    followed by ``period`` repeated forever.  Canonical form means:

    * the period is the minimal cycle,
    * the preperiod is minimal (no digit of it could be absorbed into a
      rotation of the period),
    * a trailing all-(base-1) period is carried away into the terminating
      representation -- the sole exception is x = 1 itself, whose only
      expansion is ``0.(base-1)(base-1)...``.

    With these rules equality of values is equality of structures.
    """

    base: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        p = self.base
        if p < 2:
            raise ValueError("base must be at least 2")
        if not self.period:
            raise ValueError("period must be nonempty")
        for d in (*self.preperiod, *self.period):
            if not 0 <= d < p:
                raise ValueError(f"digit {d} out of range for base {p}")
        pre, per = _normalize_digits(p, list(self.preperiod), list(self.period))
        object.__setattr__(self, "preperiod", tuple(pre))
        object.__setattr__(self, "period", tuple(per))

    def value(self) -> Fraction:
        """Exact rational reconstructed from the digit string."""
        p = self.base
        m = len(self.preperiod)
        pre_int = 0
        for d in self.preperiod:
            pre_int = pre_int * p + d
        per_int = 0
        for d in self.period:
            per_int = per_int * p + d
        val = Fraction(pre_int, p**m)
        val += Fraction(per_int, (p ** len(self.period) - 1) * p**m)
        return val

    def digits_prefix(self, n: int) -> list[int]:
        """First n digits, cycling through the period as needed."""
        out = list(self.preperiod[:n])
        need = n - len(out)
        if need > 0:
            L = len(self.period)
            reps, rem = divmod(need, L)
            out.extend(self.period * reps)
            out.extend(self.period[:rem])
        return out

    def digit_stream(self) -> Iterator[int]:
        yield from self.preperiod
        while True:
            yield from self.period

    def __str__(self):
        pre = "".join(str(d) + ("," if self.base > 10 else "") for d in self.preperiod)
        per = "".join(str(d) + ("," if self.base > 10 else "") for d in self.period)
        return f"0.{pre}({per})_base{self.base}"


def _normalize_digits(p: int, pre: list[int], per: list[int]) -> tuple[list[int], list[int]]:
    # Carry away a trailing all-(p-1) cycle: 0.d1..dk(p-1 p-1 ...) = 0.d1..(dk+1).
    if all(d == p - 1 for d in per):
        if not pre or all(d == p - 1 for d in pre):
            return [], [p - 1]  # x = 1, the one legitimate all-(p-1) string
        while pre and pre[-1] == p - 1:
            pre.pop()
        pre[-1] += 1
        per = [0]
    # Minimal cycle.
    L = len(per)
    for d in range(1, L + 1):
        if L % d == 0 and per == per[:d] * (L // d):
            per = per[:d]
            break
    # Minimal preperiod: absorb digits that merely rotate the period.
    while pre and pre[-1] == per[-1]:
        pre.pop()
        per = [per[-1]] + per[:-1]
    return pre, per


def to_padic(x, p: int) -> PAdicExpansion:
    """Canonical base-p expansion of a rational x with 0 <= x <= 1.

    Long division: with x = a/b, iterate a -> p*a mod b, emitting the digit
    floor(p*a / b) at each step.  The remainder determines the entire digit
    tail, so the first repeated remainder marks both the minimal preperiod
    and the minimal period.
    """
    x = as_fraction(x)
    if p < 2:
        raise ValueError("base must be at least 2")
    if not 0 <= x <= 1:
        raise ValueError(f"expected 0 <= x <= 1, got {x}")
    if x == 1:
        return PAdicExpansion(p, (), (p - 1,))
    num, den = x.numerator, x.denominator
    seen: dict[int, int] = {}
    digits: list[int] = []
    r = num
    while r not in seen:
        seen[r] = len(digits)
        r *= p
        d, r = divmod(r, den)
        digits.append(d)
    start = seen[r]
    return PAdicExpansion(p, tuple(digits[:start]), tuple(digits[start:]))


def padic_digits_prefix(x: Fraction, p: int, n: int) -> tuple[list[int], Fraction]:
    """First n base-p digits of x in [0, 1), plus the exact remainder.

    Cheaper than :func:`to_padic` when the period is astronomically long
    (denominators of generic sweep grid points): no cycle detection, just n
    steps of long division.  Returns ``(digits, r)`` with
    ``x = (int(digits) + r) / p**n`` and ``0 <= r < 1``.
    """
    num, den = x.numerator, x.denominator
    if not 0 <= num < den or (num == den):
        if num == den:  # x == 1 has no terminating prefix
            raise ValueError("digit prefix requires x < 1")
        raise ValueError(f"expected 0 <= x < 1, got {x}")
    digits = []
    r = num
    for _ in range(n):
        r *= p
        d, r = divmod(r, den)
        digits.append(d)
    return digits, Fraction(r, den)


# ---------------------------------------------------------------------------
# Directed-rounding intervals
# ---------------------------------------------------------------------------

_MPF_ZERO = from_int(0)
_MPF_ONE = from_int(1)


def _raw_to_fraction(raw) -> Fraction:
    """Exact rational value of a finite raw libmp float."""
    sign, man, exp, bc = raw
    if man == 0:
        if exp != 0:  # inf/nan sentinels use man == 0, exp != 0
            raise OverflowError("interval endpoint is not finite")
        return Fraction(0)
    m = -man if sign else man
    if exp >= 0:
        return Fraction(m << exp)
    return Fraction(m, 1 << (-exp))


@dataclass(frozen=True)
class RInterval:
    """A closed interval [lo, hi] of binary floats enclosing a real number.

    ``lo`` and ``hi`` are raw libmp mantissa/exponent tuples produced with
    round-toward-minus/plus-infinity respectively; every operation on
    intervals rounds outward, so the result always encloses the exact image
    of the operands.  Instances are immutable; ``prec`` records the working
    mantissa size used to produce the enclosure.
    """

    lo: tuple
    hi: tuple
    prec: int

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_fraction(x, prec: int = DEFAULT_PRECISION) -> "RInterval":
        x = as_fraction(x)
        lo = from_rational(x.numerator, x.denominator, prec, round_floor)
        hi = from_rational(x.numerator, x.denominator, prec, round_ceiling)
        return RInterval(lo, hi, prec)

    @staticmethod
    def from_pair(lo, hi, prec: int = DEFAULT_PRECISION) -> "RInterval":
        lo = as_fraction(lo)
        hi = as_fraction(hi)
        if lo > hi:
            raise ValueError("interval endpoints out of order")
        rlo = from_rational(lo.numerator, lo.denominator, prec, round_floor)
        rhi = from_rational(hi.numerator, hi.denominator, prec, round_ceiling)
        return RInterval(rlo, rhi, prec)

    # -- exact views ---------------------------------------------------

    @property
    def lo_fraction(self) -> Fraction:
        return _raw_to_fraction(self.lo)

    @property
    def hi_fraction(self) -> Fraction:
        return _raw_to_fraction(self.hi)

    @property
    def width(self) -> Fraction:
        return self.hi_fraction - self.lo_fraction

    def mid_float(self) -> float:
        return float((self.lo_fraction + self.hi_fraction) / 2)

    # -- predicates ----------------------------------------------------

    def contains(self, x) -> bool:
        if isinstance(x, RInterval):
            return self.lo_fraction <= x.lo_fraction and x.hi_fraction <= self.hi_fraction
        x = as_fraction(x)
        return self.lo_fraction <= x <= self.hi_fraction

    def intersects(self, other: "RInterval") -> bool:
        return self.lo_fraction <= other.hi_fraction and other.lo_fraction <= self.hi_fraction

    def strictly_positive(self) -> bool:
        return self.lo_fraction > 0

    def strictly_less_than(self, other: "RInterval") -> bool:
        """Certainly-less: every point of self below every point of other."""
        return self.hi_fraction < other.lo_fraction

    # -- arithmetic ------------------------------------------------------

    def _pair(self):
        return (self.lo, self.hi)

    def _wrap(self, raw_pair, prec) -> "RInterval":
        return RInterval(raw_pair[0], raw_pair[1], prec)

    def _coerce(self, other, prec) -> "RInterval":
        if isinstance(other, RInterval):
            return other
        return RInterval.from_fraction(as_fraction(other), prec)

    def __add__(self, other):
        prec = max(self.prec, getattr(other, "prec", 0))
        o = self._coerce(other, prec)
        return self._wrap(libmp.mpi_add(self._pair(), o._pair(), prec), prec)

    __radd__ = __add__

    def __sub__(self, other):
        prec = max(self.prec, getattr(other, "prec", 0))
        o = self._coerce(other, prec)
        return self._wrap(libmp.mpi_sub(self._pair(), o._pair(), prec), prec)

    def __rsub__(self, other):
        prec = self.prec
        return self._coerce(other, prec).__sub__(self)

    def __mul__(self, other):
        prec = max(self.prec, getattr(other, "prec", 0))
        o = self._coerce(other, prec)
        return self._wrap(libmp.mpi_mul(self._pair(), o._pair(), prec), prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        prec = max(self.prec, getattr(other, "prec", 0))
        o = self._coerce(other, prec)
        if o.lo_fraction <= 0 <= o.hi_fraction:
            raise ZeroDivisionError("interval divisor contains zero")
        return self._wrap(libmp.mpi_div(self._pair(), o._pair(), prec), prec)

    def __rtruediv__(self, other):
        return self._coerce(other, self.prec).__truediv__(self)

    def __neg__(self):
        return self._wrap(libmp.mpi_neg(self._pair(), self.prec), self.prec)

    def log(self) -> "RInterval":
        if self.lo_fraction <= 0:
            raise ValueError("log of interval touching (-inf, 0]")
        return self._wrap(libmp.mpi_log(self._pair(), self.prec), self.prec)

    def exp(self) -> "RInterval":
        return self._wrap(libmp.mpi_exp(self._pair(), self.prec), self.prec)

    def intersection(self, other: "RInterval") -> "RInterval":
        """Intersection of two enclosures of the same real number."""
        lo = self.lo if mpf_cmp(self.lo, other.lo) >= 0 else other.lo
        hi = self.hi if mpf_cmp(self.hi, other.hi) <= 0 else other.hi
        if mpf_cmp(lo, hi) > 0:
            raise ValueError("intervals do not intersect; they cannot enclose one value")
        return RInterval(lo, hi, max(self.prec, other.prec))

    # -- printing -------------------------------------------------------

    def decimal_bounds(self, digits: int = 20) -> tuple[str, str]:
        """Outward-rounded decimal strings (lo floored, hi ceiled)."""
        return (
            _fraction_to_decimal(self.lo_fraction, digits, up=False),
            _fraction_to_decimal(self.hi_fraction, digits, up=True),
        )

    def __str__(self):
        lo, hi = self.decimal_bounds(24)
        return f"[{lo}, {hi}]"


def _fraction_to_decimal(x: Fraction, digits: int, up: bool) -> str:
    """Exact decimal string of x rounded to `digits` places toward +/-inf."""
    scale = 10**digits
    num = x.numerator * scale
    q, r = divmod(num, x.denominator)
    if up and r:
        q += 1
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole, frac = divmod(q, scale)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def interval_pow(s: RInterval, rho: RInterval) -> RInterval:
    """Enclosure of s**(-rho) as exp(-rho * log s), outward at every step.

    The base interval must be strictly positive.
    """
    if s.lo_fraction <= 0:
        raise ValueError("interval_pow requires a strictly positive base")
    return ((-rho) * s.log()).exp()


def refine(
    expr: Callable[[int], RInterval],
    precision: int,
    *,
    cap: int = PRECISION_CAP,
    previous: RInterval | None = None,
) -> RInterval:
    """Re-evaluate a deferred interval expression at higher precision.

    ``expr`` maps a mantissa precision to an enclosure of a fixed real
    number.  Intersecting with the previous enclosure (both are valid)
    makes the returned width monotone nonincreasing in precision.
    Precision requests beyond ``cap`` raise :class:`PrecisionCapError`
    instead of looping forever.
    """
    if precision < 53:
        raise ValueError("precision below 53 bits is not supported")
    if precision > cap:
        raise PrecisionCapError(f"requested {precision} bits exceeds cap {cap}")
    result = expr(precision)
    if previous is not None:
        result = result.intersection(previous)
    return result


def log_ratio_interval(a: Fraction, b: Fraction, prec: int) -> RInterval:
    """Enclosure of log(a)/log(b) for positive rationals, b != 1."""
    ia = RInterval.from_fraction(a, prec).log()
    ib = RInterval.from_fraction(b, prec).log()
    return ia / ib

"""Divide-and-conquer recurrences f(n) = sum_j gamma_j f(floor((n+j)/p)).

Given an integer p >= 2 and positive weights gamma_0..gamma_{p-1}, the
sequence defined by the recurrence above grows like n^rho, rho = log_p(A)
with A = sum_j gamma_j, modulated by a continuous 1-periodic profile.  The
profile is expressed through a strictly increasing fixed-point function
phi on [0, 1] satisfying, piecewise on [j/p, (j+1)/p],

    phi(t) = (gamma_{p-1-j} / A) * phi(p t - j) + S(j) / A,

where S(b) = gamma_{p-b} + ... + gamma_{p-1} is the sum of the top b
weights.  On digit strings, phi has the explicit series

    phi(0.b1 b2 b3 ...) = sum_j A^(-j) * S(b_j) * prod_{i<j} w(b_i),

with the "copy weight" w(b) = gamma_{p-1-b}.  The series is summed exactly
for eventually periodic digit strings (the periodic tail is a geometric
block), and truncation after j digits leaves a tail inside
[0, prod_{i<=j} w(b_i) / A^j], which is how enclosures are produced at
points whose digit period is astronomically long.

Everything here is exact rational arithmetic; intervals enter only through
the growth exponent rho and the scan brackets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactnum import (
    DEFAULT_PRECISION,
    PAdicExpansion,
    RInterval,
    as_fraction,
    interval_pow,
    log_ratio_interval,
    padic_digits_prefix,
    to_padic,
)

__all__ = [
    "RecurrenceSpec",
    "PhiValue",
    "IrrationalValueError",
    "BudgetExceededError",
    "phi_exact",
    "phi_iterate",
    "phi_enclose",
    "f_int",
    "f_real",
    "periodic_profile",
    "profile_interval",
    "sup_inf_scan",
]


class IrrationalValueError(ArithmeticError):
    """A closed form was requested at a point where it is irrational."""


class BudgetExceededError(RuntimeError):
    """A scan or sweep would exceed its configured budget."""


@dataclass(frozen=True)
class RecurrenceSpec:
    """Weights and initial values of a base-p divide-and-conquer recurrence.

    ``initial`` may be None, meaning the standard initial condition
    f(j) = S(j) for j = 1..p-1, under which the periodic profile has the
    closed form A^(1-{t}) phi(p^({t}-1)).
    """

    p: int
    gamma: tuple[Fraction, ...]
    initial: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be at least 2")
        gamma = tuple(as_fraction(g) for g in self.gamma)
        if len(gamma) != self.p:
            raise ValueError(f"expected {self.p} weights, got {len(gamma)}")
        if any(g <= 0 for g in gamma):
            raise ValueError("all weights must be positive")
        object.__setattr__(self, "gamma", gamma)
        if self.initial is not None:
            init = tuple(as_fraction(v) for v in self.initial)
            if len(init) != self.p - 1:
                raise ValueError(f"expected {self.p - 1} initial values")
            if init == self._standard_initial():
                init = None  # canonicalize
            object.__setattr__(self, "initial", init)
        # suffix sums S(b) = sum of the top b weights; S(0) = 0, S(p) = A
        s = [Fraction(0)]
        for b in range(1, self.p + 1):
            s.append(s[-1] + gamma[self.p - b])
        object.__setattr__(self, "_suffix", tuple(s))
        object.__setattr__(self, "_f_cache", {0: Fraction(0)})

    def _standard_initial(self) -> tuple[Fraction, ...]:
        acc = Fraction(0)
        out = []
        for j in range(1, self.p):
            acc += self.gamma[self.p - j]
            out.append(acc)
        # S(j) accumulated from gamma_{p-1} down; recompute directly instead
        return tuple(
            sum((self.gamma[i] for i in range(self.p - j, self.p)), Fraction(0))
            for j in range(1, self.p)
        )

    @property
    def A(self) -> Fraction:
        return self._suffix[self.p]

    @property
    def standard(self) -> bool:
        return self.initial is None

    @property
    def integral(self) -> bool:
        return all(g.denominator == 1 for g in self.gamma)

    def S(self, b: int) -> Fraction:
        """Sum of the top b weights (the additive term of the phi series)."""
        return self._suffix[b]

    def w(self, b: int) -> Fraction:
        """Copy weight gamma_{p-1-b} (the multiplicative term)."""
        return self.gamma[self.p - 1 - b]

    def initial_value(self, j: int) -> Fraction:
        if not 0 <= j < self.p:
            raise ValueError("initial values exist for 0 <= j < p")
        if j == 0:
            return Fraction(0)
        if self.initial is None:
            return self._suffix[j]
        return self.initial[j - 1]

    def rho(self, prec: int = DEFAULT_PRECISION) -> RInterval:
        """Enclosure of the growth exponent log_p(A)."""
        return log_ratio_interval(self.A, Fraction(self.p), prec)

    def rho_float(self) -> float:
        return math.log(self.A) / math.log(self.p)

    # -- serialization (the on-disk schema for the `recur` command) -----

    def to_json_obj(self) -> dict:
        obj = {
            "p": self.p,
            "gamma": [_frac_str(g) for g in self.gamma],
            "initial": "standard"
            if self.initial is None
            else [_frac_str(v) for v in self.initial],
        }
        return obj

    @staticmethod
    def from_json_obj(obj: dict) -> "RecurrenceSpec":
        p = int(obj["p"])
        gamma = tuple(as_fraction(str(g)) for g in obj["gamma"])
        raw_init = obj.get("initial", "standard")
        initial = (
            None
            if raw_init == "standard"
            else tuple(as_fraction(str(v)) for v in raw_init)
        )
        return RecurrenceSpec(p, gamma, initial)

    @staticmethod
    def from_json(text: str) -> "RecurrenceSpec":
        return RecurrenceSpec.from_json_obj(json.loads(text))

    def __getstate__(self):
        return (self.p, self.gamma, self.initial)

    def __setstate__(self, state):
        self.__init__(*state)


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


@dataclass(frozen=True)
class PhiValue:
    """Truncated phi series: the exact value lies in [partial, partial + tail_scale]."""

    partial: Fraction
    tail_scale: Fraction

    @property
    def lo(self) -> Fraction:
        return self.partial

    @property
    def hi(self) -> Fraction:
        return self.partial + self.tail_scale


# ---------------------------------------------------------------------------
# phi
# ---------------------------------------------------------------------------


def phi_exact(spec: RecurrenceSpec, x) -> Fraction:
    """Exact value of the fixed-point function at a rational in [0, 1].

    Accepts a PAdicExpansion (in base spec.p) or anything coercible to a
    Fraction.  Preperiod digits are summed termwise; the periodic tail is
    one geometric block, so the cost is O(preperiod + period) exact
    operations.
    """
    if isinstance(x, PAdicExpansion):
        exp = x
        if exp.base != spec.p:
            raise ValueError(f"expansion base {exp.base} != spec base {spec.p}")
    else:
        exp = to_padic(as_fraction(x), spec.p)
    A = spec.A
    total = Fraction(0)
    prefix = Fraction(1)
    apow = Fraction(1)
    for b in exp.preperiod:
        apow *= A
        total += spec.S(b) * prefix / apow
        prefix *= spec.w(b)
    # one period block, then the geometric factor A^L / (A^L - W)
    block = Fraction(0)
    wprod = Fraction(1)
    bpow = Fraction(1)
    for c in exp.period:
        bpow *= A
        block += spec.S(c) * wprod / bpow
        wprod *= spec.w(c)
    aL = A ** len(exp.period)
    total += (prefix / apow) * block * aL / (aL - wprod)
    return total


def phi_iterate(spec: RecurrenceSpec, k: int, t) -> Fraction:
    """k-th stage of the piecewise contraction that converges to phi.

    Stage 0 is the identity; each stage rescales the previous one into the
    p subintervals [j/p, (j+1)/p].  Successive stages differ by at most
    (max gamma / A)^k uniformly, and at a p-adic rational with M digits
    every stage beyond M equals phi exactly.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    t = as_fraction(t)
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    if k == 0:
        return t
    j = min(int(t * spec.p), spec.p - 1)
    inner = phi_iterate(spec, k - 1, t * spec.p - j)
    return (spec.w(j) * inner + spec.S(j)) / spec.A


def phi_enclose(spec: RecurrenceSpec, x, digits: int) -> PhiValue:
    """Enclosure of phi(x) from the first `digits` digits of x.

    The tail after j digits is trapped in [0, prod w(b_i) / A^j]; for the
    binomial weights that scale is at most (2/(p+1))^j, so a few dozen
    digits give enclosures far below any certification margin.
    """
    x = as_fraction(x)
    if x == 1:
        return PhiValue(Fraction(1), Fraction(0))
    ds, _ = padic_digits_prefix(x, spec.p, digits)
    A = spec.A
    if spec.integral:
        # integer accumulation over the common denominator A^j
        Ai = A.numerator
        num = 0
        prefix = 1
        for b in ds:
            num = num * Ai + spec.S(b).numerator * prefix
            prefix *= spec.w(b).numerator
        apow = Ai**digits
        return PhiValue(Fraction(num, apow), Fraction(prefix, apow))
    total = Fraction(0)
    prefix = Fraction(1)
    apow = Fraction(1)
    for b in ds:
        apow *= A
        total += spec.S(b) * prefix / apow
        prefix *= spec.w(b)
    return PhiValue(total, prefix / apow)


def phi_digits_needed(spec: RecurrenceSpec, target_bits: int) -> int:
    """Digits of truncation giving tail_scale <= 2**(-target_bits)."""
    shrink = float(min(spec.A / g for g in spec.gamma))  # per-digit factor >= this
    return max(4, math.ceil(target_bits * math.log(2) / math.log(shrink)))


# ---------------------------------------------------------------------------
# f on integers and reals
# ---------------------------------------------------------------------------


def f_int(spec: RecurrenceSpec, n: int) -> Fraction:
    """f(n) by memoized recursion.

    Writing n = kp + r, the p recurrence terms collapse onto the two
    arguments k and k+1:  f(n) = (A - S(r)) f(k) + S(r) f(k+1), so the
    call tree touches O(log n) distinct arguments.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    cache = spec._f_cache
    if n in cache:
        return cache[n]
    if n < spec.p:
        val = spec.initial_value(n)
    else:
        k, r = divmod(n, spec.p)
        s = spec.S(r)
        val = (spec.A - s) * f_int(spec, k) + s * f_int(spec, k + 1)
    cache[n] = val
    return val


def f_real(spec: RecurrenceSpec, x) -> Fraction:
    """Interpolated extension f(n + t) = (1 - phi(t)) f(n) + phi(t) f(n+1).

    Defined for rational x >= 1; satisfies f(x) = A f(x/p) for x >= p.
    """
    x = as_fraction(x)
    if x < 1:
        raise ValueError("the real extension is defined for x >= 1")
    n = int(x)
    t = x - n
    if t == 0:
        return f_int(spec, n)
    ph = phi_exact(spec, t)
    return (1 - ph) * f_int(spec, n) + ph * f_int(spec, n + 1)


# ---------------------------------------------------------------------------
# periodic profile
# ---------------------------------------------------------------------------


def periodic_profile(spec: RecurrenceSpec, t) -> Fraction:
    """Exact value of the 1-periodic profile A^(1-{t}) phi(p^({t}-1)).

    Only evaluable in closed rational form when p^({t}-1) is rational,
    i.e. at integer t (profile value 1 under the standard initial
    condition).  Elsewhere use :func:`profile_interval` or sample the
    profile through ratios f(n)/n^rho.
    """
    if not spec.standard:
        raise ValueError("closed profile form requires the standard initial condition")
    t = as_fraction(t)
    frac = t - math.floor(t)
    if frac != 0:
        raise IrrationalValueError(
            f"p^(t-1) is irrational at t = {t}; no exact rational profile value"
        )
    return spec.A * phi_exact(spec, Fraction(1, spec.p))


def profile_interval(
    spec: RecurrenceSpec,
    t,
    prec: int = DEFAULT_PRECISION,
    digits: int | None = None,
) -> RInterval:
    """Enclosure of the periodic profile at any rational t.

    Encloses s = p^({t}-1) by a rational interval, exploits monotonicity
    of phi to enclose phi(s), and multiplies by an enclosure of A^(1-{t}).
    """
    if not spec.standard:
        raise ValueError("profile requires the standard initial condition")
    t = as_fraction(t)
    frac = t - math.floor(t)
    if digits is None:
        digits = phi_digits_needed(spec, prec + 16)
    p_iv = RInterval.from_fraction(spec.p, prec)
    s_iv = (RInterval.from_fraction(frac - 1, prec) * p_iv.log()).exp()
    s_lo = max(Fraction(1, spec.p), s_iv.lo_fraction)
    s_hi = min(Fraction(1), s_iv.hi_fraction)
    phi_lo = phi_enclose(spec, s_lo, digits).lo
    phi_hi = PhiValue(Fraction(1), Fraction(0)).hi if s_hi == 1 else phi_enclose(spec, s_hi, digits).hi
    phi_iv = RInterval.from_pair(phi_lo, phi_hi, prec)
    a_iv = (RInterval.from_fraction(1 - frac, prec) * RInterval.from_fraction(spec.A, prec).log()).exp()
    return a_iv * phi_iv


# ---------------------------------------------------------------------------
# scan brackets for the extreme values of the profile
# ---------------------------------------------------------------------------


def _is_binomial(spec: RecurrenceSpec) -> bool:
    return spec.standard and spec.gamma == tuple(
        Fraction(spec.p - j) for j in range(spec.p)
    )


def _monotone_initials(spec: RecurrenceSpec) -> bool:
    vals = [spec.initial_value(j) for j in range(spec.p)]
    return all(a <= b for a, b in zip(vals, vals[1:]))


def sup_inf_scan(
    spec: RecurrenceSpec,
    r: int,
    prec: int = DEFAULT_PRECISION,
    budget: int = 2_000_000,
) -> tuple[RInterval, RInterval]:
    """Two-sided brackets for (inf, sup) of f(n)/n^rho from one period.

    Scanning n over [p^r, p^(r+1)] and using monotonicity of the real
    extension of f gives

        min_n ratio * (1 + p^-r)^(-rho)  <=  inf  <=  min_n ratio,
        max_n ratio  <=  sup  <=  max_n ratio * (1 + p^-r)^rho.

    Returns (inf_bracket, sup_bracket).  Requires nondecreasing initial
    values (automatic under the standard initial condition).
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if not _monotone_initials(spec):
        raise ValueError("scan brackets require nondecreasing initial values")
    if _is_binomial(spec):
        from . import oracle  # binomial weights take the fast integer kernels

        res_min = oracle.scan_min(spec.p, r, prec=prec, budget=budget)
        res_max = oracle.scan_max(spec.p, r, prec=prec, budget=budget)
        return res_min.bracket, res_max.bracket

    lo_n, hi_n = spec.p**r, spec.p ** (r + 1)
    if hi_n - lo_n > budget:
        raise BudgetExceededError(
            f"scan of {hi_n - lo_n} values exceeds budget {budget}"
        )
    rho_f = spec.rho_float()
    best_min = (math.inf, 0)
    best_max = (-math.inf, 0)
    for n in range(lo_n, hi_n + 1):
        v = f_int(spec, n)
        lr = math.log(v.numerator) - math.log(v.denominator) - rho_f * math.log(n)
        if lr < best_min[0]:
            best_min = (lr, n)
        if lr > best_max[0]:
            best_max = (lr, n)
    rho_iv = spec.rho(prec)
    ratio_min = _ratio_interval(spec, best_min[1], rho_iv, prec)
    ratio_max = _ratio_interval(spec, best_max[1], rho_iv, prec)
    shift = RInterval.from_fraction(1 + Fraction(1, spec.p**r), prec)
    inf_bracket = RInterval.from_pair(
        (interval_pow(shift, rho_iv) * ratio_min).lo_fraction,
        ratio_min.hi_fraction,
        prec,
    )
    sup_bracket = RInterval.from_pair(
        ratio_max.lo_fraction,
        (ratio_max * (rho_iv * shift.log()).exp()).hi_fraction,
        prec,
    )
    return inf_bracket, sup_bracket


def _ratio_interval(spec: RecurrenceSpec, n: int, rho_iv: RInterval, prec: int) -> RInterval:
    """Enclosure of f(n)/n^rho."""
    v = RInterval.from_fraction(f_int(spec, n), prec)
    n_pow = (rho_iv * RInterval.from_fraction(n, prec).log()).exp()
    return v / n_pow

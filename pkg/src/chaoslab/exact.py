"""Exact rationals and certified distance values.

Every distance in the library is an :class:`ExactDist`: either an exact
rational or a rational enclosure ``[lo, hi]``.  Comparisons against a
threshold are only "certain" when the whole enclosure lies on one side.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetTooLarge, NegativeTolerance

Rat = Fraction

EXACT = "exact"
INTERVAL = "interval"

DEFAULT_MAX_BUDGET = 10_000_000


def rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: they would silently import binary rounding error.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def fmt_rat(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def check_tol(tol) -> Fraction:
    tol = rat(tol)
    if tol <= 0:
        raise NegativeTolerance(f"tolerance must be positive, got {tol}")
    return tol


def max_budget() -> int:
    """Global safety cap from ``CHAOSLAB_MAX_BUDGET``."""
    raw = os.environ.get("CHAOSLAB_MAX_BUDGET")
    if not raw:
        return DEFAULT_MAX_BUDGET
    return int(raw)


def check_budget(n: int, what: str = "budget") -> int:
    cap = max_budget()
    if n > cap:
        raise BudgetTooLarge(f"{what}={n} exceeds cap {cap} (CHAOSLAB_MAX_BUDGET)")
    return n


@dataclass(frozen=True)
class ExactDist:
    value: Fraction
    kind: str = EXACT
    lo: Fraction | None = None
    hi: Fraction | None = None

    def __post_init__(self):
        if self.kind == EXACT:
            object.__setattr__(self, "lo", self.value)
            object.__setattr__(self, "hi", self.value)
        elif self.lo is None or self.hi is None or self.lo > self.hi:
            raise ValueError("interval distance needs lo <= hi")

    @classmethod
    def exact(cls, value) -> "ExactDist":
        return cls(Fraction(value))

    @classmethod
    def interval(cls, lo, hi) -> "ExactDist":
        lo, hi = Fraction(lo), Fraction(hi)
        if lo == hi:
            return cls(lo)
        return cls((lo + hi) / 2, INTERVAL, lo, hi)

    @property
    def is_exact(self) -> bool:
        return self.kind == EXACT

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def certainly_lt(self, bound) -> bool:
        return self.hi < bound

    def certainly_ge(self, bound) -> bool:
        return self.lo >= bound

    def __add__(self, other: "ExactDist") -> "ExactDist":
        return ExactDist.interval(self.lo + other.lo, self.hi + other.hi)

    def scale(self, c) -> "ExactDist":
        c = Fraction(c)
        if c < 0:
            raise ValueError("negative scale")
        return ExactDist.interval(self.lo * c, self.hi * c)

    def map_monotone(self, f) -> "ExactDist":
        """Push the enclosure through an increasing function on rationals."""
        return ExactDist.interval(f(self.lo), f(self.hi))

    def to_json(self) -> dict:
        if self.is_exact:
            return {"kind": EXACT, "value": fmt_rat(self.value)}
        return {"kind": INTERVAL, "lo": fmt_rat(self.lo), "hi": fmt_rat(self.hi)}

    @classmethod
    def from_json(cls, d: dict) -> "ExactDist":
        if d["kind"] == EXACT:
            return cls.exact(rat(d["value"]))
        return cls.interval(rat(d["lo"]), rat(d["hi"]))


def sqrt_interval(q, tol) -> ExactDist:
    """Enclose sqrt(q) for rational q >= 0 in an interval of width <= tol."""
    q = Fraction(q)
    tol = check_tol(tol)
    if q < 0:
        raise ValueError("sqrt of a negative rational")
    if q == 0:
        return ExactDist.exact(0)
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return ExactDist.exact(Fraction(rn, rd))
    # sqrt(q) = sqrt(num*den)/den; scale so the integer sqrt has enough digits
    scale = 1
    while Fraction(1, scale * den) > tol:
        scale *= 2
    r = math.isqrt(num * den * scale * scale)
    lo = Fraction(r, scale * den)
    hi = Fraction(r + 1, scale * den)
    return ExactDist.interval(lo, hi)


def round_half_up(q: Fraction) -> int:
    return math.floor(q + Fraction(1, 2))

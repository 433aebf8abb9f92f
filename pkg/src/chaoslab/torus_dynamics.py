"""Exact rational dynamics on the 2-torus.

Coordinates live in the square ``[-1/2, 1/2)^2`` with opposite sides
identified.  Contents: hyperbolic toral automorphisms, the two shears
supported on the annuli ``P = {|y| <= 1/k}`` and ``Q = {|x| <= 1/m}``, their
composite (the linked twist map, extended by the identity off ``R = P u Q``),
and the quotient by ``(x, y) -> (-x, -y)`` with the induced map on ``p(R)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConstructorPrecondition, OutsideDisk, OutsideDomain
from .exact import ExactDist, fmt_rat, rat

HALF = Fraction(1, 2)


def canon(q) -> Fraction:
    """Representative of q mod 1 in [-1/2, 1/2)."""
    q = Fraction(q)
    return q - math.floor(q + HALF)


@dataclass(frozen=True)
class TorusPoint:
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", canon(rat(self.x)))
        object.__setattr__(self, "y", canon(rat(self.y)))

    def __neg__(self):
        return TorusPoint(-self.x, -self.y)

    def __str__(self):
        return format_point(self)


def format_point(p) -> str:
    return f"{fmt_rat(p.x)}, {fmt_rat(p.y)}"


def parse_point(text: str) -> TorusPoint:
    xs, sep, ys = text.partition(",")
    if not sep:
        raise ValueError(f"expected 'p/q, r/s', got {text!r}")
    return TorusPoint(rat(xs), rat(ys))


def torus_dist(p, q, tol=None) -> ExactDist:
    """Sup-norm flat torus distance; exact and at most 1/2."""
    return ExactDist.exact(max(abs(canon(p.x - q.x)), abs(canon(p.y - q.y))))


# ------------------------------------------------------------ automorphisms

@dataclass(frozen=True)
class AnosovMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConstructorPrecondition("matrix entries must be integers")
        det = self.a * self.d - self.b * self.c
        if det != 1:
            raise ConstructorPrecondition(
                f"Anosov matrix needs ad - bc = 1 and a + d > 2; got det = {det}")
        if self.a + self.d <= 2:
            raise ConstructorPrecondition(
                f"Anosov matrix needs ad - bc = 1 and a + d > 2; got trace = {self.a + self.d}")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def inverse(self) -> tuple:
        return (self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> tuple:
        """Integer entries of A**n (negative n allowed)."""
        base = (self.a, self.b, self.c, self.d) if n >= 0 else self.inverse()
        result = (1, 0, 0, 1)
        n = abs(n)
        while n:
            if n & 1:
                result = _matmul(result, base)
            base = _matmul(base, base)
            n >>= 1
        return result


def _matmul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def anosov_km(k: int, m: int) -> AnosovMatrix:
    """The family ``[[1, k], [m, 1 + k m]]`` for k, m >= 3."""
    if k < 3 or m < 3:
        raise ConstructorPrecondition(f"k and m must be >= 3, got k={k}, m={m}")
    return AnosovMatrix(1, k, m, 1 + k * m)


def apply_matrix(entries: tuple, p: TorusPoint) -> TorusPoint:
    a, b, c, d = entries
    return TorusPoint(a * p.x + b * p.y, c * p.x + d * p.y)


def anosov_apply(A: AnosovMatrix, p: TorusPoint, n: int = 1) -> TorusPoint:
    return apply_matrix(A.power(n), p)


# --------------------------------------------------------- linked twists

def in_P(p: TorusPoint, k: int) -> bool:
    return abs(p.y) <= Fraction(1, k)


def in_Q(p: TorusPoint, m: int) -> bool:
    return abs(p.x) <= Fraction(1, m)


def in_R(p: TorusPoint, k: int, m: int) -> bool:
    return in_P(p, k) or in_Q(p, m)


def _check_km(k, m=None):
    for v in (k, m):
        if v is not None and v < 3:
            raise ConstructorPrecondition(f"twist parameters must be >= 3, got {v}")


def twist_f(p: TorusPoint, k: int, m: int | None = None) -> TorusPoint:
    """Horizontal shear ``(x + k y, y)`` on P, identity elsewhere in R.

    With m given, points outside R raise OutsideDomain.
    """
    _check_km(k, m)
    if m is not None and not in_R(p, k, m):
        raise OutsideDomain(f"{p} is outside R(k={k}, m={m})")
    if in_P(p, k):
        return TorusPoint(p.x + k * p.y, p.y)
    return p


def twist_h(p: TorusPoint, m: int, k: int | None = None) -> TorusPoint:
    """Vertical shear ``(x, y + m x)`` on Q, identity elsewhere in R."""
    _check_km(m, k)
    if k is not None and not in_R(p, k, m):
        raise OutsideDomain(f"{p} is outside R(k={k}, m={m})")
    if in_Q(p, m):
        return TorusPoint(p.x, p.y + m * p.x)
    return p


def linked_twist(p: TorusPoint, k: int, m: int) -> TorusPoint:
    """``h o f`` on R, the identity on the rest of the torus."""
    _check_km(k, m)
    if not in_R(p, k, m):
        return p
    return twist_h(twist_f(p, k), m)


def linked_twist_inverse(p: TorusPoint, k: int, m: int) -> TorusPoint:
    _check_km(k, m)
    if not in_R(p, k, m):
        return p
    if in_Q(p, m):
        p = TorusPoint(p.x, p.y - m * p.x)
    if in_P(p, k):
        p = TorusPoint(p.x - k * p.y, p.y)
    return p


def linked_twist_power(p: TorusPoint, k: int, m: int, n: int) -> TorusPoint:
    step = linked_twist if n >= 0 else linked_twist_inverse
    for _ in range(abs(n)):
        p = step(p, k, m)
    return p


def linearization_radius(k: int, m: int) -> Fraction:
    """Radius r such that ``max(|x|, |y|) <= r`` implies the linked twist map
    agrees with ``A(k, m)`` at (x, y): then |y| <= 1/k and |x + k y| <= 1/m."""
    _check_km(k, m)
    return Fraction(1, m * (k + 1))


# ------------------------------------------------------------ pillow

@dataclass(frozen=True)
class PillowPoint:
    """Canonical representative of the class ``{(x, y), (-x, -y)}``."""

    x: Fraction
    y: Fraction

    def lifts(self) -> tuple:
        p = TorusPoint(self.x, self.y)
        return (p, -p)

    def is_singular(self) -> bool:
        return TorusPoint(self.x, self.y) == -TorusPoint(self.x, self.y)

    def __str__(self):
        return format_point(self)


def pillow_project(p: TorusPoint) -> PillowPoint:
    """Choose the lift with y > 0; on the circles y = 0 and y = -1/2 take
    x >= 0 (the four points fixed by negation are their own class)."""
    q = -p
    if p.y in (0, -HALF):
        rep = p if (p.x >= 0 or p.x == -HALF) else q
    else:
        rep = p if p.y > 0 else q
    return PillowPoint(rep.x, rep.y)


def pillow_dist(p: PillowPoint, q: PillowPoint, tol=None) -> ExactDist:
    a = TorusPoint(p.x, p.y)
    b = TorusPoint(q.x, q.y)
    return ExactDist.exact(min(torus_dist(a, b).value, torus_dist(a, -b).value))


def in_disk(q: PillowPoint, k: int, m: int) -> bool:
    # R is symmetric under negation, so one lift decides membership
    return in_R(q.lifts()[0], k, m)


def disk_map(q: PillowPoint, k: int, m: int, n: int = 1) -> PillowPoint:
    """Map induced on ``p(R)`` by the linked twist map."""
    if not in_disk(q, k, m):
        raise OutsideDisk(f"{q} is not in p(R) for k={k}, m={m}")
    return pillow_project(linked_twist_power(q.lifts()[0], k, m, n))


def parse_pillow(text: str) -> PillowPoint:
    return pillow_project(parse_point(text))

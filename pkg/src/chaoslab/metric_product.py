"""Countable product metrics ``d(x, y) = sum_i 2**-i * d~_i(x_i, y_i)``.

``d~ = d/(1+d)`` turns any metric into one bounded by 1; factors whose
metric is already bounded by 1 are used as they are.  Product points carry
finitely many explicit coordinates and fall back to a per-factor default
point elsewhere, so the series is a finite sum and stays exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import FactorMismatch, NegativeDistance
from .exact import ExactDist, check_tol, rat


def tilde(d_value) -> Fraction:
    d = rat(d_value)
    if d < 0:
        raise NegativeDistance(f"distance must be >= 0, got {d}")
    return d / (1 + d)


def truncation_bound(m: int) -> Fraction:
    """Upper bound ``2**-m`` on ``sum_{i>m} 2**-i d~_i``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return Fraction(1, 2**m)


class BoundedMetric:
    """Wraps a factor metric ``base(x, y, tol) -> ExactDist`` into one with
    values in [0, 1]."""

    def __init__(self, base: Callable, bounded_flag: bool = False):
        self.base = base
        self.bounded_flag = bounded_flag

    def evaluate(self, x, y, tol) -> ExactDist:
        d = self.base(x, y, tol)
        if self.bounded_flag:
            return d
        # d/(1+d) is increasing and 1-Lipschitz, so widths do not grow
        return d.map_monotone(tilde)

    __call__ = evaluate


class _Seq:
    """Finite list or lazily indexed countable family, 1-based."""

    def __init__(self, items):
        if callable(items):
            self._fn, self.size = items, None
        else:
            items = list(items)
            self._fn, self.size = (lambda i: items[i - 1]), len(items)

    def __getitem__(self, i):
        if i < 1 or (self.size is not None and i > self.size):
            raise FactorMismatch(f"factor index {i} out of range")
        return self._fn(i)


class ProductSpace:
    """Factor metrics and default points of a (finite or countable) product."""

    def __init__(self, metrics, defaults):
        self.metrics = _Seq(metrics)
        self.defaults = _Seq(defaults)
        if self.metrics.size != self.defaults.size:
            raise FactorMismatch("metrics and defaults describe different factor counts")

    @property
    def size(self):
        return self.metrics.size

    def point(self, coords=None) -> "ProductPoint":
        items = []
        for i, p in sorted((coords or {}).items()):
            if p != self.defaults[i]:
                items.append((i, p))
        return ProductPoint(tuple(items), self)

    def base_point(self) -> "ProductPoint":
        return ProductPoint((), self)


@dataclass(frozen=True)
class ProductPoint:
    """Explicit coordinates on a finite support; defaults elsewhere."""

    items: tuple
    space: ProductSpace

    def __post_init__(self):
        idx = [i for i, _ in self.items]
        if idx != sorted(set(idx)):
            raise ValueError("support indices must be distinct and sorted")

    @property
    def support(self) -> tuple:
        return tuple(i for i, _ in self.items)

    def coord(self, i: int):
        for j, p in self.items:
            if j == i:
                return p
        return self.space.defaults[i]

    def replace(self, updates: dict) -> "ProductPoint":
        coords = dict(self.items)
        coords.update(updates)
        return self.space.point(coords)

    def __eq__(self, other):
        if not isinstance(other, ProductPoint):
            return NotImplemented
        return self.space is other.space and self.items == other.items

    def __hash__(self):
        return hash(self.items)


def product_dist(x: ProductPoint, y: ProductPoint, tol=Fraction(1, 2**64)) -> ExactDist:
    """Weighted-series product distance; enclosure width stays below tol."""
    tol = check_tol(tol)
    if x.space is not y.space:
        raise FactorMismatch("points belong to different product spaces")
    space = x.space
    total = ExactDist.exact(0)
    for i in sorted(set(x.support) | set(y.support)):
        xi, yi = x.coord(i), y.coord(i)
        if xi == yi:
            continue
        d = space.metrics[i].evaluate(xi, yi, tol / 2 ** (i - 1))
        total = total + d.scale(Fraction(1, 2**i))
    return total

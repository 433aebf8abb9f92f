from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chaoslab.errors import FactorMismatch, NegativeDistance
from chaoslab.exact import ExactDist
from chaoslab.metric_product import BoundedMetric, ProductSpace, product_dist, tilde, \
    truncation_bound


def discrete(x, y, tol=None):
    return ExactDist.exact(0 if x == y else 1)


def line(x, y, tol=None):
    return ExactDist.exact(abs(Fraction(x) - Fraction(y)))


def two_point_space(n):
    return ProductSpace([BoundedMetric(discrete, True)] * n, [0] * n)


def test_tilde_values():
    assert tilde(0) == 0
    assert tilde(1) == Fraction(1, 2)
    assert tilde(3) == Fraction(3, 4)
    with pytest.raises(NegativeDistance):
        tilde(-1)


def test_truncation_bound():
    assert truncation_bound(1) == Fraction(1, 2)
    assert truncation_bound(10) == Fraction(1, 1024)
    vals = [truncation_bound(m) for m in range(1, 40)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))


def test_product_dist_examples():
    S = two_point_space(3)
    x = S.point({1: 0, 2: 0})
    assert product_dist(x, x).value == 0
    assert product_dist(x, S.point({1: 1})).value == Fraction(1, 2)
    assert product_dist(x, S.point({1: 1, 2: 1})).value == Fraction(3, 4)


def test_default_coordinates_are_dropped():
    S = two_point_space(2)
    assert S.point({1: 0, 2: 0}) == S.base_point()
    assert S.point({2: 1}).support == (2,)


def test_mixing_spaces_is_rejected():
    with pytest.raises(FactorMismatch):
        product_dist(two_point_space(2).base_point(), two_point_space(2).base_point())
    with pytest.raises(FactorMismatch):
        ProductSpace([BoundedMetric(discrete, True)], [0, 0])


def test_countable_product():
    S = ProductSpace(lambda i: BoundedMetric(line), lambda i: 0)
    assert S.size is None
    x = S.point({50: 1})
    # a single far-out coordinate contributes 2^-50 * 1/2
    assert product_dist(S.base_point(), x).value == Fraction(1, 2**51)


coords = st.dictionaries(st.integers(1, 8), st.fractions(-5, 5, max_denominator=9), max_size=5)


@given(coords, coords, coords)
def test_product_metric_axioms(a, b, c):
    S = ProductSpace([BoundedMetric(line)] * 8, [Fraction(0)] * 8)
    x, y, z = S.point(a), S.point(b), S.point(c)
    xy, yz, xz = (product_dist(p, q).value for p, q in ((x, y), (y, z), (x, z)))
    assert xy == product_dist(y, x).value
    assert (xy == 0) == (x == y)
    assert xz <= xy + yz
    assert xy < 1


@given(coords, st.integers(1, 8))
def test_truncated_sum_is_within_bound(a, m):
    S = ProductSpace([BoundedMetric(line)] * 8, [Fraction(0)] * 8)
    x = S.point(a)
    full = product_dist(S.base_point(), x).value
    head = sum((tilde(abs(v)) / 2**i for i, v in a.items() if i <= m), Fraction(0))
    assert head <= full <= head + truncation_bound(m)


def test_interval_factors_respect_tolerance():
    def fuzzy(x, y, tol):
        v = abs(Fraction(x) - Fraction(y))
        return ExactDist.interval(v, v + tol)
    S = ProductSpace([BoundedMetric(fuzzy)] * 3, [0] * 3)
    tol = Fraction(1, 2**20)
    d = product_dist(S.base_point(), S.point({1: 1, 2: 1, 3: 1}), tol)
    assert d.width <= tol

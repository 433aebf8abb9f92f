import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chaoslab import symbolic_shift as ss
from chaoslab.errors import AlphabetMismatch
from chaoslab.symbolic_shift import BiSeq

from conftest import biseq_pairs, biseqs

ONE = BiSeq.constant(2, 1)
TWO = BiSeq.constant(2, 2)
BUMP = BiSeq(2, (1,), (2,), (1,), 0)


def brute_rho(s, t, R=60):
    """Partial sum over |i| <= R; the omitted tail is at most 2**-R."""
    return sum((Fraction(1, 2 ** (abs(i) + 1)) for i in range(-R, R + 1)
                if s.symbol_at(i) != t.symbol_at(i)), Fraction(0))


# --- symbol access and shifting

def test_symbol_lookup():
    assert ss.symbol_at(ONE, -1000) == 1
    assert ss.symbol_at(BiSeq.periodic(2, (1, 2)), 3) == 2
    assert ss.symbol_at(BUMP, 0) == 2


def test_shift_examples():
    assert ss.shift(ONE, 5) == ONE
    moved = ss.shift(BUMP, 1)
    assert moved.center == (2,) and moved.offset == -1
    p7 = BiSeq.periodic(3, (1, 2, 3, 1, 1, 2, 2))
    assert ss.shift(p7, 7).window(-20, 20) == p7.window(-20, 20)
    assert ss.shift(p7, 7) == p7


@given(biseqs(), st.integers(-40, 40), st.integers(-40, 40))
def test_shift_reindexes(s, k, i):
    assert ss.shift(s, k).symbol_at(i) == s.symbol_at(i + k)


@given(biseqs(), st.integers(-30, 30), st.integers(-30, 30))
def test_shift_is_a_group_action(s, a, b):
    assert ss.shift(ss.shift(s, a), b) == ss.shift(s, a + b)
    assert ss.shift(ss.shift(s, a), -a) == s


@given(biseqs())
def test_canonical_form_is_structural(s):
    # rebuilding from a different window yields the same stored form
    lo, hi = s.offset - 5, s.right_start + 5
    window = {i: s.symbol_at(i) for i in range(lo, hi + 1)}
    t = BiSeq.from_window(s.N, window, left=tuple(s.symbol_at(lo - len(s.left) + j)
                                                  for j in range(len(s.left))) * 2,
                          right=tuple(s.symbol_at(hi + 1 + j)
                                      for j in range(len(s.right))) * 3)
    assert t == s and hash(t) == hash(s)


def test_periodic_sequences_normalize():
    s = BiSeq.periodic(2, (1, 2), start=5)
    assert s.is_periodic() and s.period() == 2
    assert BiSeq(2, (2, 1), (2, 1, 2, 1), (2, 1), -3).is_periodic()
    assert BUMP.period() is None


def test_bad_symbols_rejected():
    with pytest.raises(ValueError):
        BiSeq(2, (3,), (), (1,), 0)
    with pytest.raises(ValueError):
        BiSeq(1, (1,), (), (1,), 0)


# --- metric

def test_rho_examples():
    assert ss.rho(ONE, ONE).value == 0
    assert ss.rho(ONE, BUMP).value == Fraction(1, 2)
    d = ss.rho(ONE, TWO)
    assert d.is_exact and d.value == Fraction(3, 2)


def test_rho_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        ss.rho(ONE, BiSeq.constant(3, 1))


@given(biseq_pairs())
def test_rho_matches_partial_sums(pair):
    s, t = pair
    d = ss.rho(s, t)
    assert d.is_exact
    assert abs(d.value - brute_rho(s, t)) <= Fraction(1, 2**60)


@given(biseq_pairs(3))
def test_rho_metric_axioms(triple):
    a, b, c = triple
    ab, bc, ac = (ss.rho(x, y).value for x, y in ((a, b), (b, c), (a, c)))
    assert ab == ss.rho(b, a).value
    assert (ab == 0) == (a == b)
    assert ac <= ab + bc
    assert ab <= Fraction(3, 2)


@given(biseq_pairs(), st.integers(-10, 10))
def test_rho_dense_seed_enclosure(pair, k):
    s, _ = pair
    seed = ss.DenseOrbitSeq(s.N, k)
    tol = Fraction(1, 2**20)
    d = ss.rho(s, seed, tol)
    exact = brute_rho(s, seed, 80)
    assert d.lo <= exact + Fraction(1, 2**80) and exact <= d.hi
    assert d.width <= tol


# --- separation and periodic points

@given(biseq_pairs())
def test_separating_shift_reaches_half(pair):
    s, t = pair
    k = ss.separating_shift(s, t)
    if s == t:
        assert k is None
        return
    assert ss.rho(ss.shift(s, k), ss.shift(t, k)).value >= Fraction(1, 2)


def test_first_difference_prefers_small_index():
    s = BiSeq.from_window(2, {i: 2 if abs(i) == 3 else 1 for i in range(-3, 4)})
    assert ss.first_difference(s, BiSeq.constant(2, 1)) == 3


def test_radius_for():
    assert ss.radius_for(Fraction(1, 4)) == 3
    assert ss.radius_for(1) == 1
    with pytest.raises(ValueError):
        ss.radius_for(0)


def test_periodic_point_examples():
    assert ss.periodic_point_near(ONE, Fraction(1, 4)) == ONE
    rng = random.Random(3)
    s = ss.random_biseq(2, rng)
    tau = ss.periodic_point_near(s, Fraction(1, 4))
    assert ss.shift(tau, 7) == tau
    assert ss.rho(s, tau).value <= Fraction(1, 8)
    s3 = ss.random_biseq(3, rng)
    assert ss.rho(s3, ss.periodic_point_near(s3, Fraction(1, 16))).value < Fraction(1, 16)


@given(biseqs(), st.integers(1, 12))
def test_periodic_point_property(s, j):
    eps = Fraction(1, 2**j) * 3 / 2
    m = ss.radius_for(eps)
    tau = ss.periodic_point_near(s, eps)
    assert ss.shift(tau, 2 * m + 1) == tau
    assert ss.rho(s, tau).value < eps
    assert (2 * m + 1) % tau.period() == 0


# --- dense orbit seed

def test_concatenation_prefix():
    from itertools import product
    listing = "".join("".join(map(str, w)) for L in range(1, 4)
                      for w in product((1, 2), repeat=L))
    got = "".join(str(ss.concat_symbol(2, j)) for j in range(len(listing)))
    assert got == listing
    assert ss.concat_symbol(2, -7) == 1


def test_seed_examples():
    seed = ss.dense_orbit_seed(2)
    k = ss.seed_search(seed, (1, 1))
    assert k is not None and k <= 10
    assert k == 2
    assert ss.seed_search(seed, (2, 1, 2)) is not None
    assert ss.seed_search(seed, ()) == 0
    assert ss.seed_hit(seed, ()) == 0


@given(st.sampled_from([2, 3]), st.data())
def test_seed_hit_places_word(N, data):
    word = data.draw(st.lists(st.integers(1, N), min_size=1, max_size=6))
    start = data.draw(st.integers(-5, 5))
    seed = ss.dense_orbit_seed(N)
    k = ss.seed_hit(seed, word, start)
    moved = ss.shift(seed, k)
    assert moved.window(start, start + len(word) - 1) == tuple(word)
    if k >= 0:
        first = ss.seed_search(seed, word, start, budget=k)
        assert first is not None and first <= k


def test_seed_is_not_periodic():
    seed = ss.dense_orbit_seed(2)
    for p in range(1, 30):
        assert any(seed.symbol_at(i) != seed.symbol_at(i + p) for i in range(0, 400))


# --- Cantor coding

def cantor_stage(M, n):
    """Stage-n intervals of the even-digit Cantor construction, as left ends."""
    ends = [Fraction(0)]
    for level in range(1, n + 1):
        ends = [a + Fraction(dgt, M**level) for a in ends for dgt in range(0, M, 2)]
    return set(ends)


def test_cantor_examples():
    assert ss.cantor_encode(ONE, 5) == 0
    assert ss.cantor_encode(TWO, 3) == Fraction(26, 27)
    s = BiSeq.from_window(2, {0: 2, 1: 1})
    assert ss.cantor_digits(s, 2) == [2, 0]
    assert ss.cantor_encode(s, 2) == Fraction(2, 3)


@pytest.mark.parametrize("N", [2, 3])
def test_cantor_windows_are_stage_intervals(N):
    M = 2 * N - 1
    rng = random.Random(N)
    for digits in range(1, 5):
        stage = cantor_stage(M, digits)
        for _ in range(40):
            s = ss.random_biseq(N, rng)
            lo, hi = ss.cantor_window(s, digits)
            assert lo in stage and hi - lo == Fraction(1, M**digits)
            deeper = ss.cantor_encode(s, digits + 6)
            assert lo <= deeper <= hi


@given(biseq_pairs())
def test_cantor_coding_is_injective_on_windows(pair):
    s, t = pair
    d = 9
    same = all(s.symbol_at(i) == t.symbol_at(i) for i in range(-4, 5))
    assert (ss.cantor_encode(s, d) == ss.cantor_encode(t, d)) == same


# --- sampling and text

@given(biseqs(), st.integers(1, 10), st.integers(0, 2**32))
def test_sample_ball_stays_inside(s, j, seed):
    r = Fraction(1, 2**j)
    p = ss.sample_ball(s, r, random.Random(seed))
    assert ss.rho(s, p).value < r


@given(biseqs())
def test_text_round_trip(s):
    assert ss.parse_seq(ss.format_seq(s)) == s


def test_dense_text_round_trip():
    seed = ss.shift(ss.dense_orbit_seed(3), 17)
    assert ss.parse_seq(ss.format_seq(seed)) == seed

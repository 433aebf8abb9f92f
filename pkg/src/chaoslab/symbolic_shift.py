"""Exact points of the full N-shift space and the shift map.

A point of Sigma^N is a bi-infinite sequence over the symbols ``1..N``.
Two representations are provided:

* :class:`BiSeq` -- eventually periodic in both directions, stored as
  ``...LLL C RRR...`` in a canonical form so that ``==`` decides equality of
  the underlying sequences.
* :class:`DenseOrbitSeq` -- the rule-defined point whose right half lists
  every finite word in length-lexicographic order.  It is not eventually
  periodic, so distances involving it are interval enclosures.

The metric weighs index ``i`` by ``2**-|i|`` and uses the discrete symbol
metric passed through ``d/(1+d)``, so every mismatch contributes
``2**-|i| / 2``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import AlphabetMismatch
from .exact import ExactDist, check_tol, rat

HALF = Fraction(1, 2)


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def _check_symbols(N, *words):
    for w in words:
        for s in w:
            if not (isinstance(s, int) and 1 <= s <= N):
                raise ValueError(f"symbol {s!r} outside alphabet 1..{N}")


@dataclass(frozen=True, eq=False)
class BiSeq:
    """Eventually periodic bi-infinite sequence over ``{1..N}``.

    ``center`` occupies indices ``offset .. offset+len(center)-1``; the
    right word repeats from there on, the left word repeats toward -inf
    and ends at ``offset-1``.  Instances are always canonical.
    """

    N: int
    left: tuple
    center: tuple
    right: tuple
    offset: int

    def __post_init__(self):
        N = self.N
        if not isinstance(N, int) or N < 2:
            raise ValueError("alphabet size must be an integer >= 2")
        left, center, right = tuple(self.left), tuple(self.center), tuple(self.right)
        if not left or not right:
            raise ValueError("periodic tails must be nonempty")
        _check_symbols(N, left, center, right)
        left, center, right, offset = _canonicalize(
            _primitive_root(left), center, _primitive_root(right), int(self.offset)
        )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def constant(cls, N: int, symbol: int) -> "BiSeq":
        return cls(N, (symbol,), (), (symbol,), 0)

    @classmethod
    def periodic(cls, N: int, word: Sequence[int], start: int = 0) -> "BiSeq":
        """Purely periodic sequence with ``word[0]`` at index ``start``."""
        word = tuple(word)
        return cls(N, word, (), word, start)

    @classmethod
    def from_window(cls, N: int, window: dict, left=(1,), right=(1,)) -> "BiSeq":
        """Sequence equal to ``window`` (index -> symbol) over given tails."""
        if not window:
            return cls(N, tuple(left), (), tuple(right), 0)
        lo, hi = min(window), max(window)
        fill = [window.get(i) for i in range(lo, hi + 1)]
        if any(s is None for s in fill):
            raise ValueError("window must be contiguous")
        return cls(N, tuple(left), tuple(fill), tuple(right), lo)

    @property
    def right_start(self) -> int:
        return self.offset + len(self.center)

    def symbol_at(self, i: int) -> int:
        start = self.offset + len(self.center)
        if i >= start:
            return self.right[(i - start) % len(self.right)]
        if i >= self.offset:
            return self.center[i - self.offset]
        return self.left[(i - self.offset) % len(self.left)]

    def is_periodic(self) -> bool:
        return not self.center and self.left == self.right and self.offset == 0

    def period(self) -> int | None:
        """Minimal shift period, or None when the sequence is not periodic."""
        return len(self.right) if self.is_periodic() else None

    def window(self, lo: int, hi: int) -> tuple:
        return tuple(self.symbol_at(i) for i in range(lo, hi + 1))

    def __eq__(self, other):
        if not isinstance(other, BiSeq):
            return NotImplemented
        return (self.N, self.left, self.center, self.right, self.offset) == (
            other.N, other.left, other.center, other.right, other.offset)

    def __hash__(self):
        return hash((self.N, self.left, self.center, self.right, self.offset))

    def __str__(self):
        return format_seq(self)


def _canonicalize(left, center, right, offset):
    pl, pr = len(left), len(right)
    L0 = offset - 1
    R0 = offset + len(center)

    def at(i):
        if i >= R0:
            return right[(i - R0) % pr]
        if i >= offset:
            return center[i - offset]
        return left[(i - offset) % pl]

    lcm = pl * pr // math.gcd(pl, pr)
    # the right tail extends leftward while it keeps agreeing; after a full
    # common period of agreement inside the left tail the sequence is periodic
    R = R0
    while at(R - 1) == at(R - 1 + pr):
        R -= 1
        if R + lcm <= L0 + 1:
            word = tuple(at(j) for j in range(pr))
            return word, (), word, 0
    L = L0
    while at(L + 1) == at(L + 1 - pl):
        L += 1
    off = min(L + 1, R)
    new_center = tuple(at(i) for i in range(L + 1, R))
    new_right = tuple(at(R + j) for j in range(pr))
    new_left = tuple(at(off - pl + j) for j in range(pl))
    return new_left, new_center, new_right, off


@dataclass(frozen=True)
class DenseOrbitSeq:
    """Left tail constant 1; from index 0 on, all words over ``1..N`` in
    length-lexicographic order (``1 2 11 12 21 22 111 ...`` for N=2),
    viewed after ``shift_by`` applications of the shift."""

    N: int
    shift_by: int = 0

    def symbol_at(self, i: int) -> int:
        return concat_symbol(self.N, i + self.shift_by)

    def window(self, lo: int, hi: int) -> tuple:
        return tuple(self.symbol_at(i) for i in range(lo, hi + 1))

    def __str__(self):
        return format_seq(self)


def concat_symbol(N: int, j: int) -> int:
    if j < 0:
        return 1
    L = 1
    while j >= L * N**L:
        j -= L * N**L
        L += 1
    idx, pos = divmod(j, L)
    # digit `pos` (most significant first) of idx written with L base-N digits
    return (idx // N ** (L - 1 - pos)) % N + 1


def concat_position(N: int, word: Sequence[int]) -> int:
    """Index in the length-lex concatenation where ``word`` is listed."""
    L = len(word)
    start = sum(l * N**l for l in range(1, L))
    rank = 0
    for s in word:
        rank = rank * N + (s - 1)
    return start + L * rank


def symbol_at(s, i: int) -> int:
    return s.symbol_at(i)


def shift(s, k: int):
    """k-fold full shift: ``shift(s, k).symbol_at(i) == s.symbol_at(i + k)``."""
    if isinstance(s, DenseOrbitSeq):
        return DenseOrbitSeq(s.N, s.shift_by + k)
    if k == 0:
        return s
    return BiSeq(s.N, s.left, s.center, s.right, s.offset - k)


def _mismatch_weight(i: int) -> Fraction:
    return Fraction(1, 2 ** (abs(i) + 1))


def rho(s, t, tol=Fraction(1, 2**64)) -> ExactDist:
    """Distance ``sum_i 2**-|i| * d(s_i,t_i)/(1+d(s_i,t_i))`` with discrete d.

    Exact for two :class:`BiSeq` values; otherwise an enclosure of width
    at most ``tol``.
    """
    tol = check_tol(tol)
    if s.N != t.N:
        raise AlphabetMismatch(f"alphabet sizes differ: {s.N} vs {t.N}")
    if isinstance(s, BiSeq) and isinstance(t, BiSeq):
        return ExactDist.exact(_rho_exact(s, t))
    if s == t:
        return ExactDist.exact(0)
    m = 0
    while Fraction(1, 2**m) > tol:
        m += 1
    total = sum((_mismatch_weight(i) for i in range(-m, m + 1)
                 if s.symbol_at(i) != t.symbol_at(i)), Fraction(0))
    return ExactDist.interval(total, total + Fraction(1, 2**m))


def _rho_exact(s: BiSeq, t: BiSeq) -> Fraction:
    if s == t:
        return Fraction(0)
    w0 = min(s.offset, t.offset, 0)
    w1 = max(s.right_start - 1, t.right_start - 1, 0)
    total = Fraction(0)
    for i in range(w0, w1 + 1):
        if s.symbol_at(i) != t.symbol_at(i):
            total += _mismatch_weight(i)
    # right tail: indices w1+1+j, jointly periodic with period P
    P = math.lcm(len(s.right), len(t.right))
    tail = Fraction(0)
    for j in range(P):
        i = w1 + 1 + j
        if s.symbol_at(i) != t.symbol_at(i):
            tail += _mismatch_weight(i)
    total += tail / (1 - Fraction(1, 2**P))
    P = math.lcm(len(s.left), len(t.left))
    tail = Fraction(0)
    for j in range(P):
        i = w0 - 1 - j
        if s.symbol_at(i) != t.symbol_at(i):
            tail += _mismatch_weight(i)
    total += tail / (1 - Fraction(1, 2**P))
    return total


def first_difference(s, t, limit: int = 1 << 16):
    """Index i of smallest |i| (ties: i >= 0 first) with s_i != t_i, or None."""
    if isinstance(s, BiSeq) and isinstance(t, BiSeq):
        if s == t:
            return None
        lo = min(s.offset, t.offset, 0) - math.lcm(len(s.left), len(t.left))
        hi = max(s.right_start, t.right_start, 0) + math.lcm(len(s.right), len(t.right))
        limit = max(-lo, hi)
    for r in range(limit + 1):
        for i in ((0,) if r == 0 else (r, -r)):
            if s.symbol_at(i) != t.symbol_at(i):
                return i
    return None


def separating_shift(s, t, limit: int = 1 << 16):
    """Shift power moving the nearest mismatch of s and t to index 0, so the
    images are at distance >= 1/2."""
    return first_difference(s, t, limit)


def radius_for(eps) -> int:
    """Smallest m >= 0 with ``2**-m < eps``."""
    eps = rat(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = 0
    while Fraction(1, 2**m) >= eps:
        m += 1
    return m


def periodic_point_near(s, eps) -> BiSeq:
    """Periodic point tau with ``shift(tau, 2m+1) == tau`` and rho(s, tau) <= 2**-m < eps.

    tau repeats the block ``s[-m..m]``; m is the smallest value allowed.
    """
    m = radius_for(eps)
    block = tuple(s.symbol_at(j) for j in range(-m, m + 1))
    return BiSeq(s.N, block, (), block, -m)


def dense_orbit_seed(N: int) -> DenseOrbitSeq:
    if N < 2:
        raise ValueError("alphabet size must be >= 2")
    return DenseOrbitSeq(N)


def seed_search(seed, word: Sequence[int], start: int = 0, budget: int = 10_000):
    """Brute-force the least k in ``0..budget`` such that shift(seed, k)
    carries ``word`` on indices ``start .. start+len(word)-1``."""
    word = tuple(word)
    for k in range(budget + 1):
        if all(seed.symbol_at(start + k + j) == w for j, w in enumerate(word)):
            return k
    return None


def seed_hit(seed: DenseOrbitSeq, word: Sequence[int], start: int = 0) -> int:
    """Closed-form shift placing ``word`` at ``start`` (the listed occurrence)."""
    if not word:
        return 0
    return concat_position(seed.N, word) - start - seed.shift_by


def cantor_digits(s, digits: int) -> list:
    """Even base-(2N-1) digits read along the fold 0, 1, -1, 2, -2, ..."""
    out = []
    for n in range(digits):
        i = (n + 1) // 2 if n % 2 else -(n // 2)
        out.append(2 * (s.symbol_at(i) - 1))
    return out


def cantor_encode(s, digits: int) -> Fraction:
    if digits < 1:
        raise ValueError("digits must be >= 1")
    M = 2 * s.N - 1
    return sum((Fraction(a, M ** (n + 1)) for n, a in enumerate(cantor_digits(s, digits))),
               Fraction(0))


def cantor_window(s, digits: int) -> tuple:
    """Closed interval of the stage-``digits`` Cantor construction containing
    every point that shares the first ``digits`` folded symbols with s."""
    lo = cantor_encode(s, digits)
    M = 2 * s.N - 1
    return lo, lo + Fraction(1, M**digits)


def random_biseq(N: int, rng: random.Random, max_period: int = 4,
                 max_center: int = 8, max_offset: int = 6) -> BiSeq:
    def word(n):
        return tuple(rng.randint(1, N) for _ in range(n))
    return BiSeq(N, word(rng.randint(1, max_period)), word(rng.randint(0, max_center)),
                 word(rng.randint(1, max_period)), rng.randint(-max_offset, max_offset))


def sample_ball(center, radius, rng: random.Random, spread: int = 4) -> BiSeq:
    """Random BiSeq within rho-distance < radius of center.

    Keeps the center's symbols on ``[-r, r]`` with r = ceil(log2(1/radius)) + 1,
    then mutates a window of ``spread`` symbols on each side and attaches random
    periodic tails.
    """
    radius = rat(radius)
    r = max(0, math.ceil(math.log2(1 / radius))) + 1 if radius < 1 else 1
    while Fraction(1, 2**r) >= radius:
        r += 1
    N = center.N
    keep = [center.symbol_at(i) for i in range(-r, r + 1)]
    lw = [rng.randint(1, N) for _ in range(spread)]
    rw = [rng.randint(1, N) for _ in range(spread)]
    lt = tuple(rng.randint(1, N) for _ in range(rng.randint(1, 3)))
    rt = tuple(rng.randint(1, N) for _ in range(rng.randint(1, 3)))
    return BiSeq(N, lt, tuple(lw + keep + rw), rt, -r - spread)


def format_word(w) -> str:
    return ",".join(str(s) for s in w)


def format_seq(s) -> str:
    if isinstance(s, DenseOrbitSeq):
        return f"dense {s.N} @ {s.shift_by}"
    return (f"{s.N} | {format_word(s.left)} | {format_word(s.center)} @ {s.offset}"
            f" | {format_word(s.right)}")


def _parse_word(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(x) for x in text.split(","))


def parse_seq(text: str):
    """Inverse of :func:`format_seq`."""
    text = text.strip()
    if text.startswith("dense"):
        body, _, sh = text[len("dense"):].partition("@")
        return DenseOrbitSeq(int(body), int(sh or 0))
    parts = text.split("|")
    if len(parts) != 4:
        raise ValueError(f"expected 'N | left | center @ offset | right', got {text!r}")
    N = int(parts[0])
    center, sep, off = parts[2].partition("@")
    if not sep:
        raise ValueError("missing '@ offset' in sequence text")
    return BiSeq(N, _parse_word(parts[1]), _parse_word(center), _parse_word(parts[3]), int(off))

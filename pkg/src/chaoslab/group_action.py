"""Group words over products of cyclic and free groups, and their actions.

A :class:`GroupWord` is a finitely supported assignment ``key -> component``.
A component is a nonzero ``int`` for a copy of Z, or a reduced tuple of
``(generator, exponent)`` syllables for a free factor.  Products of systems
act coordinatewise; words only ever touch finitely many coordinates.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .errors import BudgetTooLarge, ExactEqualityUnsupported, SignatureMismatch
from .exact import ExactDist, check_budget, max_budget, rat
from .metric_product import BoundedMetric, ProductPoint, ProductSpace, product_dist
from .report import EXHAUSTED, FOUND, WitnessReport


def _key_order(k):
    if isinstance(k, tuple):
        return (2, tuple(_key_order(x) for x in k))
    if isinstance(k, int):
        return (0, k, "")
    return (1, 0, str(k))


def _reduce_free(syllables) -> tuple:
    out: list = []
    for gen, e in syllables:
        if e == 0:
            continue
        if out and out[-1][0] == gen:
            e += out[-1][1]
            out.pop()
            if e == 0:
                continue
        out.append((gen, e))
    return tuple(out)


def _mul(a, b):
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    if isinstance(a, tuple) and isinstance(b, tuple):
        return _reduce_free(a + b)
    raise SignatureMismatch(f"cannot multiply components {a!r} and {b!r}")


def _inv(a):
    if isinstance(a, int):
        return -a
    return tuple((g, -e) for g, e in reversed(a))


def _is_identity(a) -> bool:
    return a == 0 or a == ()


@dataclass(frozen=True)
class GroupWord:
    items: tuple = ()

    @classmethod
    def of(cls, mapping: dict | None = None) -> "GroupWord":
        clean = []
        for k, c in (mapping or {}).items():
            if isinstance(c, bool):
                raise TypeError("bool is not a group component")
            if isinstance(c, (list, tuple)):
                c = _reduce_free(tuple(tuple(s) for s in c))
            if not _is_identity(c):
                clean.append((k, c))
        clean.sort(key=lambda kc: _key_order(kc[0]))
        return cls(tuple(clean))

    @property
    def support(self) -> tuple:
        return tuple(k for k, _ in self.items)

    def get(self, key, default=None):
        for k, c in self.items:
            if k == key:
                return c
        return default

    def as_dict(self) -> dict:
        return dict(self.items)

    def is_identity(self) -> bool:
        return not self.items

    def length(self) -> int:
        n = 0
        for _, c in self.items:
            n += abs(c) if isinstance(c, int) else sum(abs(e) for _, e in c)
        return n

    def __str__(self):
        return format_word(self)


IDENTITY = GroupWord()


def compose(u: GroupWord, v: GroupWord) -> GroupWord:
    """Componentwise product ``u * v`` (apply v first, then u)."""
    out = u.as_dict()
    for k, c in v.items:
        out[k] = _mul(out[k], c) if k in out else c
    return GroupWord.of(out)


def inverse(u: GroupWord) -> GroupWord:
    return GroupWord.of({k: _inv(c) for k, c in u.items})


def power(u: GroupWord, n: int) -> GroupWord:
    w = IDENTITY
    base = u if n >= 0 else inverse(u)
    for _ in range(abs(n)):
        w = compose(w, base)
    return w


def birkhoff_witness(g1: GroupWord, g2: GroupWord) -> GroupWord:
    """``g2 * g1^-1``: turns hits ``g1.x in U`` and ``g2.x in V`` into
    a word carrying a point of U into V."""
    return compose(g2, inverse(g1))


def _fmt_key(k) -> str:
    if isinstance(k, tuple):
        return ".".join(_fmt_key(x) for x in k)
    return str(k)


def format_word(w: GroupWord) -> str:
    parts = []
    for k, c in w.items:
        if isinstance(c, int):
            parts.append(f"{_fmt_key(k)}:{c:+d}")
        else:
            parts.append(f"{_fmt_key(k)}:" + "*".join(f"{g}^{e}" for g, e in c))
    return "{" + ", ".join(parts) + "}"


def _parse_key(text: str):
    bits = text.split(".")
    conv = [int(b) if re.fullmatch(r"-?\d+", b) else b for b in bits]
    return conv[0] if len(conv) == 1 else tuple(conv)


def parse_word(text: str) -> GroupWord:
    """Inverse of :func:`format_word`."""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"group word must be braced: {text!r}")
    body = text[1:-1].strip()
    out = {}
    if not body:
        return IDENTITY
    for part in body.split(","):
        key, _, comp = part.partition(":")
        comp = comp.strip()
        if re.fullmatch(r"[+-]?\d+", comp):
            value: Any = int(comp)
        else:
            value = tuple((g, int(e)) for g, e in (s.split("^") for s in comp.split("*")))
        out[_parse_key(key.strip())] = value
    return GroupWord.of(out)


@dataclass
class SystemHandle:
    """A group acting on a point universe, with a metric and samplers.

    ``gens`` maps generator names to ``(key, free_generator_or_None)``.
    Optional hooks (``periodic_oracle``, ``dense_seed``/``dense_hit``,
    ``sample_point``) are None when a system has no such construction.
    """

    name: str
    kind: str
    act: Callable[[GroupWord, Any], Any]
    dist: Callable[[Any, Any, Fraction], ExactDist]
    sample_ball: Callable
    gens: dict
    exact_points: bool = True
    bounded: bool = False
    sample_point: Optional[Callable] = None
    periodic_oracle: Optional[Callable] = None
    dense_seed: Any = None
    dense_hit: Optional[Callable] = None
    sensitivity_constant: Optional[Fraction] = None
    separate: Optional[Callable] = None
    base_point: Any = None
    format_point: Callable = str
    parse_point: Optional[Callable] = None
    spec: Any = None
    factors: tuple = field(default=(), repr=False)

    @property
    def generators(self) -> list:
        return list(self.gens)

    @property
    def signature(self) -> dict:
        sig = {}
        for key, fgen in self.gens.values():
            if fgen is None:
                sig[key] = "Z"
            else:
                sig.setdefault(key, ("F", set()))[1].add(fgen)
        return sig

    def gen(self, name: str, exp: int = 1) -> GroupWord:
        key, fgen = self.gens[name]
        if fgen is None:
            return GroupWord.of({key: exp})
        return GroupWord.of({key: ((fgen, exp),)})

    def word(self, **exps) -> GroupWord:
        w = IDENTITY
        for name, e in exps.items():
            w = compose(w, self.gen(name, e))
        return w

    def atoms(self) -> list:
        """Generators and inverses in enumeration order."""
        out = []
        for name in sorted(self.gens):
            out.append(self.gen(name, 1))
            out.append(self.gen(name, -1))
        return out

    def check_word(self, w: GroupWord):
        sig = self.signature
        for k, c in w.items:
            if k not in sig:
                raise SignatureMismatch(f"{self.name}: no factor {k!r}")
            if (sig[k] == "Z") != isinstance(c, int):
                raise SignatureMismatch(f"{self.name}: wrong component type for {k!r}")


def enumerate_words(sys: SystemHandle, max_len: int, limit: int | None = None):
    """Distinct group elements of word length <= max_len, shortest first,
    ties broken by generator name order (BFS on the Cayley graph)."""
    seen = {IDENTITY}
    layer = [IDENTITY]
    yield IDENTITY
    count = 1
    atoms = sys.atoms()
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for a in atoms:
                u = compose(a, w)
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
                    yield u
                    count += 1
                    if limit is not None and count >= limit:
                        return
        layer = nxt
        if not layer:
            return


def _dedup_insert(sys, found: list, index: set, p, tol) -> bool:
    if sys.exact_points:
        if p in index:
            return False
        index.add(p)
        found.append(p)
        return True
    for q in found:
        if sys.dist(p, q, tol).certainly_lt(tol):
            return False
    found.append(p)
    return True


def orbit_ball(sys: SystemHandle, x, word_len_max: int, tol=Fraction(1, 2**32),
               max_points: int | None = None) -> list:
    """Points ``act(w, x)`` for words of length <= word_len_max, in BFS order.

    Exact point kinds are deduplicated structurally; metric-only kinds merge
    points closer than tol.
    """
    if word_len_max < 0:
        raise ValueError("word_len_max must be >= 0")
    cap = max_points if max_points is not None else max_budget()
    tol = rat(tol)
    found: list = []
    index: set = set()
    _dedup_insert(sys, found, index, x, tol)
    frontier = [x]
    atoms = sys.atoms()
    for _ in range(word_len_max):
        nxt = []
        for p in frontier:
            for a in atoms:
                q = sys.act(a, p)
                if _dedup_insert(sys, found, index, q, tol):
                    nxt.append(q)
                    if len(found) > cap:
                        raise BudgetTooLarge(f"orbit ball exceeds {cap} points")
        frontier = nxt
        if not frontier:
            break
    return found


def is_finite_orbit(sys: SystemHandle, x, budget: int) -> WitnessReport:
    """FOUND with the orbit when closure under all generators stabilizes
    within ``budget`` generator applications; EXHAUSTED otherwise."""
    if not sys.exact_points:
        raise ExactEqualityUnsupported(f"{sys.name}: points lack exact equality")
    check_budget(budget)
    orbit = [x]
    seen = {x}
    frontier = [x]
    # a finite set closed under the (injective) generators is also closed
    # under their inverses, so forward closure suffices
    atoms = [sys.gen(n, 1) for n in sorted(sys.gens)]
    used = 0
    while frontier:
        nxt = []
        for p in frontier:
            for a in atoms:
                if used >= budget:
                    return WitnessReport(EXHAUSTED, budget_used={"applications": used})
                q = sys.act(a, p)
                used += 1
                if q not in seen:
                    seen.add(q)
                    orbit.append(q)
                    nxt.append(q)
        frontier = nxt
    return WitnessReport(FOUND, certificate={"orbit_size": len(orbit)},
                         budget_used={"applications": used}, payload=orbit)


# ---------------------------------------------------------------- products

def _factor_key(child: SystemHandle, i: int, key):
    single = len(child.signature) == 1
    return i if single else (i, key)


class _ProductFactors:
    """Finite list of factor systems, or a rule ``i -> system`` with only
    the first ``active`` factors carrying generators."""

    def __init__(self, factors, active=None):
        if callable(factors):
            if active is None:
                raise ValueError("a countable product needs an active factor count")
            self.rule, self.active, self.size = factors, active, None
            self._cache = {}
        else:
            factors = list(factors)
            if not factors:
                raise ValueError("product needs at least one factor")
            self.rule = None
            self._list = factors
            self.size = len(factors)
            self.active = len(factors) if active is None else active

    def __getitem__(self, i):
        if self.rule is None:
            return self._list[i - 1]
        if i not in self._cache:
            self._cache[i] = self.rule(i)
        return self._cache[i]


def product_system(factors, active: int | None = None, name: str | None = None) -> SystemHandle:
    """Canonical coordinatewise action of the product group.

    ``factors`` is a list of systems, or a callable ``i -> system`` for a
    countable product (then ``active`` gives how many leading factors get
    generators and are sampled).
    """
    fs = _ProductFactors(factors, active)
    n = fs.active
    if fs.size is not None and fs.size == 1 and name is None:
        name = f"product({fs[1].name})"

    space = ProductSpace(
        (lambda i: BoundedMetric(fs[i].dist, fs[i].bounded)) if fs.size is None
        else [BoundedMetric(f.dist, f.bounded) for f in fs._list],
        (lambda i: fs[i].base_point) if fs.size is None else [f.base_point for f in fs._list],
    )

    gens = {}
    key_map = {}  # product key -> (factor index, child key)
    for i in range(1, n + 1):
        child = fs[i]
        for gname, (ckey, fgen) in child.gens.items():
            pkey = _factor_key(child, i, ckey)
            key_map[pkey] = (i, ckey)
            gens[f"{i}.{gname}"] = (pkey, fgen)

    def split(word: GroupWord) -> dict:
        per: dict = {}
        for k, c in word.items:
            if k in key_map:
                i, ckey = key_map[k]
            elif isinstance(k, int):
                i, ckey = k, next(iter(fs[k].signature))
            else:
                i, ckey = k[0], k[1]
            per.setdefault(i, {})[ckey] = c
        return {i: GroupWord.of(m) for i, m in per.items()}

    def act(word, x):
        if word.is_identity():
            return x
        updates = {i: fs[i].act(w, x.coord(i)) for i, w in split(word).items()}
        return x.replace(updates)

    def dist(x, y, tol):
        return product_dist(x, y, tol)

    def allot(r, count):
        # factor i may move by r*2^i/count: the weighted sum stays below r
        return [r * 2**i / count for i in range(1, count + 1)]

    def sample_ball(center, radius, rng):
        radius = rat(radius)
        rs = allot(radius, n)
        return center.replace({i: fs[i].sample_ball(center.coord(i), rs[i - 1], rng)
                               for i in range(1, n + 1)})

    sample_point = None
    if all(fs[i].sample_point is not None for i in range(1, n + 1)):
        def sample_point(rng):
            return space.point({i: fs[i].sample_point(rng) for i in range(1, n + 1)})

    periodic_oracle = None
    if all(fs[i].periodic_oracle is not None for i in range(1, n + 1)):
        def periodic_oracle(x, eps):
            eps = rat(eps)
            idx = sorted(set(range(1, n + 1)) | set(x.support))
            es = {i: eps * 2**i / len(idx) for i in idx}
            return x.replace({i: fs[i].periodic_oracle(x.coord(i), es[i]) for i in idx})

    dense_seed = dense_hit = None
    if all(fs[i].dense_seed is not None and fs[i].dense_hit is not None
           for i in range(1, n + 1)):
        dense_seed = space.point({i: fs[i].dense_seed for i in range(1, n + 1)})

        def dense_hit(seed, target, eps):
            es = allot(rat(eps), n)
            w = IDENTITY
            for i in range(1, n + 1):
                hit = fs[i].dense_hit(seed.coord(i), target.coord(i), es[i - 1])
                if hit is None:
                    return None
                w = compose(w, embed_word(handle, i, hit))
            return w

    def separate(u, v):
        # lift the first separable factor's witness; other coordinates idle
        for i in range(1, n + 1):
            if fs[i].separate is not None and u.coord(i) != v.coord(i):
                w = fs[i].separate(u.coord(i), v.coord(i))
                if w is not None:
                    return embed_word(handle, i, w)
        return None

    sens = None
    for i in range(1, n + 1):
        if fs[i].sensitivity_constant is not None:
            sens = lift_constant(i, fs[i].sensitivity_constant)
            break

    def fmt(p):
        return " ; ".join(f"{i}={fs[i].format_point(c)}" for i, c in p.items) or "base"

    def parse(text):
        text = text.strip()
        if text == "base":
            return space.base_point()
        coords = {}
        for part in text.split(";"):
            i, _, body = part.partition("=")
            i = int(i)
            coords[i] = fs[i].parse_point(body)
        return space.point(coords)

    label = name or "product(" + ", ".join(fs[i].name for i in range(1, n + 1)) + \
        (", ...)" if fs.size is None else ")")
    handle = SystemHandle(
        name=label,
        kind="ProductPoint",
        act=act,
        dist=dist,
        sample_ball=sample_ball,
        gens=gens,
        exact_points=all(fs[i].exact_points for i in range(1, n + 1)),
        bounded=True,
        sample_point=sample_point,
        periodic_oracle=periodic_oracle,
        dense_seed=dense_seed,
        dense_hit=dense_hit,
        sensitivity_constant=sens,
        separate=separate,
        base_point=space.base_point(),
        format_point=fmt,
        parse_point=parse,
        factors=tuple(fs[i] for i in range(1, n + 1)),
    )
    handle.space = space
    handle.split_word = split
    return handle


def lift_constant(n: int, sigma) -> Fraction:
    """Sensitivity constant ``sigma / 2**(n+1)`` of a product whose n-th
    factor is sensitive with constant sigma."""
    if n < 1:
        raise ValueError("factor index must be >= 1")
    sigma = rat(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return sigma / 2 ** (n + 1)


def embed_word(product: SystemHandle, i: int, w: GroupWord) -> GroupWord:
    """Place factor i's word inside the product group."""
    child = product.factors[i - 1]
    return GroupWord.of({_factor_key(child, i, k): c for k, c in w.items})


def project_word(product: SystemHandle, i: int, w: GroupWord) -> GroupWord:
    return product.split_word(w).get(i, IDENTITY)

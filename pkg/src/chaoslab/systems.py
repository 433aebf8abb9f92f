"""Concrete group actions packaged as :class:`SystemHandle` values.

Samplers take a ``random.Random`` so every search is reproducible from a
seed.  Torus-type samplers draw rational perturbations whose denominators
are bounded by ``1024 * ceil(1/radius)``.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction

from . import symbolic_shift as ss
from . import torus_dynamics as td
from .errors import ConstructorPrecondition
from .exact import ExactDist, fmt_rat, rat, round_half_up, sqrt_interval
from .group_action import GroupWord, SystemHandle


def _z_exponent(word: GroupWord, key=1) -> int:
    return word.get(key, 0)


def _rand_offset(rng: random.Random, radius: Fraction) -> Fraction:
    den = 1024 * math.ceil(1 / radius)
    jmax = math.ceil(radius * den) - 1
    return Fraction(rng.randint(-jmax, jmax), den)


# ------------------------------------------------------------------ shift

def shift_system(N: int) -> SystemHandle:
    if not isinstance(N, int) or N < 2:
        raise ConstructorPrecondition(f"shift alphabet size must be >= 2, got {N}")

    def dense_hit(seed, target, eps):
        if not isinstance(seed, ss.DenseOrbitSeq):
            return None
        m = ss.radius_for(eps)
        k = ss.seed_hit(seed, target.window(-m, m), -m)
        return GroupWord.of({1: k})

    def separate(u, v):
        k = ss.separating_shift(u, v)
        return None if k is None else GroupWord.of({1: k})

    return SystemHandle(
        name=f"shift({N})",
        kind="BiSeq",
        act=lambda w, s: ss.shift(s, _z_exponent(w)),
        dist=lambda s, t, tol: ss.rho(s, t, tol),
        sample_ball=ss.sample_ball,
        gens={"shift": (1, None)},
        sample_point=lambda rng: ss.random_biseq(N, rng),
        periodic_oracle=ss.periodic_point_near,
        dense_seed=ss.dense_orbit_seed(N),
        dense_hit=dense_hit,
        sensitivity_constant=Fraction(1, 2),
        separate=separate,
        base_point=ss.BiSeq.constant(N, 1),
        format_point=ss.format_seq,
        parse_point=ss.parse_seq,
        spec={"kind": "shift", "N": N},
    )


# ------------------------------------------------------------------ torus

def _torus_ball(center, radius, rng, inside=None, tries=1000):
    radius = rat(radius)
    r = min(radius, Fraction(1, 2))
    for _ in range(tries):
        p = td.TorusPoint(center.x + _rand_offset(rng, r), center.y + _rand_offset(rng, r))
        if inside is None or inside(p):
            return p
    return center


def _random_torus_point(rng, den=1 << 20):
    return td.TorusPoint(Fraction(rng.randrange(den), den), Fraction(rng.randrange(den), den))


def lattice_round(p: td.TorusPoint, eps) -> td.TorusPoint:
    """Nearest point with denominator q = ceil(1/eps); sup distance <= 1/(2q) < eps."""
    q = math.ceil(1 / rat(eps))
    return td.TorusPoint(Fraction(round_half_up(p.x * q), q), Fraction(round_half_up(p.y * q), q))


def lattice_truncate(p: td.TorusPoint, eps) -> td.TorusPoint:
    """Point with denominator q = floor(1/eps)+1 obtained by rounding toward 0;
    it lies in every closed set symmetric about the axes that contains p."""
    q = math.floor(1 / rat(eps)) + 1

    def trunc(v):
        return Fraction(int(v * q), q)  # int() truncates toward zero
    return td.TorusPoint(trunc(p.x), trunc(p.y))


def anosov_system(A: td.AnosovMatrix) -> SystemHandle:
    return SystemHandle(
        name=f"anosov({A.a},{A.b},{A.c},{A.d})",
        kind="TorusPoint",
        act=lambda w, p: td.anosov_apply(A, p, _z_exponent(w)),
        dist=td.torus_dist,
        sample_ball=_torus_ball,
        gens={"A": (1, None)},
        bounded=True,
        sample_point=_random_torus_point,
        periodic_oracle=lattice_round,
        sensitivity_constant=Fraction(1, 4),
        base_point=td.TorusPoint(0, 0),
        format_point=td.format_point,
        parse_point=td.parse_point,
        spec={"kind": "anosov", "a": A.a, "b": A.b, "c": A.c, "d": A.d},
    )


def linked_twist_system(k: int, m: int) -> SystemHandle:
    """Linked twist map on the torus; samplers stay inside R."""
    td._check_km(k, m)

    def inside(p):
        return td.in_R(p, k, m)

    def sample_point(rng):
        while True:
            p = _random_torus_point(rng)
            if inside(p):
                return p

    return SystemHandle(
        name=f"linked_twist({k},{m})",
        kind="TorusPoint",
        act=lambda w, p: td.linked_twist_power(p, k, m, _z_exponent(w)),
        dist=td.torus_dist,
        sample_ball=lambda c, r, rng: _torus_ball(c, r, rng, inside),
        gens={"g": (1, None)},
        bounded=True,
        sample_point=sample_point,
        periodic_oracle=lattice_truncate,
        sensitivity_constant=Fraction(1, 8),
        base_point=td.TorusPoint(0, 0),
        format_point=td.format_point,
        parse_point=td.parse_point,
        spec={"kind": "linked_twist", "k": k, "m": m},
    )


def disk_system(k: int, m: int) -> SystemHandle:
    """Induced map on the disk ``p(R)`` inside the pillow."""
    td._check_km(k, m)

    def inside(p):
        return td.in_R(p, k, m)

    def sample_ball(center, radius, rng):
        lift = _torus_ball(center.lifts()[0], radius, rng, inside)
        return td.pillow_project(lift)

    def sample_point(rng):
        while True:
            p = _random_torus_point(rng)
            if inside(p):
                return td.pillow_project(p)

    def oracle(q, eps):
        return td.pillow_project(lattice_truncate(q.lifts()[0], eps))

    return SystemHandle(
        name=f"disk({k},{m})",
        kind="PillowPoint",
        act=lambda w, q: td.disk_map(q, k, m, _z_exponent(w)),
        dist=td.pillow_dist,
        sample_ball=sample_ball,
        gens={"g": (1, None)},
        bounded=True,
        sample_point=sample_point,
        periodic_oracle=oracle,
        sensitivity_constant=Fraction(1, 8),
        base_point=td.pillow_project(td.TorusPoint(0, 0)),
        format_point=td.format_point,
        parse_point=td.parse_pillow,
        spec={"kind": "disk", "k": k, "m": m},
    )


# ------------------------------------------------------------ isometries

def rotation_system(alpha) -> SystemHandle:
    """Circle rotation ``x -> x + alpha`` on Q/Z; an isometry."""
    alpha = rat(alpha)

    def dist(x, y, tol=None):
        return ExactDist.exact(abs(td.canon(x - y)))

    def sample_ball(c, r, rng):
        return td.canon(c + _rand_offset(rng, min(rat(r), Fraction(1, 2))))

    def oracle(x, eps):
        # every orbit is finite for rational alpha
        return x

    return SystemHandle(
        name=f"rotation({fmt_rat(alpha)})",
        kind="CirclePoint",
        act=lambda w, x: td.canon(x + _z_exponent(w) * alpha),
        dist=dist,
        sample_ball=sample_ball,
        gens={"rot": (1, None)},
        bounded=True,
        sample_point=lambda rng: Fraction(rng.randrange(1 << 20), 1 << 20) - Fraction(1, 2),
        periodic_oracle=oracle,
        base_point=Fraction(0),
        format_point=fmt_rat,
        parse_point=lambda t: td.canon(rat(t)),
        spec={"kind": "rotation", "alpha": fmt_rat(alpha)},
    )


def identity_system(base: SystemHandle) -> SystemHandle:
    """Same space and metric as ``base`` with a generator acting trivially."""
    return SystemHandle(
        name=f"identity({base.name})",
        kind=base.kind,
        act=lambda w, x: x,
        dist=base.dist,
        sample_ball=base.sample_ball,
        gens={"id": (1, None)},
        exact_points=base.exact_points,
        bounded=base.bounded,
        sample_point=base.sample_point,
        periodic_oracle=lambda x, eps: x,
        dense_seed=base.dense_seed,
        base_point=base.base_point,
        format_point=base.format_point,
        parse_point=base.parse_point,
        spec={"kind": "identity", "base": base.spec},
    )


# ---------------------------------------------------------------- affine

def affine_example_system(n: int, lam, tol=Fraction(1, 2**40)) -> SystemHandle:
    """Translations by the basis vectors plus scaling by lam > 1 on Q^n.

    The group is free on ``trans_1..trans_n, scale``; a word's syllables are
    applied right to left.  Distance is Euclidean, enclosed to width tol.
    """
    lam = rat(lam)
    if n < 1:
        raise ConstructorPrecondition("dimension must be >= 1")
    if lam <= 1:
        raise ConstructorPrecondition(f"scaling factor must exceed 1, got {lam}")

    def apply_syllable(gen, e, x):
        if gen == "scale":
            f = lam**e
            return tuple(v * f for v in x)
        i = int(gen.split("_")[1]) - 1
        return tuple(v + e if j == i else v for j, v in enumerate(x))

    def act(w, x):
        for gen, e in reversed(w.get(1, ())):
            x = apply_syllable(gen, e, x)
        return x

    def dist(x, y, t=tol):
        return sqrt_interval(sum((a - b) ** 2 for a, b in zip(x, y)), t)

    def sample_ball(c, r, rng):
        # sup-norm step r/(2 sqrt n) keeps the Euclidean step below r
        step = rat(r) / (2 * math.isqrt(n) + 2)
        return tuple(v + _rand_offset(rng, step) for v in c)

    gens = {f"trans_{i}": (1, f"trans_{i}") for i in range(1, n + 1)}
    gens["scale"] = (1, "scale")
    return SystemHandle(
        name=f"affine({n},{fmt_rat(lam)})",
        kind="AffinePoint",
        act=act,
        dist=dist,
        sample_ball=sample_ball,
        gens=gens,
        sample_point=lambda rng: tuple(Fraction(rng.randint(-2048, 2048), 1024) for _ in range(n)),
        base_point=tuple(Fraction(0) for _ in range(n)),
        format_point=lambda x: ", ".join(fmt_rat(v) for v in x),
        parse_point=lambda t: tuple(rat(v) for v in t.split(",")),
        spec={"kind": "affine", "n": n, "lambda": fmt_rat(lam)},
    )

"""Budgeted, re-checkable searches for the defining properties of chaos.

Universal statements (every open set, every point, every epsilon) are
replaced by finitely many probes drawn from a seeded RNG.  Each check
returns a :class:`WitnessReport` whose certificate lists the points, words
and distances it relied on; :func:`recheck` re-evaluates a certificate
without repeating the search.
"""
from __future__ import annotations

import hashlib
import random
from itertools import islice
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MissingFixedPoint, NoOracle, SignatureMismatch
from .exact import ExactDist, fmt_rat, rat
from .group_action import (IDENTITY, GroupWord, SystemHandle, birkhoff_witness, compose,
                           embed_word,
                           enumerate_words, is_finite_orbit, lift_constant, parse_word)
from .metric_product import ProductSpace
from .report import CERTIFIED_BOUND, EXHAUSTED, FOUND, WitnessReport
from .systems import affine_example_system  # noqa: F401  (public re-export)

DEFAULT_TOL = Fraction(1, 2**64)

QUICK_WORDS = 256  # words tried before any dense-orbit construction

DEFAULT_BUDGETS = {
    "probes": 20,            # probe centers per clause
    "word_len_max": 24,      # longest word tried by enumerating searches
    "max_words": 2048,       # cap on distinct words per enumeration
    "samples": 8,            # points sampled per ball
    "orbit_budget": 50_000,  # generator applications for finite-orbit closure
    "seed_orbit_budget": 64,
    "sens_eps": ["1/16", "1/64"],
    "sens_probes": 20,
    "factors": True,         # cross-check product reports against factors
    "tol": DEFAULT_TOL,      # enclosure width for interval distances
}


def derive_seed(seed: int, *labels) -> int:
    """Stable child seed; independent of hash randomization and scheduling."""
    h = hashlib.sha256(repr((seed,) + labels).encode()).digest()
    return int.from_bytes(h[:8], "big")


def _budgets(budgets) -> dict:
    out = dict(DEFAULT_BUDGETS)
    out.update(budgets or {})
    return out


@dataclass(frozen=True)
class Ball:
    system: str
    center: object
    radius: Fraction

    def __post_init__(self):
        r = rat(self.radius)
        if r <= 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", r)

    def to_json(self, sys: SystemHandle) -> dict:
        return {"center": sys.format_point(self.center), "radius": fmt_rat(self.radius)}


def _ball(sys, center, radius) -> Ball:
    return Ball(sys.name, center, radius)


def _inside(sys, p, ball: Ball, tol=DEFAULT_TOL):
    d = sys.dist(p, ball.center, tol)
    return d.certainly_lt(ball.radius), d


# ---------------------------------------------------------- transitivity

def transitivity_witness(sys: SystemHandle, U: Ball, V: Ball, budget=None,
                         seed: int = 0) -> WitnessReport:
    """Find a word g and u in U with g.u in V.

    Words are tried shortest first against the center of U and a few sampled
    points of U.  When the system has a dense orbit seed with a hitting
    construction, two hits g1.x in U, g2.x in V are combined into
    ``g2 g1^-1`` once the first QUICK_WORDS words fail.
    """
    b = _budgets(budget)
    tol = rat(b["tol"])
    rng = random.Random(seed)
    points = [U.center]
    for _ in range(b["samples"]):
        p = sys.sample_ball(U.center, U.radius, rng)
        if _inside(sys, p, U, tol)[0]:
            points.append(p)
    tried = 0
    words = enumerate_words(sys, b["word_len_max"], b["max_words"])
    # short words first; the dense-orbit construction (if any) before the
    # long tail, which is costly on products
    for phase in ("short", "dense", "long"):
        if phase == "dense":
            hit = _dense_transit(sys, U, V, tol)
            if hit is not None:
                u, g = hit
                return _transitivity_report(sys, U, V, u, g, tried + 1, seed, "dense-orbit",
                                            tol)
            continue
        for w in (islice(words, QUICK_WORDS) if phase == "short" else words):
            for u in points:
                tried += 1
                if _inside(sys, sys.act(w, u), V, tol)[0]:
                    return _transitivity_report(sys, U, V, u, w, tried, seed, "search", tol)
    return WitnessReport(EXHAUSTED, budget_used={"word_point_pairs": tried}, seed=seed)


def _dense_transit(sys, U, V, tol):
    if sys.dense_seed is None or sys.dense_hit is None:
        return None
    x = sys.dense_seed
    g1 = sys.dense_hit(x, U.center, U.radius)
    g2 = sys.dense_hit(x, V.center, V.radius)
    if g1 is None or g2 is None:
        return None
    u = sys.act(g1, x)
    g = birkhoff_witness(g1, g2)
    if _inside(sys, u, U, tol)[0] and _inside(sys, sys.act(g, u), V, tol)[0]:
        return u, g
    return None


def _transitivity_report(sys, U, V, u, w, tried, seed, method, tol):
    image = sys.act(w, u)
    cert = {
        "property": "transitivity",
        "method": method,
        "U": U.to_json(sys),
        "V": V.to_json(sys),
        "u": sys.format_point(u),
        "word": str(w),
        "image": sys.format_point(image),
        "dist_u_U": sys.dist(u, U.center, tol).to_json(),
        "dist_image_V": sys.dist(image, V.center, tol).to_json(),
    }
    return WitnessReport(FOUND, witness=w, certificate=cert,
                         budget_used={"word_point_pairs": tried}, seed=seed)


def product_transitivity_witness(factor_witnesses, product: SystemHandle | None = None
                                 ) -> GroupWord:
    """Assemble factor words ``g_i`` into the product word ``{g_i}``.

    Identity entries (or None) leave a factor idle.  Without ``product`` each
    factor word must involve a single cyclic factor.
    """
    out = IDENTITY
    for i, w in enumerate(factor_witnesses, start=1):
        if w is None or w.is_identity():
            continue
        if product is not None:
            out = compose(out, embed_word(product, i, w))
            continue
        if len(w.items) != 1:
            raise SignatureMismatch("factor word spans several keys; pass the product system")
        out = compose(out, GroupWord.of({i: w.items[0][1]}))
    return out


# ---------------------------------------------------------- closed orbits

def closed_orbit_density(sys: SystemHandle, periodic_oracle=None, eps=Fraction(1, 8),
                         probes: int = 20, rng_seed: int = 0,
                         orbit_budget: int = 50_000, tol=DEFAULT_TOL) -> WitnessReport:
    """For sampled x, produce y with a finite orbit and d(x, y) < eps."""
    oracle = periodic_oracle or sys.periodic_oracle
    if oracle is None:
        raise NoOracle(f"{sys.name} has no periodic-point oracle")
    if sys.sample_point is None:
        raise NoOracle(f"{sys.name} has no global sampler")
    eps = rat(eps)
    rng = random.Random(rng_seed)
    rows = []
    good = 0
    applications = 0
    for _ in range(probes):
        x = sys.sample_point(rng)
        y = oracle(x, eps)
        d = sys.dist(x, y, tol)
        fin = is_finite_orbit(sys, y, orbit_budget)
        applications += fin.budget_used["applications"]
        ok = d.certainly_lt(eps) and fin.status == FOUND
        good += ok
        rows.append({
            "x": sys.format_point(x),
            "y": sys.format_point(y),
            "dist": d.to_json(),
            "orbit_size": fin.certificate["orbit_size"] if fin.certificate else None,
            "ok": ok,
        })
    cert = {
        "property": "closed_orbit_density",
        "eps": fmt_rat(eps),
        "success_fraction": fmt_rat(Fraction(good, probes)) if probes else "1",
        "probes": rows,
    }
    status = FOUND if good == probes else EXHAUSTED
    return WitnessReport(status, certificate=cert,
                         budget_used={"probes": probes, "applications": applications},
                         seed=rng_seed)


def product_periodic_point(factor_points, factor_fixed_points, active, system=None):
    """Point with coordinates ``factor_points[i]`` on ``active`` and fixed
    points elsewhere; its orbit is the product of finitely many finite orbits.

    Indices are 1-based.  With ``system`` (a product system) the point lives
    in its product space and the fixed points are checked.
    """
    active = set(active)
    n = len(factor_fixed_points)
    coords = {}
    for i in range(1, n + 1):
        if i in active:
            coords[i] = factor_points[i - 1]
        else:
            x0 = factor_fixed_points[i - 1]
            if x0 is None:
                raise MissingFixedPoint(f"factor {i} is idle but has no fixed point")
            if system is not None:
                f = system.factors[i - 1]
                if any(f.act(f.gen(g), x0) != x0 for g in f.gens):
                    raise MissingFixedPoint(f"factor {i}: supplied point is not fixed")
            coords[i] = x0
    if system is not None:
        return system.space.point(coords)
    space = ProductSpace([None] * n, list(factor_fixed_points))
    return space.point(coords)


# ------------------------------------------------------------ sensitivity

def _pair_words(sys, u, v, word_len_max, max_words):
    if sys.separate is not None:
        w = sys.separate(u, v)
        if w is not None:
            yield w
    yield from enumerate_words(sys, word_len_max, max_words)


def sensitivity_lower_bound(sys: SystemHandle, delta, eps_list, probes: int = 20,
                            budget=None, rng_seed: int = 0) -> WitnessReport:
    """Certify ``diam(g.D_eps(x)) >= delta`` at sampled x for each eps.

    For every (x, eps) a pair u, v inside D_eps(x) and a word g with
    ``d(g.u, g.v) >= delta`` must be found.  Systems with a ``separate`` hook
    propose their expansivity word first; otherwise words are enumerated.
    """
    b = _budgets(budget)
    tol = rat(b["tol"])
    delta = rat(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    eps_list = [rat(e) for e in eps_list]
    rng = random.Random(rng_seed)
    instances = []
    tried = 0
    failed = 0
    for _ in range(probes):
        x = sys.sample_point(rng)
        for eps in eps_list:
            found = None
            ball = _ball(sys, x, eps)
            pts = [x]
            for _ in range(b["samples"]):
                p = sys.sample_ball(x, eps, rng)
                if _inside(sys, p, ball, tol)[0]:
                    pts.append(p)
            pairs = [(pts[0], q) for q in pts[1:]] + list(zip(pts[1:], pts[2:]))
            for u, v in pairs:
                if u == v:
                    continue
                for w in _pair_words(sys, u, v, b["word_len_max"], b["max_words"]):
                    tried += 1
                    d = sys.dist(sys.act(w, u), sys.act(w, v), tol)
                    if d.certainly_ge(delta):
                        found = (u, v, w, d)
                        break
                if found:
                    break
            if found is None:
                failed += 1
                continue
            u, v, w, d = found
            instances.append({
                "x": sys.format_point(x),
                "eps": fmt_rat(eps),
                "u": sys.format_point(u),
                "v": sys.format_point(v),
                "word": str(w),
                "dist_u_x": sys.dist(u, x, tol).to_json(),
                "dist_v_x": sys.dist(v, x, tol).to_json(),
                "dist_images": d.to_json(),
            })
    cert = {"property": "sensitivity", "delta": fmt_rat(delta), "instances": instances,
            "failed": failed}
    status = CERTIFIED_BOUND if failed == 0 else EXHAUSTED
    return WitnessReport(status, witness=None, certificate=cert,
                         budget_used={"probes": probes, "word_pair_trials": tried},
                         seed=rng_seed)


def lift_sensitivity_constant(n: int, sigma) -> Fraction:
    """Product constant ``sigma / 2**(n+1)`` from a sensitive n-th factor."""
    return lift_constant(n, sigma)


def equicontinuity_candidates(sys: SystemHandle, n: int, word_len_max: int, probes: int,
                              rng_seed: int = 0, eps_list=None, samples: int = 6,
                              tol=DEFAULT_TOL) -> list:
    """Sampled points that look equicontinuous at scale 1/n.

    x is a candidate when for some tried eps every sampled pair in D_eps(x)
    stays closer than 1/n under every word up to ``word_len_max``.  This is
    evidence only: membership quantifies over all of G and all of D_eps(x).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    bound = Fraction(1, n)
    eps_list = [rat(e) for e in (eps_list or [Fraction(1, 2**j) for j in range(1, 9)])]
    rng = random.Random(rng_seed)
    words = list(enumerate_words(sys, word_len_max, DEFAULT_BUDGETS["max_words"]))
    out = []
    for _ in range(probes):
        x = sys.sample_point(rng)
        for eps in eps_list:
            ball = _ball(sys, x, eps)
            pts = [x] + [p for p in (sys.sample_ball(x, eps, rng) for _ in range(samples))
                         if _inside(sys, p, ball, tol)[0]]
            if _stays_small(sys, pts, words, bound, tol):
                out.append(x)
                break
    return out


def _stays_small(sys, pts, words, bound, tol) -> bool:
    for w in words:
        imgs = [sys.act(w, p) for p in pts]
        for i in range(len(imgs)):
            for j in range(i + 1, len(imgs)):
                if not sys.dist(imgs[i], imgs[j], tol).certainly_lt(bound):
                    return False
    return True


# ------------------------------------------------------------ dense orbits

def dense_orbit_check(sys: SystemHandle, eps, probes: int, budget=None,
                      rng_seed: int = 0) -> WitnessReport:
    """Orbit of the system's seed enters D_eps(c) for each sampled c.

    Without a seed, falls back to transitivity between random probe balls
    (equivalent for the compact, perfect spaces used here)."""
    b = _budgets(budget)
    tol = rat(b["tol"])
    eps = rat(eps)
    rng = random.Random(rng_seed)
    if sys.dense_seed is None:
        rows = []
        ok_all = True
        non_closed = None
        for j in range(probes):
            U = _ball(sys, sys.sample_point(rng), eps)
            V = _ball(sys, sys.sample_point(rng), eps)
            rep = transitivity_witness(sys, U, V, b, seed=derive_seed(rng_seed, "tr", j))
            rows.append(rep.certificate if rep.ok else {"status": rep.status})
            ok_all &= rep.ok
            if not ok_all:
                break  # the clause has failed; later probes cannot rescue it
            # transitivity at scale eps says nothing about closed orbits:
            # some probe orbit must also fail to close
            if sys.exact_points and not non_closed:
                fin = is_finite_orbit(sys, U.center, b["seed_orbit_budget"])
                non_closed = fin.status == EXHAUSTED
        cert = {"property": "dense_orbit", "method": "transitivity", "eps": fmt_rat(eps),
                "orbit_not_finite_within_budget": non_closed, "probes": rows}
        status = FOUND if ok_all and non_closed is not False else EXHAUSTED
        return WitnessReport(status, certificate=cert, budget_used={"probes": len(rows)},
                             seed=rng_seed)

    seed_pt = sys.dense_seed
    rows = []
    hits = 0
    tried = 0
    for _ in range(probes):
        c = sys.sample_point(rng)
        ball = _ball(sys, c, eps)
        word = None
        if sys.dense_hit is not None:
            w = sys.dense_hit(seed_pt, c, eps)
            tried += 1
            if w is not None and _inside(sys, sys.act(w, seed_pt), ball, tol)[0]:
                word = w
        if word is None:
            for w in enumerate_words(sys, b["word_len_max"], b["max_words"]):
                tried += 1
                if _inside(sys, sys.act(w, seed_pt), ball, tol)[0]:
                    word = w
                    break
        if word is not None:
            hits += 1
            rows.append({"center": sys.format_point(c), "word": str(word),
                         "dist": sys.dist(sys.act(word, seed_pt), c, tol).to_json()})
        else:
            rows.append({"center": sys.format_point(c), "word": None})
    non_closed = None
    if sys.exact_points:
        fin = is_finite_orbit(sys, seed_pt, b["seed_orbit_budget"])
        non_closed = fin.status == EXHAUSTED
    cert = {"property": "dense_orbit", "method": "seed", "seed_point": sys.format_point(seed_pt),
            "eps": fmt_rat(eps), "orbit_not_finite_within_budget": non_closed, "probes": rows}
    status = FOUND if hits == probes and non_closed is not False else EXHAUSTED
    return WitnessReport(status, certificate=cert, budget_used={"word_trials": tried},
                         seed=rng_seed)


# ----------------------------------------------------------------- chaos

@dataclass
class ChaosReport:
    system: str
    eps: Fraction
    clauses: dict
    passed: bool
    seed: int
    factor_reports: list = field(default_factory=list)
    consistent_with_factors: bool | None = None

    def to_json(self) -> dict:
        out = {
            "system": self.system,
            "property": "chaos",
            "status": "PASS" if self.passed else "FAIL",
            "eps": fmt_rat(self.eps),
            "seed": self.seed,
            "clauses": {k: v.to_json() for k, v in self.clauses.items()},
        }
        if self.factor_reports:
            out["factors"] = [r.to_json() for r in self.factor_reports]
            out["consistent_with_factors"] = self.consistent_with_factors
        return out


def chaos_check(sys: SystemHandle, eps, budgets=None, rng_seed: int = 0) -> ChaosReport:
    """Dense non-closed orbit, dense closed orbits, and sensitivity at the
    system's declared constant.  Clauses without a declared constant are
    reported as SKIPPED and do not affect the verdict."""
    b = _budgets(budgets)
    eps = rat(eps)
    clauses = {
        "dense_orbit": dense_orbit_check(sys, eps, b["probes"], b,
                                         derive_seed(rng_seed, "dense")),
    }
    if sys.periodic_oracle is None:
        clauses["closed_orbits"] = WitnessReport(EXHAUSTED, certificate={"reason": "no oracle"})
    else:
        clauses["closed_orbits"] = closed_orbit_density(
            sys, None, eps, b["probes"], derive_seed(rng_seed, "closed"), b["orbit_budget"],
            rat(b["tol"]))
    delta = b.get("delta") or sys.sensitivity_constant
    if delta is None:
        clauses["sensitivity"] = WitnessReport("SKIPPED", certificate={"reason": "no constant"})
    else:
        clauses["sensitivity"] = sensitivity_lower_bound(
            sys, delta, b["sens_eps"], b["sens_probes"], b, derive_seed(rng_seed, "sens"))
    passed = all(r.ok or r.status == "SKIPPED" for r in clauses.values())
    report = ChaosReport(sys.name, eps, clauses, passed, rng_seed)
    if sys.factors and b["factors"]:
        fb = dict(b, factors=False)
        fb.pop("delta", None)
        report.factor_reports = [chaos_check(f, eps, fb, derive_seed(rng_seed, "factor", i))
                                 for i, f in enumerate(sys.factors, start=1)]
        report.consistent_with_factors = passed == all(r.passed for r in report.factor_reports)
    return report


# --------------------------------------------------------------- recheck

def _d(sys, a, b):
    return sys.dist(a, b, DEFAULT_TOL)


def recheck(sys: SystemHandle, cert: dict) -> bool:
    """Re-evaluate a certificate's inequalities from its recorded data."""
    prop = cert.get("property")
    P = sys.parse_point
    if prop == "transitivity":
        u = P(cert["u"])
        w = parse_word(cert["word"])
        U, V = cert["U"], cert["V"]
        return (_d(sys, u, P(U["center"])).certainly_lt(rat(U["radius"]))
                and _d(sys, sys.act(w, u), P(V["center"])).certainly_lt(rat(V["radius"])))
    if prop == "sensitivity":
        delta = rat(cert["delta"])
        for inst in cert["instances"]:
            x, u, v = P(inst["x"]), P(inst["u"]), P(inst["v"])
            eps = rat(inst["eps"])
            w = parse_word(inst["word"])
            if not (_d(sys, u, x).certainly_lt(eps) and _d(sys, v, x).certainly_lt(eps)
                    and _d(sys, sys.act(w, u), sys.act(w, v)).certainly_ge(delta)):
                return False
        return cert["failed"] == 0
    if prop == "closed_orbit_density":
        eps = rat(cert["eps"])
        for row in cert["probes"]:
            x, y = P(row["x"]), P(row["y"])
            if not _d(sys, x, y).certainly_lt(eps):
                return False
            size = row["orbit_size"]
            if size is None or not _orbit_returns(sys, y, size):
                return False
        return True
    if prop == "dense_orbit":
        eps = rat(cert["eps"])
        if cert["method"] == "transitivity":
            return all(row.get("property") == "transitivity" and recheck(sys, row)
                       for row in cert["probes"])
        seed_pt = P(cert["seed_point"])
        for row in cert["probes"]:
            if row["word"] is None:
                return False
            img = sys.act(parse_word(row["word"]), seed_pt)
            if not _d(sys, img, P(row["center"])).certainly_lt(eps):
                return False
        return True
    raise ValueError(f"unknown certificate property {prop!r}")


def _orbit_returns(sys, y, size) -> bool:
    # each generator must return y to itself after `size` steps at most
    for g in sys.gens:
        p = y
        w = sys.gen(g)
        for _ in range(size):
            p = sys.act(w, p)
            if p == y:
                break
        if p != y:
            return False
    return True


def recheck_report(sys: SystemHandle, entry: dict) -> bool:
    """Recheck a serialized WitnessReport or chaos report entry."""
    if entry.get("property") == "chaos":
        ok = True
        for name, clause in entry["clauses"].items():
            if clause["status"] in (FOUND, CERTIFIED_BOUND):
                ok &= recheck(sys, clause["certificate"])
        for f_entry, f_sys in zip(entry.get("factors", []), sys.factors):
            ok &= recheck_report(f_sys, f_entry)
        return ok
    if entry.get("status") in (FOUND, CERTIFIED_BOUND) and entry.get("certificate"):
        return recheck(sys, entry["certificate"])
    return True

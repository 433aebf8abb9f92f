"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python3 tests/test_acceptance.py``.
"""
import json
import math
import random
import sys
import time
from fractions import Fraction as F
from itertools import product as cartesian
from pathlib import Path

import pytest

from chaoslab import chaos_lab as cl
from chaoslab import cli
from chaoslab import symbolic_shift as ss
from chaoslab import torus_dynamics as td
from chaoslab.group_action import is_finite_orbit, product_system
from chaoslab.report import CERTIFIED_BOUND, EXHAUSTED, FOUND
from chaoslab.systems import anosov_system, identity_system, rotation_system, shift_system

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def verdict(capsys):
    lines = []

    def emit(n, ok, detail):
        lines.append(f"acceptance criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        with capsys.disabled():
            print("\n" + lines[-1])
        return ok
    return emit


def brute_rho(s, t, R=60):
    return sum((F(1, 2 ** (abs(i) + 1)) for i in range(-R, R + 1)
                if s.symbol_at(i) != t.symbol_at(i)), F(0))


def test_criterion_1_shift_periodic_points(verdict):
    rng = random.Random(101)
    t0 = time.perf_counter()
    failures = total = 0
    for N in (2, 3, 5):
        for eps in (F(1, 4), F(1, 16), F(1, 64)):
            m = ss.radius_for(eps)
            for _ in range(200):
                s = ss.random_biseq(N, rng)
                tau = ss.periodic_point_near(s, eps)
                total += 1
                d = ss.rho(s, tau)
                if not (ss.shift(tau, 2 * m + 1) == tau and d.is_exact and d.value < eps):
                    failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 10
    verdict(1, ok, f"{total - failures}/{total} probes, {elapsed:.2f}s")
    assert ok


def test_criterion_2_shift_sensitivity(verdict):
    rng = random.Random(202)
    t0 = time.perf_counter()
    pairs = []
    while len(pairs) < 500:
        N = rng.choice((2, 3, 5))
        s, t = ss.random_biseq(N, rng), ss.random_biseq(N, rng)
        if s != t:
            pairs.append((s, t))
    good = 0
    for s, t in pairs:
        k = ss.separating_shift(s, t)
        good += ss.rho(ss.shift(s, k), ss.shift(t, k)).value >= F(1, 2)
    elapsed = time.perf_counter() - t0
    ok = good == 500 and elapsed < 5
    verdict(2, ok, f"{good}/500 pairs separated to >= 1/2, {elapsed:.2f}s")
    assert ok


def test_criterion_3_metric_exactness(verdict):
    rng = random.Random(303)
    bound = F(1, 2**60)
    agree = 0
    for _ in range(1000):
        N = rng.choice((2, 3, 5))
        s, t = ss.random_biseq(N, rng), ss.random_biseq(N, rng)
        agree += abs(ss.rho(s, t).value - brute_rho(s, t)) <= bound
    tri = 0
    tol = F(1, 2**40)
    for j in range(1000):
        N = rng.choice((2, 3))
        pts = [ss.random_biseq(N, rng) for _ in range(3)]
        if j % 4 == 0:  # mix in the non-eventually-periodic seed (interval distances)
            pts[1] = ss.shift(ss.dense_orbit_seed(N), rng.randint(-20, 20))
        a, b, c = pts
        ab, bc, ac = ss.rho(a, b, tol), ss.rho(b, c, tol), ss.rho(a, c, tol)
        tri += ac.lo <= ab.hi + bc.hi
    ok = agree == 1000 and tri == 1000
    verdict(3, ok, f"partial-sum agreement {agree}/1000, triangle {tri}/1000")
    assert ok


def direct_period(A, p, cap=100_000):
    a, b, c, d = A.a, A.b, A.c, A.d
    x, y = p.x, p.y
    for n in range(1, cap):
        x, y = a * x + b * y, c * x + d * y
        x, y = x - math.floor(x), y - math.floor(y)
        if (x - p.x) % 1 == 0 and (y - p.y) % 1 == 0:
            return n
    return None


def test_criterion_4_anosov_family(verdict):
    t0 = time.perf_counter()
    family_ok = all(td.anosov_km(k, m).det == 1 and td.anosov_km(k, m).trace > 2
                    for k in range(3, 13) for m in range(3, 13))
    rng = random.Random(404)
    good = 0
    for _ in range(100):
        A = td.anosov_km(rng.randint(3, 12), rng.randint(3, 12))
        q = rng.randint(1, 50)
        p = td.TorusPoint(F(rng.randrange(q), q), F(rng.randrange(q), q))
        rep = is_finite_orbit(anosov_system(A), p, 100_000)
        good += rep.status == FOUND and rep.certificate["orbit_size"] == direct_period(A, p)
    elapsed = time.perf_counter() - t0
    ok = family_ok and good == 100 and elapsed < 10
    verdict(4, ok, f"det/trace on [3,12]^2: {family_ok}, orbit lengths {good}/100, "
                   f"{elapsed:.2f}s")
    assert ok


def _rand_rat(rng, lo, hi, den=997):
    return F(rng.randint(math.ceil(lo * den), math.floor(hi * den)), den)


def test_criterion_5_linked_twist_identities(verdict):
    rng = random.Random(505)
    H = F(1, 2)
    counts = dict(boundary=0, odd=0, pillow=0, linear=0)
    fails = dict(counts)
    for _ in range(1000):
        k, m = rng.choice((3, 4, 5)), rng.choice((3, 4, 5))
        # boundary of R: a horizontal edge outside Q or a vertical edge outside P
        sgn = rng.choice((1, -1))
        if rng.random() < 0.5:
            b = td.TorusPoint(_rand_rat(rng, F(1, m), H), sgn * F(1, k))
            b = td.TorusPoint(rng.choice((1, -1)) * b.x, b.y)
        else:
            b = td.TorusPoint(sgn * F(1, m), rng.choice((1, -1)) * _rand_rat(rng, F(1, k), H))
        counts["boundary"] += 1
        fails["boundary"] += td.linked_twist(b, k, m) != b

        p = td.TorusPoint(_rand_rat(rng, -H, H), _rand_rat(rng, -H, H))
        counts["odd"] += 1
        fails["odd"] += td.linked_twist(-p, k, m) != -td.linked_twist(p, k, m)

        r = p if td.in_R(p, k, m) else td.TorusPoint(p.x, _rand_rat(rng, -F(1, k), F(1, k)))
        counts["pillow"] += 1
        fails["pillow"] += (td.pillow_project(td.linked_twist(r, k, m))
                            != td.disk_map(td.pillow_project(r), k, m))

        rad = td.linearization_radius(k, m)
        z = td.TorusPoint(_rand_rat(rng, -rad, rad, 10007), _rand_rat(rng, -rad, rad, 10007))
        counts["linear"] += 1
        fails["linear"] += td.linked_twist(z, k, m) != td.anosov_apply(td.anosov_km(k, m), z)
    ok = sum(fails.values()) == 0 and min(counts.values()) >= 1000
    verdict(5, ok, ", ".join(f"{k} {counts[k] - fails[k]}/{counts[k]}" for k in counts))
    assert ok


def test_criterion_6_products(verdict):
    t0 = time.perf_counter()
    rng = random.Random(606)
    factor_sets = [[2, 3], [2, 2], [3, 5], [2, 3, 5], [2, 2, 3]]
    trans_ok = orbit_ok = chaos_ok = 0
    for Ns in factor_sets:
        facs = [shift_system(N) for N in Ns]
        P = product_system(facs)
        # (a) factor witnesses assembled into a product witness
        us, ws, Ucs, Vcs, rs = [], [], {}, {}, []
        for i, (N, f) in enumerate(zip(Ns, facs), start=1):
            r = F(1, 2 ** rng.randint(2, 5))
            U = cl.Ball(f.name, ss.random_biseq(N, rng), r)
            V = cl.Ball(f.name, ss.random_biseq(N, rng), r)
            rep = cl.transitivity_witness(f, U, V, {"word_len_max": 6}, rng.randrange(2**32))
            assert rep.status == FOUND
            us.append(f.parse_point(rep.certificate["u"]))
            ws.append(rep.witness)
            Ucs[i], Vcs[i] = U.center, V.center
            rs.append(r)
        g = cl.product_transitivity_witness(ws, P)
        R = sum((r / 2**i for i, r in enumerate(rs, start=1)), F(0))
        U = cl.Ball(P.name, P.space.point(Ucs), R)
        V = cl.Ball(P.name, P.space.point(Vcs), R)
        u = P.space.point(dict(enumerate(us, start=1)))
        cert = {"property": "transitivity", "U": U.to_json(P), "V": V.to_json(P),
                "u": P.format_point(u), "word": str(g)}
        trans_ok += cl.recheck(P, cert)

        # (b) product periodic points: orbit size is the product of the periods
        periodic = [ss.BiSeq.periodic(N, [rng.randint(1, N) for _ in range(rng.randint(1, 4))])
                    for N in Ns]
        fixed = [ss.BiSeq.constant(N, 1) for N in Ns]
        x = cl.product_periodic_point(periodic, fixed, range(1, len(Ns) + 1), P)
        expected = math.prod(p.period() for p in periodic)
        brute = {tuple(ss.shift(p, k) for p, k in zip(periodic, ks))
                 for ks in cartesian(*(range(p.period()) for p in periodic))}
        rep = is_finite_orbit(P, x, 100_000)
        orbit_ok += rep.certificate["orbit_size"] == expected == len(brute)

    # (c) chaos on the product iff on every factor, at equal budgets
    budgets = {"probes": 6, "sens_probes": 6}
    cases = [[shift_system(2), shift_system(3)],
             [shift_system(2), shift_system(3), shift_system(5)],
             [shift_system(2), identity_system(shift_system(3))]]
    for j, facs in enumerate(cases):
        rep = cl.chaos_check(product_system(facs), F(1, 8), budgets, rng_seed=j)
        chaos_ok += rep.passed == all(r.passed for r in rep.factor_reports)
        chaos_ok -= rep.consistent_with_factors is not True
    elapsed = time.perf_counter() - t0
    ok = (trans_ok == orbit_ok == len(factor_sets) and chaos_ok == len(cases)
          and elapsed < 60)
    verdict(6, ok, f"assembled witnesses {trans_ok}/{len(factor_sets)}, orbit sizes "
                   f"{orbit_ok}/{len(factor_sets)}, chaos iff factors {chaos_ok}/{len(cases)}, "
                   f"{elapsed:.2f}s")
    assert ok


def test_criterion_7_sensitivity_lifting(verdict):
    delta = cl.lift_sensitivity_constant(1, F(1, 2))
    budgets = {"word_len_max": 6, "samples": 2}
    P = product_system([shift_system(2), shift_system(3)])
    rep = cl.sensitivity_lower_bound(P, delta, [F(1, 16)], 100, budgets, rng_seed=7)
    lifted = rep.status == CERTIFIED_BOUND and len(rep.certificate["instances"]) == 100 \
        and cl.recheck(P, rep.certificate)
    iso = product_system([rotation_system(F(1, 5)), rotation_system(F(2, 7))])
    rep_iso = cl.sensitivity_lower_bound(iso, delta, [F(1, 16)], 100, budgets, rng_seed=7)
    ok = delta == F(1, 8) and lifted and rep_iso.status == EXHAUSTED
    verdict(7, ok, f"delta={delta}, shift product {rep.status}, "
                   f"isometry product {rep_iso.status}")
    assert ok


def test_criterion_8_determinism(verdict, tmp_path):
    cfg = ROOT / "configs" / "acceptance.json"
    outs = []
    for run, jobs in enumerate(("1", "8", "1", "8")):
        out = tmp_path / f"run{run}"
        assert cli.main(["run", str(cfg), "--out", str(out), "--jobs", jobs]) == 0
        outs.append((out / "report.json").read_bytes())
    same = len(set(outs)) == 1
    report = json.loads(outs[0])
    rechecked = all(ok for _, ok in cli.recheck_entries(report))
    ok = same and rechecked and report["all_targets_met"]
    verdict(8, ok, f"{len(outs)} runs with --jobs 1/8 byte-identical: {same}, "
                   f"rechecked: {rechecked}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

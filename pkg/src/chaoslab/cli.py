"""Command-line runner: ``chaoslab run|orbit|witness|sensitivity|report``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import chaos_lab as cl
from .config import build_system, load_config, parse_system_arg
from .errors import ChaosLabError, ConfigParse, ConstructorPrecondition
from .exact import fmt_rat, rat
from .group_action import is_finite_orbit
from .report import CERTIFIED_BOUND, EXHAUSTED, FOUND

# status each check must reach unless the config says otherwise
DEFAULT_TARGETS = {
    "chaos": "PASS",
    "transitivity": FOUND,
    "closed_orbit_density": FOUND,
    "sensitivity": CERTIFIED_BOUND,
    "finite_orbit": FOUND,
    "equicontinuity": None,  # informational
    "orbit": None,
}


def _jsonable(v):
    if isinstance(v, Fraction):
        return fmt_rat(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


# ------------------------------------------------------------- points

def _coords(sys, p):
    """Exact (x, y) rationals for planar points, else None."""
    if sys.kind in ("TorusPoint", "PillowPoint"):
        return p.x, p.y
    if sys.kind == "CirclePoint":
        return p, None
    if sys.kind == "AffinePoint" and len(p) <= 2:
        return p[0], (p[1] if len(p) == 2 else None)
    return None


def orbit_rows(sys, x, steps: int):
    """Rows ``(step, point)`` for the forward orbit under the first generator."""
    g = sys.gen(sorted(sys.gens)[0])
    rows = [(0, x)]
    for n in range(1, steps + 1):
        x = sys.act(g, x)
        rows.append((n, x))
    return rows


def orbit_csv(sys, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if _coords(sys, rows[0][1]) is not None:
        w.writerow(["step", "x_num", "x_den", "y_num", "y_den"])
        for n, p in rows:
            x, y = _coords(sys, p)
            y = Fraction(0) if y is None else y
            w.writerow([n, x.numerator, x.denominator, y.numerator, y.denominator])
    else:
        w.writerow(["step", "point"])
        for n, p in rows:
            w.writerow([n, sys.format_point(p)])
    return buf.getvalue()


def _float_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, Fraction) else v for v in r])
    return buf.getvalue()


def _dist_upper(d: dict) -> Fraction:
    return rat(d["value"]) if d["kind"] == "exact" else rat(d["hi"])


# -------------------------------------------------------------- checks

def _ball_arg(sys, spec, rng_seed, label):
    import random
    if spec is None:
        spec = {}
    center = spec.get("center")
    radius = rat(spec.get("radius", "1/8"))
    if center is None:
        c = sys.sample_point(random.Random(cl.derive_seed(rng_seed, label)))
    else:
        c = sys.parse_point(center)
    return cl.Ball(sys.name, c, radius)


def run_check(sys, chk: dict, budgets: dict, seed: int) -> tuple[dict, dict]:
    """Execute one check; returns (report entry, extra files name -> text)."""
    kind = chk["check"]
    files = {}
    entry = {"system": sys.name, "property": kind, "witness": None, "certificate": None}
    if kind == "chaos":
        rep = cl.chaos_check(sys, rat(chk.get("eps", "1/8")), budgets, seed).to_json()
        entry.update(rep)
        used = {}
        for c in rep["clauses"].values():
            for k, v in c.get("budget_used", {}).items():
                used[k] = used.get(k, 0) + v
        timings = used
    elif kind == "transitivity":
        U = _ball_arg(sys, chk.get("U"), seed, "U")
        V = _ball_arg(sys, chk.get("V"), seed, "V")
        rep = cl.transitivity_witness(sys, U, V, budgets, seed)
        entry.update(rep.to_json())
        timings = rep.budget_used
    elif kind == "closed_orbit_density":
        rep = cl.closed_orbit_density(sys, None, rat(chk.get("eps", "1/8")),
                                      chk.get("probes", budgets["probes"]), seed,
                                      budgets["orbit_budget"], rat(budgets["tol"]))
        entry.update(rep.to_json())
        timings = rep.budget_used
        if rep.certificate:
            files["closed_orbits.csv"] = _float_csv(
                ["probe", "dist_upper", "orbit_size"],
                [(i, _dist_upper(r["dist"]), r["orbit_size"])
                 for i, r in enumerate(rep.certificate["probes"])])
    elif kind == "sensitivity":
        delta = chk.get("delta")
        delta = rat(delta) if delta is not None else sys.sensitivity_constant
        if delta is None:
            raise ConfigParse("<config>", "delta", f"{sys.name} declares no constant")
        eps = chk.get("eps", budgets["sens_eps"])
        eps = eps if isinstance(eps, list) else [eps]
        rep = cl.sensitivity_lower_bound(sys, delta, eps,
                                         chk.get("probes", budgets["sens_probes"]), budgets,
                                         seed)
        entry.update(rep.to_json())
        timings = rep.budget_used
        files["sensitivity.csv"] = _float_csv(
            ["instance", "eps", "dist_images_upper"],
            [(i, rat(r["eps"]), _dist_upper(r["dist_images"]))
             for i, r in enumerate(rep.certificate["instances"])])
    elif kind == "equicontinuity":
        cands = cl.equicontinuity_candidates(sys, chk.get("n", 8),
                                             chk.get("word_len_max", budgets["word_len_max"]),
                                             chk.get("probes", budgets["probes"]), seed,
                                             chk.get("eps"), budgets["samples"],
                                             rat(budgets["tol"]))
        entry.update(status=FOUND if cands else EXHAUSTED,
                     certificate={"property": "equicontinuity_candidates",
                                  "candidates": [sys.format_point(c) for c in cands]},
                     seed=seed)
        timings = {"probes": chk.get("probes", budgets["probes"])}
    elif kind in ("finite_orbit", "orbit"):
        x = sys.parse_point(chk["point"]) if "point" in chk else sys.base_point
        if kind == "finite_orbit":
            rep = is_finite_orbit(sys, x, chk.get("budget", budgets["orbit_budget"]))
            entry.update(rep.to_json())
            timings = rep.budget_used
            steps = rep.certificate["orbit_size"] if rep.ok else chk.get("steps", 16)
        else:
            steps = chk.get("steps", 16)
            entry.update(status=FOUND, certificate={"property": "orbit", "steps": steps},
                         seed=seed)
            timings = {"steps": steps}
        rows = orbit_rows(sys, x, steps)
        files["orbit.csv"] = orbit_csv(sys, rows)
        if _coords(sys, x) is not None:
            files["orbit_plot.csv"] = _float_csv(
                ["step", "x", "y"],
                [(n, *(c if c is not None else Fraction(0) for c in _coords(sys, p)))
                 for n, p in rows])
    else:  # validated earlier
        raise ConfigParse("<config>", "check", f"unknown check {kind!r}")
    entry["budgets"] = {k: v for k, v in budgets.items()}
    entry["seed"] = seed
    entry["timings"] = dict(timings)
    return entry, files


def _registry(cfg, path):
    """Build systems in order; constructor failures are kept per name."""
    registry, errors = {}, {}
    for i, spec in enumerate(cfg.get("systems", [])):
        try:
            registry[spec["name"]] = build_system(spec, registry, path, f"systems[{i}]")
        except ConstructorPrecondition as e:
            errors[spec["name"]] = str(e)
        except ConfigParse as e:
            # child refers to a failed sibling
            if any(repr(n) in str(e) for n in errors):
                errors[spec["name"]] = str(e)
            else:
                raise
    return registry, errors


def _check_job(args):
    cfg, path, idx, tol = args
    registry, errors = _registry(cfg, path)
    chk = cfg["checks"][idx]
    name = chk["system"]
    seed = cl.derive_seed(cfg.get("seed", 0), idx)
    target = chk.get("target", DEFAULT_TARGETS[chk["check"]])
    budgets = cl._budgets(cfg.get("budgets"))
    budgets.update(chk.get("budgets", {}))
    if tol is not None:
        budgets["tol"] = tol
    budgets["tol"] = rat(budgets["tol"])
    if name in errors:
        entry = {"system": name, "property": chk["check"], "status": "ERROR",
                 "error": errors[name], "seed": seed}
        files = {}
    else:
        sys = registry[name]
        try:
            entry, files = run_check(sys, chk, budgets, seed)
        except ChaosLabError as e:
            entry = {"system": name, "property": chk["check"], "status": "ERROR",
                     "error": f"{type(e).__name__}: {e}", "seed": seed}
            files = {}
        entry["system_spec"] = sys.spec
    entry["check"] = idx
    entry["target"] = target
    entry["target_met"] = entry["status"] != "ERROR" and (target is None
                                                          or entry["status"] == target)
    return _jsonable(entry), files


def run(config_path: str, jobs: int = 1, tol=None, out_dir=None, seed=None) -> int:
    cfg = load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
    _, sys_errors = _registry(cfg, config_path)
    out = out_dir or cfg.get("output") or "chaoslab_out"
    if not os.path.isabs(out) and out_dir is None:
        out = os.path.join(os.path.dirname(os.path.abspath(config_path)), out)
    tasks = [(cfg, config_path, i, tol) for i in range(len(cfg.get("checks", [])))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_check_job, tasks))  # map keeps config order
    else:
        results = [_check_job(t) for t in tasks]
    entries = [e for e, _ in results]
    report = {
        "seed": cfg.get("seed", 0),
        "tol": fmt_rat(rat(tol)) if tol is not None else None,
        "system_errors": dict(sorted(sys_errors.items())),
        "all_targets_met": all(e["target_met"] for e in entries) and not sys_errors,
        "entries": entries,
    }
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(dumps(report))
    for sub in ("orbits", "plotdata"):
        os.makedirs(os.path.join(out, sub), exist_ok=True)
    for (entry, files) in results:
        stem = f"check{entry['check']:03d}_{entry['property']}"
        for fname, text in files.items():
            sub = "orbits" if fname == "orbit.csv" else "plotdata"
            with open(os.path.join(out, sub, f"{stem}_{fname}"), "w") as fh:
                fh.write(text)
    for name, msg in sorted(sys_errors.items()):
        print(f"system {name}: {msg}", file=_sys.stderr)
    return 0 if report["all_targets_met"] else 1


# -------------------------------------------------------------- report

def summarize(report: dict) -> str:
    lines = [f"seed {report.get('seed')}  all targets met: {report.get('all_targets_met')}"]
    for name, msg in report.get("system_errors", {}).items():
        lines.append(f"  system {name}: ERROR {msg}")
    for e in report.get("entries", []):
        mark = "ok " if e.get("target_met") else "BAD"
        lines.append(f"  [{mark}] #{e.get('check')} {e['system']:<24} {e['property']:<22} "
                     f"{e['status']}" + (f" (target {e['target']})" if e.get("target") else ""))
    return "\n".join(lines)


def recheck_entries(report: dict) -> list:
    """(check index, ok) for every entry, re-evaluating certificates only."""
    out = []
    for e in report.get("entries", []):
        if e.get("status") == "ERROR" or e.get("system_spec") is None:
            out.append((e.get("check"), e.get("status") == "ERROR"))
            continue
        sys = build_system(e["system_spec"], path="<report>")
        if e["property"] in ("chaos", "transitivity", "sensitivity", "closed_orbit_density"):
            out.append((e["check"], cl.recheck_report(sys, e)))
        else:
            out.append((e["check"], True))
    return out


# ---------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaoslab", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--tol", default=None, help="distance enclosure width, e.g. 1/2^64 as p/q")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", parents=[common], help="run a config file")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (overrides config)")

    o = sub.add_parser("orbit", parents=[common], help="dump an orbit as CSV")
    o.add_argument("--system", required=True)
    o.add_argument("--point", default=None)
    o.add_argument("--steps", type=int, default=16)
    o.add_argument("--out", default=None, help="CSV path (default stdout)")

    w = sub.add_parser("witness", parents=[common], help="one-shot transitivity search")
    w.add_argument("--system", required=True)
    w.add_argument("--ballU", required=True, help="'<point> ; <radius>'")
    w.add_argument("--ballV", required=True)
    w.add_argument("--budget", type=int, default=None, help="maximum word length")

    s = sub.add_parser("sensitivity", parents=[common], help="sensitivity lower bound")
    s.add_argument("--system", required=True)
    s.add_argument("--delta", default=None)
    s.add_argument("--eps", default="1/16,1/64", help="comma separated radii")
    s.add_argument("--probes", type=int, default=20)

    rp = sub.add_parser("report", parents=[common], help="summarize a report.json")
    rp.add_argument("--in", dest="inp", required=True)
    rp.add_argument("--recheck", action="store_true")
    return p


def _parse_ball(sys, text):
    pt, sep, r = text.rpartition(";")
    if not sep:
        raise ConfigParse("--ball", "radius", "expected '<point> ; <radius>'")
    return cl.Ball(sys.name, sys.parse_point(pt.strip()), rat(r.strip()))


def _budgets_from(args, **extra):
    b = cl._budgets(extra)
    if args.tol is not None:
        b["tol"] = rat(args.tol)
    return b


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "run":
            return run(args.config, args.jobs, args.tol, args.out, args.seed)
        if args.cmd == "report":
            with open(args.inp) as fh:
                report = json.load(fh)
            print(summarize(report))
            if args.recheck:
                results = recheck_entries(report)
                for idx, ok in results:
                    print(f"  recheck #{idx}: {'ok' if ok else 'FAILED'}")
                return 0 if all(ok for _, ok in results) else 1
            return 0 if report.get("all_targets_met") else 1
        sys = parse_system_arg(args.system)
        seed = args.seed or 0
        if args.cmd == "orbit":
            x = sys.parse_point(args.point) if args.point else sys.base_point
            text = orbit_csv(sys, orbit_rows(sys, x, args.steps))
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                _sys.stdout.write(text)
            return 0
        if args.cmd == "witness":
            extra = {} if args.budget is None else {"word_len_max": args.budget}
            rep = cl.transitivity_witness(sys, _parse_ball(sys, args.ballU),
                                          _parse_ball(sys, args.ballV),
                                          _budgets_from(args, **extra), seed)
            _sys.stdout.write(dumps(dict(rep.to_json(), system=sys.name,
                                         property="transitivity")))
            return 0 if rep.ok else 1
        if args.cmd == "sensitivity":
            delta = rat(args.delta) if args.delta else sys.sensitivity_constant
            if delta is None:
                raise ConfigParse("--delta", "delta", f"{sys.name} declares no constant")
            rep = cl.sensitivity_lower_bound(sys, delta, args.eps.split(","), args.probes,
                                             _budgets_from(args), seed)
            _sys.stdout.write(dumps(dict(rep.to_json(), system=sys.name,
                                         property="sensitivity")))
            return 0 if rep.ok else 1
    except ConfigParse as e:
        print(f"config error: {e}", file=_sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=_sys.stderr)
        return 2
    except (ChaosLabError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=_sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())

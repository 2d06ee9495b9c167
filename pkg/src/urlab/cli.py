"""Command-line front end.

Exit codes: 0 success, 1 numerical violation or missed saturation, 2 bad config.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from urlab import search
from urlab.batteries import BatteryResult, complex_to_list, lemma_fuzz, parallel_map, random_battery
from urlab.hilbert import BasisError, Operator, QuantumState, StateError
from urlab.moments import MomentError
from urlab.relations import CATALOG, evaluate
from urlab.scenario import (ConfigError, Scenario, apply_overrides, build_scenario, load_config,
                            set_dotted, to_complex)
from urlab.transforms import TransformError, invariance_report, random_maps

log = logging.getLogger("urlab")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

SWEEP_COLUMNS = ["index", "parameter", "value", "relation", "verdict", "states", "observables",
                 "lhs", "rhs", "margin", "saturated", "holds", "expect", "ok"]

# arities that take exactly one state; a request listing several states runs once per state
_SINGLE_STATE = {"state", "pair", "set", "even_set", "sigma"}
_EVAL_ERRORS = (StateError, BasisError, MomentError, TransformError, KeyError, ValueError)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2))


def write_csv(path: Path, rows: Sequence[dict], columns: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})


def _serialize_state(s: QuantumState) -> dict:
    d = {"label": s.label, "basis": s.basis.describe()}
    if s.is_pure:
        d["amplitudes"] = complex_to_list(s.vector)
    else:
        d["density"] = complex_to_list(s.rho)
    return d


def _serialize_op(X: Operator) -> dict:
    return {"label": X.label, "matrix": complex_to_list(X.matrix)}


# ---------------------------------------------------------------------------
# relation requests


def run_relations(sc: Scenario) -> list[dict]:
    """Evaluate every relation request; one entry per verdict, in request order."""
    out = []
    t = sc.tolerances
    for i, req in enumerate(sc.relations):
        name = req["name"]
        obs = [sc.observables[o] for o in req.get("observables", [])]
        states = [sc.states[s] for s in req["states"]]
        groups = [[s] for s in states] if CATALOG[name].arity in _SINGLE_STATE else [states]
        params = dict(req.get("params", {}))
        for group in groups:
            verdicts = evaluate(name, obs, group, tol=t.saturation, floor=t.floor,
                                tail_tol=t.tail, **params)
            for v in verdicts:
                out.append({"request": i, "relation": name, "expect": req.get("expect", "holds"),
                            "states": [s.label for s in group],
                            "observables": req.get("observables", []), "verdict": v,
                            "objects": (group, obs)})
    return out


def _row_ok(entry: dict) -> bool:
    v = entry["verdict"]
    return v.holds and (entry["expect"] != "saturated" or v.saturated)


def _battery(sc: Scenario, table: dict, jobs: int) -> BatteryResult:
    kind = table.get("kind")
    t = sc.tolerances
    seed = int(table.get("seed", sc.seed))
    if kind == "random":
        return random_battery(int(table.get("n_pure", 1000)), int(table.get("n_mixed", 200)),
                              tuple(table.get("dims", (2, 16))), tuple(table.get("ns", (2, 3, 4))),
                              seed, t.saturation, t.floor, jobs)
    if kind == "lemma":
        return lemma_fuzz(int(table.get("samples", 1000)), table.get("n"), table.get("m"),
                          int(table.get("n_max", 6)), int(table.get("m_max", 3)), seed,
                          t.saturation, t.floor, jobs)
    raise ConfigError(f"unknown battery kind {kind!r}")


def _invariance(sc: Scenario, table: dict, index: int):
    try:
        obs = [sc.observables[o] for o in table["observables"]]
        state = sc.states[table["state"]]
    except KeyError as exc:
        raise ConfigError(f"invariance #{index}: unknown reference {exc}") from exc
    rng = np.random.default_rng([sc.seed, index])
    maps = []
    for m in table.get("maps", [{"kind": "gl", "count": 10}]):
        maps += [random_maps(m["kind"], len(obs), rng) for _ in range(int(m.get("count", 10)))]
    return invariance_report(table["relation"], obs, state, maps, k=int(table.get("k", 1)),
                             tail_tol=sc.tolerances.tail)


# ---------------------------------------------------------------------------
# commands


def _resolve(path, args) -> Scenario:
    cfg = apply_overrides(load_config(path), args.tol_sat, args.floor)
    return build_scenario(cfg)


def cmd_eval(args) -> int:
    sc = _resolve(args.config, args)
    out = Path(args.out)
    try:
        entries = run_relations(sc)
        batteries = [_battery(sc, b, args.jobs) for b in sc.config.get("batteries", [])]
        invariance = [_invariance(sc, s, i) for i, s in enumerate(sc.config.get("invariance", []))]
    except ConfigError:
        raise
    except _EVAL_ERRORS as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc

    certificates = []
    for e in entries:
        v = e["verdict"]
        if not v.holds:
            group, obs = e["objects"]
            certificates.append({"verdict": v.to_dict(), "states": [_serialize_state(s) for s in group],
                                 "observables": [_serialize_op(X) for X in obs]})
    for b in batteries:
        certificates += b.certificates
    for i, cert in enumerate(certificates):
        write_json(out / f"certificate_{i:03d}.json", cert)

    rows = [{"index": k, "relation": e["relation"], "verdict": e["verdict"].name,
             "states": e["states"], "observables": e["observables"], "expect": e["expect"],
             "ok": _row_ok(e), **{f: getattr(e["verdict"], f) for f in
                                  ("lhs", "rhs", "margin", "saturated", "holds")}}
            for k, e in enumerate(entries)]
    ok = (all(r["ok"] for r in rows) and all(b.passed for b in batteries)
          and all(r.passed for r in invariance))
    report = {"config": sc.config, "seed": sc.seed, "status": "ok" if ok else "violation",
              "verdicts": [{**e["verdict"].to_dict(), "request": e["request"], "expect": e["expect"],
                            "states": e["states"], "ok": _row_ok(e)} for e in entries],
              "batteries": [{**b.to_dict(), "certificates": len(b.certificates),
                             "summary": b.summary_rows()} for b in batteries],
              "invariance": [r.to_dict() for r in invariance],
              "certificates": len(certificates)}
    write_json(out / "report.json", report)
    if args.format == "csv":
        write_csv(out / "verdicts.csv", rows, ["index"] + SWEEP_COLUMNS[3:])
        brows = [r for b in batteries for r in b.summary_rows()]
        if brows:
            write_csv(out / "batteries.csv", brows, ["battery", "relation", "count", "min_margin",
                                                      "violations"])
    for r in rows:
        print(f"{'ok  ' if r['ok'] else 'FAIL'} {r['verdict']:<28} states={','.join(r['states'])} "
              f"margin={r['margin']:+.3e} saturated={r['saturated']}")
    for b in batteries:
        for r in b.summary_rows():
            print(f"{'ok  ' if r['violations'] == 0 else 'FAIL'} [{b.kind}] {r['relation']:<28} "
                  f"n={r['count']} min_margin={r['min_margin']:+.3e}")
    for r in invariance:
        print(f"{'ok  ' if r.passed else 'FAIL'} [invariance] {r.ur_name} {r.checks}")
    print(f"report: {out / 'report.json'}  certificates: {len(certificates)}")
    return EXIT_OK if ok else EXIT_VIOLATION


def sweep_values(table: dict) -> list:
    if "values" in table:
        return list(table["values"])
    if "num" in table:
        return np.linspace(float(table["start"]), float(table["stop"]), int(table["num"])).tolist()
    raise ConfigError("sweep needs 'values' or 'start'/'stop'/'num'")


def _sweep_point(args) -> list[dict]:
    cfg, parameter, index, value = args
    cfg = json.loads(json.dumps(cfg))
    set_dotted(cfg, parameter, value)
    sc = build_scenario(cfg)
    try:
        entries = run_relations(sc)
    except _EVAL_ERRORS as exc:
        raise ConfigError(f"sweep point {parameter}={value}: {type(exc).__name__}: {exc}") from exc
    rows = []
    for e in entries:
        v = e["verdict"]
        rows.append({"index": index, "parameter": parameter, "value": value,
                     "relation": e["relation"], "verdict": v.name,
                     "states": "|".join(e["states"]), "observables": "|".join(e["observables"]),
                     "lhs": v.lhs, "rhs": v.rhs, "margin": v.margin, "saturated": v.saturated,
                     "holds": v.holds, "expect": e["expect"], "ok": _row_ok(e)})
    return rows


def run_sweep(cfg: dict, jobs: int = 1) -> list[dict]:
    table = cfg.get("sweep")
    if not table or "parameter" not in table:
        raise ConfigError("config has no [sweep] table with a 'parameter'")
    values = sweep_values(table)
    # validate the unswept scenario once so reference errors surface before fan-out
    build_scenario(cfg)
    points = [(cfg, table["parameter"], i, v) for i, v in enumerate(values)]
    return [r for rows in parallel_map(_sweep_point, points, jobs) for r in rows]


def cmd_sweep(args) -> int:
    cfg = apply_overrides(load_config(args.config), args.tol_sat, args.floor)
    rows = run_sweep(cfg, args.jobs)
    out = Path(args.out)
    if args.format == "json":
        write_json(out / "sweep.json", {"config": cfg, "seed": cfg.get("seed"), "rows": rows})
        print(f"sweep: {len(rows)} rows -> {out / 'sweep.json'}")
    else:
        write_csv(out / "sweep.csv", rows, SWEEP_COLUMNS)
        print(f"sweep: {len(rows)} rows -> {out / 'sweep.csv'}")
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_VIOLATION


def cmd_lemma_fuzz(args) -> int:
    seed = args.seed if args.seed is not None else int(os.environ.get("URLAB_SEED", 0))
    kw = {}
    if args.tol_sat is not None:
        kw["tol"] = args.tol_sat
    if args.floor is not None:
        kw["floor"] = args.floor
    res = lemma_fuzz(args.samples, args.n, args.m, seed=seed, jobs=args.jobs, **kw)
    out = Path(args.out)
    for i, cert in enumerate(res.certificates):
        write_json(out / f"certificate_{i:03d}.json", cert)
    rows = res.summary_rows()
    if args.format == "csv":
        write_csv(out / "lemma_fuzz.csv", rows, ["battery", "relation", "count", "min_margin",
                                                  "violations"])
    else:
        write_json(out / "lemma_fuzz.json", {"config": {"n": args.n, "m": args.m,
                                                        "samples": args.samples}, "seed": seed,
                                             **res.to_dict(), "certificates": len(res.certificates)})
    for r in rows:
        print(f"{'ok  ' if r['violations'] == 0 else 'FAIL'} {r['relation']:<20} n={r['count']} "
              f"min_margin={r['min_margin']:+.3e}")
    print(f"charpoly_rel_defect={res.extra.get('charpoly_rel_defect', 0.0):.2e} "
          f"certificates={res.violations}")
    return EXIT_OK if res.passed else EXIT_VIOLATION


def _family(table: dict, tail: float) -> search.StateFamily:
    kind = table.get("kind")
    kw = {"tail_tol": tail}
    for key in ("N", "levels"):
        if key in table:
            kw[key] = int(table[key])
    if "j" in table:
        kw["j"] = float(table["j"])
    for key in ("alphas", "zetas"):
        if key in table:
            kw[key] = [to_complex(x) for x in table[key]]
    for key in ("thetas", "phis"):
        if key in table:
            kw[key] = [float(x) for x in table[key]]
    return search.StateFamily(kind, **kw)


def run_minimize(cfg: dict) -> dict:
    sc = build_scenario(cfg)
    table = cfg.get("minimize")
    if not table:
        raise ConfigError("config has no [minimize] table")
    name = table.get("relation")
    if name not in CATALOG:
        raise ConfigError(f"unknown relation {name!r}")
    try:
        family = _family(table.get("family", {}), sc.tolerances.tail)
        obs = None
        if "observables" in table:
            obs = [sc.observables[o] for o in table["observables"]]
        if "start" in table:
            start = np.asarray(table["start"], dtype=float)
        else:
            start = np.random.default_rng(sc.seed).standard_normal(family.n_params)
        res = search.minimize_ur(name, obs, family, start, budget=int(table.get("budget", 5000)),
                                 seed=sc.seed, restarts=int(table.get("restarts", 3)),
                                 **table.get("params", {}))
    except KeyError as exc:
        raise ConfigError(f"minimize: unknown reference {exc}") from exc
    except (StateError, ValueError) as exc:
        raise ConfigError(f"minimize: {exc}") from exc
    out = {"config": cfg, "seed": sc.seed, "relation": name, **res.to_dict()}
    min_fid = table.get("min_fidelity")
    if (table.get("report_fidelity") or min_fid is not None) and family.kind == "generic":
        fid, alpha = search.coherent_fidelity(family.state(res.best_params))
        out["coherent_fidelity"] = fid
        out["coherent_alpha"] = alpha
    target = table.get("target")
    out["target"] = target
    out["ok"] = res.best_margin >= -sc.tolerances.floor and (target is None or res.best_margin <= target)
    if min_fid is not None:
        out["ok"] = out["ok"] and out.get("coherent_fidelity", 0.0) >= min_fid
    return out


def cmd_minimize(args) -> int:
    cfg = apply_overrides(load_config(args.config), args.tol_sat, args.floor)
    res = run_minimize(cfg)
    out = Path(args.out)
    write_json(out / "minimize.json", {k: v for k, v in res.items() if k != "trace"} |
               {"trace": res["trace"] if args.format == "json" else []})
    if args.format == "csv":
        write_csv(out / "minimize_trace.csv", [{"eval": i, "margin": m} for i, m in enumerate(res["trace"])],
                  ["eval", "margin"])
    msg = (f"{res['relation']}: start={res['start_margin']:.3e} best={res['best_margin']:.3e} "
           f"evals={res['n_evals']} status={res['status']}")
    if "coherent_fidelity" in res:
        msg += f" coherent_fidelity={res['coherent_fidelity']:.9f}"
    print(msg)
    return EXIT_OK if res["ok"] else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--tol-sat", type=float, default=None, help="saturation tolerance")
    common.add_argument("--floor", type=float, default=None, help="numerical floor for violations")
    common.add_argument("--out", default="urlab-out", help="report directory")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="urlab", description="Evaluate and search uncertainty relations.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, default_fmt in (("eval", cmd_eval, "json"), ("sweep", cmd_sweep, "csv"),
                                  ("minimize", cmd_minimize, "json")):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("config")
        s.set_defaults(func=fn, default_format=default_fmt)
    s = sub.add_parser("lemma-fuzz", parents=[common])
    s.add_argument("--n", type=int, default=None, help="matrix dimension (random up to 6 if omitted)")
    s.add_argument("--m", type=int, default=None, help="matrices per tuple (random up to 3 if omitted)")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=None, help="defaults to URLAB_SEED, then 0")
    s.set_defaults(func=cmd_lemma_fuzz, default_format="json")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.format = args.format or args.default_format
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    for flag in ("tol_sat", "floor"):
        val = getattr(args, flag)
        if val is not None and not val > 0:
            print(f"error: --{flag.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

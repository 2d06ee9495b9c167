"""Random-state battery and matrix-lemma fuzz with timing; optional JSON summary."""

import argparse
import json
import time

from urlab.batteries import lemma_fuzz, random_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pure", type=int, default=1000)
    ap.add_argument("--mixed", type=int, default=200)
    ap.add_argument("--lemma", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--json")
    args = ap.parse_args()

    out = {}
    for name, fn in (("random", lambda: random_battery(args.pure, args.mixed, seed=args.seed,
                                                       jobs=args.jobs)),
                     ("lemma", lambda: lemma_fuzz(args.lemma, seed=args.seed, jobs=args.jobs))):
        t0 = time.perf_counter()
        res = fn()
        dt = time.perf_counter() - t0
        print(f"== {name}: {res.samples} samples, {res.violations} violations, {dt:.1f}s")
        for row in res.summary_rows():
            print(f"   {row['relation']:<24} n={row['count']:<6} min margin {row['min_margin']:+.2e}")
        extra = {k: v for k, v in res.extra.items() if k != "checks"}
        print(f"   {extra} checks={res.extra['checks']}")
        out[name] = {**res.to_dict(), "seconds": dt}
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2, default=str)


if __name__ == "__main__":
    main()

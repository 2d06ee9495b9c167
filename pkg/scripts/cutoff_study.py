"""How large a Fock cutoff the displaced squeezed grid needs.

For each cutoff, evaluates the covariance-corrected product relation over
r in 0.1..1.0, four squeezing phases and |alpha| in {0, 1, 2}, and reports the
worst margin and the worst occupancy of the two top levels.

    python scripts/cutoff_study.py --cutoffs 60 80 100 120 140 160
"""

import argparse
import json

import numpy as np

from urlab import hilbert, relations


def grid(n_phases):
    phases = np.linspace(0, 2 * np.pi, n_phases, endpoint=False)
    alphas = [0] + [a * np.exp(1j * t) for a in (1.0, 2.0) for t in phases]
    for r in np.round(np.arange(1, 11) * 0.1, 10):
        for ph in phases:
            for a in alphas:
                yield r, ph, a


def study(N, n_phases=4):
    p, q = relations.canonical_pair(hilbert.fock_state(0, N))
    rows = []
    for r, ph, a in grid(n_phases):
        psi = hilbert.squeezed_state(a, r * np.exp(1j * ph), N, tail_tol=np.inf)
        m = relations.schrodinger_two(p, q, psi, tail_tol=None).margin
        rows.append((r, abs(a), abs(m), psi.top_occupancy()))
    rows = np.array(rows)
    ok = (rows[:, 2] <= 1e-7) & (rows[:, 3] < 1e-12)
    bad_r = rows[~ok, 0]
    return {"N": N, "points": len(rows), "ok": int(ok.sum()),
            "max_abs_margin": float(rows[:, 2].max()), "max_tail": float(rows[:, 3].max()),
            "smallest_failing_r": float(bad_r.min()) if bad_r.size else None}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[60, 80, 100, 120, 140, 160])
    ap.add_argument("--phases", type=int, default=4)
    ap.add_argument("--json", help="write results here")
    args = ap.parse_args()
    results = []
    print(f"{'N':>5} {'ok':>9} {'max|margin|':>12} {'max tail':>10} {'first bad r':>12}")
    for N in args.cutoffs:
        res = study(N, args.phases)
        results.append(res)
        print(f"{N:>5} {res['ok']:>4}/{res['points']:<4} {res['max_abs_margin']:>12.2e} "
              f"{res['max_tail']:>10.2e} {str(res['smallest_failing_r']):>12}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()

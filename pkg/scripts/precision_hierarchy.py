"""Margins of the product, trace and covariance-corrected relations along squeezing and rotation.

Prints a CSV table: for squeezed vacua with increasing r and for a fixed
squeezed state under phase-space rotations.
"""

import argparse
import csv
import sys

import numpy as np

from urlab import hilbert, relations, transforms


def rows(N, r_values, r_fixed, n_angles):
    for r in r_values:
        psi = hilbert.squeezed_state(0, r, N)
        p, q = relations.canonical_pair(psi)
        yield {"scan": "squeeze", "r": r, "theta": 0.0,
               "product": relations.heisenberg_kennard(psi).margin,
               "trace": relations.trace_two(p, q, psi).margin,
               "covariance": relations.schrodinger_two(p, q, psi).margin}
    psi = hilbert.squeezed_state(0, r_fixed, N)
    pq = relations.canonical_pair(psi)
    for theta in np.linspace(0, np.pi, n_angles):
        p, q = transforms.apply_linear(transforms.rotation2(theta), pq)
        yield {"scan": "rotate", "r": r_fixed, "theta": theta,
               "product": relations.heisenberg_kennard(psi, p, q).margin,
               "trace": relations.trace_two(p, q, psi).margin,
               "covariance": relations.schrodinger_two(p, q, psi).margin}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=120)
    ap.add_argument("--r-fixed", type=float, default=0.5)
    ap.add_argument("--angles", type=int, default=9)
    args = ap.parse_args()
    w = csv.DictWriter(sys.stdout, ["scan", "r", "theta", "product", "trace", "covariance"])
    w.writeheader()
    for row in rows(args.N, np.linspace(0, 1, 11), args.r_fixed, args.angles):
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})


if __name__ == "__main__":
    main()

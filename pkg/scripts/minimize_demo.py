"""Margin minimization over generic kets and over displaced squeezed thermal states."""

import argparse

import numpy as np

from urlab import search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=12)
    ap.add_argument("--budget", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    fam = search.StateFamily("generic", levels=args.levels)
    start = np.random.default_rng(args.seed).standard_normal(fam.n_params)
    res = search.minimize_ur("trace_two", None, fam, start, budget=args.budget, seed=args.seed)
    fid, alpha = search.coherent_fidelity(fam.state(res.best_params))
    print(f"generic kets, trace relation: {res.start_margin:.4f} -> {res.best_margin:.3e} "
          f"({res.n_evals} evals, {res.status})")
    print(f"  closest coherent state alpha={alpha:.4f}, fidelity={fid:.9f}")

    gauss = search.StateFamily("gaussian", N=40)
    res = search.minimize_ur("schrodinger_two", None, gauss, [0.3, -0.2, 0.2, 0.5],
                             budget=args.budget, seed=args.seed)
    re_a, im_a, r, s = res.best_params
    print(f"Gaussian family, covariance relation: {res.start_margin:.4f} -> {res.best_margin:.3e} "
          f"({res.n_evals} evals, {res.status})")
    print(f"  alpha={complex(re_a, im_a):.3f}, r={r:.3f}, thermal occupation={s * s:.2e}")


if __name__ == "__main__":
    main()

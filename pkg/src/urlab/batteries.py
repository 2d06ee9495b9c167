"""Randomized batteries: catalog relations on random states and the matrix-lemma fuzz.

Every sample draws from its own child of a ``SeedSequence`` so results do not
depend on worker count or completion order.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from urlab import matkit
from urlab.hilbert import generic_basis, random_hermitian, random_state
from urlab.moments import moment_bundle
from urlab.relations import (generate_principal_ur, hadamard_robertson, robertson_n,
                             robertson_two, schrodinger_two, schrodinger_two_state, trace_even,
                             trace_n, trace_two)
from urlab.verdict import NUMERICAL_FLOOR, SATURATION_TOL, URVerdict


def complex_to_list(a) -> list:
    """Nested ``[re, im]`` pairs, the wire format for complex arrays."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def list_to_complex(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def parallel_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    """Ordered map over a process pool; ``jobs <= 1`` runs inline."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


@dataclass
class BatteryResult:
    kind: str
    samples: int
    stats: dict[str, dict] = field(default_factory=dict)
    certificates: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return len(self.certificates)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and all(self.extra.get("checks", {}).values())

    def summary_rows(self) -> list[dict]:
        return [{"battery": self.kind, "relation": k, **v} for k, v in sorted(self.stats.items())]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "samples": self.samples, "violations": self.violations,
                "passed": self.passed, "stats": self.stats, "extra": self.extra,
                "certificates": self.certificates}


def _collect(kind: str, samples: int, per_sample: list[tuple[list[URVerdict], dict, dict]]
             ) -> BatteryResult:
    stats: dict[str, dict] = defaultdict(lambda: {"count": 0, "min_margin": np.inf, "violations": 0})
    certs = []
    extra: dict = {"checks": {}}
    for verdicts, payload, checks in per_sample:
        for v in verdicts:
            s = stats[v.name]
            s["count"] += 1
            s["min_margin"] = min(s["min_margin"], v.margin)
            if not v.holds:
                s["violations"] += 1
                certs.append({"verdict": v.to_dict(), **payload})
        for key, val in checks.items():
            if isinstance(val, bool):
                extra["checks"][key] = extra["checks"].get(key, True) and val
            else:
                extra[key] = max(extra.get(key, 0.0), val)
    return BatteryResult(kind, samples, {k: dict(v) for k, v in stats.items()}, certs, extra)


# ---------------------------------------------------------------------------
# random states and observables


def _random_sample(args) -> tuple[list[URVerdict], dict, dict]:
    seq, form, dims, ns, tol, floor = args
    rng = np.random.default_rng(seq)
    dim = int(rng.integers(dims[0], dims[1] + 1))
    n = int(rng.choice(ns))
    basis = generic_basis(dim)
    Xs = [random_hermitian(basis, rng, f"X{i + 1}") for i in range(n)]
    rank = int(rng.integers(1, dim + 1)) if form == "mixed" else None
    psi = random_state(basis, rng, form, rank)
    phi = random_state(basis, rng, form, rank)
    kw = {"tol": tol, "floor": floor, "tail_tol": None}
    X, Y = Xs[0], Xs[1]
    verdicts = [robertson_two(X, Y, psi, **kw), trace_two(X, Y, psi, **kw),
                schrodinger_two(X, Y, psi, **kw), robertson_n(Xs, psi, **kw),
                hadamard_robertson(Xs, psi, **kw), trace_n(Xs, psi, **kw),
                schrodinger_two_state(X, Y, psi, phi, **kw)]
    if n % 2 == 0:
        verdicts.append(trace_even(Xs, psi, **kw))
    verdicts += generate_principal_ur(Xs, [psi], **kw)
    verdicts += generate_principal_ur(Xs, [psi, phi], **kw)
    verdicts += generate_principal_ur(Xs, [psi, phi], r=max(1, n - 1), trace_bounds=False, **kw)
    b = moment_bundle(Xs, psi, tail_tol=None)
    checks = {
        "gram_split_defect": float(np.max(np.abs(b.gram - (b.sigma + 1j * b.commutators)))),
        "hadamard_dominates": verdicts[4].lhs >= verdicts[3].lhs - 1e-12 * max(1.0, abs(verdicts[3].lhs)),
    }
    if n % 2:
        checks["odd_det_C"] = abs(float(np.linalg.det(b.commutators)))
    payload = {}
    if any(not v.holds for v in verdicts):
        payload = {"dim": dim, "form": form,
                   "state": complex_to_list(psi.vector if psi.is_pure else psi.rho),
                   "second_state": complex_to_list(phi.vector if phi.is_pure else phi.rho),
                   "observables": [complex_to_list(Z.matrix) for Z in Xs]}
    return verdicts, payload, checks


def random_battery(n_pure: int = 1000, n_mixed: int = 200, dims: tuple[int, int] = (2, 16),
                   ns: tuple[int, ...] = (2, 3, 4), seed: int = 0, tol: float = SATURATION_TOL,
                   floor: float = NUMERICAL_FLOOR, jobs: int = 1) -> BatteryResult:
    """Catalog relations on Haar-random pure and random mixed states with random Hermitian observables."""
    children = np.random.SeedSequence(seed).spawn(n_pure + n_mixed)
    args = [(c, "pure" if i < n_pure else "mixed", tuple(dims), tuple(ns), tol, floor)
            for i, c in enumerate(children)]
    return _collect("random", n_pure + n_mixed, parallel_map(_random_sample, args, jobs))


# ---------------------------------------------------------------------------
# matrix lemma


def random_psd(n: int, rng, rank: int | None = None) -> np.ndarray:
    """Random unit-trace PSD Hermitian ``n x n`` matrix ``Z Z^dagger`` of the given rank."""
    rank = int(rng.integers(1, n + 1)) if rank is None else rank
    Z = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    H = Z @ Z.conj().T
    H = (H + H.conj().T) / 2
    return H / np.trace(H).real


def _lemma_sample(args) -> tuple[list[URVerdict], dict, dict]:
    seq, n_fixed, m_fixed, n_max, m_max, tol, floor = args
    rng = np.random.default_rng(seq)
    n = n_fixed or int(rng.integers(1, n_max + 1))
    m = m_fixed or int(rng.integers(1, m_max + 1))
    Hs = [random_psd(n, rng) for _ in range(m)]
    r = int(rng.integers(1, n + 1))
    subset = sorted(rng.choice(np.arange(1, n + 1), size=r, replace=False).tolist())
    verdicts = list(matkit.lemma_minor_check(Hs, subset, matkit.PSD_TOL, tol, floor))
    verdicts += matkit.characteristic_check(Hs, r, matkit.PSD_TOL, tol, floor)
    if n >= 2:
        for H in Hs:
            verdicts += [v for v in matkit.lemma_trace_check(H, None, matkit.PSD_TOL, tol, floor)
                         if v is not None]
    B = sum(Hs)
    exh = matkit.characteristic_coefficients_exhaustive(B)
    poly = matkit.characteristic_coefficients_poly(B)
    rel = np.abs(exh - poly) / np.maximum(1.0, np.abs(exh))
    payload = {}
    if any(not v.holds for v in verdicts):
        payload = {"n": n, "m": m, "indices": subset, "matrices": [complex_to_list(H) for H in Hs]}
    return verdicts, payload, {"charpoly_rel_defect": float(rel.max())}


def lemma_fuzz(samples: int = 1000, n: int | None = None, m: int | None = None, n_max: int = 6,
               m_max: int = 3, seed: int = 0, tol: float = SATURATION_TOL,
               floor: float = NUMERICAL_FLOOR, jobs: int = 1) -> BatteryResult:
    """Principal-minor, characteristic and trace inequalities on random PSD tuples."""
    children = np.random.SeedSequence(seed).spawn(samples)
    args = [(c, n, m, n_max, m_max, tol, floor) for c in children]
    return _collect("lemma", samples, parallel_map(_lemma_sample, args, jobs))

"""Saturation scans over state families and margin minimization.

The minimizer is a restarted Nelder-Mead search (scipy) over real parameter
vectors mapped to states; it never reports a margin above the start.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import minimize

from urlab import hilbert
from urlab.hilbert import (TAIL_TOL, BasisSpec, Operator, QuantumState, StateError,
                           fock_basis)
from urlab.moments import MomentError
from urlab.relations import evaluate
from urlab.verdict import URVerdict

DEFAULT_BUDGET = 5000


@dataclass
class StateFamily:
    """Named family of states.

    Grid kinds (``coherent``, ``squeezed``, ``spin_coherent``) enumerate
    states for scans; parametric kinds (``generic``, ``gaussian``) map a real
    vector to a state for minimization.

    * ``generic``: ``2 * levels`` reals -> amplitudes on the lowest ``levels``
      Fock levels of an ``N``-level space (``N`` defaults to ``levels + 2`` so
      the two top levels stay empty).
    * ``gaussian``: ``(Re alpha, Im alpha, r, s)`` -> displaced squeezed
      thermal state with real squeezing ``r`` and thermal occupation ``s^2``.
    """

    kind: str
    N: int = 0
    j: float = 0.5
    alphas: Sequence[complex] = (0,)
    zetas: Sequence[complex] = (0,)
    thetas: Sequence[float] = (0.0,)
    phis: Sequence[float] = (0.0,)
    levels: int = 0
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        if self.kind == "generic" and not self.N:
            self.N = self.levels + 2
        if self.kind not in ("coherent", "squeezed", "spin_coherent", "generic", "gaussian"):
            raise ValueError(f"unknown family kind {self.kind!r}")

    @property
    def basis(self) -> BasisSpec:
        if self.kind == "spin_coherent":
            return hilbert.spin_basis(self.j)
        return fock_basis(self.N)

    @property
    def n_params(self) -> int:
        if self.kind == "generic":
            return 2 * self.levels
        if self.kind == "gaussian":
            return 4
        raise ValueError(f"{self.kind} is a grid family")

    def grid(self) -> Iterator[tuple[dict, QuantumState]]:
        if self.kind == "coherent":
            for a in self.alphas:
                yield {"alpha": complex(a)}, hilbert.coherent_state(a, self.N, self.tail_tol)
        elif self.kind == "squeezed":
            for a, z in itertools.product(self.alphas, self.zetas):
                yield ({"alpha": complex(a), "zeta": complex(z)},
                       hilbert.squeezed_state(a, z, self.N, self.tail_tol))
        elif self.kind == "spin_coherent":
            for t, p in itertools.product(self.thetas, self.phis):
                yield {"theta": float(t), "phi": float(p)}, hilbert.spin_coherent_state(self.j, t, p)
        else:
            raise ValueError(f"{self.kind} is a parametric family")

    def state(self, params) -> QuantumState:
        x = np.asarray(params, dtype=float)
        if x.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {x.shape}")
        if self.kind == "generic":
            amps = np.zeros(self.N, dtype=complex)
            amps[: self.levels] = x[0::2] + 1j * x[1::2]
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise StateError("zero parameter vector")
            return QuantumState(self.basis, amps / norm, label="generic")
        alpha = complex(x[0], x[1])
        return hilbert.gaussian_state(alpha, x[2], x[3] ** 2, self.N, self.tail_tol)


def _default_observables(basis: BasisSpec) -> list[Operator]:
    if basis.kind == "spin":
        J1, J2, _ = hilbert.spin_operators(basis.j)
        return [J1, J2]
    ops = hilbert.fock_operators(basis.N, basis.modes)
    return [ops.p[0], ops.q[0]]


@dataclass
class ScanReport:
    ur_name: str
    rows: list[tuple[dict, URVerdict]] = field(default_factory=list)
    tol: float = 1e-8

    @property
    def max_abs_margin(self) -> float:
        return max((abs(v.margin) for _, v in self.rows), default=0.0)

    @property
    def min_margin(self) -> float:
        return min((v.margin for _, v in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_abs_margin <= self.tol

    def to_dict(self) -> dict:
        def plain(d):
            return {k: [v.real, v.imag] if isinstance(v, complex) else v for k, v in d.items()}
        return {"ur_name": self.ur_name, "tol": self.tol, "max_abs_margin": self.max_abs_margin,
                "min_margin": self.min_margin, "passed": self.passed,
                "rows": [{"params": plain(p), **v.to_dict()} for p, v in self.rows]}


def saturation_scan(family: StateFamily, ur_name: str, observables: Sequence[Operator] | None = None,
                    tol: float = 1e-8, which: int = 0, **params) -> ScanReport:
    """Evaluate ``ur_name`` at every grid point; passes iff every ``|margin| <= tol``."""
    obs = list(observables) if observables is not None else _default_observables(family.basis)
    report = ScanReport(ur_name, tol=tol)
    for p, state in family.grid():
        v = evaluate(ur_name, obs, [state], tol=tol, tail_tol=family.tail_tol, **params)[which]
        report.rows.append((p, v))
    return report


@dataclass
class MinimizeResult:
    best_params: np.ndarray
    best_margin: float
    start_margin: float
    n_evals: int
    status: str
    trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"best_params": self.best_params.tolist(), "best_margin": self.best_margin,
                "start_margin": self.start_margin, "n_evals": self.n_evals, "status": self.status,
                "trace": self.trace}


class _BudgetExhausted(Exception):
    pass


def minimize_ur(ur_name: str, observables: Sequence[Operator] | None, family: StateFamily,
                start, budget: int = DEFAULT_BUDGET, seed: int = 0, restarts: int = 3,
                step: float = 0.2, xatol: float = 1e-9, which: int = 0, **params) -> MinimizeResult:
    """Minimize the margin of ``ur_name`` over the parametric ``family``.

    Runs one Nelder-Mead search from ``start`` followed by ``restarts`` searches
    from the incumbent with randomly oriented simplices. Evaluations that fail
    (truncation, degenerate parameters) count as ``+inf``.
    """
    obs = list(observables) if observables is not None else _default_observables(family.basis)
    rng = np.random.default_rng(seed)
    x0 = np.asarray(start, dtype=float)
    trace: list[float] = []
    best = {"x": x0.copy(), "f": np.inf}

    def objective(x):
        if len(trace) >= budget:
            raise _BudgetExhausted
        try:
            m = evaluate(ur_name, obs, [family.state(x)], tail_tol=family.tail_tol, **params)[which].margin
        except (StateError, MomentError, ValueError):
            m = np.inf
        trace.append(float(m))
        if m < best["f"]:
            best["x"], best["f"] = np.array(x, dtype=float), m
        return m

    start_margin = objective(x0)
    if not np.isfinite(start_margin):
        raise ValueError("margin is not finite at the start point")
    d = x0.size
    status = "converged"
    for attempt in range(restarts + 1):
        if attempt == 0:
            simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(d)])
        else:
            Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
            scale = step * 0.5 ** attempt
            simplex = np.vstack([best["x"]] + [best["x"] + scale * q for q in Q.T])
        try:
            minimize(objective, best["x"], method="Nelder-Mead",
                     options={"initial_simplex": simplex, "maxfev": budget, "xatol": xatol,
                              "fatol": 1e-15, "adaptive": d > 6})
        except _BudgetExhausted:
            status = "budget_exhausted"
            break
    if best["f"] >= start_margin and status == "budget_exhausted":
        status = "no_improvement"
    return MinimizeResult(best["x"], float(min(best["f"], start_margin)), float(start_margin),
                          len(trace), status, trace)


def coherent_fidelity(state: QuantumState, radius: float = 3.0, grid_step: float = 0.25
                      ) -> tuple[float, complex]:
    """Largest ``|<alpha|psi>|^2`` over coherent amplitudes, and the maximizing ``alpha``."""
    N = state.basis.N

    def fid(xy):
        return state.fidelity(hilbert.coherent_state(complex(*xy), N, tail_tol=np.inf))

    axis = np.arange(-radius, radius + grid_step / 2, grid_step)
    start = max(itertools.product(axis, axis), key=fid)
    res = minimize(lambda xy: -fid(xy), np.array(start), method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-12})
    return float(-res.fun), complex(*res.x)

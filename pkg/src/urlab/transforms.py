"""Real linear transformations of observable vectors.

A map ``X'_i = sum_j L_ij X_j`` transforms the uncertainty and commutator
matrices as ``L sigma L^T`` and ``L C L^T``. This module samples general,
orthogonal and symplectic maps and checks which relations keep their value,
their margin sign or their saturation under each class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from urlab.hilbert import Operator, QuantumState

INVERTIBLE_TOL = 1e-10
GL_REJECT = 1e-6
# saturation after a transformation is judged at this looser level
POST_TRANSFORM_SAT_TOL = 1e-7


class TransformError(ValueError):
    pass


def symplectic_form(m: int) -> np.ndarray:
    """``J`` with ``J[nu, m+nu] = 1 = -J[m+nu, nu]`` for the ordering ``(p_1..p_m, q_1..q_m)``."""
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.eye(m)
    return J


@dataclass(frozen=True)
class LinearMap:
    lam: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        L = np.asarray(self.lam)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise TransformError(f"map must be square, got {L.shape}")
        if np.iscomplexobj(L):
            if np.max(np.abs(L.imag)) > 0:
                raise TransformError("maps must be real to preserve Hermiticity")
            L = L.real
        object.__setattr__(self, "lam", L.astype(float))

    @property
    def n(self) -> int:
        return self.lam.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.lam))

    @property
    def invertible(self) -> bool:
        return abs(self.det) > INVERTIBLE_TOL

    @property
    def orthogonal_defect(self) -> float:
        return float(np.max(np.abs(self.lam @ self.lam.T - np.eye(self.n))))

    @property
    def symplectic_defect(self) -> float | None:
        if self.n % 2:
            return None
        J = symplectic_form(self.n // 2)
        return float(np.max(np.abs(self.lam @ J @ self.lam.T - J)))

    def is_orthogonal(self, tol: float = 1e-10) -> bool:
        return self.orthogonal_defect <= tol

    def is_symplectic(self, tol: float = 1e-10) -> bool:
        d = self.symplectic_defect
        return d is not None and d <= tol

    def classification(self) -> dict:
        return {"invertible": self.invertible, "det": self.det,
                "orthogonal_defect": self.orthogonal_defect,
                "symplectic_defect": self.symplectic_defect}


def rotation2(theta: float) -> LinearMap:
    """Phase-space rotation ``p' = p cos t + q sin t``, ``q' = -p sin t + q cos t``."""
    c, s = np.cos(theta), np.sin(theta)
    return LinearMap(np.array([[c, s], [-s, c]]), "rotation")


def scale_map(alphas: Sequence[float], n: int) -> LinearMap:
    """``X_k -> X_k / a_k`` and ``X_{m+k} -> a_k X_{m+k}`` with ``m = len(alphas)``."""
    m = len(alphas)
    if 2 * m > n:
        raise TransformError(f"{m} scale factors need n >= {2 * m}")
    d = np.ones(n)
    for k, a in enumerate(alphas):
        if a == 0:
            raise TransformError("scale factors must be non-zero")
        d[k] = 1 / a
        d[m + k] = a
    return LinearMap(np.diag(d), "scale")


def apply_linear(lmap: LinearMap, Xs: Sequence[Operator]) -> list[Operator]:
    Xs = list(Xs)
    if len(Xs) != lmap.n:
        raise TransformError(f"map of size {lmap.n} applied to {len(Xs)} operators")
    if not lmap.invertible:
        raise TransformError(f"map is singular (det = {lmap.det:.3e})")
    basis = Xs[0].basis
    out = []
    for i, row in enumerate(lmap.lam):
        M = sum(c * X.matrix for c, X in zip(row, Xs))
        herm = all(X.hermitian for X in Xs)
        if herm:
            M = (M + M.conj().T) / 2
        out.append(Operator(basis, M, herm, f"{Xs[i].label}'" if Xs[i].label else ""))
    return out


def transform_sigma(lmap: LinearMap, sigma: np.ndarray) -> np.ndarray:
    """``L sigma L^T``; applies equally to the commutator matrix."""
    sigma = np.asarray(sigma)
    if sigma.shape != (lmap.n, lmap.n):
        raise TransformError(f"matrix shape {sigma.shape} does not match map size {lmap.n}")
    return lmap.lam @ sigma @ lmap.lam.T


def random_maps(kind: str, n: int, seed=None) -> LinearMap:
    """Sample a map of the given kind: ``"gl"``, ``"orthogonal"`` or ``"symplectic"``."""
    rng = np.random.default_rng(seed)
    if n < 1:
        raise TransformError("n must be positive")
    if kind == "gl":
        while True:
            L = rng.standard_normal((n, n))
            if abs(np.linalg.det(L)) > GL_REJECT:
                return LinearMap(L, "gl")
    if kind == "orthogonal":
        Q, R = np.linalg.qr(rng.standard_normal((n, n)))
        return LinearMap(Q * np.sign(np.diag(R)), "orthogonal")
    if kind == "symplectic":
        if n % 2:
            raise TransformError(f"symplectic maps need even n, got {n}")
        S = rng.standard_normal((n, n)) * 0.5
        S = (S + S.T) / 2
        L = expm(symplectic_form(n // 2) @ S)
        return LinearMap(L, "symplectic")
    raise TransformError(f"unknown map kind {kind!r}")


# ---------------------------------------------------------------------------
# invariance testing

INVARIANCE_URS = ("robertson_n", "hadamard_robertson", "trace_n", "symplectic_invariant",
                  "schrodinger_two", "trace_two")


@dataclass
class InvarianceRow:
    map_kind: str
    det: float
    orthogonal: bool
    symplectic: bool
    lhs: float
    rhs: float
    margin: float
    lhs_change: float
    rhs_change: float
    sign_preserved: bool
    saturated: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class InvarianceReport:
    ur_name: str
    base_lhs: float
    base_rhs: float
    base_saturated: bool
    rows: list[InvarianceRow] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"ur_name": self.ur_name, "base_lhs": self.base_lhs, "base_rhs": self.base_rhs,
                "base_saturated": self.base_saturated, "checks": self.checks,
                "rows": [r.to_dict() for r in self.rows]}


def _is_special_scale(lmap: LinearMap) -> bool:
    L = lmap.lam
    if np.max(np.abs(L - np.diag(np.diag(L)))) > 0:
        return False
    d = np.diag(L)
    n = len(d)
    # pairs (k, m+k) with reciprocal factors, identity elsewhere
    for m in range(0, n // 2 + 1):
        ok = all(abs(d[k] * d[m + k] - 1) < 1e-12 for k in range(m))
        ok = ok and all(abs(d[i] - 1) < 1e-12 for i in range(2 * m, n))
        if ok:
            return True
    return False


def invariance_report(ur_name: str, Xs: Sequence[Operator], state: QuantumState,
                      maps: Sequence[LinearMap], k: int = 1, value_tol: float = 1e-9,
                      sat_tol: float = POST_TRANSFORM_SAT_TOL, tail_tol=1e-12) -> InvarianceReport:
    """Evaluate ``ur_name`` on transformed observables for every map and check the expected invariances.

    Expected behaviour by relation:

    * ``robertson_n`` / ``schrodinger_two``: margin sign and saturation kept under
      every invertible map; value kept when ``|det L| = 1``.
    * ``trace_n`` / ``trace_two``: left-hand side kept under orthogonal maps.
    * ``symplectic_invariant``: left-hand side kept under symplectic maps.
    * ``hadamard_robertson``: value kept under the special pairwise scalings.
    """
    from urlab.relations import evaluate

    if ur_name not in INVARIANCE_URS:
        raise TransformError(f"unknown relation {ur_name!r} for invariance testing")
    Xs = list(Xs)

    def run(ops):
        return evaluate(ur_name, ops, [state], tail_tol=tail_tol, k=k)[0]

    base = run(Xs)
    report = InvarianceReport(ur_name, base.lhs, base.rhs, abs(base.margin) <= sat_tol)
    checks: dict[str, bool] = {}

    def record(key, ok):
        checks[key] = checks.get(key, True) and bool(ok)

    for lmap in maps:
        v = run(apply_linear(lmap, Xs))
        scale = max(1.0, abs(base.lhs))
        row = InvarianceRow(
            map_kind=lmap.kind, det=lmap.det, orthogonal=lmap.is_orthogonal(),
            symplectic=lmap.is_symplectic(1e-9), lhs=v.lhs, rhs=v.rhs, margin=v.margin,
            lhs_change=abs(v.lhs - base.lhs) / scale, rhs_change=abs(v.rhs - base.rhs) / scale,
            sign_preserved=(v.margin >= -base.floor) == (base.margin >= -base.floor),
            saturated=abs(v.margin) <= sat_tol,
        )
        report.rows.append(row)
        if ur_name in ("robertson_n", "schrodinger_two"):
            record("margin_sign_preserved", row.sign_preserved)
            if report.base_saturated:
                record("saturation_preserved", row.saturated)
            if abs(abs(lmap.det) - 1) < 1e-9:
                record("unimodular_value_preserved", row.lhs_change <= value_tol
                       and row.rhs_change <= value_tol)
        elif ur_name in ("trace_n", "trace_two"):
            if row.orthogonal:
                record("orthogonal_lhs_preserved", row.lhs_change <= value_tol)
        elif ur_name == "symplectic_invariant":
            if row.symplectic:
                record("symplectic_lhs_preserved", row.lhs_change <= value_tol)
        elif ur_name == "hadamard_robertson":
            if _is_special_scale(lmap):
                record("scale_value_preserved", row.lhs_change <= value_tol
                       and row.rhs_change <= value_tol)
    report.checks = checks
    return report

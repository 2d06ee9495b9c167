"""Complex-matrix kernel.

Hermitian splitting ``H = S + iA``, positivity tests, principal minors,
characteristic coefficients and the matrix inequalities for sums of
non-negative Hermitian matrices that every uncertainty relation in the
package is an instance of.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from urlab.verdict import NUMERICAL_FLOOR, SATURATION_TOL, URVerdict

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
# exhaustive minor summation is used up to this dimension
EXHAUSTIVE_MAX_DIM = 8


class MatrixError(ValueError):
    """Raised when a matrix violates a structural precondition."""


def _square(B) -> np.ndarray:
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {B.shape}")
    return B


def hermiticity_defect(H) -> float:
    """Max-entry norm of ``H - H^dagger``."""
    H = _square(H)
    if H.size == 0:
        return 0.0
    return float(np.max(np.abs(H - H.conj().T)))


@dataclass(frozen=True)
class HermitianSplit:
    S: np.ndarray
    A: np.ndarray

    def reassemble(self) -> np.ndarray:
        return self.S + 1j * self.A


def hermitian_split(H, tol: float = HERMITIAN_TOL) -> HermitianSplit:
    """Split a Hermitian matrix into real symmetric and antisymmetric parts."""
    H = _square(H).astype(complex)
    defect = hermiticity_defect(H)
    if defect > tol:
        raise MatrixError(f"Hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    S = (H.real + H.real.T) / 2
    A = (H.imag - H.imag.T) / 2
    return HermitianSplit(S, A)


def is_psd(H, tol: float = PSD_TOL) -> bool:
    """True iff the Hermitian matrix ``H`` has minimum eigenvalue >= -tol."""
    H = _square(H)
    defect = hermiticity_defect(H)
    if defect > tol:
        raise MatrixError(f"Hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    if H.size == 0:
        return True
    Hs = (H + H.conj().T) / 2
    return bool(np.linalg.eigvalsh(Hs)[0] >= -tol)


@dataclass(frozen=True)
class MinorIndex:
    """Strictly increasing 1-based row/column positions of a principal minor."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise MatrixError("a minor needs at least one index")
        if len(set(idx)) != len(idx):
            raise MatrixError(f"duplicate minor indices {idx}")
        if any(i < 1 for i in idx):
            raise MatrixError(f"minor indices are 1-based, got {idx}")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    @property
    def r(self) -> int:
        return len(self.indices)

    @classmethod
    def full(cls, n: int) -> "MinorIndex":
        return cls(tuple(range(1, n + 1)))

    def check(self, n: int) -> None:
        if self.indices[-1] > n:
            raise MatrixError(f"minor index {self.indices[-1]} out of range for n={n}")

    def zero_based(self) -> list[int]:
        return [i - 1 for i in self.indices]


def _as_index(idx) -> MinorIndex:
    return idx if isinstance(idx, MinorIndex) else MinorIndex(tuple(idx))


def principal_minor(B, idx) -> complex | float:
    """Determinant of ``B`` restricted to rows and columns ``idx``."""
    B = _square(B)
    idx = _as_index(idx)
    idx.check(B.shape[0])
    sel = idx.zero_based()
    return np.linalg.det(B[np.ix_(sel, sel)])


def characteristic_coefficients_exhaustive(B) -> np.ndarray:
    """All coefficients ``c_0..c_n`` by brute-force summation of principal minors."""
    B = _square(B)
    n = B.shape[0]
    out = np.zeros(n + 1, dtype=complex)
    out[0] = 1.0
    for r in range(1, n + 1):
        out[r] = sum(np.linalg.det(B[np.ix_(s, s)]) for s in itertools.combinations(range(n), r))
    return out


def characteristic_coefficients_poly(B) -> np.ndarray:
    """Coefficients of ``det(lambda I + B) = sum_r c_r lambda^(n-r)`` from the characteristic polynomial."""
    B = _square(B)
    n = B.shape[0]
    p = np.poly(B) if n else np.ones(1)
    return np.array([(-1) ** r * p[r] for r in range(n + 1)], dtype=complex)


def characteristic_coefficient(B, r: int, method: str = "auto"):
    """Sum of all order-``r`` principal minors of ``B``.

    ``method`` is ``"exhaustive"``, ``"poly"`` or ``"auto"`` (exhaustive for
    n <= 8). Real input gives a real result.
    """
    B = _square(B)
    n = B.shape[0]
    if not 1 <= r <= n:
        raise MatrixError(f"order r={r} outside [1, {n}]")
    if method == "auto":
        method = "exhaustive" if n <= EXHAUSTIVE_MAX_DIM else "poly"
    if method == "exhaustive":
        val = sum(np.linalg.det(B[np.ix_(s, s)]) for s in itertools.combinations(range(n), r))
    elif method == "poly":
        val = characteristic_coefficients_poly(B)[r]
    else:
        raise MatrixError(f"unknown method {method!r}")
    if np.isrealobj(B):
        return float(np.real(val))
    return complex(val)


def _real(x, what: str, tol: float = 1e-8) -> float:
    x = complex(x)
    if abs(x.imag) > tol * max(1.0, abs(x.real)):
        raise MatrixError(f"{what} has imaginary part {x.imag:.3e}")
    return x.real


def _check_stack(H_list, psd_tol: float) -> list[np.ndarray]:
    Hs = [_square(H).astype(complex) for H in H_list]
    if not Hs:
        raise MatrixError("need at least one matrix")
    n = Hs[0].shape[0]
    for mu, H in enumerate(Hs):
        if H.shape[0] != n:
            raise MatrixError(f"matrix {mu} has dimension {H.shape[0]}, expected {n}")
        if not is_psd(H, psd_tol):
            raise MatrixError(f"matrix {mu} is not non-negative definite")
    return Hs


def _split_sum(Hs):
    splits = [hermitian_split(H) for H in Hs]
    return sum(s.S for s in splits), sum(s.A for s in splits)


def lemma_minor_check(H_list: Sequence, idx, psd_tol: float = PSD_TOL,
                      tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR
                      ) -> tuple[URVerdict, URVerdict]:
    """Principal-minor inequalities for a family of PSD Hermitian matrices.

    Returns ``(split, sum)`` verdicts::

        M(idx; sum S) >= M(idx; sum A)
        M(idx; sum H) >= sum M(idx; H)
    """
    Hs = _check_stack(H_list, psd_tol)
    idx = _as_index(idx)
    idx.check(Hs[0].shape[0])
    S, A = _split_sum(Hs)
    ctx = {"n": Hs[0].shape[0], "m": len(Hs), "order": idx.r, "indices": list(idx.indices)}
    split = URVerdict("lemma_minor_split", float(principal_minor(S, idx)),
                      float(principal_minor(A, idx)), tol, floor, ctx)
    lhs = _real(principal_minor(sum(Hs), idx), "minor of sum")
    rhs = sum(_real(principal_minor(H, idx), "minor") for H in Hs)
    return split, URVerdict("lemma_minor_sum", lhs, rhs, tol, floor, ctx)


def characteristic_check(H_list: Sequence, r: int, psd_tol: float = PSD_TOL,
                         tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR
                         ) -> tuple[URVerdict, URVerdict]:
    """As :func:`lemma_minor_check` with minors replaced by order-``r`` characteristic coefficients."""
    Hs = _check_stack(H_list, psd_tol)
    S, A = _split_sum(Hs)
    ctx = {"n": Hs[0].shape[0], "m": len(Hs), "order": r}
    split = URVerdict("lemma_char_split", characteristic_coefficient(S, r),
                      characteristic_coefficient(A, r), tol, floor, ctx)
    lhs = _real(characteristic_coefficient(sum(Hs), r), "coefficient of sum")
    rhs = sum(_real(characteristic_coefficient(H, r), "coefficient") for H in Hs)
    return split, URVerdict("lemma_char_sum", lhs, rhs, tol, floor, ctx)


def lemma_trace_check(H, paired: bool | None = None, psd_tol: float = PSD_TOL,
                      tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR
                      ) -> tuple[URVerdict, URVerdict | None]:
    """Trace bounds on the antisymmetric part of one PSD Hermitian matrix.

    ``Tr S >= 2/(n-1) sum_{i<j} |A_ij|`` always, and for even ``n``
    ``Tr S >= sum_nu |A_{nu, nu+n/2}|`` (first half paired with second half).
    ``paired=None`` evaluates the second bound only when ``n`` is even.
    """
    (Hc,) = _check_stack([H], psd_tol)
    n = Hc.shape[0]
    if n < 2:
        raise MatrixError("trace bound needs n >= 2")
    if paired and n % 2:
        raise MatrixError(f"paired trace bound needs even n, got {n}")
    sp = hermitian_split(Hc)
    trS = float(np.trace(sp.S))
    iu = np.triu_indices(n, 1)
    all_pairs = URVerdict("lemma_trace_all_pairs", trS,
                          2.0 / (n - 1) * float(np.abs(sp.A[iu]).sum()), tol, floor, {"n": n})
    if paired is False or n % 2:
        return all_pairs, None
    half = n // 2
    rhs = float(sum(abs(sp.A[v, v + half]) for v in range(half)))
    return all_pairs, URVerdict("lemma_trace_paired", trS, rhs, tol, floor, {"n": n})

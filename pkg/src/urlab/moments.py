"""Statistical moments of observables in pure and mixed states.

The first-order Gram matrix ``G_ij = <(X_i - <X_i>)(X_j - <X_j>)>`` splits as
``G = sigma + iC`` with ``sigma`` the uncertainty (covariance) matrix and
``C_ij = -(i/2)<[X_i, X_j]>``. ``sigma``/``C`` are assembled from operator
products while ``G`` comes from shifted-state inner products, so the split
is a genuine cross-check rather than an identity by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from urlab.hilbert import TAIL_TOL, BasisError, Operator, QuantumState
from urlab.matkit import is_psd

RESIDUE_TOL = 1e-10
MAX_POWER = 6


class MomentError(ValueError):
    pass


def _scale(x) -> float:
    return max(1.0, float(np.max(np.abs(x))) if np.size(x) else 1.0)


def _gate(ops: Sequence[Operator], state: QuantumState, tail_tol, hermitian=True):
    for X in ops:
        if X.basis != state.basis:
            raise BasisError(f"operator {X.label or '?'} and state live on different bases")
        if hermitian and not X.hermitian:
            raise MomentError(f"operator {X.label or '?'} is not flagged Hermitian")
    state.check_tail(tail_tol)


def expectation(M: np.ndarray, state: QuantumState) -> complex:
    """Raw ``<M>`` for an arbitrary matrix, no checks."""
    if state.is_pure:
        return complex(np.vdot(state.vector, M @ state.vector))
    return complex(np.einsum("ab,ba->", state.rho, M))


def mean(X: Operator, state: QuantumState, tail_tol: float | None = TAIL_TOL) -> float:
    _gate([X], state, tail_tol)
    val = expectation(X.matrix, state)
    if abs(val.imag) > RESIDUE_TOL * max(1.0, abs(val.real)):
        raise MomentError(f"<{X.label}> has imaginary residue {val.imag:.3e}")
    return val.real


def _second_moment(X: Operator, Y: Operator, state: QuantumState) -> complex:
    """``<XY>`` computed from operator action (no centring)."""
    if state.is_pure:
        v = state.vector
        return complex(np.vdot(v, X.matrix @ (Y.matrix @ v)))
    return complex(np.sum((state.rho @ X.matrix) * Y.matrix.T))


def covariance(X: Operator, Y: Operator, state: QuantumState,
               tail_tol: float | None = TAIL_TOL) -> float:
    """Symmetrized covariance ``<XY + YX>/2 - <X><Y>``."""
    mx, my = mean(X, state, tail_tol), mean(Y, state, tail_tol)
    sym = (_second_moment(X, Y, state) + _second_moment(Y, X, state)) / 2
    if abs(sym.imag) > RESIDUE_TOL * max(1.0, abs(sym.real)):
        raise MomentError(f"symmetrized moment of {X.label},{Y.label} is not real")
    return sym.real - mx * my


def variance(X: Operator, state: QuantumState, tail_tol: float | None = TAIL_TOL) -> float:
    return covariance(X, X, state, tail_tol)


def commutator_mean(X: Operator, Y: Operator, state: QuantumState,
                    tail_tol: float | None = TAIL_TOL) -> complex:
    """``<[X, Y]>``, which must be purely imaginary for Hermitian ``X, Y``."""
    _gate([X, Y], state, tail_tol)
    val = _second_moment(X, Y, state) - _second_moment(Y, X, state)
    if abs(val.real) > RESIDUE_TOL * max(1.0, abs(val.imag)):
        raise MomentError(f"<[{X.label},{Y.label}]> has real residue {val.real:.3e}")
    return complex(0.0, val.imag)


@dataclass(frozen=True)
class MomentBundle:
    means: np.ndarray
    sigma: np.ndarray
    commutators: np.ndarray
    gram: np.ndarray

    @property
    def n(self) -> int:
        return len(self.means)

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.sigma).copy()


def _shifted_gram(mats: Sequence[np.ndarray], shifts: Sequence[float], state: QuantumState) -> np.ndarray:
    if not state.is_pure:
        return _trace_gram(mats, shifts, state)
    v = state.vector
    chi = np.stack([M @ v - s * v for M, s in zip(mats, shifts)], axis=1)
    return chi.conj().T @ chi


def _trace_gram(mats, shifts, state):
    eye = np.eye(state.basis.dim)
    rho = state.density()
    deltas = [M - s * eye for M, s in zip(mats, shifts)]
    left = [rho @ D for D in deltas]
    return np.array([[np.einsum("ab,ba->", L, D) for D in deltas] for L in left])


def moment_bundle(Xs: Sequence[Operator], state: QuantumState, method: str = "auto",
                  tail_tol: float | None = TAIL_TOL, check: bool = True) -> MomentBundle:
    """Means, uncertainty matrix, commutator matrix and Gram matrix of ``Xs`` in ``state``.

    ``method`` selects how the Gram matrix is evaluated: ``"vectors"`` (inner
    products of shifted states, pure only), ``"trace"`` (``Tr[rho dX_i dX_j]``)
    or ``"auto"``.
    """
    Xs = list(Xs)
    if not Xs:
        raise MomentError("need at least one observable")
    _gate(Xs, state, tail_tol)
    means = np.array([mean(X, state, None) for X in Xs])
    raw = np.array([[_second_moment(X, Y, state) for Y in Xs] for X in Xs])
    sym = (raw + raw.T) / 2
    if np.max(np.abs(sym.imag)) > RESIDUE_TOL * _scale(sym.real):
        raise MomentError("symmetrized second moments are not real")
    sigma = sym.real - np.outer(means, means)
    sigma = (sigma + sigma.T) / 2
    comm = raw - raw.T
    if np.max(np.abs(comm.real)) > RESIDUE_TOL * _scale(comm.imag):
        raise MomentError("mean commutators are not purely imaginary")
    C = comm.imag / 2
    if method == "auto":
        method = "vectors" if state.is_pure else "trace"
    if method == "vectors":
        if not state.is_pure:
            raise MomentError("vector Gram evaluation needs a pure state")
        G = _shifted_gram([X.matrix for X in Xs], means, state)
    elif method == "trace":
        G = _trace_gram([X.matrix for X in Xs], means, state)
    else:
        raise MomentError(f"unknown method {method!r}")
    G = (G + G.conj().T) / 2
    bundle = MomentBundle(means, sigma, C, G)
    if check:
        _check_bundle(bundle)
    return bundle


def _check_bundle(b: MomentBundle) -> None:
    scale = _scale(b.gram)
    tol = RESIDUE_TOL * scale
    d = np.diag(b.sigma)
    if np.min(d) < -tol:
        i = int(np.argmin(d))
        raise MomentError(f"negative variance sigma[{i},{i}] = {d[i]:.3e}")
    diff = np.abs(b.gram - (b.sigma + 1j * b.commutators))
    if np.max(diff) > tol:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise MomentError(f"G != sigma + iC at entry ({i},{j}), defect {diff[i, j]:.3e}")
    if not is_psd(b.gram, tol):
        raise MomentError("Gram matrix is not positive semidefinite")


def gram_higher(Xs: Sequence[Operator], k: int, state: QuantumState,
                tail_tol: float | None = TAIL_TOL) -> np.ndarray:
    """Gram matrix of ``(X_i^k - <X_i>^k)|psi>``; diagonal holds order-k moments."""
    if not 1 <= k <= MAX_POWER:
        raise MomentError(f"moment order k={k} outside [1, {MAX_POWER}]")
    Xs = list(Xs)
    _gate(Xs, state, tail_tol)
    means = [mean(X, state, None) for X in Xs]
    mats = [np.linalg.matrix_power(X.matrix, k) for X in Xs]
    G = _shifted_gram(mats, [m ** k for m in means], state)
    G = (G + G.conj().T) / 2
    if not is_psd(G, RESIDUE_TOL * _scale(G)):
        raise MomentError("higher-order Gram matrix is not positive semidefinite")
    return G


def gram_generic(kets: Sequence) -> np.ndarray:
    """``G_ij = <chi_i|chi_j>`` for arbitrary (unnormalized) vectors on a shared basis."""
    vecs = [np.asarray(k.vector if isinstance(k, QuantumState) else k, dtype=complex).reshape(-1)
            for k in kets]
    if not vecs:
        raise MomentError("need at least one vector")
    if len({v.size for v in vecs}) != 1:
        raise BasisError("vectors have different lengths")
    chi = np.stack(vecs, axis=1)
    G = chi.conj().T @ chi
    G = (G + G.conj().T) / 2
    if not is_psd(G, RESIDUE_TOL * _scale(G)):
        raise MomentError("Gram matrix is not positive semidefinite")
    return G

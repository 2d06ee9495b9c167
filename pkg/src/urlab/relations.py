"""Catalog of uncertainty relations evaluated as :class:`URVerdict` objects.

Single-state relations for two observables (Heisenberg-Kennard, Robertson,
trace and Schrodinger forms), their ``n``-observable generalizations, the
symplectic trace invariant, state-entangled relations for two states and the
principal-minor generator that produces relations of type ``(n, m)`` from
Gram matrices of shifted states.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from urlab import matkit
from urlab.hilbert import TAIL_TOL, BasisError, Operator, QuantumState, fock_operators
from urlab.moments import (MomentError, commutator_mean, covariance, gram_generic,
                           gram_higher, mean, moment_bundle, variance)
from urlab.transforms import symplectic_form
from urlab.verdict import NUMERICAL_FLOOR, SATURATION_TOL, URVerdict


@functools.lru_cache(maxsize=16)
def _canonical_pair(N: int, modes: int, mode: int) -> tuple[Operator, Operator]:
    ops = fock_operators(N, modes)
    return ops.p[mode], ops.q[mode]


def canonical_pair(state: QuantumState, mode: int = 0) -> tuple[Operator, Operator]:
    """``(p, q)`` of one mode of the state's Fock basis."""
    b = state.basis
    if b.kind != "fock":
        raise BasisError("canonical observables need a Fock basis")
    return _canonical_pair(b.N, b.modes, mode)


def canonical_observables(state: QuantumState) -> list[Operator]:
    """``(p_1..p_m, q_1..q_m)`` for the state's Fock basis."""
    b = state.basis
    ps = [canonical_pair(state, mu)[0] for mu in range(b.modes)]
    qs = [canonical_pair(state, mu)[1] for mu in range(b.modes)]
    return ps + qs


def _labels(ops) -> list[str]:
    return [X.label or f"X{i + 1}" for i, X in enumerate(ops)]


def _abs_comm(X, Y, state, tail_tol) -> float:
    return abs(commutator_mean(X, Y, state, tail_tol))


def heisenberg_kennard(state: QuantumState, p: Operator | None = None, q: Operator | None = None,
                       mode: int = 0, tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR,
                       tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``var(p) var(q) >= 1/4`` for the dimensionless canonical pair."""
    if p is None or q is None:
        p, q = canonical_pair(state, mode)
    lhs = variance(p, state, tail_tol) * variance(q, state, tail_tol)
    return URVerdict("heisenberg_kennard", lhs, 0.25, tol, floor, {"observables": _labels([p, q])})


def robertson_two(X: Operator, Y: Operator, state: QuantumState, tol: float = SATURATION_TOL,
                  floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``var(X) var(Y) >= |<[X,Y]>|^2 / 4``."""
    lhs = variance(X, state, tail_tol) * variance(Y, state, tail_tol)
    rhs = _abs_comm(X, Y, state, tail_tol) ** 2 / 4
    return URVerdict("robertson_two", lhs, rhs, tol, floor, {"observables": _labels([X, Y])})


def trace_two(X: Operator, Y: Operator, state: QuantumState, tol: float = SATURATION_TOL,
              floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``var(X) + var(Y) >= |<[X,Y]>|``; rotation invariant but least precise."""
    lhs = variance(X, state, tail_tol) + variance(Y, state, tail_tol)
    return URVerdict("trace_two", lhs, _abs_comm(X, Y, state, tail_tol), tol, floor,
                     {"observables": _labels([X, Y])})


def schrodinger_two(X: Operator, Y: Operator, state: QuantumState, tol: float = SATURATION_TOL,
                    floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``var(X) var(Y) - cov(X,Y)^2 >= |<[X,Y]>|^2 / 4``."""
    cov = covariance(X, Y, state, tail_tol)
    lhs = variance(X, state, tail_tol) * variance(Y, state, tail_tol) - cov ** 2
    rhs = _abs_comm(X, Y, state, tail_tol) ** 2 / 4
    return URVerdict("schrodinger_two", lhs, rhs, tol, floor, {"observables": _labels([X, Y])})


def _bundle(Xs, state, tail_tol, min_n=2):
    Xs = list(Xs)
    if len(Xs) < min_n:
        raise MomentError(f"need at least {min_n} observables, got {len(Xs)}")
    return Xs, moment_bundle(Xs, state, tail_tol=tail_tol)


def robertson_n(Xs: Sequence[Operator], state: QuantumState, tol: float = SATURATION_TOL,
                floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``det sigma >= det C``."""
    Xs, b = _bundle(Xs, state, tail_tol)
    return URVerdict("robertson_n", float(np.linalg.det(b.sigma)), float(np.linalg.det(b.commutators)),
                     tol, floor, {"observables": _labels(Xs)})


def hadamard_robertson(Xs: Sequence[Operator], state: QuantumState, tol: float = SATURATION_TOL,
                       floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """Product of variances ``>= det C``."""
    Xs, b = _bundle(Xs, state, tail_tol)
    return URVerdict("hadamard_robertson", float(np.prod(b.variances)),
                     float(np.linalg.det(b.commutators)), tol, floor, {"observables": _labels(Xs)})


def trace_n(Xs: Sequence[Operator], state: QuantumState, tol: float = SATURATION_TOL,
            floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``Tr sigma >= 1/(n-1) sum_{i<j} |<[X_i, X_j]>|``."""
    Xs, b = _bundle(Xs, state, tail_tol)
    n = len(Xs)
    iu = np.triu_indices(n, 1)
    rhs = 2.0 * float(np.abs(b.commutators[iu]).sum()) / (n - 1)
    return URVerdict("trace_n", float(np.trace(b.sigma)), rhs, tol, floor, {"observables": _labels(Xs)})


def trace_even(Xs: Sequence[Operator], state: QuantumState, tol: float = SATURATION_TOL,
               floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """``Tr sigma >= sum_mu |<[X_mu, X_{m+mu}]>|``, pairing the first half with the second."""
    Xs = list(Xs)
    if len(Xs) % 2:
        raise MomentError(f"trace_even needs an even number of observables, got {len(Xs)}")
    Xs, b = _bundle(Xs, state, tail_tol)
    m = len(Xs) // 2
    rhs = 2.0 * sum(abs(b.commutators[mu, m + mu]) for mu in range(m))
    return URVerdict("trace_even", float(np.trace(b.sigma)), float(rhs), tol, floor,
                     {"observables": _labels(Xs)})


def symplectic_trace(sigma: np.ndarray, k: int) -> float:
    """``Tr[(i sigma J)^(2k)]`` for ``sigma`` ordered as ``(p_1..p_m, q_1..q_m)``."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    if sigma.shape != (n, n) or n % 2:
        raise MomentError(f"sigma must be even-dimensional square, got {sigma.shape}")
    if k < 1:
        raise MomentError("power k must be >= 1")
    M = 1j * sigma @ symplectic_form(n // 2)
    val = complex(np.trace(np.linalg.matrix_power(M, 2 * k)))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise MomentError(f"Tr[(i sigma J)^{2 * k}] has imaginary residue {val.imag:.3e}")
    return val.real


def symplectic_invariant_ur(sigma: np.ndarray, k: int = 1, tol: float = SATURATION_TOL,
                            floor: float = NUMERICAL_FLOOR) -> URVerdict:
    """``Tr[(i sigma J)^(2k)] >= m / 2^(2k-1)`` for ``2m`` canonical observables."""
    lhs = symplectic_trace(sigma, k)
    m = np.shape(sigma)[0] // 2
    return URVerdict("symplectic_invariant", lhs, m / 2 ** (2 * k - 1), tol, floor, {"k": k, "m": m})


# ---------------------------------------------------------------------------
# several states


def two_state_suite(psi: QuantumState, phi: QuantumState, mode: int = 0,
                    tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR,
                    tail_tol: float | None = TAIL_TOL) -> tuple[URVerdict, URVerdict, URVerdict]:
    """State-entangled trace, Heisenberg and Schrodinger relations for ``(q, p)``."""
    if psi.basis != phi.basis:
        raise BasisError("states live on different bases")
    p, q = canonical_pair(psi, mode)
    vq_psi, vp_psi = variance(q, psi, tail_tol), variance(p, psi, tail_tol)
    vq_phi, vp_phi = variance(q, phi, tail_tol), variance(p, phi, tail_tol)
    c_psi, c_phi = covariance(q, p, psi, tail_tol), covariance(q, p, phi, tail_tol)
    ctx = {"states": [psi.label, phi.label]}
    cross_sd = np.sqrt(vq_psi * vp_phi) + np.sqrt(vq_phi * vp_psi)
    cross_var = vq_psi * vp_phi + vq_phi * vp_psi
    return (
        URVerdict("two_state_trace", float(cross_sd), 1.0, tol, floor, ctx),
        URVerdict("two_state_heisenberg", cross_var, 0.5, tol, floor, ctx),
        URVerdict("two_state_schrodinger", cross_var - 2 * abs(c_psi * c_phi), 0.5, tol, floor, ctx),
    )


def schrodinger_two_state(X: Operator, Y: Operator, psi1: QuantumState, psi2: QuantumState,
                          tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR,
                          tail_tol: float | None = TAIL_TOL) -> URVerdict:
    """Schrodinger relation extended to two states."""
    vx1, vy1 = variance(X, psi1, tail_tol), variance(Y, psi1, tail_tol)
    vx2, vy2 = variance(X, psi2, tail_tol), variance(Y, psi2, tail_tol)
    c1, c2 = covariance(X, Y, psi1, tail_tol), covariance(X, Y, psi2, tail_tol)
    lhs = vx1 * vy2 + vx2 * vy1 - 2 * abs(c1 * c2)
    rhs = 0.5 * _abs_comm(X, Y, psi1, tail_tol) * _abs_comm(X, Y, psi2, tail_tol)
    return URVerdict("schrodinger_two_state", lhs, rhs, tol, floor,
                     {"observables": _labels([X, Y]), "states": [psi1.label, psi2.label]})


def _align_pair_grams(Hs: list[np.ndarray]) -> list[np.ndarray]:
    """Orient 2x2 Gram matrices so off-diagonal real and imaginary parts share signs.

    Flipping the sign of the second observable (``D H D``, ``D = diag(1,-1)``) and
    complex conjugation (``H^T``) both map Gram matrices to Gram matrices.
    """
    def ref_sign(vals):
        nz = [v for v in vals if v != 0]
        return np.sign(nz[0]) if nz else 1.0

    D = np.diag([1.0, -1.0])
    s_re = ref_sign([H[0, 1].real for H in Hs])
    out = [D @ H @ D if H[0, 1].real * s_re < 0 else H for H in Hs]
    s_im = ref_sign([H[0, 1].imag for H in out])
    return [H.T.copy() if H[0, 1].imag * s_im < 0 else H for H in out]


def physical_grams(Xs: Sequence[Operator], states: Sequence[QuantumState], k: int = 1,
                   tail_tol: float | None = TAIL_TOL) -> list[np.ndarray]:
    """One Gram matrix per state: first-order for ``k = 1``, powers ``X^k`` otherwise."""
    if k == 1:
        return [moment_bundle(Xs, s, tail_tol=tail_tol).gram for s in states]
    return [gram_higher(Xs, k, s, tail_tol) for s in states]


def generate_principal_ur(Xs: Sequence[Operator], states: Sequence[QuantumState], k: int = 1,
                          idx=None, r: int | None = None, align: bool = False,
                          trace_bounds: bool = True, tol: float = SATURATION_TOL,
                          floor: float = NUMERICAL_FLOOR, tail_tol: float | None = TAIL_TOL
                          ) -> list[URVerdict]:
    """Principal-minor (or characteristic, when ``r`` is given) relations of type ``(n, m)``.

    ``align=True`` (two observables only) orients the per-state Gram matrices so
    that the sum inequality takes its sharpest form, which for two states is
    the two-state Schrodinger relation.
    """
    Xs, states = list(Xs), list(states)
    n, m = len(Xs), len(states)
    Hs = physical_grams(Xs, states, k, tail_tol)
    if align:
        if n != 2:
            raise MomentError("Gram alignment is defined for two observables only")
        Hs = _align_pair_grams(Hs)
    scale = max(1.0, max(float(np.max(np.abs(H))) for H in Hs))
    psd_tol = matkit.PSD_TOL * scale
    if r is not None:
        pair = matkit.characteristic_check(Hs, r, psd_tol, tol, floor)
    else:
        idx = matkit.MinorIndex.full(n) if idx is None else idx
        pair = matkit.lemma_minor_check(Hs, idx, psd_tol, tol, floor)
    ctx = {"type": [n, m], "k": k, "observables": _labels(Xs),
           "states": [s.label for s in states]}
    out = [v.with_context(**ctx) for v in pair]
    if trace_bounds and n >= 2:
        for mu, H in enumerate(Hs):
            for v in matkit.lemma_trace_check(H, None, psd_tol, tol, floor):
                if v is not None:
                    out.append(v.with_context(**ctx, state_index=mu))
    return out


# ---------------------------------------------------------------------------
# single-vector Gram bound


@dataclass(frozen=True)
class OverlapBoundReport:
    """Gram-positivity bound built from ``chi = phi - psi<psi|phi> - psi_X<psi_X|phi>``.

    ``chi_norm2`` is ``<chi|chi>`` and ``gram_det`` the determinant of the Gram
    matrix of ``(psi, psi_X, phi)``; they agree and are non-negative.
    ``bound_squared_overlap`` compares ``std_psi(X)`` with the squared-overlap
    expression ``f[X, psi, phi]``; ``bound_linear_overlap`` uses the first-power
    overlap implied by ``<chi|chi> >= 0`` and always holds.
    """

    chi_norm2: float
    gram_det: float
    bound_squared_overlap: URVerdict
    bound_linear_overlap: URVerdict
    product_squared_overlap: URVerdict
    bound_symmetrized: float

    @property
    def squared_violated_while_gram_ok(self) -> bool:
        return (not self.bound_squared_overlap.holds) and self.chi_norm2 >= -1e-12


def _f_terms(X: Operator, psi: QuantumState, phi: QuantumState, tail_tol):
    m = mean(X, psi, tail_tol)
    sd = np.sqrt(max(variance(X, psi, tail_tol), 0.0))
    shifted = X.matrix @ psi.vector - m * psi.vector
    overlap = abs(np.vdot(phi.vector, shifted))
    ortho = 1 - abs(np.vdot(phi.vector, psi.vector)) ** 2
    return sd, shifted, overlap, ortho


def overlap_bound(X: Operator, psi: QuantumState, phi: QuantumState,
                  tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR,
                  tail_tol: float | None = TAIL_TOL) -> OverlapBoundReport:
    if not (psi.is_pure and phi.is_pure):
        raise MomentError("the Gram bound is defined for pure states")
    sd_psi, shifted, ov_psi, ortho = _f_terms(X, psi, phi, tail_tol)
    if sd_psi <= 0:
        raise MomentError("X has zero spread in psi")
    if ortho <= 1e-14:
        raise MomentError("psi and phi are parallel")
    psi_x = shifted / sd_psi
    chi = phi.vector - psi.vector * np.vdot(psi.vector, phi.vector) - psi_x * np.vdot(psi_x, phi.vector)
    chi_norm2 = float(np.vdot(chi, chi).real)
    gram_det = float(np.linalg.det(gram_generic([psi.vector, psi_x, phi.vector])).real)

    f_psi = ov_psi ** 2 / np.sqrt(ortho)
    sd_phi, _, ov_phi, _ = _f_terms(X, phi, psi, tail_tol)
    f_phi = ov_phi ** 2 / np.sqrt(ortho) if sd_phi > 0 else 0.0
    ctx = {"observable": X.label, "states": [psi.label, phi.label]}
    return OverlapBoundReport(
        chi_norm2=chi_norm2,
        gram_det=gram_det,
        bound_squared_overlap=URVerdict("overlap_bound_squared", float(sd_psi), float(f_psi), tol, floor, ctx),
        bound_linear_overlap=URVerdict("overlap_bound_linear", float(sd_psi),
                                   float(ov_psi / np.sqrt(ortho)), tol, floor, ctx),
        product_squared_overlap=URVerdict("overlap_product_squared", float(sd_psi * sd_phi),
                                     float(f_psi * f_phi), tol, floor, ctx),
        bound_symmetrized=float(f_psi * f_phi),
    )


# ---------------------------------------------------------------------------
# name-based dispatch


@dataclass(frozen=True)
class CatalogEntry:
    func: Callable
    arity: str  # "state", "pair", "set", "even_set", "two_state", "pair_two_state"


CATALOG: dict[str, CatalogEntry] = {
    "heisenberg_kennard": CatalogEntry(heisenberg_kennard, "state"),
    "robertson_two": CatalogEntry(robertson_two, "pair"),
    "trace_two": CatalogEntry(trace_two, "pair"),
    "schrodinger_two": CatalogEntry(schrodinger_two, "pair"),
    "robertson_n": CatalogEntry(robertson_n, "set"),
    "hadamard_robertson": CatalogEntry(hadamard_robertson, "set"),
    "trace_n": CatalogEntry(trace_n, "set"),
    "trace_even": CatalogEntry(trace_even, "even_set"),
    "symplectic_invariant": CatalogEntry(symplectic_invariant_ur, "sigma"),
    "two_state_suite": CatalogEntry(two_state_suite, "two_state"),
    "schrodinger_two_state": CatalogEntry(schrodinger_two_state, "pair_two_state"),
    "principal": CatalogEntry(generate_principal_ur, "principal"),
}


def evaluate(name: str, observables: Sequence[Operator] = (), states: Sequence[QuantumState] = (),
             tol: float = SATURATION_TOL, floor: float = NUMERICAL_FLOOR,
             tail_tol: float | None = TAIL_TOL, **params) -> list[URVerdict]:
    """Evaluate a catalog relation by name; always returns a list of verdicts."""
    if name not in CATALOG:
        raise KeyError(f"unknown relation {name!r}; known: {sorted(CATALOG)}")
    entry = CATALOG[name]
    obs, sts = list(observables), list(states)
    common = {"tol": tol, "floor": floor}
    a = entry.arity
    if a == "state":
        if len(obs) == 2:
            params.setdefault("p", obs[0])
            params.setdefault("q", obs[1])
        res = entry.func(sts[0], tail_tol=tail_tol, **common, **params)
    elif a == "pair":
        _need(name, obs, 2)
        res = entry.func(obs[0], obs[1], sts[0], tail_tol=tail_tol, **common)
    elif a in ("set", "even_set"):
        res = entry.func(obs, sts[0], tail_tol=tail_tol, **common)
    elif a == "sigma":
        sigma = moment_bundle(obs or canonical_observables(sts[0]), sts[0], tail_tol=tail_tol).sigma
        res = entry.func(sigma, params.get("k", 1), **common)
    elif a == "two_state":
        res = entry.func(sts[0], sts[1], params.get("mode", 0), tail_tol=tail_tol, **common)
    elif a == "pair_two_state":
        _need(name, obs, 2)
        res = entry.func(obs[0], obs[1], sts[0], sts[1], tail_tol=tail_tol, **common)
    else:
        res = entry.func(obs, sts, tail_tol=tail_tol, **common, **params)
    return list(res) if isinstance(res, (list, tuple)) else [res]


def _need(name, obs, n):
    if len(obs) != n:
        raise MomentError(f"{name} needs exactly {n} observables, got {len(obs)}")

"""Finite-dimensional operators and states.

Truncated Fock space (one to three modes), spin-j representations of su(2),
the positive discrete series of su(1,1) truncated to ``N`` levels, and plain
``dim``-dimensional spaces for random batteries.

Canonical convention: ``q = (a + a^dagger)/sqrt(2)``, ``p = -i(a - a^dagger)/sqrt(2)``,
so ``[p, q] = -i`` away from the top Fock level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

from urlab.matkit import hermiticity_defect

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10
TAIL_TOL = 1e-12
MAX_MODES = 3
MAX_DIM = 4096
MAX_SQUEEZE = 1.5


class BasisError(ValueError):
    pass


class StateError(ValueError):
    pass


class TruncationError(StateError):
    """A Fock-space state puts non-negligible weight near the cutoff."""


@dataclass(frozen=True)
class BasisSpec:
    kind: str
    N: int = 0
    modes: int = 1
    j: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if self.kind == "fock":
            if self.N < 2:
                raise BasisError(f"Fock truncation needs N >= 2, got {self.N}")
            if not 1 <= self.modes <= MAX_MODES:
                raise BasisError(f"mode count {self.modes} outside [1, {MAX_MODES}]")
            if self.N ** self.modes > MAX_DIM:
                raise BasisError(f"dimension {self.N}^{self.modes} exceeds {MAX_DIM}")
        elif self.kind == "spin":
            twice = 2 * self.j
            if self.j <= 0 or abs(twice - round(twice)) > 1e-12:
                raise BasisError(f"spin j must be a positive half-integer, got {self.j}")
        elif self.kind == "su11":
            if self.k <= 0:
                raise BasisError(f"Bargmann index must be positive, got {self.k}")
            if self.N < 2:
                raise BasisError(f"su(1,1) truncation needs N >= 2, got {self.N}")
        elif self.kind == "generic":
            if self.N < 1:
                raise BasisError(f"generic dimension must be positive, got {self.N}")
        else:
            raise BasisError(f"unknown basis kind {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.kind == "fock":
            return self.N ** self.modes
        if self.kind == "spin":
            return int(round(2 * self.j)) + 1
        return self.N

    @property
    def truncated(self) -> bool:
        return self.kind in ("fock", "su11")

    def describe(self) -> dict:
        if self.kind == "fock":
            return {"kind": "fock", "N": self.N, "modes": self.modes}
        if self.kind == "spin":
            return {"kind": "spin", "j": str(Fraction(self.j).limit_denominator(2))}
        if self.kind == "su11":
            return {"kind": "su11", "k": self.k, "N": self.N}
        return {"kind": "generic", "dim": self.N}


def fock_basis(N: int, modes: int = 1) -> BasisSpec:
    return BasisSpec("fock", N=N, modes=modes)


def spin_basis(j) -> BasisSpec:
    return BasisSpec("spin", j=float(Fraction(j)) if isinstance(j, str) else float(j))


def su11_basis(k: float, N: int) -> BasisSpec:
    return BasisSpec("su11", N=N, k=float(k))


def generic_basis(dim: int) -> BasisSpec:
    return BasisSpec("generic", N=dim)


@dataclass(frozen=True, eq=False)
class Operator:
    basis: BasisSpec
    matrix: np.ndarray
    hermitian: bool = False
    label: str = ""

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (self.basis.dim, self.basis.dim):
            raise BasisError(f"matrix shape {M.shape} does not match basis dimension {self.basis.dim}")
        object.__setattr__(self, "matrix", M)
        if self.hermitian and hermiticity_defect(M) > HERMITIAN_TOL:
            raise BasisError(f"operator {self.label or '?'} flagged Hermitian but defect is "
                             f"{hermiticity_defect(M):.3e}")

    def _same(self, other: "Operator"):
        if self.basis != other.basis:
            raise BasisError("operators live on different bases")

    def __add__(self, other: "Operator") -> "Operator":
        self._same(other)
        return Operator(self.basis, self.matrix + other.matrix,
                        self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        self._same(other)
        return Operator(self.basis, self.matrix - other.matrix,
                        self.hermitian and other.hermitian)

    def __mul__(self, c) -> "Operator":
        c = complex(c)
        return Operator(self.basis, c * self.matrix, self.hermitian and c.imag == 0)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._same(other)
        return Operator(self.basis, self.matrix @ other.matrix)

    def dag(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, self.hermitian, self.label)

    def power(self, k: int) -> "Operator":
        return Operator(self.basis, np.linalg.matrix_power(self.matrix, k),
                        self.hermitian, f"{self.label}^{k}" if self.label else "")


def commutator(X: Operator, Y: Operator) -> Operator:
    """``XY - YX``; anti-Hermitian when both arguments are Hermitian."""
    X._same(Y)
    return Operator(X.basis, X.matrix @ Y.matrix - Y.matrix @ X.matrix,
                    label=f"[{X.label},{Y.label}]")


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure (``vector``) or mixed (``rho``) state on ``basis``."""

    basis: BasisSpec
    vector: np.ndarray | None = None
    rho: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        d = self.basis.dim
        if (self.vector is None) == (self.rho is None):
            raise StateError("give exactly one of vector or rho")
        if self.vector is not None:
            v = np.asarray(self.vector, dtype=complex).reshape(-1)
            if v.shape != (d,):
                raise StateError(f"state vector has length {v.size}, basis dimension is {d}")
            norm = np.linalg.norm(v)
            if abs(norm - 1) > NORM_TOL:
                raise StateError(f"state vector norm {norm:.12g} differs from 1")
            object.__setattr__(self, "vector", v)
        else:
            r = np.asarray(self.rho, dtype=complex)
            if r.shape != (d, d):
                raise StateError(f"density matrix shape {r.shape}, basis dimension is {d}")
            if hermiticity_defect(r) > HERMITIAN_TOL:
                raise StateError("density matrix is not Hermitian")
            tr = np.trace(r).real
            if abs(tr - 1) > NORM_TOL:
                raise StateError(f"density matrix trace {tr:.12g} differs from 1")
            if np.linalg.eigvalsh((r + r.conj().T) / 2)[0] < -1e-10:
                raise StateError("density matrix is not positive semidefinite")
            object.__setattr__(self, "rho", r)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.outer(self.vector, self.vector.conj())

    def populations(self) -> np.ndarray:
        if self.vector is not None:
            return np.abs(self.vector) ** 2
        return np.real(np.diag(self.rho))

    def top_occupancy(self) -> float:
        """Weight on the two highest levels of every truncated mode (summed over modes)."""
        if not self.basis.truncated:
            return 0.0
        N = self.basis.N
        modes = self.basis.modes if self.basis.kind == "fock" else 1
        pops = self.populations().reshape((N,) * modes)
        total = 0.0
        for ax in range(modes):
            marginal = pops.sum(axis=tuple(a for a in range(modes) if a != ax)) if modes > 1 else pops
            total += float(marginal[-2:].sum())
        return total

    def check_tail(self, tol: float | None = TAIL_TOL) -> None:
        if tol is None:
            return
        occ = self.top_occupancy()
        if occ > tol:
            raise TruncationError(f"top-level occupancy {occ:.3e} exceeds tail tolerance {tol:.1e}")

    def fidelity(self, other: "QuantumState") -> float:
        """Overlap fidelity; at least one of the states must be pure."""
        if self.is_pure and other.is_pure:
            return float(abs(np.vdot(self.vector, other.vector)) ** 2)
        if self.is_pure:
            return float(np.real(np.vdot(self.vector, other.rho @ self.vector)))
        if other.is_pure:
            return other.fidelity(self)
        raise StateError("fidelity between two mixed states is not implemented")


# ---------------------------------------------------------------------------
# operators


def _annihilation(N: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1).astype(complex)


def _embed(single: np.ndarray, mode: int, modes: int) -> np.ndarray:
    N = single.shape[0]
    out = np.ones((1, 1), dtype=complex)
    for mu in range(modes):
        out = np.kron(out, single if mu == mode else np.eye(N))
    return out


@dataclass(frozen=True)
class FockOperators:
    basis: BasisSpec
    a: list[Operator] = field(default_factory=list)
    ad: list[Operator] = field(default_factory=list)
    q: list[Operator] = field(default_factory=list)
    p: list[Operator] = field(default_factory=list)

    def canonical(self) -> list[Operator]:
        """``(p_1, ..., p_m, q_1, ..., q_m)``, the ordering used for the symplectic form."""
        return [*self.p, *self.q]


def fock_operators(N: int, modes: int = 1) -> FockOperators:
    basis = fock_basis(N, modes)
    a1 = _annihilation(N)
    q1 = (a1 + a1.conj().T) / np.sqrt(2)
    p1 = -1j * (a1 - a1.conj().T) / np.sqrt(2)
    ops = FockOperators(basis)
    for mu in range(modes):
        s = f"_{mu + 1}" if modes > 1 else ""
        ops.a.append(Operator(basis, _embed(a1, mu, modes), label=f"a{s}"))
        ops.ad.append(Operator(basis, _embed(a1.conj().T, mu, modes), label=f"a{s}^+"))
        ops.q.append(Operator(basis, _embed(q1, mu, modes), True, f"q{s}"))
        ops.p.append(Operator(basis, _embed(p1, mu, modes), True, f"p{s}"))
    return ops


def _spin_matrices(j: float):
    d = int(round(2 * j)) + 1
    m = j - np.arange(d)
    J3 = np.diag(m).astype(complex)
    # (J+)_{i-1,i} raises m_i by one
    up = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    Jp = np.diag(up, k=1).astype(complex)
    Jm = Jp.conj().T
    return (Jp + Jm) / 2, (Jp - Jm) / 2j, J3


def spin_operators(j) -> tuple[Operator, Operator, Operator]:
    """``(J1, J2, J3)`` in the basis ``|j, j>, |j, j-1>, ..., |j, -j>``."""
    basis = spin_basis(j)
    J1, J2, J3 = _spin_matrices(basis.j)
    return (Operator(basis, J1, True, "J1"), Operator(basis, J2, True, "J2"),
            Operator(basis, J3, True, "J3"))


def su11_operators(k: float, N: int) -> tuple[Operator, Operator, Operator]:
    """Quasi-spin ``(K1, K2, K3)`` for Bargmann index ``k``, truncated to ``N`` levels."""
    basis = su11_basis(k, N)
    n = np.arange(N, dtype=float)
    K3 = np.diag(k + n).astype(complex)
    Kp = np.diag(np.sqrt((n[:-1] + 1) * (2 * k + n[:-1])), k=-1).astype(complex)
    Km = Kp.conj().T
    return (Operator(basis, (Kp + Km) / 2, True, "K1"),
            Operator(basis, (Kp - Km) / 2j, True, "K2"),
            Operator(basis, K3, True, "K3"))


# ---------------------------------------------------------------------------
# states


def basis_state(basis: BasisSpec, index: int, label: str = "") -> QuantumState:
    v = np.zeros(basis.dim, dtype=complex)
    v[index] = 1
    return QuantumState(basis, v, label=label)


def fock_state(n: int | Sequence[int], N: int) -> QuantumState:
    ns = [n] if np.isscalar(n) else list(n)
    basis = fock_basis(N, len(ns))
    return basis_state(basis, int(np.ravel_multi_index(ns, (N,) * len(ns))), f"fock{ns}")


def product_state(states: Sequence[QuantumState]) -> QuantumState:
    """Tensor product of single-mode Fock states."""
    Ns = {s.basis.N for s in states}
    if len(Ns) != 1 or any(s.basis.kind != "fock" or s.basis.modes != 1 for s in states):
        raise StateError("product_state expects single-mode Fock states with a common cutoff")
    basis = fock_basis(Ns.pop(), len(states))
    if all(s.is_pure for s in states):
        v = np.ones(1, dtype=complex)
        for s in states:
            v = np.kron(v, s.vector)
        return QuantumState(basis, v / np.linalg.norm(v))
    r = np.ones((1, 1), dtype=complex)
    for s in states:
        r = np.kron(r, s.density())
    return QuantumState(basis, rho=r / np.trace(r).real)


def coherent_tail(alpha: complex, N: int) -> float:
    """Poisson weight lost by truncating ``|alpha>`` to ``N`` levels."""
    return float(poisson.sf(N - 1, abs(alpha) ** 2))


def coherent_state(alpha, N: int, tail_tol: float = TAIL_TOL) -> QuantumState:
    """Canonical coherent state; a sequence of amplitudes gives a multimode product."""
    if not np.isscalar(alpha):
        return product_state([coherent_state(a, N, tail_tol) for a in alpha])
    alpha = complex(alpha)
    tail = coherent_tail(alpha, N)
    if tail > tail_tol:
        raise TruncationError(f"coherent amplitude {alpha} loses weight {tail:.3e} at N={N}")
    n = np.arange(N)
    logmag = -abs(alpha) ** 2 / 2 - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        c = (n == 0).astype(complex)
    else:
        c = np.exp(logmag + n * np.log(abs(alpha))) * np.exp(1j * n * np.angle(alpha))
    return QuantumState(fock_basis(N), c / np.linalg.norm(c), label=f"coherent({alpha})")


def suggest_cutoff(alpha: complex = 0, zeta: complex = 0) -> int:
    """Heuristic Fock cutoff for a displaced squeezed state."""
    return int(math.ceil(max(25 * math.exp(2 * abs(zeta)), 2 * abs(alpha) ** 2 + 20)))


# grids reuse the same amplitudes many times; results are treated as read-only
@lru_cache(maxsize=64)
def _displacement(alpha: complex, M: int) -> np.ndarray:
    a = _annihilation(M)
    D = expm(alpha * a.conj().T - np.conj(alpha) * a)
    D.flags.writeable = False
    return D


@lru_cache(maxsize=64)
def _squeeze(zeta: complex, M: int) -> np.ndarray:
    a = _annihilation(M)
    ad = a.conj().T
    S = expm((np.conj(zeta) * a @ a - zeta * ad @ ad) / 2)
    S.flags.writeable = False
    return S


def _gaussian_unitary(alpha: complex, zeta: complex, M: int) -> np.ndarray:
    return _displacement(complex(alpha), M) @ _squeeze(complex(zeta), M)


def _padded(N: int) -> int:
    return max(2 * N, N + 60)


def squeezed_state(alpha, zeta, N: int, tail_tol: float = TAIL_TOL) -> QuantumState:
    """Displaced squeezed vacuum ``D(alpha) S(zeta)|0>`` truncated to ``N`` levels.

    ``S(zeta) = exp((zeta* a^2 - zeta a^dagger^2)/2)``; real ``zeta = r`` gives
    ``var(q) = exp(-2r)/2``. The exponentials are taken on a padded space and the
    weight at and above level ``N-2`` must stay below ``tail_tol``.
    Sequences of ``alpha`` and ``zeta`` give a multimode product.
    """
    if not np.isscalar(alpha) or not np.isscalar(zeta):
        alphas = [alpha] if np.isscalar(alpha) else list(alpha)
        zetas = [zeta] if np.isscalar(zeta) else list(zeta)
        if len(alphas) == 1:
            alphas = alphas * len(zetas)
        if len(zetas) == 1:
            zetas = zetas * len(alphas)
        return product_state([squeezed_state(a, z, N, tail_tol) for a, z in zip(alphas, zetas)])
    alpha, zeta = complex(alpha), complex(zeta)
    if abs(zeta) > MAX_SQUEEZE:
        raise StateError(f"|zeta| = {abs(zeta):.3g} exceeds the cap {MAX_SQUEEZE}")
    M = _padded(N)
    psi = _gaussian_unitary(alpha, zeta, M)[:, 0]
    tail = float(np.sum(np.abs(psi[N - 2:]) ** 2))
    if tail > tail_tol:
        raise TruncationError(f"squeezed state (alpha={alpha}, zeta={zeta}) has weight {tail:.3e} "
                              f"on levels >= {N - 2}; try N >= {suggest_cutoff(alpha, zeta)}")
    v = psi[:N]
    return QuantumState(fock_basis(N), v / np.linalg.norm(v), label=f"squeezed({alpha},{zeta})")


def gaussian_state(alpha: complex, zeta: complex, nbar: float, N: int,
                   tail_tol: float = TAIL_TOL) -> QuantumState:
    """Displaced squeezed thermal state with mean thermal occupation ``nbar``."""
    if nbar < 0:
        raise StateError("thermal occupation must be non-negative")
    if abs(zeta) > MAX_SQUEEZE:
        raise StateError(f"|zeta| = {abs(zeta):.3g} exceeds the cap {MAX_SQUEEZE}")
    M = _padded(N)
    U = _gaussian_unitary(complex(alpha), complex(zeta), M)
    ratio = nbar / (nbar + 1)
    w = (1 - ratio) * ratio ** np.arange(M)
    rho = (U * w) @ U.conj().T
    pops = np.real(np.diag(rho))
    tail = float(pops[N - 2:].sum())
    if tail > tail_tol:
        raise TruncationError(f"Gaussian state has weight {tail:.3e} on levels >= {N - 2}")
    r = rho[:N, :N]
    r = (r + r.conj().T) / 2
    return QuantumState(fock_basis(N), rho=r / np.trace(r).real,
                        label=f"gaussian({alpha},{zeta},{nbar})")


def spin_coherent_state(j, theta: float, phi: float) -> QuantumState:
    """``exp(-i phi J3) exp(-i theta J2) |j, j>``."""
    J1, J2, J3 = spin_operators(j)
    top = np.zeros(J3.basis.dim, dtype=complex)
    top[0] = 1
    v = expm(-1j * phi * J3.matrix) @ (expm(-1j * theta * J2.matrix) @ top)
    return QuantumState(J3.basis, v / np.linalg.norm(v), label=f"spin_coherent({theta},{phi})")


def _support_mask(basis: BasisSpec, levels: int | None) -> np.ndarray:
    if levels is None or basis.kind not in ("fock", "su11"):
        return np.ones(basis.dim, dtype=bool)
    modes = basis.modes if basis.kind == "fock" else 1
    grids = np.indices((basis.N,) * modes).reshape(modes, -1)
    return np.all(grids < levels, axis=0)


def random_state(basis: BasisSpec, rng=None, form: str = "pure", rank: int | None = None,
                 levels: int | None = None) -> QuantumState:
    """Haar-random pure state or random mixed state of given rank.

    For truncated bases ``levels`` confines the support to the lowest levels
    of each mode so that the state clears the tail gate.
    """
    rng = np.random.default_rng(rng)
    mask = _support_mask(basis, levels)
    support = int(mask.sum())

    def draw():
        v = np.zeros(basis.dim, dtype=complex)
        v[mask] = rng.standard_normal(support) + 1j * rng.standard_normal(support)
        return v

    if form == "pure":
        v = draw()
        return QuantumState(basis, v / np.linalg.norm(v), label="random_pure")
    if form != "mixed":
        raise StateError(f"unknown state form {form!r}")
    rank = support if rank is None else rank
    if not 1 <= rank <= support:
        raise StateError(f"rank {rank} outside [1, {support}]")
    V = np.stack([draw() for _ in range(rank)], axis=1)
    rho = V @ V.conj().T
    rho = (rho + rho.conj().T) / 2
    return QuantumState(basis, rho=rho / np.trace(rho).real, label=f"random_mixed(rank={rank})")


def random_hermitian(basis: BasisSpec, rng=None, label: str = "") -> Operator:
    rng = np.random.default_rng(rng)
    d = basis.dim
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return Operator(basis, (Z + Z.conj().T) / 2, True, label)

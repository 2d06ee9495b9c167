import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from urlab import hilbert, relations
from urlab.moments import MomentError, moment_bundle
from urlab.relations import evaluate

seeds = st.integers(0, 2**32 - 1)
N = 30


@pytest.fixture(scope="module")
def pq():
    ops = hilbert.fock_operators(N)
    return ops.p[0], ops.q[0]


@pytest.fixture(scope="module")
def vacuum():
    return hilbert.fock_state(0, N)


@pytest.mark.parametrize("name", ["heisenberg_kennard", "robertson_two", "trace_two",
                                  "schrodinger_two", "robertson_n", "hadamard_robertson",
                                  "trace_n", "trace_even"])
def test_vacuum_saturates(name, pq, vacuum):
    (v,) = evaluate(name, pq, [vacuum])
    assert abs(v.margin) <= 1e-12
    assert v.saturated and v.holds


def test_fock_one_heisenberg_margin(pq):
    v = relations.heisenberg_kennard(hilbert.fock_state(1, N))
    assert (v.lhs, v.rhs) == pytest.approx((2.25, 0.25))
    assert v.margin == pytest.approx(2.0)


@pytest.mark.parametrize("alpha", [0.5, 1 - 1j, 2j])
def test_coherent_saturates_trace_and_product(alpha):
    psi = hilbert.coherent_state(alpha, 40)
    p, q = relations.canonical_pair(psi)
    assert abs(relations.trace_two(p, q, psi).margin) <= 1e-10
    assert abs(relations.heisenberg_kennard(psi).margin) <= 1e-10


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_squeezing_breaks_trace_saturation(r):
    psi = hilbert.squeezed_state(0.5, r, 120)
    p, q = relations.canonical_pair(psi)
    assert relations.trace_two(p, q, psi).margin == pytest.approx(np.cosh(2 * r) - 1, abs=1e-9)
    assert relations.schrodinger_two(p, q, psi).saturated


def _random(seed, d, n, form="pure"):
    rng = np.random.default_rng(seed)
    basis = hilbert.generic_basis(d)
    Xs = [hilbert.random_hermitian(basis, rng, f"X{i}") for i in range(n)]
    return Xs, hilbert.random_state(basis, rng, form), hilbert.random_state(basis, rng, form)


@given(seeds, st.integers(2, 8), st.sampled_from(["pure", "mixed"]))
def test_pair_relations_hold_and_are_ordered(seed, d, form):
    (X, Y), psi, _ = _random(seed, d, 2, form)
    rob = relations.robertson_two(X, Y, psi, tail_tol=None)
    sch = relations.schrodinger_two(X, Y, psi, tail_tol=None)
    tr = relations.trace_two(X, Y, psi, tail_tol=None)
    assert rob.holds and sch.holds and tr.holds
    # the covariance term only tightens the product bound
    assert sch.margin <= rob.margin + 1e-12


@given(seeds, st.integers(2, 8))
def test_determinant_form_matches_pair_form(seed, d):
    (X, Y), psi, _ = _random(seed, d, 2)
    det_form = relations.robertson_n([X, Y], psi, tail_tol=None)
    pair_form = relations.schrodinger_two(X, Y, psi, tail_tol=None)
    assert det_form.lhs == pytest.approx(pair_form.lhs, rel=1e-10, abs=1e-12)
    assert det_form.rhs == pytest.approx(pair_form.rhs, rel=1e-10, abs=1e-12)
    tr_n = relations.trace_n([X, Y], psi, tail_tol=None)
    tr_2 = relations.trace_two(X, Y, psi, tail_tol=None)
    assert (tr_n.lhs, tr_n.rhs) == pytest.approx((tr_2.lhs, tr_2.rhs), rel=1e-12)


@given(seeds, st.integers(2, 8), st.integers(2, 4), st.sampled_from(["pure", "mixed"]))
def test_set_relations_hold(seed, d, n, form):
    Xs, psi, _ = _random(seed, d, n, form)
    rob = relations.robertson_n(Xs, psi, tail_tol=None)
    had = relations.hadamard_robertson(Xs, psi, tail_tol=None)
    assert rob.holds and had.holds and relations.trace_n(Xs, psi, tail_tol=None).holds
    assert had.lhs >= rob.lhs - 1e-12
    if n % 2 == 0:
        assert relations.trace_even(Xs, psi, tail_tol=None).holds
    else:
        assert abs(rob.rhs) <= 1e-12


def test_trace_even_rejects_odd():
    Xs, psi, _ = _random(0, 4, 3)
    with pytest.raises(MomentError):
        relations.trace_even(Xs, psi, tail_tol=None)


def test_spin_half_trace_n():
    J = hilbert.spin_operators(0.5)
    up = hilbert.basis_state(J[0].basis, 0)
    v = relations.trace_n(list(J), up)
    # variances 1/4, 1/4, 0; only |<[J1,J2]>| = |<J3>| = 1/2 survives, divided by n-1 = 2
    assert (v.lhs, v.rhs) == pytest.approx((0.5, 0.25), abs=1e-12)
    v = relations.trace_n(list(J), hilbert.spin_coherent_state(0.5, np.pi / 2, 0))
    assert (v.lhs, v.rhs) == pytest.approx((0.5, 0.25))


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_symplectic_trace_vacuum(m, k):
    psi = hilbert.fock_state([0] * m, 10)
    sigma = moment_bundle(relations.canonical_observables(psi), psi).sigma
    v = relations.symplectic_invariant_ur(sigma, k)
    assert v.lhs == pytest.approx(m / 2 ** (2 * k - 1), abs=1e-12)
    assert v.saturated


def test_symplectic_trace_thermal_exceeds_bound():
    rho = hilbert.gaussian_state(0, 0, 0.4, 30)
    v = evaluate("symplectic_invariant", [], [rho], k=1)[0]
    # sigma = (nbar + 1/2) I, so Tr[(i sigma J)^2] = 2 (nbar + 1/2)^2
    assert v.lhs == pytest.approx(2 * 0.9**2, abs=1e-10)
    assert v.margin > 0


def test_two_state_suite_equal_states():
    psi = hilbert.squeezed_state(0.4, 0.3 + 0.2j, 60)
    p, q = relations.canonical_pair(psi)
    tr, heis, sch = relations.two_state_suite(psi, psi)
    hk = relations.heisenberg_kennard(psi)
    s2 = relations.schrodinger_two(q, p, psi)
    assert tr.lhs == pytest.approx(2 * np.sqrt(hk.lhs), abs=1e-12)
    assert (heis.lhs, heis.rhs) == pytest.approx((2 * hk.lhs, 2 * hk.rhs), abs=1e-12)
    assert (sch.lhs, sch.rhs) == pytest.approx((2 * s2.lhs, 2 * s2.rhs), abs=1e-12)


def test_two_state_trace_equals_sum_of_variances_when_balanced():
    psi = hilbert.coherent_state(0.7, 30)
    p, q = relations.canonical_pair(psi)
    tr, _, _ = relations.two_state_suite(psi, psi)
    assert tr.lhs == pytest.approx(relations.trace_two(p, q, psi).lhs, abs=1e-12)


@given(seeds, st.integers(0, 8), st.integers(0, 8))
def test_two_state_suite_on_fock_pairs(seed, n1, n2):
    tr, heis, sch = relations.two_state_suite(hilbert.fock_state(n1, 14), hilbert.fock_state(n2, 14))
    assert tr.holds and heis.holds and sch.holds


@given(seeds, st.integers(2, 6))
def test_two_state_schrodinger_matches_principal_sum(seed, d):
    (X, Y), psi, phi = _random(seed, d, 2)
    direct = relations.schrodinger_two_state(X, Y, psi, phi, tail_tol=None)
    via = [v for v in relations.generate_principal_ur([X, Y], [psi, phi], align=True, tail_tol=None)
           if v.name == "lemma_minor_sum"][0]
    assert direct.holds
    scale = max(1.0, abs(direct.lhs))
    assert abs(direct.margin - via.margin) <= 1e-12 * scale


@given(seeds, st.integers(2, 6), st.integers(2, 4), st.integers(1, 3))
def test_principal_ur_holds(seed, d, n, m):
    rng = np.random.default_rng(seed)
    basis = hilbert.generic_basis(d)
    Xs = [hilbert.random_hermitian(basis, rng) for _ in range(n)]
    states = [hilbert.random_state(basis, rng) for _ in range(m)]
    verdicts = relations.generate_principal_ur(Xs, states, tail_tol=None)
    verdicts += relations.generate_principal_ur(Xs, states, r=n - 1, trace_bounds=False, tail_tol=None)
    assert all(v.holds for v in verdicts)
    assert all(v.context["type"] == [n, m] for v in verdicts)


def test_principal_ur_single_state_is_robertson():
    Xs, psi, _ = _random(5, 6, 3)
    split = relations.generate_principal_ur(Xs, [psi], tail_tol=None)[0]
    rob = relations.robertson_n(Xs, psi, tail_tol=None)
    assert split.lhs == pytest.approx(rob.lhs, rel=1e-10)
    assert split.rhs == pytest.approx(rob.rhs, abs=1e-12)


def test_principal_ur_higher_order():
    Xs, psi, phi = _random(6, 6, 2)
    verdicts = relations.generate_principal_ur(Xs, [psi, phi], k=2, tail_tol=None)
    assert all(v.holds for v in verdicts) and verdicts[0].context["k"] == 2


def test_fleming_report(rng):
    basis = hilbert.generic_basis(5)
    X = hilbert.random_hermitian(basis, rng)
    psi = hilbert.random_state(basis, rng)
    phi = hilbert.random_state(basis, rng)
    rep = relations.overlap_bound(X, psi, phi, tail_tol=None)
    assert rep.chi_norm2 >= -1e-12
    assert rep.gram_det >= -1e-12
    assert rep.bound_linear_overlap.holds
    with pytest.raises(MomentError):
        relations.overlap_bound(X, psi, psi, tail_tol=None)


def test_evaluate_dispatch(pq, vacuum):
    assert [v.name for v in evaluate("two_state_suite", [], [vacuum, vacuum])] == [
        "two_state_trace", "two_state_heisenberg", "two_state_schrodinger"]
    with pytest.raises(KeyError):
        evaluate("nope", pq, [vacuum])
    with pytest.raises(MomentError):
        evaluate("schrodinger_two", pq[:1], [vacuum])


def test_squeezed_grid_saturates_with_adequate_cutoff():
    # the full displaced squeezed grid needs about 140 levels before the top-level weight drops below 1e-12
    N = 140
    p, q = relations.canonical_pair(hilbert.fock_state(0, N))
    phases = np.linspace(0, 2 * np.pi, 4, endpoint=False)
    for r in (0.1, 0.5, 1.0):
        for ph in phases:
            for a in [0] + [2 * np.exp(1j * t) for t in phases]:
                psi = hilbert.squeezed_state(a, r * np.exp(1j * ph), N)
                assert abs(relations.schrodinger_two(p, q, psi).margin) <= 1e-7
                assert abs(relations.robertson_n([p, q], psi).margin) <= 1e-7

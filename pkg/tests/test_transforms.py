import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from urlab import hilbert, relations, transforms
from urlab.moments import moment_bundle
from urlab.transforms import LinearMap, TransformError

seeds = st.integers(0, 2**32 - 1)


def test_symplectic_form_layout():
    J = transforms.symplectic_form(2)
    assert J[0, 2] == 1 and J[2, 0] == -1 and J[1, 3] == 1
    np.testing.assert_allclose(J @ J, -np.eye(4))


def test_rotation_is_orthogonal_and_symplectic():
    L = transforms.rotation2(0.3)
    assert L.is_orthogonal() and L.is_symplectic()
    assert L.det == pytest.approx(1.0)


def test_scale_map():
    L = transforms.scale_map([2.0], 2)
    np.testing.assert_allclose(L.lam, np.diag([0.5, 2.0]))
    assert L.is_symplectic() and not L.is_orthogonal()
    with pytest.raises(TransformError):
        transforms.scale_map([1.0, 2.0], 3)


@given(seeds, st.integers(1, 6))
def test_random_map_classes(seed, m):
    n = 2 * m
    assert transforms.random_maps("orthogonal", n, seed).is_orthogonal(1e-10)
    assert transforms.random_maps("symplectic", n, seed).is_symplectic(1e-9)
    assert transforms.random_maps("gl", n, seed).invertible


def test_bad_maps():
    with pytest.raises(TransformError):
        LinearMap(np.ones((2, 3)))
    with pytest.raises(TransformError):
        transforms.random_maps("symplectic", 3)
    with pytest.raises(TransformError):
        transforms.apply_linear(LinearMap(np.zeros((2, 2))), hilbert.fock_operators(4).canonical())


@given(seeds, st.integers(2, 6), st.integers(1, 4), st.sampled_from(["pure", "mixed"]))
def test_transform_sigma_matches_recomputed_moments(seed, d, n, form):
    rng = np.random.default_rng(seed)
    basis = hilbert.generic_basis(d)
    Xs = [hilbert.random_hermitian(basis, rng) for _ in range(n)]
    psi = hilbert.random_state(basis, rng, form)
    L = transforms.random_maps("gl", n, rng)
    before = moment_bundle(Xs, psi, tail_tol=None)
    after = moment_bundle(transforms.apply_linear(L, Xs), psi, tail_tol=None)
    np.testing.assert_allclose(transforms.transform_sigma(L, before.sigma), after.sigma, atol=1e-10)
    np.testing.assert_allclose(transforms.transform_sigma(L, before.commutators),
                               after.commutators, atol=1e-10)


def test_rotation_changes_product_but_not_covariance_corrected_bound():
    psi = hilbert.squeezed_state(0, 0.5, 60)
    pq = relations.canonical_pair(psi)
    rotated = transforms.apply_linear(transforms.rotation2(np.pi / 4), pq)
    hk = relations.heisenberg_kennard(psi, *rotated)
    assert hk.margin == pytest.approx(np.sinh(1.0) ** 2 / 4, abs=1e-9)
    assert relations.schrodinger_two(*rotated, psi).saturated


def test_invariance_report_robertson_on_squeezed():
    psi = hilbert.squeezed_state(0.2, 0.4, 60)
    Xs = relations.canonical_pair(psi)
    rng = np.random.default_rng(1)
    maps = [transforms.random_maps("gl", 2, rng) for _ in range(20)]
    rep = transforms.invariance_report("robertson_n", Xs, psi, maps)
    assert rep.base_saturated and rep.passed
    assert rep.checks["margin_sign_preserved"] and rep.checks["saturation_preserved"]


def test_invariance_report_trace_and_symplectic():
    psi = hilbert.coherent_state([0.3, -0.2j], 20)
    Xs = relations.canonical_observables(psi)
    orth = [transforms.random_maps("orthogonal", 4, s) for s in range(5)]
    assert transforms.invariance_report("trace_n", Xs, psi, orth).checks == {
        "orthogonal_lhs_preserved": True}
    sym = [transforms.random_maps("symplectic", 4, s) for s in range(5)]
    rep = transforms.invariance_report("symplectic_invariant", Xs, psi, sym)
    assert rep.checks == {"symplectic_lhs_preserved": True}


def test_invariance_report_hadamard_scale():
    psi = hilbert.squeezed_state(0, 0.3, 60)
    Xs = relations.canonical_pair(psi)
    rep = transforms.invariance_report("hadamard_robertson", Xs, psi, [transforms.scale_map([1.7], 2)])
    assert rep.checks == {"scale_value_preserved": True}
    with pytest.raises(TransformError):
        transforms.invariance_report("heisenberg_kennard", Xs, psi, [])

import numpy as np
import pytest

from urlab import hilbert, search
from urlab.search import StateFamily


def test_coherent_scan_saturates():
    fam = StateFamily("coherent", N=40, alphas=[0, 1, 1j, 1.5 - 1j])
    rep = search.saturation_scan(fam, "trace_two")
    assert rep.passed and len(rep.rows) == 4


def test_squeezed_scan_misses_trace_but_saturates_schrodinger():
    fam = StateFamily("squeezed", N=80, alphas=[0, 0.5], zetas=[0.2, 0.3j])
    assert search.saturation_scan(fam, "schrodinger_two").passed
    rep = search.saturation_scan(fam, "trace_two")
    assert not rep.passed and rep.min_margin > 0


def test_spin_coherent_scan():
    fam = StateFamily("spin_coherent", j=1.5, thetas=np.linspace(0, np.pi, 5),
                      phis=np.linspace(0, np.pi, 4))
    assert search.saturation_scan(fam, "schrodinger_two").passed


def test_empty_scan_passes():
    rep = search.saturation_scan(StateFamily("coherent", N=10, alphas=[]), "trace_two")
    assert rep.passed and rep.rows == []


def test_family_validation():
    with pytest.raises(ValueError):
        StateFamily("banana")
    with pytest.raises(ValueError):
        StateFamily("generic", levels=3).state(np.ones(5))
    assert StateFamily("generic", levels=4).N == 6


def test_generic_family_state_support():
    fam = StateFamily("generic", levels=3)
    psi = fam.state(np.arange(1.0, 7.0))
    assert psi.top_occupancy() == 0.0
    np.testing.assert_allclose(np.abs(psi.vector[:3]) ** 2,
                               np.array([1 + 4, 9 + 16, 25 + 36]) / 91)


def test_minimizer_contract():
    fam = StateFamily("generic", levels=4)
    x0 = np.random.default_rng(2).standard_normal(8)
    a = search.minimize_ur("trace_two", None, fam, x0, budget=400, seed=3)
    b = search.minimize_ur("trace_two", None, fam, x0, budget=400, seed=3)
    assert a.best_margin <= a.start_margin
    assert a.n_evals == len(a.trace) <= 400
    assert a.trace[0] == a.start_margin
    assert a.best_margin == min(a.trace)
    assert a.trace == b.trace
    np.testing.assert_array_equal(a.best_params, b.best_params)


def test_minimizer_reports_budget_exhaustion():
    fam = StateFamily("generic", levels=4)
    res = search.minimize_ur("trace_two", None, fam, np.ones(8), budget=20)
    assert res.status in ("budget_exhausted", "no_improvement")
    assert res.n_evals == 20


def test_minimizer_rejects_bad_start():
    with pytest.raises(ValueError):
        search.minimize_ur("trace_two", None, StateFamily("generic", levels=2), np.zeros(4))


def test_coherent_fidelity_recovers_amplitude():
    psi = hilbert.coherent_state(0.6 - 0.4j, 30)
    fid, alpha = search.coherent_fidelity(psi)
    assert fid == pytest.approx(1.0, abs=1e-10)
    assert alpha == pytest.approx(0.6 - 0.4j, abs=1e-5)

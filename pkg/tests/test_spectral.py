import numpy as np
import pytest

from latspec import spectral
from latspec.errors import WindowError
from latspec.lattice import build_chain
from latspec.operator import assemble
from latspec.potentials import (
    AndersonPotential,
    FreePotential,
    RandomDecayingPotential,
    TablePotential,
)


def _atomic_op(e0=0.3):
    dom = build_chain(1)
    return assemble(dom, TablePotential({(1,): e0}))


def _random_op(rng, n):
    dom = build_chain(n)
    return assemble(dom, AndersonPotential(width=2.0, seed=int(rng.integers(2 ** 31))))


def _random_probe(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_resolvent_one_site_closed_form():
    op = _atomic_op(0.7)
    theta = spectral.resolvent_solve(op, 0.7 + 1j, np.array([2.0]))
    # (v - z)^{-1} phi = phi / (-i) = i phi ... here -1j * 2 is (h-z)=-i
    assert abs(theta[0] - 2.0 * 1j) < 1e-12


def test_resolvent_matches_dense_oracle():
    rng = np.random.default_rng(10)
    op = _random_op(rng, 100)
    phi = _random_probe(rng, 100)
    z = 0.3 + 0.01j
    theta = spectral.resolvent_solve(op, z, phi)
    oracle = np.linalg.solve(op.dense() - z * np.eye(100), phi)
    assert np.linalg.norm(theta - oracle) <= 1e-8 * np.linalg.norm(oracle)


def test_resolvent_free_three_site_delta_probe():
    dom = build_chain(3)
    op = assemble(dom, FreePotential())
    phi = np.array([0.0, 1.0, 0.0])
    theta = spectral.resolvent_solve(op, 1j, phi)
    oracle = np.linalg.solve(op.dense() - 1j * np.eye(3), phi)
    assert np.allclose(theta, oracle, atol=1e-12)
    # (h - i)^{-1} symmetry: components 1 and 3 equal
    assert abs(theta[0] - theta[2]) < 1e-12


def test_resolvent_requires_complex_shift_and_probe():
    op = _atomic_op()
    with pytest.raises(ValueError):
        spectral.resolvent_solve(op, 0.5, np.array([1.0]))
    with pytest.raises(ValueError):
        spectral.resolvent_solve(op, 1j, np.array([0.0]))


def test_identity_residual_diagonal_exact():
    op = _atomic_op(-0.2)
    for eps in (1.0, 1e-2):
        res = spectral.resolvent_identity_residual(op, -0.2 + eps * 1j, np.array([1.5]))
        assert res < 1e-12


def test_identity_residual_randomized():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(5, 120))
        op = _random_op(rng, n)
        e = rng.uniform(*op.bounds)
        eps = 10 ** rng.uniform(-3, 0)
        phi = _random_probe(rng, n)
        worst = max(worst, spectral.resolvent_identity_residual(op, e + 1j * eps, phi))
    assert worst <= 1e-9


def test_finite_measure_three_site_chain():
    dom = build_chain(3)
    op = assemble(dom, FreePotential())
    phi = np.array([0.0, 1.0, 0.0])
    m = spectral.finite_spectral_measure(op, phi)
    assert np.allclose(m.eigenvalues, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)
    assert np.allclose(m.weights, [0.5, 0.0, 0.5], atol=1e-12)
    assert abs(m.total_mass - 1.0) < 1e-10


def test_finite_measure_eigenvector_probe():
    rng = np.random.default_rng(12)
    op = _random_op(rng, 40)
    evals, vecs = np.linalg.eigh(op.dense())
    m = spectral.finite_spectral_measure(op, vecs[:, 7])
    assert abs(m.weights[7] - 1.0) < 1e-10
    assert abs(m.total_mass - 1.0) < 1e-10
    mask = np.ones(40, dtype=bool)
    mask[7] = False
    assert np.all(m.weights[mask] < 1e-18)


def test_finite_measure_budget():
    rng = np.random.default_rng(13)
    op = _random_op(rng, 30)
    with pytest.raises(ValueError, match="budget"):
        spectral.finite_spectral_measure(op, np.ones(30), budget=10)


def test_sum_rule_resolvent_vs_eigendecomposition():
    rng = np.random.default_rng(14)
    op = _random_op(rng, 200)
    phi = np.zeros(200)
    phi[0] = 1.0
    m = spectral.finite_spectral_measure(op, phi)
    for eps in (0.5, 0.05, 0.005):
        f = spectral.borel_value(op, phi, 0.1 + 1j * eps)
        ref = m.im_borel(0.1, eps)
        assert abs(f.imag - ref) <= 1e-8 * ref


def test_borel_sweep_atomic_closed_form():
    op = _atomic_op(0.4)
    phi = np.array([1.0])
    sweep = spectral.borel_sweep(op, phi, 0.4, eps_max=1.0, eps_min=1e-4)
    assert np.allclose(sweep.im_f, 1.0 / sweep.eps, rtol=1e-10)
    assert abs(sweep.sigma - 1.0) < 1e-10
    assert abs(sweep.sigma_lower - 1.0) < 1e-10
    assert abs(sweep.sigma_upper - 1.0) < 1e-10
    assert np.allclose(sweep.q_values(1.0), 1.0, rtol=1e-10)


def test_borel_sweep_invariants_random():
    rng = np.random.default_rng(15)
    op = _random_op(rng, 300)
    phi = np.zeros(300)
    phi[10] = 1.0
    sweep = spectral.borel_sweep(op, phi, 0.0, eps_max=1.0)
    assert np.all(sweep.im_f > 0.0)  # Herglotz
    assert np.all(sweep.eps * sweep.im_f <= 1.0 + 1e-9)  # mass bound
    lo, hi = sweep.window
    assert lo >= sweep.guard
    assert hi <= sweep.eps[0] / 4.0


def test_borel_sweep_empty_window():
    # two levels far apart: spacing O(1), so a tiny eps grid has no window
    op = _random_op(np.random.default_rng(16), 2)
    phi = np.array([1.0, 0.5])
    with pytest.raises(WindowError):
        spectral.borel_sweep(op, phi, 0.0, eps_grid=np.array([1e-3, 1e-4]))


def test_upper_alpha_derivative_atomic():
    op = _atomic_op(0.0)
    m = spectral.finite_spectral_measure(op, np.array([1.0]))
    est0 = spectral.upper_alpha_derivative(m, 0.0, 0.0, delta_max=1.0)
    assert abs(est0.value - 1.0) < 1e-12
    est_half = spectral.upper_alpha_derivative(m, 0.0, 0.5, delta_max=1.0)
    # mass/delta^(1/2) grows without bound as delta shrinks: max at delta_min
    inw = est_half.deltas[est_half.in_window]
    assert est_half.delta_at_max == inw.min()
    ratios = est_half.ratios[est_half.in_window]
    assert np.all(np.diff(ratios) > 0)  # growth across the window


def test_upper_alpha_derivative_free_chain_density():
    # D^1 at the band center approaches twice the a.c. density 1/pi.
    dom = build_chain(500)
    op = assemble(dom, FreePotential())
    phi = np.zeros(500)
    phi[0] = 1.0
    m = spectral.finite_spectral_measure(op, phi)
    est = spectral.upper_alpha_derivative(m, 0.0, 1.0, delta_max=1.0)
    assert abs(est.value - 2.0 / np.pi) < 0.06


def test_estimate_local_spacing_routes():
    rng = np.random.default_rng(17)
    op = _random_op(rng, 60)
    m = spectral.finite_spectral_measure(op, np.ones(60))
    s_measure = spectral.estimate_local_spacing(op, 0.0, measure=m)
    s_direct = spectral.estimate_local_spacing(op, 0.0)
    assert s_measure > 0 and s_direct > 0
    assert abs(s_measure - s_direct) < 1e-9
    # atom has no discreteness scale
    assert spectral.estimate_local_spacing(_atomic_op(), 0.0) == 0.0

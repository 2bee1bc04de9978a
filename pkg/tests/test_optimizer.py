import numpy as np
import pytest

from distsense import bounds
from distsense.errors import InvalidArgument
from distsense.fisher import qfim_finite_difference, qfim_pure
from distsense.gaussian_core import GaussianState, apply_symplectic, beam_splitter, squeezer, vacuum
from distsense.optimizer import (
    TwoModeParams,
    _Problem,
    effective_theta,
    minimize_two_mode,
    probe_moments,
    sweep_ratio,
)
from distsense.schemes import CustomTwoMode, SchemeSpec, build_probe

from conftest import FIG3_N_TOTAL, FIG3_WEIGHTS
from helpers import FockTwoMode


def _fold(theta):
    """Distance of ``theta`` from the nearest multiple of pi/2."""
    t = np.mod(theta, np.pi / 2)
    return min(t, np.pi / 2 - t)


def test_parametrisation_enforces_energy(rng):
    for ratio in (0.0, 0.3, 1.0):
        prob = _Problem([0.6, -0.4], 7.0, ratio)
        for _ in range(20):
            p = prob.params(rng.uniform(-5, 5, prob.dim))
            assert p.n_squeeze == pytest.approx(ratio * 7.0, abs=1e-8)
            assert p.n_displace == pytest.approx((1 - ratio) * 7.0, abs=1e-8)
    assert _Problem([0.6, -0.4], 7.0, 1.0).dim == 4
    assert _Problem([0.6, -0.4], 7.0, 0.0).dim == 4
    assert _Problem([0.6, -0.4], 7.0, 0.5).dim == 7


def test_problem_validation():
    with pytest.raises(InvalidArgument):
        _Problem([1.0, 1.0, 1.0], 1.0, 0.5)
    with pytest.raises(InvalidArgument):
        _Problem([1.0, -1.0], 1.0, 1.5)
    with pytest.raises(InvalidArgument):
        _Problem([1.0, -1.0], 0.0, 0.5)


def test_probe_moments_match_custom_scheme():
    p = TwoModeParams(0.4, 0.7, 0.3, -1.2, 0.8, 0.5, 1.1, 2.0, 0.45)
    gamma, d = probe_moments(p)
    custom = CustomTwoMode(p.r1, p.varphi1, p.r2, p.varphi2, p.a1_mag * np.exp(1j * p.a1_arg),
                           p.a2_mag * np.exp(1j * p.a2_arg), p.theta)
    probe = build_probe(SchemeSpec("custom-two-mode", [0.5, -0.5], custom_params=custom))
    np.testing.assert_allclose(gamma, probe.gamma, atol=1e-12)
    np.testing.assert_allclose(d, probe.d, atol=1e-12)


def test_displaced_qfim_against_oracles():
    """The displacement term of the QFIM is only exercised here and by the optimiser."""
    p = TwoModeParams(0.35, 0.2, 0.4, 1.0, 0.9, 0.3, 0.6, -1.1, 0.7)
    gamma, d = probe_moments(p)
    state = GaussianState(gamma, d)
    h = qfim_pure(state).h
    np.testing.assert_allclose(qfim_finite_difference(state, 1e-3), h, rtol=1e-3, atol=1e-3 * np.abs(h).max())
    fock = FockTwoMode(40)
    psi = fock.squeeze(fock.vac, 0, p.r1, p.varphi1)
    psi = fock.displace(psi, 0, p.a1_mag * np.exp(1j * p.a1_arg))
    psi = fock.squeeze(psi, 1, p.r2, p.varphi2)
    psi = fock.displace(psi, 1, p.a2_mag * np.exp(1j * p.a2_arg))
    # exp[i theta (a1 a2^dag - a1^dag a2)] is the splitter with angle -theta
    psi = fock.split(psi, -p.theta)
    _, cov = fock.moments(psi)
    np.testing.assert_allclose(h, 4 * cov, rtol=1e-7, atol=1e-9)


def test_effective_theta():
    product = apply_symplectic(apply_symplectic(vacuum(2), squeezer(0.5, 0.0, 0, 2)), squeezer(0.2, 0.4, 1, 2))
    assert effective_theta(product.gamma) == 0.0
    # identical inputs: the splitter acts trivially whatever its angle
    twins = apply_symplectic(apply_symplectic(vacuum(2), squeezer(0.5, 0.0, 0, 2)), squeezer(0.5, 0.0, 1, 2))
    assert effective_theta(apply_symplectic(twins, beam_splitter(0.6, 0, 1, 2)).gamma) == 0.0
    mixed = apply_symplectic(product, beam_splitter(0.3, 0, 1, 2))
    assert abs(effective_theta(mixed.gamma)) == pytest.approx(0.3, abs=1e-6)


def test_all_squeezing_endpoint():
    res = minimize_two_mode([0.5, -0.5], 10.0, 1.0)
    assert res.qcrb == pytest.approx(0.0020833333333333, rel=1e-6)
    assert res.qcrb == pytest.approx(bounds.proposed_bound([0.5, -0.5], 10.0), rel=1e-6)
    assert _fold(res.theta_effective) < 1e-4
    assert res.converged


def test_all_displacement_endpoint():
    res = minimize_two_mode([0.5, -0.5], 10.0, 0.0)
    assert res.qcrb == pytest.approx(0.025, rel=1e-6)


@pytest.mark.parametrize("w", [(0.7, -0.3), (0.2, -0.8)])
def test_optimum_never_beats_proposed_bound(w):
    res = minimize_two_mode(w, 4.0, 1.0, n_restarts=8)
    assert res.qcrb >= bounds.proposed_bound(w, 4.0) * (1 - 1e-6)


def test_sweep_is_deterministic_and_ordered():
    grid = [0.0, 0.5, 1.0]
    a = sweep_ratio([0.5, -0.5], 10.0, grid, n_restarts=4, workers=1)
    b = sweep_ratio([0.5, -0.5], 10.0, grid, n_restarts=4, workers=2)
    assert [r.ratio for r in a] == grid
    assert [r.qcrb for r in a] == [r.qcrb for r in b]
    assert a[0].qcrb > a[1].qcrb > a[2].qcrb


def test_sweep_validation():
    with pytest.raises(InvalidArgument):
        sweep_ratio([0.5, -0.5], 10.0, [0.5, 0.2])
    with pytest.raises(InvalidArgument):
        sweep_ratio([0.5, -0.5], 10.0, [0.5, 1.2])


@pytest.mark.parametrize("w", FIG3_WEIGHTS)
def test_restart_robustness(fig3_sweeps, w):
    rows, _ = fig3_sweeps
    for row in rows[w]:
        vals = np.array(row.restart_values)
        close = np.abs(vals - row.qcrb) <= 1e-5 * row.qcrb
        assert close.sum() >= 12, f"ratio {row.ratio}: only {close.sum()} of {vals.size} restarts agree"


@pytest.mark.parametrize("w", FIG3_WEIGHTS)
def test_sweep_monotone_with_correct_endpoints(fig3_sweeps, w):
    rows, _ = fig3_sweeps
    q = [r.qcrb for r in rows[w]]
    assert all(b <= a for a, b in zip(q, q[1:]))
    assert q[0] == pytest.approx(1 / (4 * FIG3_N_TOTAL), rel=1e-5)
    assert q[-1] == pytest.approx(bounds.proposed_bound(w, FIG3_N_TOTAL), rel=1e-5)
    assert all(r.converged for r in rows[w])

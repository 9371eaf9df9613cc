"""
End-to-end checks on the reference croissant: shooting, closing and the
invariants of the three homoclinic trajectories.
"""

import numpy as np
import pytest

from dynamics.homoclinic_finder import HomoclinicFinder
from dynamics.invariants import assemble_invariants, compute_action, fit_g_vectors, jacobian_limit
from dynamics.flow import Trajectory
from dynamics.non_return import sample_non_return
from dynamics.potential import PotentialSpec
from errors import NoneFound, ValidationError

pytestmark = pytest.mark.slow

MASLOV = [1, 0, 1]


@pytest.fixture(scope="module")
def candidates():
    return HomoclinicFinder(PotentialSpec.reference()).find(241)


@pytest.fixture(scope="module")
def invariants(candidates):
    spec = PotentialSpec.reference()
    return assemble_invariants(spec, [c.trajectory for c in candidates], MASLOV)


def test_three_homoclinics_in_order(candidates):
    assert len(candidates) == 3, f"found {len(candidates)}"
    assert [c.trajectory.label for c in candidates] == ['gamma1', 'gamma2', 'gamma3']
    us = [c.u for c in candidates]
    assert us[0] < 0 < us[2] and abs(us[1]) < 1e-12, f"shooting parameters {us}"
    assert abs(us[0] + us[2]) < 1e-6 * abs(us[2])


def test_axis_orbit_stays_on_axis(candidates):
    axis = candidates[1].trajectory
    assert np.max(np.abs(axis.positions[:, 1])) < 1e-12
    assert axis.positions[0, 0] > 0 and axis.positions[-1, 0] > 0


def test_closing_diagnostics(candidates, reference_potential):
    for c in candidates:
        assert c.mismatch < 1e-8, f"{c.trajectory.label}: mismatch {c.mismatch:.2e}"
        assert c.transversality >= 1e-3, f"{c.trajectory.label}: angle {c.transversality:.2e}"
        assert c.trajectory.max_energy_error(reference_potential) < 1e-8


def test_continued_return_retraces_outgoing_leg(candidates):
    """Integrating on from the brake point follows the reversed outgoing leg."""
    finder = HomoclinicFinder(PotentialSpec.reference())
    for c in candidates:
        shot, sol = finder.shoot(c.u, finder.refine_tol, dense_output=True)
        assert finder.return_mismatch(shot, sol) < finder.match_tol, c.trajectory.label

    off, sol = finder.shoot(candidates[2].u + 1e-4, finder.refine_tol, dense_output=True)
    assert off.reached_apex
    assert finder.return_mismatch(off, sol) >= 2.0 * np.hypot(*off.apex_state[2:]) > finder.match_tol


def test_trajectory_starts_and_ends_near_origin(candidates):
    for c in candidates:
        traj = c.trajectory
        assert traj.times[0] < 0 < traj.times[-1]
        assert np.isclose(traj.start_time, -traj.end_time)
        for t in (traj.start_time, traj.end_time):
            assert np.hypot(*traj.state_at(t)[:2]) < 1e-4


def test_mirror_pair_share_invariants(invariants):
    lower, upper = invariants[0], invariants[2]
    for name in ('action_A', 'time_T', 'M_plus', 'M_minus'):
        a, b = getattr(lower, name), getattr(upper, name)
        assert abs(a - b) <= 1e-6 * max(1.0, abs(a)), f"{name}: {a} vs {b}"


def test_asymptotic_vectors(invariants):
    for datum in invariants:
        assert datum.problems() == [], datum.problems()
        assert datum.g_plus[0] > 0 and datum.g_minus[0] > 0
        assert datum.fit_residual_plus < 1e-4 and datum.fit_residual_minus < 1e-4


def test_jacobian_limits(invariants):
    for datum in invariants:
        assert datum.M_plus > 0 and datum.M_minus > 0
        assert datum.M_plus_error < 1e-4 and datum.M_minus_error < 1e-4


def test_jacobian_limits_stable_under_tighter_integration(candidates, invariants):
    """Halving the integrator tolerance moves ℳ± by less than the reported error bars."""
    spec = PotentialSpec.reference()
    for c, datum in zip(candidates, invariants):
        for side, limit, error in (('plus', datum.M_plus, datum.M_plus_error),
                                   ('minus', datum.M_minus, datum.M_minus_error)):
            tighter = jacobian_limit(spec, c.trajectory, side, tol=5e-11)
            assert abs(tighter.limit - limit) < error + tighter.error, \
                f"{c.trajectory.label} {side}: {limit} vs {tighter.limit} (± {error:.1e}, {tighter.error:.1e})"


def test_perturbation_integrals(candidates, invariants):
    """W sits below the axis, so only the lower horn orbit picks it up."""
    lower = [k for k, c in enumerate(candidates) if np.min(c.trajectory.positions[:, 1]) < -0.5]
    assert len(lower) == 1
    for k, datum in enumerate(invariants):
        if k in lower:
            assert datum.w_integral > 0
        else:
            assert datum.w_integral == 0.0


def test_action_self_convergence(candidates):
    """Resampling the interpolant on a twice finer grid changes A by < 1e-9."""
    traj = candidates[1].trajectory
    inner = traj.times
    fine = np.union1d(inner, 0.5 * (inner[1:] + inner[:-1]))
    resampled = Trajectory(times=fine, states=np.array([traj.state_at(t) for t in fine]),
                           energy=traj.energy, interpolant=traj.interpolant,
                           start_time=traj.start_time, end_time=traj.end_time)
    assert abs(compute_action(resampled) - compute_action(traj)) < 1e-9


def test_fit_radius_stability(candidates, invariants):
    """Halving r_fit moves g and ℳ by < 1e-5."""
    spec = PotentialSpec.reference()
    traj, datum = candidates[1].trajectory, invariants[1]
    fit = fit_g_vectors(traj, spec.lambda1, spec.lambda2, r_fit=8e-3)
    assert np.allclose(fit.g_plus, datum.g_plus, atol=1e-5 * datum.g_plus_norm)
    m_plus = jacobian_limit(spec, traj, 'plus', r_fit=8e-3)
    assert abs(m_plus.limit - datum.M_plus) < 1e-5 * datum.M_plus


def test_maslov_count_must_match(candidates):
    with pytest.raises(ValidationError):
        assemble_invariants(PotentialSpec.reference(), [c.trajectory for c in candidates], [1, 0])


def test_small_scan_is_rejected():
    with pytest.raises(ValidationError):
        HomoclinicFinder(PotentialSpec.reference()).find(50)


def test_no_reflector_means_no_homoclinics():
    spec = PotentialSpec(vref_shape=None)
    with pytest.raises(NoneFound):
        HomoclinicFinder(spec, t_max=30.0).find(101)


def test_non_return(reference_potential):
    report = sample_non_return(reference_potential, n_samples=100, seed=3)
    assert report.n_samples == 100
    assert report.violation_fraction <= 0.1, report.to_dict()

"""
Tests for the lattice asymptotics and the windowed pseudo-resonance solver.
"""

import numpy as np
import pytest

from errors import DomainError
from numerics.root_finding import ContourWindow
from spectral.pseudo_resonances import (
    PseudoResonanceSolver,
    lattice_z_q,
    lattice_zeta_q,
    local_window,
    log_mu_tilde,
    mu_tilde,
    nominal_depth,
    pseudo_resonances_in_window,
    quantization_function_local,
)
from spectral.quantization import TWO_PI, action_phase

DELTA = 0.1


def _solve(inp, h, delta, re_min, re_max, C):
    window = local_window(inp, h, delta, re_min, re_max, C)
    resonances, _ = PseudoResonanceSolver().solve_with_retry(inp, h, delta, window)
    return resonances


def test_lattice_spacing(case_II_input):
    """z_{q+1}(τ) - z_q(τ) = 2πλ1h/|ln h| for fixed τ."""
    inp = case_II_input
    for h in (1e-2, 2.0 ** -12, 1e-6):
        step = lattice_z_q(inp, -8.0, 11, h, DELTA) - lattice_z_q(inp, -8.0, 10, h, DELTA)
        expected = TWO_PI * inp.lambda1 * h / (-np.log(h))
        assert abs(step - expected) < 1e-12 * h, f"h={h}: step {step}"


def test_lattice_depth_formula(case_II_input):
    """Im z_q/h = -(λ2/2 + δλ1) + λ1 ln|μ̃(τ)|/|ln h|."""
    inp, h = case_II_input, 2.0 ** -14
    ell = -np.log(h)
    for tau in (-30.0, -8.0, -4.0, 3.0):
        zeta = lattice_zeta_q(inp, tau, 5, h, DELTA)
        expected = -nominal_depth(inp, DELTA) + inp.lambda1 * np.log(abs(mu_tilde(inp, tau, DELTA))) / ell
        assert abs(zeta.imag - expected) < 1e-12, f"τ={tau}"


def test_lattice_rejects_bad_delta(case_II_input):
    with pytest.raises(DomainError):
        lattice_z_q(case_II_input, 0.0, 1, 0.01, 0.5)


def test_log_mu_tilde_matches_its_exponential(case_II_input):
    """exp(log μ̃) = μ̃ and log μ̃ is continuous along the real axis."""
    taus = np.linspace(-40, 10, 2001)
    logs = log_mu_tilde(case_II_input, taus, DELTA)
    assert np.allclose(np.exp(logs), mu_tilde(case_II_input, taus, DELTA), rtol=1e-12)
    assert np.max(np.abs(np.diff(logs))) < 0.5, "log μ̃ jumps between adjacent samples"


def test_lattice_points_approach_roots(case_II_input):
    """|F(z_q)| along a fixed τ decays as h → 0."""
    inp = case_II_input
    values = []
    for m in (8, 12, 16, 20):
        h = 2.0 ** -m
        ell = -np.log(h)
        turns, theta = action_phase(inp.perturbed.action_A, h)
        k = int(round((ell * -8.0 / inp.lambda1 + theta) / TWO_PI))
        q = turns + k
        tau = -8.0
        for _ in range(20):
            zeta = lattice_zeta_q(inp, tau, q, h, DELTA)
            tau = zeta.real
        values.append(abs(quantization_function_local(inp, zeta, h, DELTA)))
    assert all(b < a for a, b in zip(values, values[1:])), f"|F(z_q)| not decreasing: {values}"


def test_every_root_satisfies_the_condition(case_II_input):
    """Returned roots lie in the window with |F| below the residual tolerance."""
    inp, h = case_II_input, 2.0 ** -10
    window = local_window(inp, h, DELTA, -12, -4, 12)
    resonances, used = PseudoResonanceSolver().solve_with_retry(inp, h, DELTA, window)
    assert resonances, "no pseudo-resonances found"
    for r in resonances:
        assert used.contains(r.zeta)
        assert r.residual < 1e-10, f"residual {r.residual:.2e}"
        assert abs(quantization_function_local(inp, r.zeta, h, DELTA)) < 1e-10
        assert abs(r.z - (inp.E0 + h * r.zeta)) < 1e-15
    re_parts = [r.z.real for r in resonances]
    assert re_parts == sorted(re_parts)
    assert len({r.q for r in resonances}) == len(resonances), "lattice labels repeat"


def test_lattice_convergence(case_II_input):
    """max|ζ_root - ζ_q| |ln h| stays bounded as h = 2^{-m} → 0 in the window [-12h, -4h]."""
    inp = case_II_input
    metrics = []
    for m in range(7, 18):
        h = 2.0 ** -m
        ell = -np.log(h)
        resonances = _solve(inp, h, DELTA, -12.0, -4.0, 12.0)
        assert resonances, f"no pseudo-resonances at h=2^-{m}"
        gap = max(abs(r.zeta - lattice_zeta_q(inp, r.tau, r.q, h, DELTA)) for r in resonances)
        metrics.append(gap * ell)
    for m, (a, b) in enumerate(zip(metrics, metrics[1:]), start=7):
        assert b <= 1.1 * a, f"lattice distance grew from 2^-{m} to 2^-{m + 1}: {a:.3e} → {b:.3e}"


def test_depth_law(case_II_input):
    """|Im z/h + λ2/2 + δλ1| |ln h| stays within 1.5× its value at the coarsest h."""
    inp = case_II_input
    constants = []
    for m in range(7, 18):
        h = 2.0 ** -m
        ell = -np.log(h)
        resonances = _solve(inp, h, DELTA, -12.0, -4.0, 12.0)
        constants.append(max(abs(r.depth_ratio + nominal_depth(inp, DELTA)) * ell for r in resonances))
    fitted = constants[0]
    assert all(c <= 1.5 * fitted for c in constants), f"depth constants {constants} exceed 1.5 × {fitted:.3f}"


def test_depth_shift_follows_delta(case_II_input):
    """Doubling δ from 0.1 to 0.2 lowers the mean depth ratio by about λ1·0.1."""
    inp = case_II_input
    for m in (10, 14):
        h = 2.0 ** -m
        ell = -np.log(h)
        shallow = np.mean([r.depth_ratio for r in _solve(inp, h, 0.1, -12.0, -4.0, 12.0)])
        deep = np.mean([r.depth_ratio for r in _solve(inp, h, 0.2, -12.0, -4.0, 12.0)])
        shift = shallow - deep
        assert abs(shift - 0.1 * inp.lambda1) < 2.0 / ell, f"h=2^-{m}: shift {shift:.4f}"


@pytest.mark.parametrize("m", [12, 14, 16])
def test_pseudo_resonance_count(case_II_input, m):
    """Roots in Re ζ ∈ [-12, -4] number about 8|ln h|/(2πλ1)."""
    inp = case_II_input
    h = 2.0 ** -m
    expected = 8.0 * (-np.log(h)) / (TWO_PI * inp.lambda1)
    count = len(_solve(inp, h, DELTA, -12.0, -4.0, 12.0))
    assert abs(count - expected) <= 0.2 * expected, f"h=2^-{m}: {count} roots, expected ≈ {expected:.2f}"


def test_no_perturbation_no_pseudo_resonances(case_II_input):
    """w = 0 gives an empty root set."""
    inp = case_II_input.with_w(0.0)
    h = 2.0 ** -10
    window = local_window(inp, h, DELTA, -12, -4, 12)
    assert PseudoResonanceSolver().solve_local(inp, h, DELTA, window) == []


def test_global_window_agrees_with_local(case_II_input):
    """A window given in z finds the same roots as its ζ image."""
    inp, h = case_II_input, 2.0 ** -9
    local = local_window(inp, h, DELTA, -12, -4, 12)
    global_window = ContourWindow(inp.E0 + h * local.center, h * local.half_width_re,
                                  h * local.half_width_im_low, h * local.half_width_im_high)
    from_global = pseudo_resonances_in_window(inp, h, DELTA, global_window)
    from_local = PseudoResonanceSolver().solve_local(inp, h, DELTA, local)
    assert len(from_global) == len(from_local)
    for a, b in zip(from_global, from_local):
        assert abs(a.z - b.z) < 1e-12 * h
        assert a.q == b.q
    with pytest.raises(DomainError):
        pseudo_resonances_in_window(inp, h, 0.0, global_window)


def test_solver_settings_round_trip():
    solver = PseudoResonanceSolver.from_settings({'newton_tol': 1e-13, 'samples_per_side': 256, 'unused': 1})
    assert solver.newton_tol == 1e-13
    assert solver.samples_per_side == 256
    assert solver.max_iter == 50

"""
Tests for μ, S(z,h) and the quantization matrices 𝒬, 𝒬̃ and 𝒲𝒬.
"""

import numpy as np
import pytest
from scipy import linalg

from dynamics.invariants import HomoclinicDatum
from errors import DomainError
from numerics.special_functions import complex_pow, gamma_complex
from spectral.pseudo_resonances import quantization_function_local
from spectral.quantization import (
    QuantizationInput,
    build_Q,
    build_Q_tilde,
    h_power,
    mu,
    mu_scale,
    quantization_function,
    rescaled_S,
    weight_matrix,
    wq_eigenvalues,
)
from spectral.synthetic import admissible_h_set


def _random_points(inp, n, rng, h_range=(1e-4, 0.5), tau_range=(-10.0, 10.0), depth_range=(-1.0, 1.0)):
    """(z, h) pairs with (z - E0)/h uniform in the given box and log h uniform"""
    log_h = rng.uniform(np.log(h_range[0]), np.log(h_range[1]), n)
    taus = rng.uniform(*tau_range, n)
    depths = rng.uniform(*depth_range, n)
    return [(inp.E0 + np.exp(lh) * complex(t, d), float(np.exp(lh))) for lh, t, d in zip(log_h, taus, depths)]


def test_rescaled_parameter_values(case_II_input):
    """S(E0) = (λ1+λ2)/2 and an imaginary offset iβh shifts S by β."""
    inp = case_II_input
    h = 0.01
    S0 = rescaled_S(inp.E0, h, inp.lambda1, inp.lambda2, inp.E0)
    assert S0.value == pytest.approx(1.25)
    S1 = rescaled_S(inp.E0 + 0.3j * h, h, inp.lambda1, inp.lambda2, inp.E0)
    assert abs(S1.value - 1.55) < 1e-12, f"S = {S1.value}"
    assert S1.recompute(inp.lambda1, inp.lambda2, inp.E0) == S1.value
    with pytest.raises(DomainError):
        rescaled_S(inp.E0, 1.5, inp.lambda1, inp.lambda2, inp.E0)


def test_h_power_modulus_identity(case_II_input, rng):
    """|h^{S/λ1-1/2}| = h^{λ2/(2λ1) + Im z/(λ1h)} with Im z measured from E0."""
    inp = case_II_input
    for z, h in _random_points(inp, 50, rng):
        expected = h ** (inp.lambda2 / (2 * inp.lambda1) + (z - inp.E0).imag / (inp.lambda1 * h))
        measured = abs(h_power(inp, z, h))
        assert abs(measured - expected) < 1e-12 * expected, f"h={h}, z={z}"


def test_mu_single_trajectory_reduces_to_gamma():
    """K=1, A=0, B=1, T=0, τ=0, λ1=λ2=1 gives μ = Γ(1) = 1."""
    datum = HomoclinicDatum(index=1, action_A=0.0, amplitude_B=1.0 + 0j, time_T=0.0, maslov_nu=0,
                            g_plus=(1.0, 0.0), g_minus=(1.0, 0.0), M_plus=1.0, M_minus=1.0)
    inp = QuantizationInput(data=(datum,), lambda1=1.0, lambda2=1.0, E0=1.0)
    assert abs(mu(inp, 0.0, 0.5) - 1.0) < 1e-14


def test_mu_single_trajectory_never_vanishes_on_real_axis():
    """With one term, |μ| equals |Γ e^{-πτ/(2λ1)} B1| > 0 on real τ."""
    datum = HomoclinicDatum.build(1, 0.4, 0, (2.0, 0.0), (2.0, 0.0), 1.0, 1.0, lambda1=1.0, lambda2=1.5)
    inp = QuantizationInput(data=(datum,), lambda1=1.0, lambda2=1.5, E0=1.0)
    taus = np.linspace(-20, 20, 81)
    values = np.abs(mu(inp, taus, 0.01))
    assert np.all(values > 0), "μ vanished for a single trajectory"
    assert np.allclose(values, mu_scale(inp, taus), rtol=1e-12)


def test_mu_vanishes_identically_in_case_II(case_II_input, rng):
    """Case (II): |μ(τ,h)| < 1e-12 |Γ e^{-πτ/(2λ1)} B1| at 100 random (τ, h)."""
    inp = case_II_input
    for _ in range(100):
        tau = rng.uniform(-20, 20)
        h = float(np.exp(rng.uniform(np.log(1e-6), 0.0)))
        single = mu_scale(inp, tau) / 4.0
        assert abs(mu(inp, tau, h)) < 1e-12 * single, f"τ={tau}, h={h}"


def test_trace_identity(generic_input, rng):
    """trace 𝒬(z,h) = μ((z-E0)/h, h) at 1000 random points."""
    inp = generic_input
    worst = 0.0
    for z, h in _random_points(inp, 1000, rng):
        q = build_Q(inp, z, h)
        value = mu(inp, (z - inp.E0) / h, h)
        scale = float(np.sum(np.abs(np.diag(q.entries))))
        worst = max(worst, abs(q.trace - value) / scale)
    assert worst < 1e-12, f"trace identity error {worst:.3e} relative to the diagonal scale"


def test_entries_match_closed_form(generic_input):
    """Each entry equals the displayed product with the principal power."""
    inp = generic_input
    z, h = inp.E0 + 0.02 * (-3.0 - 0.4j), 0.02
    q = build_Q(inp, z, h)
    S = rescaled_S(z, h, inp.lambda1, inp.lambda2, inp.E0).value
    s = S / inp.lambda1
    for k, dk in enumerate(inp.data):
        for l, dl in enumerate(inp.data):
            base = 1j * inp.lambda1 * dk.g_plus_norm * dl.g_minus_norm
            expected = (np.exp(1j * dk.action_A / h) * gamma_complex(s) * np.sqrt(inp.lambda1 / (2 * np.pi))
                        * dk.M_ratio * np.exp(-0.5j * np.pi * (dk.maslov_nu + 0.5)) * dl.g_minus_norm
                        * complex_pow(base, -s))
            assert abs(q.entries[k, l] - expected) < 1e-12 * abs(expected), f"entry ({k},{l})"


def test_rank_one_everywhere(generic_input, case_II_input, rng):
    """All 2×2 minors of 𝒬 and 𝒬̃ vanish relative to the entries."""
    for inp in (generic_input, case_II_input):
        for z, h in _random_points(inp, 200, rng):
            q = build_Q(inp, z, h)
            qt = build_Q_tilde(inp, z, h, 0.1)
            assert np.all(np.abs(q.entries) > 0), "𝒬 has a zero entry"
            assert q.max_minor_ratio() < 1e-10, f"minor ratio {q.max_minor_ratio():.2e}"
            assert qt.max_minor_ratio() < 1e-10, f"perturbed minor ratio {qt.max_minor_ratio():.2e}"


def test_nilpotent_on_admissible_set(case_I_input, case_II_input, rng):
    """‖𝒬²‖/‖𝒬‖² < 1e-10 on ℋ for Case (I) and on the whole grid for Case (II)."""
    for inp, case in ((case_I_input, 'I'), (case_II_input, 'II')):
        for h in admissible_h_set(inp, case):
            for tau, depth in zip(rng.uniform(-10, 10, 5), rng.uniform(-1, 1, 5)):
                q = build_Q(inp, inp.E0 + h * complex(tau, depth), h)
                ratio = q.nilpotency_ratio()
                assert ratio < 1e-10, f"Case ({case}) h={h}: ‖Q²‖/‖Q‖² = {ratio:.2e}"


def test_nilpotency_tracks_trace(generic_input, rng):
    """For rank one, ‖𝒬²‖ ≤ |trace 𝒬|·‖𝒬‖ (up to rounding)."""
    for z, h in _random_points(generic_input, 50, rng):
        q = build_Q(generic_input, z, h)
        square = linalg.norm(q.entries @ q.entries, 2)
        assert square <= abs(q.trace) * q.norm() * (1 + 1e-10) + 1e-14 * q.norm() ** 2


def test_perturbed_matrix_basic_properties(case_II_input):
    """w = 0 leaves 𝒬 unchanged; the perturbed row keeps its moduli."""
    z, h = case_II_input.E0 + 0.01 * (-5 - 0.5j), 0.01
    q = build_Q(case_II_input, z, h)
    unperturbed = build_Q_tilde(case_II_input.with_w(0.0), z, h, 0.2)
    assert np.array_equal(unperturbed.entries, q.entries)
    qt = build_Q_tilde(case_II_input, z, h, 0.2)
    assert np.allclose(np.abs(qt.entries), np.abs(q.entries), rtol=1e-14)
    assert not np.allclose(qt.entries[0], q.entries[0])
    assert np.array_equal(qt.entries[1:], q.entries[1:])
    with pytest.raises(DomainError):
        build_Q_tilde(case_II_input, z, h, 0.5)


def test_perturbed_matrix_first_order_expansion(case_II_input):
    """‖𝒬̃ - 𝒬 + iwh^δ P𝒬‖ / ‖𝒬‖ decays with slope 2δ in h."""
    inp, delta = case_II_input, 0.25
    hs = [2.0 ** (-m) for m in range(16, 33, 2)]
    errors = []
    for h in hs:
        z = inp.E0 + h * (-3.0 - 0.2j)
        q = build_Q(inp, z, h)
        qt = build_Q_tilde(inp, z, h, delta)
        projected = np.zeros_like(q.entries)
        projected[0] = q.entries[0]
        residual = qt.entries - q.entries + 1j * inp.w * h ** delta * projected
        errors.append(linalg.norm(residual, 2) / q.norm())
    slope = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    assert abs(slope - 2 * delta) < 0.02, f"measured slope {slope:.4f}"


def test_weighted_eigenvalues_match_dense_solve(generic_input, rng):
    """𝒲𝒬 has eigenvalues {-iw𝒬11, 0, 0} and range spanned by (1,0,0)."""
    inp = generic_input
    weights = weight_matrix(inp)
    for z, h in _random_points(inp, 100, rng):
        nonzero, zeros = wq_eigenvalues(inp, z, h)
        wq = weights @ build_Q(inp, z, h).entries
        dense = sorted(linalg.eigvals(wq), key=abs)
        scale = linalg.norm(wq, 2)
        assert abs(dense[-1] - nonzero) < 1e-10 * scale, f"nonzero eigenvalue mismatch at h={h}"
        assert max(abs(dense[0]), abs(dense[1])) < 1e-10 * scale
        assert np.all(zeros == 0)
        assert np.all(wq[1:] == 0), "range of 𝒲𝒬 leaves span (1,0,0)"


def test_weighted_eigenvalues_vanish_without_perturbation(generic_input):
    """w = 0 gives three zero eigenvalues and F ≡ -1."""
    inp = generic_input.with_w(0.0)
    nonzero, _ = wq_eigenvalues(inp, inp.E0 - 0.001j, 0.01)
    assert nonzero == 0
    assert quantization_function(inp, inp.E0 - 0.001j, 0.01, 0.1) == -1


def test_scalar_reduction_is_exact(generic_input, rng):
    """Dense eigenvalues of h^{S/λ1-1/2+δ}𝒲𝒬 are {F+1, 0, 0}."""
    inp, delta = generic_input, 0.1
    weights = weight_matrix(inp)
    for z, h in _random_points(inp, 1000, rng):
        matrix = h_power(inp, z, h, delta) * (weights @ build_Q(inp, z, h).entries)
        dense = sorted(linalg.eigvals(matrix), key=abs)
        expected = quantization_function(inp, z, h, delta) + 1.0
        scale = max(1.0, abs(expected))
        assert abs(dense[-1] - expected) < 1e-10 * scale, f"z={z}, h={h}"
        assert abs(dense[0]) < 1e-10 * scale and abs(dense[1]) < 1e-10 * scale


def test_local_and_global_quantization_functions_agree(case_II_input, rng):
    """F evaluated in ζ with the reduced phase equals F built from 𝒬."""
    inp, delta = case_II_input, 0.1
    for z, h in _random_points(inp, 100, rng, h_range=(1e-3, 0.5), depth_range=(-1.0, 0.5)):
        zeta = (z - inp.E0) / h
        global_value = quantization_function(inp, z, h, delta)
        local_value = quantization_function_local(inp, zeta, h, delta)
        scale = max(1.0, abs(global_value + 1))
        assert abs(global_value - local_value) < 1e-10 * scale, f"z={z}, h={h}"


def test_quantization_function_is_continuous(case_II_input):
    """Adjacent evaluations across the window differ by less than 10× the local derivative estimate."""
    inp, delta, h = case_II_input, 0.1, 2.0 ** -10
    res = np.linspace(-12, -4, 400)
    step = res[1] - res[0]
    for depth in (-1.0, -0.85, -0.5, 0.5):
        values = quantization_function_local(inp, res + 1j * depth, h, delta)
        jumps = np.abs(np.diff(values))
        derivative = np.abs(np.gradient(values, step))
        assert np.all(jumps < 10 * step * np.maximum(derivative[:-1], derivative[1:]) + 1e-12), \
            f"jump in F at depth {depth}"

"""
Tests for the numerics layer: complex Gamma, principal powers, Newton,
argument-principle counting and limit extrapolation.
"""

import cmath

import numpy as np
import pytest
from scipy import special

from errors import (
    ContourTooClose,
    DerivativeVanished,
    DomainError,
    NoConvergence,
    NotConverging,
    PoleError,
    ResolutionError,
)
from numerics import (
    ContourWindow,
    complex_pow,
    count_zeros,
    count_zeros_adaptive,
    gamma_complex,
    limit_extrapolate,
    log_gamma_complex,
    newton_root,
)


def _random_off_integer(rng, n, bound=5.0, gap=0.1):
    """Complex samples with |Re s| <= bound at distance >= gap from every integer"""
    samples = []
    while len(samples) < n:
        s = complex(rng.uniform(-bound, bound), rng.uniform(-bound, bound))
        nearest = round(s.real)
        if abs(s - nearest) >= gap:
            samples.append(s)
    return np.array(samples)


def test_gamma_classical_values():
    """Γ(1) = 1 and Γ(1/2) = √π."""
    assert abs(gamma_complex(1.0) - 1.0) < 1e-14, f"Γ(1) = {gamma_complex(1.0)}"
    assert abs(gamma_complex(0.5) - 1.7724538509055160) < 1e-14, f"Γ(1/2) = {gamma_complex(0.5)}"


def test_gamma_matches_scipy_oracle():
    """Lanczos Γ agrees with scipy's complex Gamma to 1e-12 relative on |s| <= 50."""
    rng = np.random.default_rng(7)
    points = np.concatenate([
        [0.75 + 0.5j],
        rng.uniform(0.5, 30.0, 50) + 1j * rng.uniform(-30.0, 30.0, 50),
        _random_off_integer(rng, 50),
    ])
    ours = gamma_complex(points)
    oracle = special.gamma(points)
    rel = np.max(np.abs(ours - oracle) / np.abs(oracle))
    assert rel < 1e-12, f"max relative deviation {rel:.3e}"


def test_gamma_reflection_identity():
    """Γ(s)Γ(1-s) = π / sin(πs) for 200 random s away from the integers."""
    s = _random_off_integer(np.random.default_rng(11), 200)
    reference = np.pi / np.sin(np.pi * s)
    rel = np.abs(gamma_complex(s) * gamma_complex(1.0 - s) - reference) / np.abs(reference)
    assert np.max(rel) < 1e-10, f"reflection error {np.max(rel):.3e}"


def test_gamma_recurrence():
    """Γ(s+1) = sΓ(s) on the same sampling."""
    s = _random_off_integer(np.random.default_rng(13), 200)
    lhs = gamma_complex(s + 1.0)
    rhs = s * gamma_complex(s)
    rel = np.max(np.abs(lhs - rhs) / np.abs(rhs))
    assert rel < 1e-12, f"recurrence error {rel:.3e}"


@pytest.mark.parametrize("pole", [0.0, -1.0, -3.0, -3.0 + 1e-13j])
def test_gamma_pole_raises(pole):
    """Arguments within 1e-12 of a non-positive integer raise PoleError."""
    with pytest.raises(PoleError):
        gamma_complex(pole)
    with pytest.raises(PoleError):
        log_gamma_complex(pole)


def test_log_gamma_is_continuous_log_of_gamma():
    """exp(log Γ) reproduces Γ off the negative axis."""
    s = np.array([0.75 + 0.5j, 2.5 - 7.0j, 0.6 + 31.0j])
    rel = np.max(np.abs(np.exp(log_gamma_complex(s)) - gamma_complex(s)) / np.abs(gamma_complex(s)))
    assert rel < 1e-12, f"log Γ mismatch {rel:.3e}"


def test_complex_pow_identity_exponent():
    """i^1 = i on the principal branch."""
    assert abs(complex_pow(1j, 1.0) - 1j) < 1e-15


def test_complex_pow_real_base_modulus():
    """|h^(σ+iθ)| = h^σ for real 0 < h < 1."""
    for theta in (-40.0, -1.3, 0.0, 2.7, 55.0):
        value = complex_pow(0.1, 0.5 + 1j * theta)
        assert abs(abs(value) - 0.1 ** 0.5) < 1e-15, f"modulus {abs(value)} at θ={theta}"


def test_complex_pow_against_exp_log_composition():
    """(2i)^(-0.8) equals exp(-0.8 (ln 2 + iπ/2))."""
    expected = cmath.exp(-0.8 * (cmath.log(2.0) + 1j * cmath.pi / 2))
    assert abs(complex_pow(2.0j, -0.8) - expected) < 1e-15 * abs(expected)


def test_complex_pow_additive_in_exponent():
    """b^(p+q) = b^p · b^q when the argument of b is fixed."""
    rng = np.random.default_rng(3)
    for _ in range(50):
        b = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        p = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        q = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        lhs = complex_pow(b, p + q)
        rhs = complex_pow(b, p) * complex_pow(b, q)
        assert abs(lhs - rhs) < 1e-12 * abs(lhs), f"b={b}, p={p}, q={q}"


def test_complex_pow_negative_real_base_uses_plus_pi():
    """Arg(-1) = π even when the imaginary part is a negative zero."""
    assert abs(complex_pow(complex(-1.0, -0.0), 0.5) - 1j) < 1e-15


def test_complex_pow_zero_base():
    """Zero base is valid only for a real positive exponent."""
    assert complex_pow(0.0, 2.0) == 0
    with pytest.raises(DomainError):
        complex_pow(0.0, -1.0)
    with pytest.raises(DomainError):
        complex_pow(0.0, 1.0 + 1j)


def test_newton_quadratic_complex_root():
    """z² + 1 from 0.3 + 0.8i converges to i."""
    result = newton_root(lambda z: z * z + 1, 0.3 + 0.8j)
    assert abs(result.root - 1j) < 1e-12, f"root {result.root}"
    assert result.residual < 1e-12
    assert result.iterations > 0


def test_newton_real_analytic_root():
    """e^z - 1 from 0.1 converges to 0 using the complex-step derivative."""
    result = newton_root(lambda z: cmath.exp(z) - 1, 0.1)
    assert abs(result.root) < 1e-12, f"root {result.root}"
    assert result.residual < 1e-12


def test_newton_analytic_derivative():
    """A supplied derivative is used as is."""
    result = newton_root(lambda z: z ** 3 - 8, 1.5 + 0.1j, fprime=lambda z: 3 * z ** 2)
    assert abs(result.root - 2.0) < 1e-12, f"root {result.root}"


def test_newton_errors():
    """Vanishing derivative and non-convergence are reported distinctly."""
    with pytest.raises(DerivativeVanished):
        newton_root(lambda z: z * z + 1, 0.0)
    # a real seed keeps every iterate real, so z² + 1 is never solved
    with pytest.raises(NoConvergence):
        newton_root(lambda z: z * z + 1, 0.5, max_iter=30)
    with pytest.raises(DomainError):
        newton_root(lambda z: z, 1.0, tol=0.0)


def test_count_zeros_simple_cases():
    """A single linear factor counts 1 and a constant counts 0."""
    c = 0.3 - 0.2j
    window = ContourWindow(c, 1.0, 1.0, 1.0)
    assert count_zeros(lambda z: z - c, window, 64) == 1
    assert count_zeros(lambda z: np.ones_like(z), window, 64) == 0


def test_count_zeros_random_products():
    """A product of m distinct linear factors inside the window counts m."""
    rng = np.random.default_rng(21)
    window = ContourWindow(0j, 1.0, 1.0, 1.0)
    for m in range(1, 7):
        roots = rng.uniform(-0.7, 0.7, m) + 1j * rng.uniform(-0.7, 0.7, m)
        outside = 1.8 + 0.5j

        def f(z, roots=roots):
            return np.prod([z - r for r in roots], axis=0) * (z - outside)

        assert count_zeros(f, window, 512) == m, f"m={m}, roots={roots}"


def test_count_zeros_contour_and_resolution_errors():
    """Zeros on the contour and coarse sampling are rejected."""
    window = ContourWindow(0j, 1.0, 1.0, 1.0)
    with pytest.raises(ContourTooClose):
        count_zeros(lambda z: z - 1.0, window, 64)
    with pytest.raises(ResolutionError):
        count_zeros(lambda z: z ** 3, window, 2)
    adaptive = count_zeros_adaptive(lambda z: z ** 3, window, samples_per_side=2)
    assert adaptive.count == 3
    assert adaptive.samples_per_side > 2


def test_contour_window_validation():
    """Half-widths must be positive."""
    with pytest.raises(DomainError):
        ContourWindow(0j, 1.0, 0.0, 1.0)


def test_limit_extrapolate_exponential_sequence():
    """L + e^(-s) at s = 5, 10, 15, 20 extrapolates to L."""
    samples = [(s, 2.0 + np.exp(-s)) for s in (5.0, 10.0, 15.0, 20.0)]
    result = limit_extrapolate(samples)
    assert abs(result.limit - 2.0) < 1e-6, f"limit {result.limit}"
    assert result.error < 1e-6


def test_limit_extrapolate_algebraic_sequence_is_flagged():
    """L + 1/s is either rejected or reported with a wide error bar."""
    samples = [(s, 2.0 + 1.0 / s) for s in (5.0, 10.0, 15.0, 20.0)]
    try:
        result = limit_extrapolate(samples)
    except NotConverging:
        return
    assert result.error > 1e-3, f"error bar {result.error:.3e} is too optimistic"


def test_limit_extrapolate_constant_and_growing():
    """A constant sequence is exact; a diverging one is rejected."""
    constant = limit_extrapolate([(s, 1.25) for s in (1.0, 2.0, 4.0, 8.0)])
    assert constant.limit == 1.25
    with pytest.raises(NotConverging):
        limit_extrapolate([(s, s * s) for s in (1.0, 2.0, 3.0, 4.0)])
    with pytest.raises(DomainError):
        limit_extrapolate([(1.0, 1.0), (2.0, 1.0)])

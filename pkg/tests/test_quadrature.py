import math

import numpy as np
import pytest

from ddexchange import (
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    cos_Theta_from_d_frame,
    integrate_hemisphere,
    sin2_alpha_from_r_frame,
)
from ddexchange.quadrature import DEFAULT_SPEC, _Panels, integrate_panels


def pure_phase(r):
    return lambda Theta, Phi: np.exp(-1j * r * np.cos(Theta)) + 0 * Phi


def pure_phase_exact(r):
    return 2 * math.pi * (np.exp(-1j * r) - 1) / (-1j * r)


def unit_vector(polar, azimuth):
    return np.array([np.sin(polar) * np.cos(azimuth),
                     np.sin(polar) * np.sin(azimuth),
                     np.cos(polar)])


# --- frame relations ---------------------------------------------------------

def test_frames_coincide_at_theta_zero():
    T = np.linspace(0, math.pi, 11)
    assert np.allclose(sin2_alpha_from_r_frame(0.0, T, 1.3), np.sin(T) ** 2, atol=1e-15)
    assert np.allclose(cos_Theta_from_d_frame(0.0, T, 0.7), np.cos(T), atol=1e-15)


def test_special_values():
    assert sin2_alpha_from_r_frame(math.pi / 2, 0.4, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert cos_Theta_from_d_frame(math.pi / 2, 0.4, 0.0) == pytest.approx(math.sin(0.4), abs=1e-15)


def test_three_vector_oracle(rng):
    n = 10_000
    theta = rng.uniform(0, math.pi, n)
    Theta = rng.uniform(0, math.pi, n)
    Phi = rng.uniform(0, 2 * math.pi, n)
    alpha = rng.uniform(0, math.pi, n)
    phi = rng.uniform(0, 2 * math.pi, n)
    # r-frame: r along z, d tilted by theta in the x-z plane
    d_hat = np.array([np.sin(theta), np.zeros(n), np.cos(theta)])
    k_hat = unit_vector(Theta, Phi)
    ref_sin2 = 1 - np.sum(k_hat * d_hat, axis=0) ** 2
    assert np.max(np.abs(sin2_alpha_from_r_frame(theta, Theta, Phi) - ref_sin2)) < 1e-12
    # d-frame: d along z, r tilted by theta in the x-z plane
    r_hat = np.array([np.sin(theta), np.zeros(n), np.cos(theta)])
    k_hat = unit_vector(alpha, phi)
    ref_cos = np.sum(k_hat * r_hat, axis=0)
    assert np.max(np.abs(cos_Theta_from_d_frame(theta, alpha, phi) - ref_cos)) < 1e-12


def test_frame_relations_are_mutually_consistent(rng):
    theta = rng.uniform(0, math.pi, 1000)
    alpha = rng.uniform(0, math.pi, 1000)
    phi = rng.uniform(0, 2 * math.pi, 1000)
    cos_T = cos_Theta_from_d_frame(theta, alpha, phi)
    Theta = np.arccos(np.clip(cos_T, -1, 1))
    # recover Phi from the same 3-vector, then map back to sin^2 alpha
    k = unit_vector(alpha, phi)
    e1 = np.array([-np.cos(theta), np.zeros_like(theta), np.sin(theta)])
    e2 = np.array([np.zeros_like(theta), np.ones_like(theta), np.zeros_like(theta)])
    Phi = np.mod(np.arctan2(np.sum(k * e2, axis=0), np.sum(k * e1, axis=0)), 2 * math.pi)
    back = sin2_alpha_from_r_frame(theta, Theta, Phi)
    assert np.max(np.abs(back - np.sin(alpha) ** 2)) < 1e-12


def test_sin2_alpha_range(rng):
    v = sin2_alpha_from_r_frame(rng.uniform(0, math.pi, 5000), rng.uniform(0, math.pi, 5000),
                                rng.uniform(0, 2 * math.pi, 5000))
    assert v.min() >= 0 and v.max() <= 1


@pytest.mark.parametrize("args", [(-0.1, 1, 1), (1, 3.5, 1), (1, 1, 7.0)])
def test_frame_domain_errors(args):
    with pytest.raises(DomainError):
        sin2_alpha_from_r_frame(*args)
    with pytest.raises(DomainError):
        cos_Theta_from_d_frame(*args)


# --- hemisphere engine -------------------------------------------------------

def test_area():
    res = integrate_hemisphere(lambda T, P: np.ones(np.broadcast(T, P).shape))
    assert res.value == pytest.approx(2 * math.pi, rel=1e-14)


def test_cos_weight():
    res = integrate_hemisphere(lambda T, P: np.cos(T) + 0 * P)
    assert res.value == pytest.approx(math.pi, rel=1e-14)


def test_azimuthal_dependence():
    # int sin^2 Theta cos^2 Phi dGamma over the hemisphere = 2 pi / 3
    res = integrate_hemisphere(lambda T, P: np.sin(T) ** 2 * np.cos(P) ** 2)
    assert res.value == pytest.approx(2 * math.pi / 3, rel=1e-13)


@pytest.mark.parametrize("r", [20.0, 100.0, 1000.0])
def test_pure_phase_closed_form(r):
    res = integrate_hemisphere(pure_phase(r), 1.0, DEFAULT_SPEC, phase_rate=r)
    exact = pure_phase_exact(r)
    tol = max(DEFAULT_SPEC.abs_tol, DEFAULT_SPEC.rel_tol * abs(exact))
    assert abs(res.value - exact) <= tol
    assert res.error <= max(DEFAULT_SPEC.abs_tol, DEFAULT_SPEC.rel_tol * abs(res.value))


def test_pure_phase_without_rate_hint_still_converges():
    res = integrate_hemisphere(pure_phase(200.0))
    assert abs(res.value - pure_phase_exact(200.0)) < 1e-7 * abs(pure_phase_exact(200.0))


def test_cone_cut():
    c = 0.37
    res = integrate_hemisphere(lambda T, P: np.ones(np.broadcast(T, P).shape), c)
    assert res.value == pytest.approx(2 * math.pi * c, rel=1e-14)


def test_empty_cone_is_exact_zero():
    res = integrate_hemisphere(pure_phase(3.0), 0.0)
    assert res.value == 0 and res.error == 0


@pytest.mark.parametrize("c", [-0.1, 1.5])
def test_cone_cut_domain(c):
    with pytest.raises(DomainError):
        integrate_hemisphere(pure_phase(1.0), c)


def test_breakpoint_handles_jump():
    c = 0.6
    f = lambda T, P: np.where(np.cos(T) <= c, 1.0, 0.0) + 0 * P  # noqa: E731
    res = integrate_hemisphere(f, 1.0, breakpoints=(c,))
    assert res.value == pytest.approx(2 * math.pi * c, rel=1e-13)


def test_phi_even_matches_full_rule():
    f = lambda T, P: np.exp(-3j * np.cos(T)) * (1 + np.sin(T) * np.cos(P)) ** 2  # noqa: E731
    a = integrate_hemisphere(f, 1.0, phi_even=False).value
    b = integrate_hemisphere(f, 1.0, phi_even=True).value
    assert abs(a - b) < 1e-12


def test_determinism():
    f = lambda T, P: np.exp(-37j * np.cos(T)) * (1 - (np.sin(T) * np.cos(P)) ** 2)  # noqa: E731
    runs = [integrate_hemisphere(f, 0.8, phase_rate=37.0) for _ in range(3)]
    assert all(r.value == runs[0].value and r.error == runs[0].error for r in runs)


@pytest.mark.parametrize("r, n", [(20.0, 4), (100.0, 8)])
def test_convergence_order_of_gauss_component(r, n):
    """Halving panels cuts the 7-point Gauss error by at least 2**14."""
    f = pure_phase(r)
    exact = pure_phase_exact(r)
    errs = []
    for m in (n, 2 * n):
        edges = np.linspace(0, math.pi / 2, m + 1)
        _, gauss, _ = _Panels(f, 8, False).evaluate(edges[:-1], edges[1:])
        errs.append(abs(gauss.sum() - exact))
    assert math.log2(errs[0] / errs[1]) >= 14


def test_convergence_error_carries_estimate():
    spec = QuadratureSpec(max_refinement_depth=0, rel_tol=1e-14, abs_tol=1e-300, base_panels_theta=1)
    f = lambda T, P: np.exp(-500j * np.cos(T)) + 0 * P  # noqa: E731
    with pytest.raises(ConvergenceError) as info:
        integrate_hemisphere(f, 1.0, spec)
    assert info.value.estimate is not None
    assert info.value.error > 0


@pytest.mark.parametrize("kwargs", [
    {"rel_tol": 0}, {"abs_tol": -1}, {"oscillation_panel_cap": 1.0},
    {"base_panels_theta": 0}, {"max_refinement_depth": -1},
])
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureSpec(**kwargs)


def test_integrate_panels():
    val = integrate_panels(np.sin, np.linspace(0, math.pi, 5))
    assert val == pytest.approx(2.0, rel=1e-15)

import math

import numpy as np
import pytest

from ahlab.geometry import WarpedMetric
from ahlab.scattering import (
    IllConditionedFitError,
    SeriesStartError,
    _integrate_w,
    adapted_profile,
    extract_fg,
    scattering_multiplier,
    solve_radial_mode,
)
from ahlab.specfun import sphere_multiplier


@pytest.fixture(scope="module")
def hyp3():
    return WarpedMetric(n=3, kind="hyperbolic")


@pytest.fixture(scope="module")
def profile_3_half():
    return adapted_profile(3, 0.5)


@pytest.mark.parametrize(
    "n,gamma,k",
    [
        (3, 0.5, 0),
        (3, 0.5, 2),
        (3, 0.25, 1),
        (3, 0.75, 1),
        (4, 0.5, 0),
        (5, 0.75, 2),
        (2, 0.25, 3),
    ],
)
def test_multiplier_matches_closed_form(n, gamma, k):
    numeric = scattering_multiplier(n, gamma, k)
    exact = sphere_multiplier(n, gamma, k)
    assert numeric == pytest.approx(exact, rel=1e-8)


def test_adapted_profile_closed_form(profile_3_half):
    # at (3, 1/2) the profile is 1/2 sech^2(t/2), derivative included
    t = np.linspace(0.01, 20.0, 500)
    val, der = profile_3_half.phi(t)
    exact = 0.5 / np.cosh(0.5 * t) ** 2
    exact_der = -exact * np.tanh(0.5 * t)
    assert np.max(np.abs(val - exact)) <= 1e-8
    assert np.max(np.abs(der - exact_der)) <= 1e-8


def test_adapted_profile_extraction(profile_3_half):
    p = profile_3_half
    assert p.monotone
    assert p.G0 == pytest.approx(p.g0_expected, abs=1e-6)
    assert p.g0_expected == pytest.approx(-1.0, rel=1e-12)
    assert p.x2_coeff == pytest.approx(p.x2_expected, abs=1e-5)
    assert p.x2_expected == pytest.approx(0.75, rel=1e-12)


@pytest.mark.parametrize("n,gamma", [(3, 0.25), (4, 0.75)])
def test_adapted_profile_sweep(n, gamma):
    p = adapted_profile(n, gamma)
    assert p.monotone
    assert p.G0 == pytest.approx(p.g0_expected, abs=1e-6)
    assert p.x2_coeff == pytest.approx(p.x2_expected, abs=1e-5)


def test_solution_positive_and_rescale_exponent(hyp3):
    sol = solve_radial_mode(hyp3, 1.5 + 0.35, 0)
    assert sol.positive
    assert sol.rescale_exponent == pytest.approx(3.0 - sol.s, rel=1e-15)
    assert sol.gamma == pytest.approx(0.35, rel=1e-12)


def test_wronskian_constancy(hyp3):
    # second solution started independently at t = 1; the Wronskian times
    # exp(2(s-n)t) sinh(t)^n must be constant for the mode equation
    s = 1.5 + 0.4
    sol = solve_radial_mode(hyp3, s, 0)
    dense2 = _integrate_w(hyp3, s, 0, 1.0, (0.0, 1.0), 20.0, 1e-12, first_step=1e-3)
    ts = np.array([2.0, 5.0, 10.0, 15.0, 19.0])
    w1, v1, _ = sol.w_eval(ts)
    w2, v2 = dense2.sol(ts)
    wr = (w1 * v2 - w2 * v1) * np.exp(2.0 * (s - 3.0) * ts) * np.sinh(ts) ** 3
    assert np.max(np.abs(wr / wr[0] - 1.0)) <= 1e-9


def test_tolerance_refinement_consistent(hyp3):
    a = solve_radial_mode(hyp3, 2.0, 0, rel_tol=1e-10)
    b = solve_radial_mode(hyp3, 2.0, 0, rel_tol=1e-12)
    extract_fg(a)
    extract_fg(b)
    assert a.G0 / a.F0 == pytest.approx(b.G0 / b.F0, abs=1e-8)
    # reported error estimates cover the actual drift
    assert abs(a.G0 - b.G0) <= 10.0 * (a.eG + b.eG) + 1e-12


def test_integer_exponent_solution_is_cosh(hyp3):
    sol = solve_radial_mode(hyp3, 4.0, 0)
    extract_fg(sol)
    ts = np.linspace(0.01, 20.0, 200)
    w, _, _ = sol.w_eval(ts)
    u = w * np.exp((sol.s - 3.0) * ts)
    ratio = u / np.cosh(ts)
    assert np.max(np.abs(ratio / ratio[0] - 1.0)) <= 1e-10
    # growing branch terminates at the quadratic term exactly
    assert sol.hemi_x2 == pytest.approx(0.25, abs=1e-10)
    # the second branch is absent; the stray reading sits inside its own
    # error estimate and far under the leading coefficients
    assert abs(sol.G0) <= 1e-8 * abs(sol.F0)
    assert abs(sol.G0) <= sol.eG


def test_branch_error_estimates_returned(hyp3):
    sol = solve_radial_mode(hyp3, 1.5 + 0.5, 0)
    F0, G0, eF, eG = extract_fg(sol)
    assert eF >= 0.0 and eG >= 0.0
    assert F0 == sol.F0 and G0 == sol.G0
    assert eF <= 1e-8 * abs(F0)


def test_gate_errors():
    with pytest.raises(IllConditionedFitError):
        scattering_multiplier(3, 0.97, 0)
    with pytest.raises(IllConditionedFitError):
        scattering_multiplier(3, 0.02, 0)
    with pytest.raises(IllConditionedFitError):
        adapted_profile(3, 0.99)
    m = WarpedMetric(n=3, kind="hyperbolic")
    with pytest.raises(SeriesStartError):
        solve_radial_mode(m, 2.0, 0, t0=0.5)
    with pytest.raises(SeriesStartError):
        solve_radial_mode(m, 2.0, 0, series_terms=4)
    sol = solve_radial_mode(m, 2.0, 0)
    with pytest.raises(IllConditionedFitError):
        extract_fg(sol, radii_count=2)

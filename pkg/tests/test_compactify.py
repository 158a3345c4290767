import math

import numpy as np
import pytest

from ahlab.compactify import (
    DD,
    Compactification,
    CrossCheckError,
    apply_weighted_laplacian,
    boundary_volume_report,
    build_compactification,
    conformally_shifted,
    energy,
    mean_curvature_weighted,
    weighted_J,
)
from ahlab.geometry import WarpedMetric, make_warped_metric
from ahlab.scattering import solve_radial_mode
from ahlab.specfun import sphere_constants

GRID = np.linspace(0.5, 20.0, 196)


@pytest.fixture(scope="module")
def c35():
    return build_compactification("adapted", 3, 0.5)


@pytest.fixture(scope="module")
def hemi3():
    return build_compactification("hemisphere", 3)


# -- compensated arithmetic ---------------------------------------------------


def test_dd_div_and_mul_roundtrip():
    third = DD.div(1.0, 3.0)
    assert abs((third * 3.0 - 1.0).value()) <= 1e-31
    k = DD.div(1.0, 2.5)
    assert abs((k * 2.5 - 1.0).value()) <= 1e-31


def test_dd_preserves_sub_ulp_addend():
    tiny = 1e-17
    assert ((DD(tiny) + 1.0) - 1.0).value() == tiny


def test_dd_array_components():
    a = DD(np.array([1.0, 2.0])) + np.array([1e-17, -1e-17])
    got = (a - np.array([1.0, 2.0])).value()
    assert np.array_equal(got, np.array([1e-17, -1e-17]))


# -- weighted Schouten trace, dual routes -------------------------------------


@pytest.mark.parametrize("n,gamma", [(3, 0.5), (4, 0.25), (5, 0.75)])
def test_weighted_trace_vanishes_on_model(n, gamma):
    c = build_compactification("adapted", n, gamma)
    j = weighted_J(c, c.metric, GRID)
    assert np.max(np.abs(j)) <= 1e-12


def test_hemisphere_trace_is_round_sphere_constant(hemi3):
    j = weighted_J(hemi3, hemi3.metric, GRID)
    assert np.max(np.abs(j - 2.0)) <= 1e-10


def test_cross_check_trips_on_tampered_channels():
    c = build_compactification("adapted", 3, 0.5)
    orig = Compactification.channels.__get__(c)

    def tampered(t):
        ch = orig(t)
        ch.tt2_dd = ch.tt2_dd + 1e-3
        return ch

    c.channels = tampered
    with pytest.raises(CrossCheckError) as exc:
        weighted_J(c, c.metric, GRID)
    err = exc.value
    assert np.max(np.abs(err.route_def - err.route_struct)) > 1.0


def test_perturbed_metric_trace_nonzero_but_consistent():
    metric = make_warped_metric(3, {"kind": "perturbed", "eps": 0.01, "decay": 3.0})
    c = build_compactification("transplant", 3, 0.5, metric=metric)
    j = weighted_J(c, metric, np.linspace(0.5, 15.0, 100))
    assert np.max(np.abs(j)) > 1e-4


def test_two_constructions_coincide_on_model(c35):
    c2 = build_compactification("transplant", 3, 0.5)
    ch1 = c35.channels(GRID)
    ch2 = c2.channels(GRID)
    assert np.max(np.abs(ch1.ttilde - ch2.ttilde)) <= 1e-9
    assert np.max(np.abs(ch1.h - ch2.h)) <= 1e-9
    assert np.max(np.abs(ch1.tt2 - ch2.tt2)) <= 1e-9
    assert np.max(np.abs(ch1.rho_phi / ch2.rho_phi - 1.0)) <= 1e-9


def test_kind_aliases(c35):
    assert build_compactification("type1", 3, 0.5).kind == "adapted"
    assert build_compactification("Type II", 3, 0.5).kind == "transplant"


# -- weighted operator annihilates the transplanted modes ---------------------


@pytest.mark.parametrize("k", [1, 2])
def test_weighted_operator_annihilates_modes(c35, k):
    grid = np.linspace(0.5, 10.0, 96)
    sol0 = c35.solution
    solk = solve_radial_mode(c35.metric, sol0.s, k)
    w0, v0, dv0 = sol0.w_eval(grid)
    wk, vk, dvk = solk.w_eval(grid)
    r0, rk = v0 / w0, vk / wk
    dln = rk - r0
    d2ln = (dvk / wk - rk**2) - (dv0 / w0 - r0**2)
    U = c35.F0 * wk / w0
    triple = (U, U * dln, U * (d2ln + dln**2))
    lap, lu = apply_weighted_laplacian(c35, triple, grid, mode_k=k)
    # the identity is a cancellation between second-derivative and angular
    # terms that grow with the mode amplitude; normalize by that size
    lam = k * (k + 2.0)
    scale = float(np.max(np.abs(lam * U / c35.channels(grid).rho_phi ** 2)))
    assert np.max(np.abs(lu)) <= 1e-9 * scale


# -- weighted mean curvature ---------------------------------------------------


def test_mean_curvature_boundary_limit(c35):
    grid = np.linspace(0.1, 20.0, 200)
    rep = mean_curvature_weighted(c35, c35.metric, grid)
    assert rep.limit_expected == pytest.approx(3.0, rel=1e-12)
    assert rep.limit == pytest.approx(3.0, abs=1e-4)
    assert rep.rate == pytest.approx(-1.0, abs=0.1)


@pytest.mark.parametrize("n,gamma,tol", [(3, 0.25, 0.05), (4, 0.75, 0.05)])
def test_mean_curvature_sweep_loose(n, gamma, tol):
    c = build_compactification("adapted", n, gamma)
    grid = np.linspace(0.1, 20.0, 200)
    rep = mean_curvature_weighted(c, c.metric, grid)
    assert rep.limit == pytest.approx(rep.limit_expected, abs=tol)


# -- energy ---------------------------------------------------------------------


def test_energy_limit_at_reference(c35):
    e = energy(c35, c35.metric, None, r_max=30.0)
    assert e == pytest.approx(2.0 * math.pi**2, abs=1e-6)


def test_energy_invariance_model_pair(c35):
    from ahlab.verify import _profile_shift_and_trial

    shift, trial = _profile_shift_and_trial(c35)
    e_bar = energy(conformally_shifted(c35, shift), c35.metric, trial, r_max=10.0)
    e_til = energy(c35, c35.metric, None, r_max=10.0)
    assert e_bar == pytest.approx(e_til, abs=5e-8)


def test_energy_invariance_model_pair_short_radius():
    from ahlab.verify import _profile_shift_and_trial

    c = build_compactification("adapted", 3, 0.75)
    shift, trial = _profile_shift_and_trial(c)
    e_bar = energy(conformally_shifted(c, shift), c.metric, trial, r_max=6.0)
    e_til = energy(c, c.metric, None, r_max=6.0)
    assert e_bar == pytest.approx(e_til, abs=1e-9)


def test_energy_invariance_synthetic_shift(c35):
    delta = 0.05
    ns = 3.0 - c35.solution.s

    def w_eval(t):
        e = delta * np.exp(-2.0 * t)
        return e, -2.0 * e, 4.0 * e

    def trial(t):
        w = delta * np.exp(-2.0 * t)
        f = np.exp(-ns * w)
        return f, 2.0 * ns * w * f

    e_bar = energy(conformally_shifted(c35, w_eval), c35.metric, trial, r_max=12.0)
    e_til = energy(c35, c35.metric, None, r_max=12.0)
    assert e_bar == pytest.approx(e_til, abs=1e-8)


def test_shifted_compactification_passes_cross_check(c35):
    def w_eval(t):
        e = 0.05 * np.exp(-2.0 * t)
        return e, -2.0 * e, 4.0 * e

    shifted = conformally_shifted(c35, w_eval)
    j = weighted_J(shifted, shifted.metric, np.linspace(0.5, 15.0, 100))
    assert np.max(np.abs(j)) > 1e-6  # genuinely moved off the model zero


# -- compactified boundary volume ------------------------------------------------


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_boundary_volume_rate_and_limit(gamma):
    c = build_compactification("adapted", 3, gamma)
    rep = boundary_volume_report(c)
    assert -rep.rate == pytest.approx(2.0 * gamma, abs=0.1)
    assert rep.limit == pytest.approx(2.0 * math.pi**2, rel=1e-2)


# -- argument validation ----------------------------------------------------------


def test_error_paths(c35, hemi3):
    with pytest.raises(ValueError):
        energy(hemi3, hemi3.metric)
    with pytest.raises(ValueError):
        mean_curvature_weighted(c35, c35.metric, np.linspace(0.1, 15.0, 50))
    perturbed = make_warped_metric(3, {"kind": "perturbed", "eps": 0.01, "decay": 3.0})
    with pytest.raises(ValueError):
        build_compactification("adapted", 3, 0.5, metric=perturbed)
    with pytest.raises(ValueError):
        build_compactification("adapted", 3)
    with pytest.raises(ValueError):
        build_compactification("mystery", 3, 0.5)
    with pytest.raises(ValueError):
        boundary_volume_report(c35, fit_radii=(1.0, 2.0, 4.0))
    with pytest.raises(ValueError):
        weighted_J(c35, perturbed, GRID)

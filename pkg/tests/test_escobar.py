import math

import numpy as np
import pytest

from ahlab.escobar import hemisphere_check, yb_value
from ahlab.specfun import sphere_constants, sphere_volume


@pytest.fixture(scope="module")
def rep3():
    return hemisphere_check(3)


def test_integer_solve_matches_cosh(rep3):
    assert rep3.cosh_rel_dev <= 1e-10


def test_boundary_expansion_quadratic_coefficient(rep3):
    assert rep3.x2_coeff == pytest.approx(0.25, abs=1e-8)
    assert rep3.g0_stray <= 1e-8


def test_scalar_curvature_constant_three_routes(rep3):
    # conformal-change assembly, weighted-trace route, and closed-form
    # sectional route all agree with n(n+1)
    assert rep3.rtilde_max_dev <= 1e-8
    assert rep3.sectional_max_dev <= 1e-8


def test_sharp_constant_formula(rep3):
    expected = 12.0 * (0.5 * sphere_volume(4)) ** 0.5
    assert rep3.ya_hemisphere == pytest.approx(expected, rel=1e-15)
    assert rep3.ya_hemisphere == pytest.approx(43.53118474162119, rel=1e-12)


def test_boundary_conversion_factor(rep3):
    assert rep3.yb_conversion == pytest.approx(6.0, rel=1e-15)
    assert yb_value(3, 1.0) == pytest.approx(6.0, rel=1e-15)
    # half-order fractional constant carried through the conversion
    y1 = sphere_constants(3, 0.5).yamabe
    assert yb_value(3, y1) == pytest.approx(16.2154, abs=1e-3)


def test_equator_mean_curvature(rep3):
    # centered spheres have mean curvature n/sinh over the whole range and
    # the equatorial limit vanishes
    assert rep3.equator_h_max_dev <= 1e-8
    assert rep3.equator_H == pytest.approx(3.0 / math.sinh(20.0), rel=1e-6)
    assert abs(rep3.equator_h_limit) <= 1e-8


def test_half_volume_identity(rep3):
    assert rep3.volume_half_dev <= 1e-8


def test_relative_volume_of_balls(rep3):
    assert rep3.ratio_max_dev <= 1e-12
    assert rep3.ratio_limit == pytest.approx(1.0, abs=1e-12)
    assert rep3.ratio_nonincreasing
    assert np.all(rep3.ratio > 0.0)
    assert rep3.grid.shape == rep3.ratio.shape


def test_dimension_four_light_pass():
    rep = hemisphere_check(4, grid=np.linspace(0.1, 20.0, 120))
    assert rep.rtilde_max_dev <= 1e-8
    assert rep.sectional_max_dev <= 1e-8
    assert rep.ratio_max_dev <= 1e-12
    assert rep.ratio_nonincreasing
    assert rep.yb_conversion == pytest.approx(16.0 / 3.0, rel=1e-15)

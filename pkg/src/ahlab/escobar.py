"""Upper-hemisphere checks: the sech-t change of variable sends hyperbolic
space to the round upper hemisphere, and every closed-form quantity of that
picture is recomputed here through the same numerical machinery used for
the fractional constructions, giving end-to-end integer-order validation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import specfun
from .geometry import WarpedMetric
from .scattering import solve_radial_mode, extract_fg
from .compactify import DD, build_compactification, weighted_J, mean_curvature_weighted


@dataclass
class EscobarReport:
    """Numbers behind the boundary-version comparison on the hemisphere."""

    n: int
    ya_hemisphere: float
    yb_conversion: float
    cosh_rel_dev: float
    x2_coeff: float
    g0_stray: float
    rtilde_max_dev: float
    sectional_max_dev: float
    equator_H: float
    equator_h_max_dev: float
    equator_h_limit: float
    volume_half_dev: float
    ratio_limit: float
    ratio_max_dev: float
    ratio_nonincreasing: bool
    grid: np.ndarray
    ratio: np.ndarray


def yb_value(n, y1):
    """Boundary-normalized constant from the volume-normalized one."""
    return 4.0 * n / (n - 1.0) * y1


def _round_ball_volume(n, r):
    # volume of the geodesic ball of radius r in the unit round S^{n+1}
    val, _ = quad(lambda u: math.sin(u) ** n, 0.0, r, epsabs=0.0, epsrel=1e-13)
    return specfun.sphere_volume(n) * val


def _rtilde_conformal(n, ch):
    """Scalar curvature after the change of variable, assembled literally as
    constant + Laplacian of the shift - gradient-square terms.

    The integer constants cancel only after combination, so near the
    boundary the e^{2 ttilde} prefactor would amplify double rounding past
    any useful tolerance; the bracket is therefore carried in compensated
    arithmetic.
    """
    nf = float(n)
    # phi'/phi of the sinh warp; past t ~ 18 the c2 channel drops below
    # half an ulp of 1, so the sum 1 + c2 must itself be held unevaluated
    C = DD(ch.c2) + 1.0
    one_h = ch.h_dd + 1.0
    # Delta t~ = tt2 + n * C * (1 + h)
    lap = ch.tt2_dd + (one_h * C) * nf
    bracket = DD(-nf * (nf + 1.0)) + lap * (2.0 * nf) - one_h * one_h * (nf * (nf - 1.0))
    return np.exp(2.0 * ch.ttilde) / 4.0 * bracket.value()


def hemisphere_check(n, grid=None):
    """Recompute the hemisphere picture numerically and report deviations.

    Covers: the integer-exponent solve against cosh, the quadratic
    coefficient 1/4 of the boundary expansion, constancy of the scalar and
    sectional curvatures after the change of variable, the equatorial mean
    curvature, the half-volume identity, and the relative volume of
    centered balls against round balls of matched radius.
    """
    if grid is None:
        grid = np.linspace(0.1, 20.0, 200)
    grid = np.asarray(grid, dtype=float)
    metric = WarpedMetric(n=n, kind="hyperbolic")

    sol = solve_radial_mode(metric, n + 1.0, 0)
    extract_fg(sol)
    ts = np.linspace(0.01, 20.0, 400)
    w, _, _ = sol.w_eval(ts)
    u = w * np.exp((sol.s - n) * ts)
    cosh_rel_dev = float(np.max(np.abs(u / np.cosh(ts) - 1.0)))

    c = build_compactification("hemisphere", n, None, metric)
    j = weighted_J(c, metric, grid)
    rtilde = _rtilde_conformal(n, c.channels(grid))
    rtilde_max_dev = float(np.max(np.abs(rtilde - n * (n + 1.0))))
    # m = 0, so the weighted trace J equals R / (2n): independent assembly
    rtilde_max_dev = max(rtilde_max_dev, float(np.max(np.abs(2.0 * n * j - rtilde))))

    # sectional route: compactified warp and defining function in closed form
    sech = 1.0 / np.cosh(grid)
    tanh = np.tanh(grid)
    phi_t = tanh
    dphi = sech**2
    ddphi = -2.0 * sech**2 * tanh
    drho = -sech * tanh
    k_rad = -(ddphi / sech**2 - dphi * drho / sech**3) / phi_t
    k_tan = (1.0 - (dphi / sech) ** 2) / phi_t**2
    sectional_max_dev = float(max(np.max(np.abs(k_rad - 1.0)), np.max(np.abs(k_tan - 1.0))))
    rtilde_sec = 2.0 * n * k_rad + n * (n - 1.0) * k_tan
    rtilde_max_dev = max(rtilde_max_dev, float(np.max(np.abs(rtilde_sec - rtilde))))

    hrep = mean_curvature_weighted(c, metric, grid)
    equator_h_max_dev = float(np.max(np.abs(hrep.values - n / np.sinh(grid))))

    vol_half, _ = quad(lambda t: math.cosh(t) ** (-(n + 1)) * math.sinh(t) ** n,
                       0.0, 60.0, epsabs=0.0, epsrel=1e-13)
    vol_half = specfun.sphere_volume(n) * vol_half
    volume_half_dev = float(abs(vol_half - 0.5 * specfun.sphere_volume(n + 1)))

    ratio = np.empty_like(grid)
    for i, t in enumerate(grid):
        num, _ = quad(lambda tt: math.cosh(tt) ** (-(n + 1)) * math.sinh(tt) ** n,
                      0.0, t, epsabs=0.0, epsrel=1e-13)
        num *= specfun.sphere_volume(n)
        s_of_t = math.atan(math.sinh(t))  # compactified distance from the pole
        ratio[i] = num / _round_ball_volume(n, s_of_t)
    dr = np.diff(ratio)
    nonincreasing = bool(np.all(dr <= 1e-11))

    ya = n * (n + 1.0) * (0.5 * specfun.sphere_volume(n + 1)) ** (2.0 / (n + 1.0))
    return EscobarReport(
        n=n,
        ya_hemisphere=ya,
        yb_conversion=4.0 * n / (n - 1.0),
        cosh_rel_dev=cosh_rel_dev,
        x2_coeff=sol.hemi_x2,
        g0_stray=abs(sol.G0),
        rtilde_max_dev=rtilde_max_dev,
        sectional_max_dev=sectional_max_dev,
        equator_H=float(abs(hrep.values[-1])),
        equator_h_max_dev=equator_h_max_dev,
        equator_h_limit=hrep.limit,
        volume_half_dev=volume_half_dev,
        ratio_limit=float(ratio[-1]),
        ratio_max_dev=float(np.max(np.abs(ratio - 1.0))),
        ratio_nonincreasing=nonincreasing,
        grid=grid,
        ratio=ratio,
    )

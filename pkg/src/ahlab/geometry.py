"""Rotationally symmetric asymptotically hyperbolic metrics
g = dt^2 + phi(t)^2 g_S on (0, inf) x S^n.

The warp is either sinh(t) (hyperbolic space) or sinh(t)*(1+eta(t)) with a
decaying perturbation eta.  All curvature evaluators are written in
"deviation channels" that are exactly zero on the hyperbolic warp, so no
tolerance downstream ever has to absorb a cosh^2 - sinh^2 cancellation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .specfun import sphere_volume


class InvalidWarpError(ValueError):
    """Warp description failing positivity or asymptotics on the scan grid."""


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


def _bump(t):
    # Quintic smootherstep: 1 for t >= 1, vanishing to second order at 0.
    t = np.asarray(t, dtype=float)
    s = np.where(t >= 1.0, 1.0, t**3 * (10.0 - 15.0 * t + 6.0 * t**2))
    sp = np.where(t >= 1.0, 0.0, 30.0 * t**2 * (1.0 - t) ** 2)
    spp = np.where(t >= 1.0, 0.0, 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t))
    return s, sp, spp


@dataclass(frozen=True)
class WarpedMetric:
    """Warped-product metric dt^2 + phi^2 g_S with analytic derivatives."""

    n: int
    kind: str                      # "hyperbolic" or "perturbed"
    eps: float = 0.0
    decay: float = 0.0

    def eta(self, t):
        """Relative warp perturbation (eta, eta', eta''); zero if hyperbolic."""
        t = np.asarray(t, dtype=float)
        if self.kind == "hyperbolic" or self.eps == 0.0:
            z = np.zeros_like(t)
            return z, z.copy(), z.copy()
        a = self.decay
        s, sp, spp = _bump(t)
        e = self.eps * np.exp(-a * t)
        return e * s, e * (sp - a * s), e * (spp - 2.0 * a * sp + a * a * s)

    def warp(self, t):
        """(phi, phi', phi'')."""
        t = np.asarray(t, dtype=float)
        sh, ch = np.sinh(t), np.cosh(t)
        e, ep, epp = self.eta(t)
        return (
            sh * (1.0 + e),
            ch * (1.0 + e) + sh * ep,
            sh * (1.0 + e) + 2.0 * ch * ep + sh * epp,
        )

    # -- deviation channels (exact zeros on sinh) ------------------------

    def c2(self, t):
        """phi'/phi - 1.  Hyperbolic part is 2/expm1(2t), no cancellation."""
        t = np.asarray(t, dtype=float)
        base = 2.0 / np.expm1(2.0 * t)
        e, ep, _ = self.eta(t)
        return base + ep / (1.0 + e)

    def inv_phi_sq(self, t):
        t = np.asarray(t, dtype=float)
        e, _, _ = self.eta(t)
        return 1.0 / (np.sinh(t) * (1.0 + e)) ** 2

    def rad_defect(self, t):
        """K_rad + 1 = (phi - phi'')/phi; zero on the model."""
        t = np.asarray(t, dtype=float)
        e, ep, epp = self.eta(t)
        sh, ch = np.sinh(t), np.cosh(t)
        return -(2.0 * ch * ep + sh * epp) / (sh * (1.0 + e))

    def tan_defect(self, t):
        """K_tan + 1 = (1 - phi'^2 + phi^2)/phi^2; zero on the model.

        The numerator is expanded so cosh^2 - sinh^2 = 1 is used exactly:
        every surviving term is O(eta).
        """
        t = np.asarray(t, dtype=float)
        e, ep, _ = self.eta(t)
        sh, ch = np.sinh(t), np.cosh(t)
        num = -2.0 * e - e * e - 2.0 * ch * sh * (1.0 + e) * ep - (sh * ep) ** 2
        return num / (sh * (1.0 + e)) ** 2


def make_warped_metric(n, spec):
    """Build a WarpedMetric from "hyperbolic" or
    {"kind": "perturbed", "eps": float, "decay": float}.

    Scans (0, 40] for phi > 0, phi' > 0 and the asymptotically hyperbolic
    normalization phi * 2 e^{-t} -> 1; rejects on failure.
    """
    if spec == "hyperbolic" or (isinstance(spec, dict) and spec.get("kind") == "hyperbolic"):
        return WarpedMetric(n=n, kind="hyperbolic")
    if not isinstance(spec, dict) or spec.get("kind") != "perturbed":
        raise InvalidWarpError("unknown warp spec %r" % (spec,))
    eps = float(spec.get("eps", 0.0))
    decay = float(spec.get("decay", spec.get("a", 2.0)))
    if decay < 2.0:
        raise InvalidWarpError("perturbation decay rate must be >= 2, got %g" % decay)
    metric = WarpedMetric(n=n, kind="perturbed", eps=eps, decay=decay)
    grid = np.concatenate([np.linspace(1e-3, 1.0, 200), np.linspace(1.0, 40.0, 400)])
    phi, dphi, _ = metric.warp(grid)
    if np.any(phi <= 0.0):
        raise InvalidWarpError("warp not positive on the scan grid")
    if np.any(dphi <= 0.0):
        raise InvalidWarpError("warp not strictly increasing on the scan grid")
    tail = phi[-1] * 2.0 * math.exp(-grid[-1])
    if abs(tail - 1.0) > 1e-6:
        raise InvalidWarpError("warp is not asymptotically hyperbolic (tail %g)" % tail)
    return metric


@dataclass
class CurvatureReport:
    grid: np.ndarray
    K_rad: np.ndarray
    K_tan: np.ndarray
    ricci_defect: float      # max over grid of -(smallest eigenvalue of Ric + n g)
    einstein_defect: float   # max over grid of |Ric + n g| entrywise


def curvature_report(metric, grid):
    """Sectional curvatures and Ricci gap of the warped metric.

    In the orthonormal radial frame the eigenvalues of Ric + n g are
    n*(K_rad+1) radially and (K_rad+1) + (n-1)*(K_tan+1) tangentially,
    computed here from the deviation channels.
    """
    grid = np.asarray(grid, dtype=float)
    n = metric.n
    rad = metric.rad_defect(grid)
    tan = metric.tan_defect(grid)
    lam_rad = n * rad
    lam_tan = rad + (n - 1) * tan
    return CurvatureReport(
        grid=grid,
        K_rad=rad - 1.0,
        K_tan=tan - 1.0,
        ricci_defect=float(np.max(np.maximum(-lam_rad, -lam_tan))),
        einstein_defect=float(np.max(np.maximum(np.abs(lam_rad), np.abs(lam_tan)))),
    )


def radial_laplacian(metric, profile):
    """Laplace-Beltrami operator on radial functions: u'' + n (phi'/phi) u'.

    `profile` maps t to (u, u', u''); the result maps t to the Laplacian.
    """

    def apply(t):
        t = np.asarray(t, dtype=float)
        _, du, ddu = profile(t)
        return ddu + metric.n * (1.0 + metric.c2(t)) * du

    return apply


@dataclass
class VolumeCurve:
    grid: np.ndarray
    area: np.ndarray
    ball: np.ndarray
    area_ratio: np.ndarray
    ball_ratio: np.ndarray
    monotone: bool
    quad_error: float = 0.0


_SERIES_CUT = 1e-3


def _ball_below_cut(metric, n, cut):
    # phi = t + t^3/6 + O(t^4) below the cut (the perturbation family
    # vanishes to second order at 0), so the integral of phi^n is
    # t^(n+1)/(n+1) + n t^(n+3)/(6(n+3)) up to O(cut^(n+5)).
    return cut ** (n + 1) / (n + 1) + n * cut ** (n + 3) / (6.0 * (n + 3))


def _phi_n_profile(metric, n):
    def f(t):
        phi, _, _ = metric.warp(t)
        return phi**n

    return f


def volume_data(metric, grid):
    """Areas of geodesic spheres and volumes of balls, with ratios against
    the hyperbolic warp of the same dimension."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0.0) or grid[0] <= 0.0:
        raise ValueError("volume_data: grid must be increasing and positive")
    n = metric.n
    vol_sn = sphere_volume(n)
    reference = (
        metric
        if metric.kind == "hyperbolic"
        else WarpedMetric(n=n, kind="hyperbolic")
    )

    def accumulate(m):
        f = _phi_n_profile(m, n)
        vals = np.empty_like(grid)
        worst = 0.0
        # rough scale for the absolute tolerance target 1e-10 * ball(t_N)
        rough, _ = quad(f, _SERIES_CUT, grid[-1], epsrel=1e-8, limit=200)
        budget = 1e-10 * max(rough, 1.0) / (len(grid) + 1)
        acc = _ball_below_cut(m, n, _SERIES_CUT)
        prev = _SERIES_CUT
        for i, t in enumerate(grid):
            piece, err = quad(f, prev, t, epsabs=budget, epsrel=1e-12, limit=200)
            worst = max(worst, err)
            acc += piece
            vals[i] = acc
            prev = t
        if worst > 1e-6 * max(rough, 1.0):
            raise QuadratureError("ball volume quadrature did not converge", worst)
        return vals, worst

    phi, _, _ = metric.warp(grid)
    area = vol_sn * phi**n
    ball, err = accumulate(metric)
    ball *= vol_sn
    if metric.kind == "hyperbolic":
        area_ref, ball_ref = area, ball
    else:
        phi_ref, _, _ = reference.warp(grid)
        area_ref = vol_sn * phi_ref**n
        ball_ref, _ = accumulate(reference)
        ball_ref *= vol_sn
    area_ratio = area / area_ref
    ball_ratio = ball / ball_ref
    monotone = bool(np.all(np.diff(ball_ratio) <= 1e-12))
    return VolumeCurve(
        grid=grid,
        area=area,
        ball=ball,
        area_ratio=area_ratio,
        ball_ratio=ball_ratio,
        monotone=monotone,
        quad_error=err,
    )

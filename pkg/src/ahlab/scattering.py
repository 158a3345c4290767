"""Radial mode solves of the Poisson-type equation

    u'' + n (phi'/phi) u' - [k(k+n-1)/phi^2] u + s(n-s) u = 0

on a rotationally symmetric asymptotically hyperbolic metric, with
extraction of the two branch coefficients in

    u = F(x) x^(n-s) + G(x) x^s,        x = 2 e^{-t}.

The integration variable is the rescaled w(t) = u(t) e^{(n-s)t}, which
stays O(1) where u would underflow.  All coefficients of the w-equation
are evaluated through the metric's deviation channels, so round-off enters
the decaying branch only relative to its own size; this is what makes the
branch ratio recoverable to ~1e-10 even when x^{2 gamma} is far below the
dominant branch.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import specfun
from .geometry import WarpedMetric

# coth t = 1/t + sum_j B[j-1] t^(2j-1); 1/sinh^2 t = 1/t^2 - sum_j (2j-1) B[j-1] t^(2j-2)
_COTH_B = (
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
    -3617.0 / 162820783125.0,
)


class StiffnessError(RuntimeError):
    """Adaptive integrator failed to reach T_max."""


class SeriesStartError(ValueError):
    """Requested series start lies outside the safe expansion range."""


class IllConditionedFitError(RuntimeError):
    """Branch extraction outside its well-posed range."""


def _series_coeffs(n, s, k, terms):
    """Coefficients c_m of u(t) = (t/t0)^k * sum_m c_m t^{2m}, c_0 = 1.

    Recurrence from matching powers of t in the mode equation with the
    sinh-warp expansions of phi'/phi and 1/phi^2.
    """
    lam = k * (k + n - 1)
    sigma = s * (n - s)
    c = [1.0]
    for m in range(1, terms + 1):
        acc = sigma * c[m - 1]
        for j in range(1, min(m, len(_COTH_B)) + 1):
            acc += _COTH_B[j - 1] * c[m - j] * (n * (k + 2 * m - 2 * j) + (2 * j - 1) * lam)
        c.append(-acc / (2.0 * m * (2 * k + 2 * m + n - 1)))
    return c


def _series_u(coeffs, n, s, k, t0, t):
    """(u, u') from the Frobenius series, valid for t <= a few * t0."""
    t = np.asarray(t, dtype=float)
    p = np.zeros_like(t)
    dp = np.zeros_like(t)
    for m in range(len(coeffs) - 1, -1, -1):
        cm = coeffs[m]
        p = p * t * t + cm
        dp = dp * t * t + cm * (k + 2 * m)
    lead = (t / t0) ** k
    return lead * p, lead * dp / t


@dataclass
class RadialSolution:
    """Sampled regular-at-origin mode solution in the rescaled variable.

    u, uprime hold w = u_raw * e^{(n-s)t} and its t-derivative; the
    rescaling exponent n-s is recorded for serialization.
    """

    n: int
    s: float
    k: int
    grid: np.ndarray
    u: np.ndarray
    uprime: np.ndarray
    rescale_exponent: float
    metric: WarpedMetric
    positive: bool
    F0: float = None
    G0: float = None
    eF: float = None
    eG: float = None
    _dense: object = field(default=None, repr=False)
    _t0: float = field(default=1e-3, repr=False)
    _series: list = field(default_factory=list, repr=False)

    @property
    def gamma(self):
        return self.s - 0.5 * self.n

    def _rhs(self, t, y):
        n, s = self.n, self.s
        lam = self.k * (self.k + n - 1)
        c2 = self.metric.c2(t)
        w, v = y
        dv = -((2.0 * s - n) + n * c2) * v + (n * (n - s) * c2 + lam * self.metric.inv_phi_sq(t)) * w
        return np.array([v, dv])

    def w_eval(self, t):
        """(w, w', w'') with w'' taken from the equation itself."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        w = np.empty_like(t)
        v = np.empty_like(t)
        hi = t >= self._t0
        if np.any(hi):
            vals = self._dense(t[hi])
            w[hi], v[hi] = vals[0], vals[1]
        if np.any(~hi):
            ns = self.n - self.s
            us, dus = _series_u(self._series, self.n, self.s, self.k, self._t0, t[~hi])
            grow = np.exp(ns * t[~hi])
            w[~hi] = us * grow
            v[~hi] = (dus + ns * us) * grow
        n, s = self.n, self.s
        lam = self.k * (self.k + n - 1)
        c2 = self.metric.c2(t)
        dv = -((2.0 * s - n) + n * c2) * v + (n * (n - s) * c2 + lam * self.metric.inv_phi_sq(t)) * w
        if scalar:
            return w[0], v[0], dv[0]
        return w, v, dv

    def W_eval(self, t):
        """w scaled by 2^{s-n}, so that W -> F0 + G0 x^{2 gamma}."""
        scale = 2.0 ** (self.s - self.n)
        w, v, dv = self.w_eval(t)
        return scale * w, scale * v, scale * dv


def _integrate_w(metric, s, k, t0, y0, T_max, rel_tol, first_step=None):
    n = metric.n
    lam = k * (k + n - 1)
    two_s_minus_n = 2.0 * s - n
    n_minus_s = n - s

    def rhs(t, y):
        c2 = metric.c2(t)
        dv = -(two_s_minus_n + n * c2) * y[1] + (n * n_minus_s * c2 + lam * metric.inv_phi_sq(t)) * y[0]
        return (y[1], dv)

    last = None
    for atol in (1e-300, 1e-250, 1e-200):
        sol = solve_ivp(
            rhs,
            (t0, T_max),
            y0,
            method="DOP853",
            rtol=rel_tol,
            atol=atol,
            dense_output=True,
            first_step=first_step,
        )
        last = sol
        if sol.success:
            return sol
    raise StiffnessError("integrator failed: %s" % last.message)


def solve_radial_mode(metric, s, k=0, T_max=30.0, rel_tol=1e-12, t0=1e-3, series_terms=8):
    """Integrate the mode equation from a Frobenius start at t0.

    Returns a RadialSolution sampled on a default grid and carrying a dense
    evaluator.  Branch coefficients are filled in by extract_fg.
    """
    if t0 > 0.1:
        raise SeriesStartError("series start t0 = %g exceeds the safe range (<= 0.1)" % t0)
    if series_terms < 6:
        raise SeriesStartError("need at least 6 series terms for the start")
    n = metric.n
    coeffs = _series_coeffs(n, s, k, series_terms)
    u0, du0 = _series_u(coeffs, n, s, k, t0, np.array([t0]))
    grow = math.exp((n - s) * t0)
    y0 = (u0[0] * grow, (du0[0] + (n - s) * u0[0]) * grow)
    dense = _integrate_w(metric, s, k, t0, y0, T_max, rel_tol)
    grid = np.concatenate(
        [np.geomspace(t0, 1.0, 40, endpoint=False), np.linspace(1.0, T_max, 581)]
    )
    sol = RadialSolution(
        n=n,
        s=s,
        k=k,
        grid=grid,
        u=np.empty_like(grid),
        uprime=np.empty_like(grid),
        rescale_exponent=n - s,
        metric=metric,
        positive=False,
        _dense=dense.sol,
        _t0=t0,
        _series=coeffs,
    )
    w, v, _ = sol.w_eval(grid)
    sol.u, sol.uprime = w, v
    sol.positive = bool(np.all(w > 0.0))
    return sol


def _richardson(values, step, mus):
    """Eliminate exponential error terms exp(-mu * t) from values sampled at
    equally spaced radii (ascending).  Returns the list of tableau levels."""
    levels = [np.asarray(values, dtype=float)]
    for mu in mus:
        q = math.exp(-mu * step)
        prev = levels[-1]
        if len(prev) < 2:
            break
        levels.append((prev[1:] - q * prev[:-1]) / (1.0 - q))
    return levels


def _tableau_estimate(values, step, mus):
    levels = _richardson(values, step, mus)
    best = levels[-1][-1]
    if len(levels) >= 2:
        err = abs(best - levels[-2][-1])
    else:
        err = abs(values[-1] - values[0])
    if len(levels[-1]) >= 2:
        err = max(err, abs(levels[-1][-1] - levels[-1][0]))
    return best, 10.0 * err + 1e-15 * abs(best)


def extract_fg(sol, radii_count=5, spacing=2.0):
    """Branch coefficients (F0, G0, eF, eG) of the sampled solution.

    Fractional range: per-radius estimators built from (W, W') are combined
    by generalized Richardson elimination over the known correction
    exponents {2-2g, 2, 4-2g}.  The derivative-based estimator
    G_j = -W'_j / (2g x^{2g}) keeps the subdominant branch at full relative
    accuracy, which value-only fits lose once x^{2g} falls under the
    integrator tolerance.

    s = n+1: the even corrections belong to F (basis 1, x^2, x^{n+2}); a
    per-radius 3x3 solve on (W, W', W'') at early radii is exact for the
    model and its spread gives the error estimate.
    """
    n = sol.n
    T = sol.grid[-1]
    if abs(sol.s - (n + 1)) < 1e-12:
        return _extract_fg_integer(sol, radii_count)
    delta = 2.0 * sol.gamma
    if not 0.1 <= delta <= 1.9:
        raise IllConditionedFitError("branch exponent 2*gamma = %g outside [0.1, 1.9]" % delta)
    if radii_count < 3:
        raise IllConditionedFitError("need at least 3 fit radii")
    mus = sorted([2.0 - delta, 2.0, 4.0 - delta])
    amp = 1.0
    for mu in mus:
        amp /= 1.0 - math.exp(-mu * spacing)
    if amp > 1e8:
        raise IllConditionedFitError("elimination amplification %g exceeds 1e8" % amp)
    radii = T - spacing * np.arange(radii_count - 1, -1, -1)
    if radii[0] < 5.0:
        raise IllConditionedFitError("fit radii reach below t = 5; raise T_max")
    W, Wd, _ = sol.W_eval(radii)
    x = 2.0 * np.exp(-radii)
    xd = x**delta
    G_hat = -Wd / (delta * xd)
    F_hat = W - G_hat * xd
    G0, eG = _tableau_estimate(G_hat, spacing, mus)
    F0, eF = _tableau_estimate(F_hat, spacing, [2.0, 2.0 + delta])
    sol.F0, sol.G0, sol.eF, sol.eG = float(F0), float(G0), float(eF), float(eG)
    return sol.F0, sol.G0, sol.eF, sol.eG


def _extract_fg_integer(sol, radii_count):
    # s = n+1: exponents of the second branch and first correction are
    # (n+2, 2); early radii keep x^{n+2} above the integrator noise.  On
    # the sinh warp the growing branch terminates at x^2 exactly, so the
    # per-radius solve has no truncation error there at all.
    n = sol.n
    radii = 2.0 + np.arange(max(3, radii_count))
    radii = radii[radii <= sol.grid[-1] - 1.0]
    W, Wd, Wdd = sol.W_eval(radii)
    x = 2.0 * np.exp(-radii)
    p = n + 2.0
    det = -2.0 * p * p + 4.0 * p
    A = (p * p * Wd + p * Wdd) / det          # f1 * x^2
    B = (-2.0 * Wdd - 4.0 * Wd) / det         # G0 * x^{n+2}
    F0s = W - A - B
    f1s = A / x**2
    G0s = B / x**p
    mid = len(radii) // 2
    F0, G0 = float(F0s[mid]), float(G0s[mid])
    eF = 10.0 * float(np.ptp(F0s)) + 1e-15 * abs(F0)
    eG = 10.0 * float(np.ptp(G0s)) + 1e-15
    sol.F0, sol.G0, sol.eF, sol.eG = F0, G0, eF, eG
    sol.hemi_x2 = float(f1s[mid]) / F0
    return F0, G0, eF, eG


def scattering_multiplier(n, gamma, k, T_max=30.0, rel_tol=1e-12):
    """Numeric multiplier d_gamma * G0/F0 of the degree-k harmonic on the
    round sphere, from a hyperbolic-space solve."""
    if not 0.05 <= gamma <= 0.95:
        raise IllConditionedFitError("gamma = %g outside [0.05, 0.95]" % gamma)
    metric = WarpedMetric(n=n, kind="hyperbolic")
    sol = solve_radial_mode(metric, 0.5 * n + gamma, k, T_max=T_max, rel_tol=rel_tol)
    F0, G0, _, _ = extract_fg(sol)
    return specfun.d_gamma(n, gamma) * G0 / F0


@dataclass
class AdaptedProfile:
    """k=0 solution normalized so the growing-branch coefficient is 1.

    phi maps t to (value, derivative) of the profile
    x^{n-s} W(t)/F0, the one-variable function whose kappa-th power is the
    adapted defining function (kappa = 2/(n-2 gamma)).
    """

    n: int
    gamma: float
    G0: float
    g0_expected: float
    x2_coeff: float
    x2_expected: float
    monotone: bool
    solution: RadialSolution

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        ns = self.n - self.solution.s
        W, Wd, _ = self.solution.W_eval(t)
        F0 = self.solution.F0
        xp = (2.0 * np.exp(-t)) ** ns
        val = xp * W / F0
        der = xp * (Wd - ns * W) / F0
        return val, der


def _x2_coefficient(sol):
    """Relative x^2 coefficient F2/F0 of the growing branch.

    Subtracting the extracted G0 from -W'/x^2 leaves F2 plus corrections
    with exponents {2 gamma, 2}; three mid-range radii eliminate both.
    """
    delta = 2.0 * sol.gamma
    radii = np.array([8.0, 10.0, 12.0])
    W, Wd, _ = sol.W_eval(radii)
    x = 2.0 * np.exp(-radii)
    vals = (-Wd / x**2 - delta * sol.G0 * x ** (delta - 2.0)) / 2.0
    est, _ = _tableau_estimate(vals, 2.0, sorted([delta, 2.0]))
    return float(est) / sol.F0


def adapted_profile(n, gamma, T_max=30.0, rel_tol=1e-12):
    """Adapted radial profile for the model metric, with the extracted
    decaying-branch coefficient and a monotonicity certificate."""
    if not 0.05 <= gamma <= 0.95:
        raise IllConditionedFitError("gamma = %g outside [0.05, 0.95]" % gamma)
    metric = WarpedMetric(n=n, kind="hyperbolic")
    sol = solve_radial_mode(metric, 0.5 * n + gamma, 0, T_max=T_max, rel_tol=rel_tol)
    extract_fg(sol)
    consts = specfun.sphere_constants(n, gamma)
    g0_expected = (n - 2.0 * gamma) / (2.0 * consts.d_gamma) * consts.q_curv
    x2_expected = (n - 2.0 * gamma) / (8.0 * (1.0 - gamma)) * (0.5 * n)
    prof = AdaptedProfile(
        n=n,
        gamma=gamma,
        G0=sol.G0 / sol.F0,
        g0_expected=g0_expected,
        x2_coeff=0.0,
        x2_expected=x2_expected,
        monotone=False,
        solution=sol,
    )
    prof.x2_coeff = _x2_coefficient(sol)
    scan = np.linspace(0.05, min(25.0, T_max - 1.0), 400)
    _, dphi = prof.phi(scan)
    prof.monotone = bool(np.all(dphi < 0.0))
    return prof

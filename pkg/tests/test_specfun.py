import math

import numpy as np
import pytest

from ahlab import specfun
from ahlab.specfun import (
    PoleError,
    d_gamma,
    gamma_ratio,
    log_gamma,
    sphere_constants,
    sphere_multiplier,
    sphere_volume,
)


def test_log_gamma_matches_lgamma_on_positive_axis():
    rng = np.random.default_rng(7)
    xs = np.concatenate([rng.uniform(0.5, 170.0, 200), [0.5, 1.0, 1.5, 2.0, 170.0]])
    for x in xs:
        lg, sg = log_gamma(float(x))
        assert sg == 1.0
        assert lg == pytest.approx(math.lgamma(float(x)), rel=1e-13, abs=1e-13)


def test_log_gamma_negative_non_integers():
    rng = np.random.default_rng(11)
    for _ in range(200):
        x = -rng.uniform(0.05, 25.0)
        if abs(x - round(x)) < 0.05:
            continue
        lg, sg = log_gamma(x)
        assert lg == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)
        # sign of Gamma alternates between consecutive negative integers
        expected_sign = 1.0 if math.floor(x) % 2 == 0 else -1.0
        assert sg == expected_sign


def test_gamma_half_is_sqrt_pi():
    lg, sg = log_gamma(0.5)
    assert sg == 1.0
    assert math.exp(lg) == pytest.approx(math.sqrt(math.pi), rel=1e-15)


def test_reflection_identity():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.uniform(0.05, 0.95)
        la, _ = log_gamma(x)
        lb, _ = log_gamma(1.0 - x)
        assert la + lb == pytest.approx(
            math.log(math.pi / abs(math.sin(math.pi * x))), rel=1e-12, abs=1e-12
        )


def test_recursion_identity():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.uniform(0.1, 80.0)
        assert gamma_ratio(x + 1.0, x) == pytest.approx(x, rel=1e-12)


def test_d_gamma_is_minus_one_at_half_order():
    for n in range(2, 9):
        assert d_gamma(n, 0.5) == pytest.approx(-1.0, rel=1e-13)


def test_d_gamma_quarter_order_value():
    # 2^(1/2) Gamma(1/4)/Gamma(-1/4) with Gamma(-1/4) = -4 Gamma(3/4)
    exact = -math.sqrt(2.0) / 4.0 * math.gamma(0.25) / math.gamma(0.75)
    assert d_gamma(3, 0.25) == pytest.approx(exact, rel=1e-13)
    assert d_gamma(3, 0.25) == pytest.approx(-1.0461, abs=1e-3)


def test_d_gamma_negative_throughout():
    for g in np.linspace(0.02, 0.98, 49):
        assert d_gamma(4, float(g)) < 0.0


def test_sphere_volumes():
    assert sphere_volume(1) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert sphere_volume(2) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert sphere_volume(3) == pytest.approx(2.0 * math.pi**2, rel=1e-15)
    assert sphere_volume(4) == pytest.approx(8.0 * math.pi**2 / 3.0, rel=1e-14)


def test_multiplier_integer_cases():
    # gamma = 1/2 turns the ratio into a rising factorial of length one
    assert sphere_multiplier(3, 0.5, 0) == pytest.approx(1.0, rel=1e-14)
    assert sphere_multiplier(3, 0.5, 1) == pytest.approx(2.0, rel=1e-14)
    assert sphere_multiplier(3, 0.5, 2) == pytest.approx(3.0, rel=1e-14)
    assert sphere_multiplier(2, 0.5, 1) == pytest.approx(1.5, rel=1e-14)


def test_multiplier_strictly_increasing_in_k():
    for n in (2, 3, 5):
        for g in (0.25, 0.5, 0.75):
            vals = [sphere_multiplier(n, g, k) for k in range(9)]
            assert all(b > a for a, b in zip(vals, vals[1:]))


def test_multiplier_recursion_in_k():
    # ratio of consecutive multipliers telescopes to a rational expression
    for n in (3, 4):
        for g in (0.3, 0.7):
            for k in range(6):
                lhs = sphere_multiplier(n, g, k + 1) / sphere_multiplier(n, g, k)
                rhs = (k + 0.5 * n + g) / (k + 0.5 * n - g)
                assert lhs == pytest.approx(rhs, rel=1e-12)


def test_q_curvature_normalization():
    assert sphere_constants(3, 0.5).q_curv == pytest.approx(1.0, rel=1e-14)
    for n in range(2, 9):
        assert sphere_constants(n, 0.5).q_curv == pytest.approx(1.0, rel=1e-13)


def test_yamabe_constant_closed_form():
    y = sphere_constants(3, 0.5).yamabe
    assert y == pytest.approx((2.0 * math.pi**2) ** (1.0 / 3.0), rel=1e-14)


def test_constants_bundle_consistency():
    c = sphere_constants(4, 0.3)
    assert c.n == 4 and c.gamma == 0.3
    assert c.sphere_volume == pytest.approx(sphere_volume(4), rel=1e-15)
    assert c.d_gamma == pytest.approx(d_gamma(4, 0.3), rel=1e-15)
    mult0 = sphere_multiplier(4, 0.3, 0)
    assert c.q_curv == pytest.approx(2.0 / (4 - 0.6) * mult0, rel=1e-14)
    assert c.yamabe == pytest.approx(mult0 * c.sphere_volume ** (0.6 / 4.0), rel=1e-14)


def test_pole_and_domain_errors():
    with pytest.raises(PoleError):
        log_gamma(0.0)
    with pytest.raises(PoleError):
        log_gamma(-3.0)
    with pytest.raises(ValueError):
        log_gamma(float("nan"))
    with pytest.raises(ValueError):
        d_gamma(3, 0.0)
    with pytest.raises(ValueError):
        d_gamma(3, 1.0)
    with pytest.raises(ValueError):
        sphere_multiplier(3, 0.5, -1)
    with pytest.raises(ValueError):
        sphere_constants(1, 0.5)

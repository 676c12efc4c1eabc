import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pdnls.bessel import (
    ball_volume,
    bessel_j,
    bessel_local_maxima,
    calibrate_knapp_constants,
    cap_extension,
    cap_extension_grid,
    cap_measure,
    knapp_count,
    knapp_lower_sets,
    lambda_kernel,
    load_knapp_constants,
    sphere_area,
    sphere_extension_kernel,
)
from pdnls.errors import ParameterError


def test_sphere_area_and_ball_volume():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("nu, z, expected", [
    (0.0, 0.0, 1.0),
    (0.5, math.pi / 2, 2 / math.pi),
    (-0.5, 2 * math.pi, 1 / math.pi),
])
def test_bessel_j_values(nu, z, expected):
    assert bessel_j(nu, z) == pytest.approx(expected, abs=1e-12)


def test_half_integer_closed_forms():
    z = np.linspace(0.1, 100, 2001)
    pref = np.sqrt(2 / (np.pi * z))
    np.testing.assert_allclose(bessel_j(-0.5, z), pref * np.cos(z), atol=1e-10)
    np.testing.assert_allclose(bessel_j(0.5, z), pref * np.sin(z), atol=1e-10)
    np.testing.assert_allclose(bessel_j(1.5, z), pref * (np.sin(z) / z - np.cos(z)), atol=1e-10)


def test_bessel_j_large_argument_against_integral():
    # J_0(z) = (1/pi) int_0^pi cos(z sin t) dt, an independent route
    for z in (1e3, 1e4):
        ref = integrate.quad(lambda t: math.cos(z * math.sin(t)), 0, math.pi, limit=20000,
                             epsabs=1e-14)[0] / math.pi
        assert bessel_j(0.0, z) == pytest.approx(ref, abs=1e-12)


def test_bessel_j_rejects_negative_argument():
    with pytest.raises(ParameterError):
        bessel_j(0.0, -1.0)


@given(nu=st.sampled_from([-0.5, 0.0, 0.5, 1.0, 1.5, 2.0]), t=st.one_of(st.just(0.0), st.floats(1e-6, 50)))
def test_lambda_kernel_matches_definition(nu, t):
    ref = 1 / (2**nu * math.gamma(nu + 1)) if t == 0 else t**-nu * float(bessel_j(nu, t))
    assert float(lambda_kernel(nu, t)) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_local_maxima_half_order():
    np.testing.assert_allclose(bessel_local_maxima(-0.5, 3), [2 * np.pi, 4 * np.pi, 6 * np.pi])


def test_local_maxima_order_zero():
    z1 = bessel_local_maxima(0.0, 1)[0]
    assert z1 == pytest.approx(7.0155866698, abs=1e-8)
    # stationary point with positive value
    assert abs(bessel_j(1.0, z1)) < 1e-10 and bessel_j(0.0, z1) > 0


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0, 1.5])
def test_local_maxima_spacing(nu):
    z = bessel_local_maxima(nu, 60)
    assert np.all(np.diff(z) > 0)
    assert abs(z[50] - z[49] - 2 * np.pi) < 1e-3


def test_sphere_extension_kernel():
    assert sphere_extension_kernel(2, 0.0) == pytest.approx(2 * math.pi)
    assert sphere_extension_kernel(3, 0.0) == pytest.approx(4 * math.pi)
    assert sphere_extension_kernel(3, math.pi) == pytest.approx(0.0, abs=1e-13)
    x = np.linspace(0.1, 30, 50)
    np.testing.assert_allclose(sphere_extension_kernel(3, x), 4 * np.pi * np.sin(x) / x, atol=1e-12)


@pytest.mark.parametrize("d, k", [(2, 1), (3, 1), (3, 2), (4, 2), (5, 2)])
def test_cap_extension_at_origin_is_cap_measure(d, k):
    assert cap_extension(d, k, 0.1, 1.0, 0.0, 0.0) == pytest.approx(cap_measure(d, k, 0.1), rel=1e-9)


def test_cap_measure_closed_form_d3_k2():
    # |eta| < delta on S^2 with eta one-dimensional: a band of height 2 delta, area 4 pi delta
    assert cap_measure(3, 2, 0.1) == pytest.approx(4 * math.pi * 0.1, rel=1e-12)


@pytest.mark.parametrize("d, k", [(4, 2), (3, 1), (5, 3)])
def test_cap_measure_scales_like_power(d, k):
    vals = [cap_measure(d, k, dl) / dl ** (d - k) for dl in (0.2, 0.1, 0.05)]
    assert max(vals) / min(vals) < 1.1


def test_cap_extension_grid_matches_adaptive():
    y = np.array([0.0, 3.0, 10.0])
    z = np.array([0.0, 7.0, 20.0])
    grid = cap_extension_grid(4, 2, 0.1, 1.02, y, z)
    ref = [cap_extension(4, 2, 0.1, 1.02, a, b) for a, b in zip(y, z)]
    np.testing.assert_allclose(grid, ref, rtol=1e-10)


def test_cap_extension_argument_checks():
    with pytest.raises(ParameterError):
        cap_extension(4, 2, 0.6, 1.0, 0.0, 0.0)
    with pytest.raises(ParameterError):
        cap_extension(4, 2, 0.1, 1.7, 0.0, 0.0)


# --------------------------------------------------------------------------- Knapp sets


def test_shipped_constants_match_calibration():
    shipped = load_knapp_constants(4, 2)
    fresh = calibrate_knapp_constants(4, 2)
    for name in ("alpha", "beta", "c0", "c1", "c2", "c_small"):
        assert getattr(shipped, name) == pytest.approx(getattr(fresh, name), rel=1e-12)


def test_knapp_sets_disjoint_and_counted():
    consts = load_knapp_constants(4, 2)
    sets = knapp_lower_sets(4, 2, 0.01, 0.05, count=6)
    assert len(sets) == 6
    for a, b in zip(sets[:-1], sets[1:]):
        assert a.z_max < b.z_min
    assert knapp_count(consts, 0.05, 0.1) == len(knapp_lower_sets(4, 2, 0.05, 0.1))


def test_knapp_set_measure_is_exact_annulus_volume():
    for s in knapp_lower_sets(4, 2, 0.01, 0.05, count=3):
        exact = math.pi * s.y_max**2 * math.pi * (s.z_max**2 - s.z_min**2)
        assert s.measure == pytest.approx(exact, rel=1e-14)
        assert s.measure >= s.measure_lower_bound


def test_knapp_pointwise_bound_by_adaptive_quadrature():
    consts = load_knapp_constants(4, 2)
    m, delta = 0.05, 0.1
    sets = knapp_lower_sets(4, 2, m, delta)
    assert len(sets) >= 1
    for s in sets:
        Y, Z = s.sample(10)
        for r in (1 - m, 1 - m / 2, 1.0, 1 + m / 2, 1 + m):
            for y, z in zip(Y.ravel(), Z.ravel()):
                val = cap_extension(4, 2, delta, r, y, z)
                assert val >= consts.c2 * delta**2 * s.j ** (-0.5)


def test_knapp_empty_window_reported():
    with pytest.raises(ParameterError, match="empty"):
        knapp_lower_sets(4, 2, 0.45, 0.45, count=50)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(3, 6), data=st.data())
def test_c0_construction(d, data):
    k = data.draw(st.integers(1, d - 1))
    c = load_knapp_constants(d, k)
    assert c.c0 == pytest.approx(c.alpha / (2 * c.beta))
    assert 0 < c.c_small and c.c2 > 0 and c.c1 > 0

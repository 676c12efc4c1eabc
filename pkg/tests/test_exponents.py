import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdnls.errors import ExtrapolationError, ParameterError
from pdnls.exponents import (
    ProblemParams,
    SymbolSpec,
    check_admissibility,
    critical_exponents,
    eval_symbol,
    inverse_symbol_integral,
    predicted_rate,
    sobolev_exponent,
    stein_tomas_k,
)


# --------------------------------------------------------------------------- parameters


@pytest.mark.parametrize("kwargs, message", [
    (dict(d=1, p=3), "d >= 2"),
    (dict(d=2, p=2), "p > 2"),
    (dict(d=2, p=3, gamma=1.0), "gamma > 1"),
    (dict(d=2, p=3, s=0.5), "s > d/(d+1)"),
    (dict(d=4, p=3, k=4), "1 <= k <= d-1"),
    (dict(d=6, p=7, s=1), "p < 2_s^*"),
])
def test_params_reject_with_named_constraint(kwargs, message):
    with pytest.raises(ParameterError, match=re.escape(message)):
        ProblemParams(**kwargs)


def test_critical_exponents_d4_k2():
    ex = critical_exponents(ProblemParams(d=4, p=2.5, k=2))
    assert ex.two_star_k == pytest.approx(3.0, abs=1e-15)
    assert ex.alpha_k == pytest.approx(0.6, abs=1e-15)


def test_critical_exponents_d2_k1():
    ex = critical_exponents(ProblemParams(d=2, p=3, k=1))
    assert ex.two_star_k == pytest.approx(6.0)
    assert ex.two_star == pytest.approx(6.0)
    assert ex.alpha_k == pytest.approx(0.5)
    assert ex.alpha_rad == pytest.approx(2 / 3)
    assert ex.two_star_sobolev == math.inf


def test_alpha_matches_quotient_form():
    # alpha_k = (1/2 - 1/p) / (1/2 - 1/2_*^k) in the displayed quotient form
    for d in range(2, 7):
        for k in range(1, d):
            params = ProblemParams(d=d, p=2.3, k=k)
            ex = critical_exponents(params)
            assert ex.alpha_k == pytest.approx((0.5 - 1 / 2.3) / (0.5 - 1 / ex.two_star_k))
            assert ex.alpha_rad == pytest.approx((0.5 - 1 / 2.3) / (0.5 - 1 / ex.two_star_rad))


@given(d=st.integers(2, 9), data=st.data())
def test_two_star_k_symmetric(d, data):
    k = data.draw(st.integers(1, d - 1))
    assert stein_tomas_k(d, k) == stein_tomas_k(d, d - k)


@given(d=st.integers(2, 9), s=st.floats(1.0, 6.0), data=st.data())
def test_exponent_chain(d, s, data):
    k = data.draw(st.integers(1, d - 1))
    two_s = sobolev_exponent(d, s)
    two_rad = 2 * d / (d - 1)
    two_k = stein_tomas_k(d, k)
    two = 2 * (d + 1) / (d - 1)
    assert 2 < two_rad < two_k <= two
    assert two_k <= two + 1e-12
    if s > d / (d + 1) and two < two_s:
        assert two < two_s


@given(d=st.integers(2, 7), p=st.floats(2.01, 12.0), data=st.data())
@settings(max_examples=60)
def test_alpha_in_unit_interval_iff_subcritical(d, p, data):
    k = data.draw(st.integers(1, d - 1))
    params = ProblemParams(d=d, p=p, k=k, s=d)
    ex = critical_exponents(params)
    assert (0 < ex.alpha_k < 1) == (p < ex.two_star_k)
    assert (0 < ex.alpha_rad < 1) == (p < ex.two_star_rad)


def test_predicted_rates():
    r = predicted_rate(ProblemParams(d=2, p=3), "radial")
    assert (r.power, r.log_power) == (pytest.approx(2 / 3), 0.0)
    r = predicted_rate(ProblemParams(d=2, p=4), "radial")
    assert (r.power, r.log_power) == (pytest.approx(0.5), pytest.approx(-0.5))
    assert predicted_rate(ProblemParams(d=2, p=3), "full").power == pytest.approx(0.75)
    assert predicted_rate(ProblemParams(d=4, p=2.5, k=2), "Gk").power == pytest.approx(0.7)
    assert predicted_rate(ProblemParams(d=4, p=2.5), "radial").power == pytest.approx(0.6)


def test_predicted_rate_gk_needs_k():
    with pytest.raises(ParameterError):
        predicted_rate(ProblemParams(d=4, p=2.5), "Gk")


# --------------------------------------------------------------------------- symbols


def test_biharmonic_values():
    spec = SymbolSpec.biharmonic()
    assert eval_symbol(spec, 1.0, 0.01) == pytest.approx(0.01, abs=1e-17)
    assert eval_symbol(spec, 0.0, 0.01) == pytest.approx(1.01, abs=1e-15)


@given(r=st.floats(0, 10), eps=st.floats(1e-8, 0.99))
def test_biharmonic_exact_and_positive(r, eps):
    g = eval_symbol(SymbolSpec.biharmonic(), r, eps)
    assert g > 0
    assert g == pytest.approx((r * r - 1) ** 2 + eps, rel=1e-14)


def test_shell_power_inner_formula():
    spec = SymbolSpec.shell_power(2, 2)
    assert eval_symbol(spec, 1.1, 1e-4) == pytest.approx(0.0101, rel=1e-12)


@given(r=st.floats(0, 20), eps=st.floats(1e-8, 0.99))
def test_shell_power_positive(r, eps):
    assert eval_symbol(SymbolSpec.shell_power(1.5, 3), r, eps) > 0


def test_tabulated_extrapolation_rejected():
    r = np.linspace(0, 3, 31)
    spec = SymbolSpec.tabulated({1e-2: (r, (r**2 - 1) ** 2 + 1e-2), 1e-3: (r, (r**2 - 1) ** 2 + 1e-3)})
    assert eval_symbol(spec, 1.0, 1e-2) == pytest.approx(1e-2)
    with pytest.raises(ExtrapolationError):
        eval_symbol(spec, 4.0, 1e-2)
    with pytest.raises(ExtrapolationError):
        eval_symbol(spec, 1.0, 1e-4)


def test_tabulated_zero_symbol_rejected():
    r = np.linspace(0, 3, 31)
    with pytest.raises(ParameterError):
        SymbolSpec.tabulated({1e-2: (r, np.zeros_like(r))})


def test_symbol_csv_roundtrip(tmp_path):
    r = np.linspace(0, 3, 61)
    paths = {}
    for eps in (1e-2, 1e-3):
        p = tmp_path / f"g_{eps:g}.csv"
        np.savetxt(p, np.c_[r, (r**2 - 1) ** 2 + eps], delimiter=",", header="r,value", comments="")
        paths[eps] = p
    spec = SymbolSpec.from_csv(paths)
    assert eval_symbol(spec, 1.5, 1e-3) == pytest.approx((1.5**2 - 1) ** 2 + 1e-3, rel=1e-12)
    again = SymbolSpec.from_dict(spec.to_dict())
    assert eval_symbol(again, 1.5, 1e-3) == eval_symbol(spec, 1.5, 1e-3)


# --------------------------------------------------------------------------- admissibility


def test_biharmonic_admissible():
    rep = check_admissibility(SymbolSpec.biharmonic(), 2, 2, [1e-2, 1e-3, 1e-4])
    assert rep.passed
    assert 0 < rep.c_lower <= rep.C_upper < math.inf


def test_biharmonic_fails_gamma3_on_shell_bound():
    rep = check_admissibility(SymbolSpec.biharmonic(), 2, 3, [1e-2, 1e-3, 1e-4])
    assert not rep.passed
    assert "shell" in rep.failed_bounds


def test_admissibility_empty_inputs():
    with pytest.raises(ParameterError):
        check_admissibility(SymbolSpec.biharmonic(), 2, 2, [])
    with pytest.raises(ParameterError):
        check_admissibility(SymbolSpec.biharmonic(), 2, 2, [1e-2], r_grid=np.array([]))


# --------------------------------------------------------------------------- inverse-symbol integral


def _arctan_oracle(eps):
    return 2 * eps**-0.5 * math.atan(0.5 * eps**-0.5)


@pytest.mark.parametrize("eps", [1e-4, 1.0])
def test_inverse_integral_arctan_oracle(eps):
    got = inverse_symbol_integral(SymbolSpec.shell_power(2, 2), eps)
    assert got == pytest.approx(_arctan_oracle(eps), rel=1e-8)


def test_inverse_integral_known_values():
    assert _arctan_oracle(1e-4) == pytest.approx(310.1598, abs=1e-4)
    assert _arctan_oracle(1.0) == pytest.approx(0.9273, abs=1e-4)


@pytest.mark.parametrize("spec, gamma", [
    (SymbolSpec.biharmonic(), 2.0),
    (SymbolSpec.shell_power(2, 2), 2.0),
    (SymbolSpec.shell_power(2, 3), 3.0),
])
def test_inverse_integral_slope(spec, gamma):
    eps = np.array([1e-2, 1e-3, 1e-4])
    vals = np.array([inverse_symbol_integral(spec, e) for e in eps])
    slope = np.polyfit(np.log(eps), np.log(vals), 1)[0]
    assert slope == pytest.approx(1 / gamma - 1, abs=0.05)


def test_inverse_integral_band():
    spec = SymbolSpec.biharmonic()
    eps = np.geomspace(1e-6, 1e-1, 11)
    scaled = np.array([inverse_symbol_integral(spec, e) * e**0.5 for e in eps])
    assert scaled.max() / scaled.min() < 2.0

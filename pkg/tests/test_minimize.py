import functools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdnls.errors import ParameterError
from pdnls.exponents import ProblemParams, SymbolSpec
from pdnls.minimize import (
    LABEL_G1,
    Problem,
    SolveConfig,
    compensated_series,
    fit_rate,
    input_hash,
    solve_ground_state,
    solve_projected_gradient,
    start_sequence,
    sweep,
    transfer,
    verify_chain,
)
from pdnls.trial import trial_upper_bound

RAD2 = ProblemParams(d=2, p=3)


@functools.lru_cache(maxsize=None)
def radial(eps):
    return solve_ground_state(RAD2, eps, "radial")


# --------------------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ParameterError):
        SolveConfig(rel_tolerance=0)
    with pytest.raises(ParameterError):
        SolveConfig(restarts=0)
    with pytest.raises(ParameterError):
        SolveConfig(init="file")
    cfg = SolveConfig(seed=3, restarts=2)
    assert SolveConfig.from_dict(cfg.to_dict()) == cfg


def test_start_sequence():
    assert start_sequence(SolveConfig(), "Gk") == ["knapp_trial", "radial_trial", "random_shell"]
    assert start_sequence(SolveConfig(), "radial") == ["radial_trial", "random_shell"]
    # full solves always include a symmetry-breaking random start
    assert start_sequence(SolveConfig(restarts=1), "full") == ["knapp_trial", "random_shell"]


def test_input_hash_sensitivity():
    cfg = SolveConfig()
    h = input_hash(RAD2, 1e-2, "radial", cfg, "biharmonic")
    assert h == input_hash(RAD2, 1e-2, "radial", SolveConfig(), "biharmonic")
    assert h != input_hash(RAD2, 1e-3, "radial", cfg, "biharmonic")
    assert h != input_hash(RAD2, 1e-2, "radial", SolveConfig(seed=1), "biharmonic")


def test_solver_rejects_bad_input():
    with pytest.raises(ParameterError):
        solve_ground_state(RAD2, 1.5, "radial")
    with pytest.raises(ParameterError):
        solve_ground_state(RAD2, 1e-2, "Gk")
    with pytest.raises(ParameterError):
        solve_ground_state(RAD2, 1e-2, "G3")


# --------------------------------------------------------------------------- solver soundness


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_radial_solve_sound(eps):
    res = radial(eps)
    assert res.converged and res.monotone
    assert np.all(np.diff(res.trace) <= 1e-10 * res.trace[1:])
    assert res.el_residual < 1e-4
    assert res.tail_fraction < 0.05
    assert np.isrealobj(res.minimizer.values) and res.minimizer.values.ndim == 1


def test_radial_rate_ratio():
    ratio = radial(1e-3).rayleigh / radial(1e-2).rayleigh
    assert ratio == pytest.approx(10 ** (-2 / 3), rel=0.25)


def test_minimizer_beats_trial_competitor():
    for eps in (1e-2, 1e-3):
        assert radial(eps).rayleigh <= trial_upper_bound(RAD2, eps, "radial").quotient


@given(lam=st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3))
def test_quotient_scale_invariant(lam):
    res = radial(1e-2)
    problem = Problem(res.minimizer.grid, SymbolSpec.biharmonic(), 1e-2, 3.0)
    F = res.minimizer.values
    assert problem.evaluate(lam * F)[0] == pytest.approx(problem.evaluate(F)[0], rel=1e-12)


def test_projected_gradient_agrees_with_picard():
    res = radial(1e-2)
    value, _, converged = solve_projected_gradient(RAD2, 1e-2, "radial")
    assert converged
    assert value == pytest.approx(res.rayleigh, rel=1e-8)


def test_block_solve_stays_block_radial():
    params = ProblemParams(d=4, p=2.5, k=2)
    res = solve_ground_state(params, 1e-2, "Gk", SolveConfig(init="radial_trial", restarts=1))
    assert res.converged and res.monotone and res.el_residual < 1e-4
    assert res.minimizer.symmetry == "block_radial" and res.minimizer.values.ndim == 2
    assert res.label == ""


def test_g1_label():
    res = solve_ground_state(ProblemParams(d=2, p=3, k=1), 1e-2, "Gk", SolveConfig(restarts=1, max_iterations=5))
    assert res.label == LABEL_G1


def test_full_solve_keeps_real_fields():
    res = solve_ground_state(RAD2, 1e-2, "full", SolveConfig(restarts=1, max_iterations=20))
    g = res.minimizer.grid
    np.testing.assert_allclose(g.hermitian_project(res.minimizer.values), res.minimizer.values, atol=1e-12)


def test_unconverged_result_flagged():
    res = solve_ground_state(RAD2, 1e-2, "radial", SolveConfig(max_iterations=3, restarts=1))
    assert not res.converged
    assert res.iterations == 3


# --------------------------------------------------------------------------- warm starts and sweeps


def test_transfer_identity():
    u = radial(1e-2).minimizer
    np.testing.assert_allclose(transfer(u, u.grid, 1.0).values, u.values, atol=1e-14)


def test_transfer_rejects_other_symmetry():
    from pdnls.fields import build_grid
    with pytest.raises(ParameterError):
        transfer(radial(1e-2).minimizer, build_grid("full", 2, None, 1e-2))


def test_warm_and_cold_sweeps_agree():
    eps = [1e-2, 1e-3, 1e-4]
    warm = sweep(RAD2, eps, "radial")
    cold = sweep(RAD2, eps, "radial", warm_start=False)
    np.testing.assert_allclose(warm.rayleigh, cold.rayleigh, rtol=1e-6)
    assert np.all(np.diff(warm.rayleigh) < 0)
    assert warm.fit.n_points == 3
    assert warm.results[1].start == "warm"


def test_sweep_orders_eps_and_refuses_short_fits():
    res = sweep(RAD2, [1e-3, 1e-2], "radial")
    assert list(res.eps) == [1e-2, 1e-3]
    assert res.fit is None and "3 points" in res.fit_error
    with pytest.raises(ParameterError):
        sweep(RAD2, [1e-2, 1e-2, 1e-3], "radial")


def test_chain_at_large_eps_is_not_a_failure():
    # no separation is claimed at eps = 1/2, so the gap is graded against its uncertainty
    rep = verify_chain(RAD2, 0.5)
    assert [e.cls for e in rep.entries] == ["full", "radial"]
    assert all(e.converged for e in rep.entries)
    assert rep.verdict == "inconclusive"
    gap = rep.gaps[0]
    assert abs(gap["gap"]) <= gap["uncertainty"]


# --------------------------------------------------------------------------- rate fits


def test_fit_exact_power_law():
    eps = np.geomspace(1e-2, 1e-5, 7)
    fit = fit_rate(eps, 3 * eps**0.75)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert fit.residual < 1e-12
    assert fit.intercept == pytest.approx(math.log(3))
    assert fit.band == pytest.approx(1.0)


def test_fit_log_corrected_series():
    eps = np.geomspace(1e-2, 1e-5, 7)
    vals = eps**0.5 * np.abs(np.log(eps)) ** -0.5
    raw = fit_rate(eps, vals)
    comp = fit_rate(eps, vals, with_log_correction=True, log_power=-0.5)
    assert comp.slope == pytest.approx(0.5, abs=1e-10)
    assert raw.residual > 10 * max(comp.residual, 1e-15)
    assert comp.log_power_used == -0.5 and raw.log_power_used == 0.0


def test_fit_refusals():
    with pytest.raises(ParameterError):
        fit_rate([1e-2, 1e-3], [1.0, 0.5])
    with pytest.raises(ParameterError):
        fit_rate([1e-2, 1e-2, 1e-2], [1.0, 0.5, 0.2])


def test_compensated_series():
    eps = np.array([1e-2, 1e-4])
    np.testing.assert_allclose(compensated_series(eps, 2 * eps**0.5 * np.log(1 / eps) ** -0.5, 0.5, -0.5), 2.0)

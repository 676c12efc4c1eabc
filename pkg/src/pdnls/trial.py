"""Knapp-type and radial trial functions and their Rayleigh-quotient bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ParameterError, ResolutionError
from .exponents import (
    ProblemParams,
    RatePrediction,
    SymbolSpec,
    critical_exponents,
    predicted_rate,
)
from .fields import (
    AxialGrid,
    BlockGrid,
    FullGrid,
    GridConfig,
    PhysConfig,
    RadialGrid,
    SpectralField,
    build_grid,
    lp_norm_details,
    quad_form,
)

CLASS_SYMMETRY = {"full": "full", "Gk": "block_radial", "radial": "radial", "axial": "axial"}
MIN_SUPPORT_NODES = 4


def default_profile(s, eps, gamma):
    """``a_eps(s) = (eps + s^gamma)^{-1}``."""
    return 1.0 / (eps + np.asarray(s, float) ** gamma)


@dataclass(frozen=True)
class TrialSpec:
    """Trial-function recipe.

    Unset ``m`` and ``delta`` follow the defaults of the upper-bound
    construction: ``delta = eps^{1/(2 gamma)}`` and ``m = delta^2`` for the
    Knapp trial, ``m = eps^{1/gamma}`` for the radial one.
    """

    kind: str = "knapp"
    m: float | None = None
    delta: float | None = None
    profile: Callable = field(default=default_profile, compare=False)

    def __post_init__(self):
        if self.kind not in ("knapp", "radial"):
            raise ParameterError(f"trial kind must be 'knapp' or 'radial', got {self.kind!r}")

    def resolve(self, eps: float, gamma: float) -> tuple[float, float | None]:
        if self.kind == "knapp":
            delta = self.delta if self.delta is not None else eps ** (1 / (2 * gamma))
            m = self.m if self.m is not None else delta**2
        else:
            delta = None
            m = self.m if self.m is not None else eps ** (1 / gamma)
        if not 0 < m <= 0.5:
            raise ParameterError(f"shell half-width m={m} must lie in (0, 1/2]")
        if delta is not None and not 0 < delta <= 0.5:
            raise ParameterError(f"cap radius delta={delta} must lie in (0, 1/2]")
        return m, delta

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "delta": self.delta}


def _cap_modulus(grid):
    """``|eta|`` on the grid, with ``eta`` the first ``d-k`` coordinates."""
    if isinstance(grid, BlockGrid):
        return grid.A
    if isinstance(grid, FullGrid):
        mesh = grid.component_mesh()
        return np.sqrt(sum(c**2 for c in mesh[:-1]))  # eta = (xi_1, ..., xi_{d-1}), k = 1
    if isinstance(grid, AxialGrid):
        return np.broadcast_to(grid.rho[:, None], grid.shape)
    raise ParameterError("Knapp caps are not representable on radial grids")


def trial_values(grid, eps: float, gamma: float, spec: TrialSpec) -> np.ndarray:
    m, delta = spec.resolve(eps, gamma)
    s = np.abs(grid.radius - 1)
    support = s <= m
    if spec.kind == "knapp":
        support = support & (_cap_modulus(grid) < delta * grid.radius)
    vals = np.where(support, spec.profile(s, eps, gamma), 0.0)
    n_support = int(np.count_nonzero(support))
    if n_support < MIN_SUPPORT_NODES:
        raise ResolutionError(
            f"only {n_support} grid nodes inside the trial support (m={m:.3g}, delta={delta}); refine the grid"
        )
    return np.broadcast_to(vals, grid.shape).astype(complex if grid.is_complex else float)


def knapp_trial(params: ProblemParams, eps: float, spec: TrialSpec | None = None,
                grid=None, grid_config: GridConfig | None = None,
                phys: PhysConfig | None = None) -> SpectralField:
    """Knapp trial ``1_{||xi|-1| <= m} 1_{cap}(xi/|xi|) a_eps(||xi|-1|)`` on a block-radial grid."""
    spec = spec or TrialSpec("knapp")
    if spec.kind != "knapp":
        raise ParameterError("knapp_trial needs a knapp TrialSpec")
    if grid is None:
        if params.k is None:
            raise ParameterError("knapp_trial needs params.k")
        grid = build_grid("block_radial", params.d, params.k, eps, params.gamma, grid_config, phys)
    vals = trial_values(grid, eps, params.gamma, spec)
    return SpectralField(grid, vals, eps, {"trial": "knapp", **spec.to_dict()})


def radial_trial(params: ProblemParams, eps: float, spec: TrialSpec | None = None,
                 grid=None, grid_config: GridConfig | None = None,
                 phys: PhysConfig | None = None) -> SpectralField:
    """Radial trial ``1_{||xi|-1| <= m} a_eps(||xi|-1|)`` (any grid; radial by default)."""
    spec = spec or TrialSpec("radial")
    if spec.kind != "radial":
        raise ParameterError("radial_trial needs a radial TrialSpec")
    if grid is None:
        grid = build_grid("radial", params.d, None, eps, params.gamma, grid_config, phys)
    vals = trial_values(grid, eps, params.gamma, spec)
    return SpectralField(grid, vals, eps, {"trial": "radial", **spec.to_dict()})


def profile_energy(eps: float, gamma: float, m: float, profile=default_profile) -> float:
    """``int_0^m a_eps(s)^2 (eps + s^gamma) ds``."""
    f = lambda s: profile(s, eps, gamma) ** 2 * (eps + s**gamma)
    return integrate.quad(f, 0.0, m, epsabs=0, epsrel=1e-12, points=[eps ** (1 / gamma)] if eps ** (1 / gamma) < m else None)[0]


def profile_mass(eps: float, gamma: float, m: float, profile=default_profile) -> float:
    """``int_0^m a_eps(s) ds``."""
    f = lambda s: profile(s, eps, gamma)
    return integrate.quad(f, 0.0, m, epsabs=0, epsrel=1e-12, points=[eps ** (1 / gamma)] if eps ** (1 / gamma) < m else None)[0]


@dataclass(frozen=True)
class TrialBound:
    quotient: float
    predicted: RatePrediction
    ratio_to_predicted: float
    trial_kind: str
    q: float
    lp: float
    tail_fraction: float
    eps: float

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "quotient": self.quotient, "trial_kind": self.trial_kind,
            "predicted_power": self.predicted.power, "predicted_log_power": self.predicted.log_power,
            "ratio_to_predicted": self.ratio_to_predicted, "q": self.q, "lp": self.lp,
            "tail_fraction": self.tail_fraction,
        }


def trial_for_class(params: ProblemParams, eps: float, cls: str, grid) -> SpectralField:
    """The default competitor of the upper-bound argument for ``cls`` on ``grid``.

    ``Gk`` uses the Knapp trial unless ``p > 2_*^k``, where the radial trial
    (also ``G_k``-invariant) gives the sharper bound; ``full`` uses the ``G_1``
    Knapp trial under the same rule; ``radial`` uses the radial trial.
    """
    if cls == "radial":
        return radial_trial(params, eps, grid=grid)
    k = 1 if cls in ("full", "axial") else params.k
    if k is None:
        raise ParameterError("class Gk needs params.k")
    if params.p > critical_exponents(params.with_k(k)).two_star_k:
        return radial_trial(params, eps, grid=grid)
    return knapp_trial(params, eps, grid=grid)


def trial_upper_bound(params: ProblemParams, eps: float, cls: str,
                      symbol: SymbolSpec | None = None, grid=None,
                      grid_config: GridConfig | None = None,
                      phys: PhysConfig | None = None) -> TrialBound:
    """Rayleigh quotient of the class's default trial function.

    Returns the quotient, the predicted rate for ``cls`` and the ratio
    ``quotient / (eps^power |log eps|^log_power)``.
    """
    symbol = symbol or SymbolSpec.biharmonic()
    if cls not in CLASS_SYMMETRY:
        raise ParameterError(f"unknown class {cls!r}")
    if grid is None:
        grid = build_grid(CLASS_SYMMETRY[cls], params.d, params.k if cls == "Gk" else None,
                          eps, params.gamma, grid_config, phys)
    v = trial_for_class(params, eps, cls, grid)
    q = quad_form(v, symbol, eps)
    lp = lp_norm_details(v, params.p)
    pred = predicted_rate(params, "full" if cls == "axial" else cls)
    quotient = q / lp.value**2
    scale = float(pred.evaluate(eps))
    return TrialBound(
        quotient=quotient, predicted=pred, ratio_to_predicted=quotient / scale,
        trial_kind=v.meta["trial"], q=q, lp=lp.value, tail_fraction=lp.tail_fraction, eps=eps,
    )


# --------------------------------------------------------------------------- L^p lower bounds


def lp_lower_shape(params: ProblemParams, eps: float, spec: TrialSpec) -> dict:
    """Right side of the trial ``L^p`` lower bound without its constant."""
    d, p, gamma = params.d, params.p, params.gamma
    m, delta = spec.resolve(eps, gamma)
    mass = profile_mass(eps, gamma, m, spec.profile)
    if spec.kind == "knapp":
        k = params.k
        if k is None:
            raise ParameterError("knapp bound needs params.k")
        if k > 1 and not p < 2 * k / (k - 1):
            raise ParameterError(f"knapp L^p bound needs 2 < p < 2k/(k-1) = {2 * k / (k - 1)}")
        p_conj = p / (p - 1)
        shape = delta ** ((d - k) / p_conj) * (delta**2 + m) ** ((k - 1) / 2 - k / p) * mass
        return {"shape": shape, "case": "knapp", "log_factor": None, "m": m, "delta": delta,
                "note": "k = 1: the restriction p < 2k/(k-1) is vacuous" if k == 1 else ""}
    p_rad = critical_exponents(params).two_star_rad
    if math.isclose(p, p_rad, rel_tol=1e-12):
        factor = abs(math.log(m)) ** (1 / p)
        case = "critical"
    elif p < p_rad:
        factor = m ** ((d - 1) / 2 - d / p)
        case = "subcritical"
    else:
        factor = 1.0
        case = "supercritical"
    return {"shape": mass * factor, "case": case,
            "log_factor": factor if case == "critical" else None, "m": m, "delta": None, "note": ""}


def _trial_lp(params, eps, spec, grid_config, phys):
    if spec.kind == "knapp":
        v = knapp_trial(params, eps, spec, grid_config=grid_config, phys=phys)
    else:
        v = radial_trial(params, eps, spec, grid_config=grid_config, phys=phys)
    return lp_norm_details(v, params.p)


@dataclass(frozen=True)
class LemmaCheck:
    eps: float
    measured_lp: float
    bound: float
    passed: bool
    constant: float
    calibration_eps: float
    case: str
    log_factor: float | None
    note: str

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "measured_lp": self.measured_lp, "bound": self.bound,
            "pass": self.passed, "constant": self.constant, "calibration_eps": self.calibration_eps,
            "case": self.case, "log_factor": self.log_factor, "note": self.note,
        }


def lemma_lp_lower_check(params: ProblemParams, eps: float, spec: TrialSpec,
                         calibration_eps: float = 1e-2, safety: float = 0.5,
                         constant: float | None = None,
                         grid_config: GridConfig | None = None,
                         phys: PhysConfig | None = None) -> LemmaCheck:
    """Compare ``||v||_p`` of a trial field with its analytic lower bound.

    The implicit constant is calibrated at ``calibration_eps`` (``safety`` times
    the measured ratio there) unless ``constant`` is given, then held fixed.
    """
    target = lp_lower_shape(params, eps, spec)
    if constant is None:
        cal = lp_lower_shape(params, calibration_eps, spec)
        measured_cal = _trial_lp(params, calibration_eps, spec, grid_config, phys).value
        constant = safety * measured_cal / cal["shape"]
    measured = _trial_lp(params, eps, spec, grid_config, phys).value
    bound = constant * target["shape"]
    return LemmaCheck(
        eps=eps, measured_lp=measured, bound=bound, passed=bool(measured >= bound),
        constant=constant, calibration_eps=calibration_eps, case=target["case"],
        log_factor=target["log_factor"], note=target["note"],
    )

"""Concentration, angular roughness and the layer-cake interpolation bound.

These are measurements taken on converged minimisers (or, for the
interpolation bound, on arbitrary radial samples): how much of a minimiser
lives off the shell window, how rough its Fourier trace is on spheres inside
the window, and how well ``||u||_q`` is controlled by ``||u||_r`` and a
weighted sup norm.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bessel import ball_volume, sphere_area
from .errors import ParameterError
from .exponents import SymbolSpec, critical_exponents
from .fields import (
    PhysicalSamples,
    ShellWindow,
    lp_norm_details,
    quad_form,
    shell_split,
    sphere_sobolev_norm,
    sphere_trace,
)
from .fields.grids import gauss_panels

__all__ = [
    "ConcentrationReport",
    "concentration_report",
    "RoughnessReport",
    "roughness_report",
    "sphere_sobolev_norm",
    "LayerCakeReport",
    "layer_cake_bound",
    "layer_cake_integral",
    "layer_cake_constant",
    "decay_profile_samples",
    "interpolation_corpus",
    "default_delta",
]


def default_delta(eps: float, gamma: float) -> float:
    """The window parameter ``delta_eps = eps^{1/(2 gamma)}``."""
    return eps ** (1 / (2 * gamma))


def _symbol_of(result, symbol):
    if symbol is not None:
        return symbol
    if getattr(result, "symbol_spec", None) is not None:
        return result.symbol_spec
    if result.symbol == "biharmonic":
        return SymbolSpec.biharmonic()
    raise ParameterError(f"symbol {result.symbol!r} must be supplied explicitly")


# --------------------------------------------------------------------------- concentration


@dataclass
class ConcentrationReport:
    """Split ``u = v + w`` of a minimiser at the shell window.

    ``M_eps_estimate`` is ``(q(w)/||w||_p^2) / R``.  ``lemma31_bounds`` holds
    ``(2/(M-1), 4/(M(1-1/M)^2))``, the right sides that bound ``lp_ratio`` and
    ``q_ratio`` whenever ``M > 1``; both are ``inf`` otherwise.
    """

    eps: float
    delta_eps: float
    lp_ratio: float
    q_ratio: float
    M_eps_estimate: float
    lemma31_bounds: tuple[float, float]
    lemma31_holds: bool
    lemma32_scale: float
    degenerate: bool
    cls: str
    window: tuple[float, float]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lemma31_bounds"] = list(self.lemma31_bounds)
        out["window"] = list(self.window)
        return out


def lemma31_right_sides(M: float) -> tuple[float, float]:
    if not M > 1:
        return math.inf, math.inf
    return 2.0 / (M - 1), 4.0 / (M * (1 - 1 / M) ** 2)


def concentration_report(result, delta_eps: float | None = None,
                         symbol: SymbolSpec | None = None) -> ConcentrationReport:
    """Measure how much of a converged minimiser lies off the shell window.

    Raises
    ------
    ParameterError
        If the result did not converge or ``delta_eps`` is outside ``(0, 1)``.
    """
    if not result.converged:
        raise ParameterError("concentration needs a converged result")
    params, eps = result.params, result.eps
    gamma = params.gamma
    delta = default_delta(eps, gamma) if delta_eps is None else float(delta_eps)
    if not 0 < delta < 1:
        raise ParameterError("0 < delta_eps < 1 required")
    spec = _symbol_of(result, symbol)
    u = result.minimizer
    window = ShellWindow(eps, delta, gamma)
    v, w = shell_split(u, window)
    p = params.p
    nv = lp_norm_details(v, p).value
    nw = lp_norm_details(w, p).value
    qv, qw = quad_form(v, spec, eps), quad_form(w, spec, eps)
    R = quad_form(u, spec, eps) / lp_norm_details(u, p).value ** 2
    degenerate = nv == 0.0 or qv == 0.0
    if degenerate:
        lp_ratio = q_ratio = math.inf
    else:
        lp_ratio, q_ratio = nw / nv, qw / qv
    M = (qw / nw**2) / R if nw > 0 else math.inf
    bounds = lemma31_right_sides(M)
    holds = (not degenerate) and lp_ratio <= bounds[0] * (1 + 1e-12) and q_ratio <= bounds[1] * (1 + 1e-12)
    cls_k = 1 if result.cls in ("full", "axial") else params.k
    if result.cls == "radial":
        ex = critical_exponents(params)
        alpha = min(1.0, ex.alpha_rad)
    else:
        alpha = min(1.0, critical_exponents(params.with_k(cls_k)).alpha_k)
    scale = M * (delta + delta ** (gamma - 1)) ** alpha if math.isfinite(M) else math.inf
    return ConcentrationReport(
        eps=eps, delta_eps=delta, lp_ratio=float(lp_ratio), q_ratio=float(q_ratio),
        M_eps_estimate=float(M), lemma31_bounds=bounds, lemma31_holds=bool(holds),
        lemma32_scale=float(scale), degenerate=bool(degenerate), cls=result.cls,
        window=window.interval,
    )


# --------------------------------------------------------------------------- roughness


@dataclass
class RoughnessReport:
    """``H^t / L^2`` ratios of the Fourier trace on spheres inside the window.

    ``offsets`` are the signed values ``r - 1``: 16 log-spaced magnitudes
    through the window, each taken inside and outside the unit sphere.
    """

    eps: float
    t: int
    delta_eps: float
    radii: np.ndarray
    ratios: np.ndarray
    sup_ratio: float
    argmax_radius: float
    max_on_boundary: bool
    in_regime: bool
    cls: str

    def to_dict(self) -> dict:
        out = asdict(self)
        out["radii"] = [float(r) for r in self.radii]
        out["ratios"] = [float(r) for r in self.ratios]
        return out


def roughness_report(result, t: int = 1, delta_eps: float | None = None,
                     n_radii: int = 16, n_samples: int = 256) -> RoughnessReport:
    """Angular roughness of a converged minimiser across the shell window.

    Raises
    ------
    ExtrapolationError
        If a trace radius falls outside the spectral grid.
    """
    if not result.converged:
        raise ParameterError("roughness needs a converged result")
    if t not in (1, 2):
        raise ParameterError(f"roughness order t in {{1, 2}} required, got {t}")
    params, eps = result.params, result.eps
    delta = default_delta(eps, params.gamma) if delta_eps is None else float(delta_eps)
    lo, hi = ShellWindow(eps, delta, params.gamma).interval
    s = np.geomspace(lo, hi, n_radii)
    radii = np.concatenate([1 - s[::-1], 1 + s])
    ratios = np.empty(radii.size)
    for i, r in enumerate(radii):
        f = sphere_trace(result.minimizer, float(r), n_samples)
        l2 = f.l2_norm()
        ratios[i] = sphere_sobolev_norm(f, t) / l2 if l2 > 0 else 1.0
    i_max = int(np.argmax(ratios))
    k = 1 if result.cls in ("full", "axial") else (params.k or 1)
    ex = critical_exponents(params.with_k(k))
    in_regime = result.cls != "radial" and 2 < params.p < ex.two_star_k
    on_boundary = bool(abs(abs(radii[i_max] - 1) - lo) < 1e-12 * hi or abs(abs(radii[i_max] - 1) - hi) < 1e-12 * hi)
    return RoughnessReport(
        eps=eps, t=t, delta_eps=delta, radii=radii, ratios=ratios,
        sup_ratio=float(ratios[i_max]), argmax_radius=float(radii[i_max]),
        max_on_boundary=on_boundary, in_regime=bool(in_regime), cls=result.cls,
    )


# --------------------------------------------------------------------------- layer cake


@dataclass
class LayerCakeReport:
    """``||u||_q`` against ``C2 (1 + log_+(C1/C2))^{1/q}``.

    ``K_explicit`` is the constant delivered by splitting the level integral
    where the weak-``L^r`` and decay bounds on the distribution function
    cross; ``ratio <= K_explicit`` always holds.
    """

    C1: float
    C2: float
    lhs: float
    rhs: float
    ratio: float
    layer_cake: float
    direct: float
    layer_cake_rel_error: float
    K_explicit: float
    d: int
    r_exp: float
    q_exp: float

    def to_dict(self) -> dict:
        return asdict(self)


def layer_cake_constant(d: int, r_exp: float, q_exp: float) -> float:
    """``K`` with ``||u||_q <= K C2 (1 + log_+(C1/C2))^{1/q}`` for every admissible ``u``.

    The distribution function obeys ``lambda(t) <= min(C1^r t^{-r}, |B_1| (C2/t)^q)``;
    integrating ``q t^{q-1} lambda(t)`` with the split at the crossing gives
    ``||u||_q^q <= C2^q [q/(q-r) + q |B_1| r/(q-r) log_+(C1/C2)]``.
    """
    q, r = q_exp, r_exp
    return max(q / (q - r), q * ball_volume(d) * r / (q - r)) ** (1 / q)


def layer_cake_integral(values, measure, q: float, n_levels: int = 20000) -> float:
    """``q int_0^inf t^{q-1} lambda(t) dt`` from the distribution function on a level grid.

    ``lambda`` is evaluated on ``n_levels`` geometrically spaced levels from
    the smallest nonzero ``|u|`` to ``max|u|``; below the bottom level
    ``lambda`` is constant and integrates exactly.  The integral over each
    level interval uses the average of the step values at its two ends.
    """
    a = np.abs(np.asarray(values)).ravel()
    m = np.broadcast_to(np.asarray(measure, float), np.shape(values)).ravel()
    top = float(a.max())
    if top == 0:
        return 0.0
    order = np.argsort(a)
    a_sorted = a[order]
    tail_mass = np.concatenate([np.cumsum(m[order][::-1])[::-1], [0.0]])
    levels = np.geomspace(float(a[a > 0].min()), top, n_levels)

    def lam(t):
        return tail_mass[np.searchsorted(a_sorted, t, side="left")]

    lam_t = lam(levels)
    tq = levels**q
    pieces = 0.5 * (lam_t[:-1] + lam_t[1:]) * np.diff(tq)
    return float(lam_t[0] * tq[0] + np.sum(pieces))


def layer_cake_bound(samples: PhysicalSamples, d: int, r_exp: float, q_exp: float,
                     n_levels: int = 20000) -> LayerCakeReport:
    """Evaluate both sides of the interpolation bound on radial samples.

    Raises
    ------
    ParameterError
        Unless ``0 < r_exp < q_exp`` and ``C2`` is finite.
    """
    if not 0 < r_exp < q_exp < math.inf:
        raise ParameterError("0 < r < q < inf required")
    a = np.abs(np.asarray(samples.values))
    m = np.asarray(samples.measure, float)
    x = np.asarray(samples.radius, float)
    C2 = float(np.max(a * (1 + x) ** (d / q_exp)))
    if not math.isfinite(C2):
        raise ParameterError("C2 = sup |u| (1+|x|)^{d/q} must be finite")
    C1 = float(np.sum(m * a**r_exp)) ** (1 / r_exp)
    direct = float(np.sum(m * a**q_exp))
    lhs = direct ** (1 / q_exp)
    logp = math.log(C1 / C2) if C1 > C2 > 0 else 0.0
    rhs = C2 * (1 + logp) ** (1 / q_exp)
    cake = layer_cake_integral(a, m, q_exp, n_levels)
    return LayerCakeReport(
        C1=C1, C2=C2, lhs=lhs, rhs=rhs, ratio=lhs / rhs if rhs > 0 else math.inf,
        layer_cake=cake, direct=direct,
        layer_cake_rel_error=abs(cake - direct) / direct if direct > 0 else 0.0,
        K_explicit=layer_cake_constant(d, r_exp, q_exp), d=d, r_exp=r_exp, q_exp=q_exp,
    )


def decay_profile_samples(d: int, amplitude: float, decay: float, cutoff: float,
                          core: float = 0.0, panels_per_decade: int = 8,
                          nodes_per_panel: int = 8) -> PhysicalSamples:
    """Radial samples of ``A (1 + |x|)^{-decay} 1_{|x| <= cutoff}``, plus ``core`` on ``|x| < 1``.

    Gauss panels are uniform on ``[0, 1]`` and geometric beyond, so cutoffs up
    to ``1e40`` cost a few thousand nodes.
    """
    if not (cutoff > 0 and amplitude > 0):
        raise ParameterError("positive amplitude and cutoff required")
    inner = np.linspace(0.0, min(cutoff, 1.0), 9)
    breaks = inner
    if cutoff > 1:
        n = max(1, int(math.ceil(panels_per_decade * math.log10(cutoff))))
        breaks = np.concatenate([inner, np.geomspace(1.0, cutoff, n + 1)[1:]])
    x, w = gauss_panels(breaks, nodes_per_panel)
    vals = amplitude * (1 + x) ** (-decay) + core * (x < 1)
    return PhysicalSamples(vals, sphere_area(d) * w * x ** (d - 1), x)


def interpolation_corpus(n: int = 100, seed: int = 0, d: int = 2, q_exp: float = 4.0,
                         r_exp: float = 3.0) -> list[PhysicalSamples]:
    """Seeded corpus of truncated decay profiles.

    Amplitudes are log-uniform on ``[1e-3, 1e3]``, decay rates uniform between
    ``d/q`` and ``d/r``, cutoffs log-uniform on ``[1e-1, 1e40]`` and a plateau
    of random height is added on the unit ball for a third of the members.
    With these ranges ``C1/C2`` sweeps from below ``1`` to beyond ``1e6``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        amp = 10 ** rng.uniform(-3, 3)
        decay = rng.uniform(d / q_exp, d / r_exp)
        if i % 4 == 0:
            decay = d / q_exp
        cutoff = 10 ** rng.uniform(-1, 40)
        core = amp * rng.uniform(0, 2) if i % 3 == 0 else 0.0
        out.append(decay_profile_samples(d, amp, decay, cutoff, core))
    return out

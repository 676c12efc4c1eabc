"""Rayleigh-quotient minimisation, epsilon sweeps, rate fits and chain verdicts.

The quotient is ``R(u) = q_eps(u) / ||u||_p^2``.  In whitened variables
``c = sqrt(M g) F`` on the unit sphere, minimising ``R`` is maximising the
convex functional ``Phi(c) = ||u||_p^p``; the inverse-symbol fixed point
``F <- analyze(|u|^{p-2} u) / g`` is the step ``c <- grad Phi / |grad Phi|``,
which increases ``Phi`` monotonically.  A projected-gradient ascent on the
same discretisation serves as an independent check.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .exponents import ProblemParams, SymbolSpec, predicted_rate
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
    symbol_on_grid,
)
from .trial import CLASS_SYMMETRY, TrialSpec, trial_values

INITS = ("knapp_trial", "radial_trial", "random_shell", "file")
LABEL_G1 = "infimum estimate, attainment unknown"


@dataclass(frozen=True)
class SolveConfig:
    """Solver controls.

    ``restarts`` counts the starts tried in the order ``init`` then the
    remaining built-in initialisations.  ``restart_max_iterations`` optionally
    caps the starts after the first; symmetry-broken minimisers in the full
    class are reached only after several hundred iterations, so the default
    leaves them uncapped.
    """

    max_iterations: int = 3000
    rel_tolerance: float = 1e-9
    patience: int = 3
    init: str = "knapp_trial"
    init_path: str | None = None
    restarts: int = 3
    restart_max_iterations: int | None = None
    seed: int = 0
    monotone_slack: float = 1e-10
    grid: GridConfig = field(default_factory=GridConfig)
    phys: PhysConfig = field(default_factory=PhysConfig)

    def __post_init__(self):
        if not self.rel_tolerance > 0:
            raise ParameterError("rel_tolerance > 0 required")
        if self.restarts < 1:
            raise ParameterError("restarts >= 1 required")
        if self.init not in INITS:
            raise ParameterError(f"init must be one of {INITS}")
        if self.init == "file" and not self.init_path:
            raise ParameterError("init = 'file' needs init_path")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["grid"] = self.grid.to_dict()
        out["phys"] = self.phys.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SolveConfig":
        data = dict(data)
        grid = GridConfig(**data.pop("grid", {}))
        phys = PhysConfig(**data.pop("phys", {}))
        return cls(grid=grid, phys=phys, **data)


@dataclass
class StartRecord:
    start: str
    rayleigh: float
    iterations: int
    converged: bool
    monotone: bool


@dataclass
class SolveResult:
    minimizer: SpectralField
    rayleigh: float
    iterations: int
    trace: np.ndarray
    converged: bool
    cls: str
    eps: float
    params: ProblemParams
    el_residual: float
    monotone: bool
    cauchy: float
    start: str
    starts: list
    tail_fraction: float
    symbol: str
    config: SolveConfig
    wall_time: float
    label: str = ""
    symbol_spec: SymbolSpec | None = None

    def summary(self) -> dict:
        return {
            "cls": self.cls, "eps": self.eps, "params": self.params.to_dict(),
            "rayleigh": self.rayleigh, "iterations": self.iterations, "converged": self.converged,
            "el_residual": self.el_residual, "monotone": self.monotone, "cauchy": self.cauchy,
            "start": self.start, "starts": [asdict(s) for s in self.starts],
            "tail_fraction": self.tail_fraction, "symbol": self.symbol, "label": self.label,
        }

    def to_dict(self) -> dict:
        out = self.summary()
        out["trace"] = [float(v) for v in self.trace]
        out["config"] = self.config.to_dict()
        out["input_hash"] = input_hash(self.params, self.eps, self.cls, self.config, self.symbol)
        return out


def input_hash(params, eps, cls, config, symbol: str) -> str:
    doc = {"params": params.to_dict(), "eps": float(eps), "cls": cls,
           "config": config.to_dict(), "symbol": symbol}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


# --------------------------------------------------------------------------- setup


def grid_for_class(params: ProblemParams, eps: float, cls: str, config: SolveConfig):
    if cls not in CLASS_SYMMETRY:
        raise ParameterError(f"unknown class {cls!r}; expected one of {tuple(CLASS_SYMMETRY)}")
    if cls == "Gk" and params.k is None:
        raise ParameterError("class Gk needs params.k")
    k = params.k if cls == "Gk" else None
    return build_grid(CLASS_SYMMETRY[cls], params.d, k, eps, params.gamma, config.grid, config.phys)


def _envelope(grid, eps, gamma, width_factor=4.0):
    s = np.abs(grid.radius - 1)
    w = eps ** (1 / gamma)
    return np.where(s <= width_factor * w, 1.0 / (eps + s**gamma), 0.0)


def initial_values(grid, params: ProblemParams, eps: float, start: str, rng) -> np.ndarray:
    """Starting spectrum for ``start`` on ``grid`` (projected into its class)."""
    gamma = params.gamma
    # a start is only a guess, so at large eps the default widths are clipped to 1/2
    m_rad = min(eps ** (1 / gamma), 0.5)
    delta = min(eps ** (1 / (2 * gamma)), 0.5)
    radial_spec = TrialSpec("radial", m=m_rad)
    if start == "knapp_trial":
        if isinstance(grid, RadialGrid):
            return trial_values(grid, eps, gamma, radial_spec)
        return trial_values(grid, eps, gamma, TrialSpec("knapp", m=min(delta**2, 0.5), delta=delta))
    if start == "radial_trial":
        return trial_values(grid, eps, gamma, radial_spec)
    if start == "random_shell":
        env = np.broadcast_to(_envelope(grid, eps, gamma), grid.shape)
        noise = rng.standard_normal(grid.shape)
        if grid.is_complex:
            noise = noise + 1j * rng.standard_normal(grid.shape)
        vals = env * (1.0 + 0.5 * noise)
        if isinstance(grid, FullGrid):
            vals = grid.hermitian_project(vals)
        return vals
    raise ParameterError(f"unknown start {start!r}")


def start_sequence(config: SolveConfig, cls: str) -> list[str]:
    order = [config.init] + [s for s in ("knapp_trial", "radial_trial", "random_shell") if s != config.init]
    if cls == "radial":
        # the Knapp start projects onto the radial trial in this class
        order = [s if s != "knapp_trial" else "radial_trial" for s in order]
        order = list(dict.fromkeys(order))
    seq = order[: config.restarts]
    if cls == "full" and "random_shell" not in seq:
        seq[-1:] = ["random_shell"] if len(seq) > 1 else seq + ["random_shell"]
    return seq


# --------------------------------------------------------------------------- Picard iteration


class Problem:
    """Discretised quotient for one grid, symbol and exponent."""

    def __init__(self, grid, symbol: SymbolSpec, eps: float, p: float):
        self.grid, self.eps, self.p = grid, eps, p
        self.g = np.broadcast_to(symbol_on_grid(grid, symbol, eps), grid.shape)
        self.m = np.broadcast_to(grid.measure, grid.shape)
        self.mp = grid.phys_measure

    def synth(self, F):
        u = self.grid.synthesize(F)
        return np.real(u) if isinstance(self.grid, FullGrid) else u

    def evaluate(self, F):
        u = self.synth(F)
        au = np.abs(u)
        phi = float(np.sum(self.mp * au**self.p))
        q = float(np.sum(self.m * self.g * np.abs(F) ** 2))
        return q / phi ** (2 / self.p), u, au, phi, q

    def nonlinear(self, u, au):
        return au ** (self.p - 2) * u

    def el_residual(self, F):
        """``||g F - R analyze(N(u))|| / ||g F||`` at ``||u||_p = 1``."""
        R, u, au, phi, q = self.evaluate(F)
        s = phi ** (-1 / self.p)
        F, u, au = F * s, u * s, au * s
        lhs = self.g * F
        rhs = R * self.grid.analyze(self.nonlinear(u, au))
        num = float(np.sum(self.m * np.abs(lhs - rhs) ** 2))
        den = float(np.sum(self.m * np.abs(lhs) ** 2))
        return math.sqrt(num / den)


def _normalise(F, problem):
    _, _, _, phi, _ = problem.evaluate(F)
    return F * phi ** (-1 / problem.p)


def picard(problem: Problem, F0, max_iterations: int, rel_tolerance: float, patience: int,
           slack: float = 1e-10):
    F = np.array(F0, dtype=complex if problem.grid.is_complex else float)
    F /= np.max(np.abs(F))
    trace, streak, converged = [], 0, False
    F_prev = F
    for it in range(max_iterations):
        R, u, au, phi, q = problem.evaluate(F)
        trace.append(R)
        if len(trace) > 1:
            change = abs(trace[-2] - trace[-1]) / trace[-1]
            streak = streak + 1 if change < rel_tolerance else 0
            if streak >= patience:
                converged = True
                break
        F_prev = F
        F = problem.grid.analyze(problem.nonlinear(u, au)) / problem.g
        F = F / np.max(np.abs(F))
    trace = np.array(trace)
    monotone = bool(np.all(np.diff(trace) <= slack * trace[1:]))
    Fn, Fp = _normalise(F, problem), _normalise(F_prev, problem)
    cauchy = math.sqrt(float(np.sum(problem.m * np.abs(Fn - Fp) ** 2)) / float(np.sum(problem.m * np.abs(Fn) ** 2)))
    return Fn, trace, converged, monotone, cauchy


def solve_ground_state(params: ProblemParams, eps: float, cls: str,
                       config: SolveConfig | None = None, symbol: SymbolSpec | None = None,
                       init_field: SpectralField | None = None, grid=None) -> SolveResult:
    """Minimise the Rayleigh quotient of ``cls`` at ``eps`` by inverse-symbol iteration.

    Starts are tried in the order given by :func:`start_sequence`; a supplied
    ``init_field`` (warm start) replaces the first one.  The best converged
    start is returned; when none converges the best start is returned with
    ``converged = False``.
    """
    t0 = time.perf_counter()
    config = config or SolveConfig()
    symbol = symbol or SymbolSpec.biharmonic()
    if not 0 < eps < 1:
        raise ParameterError("0 < eps < 1 required")
    grid = grid or grid_for_class(params, eps, cls, config)
    problem = Problem(grid, symbol, eps, params.p)
    rng = np.random.default_rng(config.seed)

    starts = start_sequence(config, cls)
    best, records = None, []
    for i, start in enumerate(starts):
        if i == 0 and init_field is not None:
            F0, start = init_field.values, "warm"
        elif start == "file":
            from .fields import load_field
            F0 = transfer(load_field(config.init_path), grid, 1.0).values
        else:
            F0 = initial_values(grid, params, eps, start, rng)
        limit = config.max_iterations
        if i > 0 and config.restart_max_iterations is not None:
            limit = min(limit, config.restart_max_iterations)
        F, trace, conv, mono, cauchy = picard(problem, F0, limit, config.rel_tolerance,
                                              config.patience, config.monotone_slack)
        records.append(StartRecord(start, float(trace[-1]), len(trace), conv, mono))
        cand = (conv, -trace[-1])
        if best is None or cand > best[0]:
            best = (cand, F, trace, conv, mono, cauchy, start)
    _, F, trace, conv, mono, cauchy, start = best
    u = SpectralField(grid, F, eps, {"cls": cls, "symbol": symbol.ident})
    tail = lp_norm_details(u, params.p).tail_fraction
    label = LABEL_G1 if (cls == "Gk" and params.k == 1) else ""
    return SolveResult(
        minimizer=u, rayleigh=float(trace[-1]), iterations=len(trace), trace=trace,
        converged=bool(conv), cls=cls, eps=eps, params=params,
        el_residual=problem.el_residual(F), monotone=mono, cauchy=cauchy, start=start,
        starts=records, tail_fraction=tail, symbol=symbol.ident, config=config,
        wall_time=time.perf_counter() - t0, label=label, symbol_spec=symbol,
    )


# --------------------------------------------------------------------------- gradient oracle


def solve_projected_gradient(params: ProblemParams, eps: float, cls: str,
                             config: SolveConfig | None = None, symbol: SymbolSpec | None = None,
                             init_field: SpectralField | None = None, grid=None,
                             max_iterations: int = 20000, rel_tolerance: float = 1e-11,
                             start: str | None = None):
    """Riemannian gradient ascent of ``||u||_p^p`` on the whitened unit sphere.

    Barzilai--Borwein step lengths safeguarded by Armijo backtracking.  Used
    only as an independent check of the fixed-point solver.  ``start`` names
    a built-in initialisation (seeded by ``config.seed``); by default the
    class's trial function is used.

    Returns
    -------
    (rayleigh, iterations, converged)
    """
    config = config or SolveConfig()
    symbol = symbol or SymbolSpec.biharmonic()
    grid = grid or grid_for_class(params, eps, cls, config)
    pr = Problem(grid, symbol, eps, params.p)
    p = params.p
    w = np.sqrt(pr.m * pr.g)
    if init_field is not None:
        F = np.array(init_field.values)
    else:
        start = start or ("radial_trial" if cls == "radial" else "knapp_trial")
        F = initial_values(grid, params, eps, start, np.random.default_rng(config.seed))
    c = w * F
    c = c / math.sqrt(float(np.sum(np.abs(c) ** 2)))

    def phi_grad(c):
        F = c / w
        u = pr.synth(F)
        au = np.abs(u)
        phi = float(np.sum(pr.mp * au**p))
        grad = p * np.sqrt(pr.m / pr.g) * grid.analyze(au ** (p - 2) * u)
        rg = grad - np.real(np.sum(np.conj(c) * grad)) * c
        return phi, rg

    phi, rg = phi_grad(c)
    tau = 1.0 / max(math.sqrt(float(np.sum(np.abs(rg) ** 2))), 1e-300) * 1e-2
    vals, streak, converged = [phi ** (-2 / p)], 0, False
    it = 0
    for it in range(1, max_iterations + 1):
        g2 = float(np.sum(np.abs(rg) ** 2))
        while True:
            cn = c + tau * rg
            cn = cn / math.sqrt(float(np.sum(np.abs(cn) ** 2)))
            phin, rgn = phi_grad(cn)
            if phin >= phi + 1e-4 * tau * g2 or tau < 1e-30:
                break
            tau *= 0.5
        s = cn - c
        y = rgn - rg
        sy = -float(np.real(np.sum(np.conj(s) * y)))
        tau = float(np.sum(np.abs(s) ** 2)) / sy if sy > 0 else 2 * tau
        c, phi, rg = cn, phin, rgn
        vals.append(phi ** (-2 / p))
        change = abs(vals[-2] - vals[-1]) / vals[-1]
        streak = streak + 1 if change < rel_tolerance else 0
        if streak >= config.patience:
            converged = True
            break
    return vals[-1], it, converged


# --------------------------------------------------------------------------- warm starts


def transfer(u: SpectralField, grid, scale: float = 1.0) -> SpectralField:
    """Interpolate ``u`` onto ``grid`` with shell offsets stretched by ``scale``.

    The value at a new node with radius ``r`` and direction ``omega`` is taken
    from the old field at radius ``1 + (r - 1) * scale`` in the same direction.
    """
    old = u.grid
    if old.symmetry != grid.symmetry:
        raise ParameterError("warm start across symmetry classes is not supported")
    r = grid.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        fac = np.where(r > 0, (1 + (r - 1) * scale) / np.where(r > 0, r, 1), 1.0)
    if isinstance(grid, RadialGrid):
        vals = np.interp(r * fac, old.r, u.values, right=0.0)
    elif isinstance(grid, BlockGrid):
        vals = _bilinear_zero(old.a, old.b, u.values, grid.A * fac, grid.B * fac)
    elif isinstance(grid, AxialGrid):
        order = np.argsort(old.xi_d)
        rho = grid.rho[:, None] * fac
        xd = grid.xi_d[None, :] * fac
        vals = _bilinear_zero(old.rho, old.xi_d[order], u.values[:, order], rho, xd)
    elif isinstance(grid, FullGrid):
        mesh = grid.component_mesh()
        full = np.fft.fftshift(old.full_spectrum(u.values))
        centre = old.n // 2
        coords = np.stack([(c * fac / old.dk + centre).ravel() for c in mesh])
        re = ndimage.map_coordinates(full.real, coords, order=1, mode="constant")
        im = ndimage.map_coordinates(full.imag, coords, order=1, mode="constant")
        vals = grid.hermitian_project((re + 1j * im).reshape(grid.shape))
    else:
        raise ParameterError(f"unsupported grid {type(grid).__name__}")
    return SpectralField(grid, vals, u.eps, dict(u.meta))


def _bilinear_zero(xn, yn, F, xq, yq):
    out = np.zeros(np.broadcast(xq, yq).shape, dtype=F.dtype)
    xq, yq = np.broadcast_arrays(xq, yq)
    ok = (xq >= xn[0]) & (xq <= xn[-1]) & (yq >= yn[0]) & (yq <= yn[-1])
    xs, ys = xq[ok], yq[ok]
    i = np.clip(np.searchsorted(xn, xs) - 1, 0, xn.size - 2)
    j = np.clip(np.searchsorted(yn, ys) - 1, 0, yn.size - 2)
    tx = (xs - xn[i]) / (xn[i + 1] - xn[i])
    ty = (ys - yn[j]) / (yn[j + 1] - yn[j])
    out[ok] = ((1 - tx) * (1 - ty) * F[i, j] + tx * (1 - ty) * F[i + 1, j]
               + (1 - tx) * ty * F[i, j + 1] + tx * ty * F[i + 1, j + 1])
    return out


# --------------------------------------------------------------------------- fits and sweeps


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    band: float
    log_power_used: float
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def fit_rate(eps, values, with_log_correction: bool = False, log_power: float = 0.0) -> RateFit:
    """Least-squares slope of ``log R`` against ``log eps``.

    With ``with_log_correction`` the series is first divided by
    ``|log eps|^log_power``.  ``band`` is the max/min ratio of the series
    compensated by the fitted power law.
    """
    eps = np.asarray(eps, float)
    vals = np.asarray(values, float)
    if eps.size < 3:
        raise ParameterError("at least 3 points needed for a rate fit")
    if np.ptp(np.log(eps)) == 0:
        raise ParameterError("degenerate abscissas: all eps equal")
    lp = log_power if with_log_correction else 0.0
    y = np.log(vals) - lp * np.log(np.abs(np.log(eps)))
    x = np.log(eps)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    comp = np.exp(y - slope * x)
    return RateFit(float(slope), float(icpt), float(np.sqrt(np.mean(resid**2))),
                   float(comp.max() / comp.min()), float(lp), int(eps.size))


def compensated_series(eps, values, power: float, log_power: float = 0.0) -> np.ndarray:
    eps = np.asarray(eps, float)
    return np.asarray(values, float) * eps ** (-power) * np.abs(np.log(eps)) ** (-log_power)


@dataclass
class SweepResult:
    cls: str
    params: ProblemParams
    results: list
    fit: RateFit | None
    fit_error: str = ""

    @property
    def eps(self) -> np.ndarray:
        return np.array([r.eps for r in self.results])

    @property
    def rayleigh(self) -> np.ndarray:
        return np.array([r.rayleigh for r in self.results])

    @property
    def converged(self) -> np.ndarray:
        return np.array([r.converged for r in self.results])

    def rows(self) -> list[dict]:
        return [{"eps": r.eps, "cls": self.cls, "rayleigh": r.rayleigh, "converged": r.converged,
                 "iterations": r.iterations, "el_residual": r.el_residual, "monotone": r.monotone,
                 "tail_fraction": r.tail_fraction} for r in self.results]

    def to_dict(self) -> dict:
        pred = predicted_rate(self.params, "full" if self.cls == "axial" else self.cls)
        return {
            "cls": self.cls, "params": self.params.to_dict(), "points": self.rows(),
            "fit": self.fit.to_dict() if self.fit else None, "fit_error": self.fit_error,
            "predicted": {"power": pred.power, "log_power": pred.log_power},
        }


def sweep(params: ProblemParams, eps_list, cls: str, config: SolveConfig | None = None,
          symbol: SymbolSpec | None = None, warm_start: bool = True,
          with_log_correction: bool = False) -> SweepResult:
    """Solve over decreasing ``eps`` and fit the rate on converged points.

    Each solve is warm-started from the previous minimiser with its shell
    profile stretched by ``(eps_prev / eps)^{1/gamma}``.
    """
    config = config or SolveConfig()
    eps_sorted = sorted((float(e) for e in eps_list), reverse=True)
    if len(set(eps_sorted)) != len(eps_sorted):
        raise ParameterError("eps values must be distinct")
    results, prev = [], None
    for e in eps_sorted:
        grid = grid_for_class(params, e, cls, config)
        init = None
        if warm_start and prev is not None:
            init = transfer(prev.minimizer, grid, (prev.eps / e) ** (1 / params.gamma))
        res = solve_ground_state(params, e, cls, config, symbol, init_field=init, grid=grid)
        results.append(res)
        prev = res
    ok = [r for r in results if r.converged]
    fit, err = None, ""
    lp = predicted_rate(params, "full" if cls == "axial" else cls).log_power
    try:
        fit = fit_rate([r.eps for r in ok], [r.rayleigh for r in ok], with_log_correction, lp)
    except ParameterError as exc:
        err = str(exc)
    return SweepResult(cls, params, results, fit, err)


# --------------------------------------------------------------------------- chain


@dataclass
class ChainEntry:
    cls: str
    k: int | None
    rayleigh: float
    uncertainty: float
    converged: bool
    coarse_rayleigh: float


@dataclass
class ChainReport:
    eps: float
    entries: list
    gaps: list
    verdict: str

    def to_dict(self) -> dict:
        return {"eps": self.eps, "entries": [asdict(e) for e in self.entries],
                "gaps": self.gaps, "verdict": self.verdict}


def chain_classes(d: int) -> list[tuple[str, int | None]]:
    out = [("full", None)] if d <= 3 else []
    out += [("Gk", k) for k in range(2, d // 2 + 1)]
    out.append(("radial", None))
    return out


def verify_chain(params: ProblemParams, eps: float, config: SolveConfig | None = None,
                 symbol: SymbolSpec | None = None, coarse_resolution: float = 0.75,
                 classes=None) -> ChainReport:
    """Solve every class of the chain and grade each strict inequality.

    The uncertainty of each quotient is the change under a re-solve at
    ``coarse_resolution`` times the node density.  A gap is ``separated``
    when it exceeds the combined uncertainty, ``violated`` when it is below
    minus that, ``inconclusive`` otherwise, and ``invalid`` when either solve
    did not converge.
    """
    config = config or SolveConfig()
    classes = classes or chain_classes(params.d)
    coarse_cfg = replace(config, grid=replace(config.grid, resolution=config.grid.resolution * coarse_resolution))
    entries = []
    for cls, k in classes:
        pk = params.with_k(k) if cls == "Gk" else params
        fine = solve_ground_state(pk, eps, cls, config, symbol)
        coarse = solve_ground_state(pk, eps, cls, coarse_cfg, symbol)
        entries.append(ChainEntry(cls, k, fine.rayleigh, abs(fine.rayleigh - coarse.rayleigh),
                                  fine.converged and coarse.converged, coarse.rayleigh))
    gaps, verdicts = [], []
    for lo, hi in zip(entries[:-1], entries[1:]):
        gap = hi.rayleigh - lo.rayleigh
        unc = lo.uncertainty + hi.uncertainty
        if not (lo.converged and hi.converged):
            v = "invalid"
        elif gap > unc:
            v = "separated"
        elif gap < -unc:
            v = "violated"
        else:
            v = "inconclusive"
        verdicts.append(v)
        gaps.append({"lower": _name(lo), "upper": _name(hi), "gap": gap, "uncertainty": unc, "verdict": v})
    for v in ("invalid", "violated", "inconclusive"):
        if v in verdicts:
            overall = v
            break
    else:
        overall = "separated"
    return ChainReport(eps, entries, gaps, overall)


def _name(e: ChainEntry) -> str:
    return f"G{e.k}" if e.cls == "Gk" else e.cls

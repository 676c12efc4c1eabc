"""Problem parameters, admissible symbols, critical exponents and predicted rates."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import integrate

from .errors import ExtrapolationError, ParameterError, QuadratureError

SYMBOL_KINDS = ("biharmonic", "shell-power", "tabulated")
RATE_CLASSES = ("full", "Gk", "radial")

# shell-power symbol: inner formula up to |r-1| = 1/2, max of both regimes
# on the band [1/2, 1/2 + TRANSITION_WIDTH], outer formula beyond
TRANSITION_WIDTH = 0.05


@dataclass(frozen=True)
class ProblemParams:
    """The tuple (d, k, p, s, gamma) driving every exponent and rate.

    ``k`` is optional; radial and full-space runs do not need it.
    """

    d: int
    p: float
    s: float = 2.0
    gamma: float = 2.0
    k: int | None = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ParameterError(f"d >= 2 required, got d={self.d}")
        if self.k is not None and not (1 <= self.k <= self.d - 1):
            raise ParameterError(f"1 <= k <= d-1 required, got k={self.k}, d={self.d}")
        if not self.p > 2:
            raise ParameterError(f"p > 2 required, got p={self.p}")
        if not self.s > self.d / (self.d + 1):
            raise ParameterError(f"s > d/(d+1) required, got s={self.s}, d={self.d}")
        if not self.gamma > 1:
            raise ParameterError(f"gamma > 1 required, got gamma={self.gamma}")
        if not self.p < sobolev_exponent(self.d, self.s):
            raise ParameterError(
                f"p < 2_s^* = {sobolev_exponent(self.d, self.s)} required, got p={self.p}"
            )

    def with_k(self, k: int | None) -> "ProblemParams":
        return ProblemParams(d=self.d, p=self.p, s=self.s, gamma=self.gamma, k=k)

    def to_dict(self) -> dict:
        return {"d": self.d, "k": self.k, "p": self.p, "s": self.s, "gamma": self.gamma}


@dataclass(frozen=True)
class ExponentSet:
    two_star_k: float
    two_star: float
    two_star_rad: float
    two_star_sobolev: float
    alpha_k: float
    alpha_rad: float


@dataclass(frozen=True)
class RatePrediction:
    """Predicted small-eps behaviour ``eps**power * |log eps|**log_power``."""

    power: float
    log_power: float
    cls: str

    def evaluate(self, eps):
        eps = np.asarray(eps, dtype=float)
        return eps**self.power * np.abs(np.log(eps)) ** self.log_power


def sobolev_exponent(d: int, s: float) -> float:
    return 2 * d / (d - 2 * s) if s < d / 2 else math.inf


def stein_tomas_k(d: int, k: int) -> float:
    """Sharp Stein--Tomas exponent for O(d-k) x O(k)-symmetric densities."""
    if not (1 <= k <= d - 1):
        raise ParameterError(f"1 <= k <= d-1 required, got k={k}, d={d}")
    m = min(k, d - k)
    return 2 * (d + m) / (d - 2 + m)


def critical_exponents(params: ProblemParams) -> ExponentSet:
    d, p = params.d, params.p
    if not p > 2:
        raise ParameterError(f"p > 2 required, got p={p}")
    k = 1 if params.k is None else params.k
    if not (1 <= k <= d - 1):
        raise ParameterError(f"1 <= k <= d-1 required, got k={k}")
    m = min(k, d - k)
    gap = 0.5 - 1 / p
    return ExponentSet(
        two_star_k=stein_tomas_k(d, k),
        two_star=2 * (d + 1) / (d - 1),
        two_star_rad=2 * d / (d - 1),
        two_star_sobolev=sobolev_exponent(d, params.s),
        alpha_k=(d + m) * gap,
        alpha_rad=2 * d * gap,
    )


def _alpha_for(params: ProblemParams, cls: str) -> float:
    ex = critical_exponents(params)
    if cls == "full":
        return critical_exponents(params.with_k(1)).alpha_k
    if cls == "Gk":
        if params.k is None:
            raise ParameterError("class Gk needs params.k")
        return ex.alpha_k
    if cls == "radial":
        return ex.alpha_rad
    raise ParameterError(f"unknown class {cls!r}; expected one of {RATE_CLASSES}")


def predicted_rate(params: ProblemParams, cls: str) -> RatePrediction:
    """Small-eps exponent (and log correction) of the Rayleigh quotient of ``cls``."""
    alpha = _alpha_for(params, cls)
    power = 1 - min(1.0, alpha) / params.gamma
    log_power = 0.0
    if cls == "radial" and math.isclose(params.p, critical_exponents(params).two_star_rad, rel_tol=1e-12):
        log_power = (1 - params.d) / params.d
    return RatePrediction(power=power, log_power=log_power, cls=cls)


# --------------------------------------------------------------------------- symbols


@dataclass(frozen=True)
class SymbolSpec:
    """A radial Fourier multiplier ``g_eps(|xi|)``.

    Use the constructors :meth:`biharmonic`, :meth:`shell_power` and
    :meth:`tabulated` rather than building instances by hand.
    """

    kind: str
    s: float = 2.0
    gamma: float = 2.0
    tables: Mapping[float, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    sources: Mapping[float, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise ParameterError(f"unknown symbol kind {self.kind!r}")
        if self.kind == "tabulated":
            if not self.tables:
                raise ParameterError("tabulated symbol needs at least one table")
            for eps, (r, v) in self.tables.items():
                if np.any(~np.isfinite(v)) or np.any(np.asarray(v) <= 0):
                    raise ParameterError(f"non-positive symbol values in table eps={eps}")
                if np.any(np.diff(r) <= 0):
                    raise ParameterError(f"table eps={eps}: r must be strictly increasing")

    @classmethod
    def biharmonic(cls) -> "SymbolSpec":
        return cls(kind="biharmonic", s=2.0, gamma=2.0)

    @classmethod
    def shell_power(cls, s: float, gamma: float) -> "SymbolSpec":
        return cls(kind="shell-power", s=float(s), gamma=float(gamma))

    @classmethod
    def tabulated(cls, tables: Mapping[float, tuple], gamma: float = 2.0, s: float = 2.0) -> "SymbolSpec":
        clean = {float(e): (np.asarray(r, float), np.asarray(v, float)) for e, (r, v) in tables.items()}
        return cls(kind="tabulated", s=s, gamma=gamma, tables=clean)

    @classmethod
    def from_csv(cls, paths: Mapping[float, str | Path], gamma: float = 2.0, s: float = 2.0) -> "SymbolSpec":
        """Load one two-column ``r,value`` CSV per eps."""
        tables = {}
        for eps, path in paths.items():
            rows = []
            with open(path, newline="") as fh:
                for row in csv.reader(fh):
                    if not row or row[0].strip().startswith("#"):
                        continue
                    try:
                        rows.append((float(row[0]), float(row[1])))
                    except ValueError:
                        continue  # header line
            arr = np.array(rows, dtype=float)
            tables[float(eps)] = (arr[:, 0], arr[:, 1])
        spec = cls.tabulated(tables, gamma=gamma, s=s)
        return cls(kind=spec.kind, s=s, gamma=gamma, tables=spec.tables,
                   sources={float(e): str(p) for e, p in paths.items()})

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "s": self.s, "gamma": self.gamma}
        if self.kind == "tabulated":
            out["tables"] = {repr(e): p for e, p in sorted(self.sources.items())}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "SymbolSpec":
        kind = data.get("kind", "biharmonic")
        if kind == "biharmonic":
            return cls.biharmonic()
        if kind == "shell-power":
            return cls.shell_power(data["s"], data["gamma"])
        if kind == "tabulated":
            paths = {float(e): p for e, p in data["tables"].items()}
            return cls.from_csv(paths, gamma=data.get("gamma", 2.0), s=data.get("s", 2.0))
        raise ParameterError(f"unknown symbol kind {kind!r}")

    @property
    def ident(self) -> str:
        if self.kind == "biharmonic":
            return "biharmonic"
        if self.kind == "shell-power":
            return f"shell-power(s={self.s:g},gamma={self.gamma:g})"
        return "tabulated(" + ",".join(f"{e:g}" for e in sorted(self.tables)) + ")"


def _tab_eval(table, r):
    rr, vv = table
    if np.any(r < rr[0] - 1e-12) or np.any(r > rr[-1] + 1e-12):
        raise ExtrapolationError(f"r outside tabulated range [{rr[0]}, {rr[-1]}]")
    return np.interp(r, rr, vv)


def eval_symbol(spec: SymbolSpec, r, eps: float):
    """Evaluate ``g_eps(r)``; vectorised over ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterError("r >= 0 required")
    if not 0 < eps <= 1:
        raise ParameterError(f"0 < eps < 1 required, got eps={eps}")
    if spec.kind == "biharmonic":
        return (r * r - 1.0) ** 2 + eps
    if spec.kind == "shell-power":
        dist = np.abs(r - 1.0)
        inner = eps + dist**spec.gamma
        outer = 1.0 + r ** (2 * spec.s)
        return np.where(
            dist <= 0.5, inner,
            np.where(dist >= 0.5 + TRANSITION_WIDTH, outer, np.maximum(inner, outer)),
        )
    keys = np.array(sorted(spec.tables))
    hit = np.isclose(keys, eps, rtol=1e-12, atol=0)
    if hit.any():
        return _tab_eval(spec.tables[float(keys[hit][0])], r)
    if eps < keys[0] or eps > keys[-1]:
        raise ExtrapolationError(f"eps={eps} outside tabulated eps range [{keys[0]}, {keys[-1]}]")
    j = int(np.searchsorted(keys, eps))
    e0, e1 = keys[j - 1], keys[j]
    t = (math.log(eps) - math.log(e0)) / (math.log(e1) - math.log(e0))
    g0 = _tab_eval(spec.tables[float(e0)], r)
    g1 = _tab_eval(spec.tables[float(e1)], r)
    return np.exp((1 - t) * np.log(g0) + t * np.log(g1))


# --------------------------------------------------------------------------- admissibility


@dataclass
class AdmissibilityReport:
    c_lower: float
    C_upper: float
    r_grid: np.ndarray
    eps_list: np.ndarray
    passed: bool
    per_eps: list[dict]
    failed_bounds: list[str]
    s: float
    gamma: float

    def to_dict(self) -> dict:
        return {
            "pass": bool(self.passed),
            "c_lower": self.c_lower,
            "C_upper": self.C_upper,
            "s": self.s,
            "gamma": self.gamma,
            "failed_bounds": list(self.failed_bounds),
            "per_eps": self.per_eps,
            "n_r": int(self.r_grid.size),
            "eps_list": [float(e) for e in self.eps_list],
        }


def default_admissibility_grid(eps_list, gamma: float, n: int = 512, r_max: float = 1e3) -> np.ndarray:
    """512 points per regime: log-spaced in ``|r-1|`` on the shell, log-spaced in ``r`` outside."""
    floor = min(1e-8, 1e-2 * min(eps_list) ** (1 / gamma))
    t = np.geomspace(floor, 0.5, n)
    shell = np.concatenate([1 - t, 1 + t])
    outer = np.concatenate([np.linspace(0.0, 0.5, n // 4), np.geomspace(1.5, r_max, n - n // 4)])
    return np.unique(np.concatenate([shell, outer]))


def check_admissibility(spec: SymbolSpec, s: float, gamma: float, eps_list, r_grid=None,
                        drift_tol: float = 1.5) -> AdmissibilityReport:
    """Sampled two-sided bounds of the symbol against ``1 + r^{2s}`` and ``eps + |r-1|^gamma``.

    The constants are computed per eps; the bounds are declared uniform when
    the per-eps constants of each regime stay within a factor ``drift_tol`` of
    each other across ``eps_list``. The names of failing bounds are ``growth``
    (away from the unit sphere) and ``shell`` (near it).
    """
    eps_arr = np.asarray(list(eps_list), dtype=float)
    if eps_arr.size == 0:
        raise ParameterError("empty eps_list")
    if np.any((eps_arr <= 0) | (eps_arr >= 1)):
        raise ParameterError("eps_list must lie in (0, 1)")
    r = default_admissibility_grid(eps_arr, gamma) if r_grid is None else np.asarray(r_grid, float)
    if r.size == 0:
        raise ParameterError("empty r grid")
    dist = np.abs(r - 1)
    shell_mask = dist <= 0.5
    growth_mask = dist >= 0.5
    if not shell_mask.any() or not growth_mask.any():
        raise ParameterError("r grid must cover both |r-1| <= 1/2 and |r-1| >= 1/2")

    per_eps, failed = [], set()
    for eps in eps_arr:
        g = eval_symbol(spec, r, eps)
        if np.any(~np.isfinite(g)) or np.any(g <= 0):
            raise ParameterError(f"non-positive symbol at eps={eps}")
        rg = g[growth_mask] / (1 + r[growth_mask] ** (2 * s))
        rs = g[shell_mask] / (eps + dist[shell_mask] ** gamma)
        per_eps.append({
            "eps": float(eps),
            "growth": [float(rg.min()), float(rg.max())],
            "shell": [float(rs.min()), float(rs.max())],
        })
    for name in ("growth", "shell"):
        lo = np.array([row[name][0] for row in per_eps])
        hi = np.array([row[name][1] for row in per_eps])
        if lo.min() <= 0 or lo.max() / lo.min() > drift_tol or hi.max() / hi.min() > drift_tol:
            failed.add(name)
    c_lower = min(min(row["growth"][0], row["shell"][0]) for row in per_eps)
    C_upper = max(max(row["growth"][1], row["shell"][1]) for row in per_eps)
    passed = not failed and 0 < c_lower <= C_upper < math.inf
    return AdmissibilityReport(
        c_lower=c_lower, C_upper=C_upper, r_grid=r, eps_list=eps_arr, passed=passed,
        per_eps=per_eps, failed_bounds=sorted(failed), s=s, gamma=gamma,
    )


def inverse_symbol_integral(spec: SymbolSpec, eps: float, rtol: float = 1e-10) -> float:
    """``int_{1/2}^{3/2} dr / g_eps(r)`` on a mesh graded toward ``r = 1`` at scale ``eps^{1/gamma}``."""
    if not 0 < eps <= 1:
        raise ParameterError(f"0 < eps < 1 required, got eps={eps}")
    width = eps ** (1 / spec.gamma)
    offsets = [0.0]
    h = width / 4
    while h < 0.5:
        offsets.append(h)
        h *= 2
    offsets.append(0.5)
    offsets = np.unique(offsets)
    breaks = np.unique(np.concatenate([1 - offsets, 1 + offsets]))
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        val, err, info = integrate.quad(
            lambda x: 1.0 / float(eval_symbol(spec, x, eps)), a, b,
            epsabs=0.0, epsrel=rtol, limit=200, full_output=True,
        )[:3]
        if err > 1e2 * rtol * abs(val) + 1e-300:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge (err={err:.2e})")
        total += val
    return total

"""Spectral fields and the operations on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, special

from ..bessel import sphere_area
from ..errors import AccuracyError, ExtrapolationError, ParameterError
from ..exponents import SymbolSpec, eval_symbol
from .grids import AxialGrid, BlockGrid, FullGrid, RadialGrid, SpectralGrid

TAIL_LIMIT = 0.05


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A function represented by Fourier-side samples on a symmetry-reduced grid."""

    grid: SpectralGrid
    values: np.ndarray
    eps: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dtype = complex if self.grid.is_complex else float
        vals = np.array(self.values, dtype=dtype)
        if vals.shape != tuple(np.atleast_1d(self.grid.shape)):
            raise ParameterError(f"values of shape {vals.shape} do not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def symmetry(self) -> str:
        return self.grid.symmetry

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def k(self):
        return self.grid.k

    @property
    def weights(self) -> np.ndarray:
        return self.grid.measure

    def with_values(self, values, **meta) -> "SpectralField":
        return SpectralField(self.grid, values, self.eps, {**self.meta, **meta})

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if other.grid is not self.grid:
            raise ParameterError("fields live on different grids")
        return self.with_values(self.values + other.values)

    def scale(self, lam) -> "SpectralField":
        return self.with_values(lam * self.values)

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.inner(self.values, self.values))


def symbol_on_grid(grid: SpectralGrid, spec: SymbolSpec, eps: float) -> np.ndarray:
    return eval_symbol(spec, grid.radius, eps)


def quad_form(u: SpectralField, spec: SymbolSpec, eps: float) -> float:
    """``int |u^(xi)|^2 g_eps(|xi|) d xi`` with the grid's measure."""
    g = symbol_on_grid(u.grid, spec, eps)
    return float(np.sum(u.grid.measure * g * np.abs(u.values) ** 2))


def _resolve_grid(u: SpectralField, phys):
    if phys is None or phys == u.grid.phys:
        return u.grid
    return u.grid.with_phys(phys)


@dataclass(frozen=True)
class PhysicalSamples:
    values: np.ndarray
    measure: np.ndarray
    radius: np.ndarray


def synthesize(u: SpectralField, phys=None) -> PhysicalSamples:
    """Inverse Fourier transform onto the grid's physical quadrature nodes."""
    grid = _resolve_grid(u, phys)
    return PhysicalSamples(grid.synthesize(u.values), grid.phys_measure, grid.phys_radius)


@dataclass(frozen=True)
class LpNorm:
    value: float
    integral: float
    tail_estimate: float

    @property
    def tail_fraction(self) -> float:
        return self.tail_estimate / self.integral if self.integral > 0 else 0.0


def dyadic_tail(abs_pow, measure, radius, extent, floor: float = 0.0) -> float:
    """Tail of ``int |u|^p`` past ``extent`` by geometric continuation.

    The two outermost dyadic shells ``(X/4, X/2]`` and ``(X/2, X]`` fix a decay
    ratio ``rho``; the tail is ``I_outer * rho / (1 - rho)``, infinite when the
    contributions do not decay.  Shells below ``floor`` count as resolved to
    round-off and give a zero tail.
    """
    outer = np.sum((measure * abs_pow)[(radius > extent / 2) & (radius <= extent)])
    inner = np.sum((measure * abs_pow)[(radius > extent / 4) & (radius <= extent / 2)])
    if outer <= floor:
        return 0.0
    rho = outer / inner if inner > 0 else math.inf
    return float(outer * rho / (1 - rho)) if rho < 1 else math.inf


def lp_norm_details(u: SpectralField, p: float, phys=None) -> LpNorm:
    if not p >= 2:
        raise ParameterError("p >= 2 required")
    grid = _resolve_grid(u, phys)
    vals = grid.synthesize(u.values)
    ap = np.abs(vals) ** p
    integral = float(np.sum(grid.phys_measure * ap))
    if isinstance(grid, FullGrid):
        tail = 0.0  # periodic box, no truncation
    else:
        extent = float(np.max(grid.phys_radius))
        tail = dyadic_tail(ap, grid.phys_measure, grid.phys_radius, extent, floor=1e-13 * integral)
    return LpNorm(value=integral ** (1 / p), integral=integral, tail_estimate=tail)


def lp_norm(u: SpectralField, p: float, phys=None, tail_limit: float = TAIL_LIMIT) -> float:
    """``||u||_p`` from the synthesised samples.

    Raises
    ------
    AccuracyError
        If the estimated tail beyond the physical truncation exceeds
        ``tail_limit`` times the computed integral.
    """
    res = lp_norm_details(u, p, phys)
    if res.tail_fraction > tail_limit:
        raise AccuracyError(
            f"L^{p} tail estimate is {res.tail_fraction:.1%} of the integral; enlarge x_max"
        )
    return res.value


# --------------------------------------------------------------------------- shells


@dataclass(frozen=True)
class ShellWindow:
    """``I = [delta eps^{1/gamma}, eps^{1/gamma} / delta]`` and the annulus ``||xi|-1| in I``."""

    eps: float
    delta: float
    gamma: float = 2.0

    def __post_init__(self):
        if not (0 < self.delta < 1 and self.eps > 0):
            raise ParameterError("0 < delta < 1 and eps > 0 required")

    @property
    def interval(self) -> tuple[float, float]:
        w = self.eps ** (1 / self.gamma)
        return self.delta * w, w / self.delta

    def contains(self, radius):
        lo, hi = self.interval
        s = np.abs(np.asarray(radius) - 1)
        return (s >= lo) & (s <= hi)


@dataclass(frozen=True)
class HalfShell:
    """The coarse window ``||xi| - 1| <= 1/2``."""

    def contains(self, radius):
        return np.abs(np.asarray(radius) - 1) <= 0.5


def shell_split(u: SpectralField, window) -> tuple[SpectralField, SpectralField]:
    """Split ``u = v + w`` with ``v^`` the restriction of ``u^`` to the window (by node)."""
    mask = window.contains(u.grid.radius)
    mask = np.broadcast_to(mask, u.values.shape)
    v = np.where(mask, u.values, 0)
    w = np.where(mask, 0, u.values)
    return u.with_values(v, part="shell"), u.with_values(w, part="off-shell")


# --------------------------------------------------------------------------- sphere traces


@dataclass(frozen=True)
class SphereFunction:
    """Samples of a function on ``S^{d-1}`` scaled to radius ``r``.

    ``kind`` is ``circle`` (equispaced angles, ``d = 2``), ``block`` (a
    ``G_k``-invariant function sampled at Gauss--Jacobi nodes in ``x = cos 2 phi``),
    or ``axial`` (``O(d-1)``-invariant, Gauss--Jacobi nodes in ``x = cos theta``).
    ``weights`` integrate over the whole sphere.
    """

    kind: str
    d: int
    r: float
    values: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    jacobi: tuple[float, float] | None = None
    k: int | None = None

    def __post_init__(self):
        if self.values.size < 64:
            raise ParameterError("a sphere function needs at least 64 samples")

    def l2_norm(self) -> float:
        return math.sqrt(float(np.sum(self.weights * np.abs(self.values) ** 2)))


def jacobi_sphere_rule(kind: str, d: int, k: int | None, n: int):
    """Nodes ``x``, sphere-normalised weights and Jacobi parameters for invariant traces."""
    if kind == "block":
        alpha, beta = (k - 2) / 2, (d - k - 2) / 2
        x, w = special.roots_jacobi(n, alpha, beta)
        w = w * sphere_area(d - k) * sphere_area(k) * 2.0 ** (-d / 2)
    elif kind == "axial":
        alpha = beta = (d - 3) / 2
        x, w = special.roots_jacobi(n, alpha, beta)
        w = w * sphere_area(d - 1)
    else:
        raise ParameterError(f"no Jacobi rule for kind {kind!r}")
    return x, w, (alpha, beta)


def _bilinear(xn, yn, F, xq, yq):
    if (np.any(xq < xn[0] - 1e-12) or np.any(xq > xn[-1] + 1e-12)
            or np.any(yq < yn[0] - 1e-12) or np.any(yq > yn[-1] + 1e-12)):
        raise ExtrapolationError("trace leaves the spectral grid")
    i = np.clip(np.searchsorted(xn, xq) - 1, 0, xn.size - 2)
    j = np.clip(np.searchsorted(yn, yq) - 1, 0, yn.size - 2)
    tx = np.clip((xq - xn[i]) / (xn[i + 1] - xn[i]), 0, 1)
    ty = np.clip((yq - yn[j]) / (yn[j + 1] - yn[j]), 0, 1)
    return ((1 - tx) * (1 - ty) * F[i, j] + tx * (1 - ty) * F[i + 1, j]
            + (1 - tx) * ty * F[i, j + 1] + tx * ty * F[i + 1, j + 1])


def sphere_trace(u: SpectralField, r: float, n: int = 128) -> SphereFunction:
    """Restrict ``u^`` to the sphere of radius ``r``.

    Radial fields give constants; block and axial grids interpolate bilinearly
    in the two moduli; the full grid (``d = 2``) uses separable cubic splines.
    """
    g = u.grid
    if n < 64:
        raise ParameterError("at least 64 trace samples required")
    if r <= 0 or r > float(np.max(g.radius)):
        raise ExtrapolationError(f"radius {r} outside the spectral grid")
    if isinstance(g, RadialGrid):
        if r < g.r[0] or r > g.r[-1]:
            raise ExtrapolationError(f"radius {r} outside [{g.r[0]}, {g.r[-1]}]")
        val = np.interp(r, g.r, u.values)
        if g.d == 2:
            theta = 2 * np.pi * np.arange(n) / n
            return SphereFunction("circle", 2, r, np.full(n, val, dtype=complex), theta,
                                  np.full(n, 2 * np.pi / n))
        x, w, jac = jacobi_sphere_rule("axial", g.d, None, n)
        return SphereFunction("axial", g.d, r, np.full(n, val, dtype=complex), x, w, jac)
    if isinstance(g, BlockGrid):
        x, w, jac = jacobi_sphere_rule("block", g.d, g.k, n)
        phi = 0.5 * np.arccos(x)
        vals = _bilinear(g.a, g.b, u.values, r * np.cos(phi), r * np.sin(phi))
        return SphereFunction("block", g.d, r, vals.astype(complex), phi, w, jac, k=g.k)
    if isinstance(g, AxialGrid):
        x, w, jac = jacobi_sphere_rule("axial", g.d, None, n)
        order = np.argsort(g.xi_d)
        vals = _bilinear(g.rho, g.xi_d[order], u.values[:, order], r * np.sqrt(1 - x**2), r * x)
        return SphereFunction("axial", g.d, r, vals, x, w, jac)
    if isinstance(g, FullGrid):
        if g.d != 2:
            raise ParameterError("full-grid traces are implemented for d = 2")
        return _full_trace(u, r, max(n, 256))
    raise ParameterError(f"unsupported grid {type(g).__name__}")


def _full_trace(u: SpectralField, r: float, n: int) -> SphereFunction:
    g = u.grid
    theta = 2 * np.pi * np.arange(n) / n
    # local fft-shifted patch around the circle, then cubic spline interpolation
    half = int(math.ceil((r + 4 * g.dk) / g.dk)) + 3
    if half >= g.n // 2:
        raise ExtrapolationError("trace radius too close to the box frequency limit")
    full = g.full_spectrum(u.values)
    idx = np.arange(-half, half + 1) % g.n
    patch = full[np.ix_(idx, idx)]
    cx = r * np.cos(theta) / g.dk + half
    cy = r * np.sin(theta) / g.dk + half
    coords = np.vstack([cx, cy])
    re = ndimage.map_coordinates(patch.real, coords, order=3, mode="nearest")
    im = ndimage.map_coordinates(patch.imag, coords, order=3, mode="nearest")
    return SphereFunction("circle", 2, r, re + 1j * im, theta, np.full(n, 2 * np.pi / n))


def sphere_sobolev_norm(f: SphereFunction, t: int) -> float:
    """``||(1 - Delta)^{t/2} f||_{L^2(S^{d-1})}`` for ``t in {0, 1, 2}``.

    On the circle the multiplier acts on Fourier coefficients. For invariant
    traces it acts on the Jacobi expansion, whose degree-``n`` term is an
    eigenfunction of the Laplace--Beltrami operator.
    """
    if t not in (0, 1, 2):
        raise ParameterError(f"Sobolev order t in {{0, 1, 2}} required, got {t}")
    if f.kind == "circle":
        n = f.values.size
        c = np.fft.fft(f.values) / n
        modes = np.fft.fftfreq(n, 1.0 / n)
        return math.sqrt(2 * np.pi * float(np.sum((1 + modes**2) ** t * np.abs(c) ** 2)))
    alpha, beta = f.jacobi
    x = np.cos(2 * f.nodes) if f.kind == "block" else f.nodes
    n = x.size
    P = np.stack([special.eval_jacobi(j, alpha, beta, x) for j in range(n)])
    h = P**2 @ f.weights
    coef = (P @ (f.weights * f.values)) / h
    deg = np.arange(n)
    if f.kind == "block":
        lam = 2 * deg * (2 * deg + f.d - 2)
    else:
        lam = deg * (deg + f.d - 2)
    return math.sqrt(float(np.sum((1 + lam) ** t * h * np.abs(coef) ** 2)))

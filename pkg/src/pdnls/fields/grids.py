"""Spectral grids and physical quadratures for the four symmetry reductions.

Every grid stores the Fourier-side nodes, the Fourier-side measure (so that
``sum(measure * f)`` approximates ``int f(xi) d xi``), a physical-side
quadrature, and the synthesis/analysis pair

    ``u = synthesize(F)``,   ``F = analyze(u)``

with ``analyze = M^{-1} synthesize^* M_phys``.  This makes
``<analyze(N), F>_M = <N, synthesize(F)>_{M_phys}`` hold exactly in floating
point arithmetic, which the fixed-point solver and the Euler--Lagrange check
rely on.

The Fourier transform is unitary, ``u(x) = (2 pi)^{-d/2} int F(xi) e^{i x xi} d xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sfft

from ..bessel import lambda_kernel, sphere_area
from ..errors import ParameterError

SYMMETRIES = ("radial", "block_radial", "full", "axial")


@dataclass(frozen=True)
class PhysConfig:
    """Physical-side truncation and quadrature.

    ``x_max=None`` selects ``max(x_min, x_factor * eps**(-1/gamma))`` so the
    box scales with the inverse shell width.  Radial directions use Gauss
    panels; the periodic directions of the full and axial grids use spacing
    ``h`` on a box of side ``max(box_min, box_factor * eps**(-1/gamma))``.
    """

    x_max: float | None = None
    x_min: float = 400.0
    x_factor: float = 6.0
    panel_width: float = 2.0
    nodes_per_panel: int = 6
    h: float = 1.0
    box_min: float = 256.0
    box_factor: float = 20.0
    box_side: float | None = None

    def radial_extent(self, eps: float, gamma: float, resolution: float = 1.0) -> float:
        if self.x_max is not None:
            return float(self.x_max)
        return max(self.x_min, self.x_factor * eps ** (-1 / gamma)) * resolution

    def periodic_size(self, eps: float, gamma: float, resolution: float = 1.0) -> tuple[int, float]:
        h = self.h / resolution if resolution < 1 else self.h
        side = self.box_side or max(self.box_min, self.box_factor * eps ** (-1 / gamma)) * resolution
        n = sfft.next_fast_len(int(math.ceil(side / h)), real=True)
        if n % 2:
            n += 1
        return n, h

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class GridConfig:
    """Fourier-side resolution controls shared by the reduced grids.

    ``resolution`` scales every node density (values below 1 coarsen) and is
    used to derive discretisation uncertainties.  ``outer_panel`` is the panel
    width beyond ``|xi| = 3/2``; ``None`` reuses the band spacing, which keeps
    pointwise synthesis of off-shell content accurate at large ``|x|`` at the
    cost of a much larger grid.
    """

    r_max: float = 4.0
    outer_panel: float | None = 0.25
    ratio: float = 1.6
    nodes_per_panel: int = 6
    band_kappa: float = 7.2
    resolution: float = 1.0
    allow_full_3d: bool = False

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def gauss_panels(breaks, q: int):
    """Composite ``q``-point Gauss--Legendre rule on consecutive breakpoints."""
    x0, w0 = np.polynomial.legendre.leggauss(q)
    breaks = np.asarray(breaks, float)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x0
    weights = 0.5 * (b - a) * w0
    return nodes.ravel(), weights.ravel()


def _merge(breaks, tol):
    breaks = np.unique(np.asarray(breaks, float))
    keep = [breaks[0]]
    for b in breaks[1:]:
        if b - keep[-1] > tol:
            keep.append(b)
    if breaks[-1] - keep[-1] > 0:
        keep[-1] = breaks[-1]
    return np.array(keep)


def shell_offsets(eps: float, gamma: float, ratio: float, stop: float) -> np.ndarray:
    """Offsets ``|r-1|`` graded geometrically from ``eps^{1/gamma}/8`` to ``stop``."""
    width = eps ** (1 / gamma)
    s = [0.0, width / 8]
    while s[-1] < stop:
        s.append(min(s[-1] * ratio, stop))
    return np.unique(np.concatenate([s, [width]]))


def band_nodes(eps, gamma, cfg: GridConfig, extent: float):
    """1D modulus nodes: geometric grading at ``1`` plus a uniform band on ``[0, 3/2]``.

    The band's panel width is ``band_kappa / extent`` so that kernels
    ``Lambda(r x)`` stay resolved for every physical node ``x <= extent``.
    In the block-radial plane this spacing is also what the unit circle needs,
    since it crosses the tensor cells obliquely along the whole arc.  Beyond
    ``3/2`` the panels are coarse by default; content there is damped by the symbol's growth.
    """
    res = cfg.resolution
    width = eps ** (1 / gamma)
    s = shell_offsets(eps, gamma, cfg.ratio ** (1 / res), 0.45)
    pw = cfg.band_kappa / (extent * res)
    outer = pw if cfg.outer_panel is None else cfg.outer_panel / res
    breaks = np.concatenate([
        1 - s, 1 + s,
        np.arange(0.0, 1.5, pw),
        np.arange(1.5, cfg.r_max, outer), [cfg.r_max],
    ])
    breaks = _merge(breaks, 1e-6 * width)
    return gauss_panels(breaks, cfg.nodes_per_panel)


def phys_nodes(extent, phys: PhysConfig, resolution=1.0):
    width = phys.panel_width / max(resolution, 1.0)
    n_pan = int(math.ceil(extent / width))
    return gauss_panels(np.linspace(0.0, n_pan * width, n_pan + 1), phys.nodes_per_panel)


class SpectralGrid:
    """Base class; subclasses fill the node/measure arrays and transforms."""

    symmetry: str
    d: int
    k: int | None
    is_complex: bool

    def __init__(self, d, k, eps, gamma, cfg: GridConfig, phys: PhysConfig):
        self.d, self.k = int(d), (None if k is None else int(k))
        self.eps_target, self.gamma = float(eps), float(gamma)
        self.cfg, self.phys = cfg, phys

    # subclasses set: shape, radius, measure, phys_measure, phys_radius
    def descriptor(self) -> dict:
        return {
            "symmetry": self.symmetry, "d": self.d, "k": self.k,
            "eps_target": self.eps_target, "gamma": self.gamma,
            "grid_config": self.cfg.to_dict(), "phys_config": self.phys.to_dict(),
        }

    def with_phys(self, phys: PhysConfig) -> "SpectralGrid":
        return build_grid(self.symmetry, self.d, self.k, self.eps_target, self.gamma, self.cfg, phys)

    def inner(self, F, G) -> float:
        return float(np.real(np.sum(self.measure * np.conj(F) * G)))

    def phys_integral(self, f) -> float:
        return float(np.sum(self.phys_measure * f))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def node_table(self) -> dict:
        raise NotImplementedError


class RadialGrid(SpectralGrid):
    symmetry = "radial"
    is_complex = False

    def __init__(self, d, k, eps, gamma, cfg, phys):
        super().__init__(d, None, eps, gamma, cfg, phys)
        extent = phys.radial_extent(eps, gamma, cfg.resolution)
        self.r, self.wr = band_nodes(eps, gamma, cfg, extent)
        self.shape = self.r.shape
        self.radius = self.r
        self.sphere = sphere_area(self.d)
        self.measure = self.sphere * self.wr * self.r ** (self.d - 1)
        self.x, self.wx = phys_nodes(extent, phys, cfg.resolution)
        self.phys_radius = self.x
        self.phys_measure = self.sphere * self.wx * self.x ** (self.d - 1)
        self._K = None

    @property
    def kernel(self):
        if self._K is None:
            self._K = lambda_kernel((self.d - 2) / 2, np.outer(self.x, self.r))
        return self._K

    def synthesize(self, F):
        return self.kernel @ (self.wr * self.r ** (self.d - 1) * F)

    def analyze(self, u):
        return (self.wx * self.x ** (self.d - 1) * u) @ self.kernel

    def node_table(self):
        return {"r": self.r}


class BlockGrid(SpectralGrid):
    symmetry = "block_radial"
    is_complex = False

    def __init__(self, d, k, eps, gamma, cfg, phys):
        if k is None or not (1 <= k <= d - 1):
            raise ParameterError(f"block_radial requires 1 <= k <= d-1, got k={k}")
        super().__init__(d, k, eps, gamma, cfg, phys)
        self.n1, self.n2 = d - k, k
        extent = phys.radial_extent(eps, gamma, cfg.resolution)
        self.a, self.wa = band_nodes(eps, gamma, cfg, extent)
        self.b, self.wb = self.a.copy(), self.wa.copy()
        self.shape = (self.a.size, self.b.size)
        A, B = np.meshgrid(self.a, self.b, indexing="ij")
        self.A, self.B = A, B
        self.radius = np.hypot(A, B)
        self.sphere = sphere_area(self.n1) * sphere_area(self.n2)
        self.ma = self.wa * self.a ** (self.n1 - 1)
        self.mb = self.wb * self.b ** (self.n2 - 1)
        self.measure = self.sphere * np.outer(self.ma, self.mb)
        x, wx = phys_nodes(extent, phys, cfg.resolution)
        self.y, self.wy, self.z, self.wz = x, wx, x.copy(), wx.copy()
        self.phys_measure = self.sphere * np.outer(self.wy * self.y ** (self.n1 - 1), self.wz * self.z ** (self.n2 - 1))
        self.phys_radius = np.maximum.outer(self.y, self.z)
        self._K = None

    @property
    def kernels(self):
        if self._K is None:
            self._K = (lambda_kernel((self.n1 - 2) / 2, np.outer(self.y, self.a)),
                       lambda_kernel((self.n2 - 2) / 2, np.outer(self.z, self.b)))
        return self._K

    def synthesize(self, F):
        Ky, Kz = self.kernels
        return Ky @ (self.ma[:, None] * F * self.mb[None, :]) @ Kz.T

    def analyze(self, u):
        Ky, Kz = self.kernels
        wy = self.wy * self.y ** (self.n1 - 1)
        wz = self.wz * self.z ** (self.n2 - 1)
        return Ky.T @ (wy[:, None] * u * wz[None, :]) @ Kz

    def node_table(self):
        return {"a": self.A.ravel(), "b": self.B.ravel()}


class FullGrid(SpectralGrid):
    """Periodic box with ``rfftn`` half-spectrum storage (last axis halved)."""

    symmetry = "full"
    is_complex = True

    def __init__(self, d, k, eps, gamma, cfg, phys):
        if d == 3 and not cfg.allow_full_3d:
            raise ParameterError("full grids in d = 3 need GridConfig(allow_full_3d=True)")
        if d not in (2, 3):
            raise ParameterError("full grids support d in {2, 3}")
        super().__init__(d, None, eps, gamma, cfg, phys)
        n, h = phys.periodic_size(eps, gamma, cfg.resolution)
        if d == 3:
            n = min(n, 128)
        self.n, self.h = n, h
        self.side = n * h
        self.dk = 2 * np.pi / self.side
        freqs = [np.fft.fftfreq(n, d=h) * 2 * np.pi] * (d - 1) + [np.fft.rfftfreq(n, d=h) * 2 * np.pi]
        self.freqs = freqs
        mesh = np.meshgrid(*freqs, indexing="ij", sparse=True)
        self.shape = tuple(len(f) for f in freqs)
        self.radius = np.sqrt(sum(m**2 for m in mesh))
        mult = np.full(self.shape[-1], 2.0)
        mult[0] = 1.0
        mult[-1] = 1.0  # Nyquist column (n even)
        self.mult = mult
        self.measure = np.broadcast_to(mult * self.dk**d, self.shape)
        self.phys_measure = np.full((n,) * d, h**d)
        xs = (np.arange(n) * h + 0.5 * self.side) % self.side - 0.5 * self.side
        pm = np.meshgrid(*([xs] * d), indexing="ij", sparse=True)
        self.phys_radius = np.sqrt(sum(m**2 for m in pm))
        self._c_syn = (2 * np.pi) ** (-d / 2) * self.dk**d * n**d
        self._c_ana = (2 * np.pi) ** (-d / 2) * h**d

    def synthesize(self, F):
        return sfft.irfftn(F, s=(self.n,) * self.d, workers=-1) * self._c_syn

    def analyze(self, u):
        return sfft.rfftn(np.real(u), workers=-1) * self._c_ana

    def component_mesh(self):
        return np.meshgrid(*self.freqs, indexing="ij")

    def node_table(self):
        mesh = self.component_mesh()
        return {f"xi{i + 1}": m.ravel() for i, m in enumerate(mesh)}

    def hermitian_project(self, F):
        """Project onto half-spectra of real functions."""
        return self.analyze(self.synthesize(F))

    def full_spectrum(self, F):
        """Rebuild the full (unhalved) spectrum, fft-ordered."""
        n = self.n
        full = np.empty((n,) * self.d, dtype=complex)
        m = self.shape[-1]
        full[..., :m] = F
        idx = [(-np.arange(n)) % n] * (self.d - 1)
        tail = np.arange(m, n)
        src = (-tail) % n
        conj = np.conj(F[np.ix_(*idx, src)]) if self.d > 1 else np.conj(F[src])
        full[..., m:] = conj
        return full


class AxialGrid(SpectralGrid):
    """``O(d-1) x {1}`` symmetry without evenness in the last coordinate.

    Hankel transform of order ``(d-3)/2`` in ``|xi'|`` tensored with a periodic
    Fourier series in ``xi_d``.
    """

    symmetry = "axial"
    is_complex = True

    def __init__(self, d, k, eps, gamma, cfg, phys):
        super().__init__(d, None, eps, gamma, cfg, phys)
        self.n1 = d - 1
        extent = phys.radial_extent(eps, gamma, cfg.resolution)
        self.rho, self.wrho = band_nodes(eps, gamma, cfg, extent)
        n, h = phys.periodic_size(eps, gamma, cfg.resolution)
        self.n, self.h = n, h
        self.side = n * h
        self.dk = 2 * np.pi / self.side
        self.xi_d = np.fft.fftfreq(n, d=h) * 2 * np.pi
        self.shape = (self.rho.size, n)
        self.radius = np.hypot(self.rho[:, None], self.xi_d[None, :])
        self.sphere = sphere_area(self.n1)
        self.mr = self.wrho * self.rho ** (self.n1 - 1)
        self.measure = self.sphere * np.outer(self.mr, np.full(n, self.dk))
        self.x, self.wx = phys_nodes(extent, phys, cfg.resolution)
        self.wxm = self.wx * self.x ** (self.n1 - 1)
        self.phys_measure = self.sphere * np.outer(self.wxm, np.full(n, h))
        xd = (np.arange(n) * h + 0.5 * self.side) % self.side - 0.5 * self.side
        self.phys_radius = np.maximum.outer(self.x, np.abs(xd))
        self._K = None
        self._c_syn = (2 * np.pi) ** -0.5 * self.dk * n
        self._c_ana = (2 * np.pi) ** -0.5 * h

    @property
    def kernel(self):
        if self._K is None:
            self._K = lambda_kernel((self.n1 - 2) / 2, np.outer(self.x, self.rho))
        return self._K

    def synthesize(self, F):
        G = sfft.ifft(F, axis=1, workers=-1) * self._c_syn
        return self.kernel @ (self.mr[:, None] * G)

    def analyze(self, u):
        G = sfft.fft(u, axis=1, workers=-1) * self._c_ana
        return self.kernel.T @ (self.wxm[:, None] * G)

    def node_table(self):
        R, X = np.meshgrid(self.rho, self.xi_d, indexing="ij")
        return {"rho": R.ravel(), "xi_d": X.ravel()}


_GRIDS = {"radial": RadialGrid, "block_radial": BlockGrid, "full": FullGrid, "axial": AxialGrid}


def build_grid(symmetry: str, d: int, k: int | None, eps: float, gamma: float = 2.0,
               cfg: GridConfig | None = None, phys: PhysConfig | None = None) -> SpectralGrid:
    """Construct the grid for ``symmetry`` resolving the shell at ``eps``."""
    if symmetry not in _GRIDS:
        raise ParameterError(f"unknown symmetry {symmetry!r}; expected one of {SYMMETRIES}")
    if not 0 < eps < 1:
        raise ParameterError("0 < eps < 1 required")
    return _GRIDS[symmetry](d, k, eps, gamma, cfg or GridConfig(), phys or PhysConfig())


def grid_from_descriptor(desc: dict) -> SpectralGrid:
    cfg = GridConfig(**desc["grid_config"])
    phys = PhysConfig(**desc["phys_config"])
    return build_grid(desc["symmetry"], desc["d"], desc.get("k"), desc["eps_target"], desc["gamma"], cfg, phys)


def coarsen(grid: SpectralGrid, resolution: float) -> SpectralGrid:
    cfg = replace(grid.cfg, resolution=grid.cfg.resolution * resolution)
    return build_grid(grid.symmetry, grid.d, grid.k, grid.eps_target, grid.gamma, cfg, grid.phys)

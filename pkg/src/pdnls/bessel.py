"""Bessel kernels, sphere and cap extensions, and Knapp lower-bound sets.

Conventions
-----------
For ``n >= 1`` and ``nu = (n - 2) / 2`` we write ``Lambda_nu(t) = t**-nu * J_nu(t)``,
extended continuously to ``t = 0``.  The Fourier transform of surface measure on
``S^{n-1}`` is then ``(2 pi)**(n/2) * Lambda_nu(|xi|)``, which at the origin equals
``|S^{n-1}|`` (with ``|S^0| = 2``).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np
from scipy import integrate, optimize, special

from .errors import ParameterError, QuadratureError

KNAPP_CALIBRATION_POINT = (0.05, 0.1)  # (m, delta)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere ``S^{n-1}`` in ``R^n``."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def bessel_j(nu: float, z):
    """Bessel function of the first kind ``J_nu(z)`` for real ``z >= 0``."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ParameterError("z >= 0 required")
    if nu < -0.5:
        raise ParameterError(f"order nu >= -1/2 required, got {nu}")
    return special.jv(nu, z)


def lambda_kernel(nu: float, t):
    """``t**-nu J_nu(t)`` with its limit ``1 / (2**nu Gamma(nu + 1))`` at ``t = 0``."""
    t = np.abs(np.asarray(t, dtype=float))
    if nu == -0.5:
        return math.sqrt(2 / math.pi) * np.cos(t)
    if nu == 0.5:
        return math.sqrt(2 / math.pi) * np.sinc(t / math.pi)
    out = np.empty_like(t)
    small = t < 1e-6
    t_s = t[small]
    c0 = 1.0 / (2.0**nu * math.gamma(nu + 1))
    out[small] = c0 * (1 - t_s**2 / (4 * (nu + 1)))
    big = t[~small]
    out[~small] = special.jv(nu, big) * big ** (-nu)
    return out


def bessel_local_maxima(nu: float, n: int) -> np.ndarray:
    """First ``n`` local maxima of ``J_nu`` on ``(0, inf)``.

    A maximum at the origin (``nu = 0``) is not counted.  For ``nu = -1/2`` the
    points ``2 pi j`` are returned, which is the replacement used for the
    exceptional blocks ``k in {1, d-1}``.
    """
    if n < 1:
        raise ParameterError("n >= 1 required")
    if nu == -0.5:
        return 2 * np.pi * np.arange(1, n + 1)

    def dj(z):
        return special.jvp(nu, z)

    # maxima sit near 2 pi j + O(1); scan a generous window with a fine step
    z_hi = 2 * np.pi * (n + 2) + 2 * abs(nu) + 10
    zs = np.arange(1e-8, z_hi, 0.05)
    vals = dj(zs)
    idx = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    out = []
    for i in idx:
        root = optimize.brentq(dj, zs[i], zs[i + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps)
        if special.jv(nu, root) > 0:
            out.append(root)
        if len(out) == n:
            break
    if len(out) < n:
        raise RuntimeError(f"found only {len(out)} maxima of J_{nu}")
    return np.array(out)


def sphere_extension_kernel(d: int, xi_abs):
    """Fourier transform of surface measure on ``S^{d-1}`` at radius ``|xi|``."""
    if d < 2:
        raise ParameterError("d >= 2 required")
    return (2 * np.pi) ** (d / 2) * lambda_kernel((d - 2) / 2, xi_abs)


def _cap_weight(d: int, k: int, rho):
    return rho ** (d - k - 1) * (1 - rho**2) ** ((k - 2) / 2)


def cap_measure(d: int, k: int, delta: float) -> float:
    """Surface measure of ``{(eta, zeta) in S^{d-1}: |eta| < delta}``."""
    if not (1 <= k <= d - 1):
        raise ParameterError(f"1 <= k <= d-1 required, got k={k}")
    val, _ = integrate.quad(lambda x: _cap_weight(d, k, x), 0.0, delta, epsabs=0, epsrel=1e-13)
    return sphere_area(d - k) * sphere_area(k) * val


def cap_extension(d: int, k: int, delta: float, r: float, y_abs: float, z_abs: float,
                  rtol: float = 1e-10) -> float:
    """Extension of the cap measure, evaluated at ``r x`` with ``x = (y, z)``.

    Adaptive quadrature in the cap parameter ``rho = |eta|``.
    """
    if not 0 < delta < 0.5:
        raise ParameterError("0 < delta < 1/2 required")
    if abs(r - 1) > 0.5:
        raise ParameterError("|r - 1| <= 1/2 required")
    nu1, nu2 = (d - k - 2) / 2, (k - 2) / 2

    def f(rho):
        return (_cap_weight(d, k, rho)
                * lambda_kernel(nu1, r * rho * y_abs)
                * lambda_kernel(nu2, r * math.sqrt(1 - rho * rho) * z_abs))

    val, err = integrate.quad(f, 0.0, delta, epsabs=0.0, epsrel=rtol, limit=200)
    scale = integrate.quad(lambda x: abs(f(x)), 0.0, delta, epsrel=1e-6)[0]
    if err > max(1e-8 * abs(val), 1e-12 * scale):
        raise QuadratureError(f"cap extension quadrature error {err:.2e}")
    return float((2 * np.pi) ** (d / 2) * val)


def cap_extension_grid(d: int, k: int, delta: float, r, y_abs, z_abs, n_nodes: int = 64):
    """Vectorised cap extension by fixed Gauss--Legendre quadrature in ``rho``.

    Broadcasts ``r``, ``y_abs`` and ``z_abs``.  Suitable when ``r |x| delta``
    stays moderate; see :func:`cap_extension` for the adaptive version.
    """
    nu1, nu2 = (d - k - 2) / 2, (k - 2) / 2
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    rho = 0.5 * delta * (x + 1)
    w = 0.5 * delta * w * _cap_weight(d, k, rho)
    r, y_abs, z_abs = np.broadcast_arrays(*(np.asarray(v, float) for v in (r, y_abs, z_abs)))
    ry = (r * y_abs)[..., None] * rho
    rz = (r * z_abs)[..., None] * np.sqrt(1 - rho**2)
    vals = lambda_kernel(nu1, ry) * lambda_kernel(nu2, rz)
    return (2 * np.pi) ** (d / 2) * (vals @ w)


# --------------------------------------------------------------------------- Knapp sets


@dataclass(frozen=True)
class KnappConstants:
    d: int
    k: int
    c_small: float
    alpha: float
    beta: float
    c0: float
    c1: float
    c2: float
    box: tuple[float, float]
    provenance: str

    def to_dict(self) -> dict:
        out = asdict(self)
        out["box"] = list(self.box)
        return out


@dataclass(frozen=True)
class KnappSet:
    """``{(y, z): |y| <= y_max, z_min <= |z| <= z_max}`` in ``R^{d-k} x R^k``."""

    j: int
    d: int
    k: int
    y_max: float
    z_min: float
    z_max: float
    measure: float
    measure_lower_bound: float

    def contains(self, y_abs, z_abs):
        y_abs, z_abs = np.asarray(y_abs), np.asarray(z_abs)
        return (y_abs <= self.y_max) & (z_abs >= self.z_min) & (z_abs <= self.z_max)

    def sample(self, n: int = 10):
        """An ``n x n`` tensor sample of block moduli covering the set."""
        y = np.linspace(0.0, self.y_max, n)
        z = np.linspace(self.z_min, self.z_max, n)
        return np.meshgrid(y, z, indexing="ij")


def default_c_small(k: int, n_max: int = 60) -> float:
    """0.9 times a quarter of the smallest gap between maxima of ``J_{(k-2)/2}``."""
    z = bessel_local_maxima((k - 2) / 2, n_max)
    gaps = np.diff(z) if z.size > 1 else np.array([2 * np.pi])
    return 0.9 * 0.25 * float(gaps.min())


def _window(k, z_j, c, m, delta):
    lo = (z_j - c) / (math.sqrt(1 - delta**2) * (1 - m))
    hi = (z_j + c) / (1 + m)
    return lo, hi


def knapp_alpha(k: int, c: float, n_j: int = 2000) -> float:
    z = bessel_local_maxima((k - 2) / 2, n_j)
    j = np.arange(1, n_j + 1)
    return float(np.min(j * (1 - ((z - c) / (z + c)) ** k)))


def knapp_beta(k: int, box=KNAPP_CALIBRATION_POINT, n: int = 201) -> float:
    """Sup of ``[((1+m)/(sqrt(1-delta^2)(1-m)))^k - 1] / (delta^2 + m)`` over the box."""
    m_max, d_max = box
    m = np.linspace(m_max / n, m_max, n)[:, None]
    dl = np.linspace(0.0, d_max, n)[None, :]
    val = (((1 + m) / (np.sqrt(1 - dl**2) * (1 - m))) ** k - 1) / (dl**2 + m)
    limit = 2.0 * k + 0.0  # value as (m, delta) -> 0
    return float(max(val.max(), limit))


def _analytic_c1(d, k, c, alpha, box, n_j=2000):
    z = bessel_local_maxima((k - 2) / 2, n_j)
    j = np.arange(1, n_j + 1)
    inf_ratio = min(float(np.min(((z + c) / j) ** k)), (2 * np.pi) ** k)
    return ball_volume(d - k) * ball_volume(k) * c ** (d - k) * (1 + box[0]) ** (-d) * 0.5 * alpha * inf_ratio


def _set_measure(d, k, y_max, z_min, z_max):
    return ball_volume(d - k) * y_max ** (d - k) * ball_volume(k) * (z_max**k - z_min**k)


def _build_sets(d, k, m, delta, consts: KnappConstants, count: int):
    z = bessel_local_maxima((k - 2) / 2, max(count, 1))
    c = consts.c_small
    out = []
    for j in range(1, count + 1):
        lo, hi = _window(k, z[j - 1], c, m, delta)
        if lo >= hi:
            raise ParameterError(f"Knapp set E_{j} is empty at (m, delta)=({m}, {delta})")
        y_max = c / (delta * (1 + m))
        out.append(KnappSet(
            j=j, d=d, k=k, y_max=y_max, z_min=lo, z_max=hi,
            measure=_set_measure(d, k, y_max, lo, hi),
            measure_lower_bound=consts.c1 * delta ** (k - d) * j ** (k - 1),
        ))
    return out


def calibrate_knapp_constants(d: int, k: int, c_small: float | None = None,
                              point=KNAPP_CALIBRATION_POINT, n_j: int = 20,
                              samples: int = 10, safety: float = 0.9) -> KnappConstants:
    """Calibrate ``(c0, c1, c2)`` for the pair ``(d, k)``.

    ``c0 = alpha / (2 beta)`` follows the construction of the sets, with ``beta``
    taken over the box ``(0, m] x (0, delta]`` spanned by the calibration point.
    ``c1`` is the explicit volume bound implied by the same construction.
    ``c2`` is ``safety`` times the smallest normalised cap extension over
    ``samples x samples`` points of every nonempty ``E_j`` (``j <= n_j``) and
    over ``r in {1-m, 1, 1+m}``.
    """
    if not (1 <= k <= d - 1):
        raise ParameterError(f"1 <= k <= d-1 required, got k={k}")
    m, delta = point
    c = default_c_small(k) if c_small is None else float(c_small)
    alpha = knapp_alpha(k, c)
    beta = knapp_beta(k, box=point)
    c0 = alpha / (2 * beta)
    c1 = _analytic_c1(d, k, c, alpha, point)
    z = bessel_local_maxima((k - 2) / 2, n_j)
    worst = math.inf
    for j in range(1, n_j + 1):
        lo, hi = _window(k, z[j - 1], c, m, delta)
        if lo >= hi:
            break
        y = np.linspace(0.0, c / (delta * (1 + m)), samples)
        zz = np.linspace(lo, hi, samples)
        Y, Z = np.meshgrid(y, zz, indexing="ij")
        for r in (1 - m, 1.0, 1 + m):
            ext = cap_extension_grid(d, k, delta, r, Y, Z)
            worst = min(worst, float(ext.min()) / (delta ** (d - k) * j ** ((1 - k) / 2)))
    if not worst > 0:
        raise ParameterError(f"cap extension not positive on the Knapp sets for d={d}, k={k}")
    return KnappConstants(
        d=d, k=k, c_small=c, alpha=alpha, beta=beta, c0=c0, c1=c1, c2=safety * worst,
        box=(m, delta),
        provenance=(f"alpha over j<=2000, beta over (0,{m}]x(0,{delta}], c1 from the set volumes, "
                    f"c2 = {safety} x min sampled extension ({samples}x{samples} per set, j<={n_j})"),
    )


def load_knapp_constants(d: int, k: int) -> KnappConstants:
    """Shipped constants for ``(d, k)``; calibrates on the fly when absent."""
    try:
        text = resources.files("pdnls").joinpath("data/knapp_constants.json").read_text()
        table = json.loads(text)["constants"]
    except (FileNotFoundError, KeyError):
        table = {}
    row = table.get(f"{d},{k}")
    if row is None:
        return calibrate_knapp_constants(d, k)
    row = dict(row)
    row["box"] = tuple(row["box"])
    return KnappConstants(**row)


def knapp_count(consts: KnappConstants, m: float, delta: float) -> int:
    return int(math.floor(consts.c0 / (delta**2 + m)))


def knapp_lower_sets(d: int, k: int, m: float, delta: float, c_small: float | None = None,
                     constants: KnappConstants | None = None, count: int | None = None):
    """Disjoint sets ``E_j`` on which the cap extension is bounded below.

    Parameters
    ----------
    m, delta : float
        Shell half-width and cap radius, both in ``(0, 1/2)``.
    c_small : float, optional
        Width parameter of the ``|z|`` windows; defaults to the calibrated value.
    count : int, optional
        Override the number of sets (default ``floor(c0 / (delta^2 + m))``).
        Requesting sets past the nonempty range raises ``ParameterError``.
    """
    if not (0 < m < 0.5 and 0 < delta < 0.5):
        raise ParameterError("(m, delta) in (0, 1/2)^2 required")
    consts = constants or load_knapp_constants(d, k)
    if c_small is not None and c_small != consts.c_small:
        consts = calibrate_knapp_constants(d, k, c_small=c_small)
    if consts.c_small >= 0.25 * (2 * np.pi if k == 1 else float(np.diff(bessel_local_maxima((k - 2) / 2, 60)).min())):
        raise ParameterError("c_small must be below a quarter of the minimal gap between maxima")
    n = knapp_count(consts, m, delta) if count is None else int(count)
    return _build_sets(d, k, m, delta, consts, n)

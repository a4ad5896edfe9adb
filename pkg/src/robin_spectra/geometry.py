"""Closed planar boundaries: arc length, curvature, flux constant, Agmon distance.

A boundary is sampled on a uniform grid of some closed parameter, represented
by its trigonometric interpolant, and resampled uniformly in arc length with the
origin placed at the curvature maximum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

# Tolerances shared by the invariants below.
TURNING_TOL = 1e-8
REFINEMENT_TOL = 1e-6
MAX_TIE_TOL = 1e-9
DEGENERATE_KPP_TOL = 1e-6
RADICAND_TOL = 1e-12

__all__ = [
    "BoundaryCurve",
    "CurvatureProfile",
    "DomainMetrics",
    "GeometryError",
    "MaxInfo",
    "agmon_distance",
    "arc_length_reparametrize",
    "curvature_max",
    "load_curve_csv",
    "preset",
    "profile_from_function",
]


class GeometryError(ValueError):
    """Invalid or degenerate boundary data."""


# ---------------------------------------------------------------------------
# trigonometric interpolation helpers


def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def trig_coefficients(samples: np.ndarray) -> np.ndarray:
    """Coefficients c_k of the interpolant sum_k c_k exp(i k t), t in [0, 2pi)."""
    n = len(samples)
    c = np.fft.fft(samples) / n
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so the interpolant stays real
        c = c.copy()
        c[n // 2] *= 0.5
        c = np.insert(c, n // 2 + 1, c[n // 2])
    return c


def _coefficient_modes(nsamp: int) -> np.ndarray:
    k = _wavenumbers(nsamp)
    if nsamp % 2 == 0:
        k = np.insert(k, nsamp // 2 + 1, nsamp // 2)
        k[nsamp // 2] = -nsamp // 2
    return k


def trig_eval(coef: np.ndarray, modes: np.ndarray, t, deriv: int = 0, chunk: int = 2048):
    """Evaluate d^deriv/dt^deriv of the interpolant at angles ``t`` (2pi-periodic)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c = coef * (1j * modes) ** deriv
    out = np.empty(t.shape, dtype=complex)
    flat_t = t.ravel()
    flat_o = out.ravel()
    for i in range(0, flat_t.size, chunk):
        block = flat_t[i:i + chunk]
        flat_o[i:i + chunk] = np.exp(1j * np.outer(block, modes)) @ c
    return out.real.reshape(t.shape)


def _spectral_derivative(samples: np.ndarray, order: int) -> np.ndarray:
    n = len(samples)
    k = _wavenumbers(n)
    if n % 2 == 0 and order % 2 == 1:
        k = k.copy()
        k[n // 2] = 0.0
    return np.fft.ifft((1j * k) ** order * np.fft.fft(samples)).real


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class BoundaryCurve:
    """A closed C^2 planar curve.

    ``kind`` is one of ``"circle"`` (params ``(R,)``), ``"ellipse"``
    (``(a, b)``), ``"limacon"`` (``(e,)``, polar r = 1 + e cos t) or
    ``"parametric"`` (``points`` holds an (m+1, 2) table whose last row repeats
    the first, sampled uniformly in its parameter).
    """

    kind: str
    params: tuple = ()
    points: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "circle":
            (R,) = self.params
            if not R > 0:
                raise GeometryError("circle radius must be positive")
        elif self.kind == "ellipse":
            a, b = self.params
            if not (a > 0 and b > 0):
                raise GeometryError("ellipse semi-axes must be positive")
        elif self.kind == "limacon":
            (e,) = self.params
            # curvature numerator 1 + 3e cos t + 2e^2 is positive iff e < 1/2
            if not 0 <= e < 0.5:
                raise GeometryError("limacon parameter must lie in [0, 1/2) for convexity")
        elif self.kind == "parametric":
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 9:
                raise GeometryError("parametric curve needs an (m+1, 2) table with m >= 8")
            scale = np.max(np.abs(pts))
            if np.linalg.norm(pts[0] - pts[-1]) > 1e-9 * max(scale, 1.0):
                raise GeometryError("parametric curve is not closed: first and last samples differ")
            object.__setattr__(self, "points", pts)
        else:
            raise GeometryError(f"unknown curve kind {self.kind!r}")

    @property
    def id(self) -> str:
        if self.kind == "parametric":
            return f"parametric[{len(self.points) - 1}]"
        return ":".join([self.kind, *(f"{p:g}" for p in self.params)])

    def sample(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates at ``m`` uniform parameter values in [0, 2pi)."""
        t = 2 * np.pi * np.arange(m) / m
        if self.kind == "circle":
            (R,) = self.params
            return R * np.cos(t), R * np.sin(t)
        if self.kind == "ellipse":
            a, b = self.params
            return a * np.cos(t), b * np.sin(t)
        if self.kind == "limacon":
            (e,) = self.params
            r = 1.0 + e * np.cos(t)
            return r * np.cos(t), r * np.sin(t)
        pts = self.points[:-1]
        n = len(pts)
        if m == n:
            return pts[:, 0].copy(), pts[:, 1].copy()
        modes = _coefficient_modes(n)
        x = trig_eval(trig_coefficients(pts[:, 0]), modes, t)
        y = trig_eval(trig_coefficients(pts[:, 1]), modes, t)
        return x, y

    def natural_resolution(self) -> int:
        """Parameter samples that resolve the curve to machine precision."""
        if self.kind == "parametric":
            return len(self.points) - 1
        m = 256
        while m < 1 << 16:
            x, y = self.sample(m)
            speed = np.hypot(_spectral_derivative(x, 1), _spectral_derivative(y, 1))
            c = np.abs(np.fft.rfft(speed)) / m
            if np.all(c[m // 4:] < 1e-13 * c[0]):
                return m
            m *= 2
        return m


def preset(spec: str) -> BoundaryCurve:
    """Curve from a string id such as ``"circle:1"`` or ``"ellipse:2:1"``."""
    parts = spec.split(":")
    try:
        values = tuple(float(p) for p in parts[1:])
    except ValueError as exc:
        raise GeometryError(f"bad curve id {spec!r}") from exc
    if parts[0] == "circle" and len(values) == 1:
        return BoundaryCurve("circle", values)
    if parts[0] == "ellipse" and len(values) == 2:
        return BoundaryCurve("ellipse", values)
    if parts[0] == "limacon" and len(values) == 1:
        return BoundaryCurve("limacon", values)
    raise GeometryError(f"unknown curve id {spec!r}; expected circle:R, ellipse:a:b or limacon:e")


def load_curve_csv(path) -> BoundaryCurve:
    """Read a parametric curve from a CSV file with columns ``x1,x2``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"x1", "x2"} <= set(rows[0]):
        raise GeometryError(f"{path}: expected CSV header with columns x1,x2")
    pts = np.array([[float(r["x1"]), float(r["x2"])] for r in rows])
    return BoundaryCurve("parametric", points=pts)


def resolve_curve(domain: str) -> BoundaryCurve:
    """Preset id or path to a CSV file."""
    if Path(domain).suffix.lower() == ".csv":
        return load_curve_csv(domain)
    return preset(domain)


# ---------------------------------------------------------------------------
# curvature profiles


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature sampled uniformly in arc length on [-L, L).

    Samples sit at ``s_j = -L + 2 L j / N``; the curvature maximum (when the
    profile comes from :func:`arc_length_reparametrize`) is at index ``N // 2``,
    i.e. ``s = 0``.
    """

    L: float
    kappa: np.ndarray
    provenance: str = "synthetic"

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if k.ndim != 1 or len(k) < 8 or len(k) % 2:
            raise GeometryError("curvature profile needs an even number (>= 8) of samples")
        if not self.L > 0:
            raise GeometryError("half-perimeter must be positive")
        k.setflags(write=False)
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "_coef", trig_coefficients(k))
        object.__setattr__(self, "_modes", _coefficient_modes(len(k)))

    @property
    def n(self) -> int:
        return len(self.kappa)

    @property
    def ds(self) -> float:
        return 2 * self.L / self.n

    @property
    def s(self) -> np.ndarray:
        return -self.L + self.ds * np.arange(self.n)

    def _angle(self, s):
        return np.pi * (np.asarray(s, dtype=float) + self.L) / self.L

    def __call__(self, s, deriv: int = 0):
        """Trigonometric interpolant (or its arc-length derivative) at ``s``."""
        scale = (np.pi / self.L) ** deriv
        out = scale * trig_eval(self._coef, self._modes, self._angle(s), deriv)
        return out if np.ndim(s) else float(out[0])

    def fourier_modes(self, pmax: int, func=None) -> np.ndarray:
        """Coefficients of ``func(kappa)`` in the basis exp(i pi p s / L), p = -pmax..pmax.

        Modes beyond the sample Nyquist limit are zero (band-limited interpolant).
        """
        vals = self.kappa if func is None else func(self.kappa)
        n = self.n
        c = np.fft.fft(vals) / n
        p = np.arange(-pmax, pmax + 1)
        out = np.zeros(len(p), dtype=complex)
        inside = np.abs(p) < n // 2
        out[inside] = c[p[inside] % n]
        edge = np.abs(p) == n // 2
        out[edge] = 0.5 * c[n // 2]
        # samples start at s=-L: shift phase so the basis is anchored at s=0
        return out * np.exp(1j * np.pi * p)

    def total_turning(self) -> float:
        return float(np.sum(self.kappa) * self.ds)

    def rotated(self, shift: int) -> "CurvatureProfile":
        """Same curve with the sample origin moved by ``shift`` grid steps."""
        return CurvatureProfile(self.L, np.roll(self.kappa, -shift), self.provenance)


@dataclass(frozen=True)
class DomainMetrics:
    area: float
    perimeter: float
    beta0: float
    kappa_max: float
    s_star: float
    kappa_pp: float
    assumption_A: bool
    n_maxima: int = 1

    def __post_init__(self):
        if not self.beta0 > 0:
            raise GeometryError("flux constant must be positive")


@dataclass(frozen=True)
class MaxInfo:
    kappa_max: float
    s_star: float
    kappa_pp: float
    assumption_A: bool
    n_maxima: int


def profile_from_function(func, L: float, n: int = 1024, provenance: str = "synthetic") -> CurvatureProfile:
    """Sample a 2L-periodic curvature function on the standard grid."""
    s = -L + 2 * L * np.arange(n) / n
    return CurvatureProfile(L, np.asarray(func(s), dtype=float), provenance)


def curvature_max(profile: CurvatureProfile) -> MaxInfo:
    """Global maximum of the interpolant, its location and curvature there.

    Assumption A (unique, non-degenerate maximum) is reported, not enforced.
    """
    k = profile.kappa
    j = int(np.argmax(k))  # first index wins ties: smallest s in [-L, L)
    s0 = profile.s[j]
    ds = profile.ds
    res = optimize.minimize_scalar(
        lambda x: -profile(x), bounds=(s0 - ds, s0 + ds), method="bounded",
        options={"xatol": 1e-13 * max(profile.L, 1.0)},
    )
    s_star = float(res.x) if -res.fun >= k[j] else float(s0)
    kmax = max(float(-res.fun), float(k[j]))
    s_star = (s_star + profile.L) % (2 * profile.L) - profile.L
    kpp = float(profile(s_star, deriv=2))

    # maxima are separate runs of samples within tolerance of kappa_max;
    # a run that is wide or not alone means the maximum is not unique
    tie = k >= kmax - MAX_TIE_TOL * abs(kmax)
    runs = _count_runs(tie)
    unique = runs == 1 and tie.sum() <= 8
    nondeg = kpp <= -DEGENERATE_KPP_TOL
    return MaxInfo(kmax, s_star, kpp, bool(unique and nondeg), runs)


def _count_runs(mask: np.ndarray) -> int:
    """Number of separate periodic runs of True in ``mask``."""
    if mask.all():
        return 1
    return int((mask & ~np.roll(mask, 1)).sum())


def arc_length_reparametrize(curve: BoundaryCurve, n: int = 1024) -> tuple[CurvatureProfile, DomainMetrics]:
    """Uniform arc-length curvature samples with ``s = 0`` at the curvature maximum."""
    if n < 64:
        raise GeometryError("need at least 64 arc-length samples")
    if n % 2:
        raise GeometryError("arc-length sample count must be even")
    m = curve.natural_resolution()
    x, y = curve.sample(m)
    dx, dy = _spectral_derivative(x, 1), _spectral_derivative(y, 1)
    ddx, ddy = _spectral_derivative(x, 2), _spectral_derivative(y, 2)
    speed = np.hypot(dx, dy)
    if speed.max() == 0 or speed.min() < 1e-12 * speed.max():
        raise GeometryError("degenerate curve: zero-length or stationary parametrization")

    perimeter = 2 * np.pi * speed.mean()
    area = np.pi * np.mean(x * dy - y * dx)
    sign = 1.0
    if area < 0:
        # clockwise input: flip orientation so the interior lies to the left
        sign, area = -1.0, -area
    kappa_t = sign * (dx * ddy - dy * ddx) / speed**3

    modes = _coefficient_modes(m)
    g_coef = trig_coefficients(speed)
    k_coef = trig_coefficients(kappa_t)
    mean_speed = g_coef[0].real
    # periodic part of the arc-length primitive
    with np.errstate(divide="ignore", invalid="ignore"):
        prim = np.where(modes != 0, g_coef / (1j * modes), 0.0)

    def arc(t):
        return mean_speed * t + trig_eval(prim, modes, t)

    arc0 = arc(0.0)[0]
    L = perimeter / 2

    def theta_of(s_target):
        # s measured from theta = 0 in direction of increasing arc length
        tgt = np.asarray(s_target) % perimeter
        if sign < 0:
            tgt = (perimeter - tgt) % perimeter
        tt = 2 * np.pi * np.arange(m + 1) / m
        table = arc(tt) - arc0
        th = np.interp(tgt, table, tt)
        for _ in range(6):
            f = arc(th) - arc0 - tgt
            th = th - f / trig_eval(g_coef, modes, th)
        return th

    def kappa_at(s_target):
        return trig_eval(k_coef, modes, theta_of(s_target))

    # provisional profile anchored at theta = 0, used only to locate the maximum
    s_grid = -L + 2 * L * np.arange(n) / n
    prov = CurvatureProfile(L, kappa_at(s_grid), curve.id)
    info = curvature_max(prov)
    profile = CurvatureProfile(L, kappa_at(s_grid + info.s_star), curve.id)
    final = curvature_max(profile)

    turning = profile.total_turning()
    if abs(turning - 2 * np.pi) > TURNING_TOL * 2 * np.pi:
        raise GeometryError(
            f"total turning {turning:.12g} != 2pi; curve is not simple/closed or under-resolved"
        )
    metrics = DomainMetrics(
        area=float(area),
        perimeter=float(perimeter),
        beta0=float(area / perimeter),
        kappa_max=final.kappa_max,
        s_star=0.0,
        kappa_pp=final.kappa_pp,
        assumption_A=final.assumption_A,
        n_maxima=final.n_maxima,
    )
    return profile, metrics


def agmon_distance(profile: CurvatureProfile, s, kappa_max: float | None = None, refine: int = 8):
    """Distance phi_0(s) = min_k |int_0^{s+2kL} sqrt(kappa_max - kappa)|.

    The integrand is tabulated on grids ``refine`` times finer than the
    profile samples and integrated with composite Simpson outward from s = 0
    in both directions, so even profiles give an even phi_0.
    """
    if kappa_max is None:
        kappa_max = curvature_max(profile).kappa_max
    L = profile.L
    m = refine * profile.n // 2
    right = np.linspace(0.0, L, m + 1)
    rad_r, rad_l = kappa_max - profile(right), kappa_max - profile(-right)
    worst = min(rad_r.min(), rad_l.min())
    if worst < -RADICAND_TOL * max(1.0, abs(kappa_max)):
        raise GeometryError(
            f"kappa_max={kappa_max!r} is below the profile maximum by {-worst:.3e}"
        )
    cum_r = integrate.cumulative_simpson(np.sqrt(np.clip(rad_r, 0.0, None)), x=right, initial=0.0)
    cum_l = integrate.cumulative_simpson(np.sqrt(np.clip(rad_l, 0.0, None)), x=right, initial=0.0)
    total = cum_r[-1] + cum_l[-1]
    s_arr = np.asarray(s, dtype=float)
    u = np.mod(s_arr + L, 2 * L) - L  # representative in [-L, L)
    direct = np.where(u >= 0, np.interp(np.abs(u), right, cum_r), np.interp(np.abs(u), right, cum_l))
    phi = np.minimum(direct, total - direct)
    return phi if np.ndim(s) else float(phi)

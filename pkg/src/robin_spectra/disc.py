"""The unit disc: closed-form effective spectrum and a radial solver for the
full magnetic Robin Laplacian.

With the potential A0 = (-x2, x1)/2 and angular mode e^{i m theta} the 2D
operator -(grad - i b A0)^2 reduces to

    -u'' - u'/r + (m/r - b r/2)^2 u      on (0, 1),   u'(1) + gamma u(1) = 0,

in L^2(r dr). The radial problem is discretized by finite volumes on the
half-cell grid r_i = (i - 1/2) dr, which never touches r = 0.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import EigenResult, HermitianSystem, eigh_tridiagonal

__all__ = [
    "DiscError",
    "DiscFullResult",
    "DiscParams",
    "default_m_range",
    "disc_effective_lambda",
    "magnetic_offset",
    "radial_system",
    "solve_disc_full",
    "solve_disc_radial",
]


class DiscError(ValueError):
    pass


def magnetic_offset(b: float) -> tuple[float, int]:
    """inf over integers m of (m - b/2)^2 and the minimizing m (smaller m on ties)."""
    if b < 0:
        raise DiscError("b must be >= 0")
    m0 = math.floor(b / 2)
    v0, v1 = (m0 - b / 2) ** 2, (m0 + 1 - b / 2) ** 2
    return (v0, m0) if v0 <= v1 else (v1, m0 + 1)


def disc_effective_lambda(h: float, b: float, n: int = 1) -> np.ndarray:
    """The ``n`` lowest values of -1 - h^1/2 - h/2 + h (m - b/2)^2, m in Z."""
    if not 0 < h < 1:
        raise DiscError("h must lie in (0, 1)")
    _, mstar = magnetic_offset(b)
    m = mstar + np.arange(-n - 1, n + 2)
    vals = np.sort(-1 - math.sqrt(h) - h / 2 + h * (m - b / 2) ** 2)
    return vals[:n]


def default_m_range(b: float, margin: int = 10) -> tuple[int, int]:
    """All m with (m - b/2)^2 <= inf + 5, widened by ``margin`` on each side."""
    inf, _ = magnetic_offset(b)
    r = math.sqrt(inf + 5)
    return int(math.floor(b / 2 - r)) - margin, int(math.ceil(b / 2 + r)) + margin


@dataclass(frozen=True)
class DiscParams:
    """Unit-disc problem. Give ``gamma`` (< 0) or ``h`` (gamma = -h^{-1/2})."""

    b: float = 0.0
    gamma: float | None = None
    h: float | None = None
    n_r: int = 1024
    m_range: tuple[int, int] | None = None

    def __post_init__(self):
        if self.gamma is None and self.h is None:
            raise DiscError("give gamma or h")
        if self.gamma is not None:
            if self.gamma > 0:
                raise DiscError("gamma must be <= 0")
            if self.h is not None and abs(self.h * self.gamma**2 - 1) >= 1e-12:
                raise DiscError("h and gamma are inconsistent (h != gamma^-2)")
        elif not 0 < self.h < 1:
            raise DiscError("h must lie in (0, 1)")
        if self.b < 0:
            raise DiscError("b must be >= 0")
        if self.n_r < 256:
            raise DiscError("radial grid needs n_r >= 256")
        lo, hi = self.window
        _, mstar = magnetic_offset(self.b)
        if not lo <= mstar <= hi:
            raise DiscError(f"m_range {self.window} misses the minimizing mode m={mstar}")

    @property
    def g(self) -> float:
        """Robin parameter gamma."""
        return self.gamma if self.gamma is not None else -self.h ** -0.5

    @property
    def hh(self) -> float:
        """Semiclassical parameter gamma^-2 (inf for gamma = 0)."""
        return self.h if self.h is not None else (self.gamma ** -2 if self.gamma else math.inf)

    @property
    def window(self) -> tuple[int, int]:
        return self.m_range if self.m_range is not None else default_m_range(self.b)


def radial_system(gamma: float, b: float, m: int, n_r: int, n_cells: int | None = None,
                  dirichlet: bool = False) -> HermitianSystem:
    """Finite-volume radial operator for angular mode ``m`` (generalized, mass r_i).

    Cells have width 1/n_r; ``n_cells`` (default n_r) of them are used, so the
    outer face sits at n_cells/n_r. The outer condition is Robin
    u' + gamma u = 0 through a ghost cell, or Dirichlet when ``dirichlet``.
    """
    n = n_r if n_cells is None else n_cells
    dr = 1.0 / n_r
    r = (np.arange(1, n + 1) - 0.5) * dr
    rf = np.arange(1, n + 1) * dr  # outer face of each cell
    V = (m / r - b * r / 2) ** 2
    flux_in = np.concatenate([[0.0], rf[:-1]])
    diag = (flux_in + rf) / dr**2 + V * r
    off = -rf[:-1] / dr**2
    if dirichlet:
        # ghost u_g = -u_N puts the zero on the outer face
        diag[-1] += rf[-1] / dr**2
    else:
        # ghost cell across the face: (u_g - u_N)/dr = -gamma (u_g + u_N)/2
        diag[-1] += (rf[-1] * gamma / (1 + gamma * dr / 2) - rf[-1] / dr) / dr
    return HermitianSystem(diag=diag, offdiag=off, mass=r.copy(),
                           meta={"n_r": n_r, "cells": n, "dr": dr, "m": m, "b": b, "gamma": gamma})


def solve_disc_radial(params: DiscParams, m: int, k: int = 1, wall: float | None = None,
                      vectors: bool = False) -> EigenResult:
    """Lowest eigenvalue(s) of the radial operator for mode ``m``.

    With ``wall = delta`` the problem is posed on (0, 1 - delta) with a
    Dirichlet condition at 1 - delta (truncation check); the grid spacing is
    kept at 1/n_r.
    """
    h = params.hh
    limit = params.b / 2 + (10 / math.sqrt(h) if math.isfinite(h) else 0) + 50
    if abs(m) > limit:
        warnings.warn(f"mode m={m} is far outside the relevant window (|m| > {limit:.0f})", stacklevel=2)
    if wall is None:
        sys = radial_system(params.g, params.b, m, params.n_r)
    else:
        if not 0 < wall < 1:
            raise DiscError("wall must lie in (0, 1)")
        cells = int(round((1 - wall) * params.n_r))
        sys = radial_system(params.g, params.b, m, params.n_r, cells, dirichlet=True)
    res = eigh_tridiagonal(sys, k, vectors=True)
    if not vectors:
        res.eigenvectors = None
    return res


@dataclass
class DiscFullResult:
    h: float
    b: float
    mu1: float  # semiclassical normalization h^2 * lambda_1
    lam1: float  # lambda_1 of -(grad - i b A0)^2 with Robin gamma
    m_star: int
    table: dict  # m -> lambda_1(m)
    residual: float  # (mu1 + h + h^{3/2}) / h^2
    target: float  # inf_m (m - b/2)^2 - 1/2
    meta: dict = field(default_factory=dict)


def _threads() -> int:
    import os

    try:
        return max(1, int(os.environ.get("ROBIN_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def _scan(params: DiscParams, n_r: int) -> dict:
    p = DiscParams(params.b, params.gamma, params.h, n_r, params.m_range)
    lo, hi = p.window
    ms = list(range(lo, hi + 1))
    with ThreadPoolExecutor(_threads()) as pool:
        vals = list(pool.map(lambda m: float(solve_disc_radial(p, m).eigenvalues[0]), ms))
    return dict(zip(ms, vals))


def solve_disc_full(params: DiscParams, extrapolate: bool = False) -> DiscFullResult:
    """Ground state energy over all angular modes in the window.

    With ``extrapolate`` each mode is solved on n_r and 2 n_r and Richardson
    combined (second-order scheme).
    """
    table = _scan(params, params.n_r)
    meta = {"n_r": params.n_r, "extrapolated": extrapolate}
    if extrapolate:
        fine = _scan(params, 2 * params.n_r)
        meta["raw_coarse"], meta["raw_fine"] = table, fine
        table = {m: (4 * fine[m] - table[m]) / 3 for m in table}
    ms = sorted(table)
    m_star = min(ms, key=lambda m: (table[m], m))
    if m_star in (ms[0], ms[-1]):
        raise DiscError(f"minimum at window boundary m={m_star}; widen m_range")
    lam1 = table[m_star]
    h = params.hh
    mu1 = h**2 * lam1
    inf, _ = magnetic_offset(params.b)
    residual = (mu1 + h + h**1.5) / h**2
    return DiscFullResult(h, params.b, mu1, lam1, m_star, table, residual, inf - 0.5, meta)

"""Closed-form eigenvalue expansions and residual bookkeeping.

Normalizations: the Robin parameter gamma < 0, the semiclassical parameter
h = gamma^-2 and the harmonic scale hbar = h^{1/4}.  Expansions of the 2D
operator and of the effective operator differ by the factor gamma^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .disc import magnetic_offset
from .effective import dirichlet_fluxfree
from .eigensolve import log_tridiagonal_eigvec
from .geometry import DEGENERATE_KPP_TOL, CurvatureProfile, agmon_distance, curvature_max

__all__ = [
    "AsymptoticsError",
    "ExpansionReport",
    "agmon_weight_check",
    "bump",
    "chain_transform",
    "disc_expansion",
    "effective_expansion",
    "expansion_report",
    "expansion_three_term",
    "expansion_two_term",
    "harmonic_eigenvalue",
    "hermite_functions",
    "hermite_trial_residual",
]


class AsymptoticsError(ValueError):
    pass


def _check_gamma(gamma):
    if not gamma < 0:
        raise AsymptoticsError("gamma must be negative")


def _check_kpp(kappa_pp):
    if not kappa_pp < 0:
        raise AsymptoticsError(
            f"kappa''(0) = {kappa_pp!r} is not negative: no unique non-degenerate curvature maximum"
        )


def expansion_two_term(gamma: float, kappa_max: float) -> float:
    """-gamma^2 + kappa_max gamma."""
    _check_gamma(gamma)
    return -gamma**2 + kappa_max * gamma


def harmonic_eigenvalue(n: int, kappa_pp: float) -> float:
    """n-th level (2n - 1) sqrt(-kappa''/2) of -d^2 + (-kappa''/2) s^2."""
    _check_kpp(kappa_pp)
    if n < 1:
        raise AsymptoticsError("level index starts at 1")
    return (2 * n - 1) * math.sqrt(-kappa_pp / 2)


def expansion_three_term(gamma: float, n: int, kappa_max: float, kappa_pp: float) -> float:
    """-gamma^2 + kappa_max gamma + (2n - 1) sqrt(-kappa''/2) |gamma|^{1/2}."""
    _check_gamma(gamma)
    return expansion_two_term(gamma, kappa_max) + harmonic_eigenvalue(n, kappa_pp) * math.sqrt(-gamma)


def effective_expansion(gamma: float, n: int, kappa_max: float, kappa_pp: float) -> float:
    """-1 + kappa_max / gamma + (2n - 1) sqrt(-kappa''/2) |gamma|^{-3/2}.

    Equals ``expansion_three_term / gamma^2``; in h-form this is
    -1 - kappa_max h^{1/2} + (2n - 1) sqrt(-kappa''/2) h^{3/4}.
    """
    _check_gamma(gamma)
    return -1 + kappa_max / gamma + harmonic_eigenvalue(n, kappa_pp) * (-gamma) ** -1.5


def disc_expansion(b: float, gamma: float | None = None, h: float | None = None) -> dict:
    """Unit-disc ground state expansion in both normalizations.

    ``gamma_form``: -gamma^2 + gamma + inf_m (m - b/2)^2 - 1/2
    ``h_form``:     -h - h^{3/2} + (inf_m (m - b/2)^2 - 1/2) h^2
    """
    if (gamma is None) == (h is None):
        raise AsymptoticsError("give exactly one of gamma, h")
    if gamma is None:
        if not 0 < h < 1:
            raise AsymptoticsError("h must lie in (0, 1)")
        gamma = -h ** -0.5
    _check_gamma(gamma)
    h = gamma ** -2
    inf, m = magnetic_offset(b)
    return {
        "gamma": gamma,
        "h": h,
        "offset": inf,
        "m_star": m,
        "gamma_form": -gamma**2 + gamma + inf - 0.5,
        "h_form": -h - h**1.5 + (inf - 0.5) * h**2,
    }


# stage k of the chain of effective operators, with hbar = h^{1/4}:
#   0: L_eff                       (spectrum ~ -1 - kappa_max h^{1/2} + ...)
#   1: L_eff + 1
#   2: h^{-1/2} (L_eff + 1)        (-hbar^2 (d_s - i b beta0)^2 - kappa - kappa^2 h^{1/2}/2)
#   3: stage 2 without kappa^2 h^{1/2}/2 and kinetic bracket factor
#   4: stage 3 + kappa_max         (flux-free Dirichlet model, spectrum O(hbar))
_STEPS = {
    (0, 1): ("shift", 1.0),
    (1, 2): ("scale", None),
    (2, 3): ("drop", None),
    (3, 4): ("kmax", None),
}


@dataclass
class ChainStep:
    value: float
    stages: tuple[int, int]
    remainder: float  # explicit size of the term dropped along the way (0 for exact steps)
    notes: list = field(default_factory=list)


def chain_transform(lam: float, src: int, dst: int, h: float, alpha: float = 0.5,
                    kappa_max: float = 0.0) -> ChainStep:
    """Map an eigenvalue between stages of the effective-operator chain.

    Exact steps: 0<->1 (shift by 1), 1<->2 (scale by h^{-1/2}), 3<->4 (shift
    by kappa_max). Step 2<->3 drops the kappa^2 term and the bracket factor;
    its value is unchanged but the report carries the remainder
    hbar^2 + hbar^{min(4 alpha, 2)} (in stage-3 units).
    """
    if not (0 <= src <= 4 and 0 <= dst <= 4):
        raise AsymptoticsError(f"unknown stage pair ({src}, {dst})")
    if not 0 < h < 1:
        raise AsymptoticsError("h must lie in (0, 1)")
    hbar = h**0.25
    value, remainder, notes = float(lam), 0.0, []
    step = 1 if dst >= src else -1
    for a in range(src, dst, step):
        b_ = a + step
        key = (min(a, b_), max(a, b_))
        kind, _ = _STEPS[key]
        fwd = b_ > a
        if kind == "shift":
            value = value + 1 if fwd else value - 1
        elif kind == "scale":
            value = value / math.sqrt(h) if fwd else value * math.sqrt(h)
        elif kind == "drop":
            rem = hbar**2 + hbar ** min(4 * alpha, 2)
            remainder += rem
            notes.append(f"stage 2<->3 remainder O(hbar^2 + hbar^min(4a,2)) = {rem:.3e}")
        elif kind == "kmax":
            value = value + kappa_max if fwd else value - kappa_max
    return ChainStep(value, (src, dst), remainder, notes)


# ---------------------------------------------------------------------------
# harmonic trial states


def _smooth_step(t):
    # C-infinity step: 0 for t <= 0, 1 for t >= 1
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
        g = np.where(t < 1, np.exp(-1 / np.where(t < 1, 1 - t, 1)), 0.0)
    return f / (f + g)


def bump(x):
    """Smooth cut-off: 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2)."""
    return _smooth_step(4 * (0.5 - np.abs(np.asarray(x, dtype=float))))


def hermite_functions(nmax: int, x) -> np.ndarray:
    """Normalized Hermite functions psi_0..psi_{nmax-1} at x (rows).

    psi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2), by the stable
    normalized three-term recurrence.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if nmax > 1:
        out[1] = math.sqrt(2) * x * out[0]
    for k in range(2, nmax):
        out[k] = math.sqrt(2 / k) * x * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out


def _dirichlet_grid(profile, n):
    L = profile.L
    ds = 2 * L / (n + 1)
    return -L + ds * np.arange(1, n + 1), ds


def hermite_trial_residual(profile: CurvatureProfile, n: int, hbar: float, grid: int | None = None) -> dict:
    """Residual of the cut-off harmonic state in the flux-free Dirichlet model.

    Phi_n(s) = hbar^{-1/4} chi(s / 2L) f_n(hbar^{-1/2} s) with f_n the n-th
    oscillator eigenfunction of -d^2 + w^2 x^2, w = sqrt(-kappa''/2).
    Returns ||L Phi - (2n-1) hbar w Phi||, the ratio to hbar^{3/2} and ||Phi||.

    Only the maximum at s = 0 enters (Phi is cut off before |s| = L), so it
    must be non-degenerate; further maxima away from s = 0 are allowed.
    """
    info = curvature_max(profile)
    if info.kappa_pp > -DEGENERATE_KPP_TOL:
        raise AsymptoticsError("curvature maximum at s = 0 is degenerate (constant or flat profile)")
    if abs(info.s_star) > 1e-8 * profile.L:
        raise AsymptoticsError("profile must be centred at its curvature maximum (s* = 0)")
    w = math.sqrt(-info.kappa_pp / 2)
    if grid is None:
        from .effective import default_dirichlet_grid

        grid = default_dirichlet_grid(profile, hbar)
    s, ds = _dirichlet_grid(profile, grid)
    x = s / math.sqrt(hbar)
    f = hermite_functions(n, math.sqrt(w) * x)[n - 1] * w**0.25
    phi = hbar**-0.25 * bump(s / (2 * profile.L)) * f
    V = info.kappa_max - profile(s)
    K = hbar**2
    lap = np.empty_like(phi)
    lap[1:-1] = phi[:-2] - 2 * phi[1:-1] + phi[2:]
    lap[0] = -2 * phi[0] + phi[1]
    lap[-1] = phi[-2] - 2 * phi[-1]
    Lphi = -K * lap / ds**2 + V * phi
    ev = (2 * n - 1) * hbar * w
    res = math.sqrt(np.sum(np.abs(Lphi - ev * phi) ** 2) * ds)
    norm = math.sqrt(np.sum(phi**2) * ds)
    return {"n": n, "hbar": hbar, "residual": res, "ratio": res / hbar**1.5, "norm": norm,
            "eigenvalue": ev, "grid": grid}


def agmon_weight_check(profile: CurvatureProfile, hbar: float, epsilon: float = 0.5, n: int = 1,
                       rho: float = 0.2, grid: int | None = None) -> dict:
    """Exponentially weighted norm and tail mass of a Dirichlet-model eigenvector.

    The eigenvector is rebuilt in log magnitude (two-sided recurrence matched at
    s = 0) so that the weight exp(2 eps phi0 / hbar) never overflows.
    """
    if not 0 < epsilon < 1:
        raise AsymptoticsError("epsilon must lie in (0, 1)")
    res = dirichlet_fluxfree(profile, hbar, grid, k=n)
    lam = float(res.eigenvalues[n - 1])
    if lam / hbar > 10:
        raise AsymptoticsError(f"eigenvalue {lam:.4g} is not O(hbar) (ratio {lam / hbar:.3g} > 10)")
    s = res.meta["s"]
    ds = res.meta["ds"]
    K = hbar**2
    diag = 2 * K / ds**2 + res.meta["potential"]
    off = np.full(len(s) - 1, -K / ds**2)
    logv, _ = log_tridiagonal_eigvec(diag, off, lam, match=int(np.argmin(np.abs(s))))
    phi0 = agmon_distance(profile, s, res.meta["kappa_max"])
    expo = 2 * logv + 2 * epsilon * phi0 / hbar
    top = expo.max()
    log_weighted = top + math.log(np.sum(np.exp(expo - top)))
    # sum v^2 = 1 on the grid, so the plain norm is 1
    ratio = math.exp(log_weighted)
    cut = hbar ** (0.5 - rho)
    tail_mask = np.abs(s) >= cut
    if tail_mask.any():
        lt = 2 * logv[tail_mask]
        tmax = lt.max()
        log_tail = tmax + math.log(np.sum(np.exp(lt - tmax)))
    else:
        log_tail = -math.inf
    return {"hbar": hbar, "epsilon": epsilon, "eigenvalue": lam, "ratio": ratio,
            "log_ratio": log_weighted, "tail_cut": cut, "tail_mass": math.exp(log_tail),
            "log_tail_mass": log_tail, "grid": len(s)}


# ---------------------------------------------------------------------------
# reports


@dataclass
class ExpansionReport:
    variable: str
    values: np.ndarray
    computed: np.ndarray
    expansion: np.ndarray
    order: np.ndarray  # expected remainder size per point
    meta: dict = field(default_factory=dict)

    @property
    def residual(self) -> np.ndarray:
        return self.computed - self.expansion

    @property
    def normalized(self) -> np.ndarray:
        return self.residual / self.order

    @property
    def slope(self) -> float:
        """Least-squares log-log slope of |residual| against the sweep variable."""
        x = np.log(np.abs(self.values))
        y = np.log(np.abs(self.residual))
        if len(x) < 4:
            raise AsymptoticsError("slope needs at least 4 sweep points")
        return float(np.polyfit(x, y, 1)[0])


def expansion_report(variable: str, values, computed, expansion, order, **meta) -> ExpansionReport:
    return ExpansionReport(variable, np.asarray(values, float), np.asarray(computed, float),
                           np.asarray(expansion, float), np.asarray(order, float), meta)

"""Periodic effective boundary operators and the flux-free Dirichlet model.

All periodic operators have the shape

    K (-i d/ds - b beta0)^2 + V(s)   on  L^2(R / 2L Z),

with kinetic coefficient ``K`` and potential ``V`` fixed by the variant:

=================  =========================  ==================================
variant            K                          V
=================  =========================  ==================================
gamma_form         gamma^-2                   -1 + kappa / gamma
semiclassical      h                          -1 - kappa h^1/2
full               h                          -1 - kappa h^1/2 - kappa^2 h / 2
bracket (+/-)      h (1 +/- c h^min(a,1/2))   as ``full``
disc_effective     h                          -1 - h^1/2 - h / 2
=================  =========================  ==================================

Two discretizations are provided: a Fourier (plane-wave) Galerkin matrix and
a gauge-covariant finite-difference stencil with link phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .eigensolve import EigenResult, HermitianSystem, eigh_dense, eigh_sparse, eigh_tridiagonal
from .geometry import CurvatureProfile, curvature_max

VARIANTS = ("gamma_form", "semiclassical", "bracket", "full", "disc_effective")

__all__ = [
    "EffectiveError",
    "EffectiveSpec",
    "FourierCutoff",
    "SandwichReport",
    "VARIANTS",
    "assemble_effective",
    "assemble_effective_fd",
    "bracket_sandwich",
    "default_cutoff",
    "dirichlet_fluxfree",
    "flux_period",
    "flux_shift_spectrum_check",
    "solve_effective",
    "solve_effective_fd",
]


class EffectiveError(ValueError):
    pass


@dataclass(frozen=True)
class EffectiveSpec:
    """Parameters of one periodic effective operator.

    Give ``h`` or ``gamma`` (< 0, h = gamma^-2) or both (they must agree).
    ``sign``, ``c`` and ``alpha`` only matter for the bracket variant.
    """

    profile: CurvatureProfile
    beta0: float
    h: float | None = None
    gamma: float | None = None
    b: float = 0.0
    variant: str = "semiclassical"
    sign: int = 1
    c: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise EffectiveError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.gamma is not None:
            if not self.gamma < 0:
                raise EffectiveError("gamma must be negative (strong attractive coupling)")
            hg = self.gamma ** -2
            if self.h is not None and abs(self.h * self.gamma**2 - 1) >= 1e-12:
                raise EffectiveError(f"h={self.h} and gamma={self.gamma} are inconsistent (h != gamma^-2)")
            object.__setattr__(self, "h", hg if self.h is None else self.h)
        if self.h is None:
            raise EffectiveError("give h or gamma")
        if not 0 < self.h < 1:
            raise EffectiveError("h must lie in (0, 1)")
        if self.b < 0:
            raise EffectiveError("field intensity b must be >= 0")
        if not self.beta0 > 0:
            raise EffectiveError("beta0 must be positive")
        if self.sign not in (1, -1):
            raise EffectiveError("bracket sign must be +1 or -1")
        if self.c < 0 or self.alpha <= 0:
            raise EffectiveError("bracket needs c >= 0 and alpha > 0")

    @property
    def L(self) -> float:
        return self.profile.L

    @property
    def flux(self) -> float:
        """b * beta0, the constant vector potential along the boundary."""
        return self.b * self.beta0

    @property
    def kinetic(self) -> float:
        h = self.h
        if self.variant == "gamma_form":
            return self.gamma ** -2 if self.gamma is not None else h
        if self.variant == "bracket":
            return h * (1 + self.sign * self.c * h ** min(self.alpha, 0.5))
        return h

    def potential(self, kappa):
        """Variant potential evaluated on curvature values."""
        kappa = np.asarray(kappa, dtype=float)
        h = self.h
        if self.variant == "gamma_form":
            g = self.gamma if self.gamma is not None else -h ** -0.5
            return -1 + kappa / g
        if self.variant == "semiclassical":
            return -1 - kappa * math.sqrt(h)
        if self.variant == "disc_effective":
            return np.full_like(kappa, -1 - math.sqrt(h) - h / 2)
        return -1 - kappa * math.sqrt(h) - kappa**2 * h / 2

    def replace(self, **kw) -> "EffectiveSpec":
        fields = dict(profile=self.profile, beta0=self.beta0, h=self.h, gamma=self.gamma, b=self.b,
                      variant=self.variant, sign=self.sign, c=self.c, alpha=self.alpha)
        if "h" in kw and "gamma" not in kw:
            fields["gamma"] = None
        fields.update(kw)
        return EffectiveSpec(**fields)


@dataclass(frozen=True)
class FourierCutoff:
    """Plane-wave window m0 - M .. m0 + M (dimension 2M + 1)."""

    M: int

    def __post_init__(self):
        if self.M < 1:
            raise EffectiveError("cutoff M must be >= 1")


def resolution_floor(spec: EffectiveSpec) -> int:
    # heuristic: a few times the flux plus the semiclassical wavenumber
    return int(math.ceil(5 * (spec.flux + spec.h ** -0.5 / (2 * spec.L))))


def default_cutoff(spec: EffectiveSpec) -> FourierCutoff:
    return FourierCutoff(max(64, 2 * resolution_floor(spec)))


def flux_period(L: float, beta0: float) -> float:
    """Shift of b that moves the flux b*beta0 by exactly one plane-wave index."""
    return math.pi / (L * beta0)


def _center_mode(spec: EffectiveSpec) -> int:
    # window centred on the plane wave closest to the flux, so that flux
    # shifts by a whole period map the window onto itself
    return int(round(spec.flux * spec.L / math.pi))


def assemble_effective(spec: EffectiveSpec, cutoff: FourierCutoff | None = None) -> HermitianSystem:
    """Dense Galerkin matrix in the basis exp(i pi m s / L)."""
    cutoff = default_cutoff(spec) if cutoff is None else cutoff
    M, L = cutoff.M, spec.L
    m0 = _center_mode(spec)
    m = m0 + np.arange(-M, M + 1)
    k = np.pi * m / L - spec.flux
    vhat = spec.profile.fourier_modes(2 * M, spec.potential)  # p = -2M..2M
    col = vhat[2 * M:]  # V_hat(p), p = 0..2M  -> entry (i, j) with i - j = p
    row = vhat[2 * M::-1]  # V_hat(-p)
    H = sla.toeplitz(col, row).astype(complex)
    H[np.diag_indices_from(H)] += spec.kinetic * k**2
    H = 0.5 * (H + H.conj().T)
    floor = resolution_floor(spec)
    meta = {"cutoff": M, "center_mode": m0, "modes": m, "path": "fourier",
            "below_floor": M < floor, "floor": floor}
    return HermitianSystem(matrix=H, meta=meta)


def solve_effective(spec: EffectiveSpec, cutoff: FourierCutoff | None = None, k: int = 5,
                    vectors: bool = True) -> EigenResult:
    """The ``k`` lowest eigenvalues of the Fourier-discretized operator."""
    sys = assemble_effective(spec, cutoff)
    res = eigh_dense(sys, k, vectors=vectors)
    res.meta.update(sys.meta, variant=spec.variant, h=spec.h, b=spec.b)
    return res


def assemble_effective_fd(spec: EffectiveSpec, n: int) -> HermitianSystem:
    """Periodic second-order stencil with link phases exp(-i b beta0 ds)."""
    if n < 128:
        raise EffectiveError("finite-difference path needs n >= 128")
    L = spec.L
    ds = 2 * L / n
    s = -L + ds * np.arange(n)
    V = spec.potential(spec.profile(s))
    K = spec.kinetic
    link = -K * np.exp(-1j * spec.flux * ds) / ds**2
    j = np.arange(n)
    rows = np.concatenate([j, j, (j + 1) % n])
    cols = np.concatenate([j, (j + 1) % n, j])
    vals = np.concatenate([2 * K / ds**2 + V, np.full(n, link), np.full(n, np.conj(link))])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return HermitianSystem(matrix=A, meta={"n": n, "ds": ds, "path": "fd"})


def solve_effective_fd(spec: EffectiveSpec, n: int = 1024, k: int = 5) -> EigenResult:
    """Independent finite-difference solve (shift-invert Lanczos)."""
    sys = assemble_effective_fd(spec, n)
    res = eigh_sparse(sys, k)
    res.meta.update(sys.meta, variant=spec.variant, h=spec.h, b=spec.b)
    return res


def flux_shift_spectrum_check(spec: EffectiveSpec, cutoff: FourierCutoff | None = None, k: int = 5,
                              tol: float = 1e-10) -> tuple[bool, float]:
    """Compare spectra at b and b + pi / (L beta0)."""
    cutoff = default_cutoff(spec) if cutoff is None else cutoff
    shifted = spec.replace(b=spec.b + flux_period(spec.L, spec.beta0))
    a = solve_effective(spec, cutoff, k, vectors=False).eigenvalues
    c = solve_effective(shifted, cutoff, k, vectors=False).eigenvalues
    dev = float(np.max(np.abs(a - c)))
    return dev < tol, dev


# ---------------------------------------------------------------------------
# flux-free Dirichlet model on (-L, L)


def _harmonic_width(profile: CurvatureProfile, hbar: float, kpp: float) -> float:
    w = math.sqrt(hbar) / max(-kpp / 2, 1e-12) ** 0.25
    return min(w, profile.L)


def default_dirichlet_grid(profile: CurvatureProfile, hbar: float) -> int:
    """Interior points with ~40 points per oscillator length, at least 2048."""
    kpp = curvature_max(profile).kappa_pp
    w = _harmonic_width(profile, hbar, kpp if kpp < 0 else -1.0)
    return int(max(2048, math.ceil(2 * profile.L / (w / 40))))


def dirichlet_fluxfree(profile: CurvatureProfile, hbar: float, n: int | None = None, k: int = 3,
                       flux: float = 0.0, kappa_max: float | None = None) -> EigenResult:
    """-hbar^2 d^2/ds^2 + kappa_max - kappa(s) on (-L, L), Dirichlet at both ends.

    ``n`` interior nodes s_j = -L + j ds, ds = 2L/(n+1).  A nonzero ``flux``
    (the product b*beta0) assembles the magnetic stencil with complex link
    phases instead; on an interval it is gauge-equivalent to ``flux = 0``.
    """
    if not 0 < hbar < 1:
        raise EffectiveError("hbar must lie in (0, 1)")
    n = default_dirichlet_grid(profile, hbar) if n is None else n
    L = profile.L
    ds = 2 * L / (n + 1)
    s = -L + ds * np.arange(1, n + 1)
    kmax = curvature_max(profile).kappa_max if kappa_max is None else kappa_max
    V = kmax - profile(s)
    K = hbar**2
    diag = 2 * K / ds**2 + V
    meta = {"n": n, "ds": ds, "s": s, "hbar": hbar, "kappa_max": kmax, "potential": V}
    if flux == 0.0:
        res = eigh_tridiagonal(HermitianSystem(diag=diag, offdiag=np.full(n - 1, -K / ds**2)), k)
    else:
        link = -K * np.exp(-1j * flux * ds) / ds**2
        A = sp.diags([np.full(n - 1, np.conj(link)), diag, np.full(n - 1, link)], [-1, 0, 1],
                     format="csr")
        res = eigh_sparse(HermitianSystem(matrix=A), k)
    res.meta.update(meta)
    return res


# ---------------------------------------------------------------------------
# bracketing


@dataclass
class SandwichReport:
    h: float
    n: np.ndarray
    lower: np.ndarray  # lambda_n(L^{eff,-})
    upper: np.ndarray  # lambda_n(L^{eff,+})
    mu: np.ndarray  # tubular eigenvalues
    slack: float  # allowed violation g(h)
    meta: dict = field(default_factory=dict)

    @property
    def gap_lower(self) -> np.ndarray:
        """lambda_n(-) - mu_n (should be <= slack)."""
        return self.lower - self.mu

    @property
    def gap_upper(self) -> np.ndarray:
        """mu_n - lambda_n(+) (should be <= slack)."""
        return self.mu - self.upper

    @property
    def ordered(self) -> np.ndarray:
        return (self.gap_lower <= self.slack) & (self.gap_upper <= self.slack)

    @property
    def degenerate(self) -> bool:
        return bool(np.allclose(self.lower, self.upper, rtol=0, atol=1e-14))


def bracket_sandwich(minus: EffectiveSpec, plus: EffectiveSpec, mu, slack: float = 0.0,
                     cutoff: FourierCutoff | None = None) -> SandwichReport:
    """Place tubular eigenvalues ``mu`` between the two bracket operators."""
    if minus.variant != "bracket" or plus.variant != "bracket":
        raise EffectiveError("bracket_sandwich needs two bracket-variant specs")
    if minus.sign != -1 or plus.sign != 1:
        raise EffectiveError("first spec must be the '-' bracket, second the '+' bracket")
    same = (minus.h == plus.h and minus.b == plus.b and minus.beta0 == plus.beta0
            and minus.profile is plus.profile)
    if not same:
        raise EffectiveError("bracket specs disagree on (h, b, beta0, profile)")
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    k = len(mu)
    cut = cutoff or max(default_cutoff(minus), default_cutoff(plus), key=lambda c: c.M)
    lo = solve_effective(minus, cut, k, vectors=False).eigenvalues
    hi = solve_effective(plus, cut, k, vectors=False).eigenvalues
    return SandwichReport(minus.h, np.arange(1, k + 1), lo, hi, mu, slack,
                          {"c": (minus.c, plus.c), "alpha": minus.alpha})

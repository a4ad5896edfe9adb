"""One-dimensional Robin model operators on a truncated half-line.

* ``H00``: -d^2/dtau^2 on (0, T) with u'(0) = -u(0) and u(T) = 0.
* ``H_B^T``: the same with the weight (1 - B tau), i.e. the operator
  -(1 - B tau)^{-1} d/dtau (1 - B tau) d/dtau in L^2((1 - B tau) dtau).  After
  the change of function u~ = (1 - B tau)^{1/2} u it becomes the flat operator
  -d^2/dtau^2 - B^2 / (4 (1 - B tau)^2) with u~'(0) = -(1 + B/2) u~(0).
* the transverse operator at arc length s: H_B^T with T = h^-rho and
  B = h^{1/2} kappa(s).

All discretizations are second order on the vertex grid tau_i = i T / n,
i = 0..n-1 (the Dirichlet node tau_n = T is eliminated). The Robin end uses
the ghost-point stencil (u_1 - u_{-1}) / (2 dtau) = c u_0, symmetrized by a
half-cell mass at tau = 0.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import EigenResult, HermitianSystem, eigh_tridiagonal
from .geometry import CurvatureProfile

WEIGHT_BOUND = 1.0 / 3.0
GAP_TOL = 1e-8
MIN_T = 10.0

__all__ = [
    "HalfLineSpec",
    "Model1DError",
    "TransverseResult",
    "TransverseSpec",
    "born_oppenheimer_correction",
    "default_grid",
    "halfline_system",
    "richardson",
    "solve_H00",
    "solve_HBT",
    "solve_transverse",
    "transverse_moments",
]


class Model1DError(ValueError):
    pass


def default_grid(T: float) -> int:
    """Grid size with dtau <= min(0.01, T/2000)."""
    return int(math.ceil(T / min(0.01, T / 2000.0)))


@dataclass(frozen=True)
class HalfLineSpec:
    """Truncated weighted half-line problem.

    ``robin_coeff`` is the coefficient ``c`` in u'(0) = c u(0) for the
    weighted operator; the transformed operator uses ``c - B/2``.
    """

    T: float
    n: int
    B: float = 0.0
    robin_coeff: float = -1.0

    def __post_init__(self):
        if not self.T > 0:
            raise Model1DError("truncation length T must be positive")
        if self.n < 16:
            raise Model1DError("need at least 16 grid points")
        if abs(self.B) * self.T >= WEIGHT_BOUND:
            raise Model1DError(
                f"|B| T = {abs(self.B) * self.T:.4g} >= 1/3: weight 1 - B tau leaves [2/3, 4/3]"
            )

    @property
    def dtau(self) -> float:
        return self.T / self.n

    @property
    def tau(self) -> np.ndarray:
        return self.dtau * np.arange(self.n)

    @property
    def transformed_robin(self) -> float:
        return self.robin_coeff - self.B / 2


def halfline_system(spec: HalfLineSpec, form: str = "transformed") -> HermitianSystem:
    """Tridiagonal (A, M) pair for ``H_B^T`` in either form.

    ``form="transformed"``: flat measure, potential -B^2/(4(1-B tau)^2).
    ``form="weighted"``: finite-volume stencil with face weights 1 - B tau_{i+1/2}
    and node mass 1 - B tau_i (generalized problem).
    """
    n, d, B = spec.n, spec.dtau, spec.B
    tau = spec.tau
    mass = np.ones(n)
    mass[0] = 0.5
    if form == "transformed":
        c = spec.transformed_robin
        V = -(B**2) / (4 * (1 - B * tau) ** 2)
        diag = 2 / d**2 + V
        diag[0] = (1 + d * c) / d**2 + 0.5 * V[0]
        off = np.full(n - 1, -1 / d**2)
    elif form == "weighted":
        c = spec.robin_coeff
        wf = 1 - B * (tau + 0.5 * d)  # faces i + 1/2, i = 0..n-1
        diag = np.empty(n)
        diag[1:] = (wf[:-1] + wf[1:]) / d**2
        diag[0] = wf[0] / d**2 + c / d  # w(0) = 1
        off = -wf[:-1] / d**2
        mass = mass * (1 - B * tau)
    else:
        raise Model1DError(f"unknown form {form!r}")
    meta = {"n": n, "dtau": d, "T": spec.T, "B": B, "form": form}
    return HermitianSystem(diag=diag, offdiag=off, mass=mass, meta=meta)


def _form_rayleigh(spec: HalfLineSpec, form: str, vecs: np.ndarray) -> np.ndarray:
    """Rayleigh quotients evaluated in gradient form.

    Bisection pins eigenvalues only to ~eps ||A|| ~ eps / dtau^2; the
    quadratic form sum w (dv)^2 / d^2 + (c/d) v0^2 + sum m V v^2 has O(1) terms,
    and its error is quadratic in the (small) eigenvector error.
    """
    n, d, B = spec.n, spec.dtau, spec.B
    tau = spec.tau
    m = np.ones(n)
    m[0] = 0.5
    dv = np.diff(np.vstack([vecs, np.zeros((1, vecs.shape[1]))]), axis=0)  # v_n = 0
    if form == "transformed":
        w, c = np.ones(n), spec.transformed_robin
        pot = m * (-(B**2) / (4 * (1 - B * tau) ** 2))
        mass = m
    else:
        w, c = 1 - B * (tau + 0.5 * d), spec.robin_coeff
        pot = np.zeros(n)
        mass = m * (1 - B * tau)
    num = (w[:, None] * dv**2).sum(axis=0) / d**2 + (c / d) * vecs[0] ** 2 + (pot[:, None] * vecs**2).sum(axis=0)
    return num / (mass[:, None] * vecs**2).sum(axis=0)


def _solve_halfline(spec: HalfLineSpec, k: int, form: str) -> EigenResult:
    res = eigh_tridiagonal(halfline_system(spec, form), k)
    # Perron sign: positive Robin trace
    vecs = res.eigenvectors
    vecs *= np.where(vecs[0] < 0, -1.0, 1.0)[None, :]
    res.meta["bisection"] = res.eigenvalues.copy()
    res.eigenvalues = _form_rayleigh(spec, form, vecs)
    res.meta["tau"] = spec.tau
    return res


def richardson(coarse: np.ndarray, fine: np.ndarray, order: float = 2.0, ratio: float = 2.0):
    """One Richardson step for values converging like step^order."""
    f = ratio**order
    return (f * np.asarray(fine) - np.asarray(coarse)) / (f - 1)


def _with_richardson(solver, spec: HalfLineSpec) -> EigenResult:
    coarse = solver(spec)
    fine = solver(HalfLineSpec(spec.T, 2 * spec.n, spec.B, spec.robin_coeff))
    k = min(len(coarse), len(fine))
    fine.meta["raw_coarse"] = coarse.eigenvalues[:k]
    fine.meta["raw_fine"] = fine.eigenvalues[:k].copy()
    fine.meta["richardson"] = True
    fine.eigenvalues = richardson(coarse.eigenvalues[:k], fine.eigenvalues[:k])
    # extrapolation error estimate: size of the correction itself
    fine.meta["error_estimate"] = np.abs(fine.eigenvalues - fine.meta["raw_fine"])
    return fine


def solve_H00(T: float = 20.0, n: int = 4000, k: int = 2, extrapolate: bool = False) -> EigenResult:
    """Lowest eigenpairs of the truncated half-line Robin Laplacian.

    The exact operator on (0, inf) has the single negative eigenvalue -1 with
    eigenfunction sqrt(2) exp(-tau); the truncated problem carries an
    O(dtau^2) + O(exp(-2T)) error.
    """
    if T < MIN_T:
        warnings.warn(f"T={T} < {MIN_T}: truncation artifacts may mix with the bound state",
                      stacklevel=2)
    spec = HalfLineSpec(T, n, 0.0)
    solver = lambda sp: _solve_halfline(sp, k, "transformed")  # noqa: E731
    return _with_richardson(solver, spec) if extrapolate else solver(spec)


def solve_HBT(spec: HalfLineSpec, k: int = 2, form: str = "transformed",
              extrapolate: bool = False) -> EigenResult:
    """Lowest eigenpairs of the weighted model ``H_B^T``.

    Both forms have the same exact spectrum; ``form`` picks the discretization.
    With ``extrapolate`` the eigenvalues are Richardson-combined from grids n and
    2n (vectors and residuals then belong to the 2n grid).
    """
    solver = lambda sp: _solve_halfline(sp, k, form)  # noqa: E731
    return _with_richardson(solver, spec) if extrapolate else solver(spec)


# ---------------------------------------------------------------------------
# transverse operator


@dataclass(frozen=True)
class TransverseSpec:
    kappa_s: float
    h: float
    rho: float = 0.2

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise Model1DError("h must lie in (0, 1)")
        if not 0 < self.rho < 0.5:
            raise Model1DError("rho must lie in (0, 1/2)")

    @property
    def T(self) -> float:
        return self.h ** (-self.rho)

    @property
    def B(self) -> float:
        return math.sqrt(self.h) * self.kappa_s

    @property
    def h_threshold(self) -> float:
        """Largest h with h^{1/2-rho} |kappa| < 1/3."""
        if self.kappa_s == 0:
            return 1.0
        return min(1.0, (WEIGHT_BOUND / abs(self.kappa_s)) ** (1 / (0.5 - self.rho)))


@dataclass
class TransverseResult:
    lam1: float
    lam2: float
    tau: np.ndarray
    state: np.ndarray
    weight: np.ndarray  # quadrature weights incl. (1 - B tau) and the half cell at 0
    spec: TransverseSpec
    meta: dict = field(default_factory=dict)


def solve_transverse(spec: TransverseSpec, n: int | None = None, extrapolate: bool = False) -> TransverseResult:
    """Two lowest levels and the ground state of the transverse operator.

    The ground state is normalized in L^2((1 - B tau) dtau) (discrete trapezoid
    weights) with v(0) > 0.
    """
    T = spec.T
    n = default_grid(T) if n is None else n
    hs = HalfLineSpec(T, n, spec.B)
    res = solve_HBT(hs, 2, form="weighted", extrapolate=extrapolate)
    tau = res.meta["tau"] if not extrapolate else HalfLineSpec(T, 2 * n, spec.B).tau
    d = tau[1] - tau[0]
    w = (1 - spec.B * tau) * d
    w[0] *= 0.5
    v = res.eigenvectors[:, 0] / np.sqrt(d)  # M-orthonormal -> L^2 density
    lam1, lam2 = res.eigenvalues[:2]
    return TransverseResult(float(lam1), float(lam2), tau, v, w, spec,
                            {"n": len(tau), "residuals": res.residuals})


def transverse_moments(state: TransverseResult, k: int) -> float:
    """Weighted moment  int tau^k |v|^2 (1 - B tau) dtau  (trapezoid)."""
    return float(np.sum(state.tau**k * state.state**2 * state.weight))


def _threads() -> int:
    import os

    try:
        return max(1, int(os.environ.get("ROBIN_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def born_oppenheimer_correction(profile: CurvatureProfile, h: float, rho: float, s_grid,
                                n: int | None = None) -> dict:
    """R_h(s) = ||d/ds v_{kappa(s),h}||^2 on a uniform periodic ``s_grid``.

    The ground states share one tau grid (T = h^-rho does not depend on s) and
    are differenced with periodic central differences.  The norm is taken in
    the weighted measure at each s.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    ds = np.diff(s_grid)
    if len(s_grid) < 3 or np.ptp(ds) > 1e-9 * abs(ds[0]):
        raise Model1DError("s_grid must be uniform with at least 3 points")
    kap = np.asarray(profile(s_grid), dtype=float)
    specs = [TransverseSpec(float(kv), h, rho) for kv in kap]

    with ThreadPoolExecutor(_threads()) as pool:
        states = list(pool.map(lambda sp: solve_transverse(sp, n), specs))
    gaps = np.array([st.lam2 - st.lam1 for st in states])
    if gaps.min() < GAP_TOL:
        j = int(np.argmin(gaps))
        raise Model1DError(f"eigenvalue crossing at s={s_grid[j]:.6g}: gap {gaps[j]:.3e}")

    V = np.array([st.state for st in states])
    W = np.array([st.weight for st in states])
    # periodic if the grid covers the full period, one-sided otherwise
    period = 2 * profile.L
    step = ds[0]
    if abs(len(s_grid) * step - period) < 1e-9 * period:
        dv = (np.roll(V, -1, axis=0) - np.roll(V, 1, axis=0)) / (2 * step)
    else:
        dv = np.gradient(V, step, axis=0, edge_order=2)
    R = np.sum(dv**2 * W, axis=1)
    return {"s": s_grid, "R": R, "kappa": kap, "lam1": np.array([st.lam1 for st in states]),
            "gap": gaps, "h": h, "rho": rho}

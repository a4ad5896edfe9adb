"""Deterministic Hermitian eigensolvers with residual certification.

Dense problems go through LAPACK's Hermitian drivers, symmetric tridiagonal
problems through Sturm bisection plus inverse iteration, and large sparse
problems through shift-inverted Lanczos with a fixed start vector. A diagonal
mass ``M`` is always removed by the similarity ``M^{-1/2} A M^{-1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_CAP = 4096
RESIDUAL_TOL = 1e-8
HERMITIAN_TOL = 1e-13
ROUNDOFF_FACTOR = 16.0

__all__ = [
    "DENSE_CAP",
    "EigenResult",
    "EigensolveError",
    "HermitianSystem",
    "eigh_dense",
    "eigh_sparse",
    "eigh_tridiagonal",
    "log_tridiagonal_eigvec",
    "solve",
    "sturm_count",
    "symmetrize_mass",
]


class EigensolveError(RuntimeError):
    """Invalid input or a solve that failed its certification."""


@dataclass
class HermitianSystem:
    """``A v = lambda M v`` with ``M`` diagonal.

    Exactly one of ``matrix`` (dense or scipy.sparse Hermitian) or
    ``diag``/``offdiag`` (real symmetric tridiagonal) is set.
    """

    matrix: np.ndarray | sp.spmatrix | None = None
    diag: np.ndarray | None = None
    offdiag: np.ndarray | None = None
    mass: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.matrix is None) == (self.diag is None):
            raise EigensolveError("give either a matrix or a tridiagonal (diag, offdiag) pair")
        if self.diag is not None:
            self.diag = np.asarray(self.diag, dtype=float)
            off = np.zeros(0) if self.offdiag is None else np.asarray(self.offdiag, dtype=float)
            if len(off) != len(self.diag) - 1:
                raise EigensolveError("off-diagonal must have length n - 1")
            self.offdiag = off
        if self.mass is not None:
            self.mass = np.asarray(self.mass, dtype=float)
            if self.mass.shape != (self.n,):
                raise EigensolveError("mass vector has the wrong length")
            if not np.all(self.mass > 0):
                raise EigensolveError("mass must be strictly positive")

    @property
    def n(self) -> int:
        return len(self.diag) if self.diag is not None else self.matrix.shape[0]

    @property
    def kind(self) -> str:
        if self.diag is not None:
            return "tridiagonal"
        return "sparse" if sp.issparse(self.matrix) else "dense"

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply ``A`` (not ``M``)."""
        if self.diag is not None:
            out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
            e = self.offdiag if v.ndim == 1 else self.offdiag[:, None]
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
            return out
        return self.matrix @ v


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residuals: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def symmetrize_mass(sys: HermitianSystem) -> tuple[HermitianSystem, np.ndarray]:
    """Remove a diagonal mass by the similarity ``D^{-1/2} A D^{-1/2}``.

    Returns the mass-free system and the scaling ``d = M^{-1/2}`` that maps its
    eigenvectors back (``v = d * w``).
    """
    if sys.mass is None:
        return sys, np.ones(sys.n)
    d = 1.0 / np.sqrt(sys.mass)
    meta = dict(sys.meta)
    if sys.diag is not None:
        out = HermitianSystem(diag=sys.diag * d * d, offdiag=sys.offdiag * d[:-1] * d[1:], meta=meta)
    elif sp.issparse(sys.matrix):
        D = sp.diags(d)
        out = HermitianSystem(matrix=(D @ sys.matrix @ D).tocsr(), meta=meta)
    else:
        out = HermitianSystem(matrix=d[:, None] * sys.matrix * d[None, :], meta=meta)
    return out, d


def _residuals(sys: HermitianSystem, vals, vecs) -> np.ndarray:
    Av = sys.matvec(vecs)
    Mv = vecs if sys.mass is None else sys.mass[:, None] * vecs
    r = np.linalg.norm(Av - Mv * vals[None, :], axis=0)
    return r / np.linalg.norm(vecs, axis=0)


def _finish(sys, vals, vecs, d, certify, meta):
    if vecs is None:
        return EigenResult(vals, None, None, meta)
    vecs = vecs * d[:, None]
    if sys.mass is not None:
        # M-orthonormal columns
        nrm = np.sqrt(np.einsum("i,ij,ij->j", sys.mass, vecs.conj(), vecs).real)
        vecs = vecs / nrm[None, :]
    res = _residuals(sys, vals, vecs)
    if certify:
        # A v itself carries roundoff ~ eps ||A||; very stiff grids cannot beat that
        floor = ROUNDOFF_FACTOR * np.finfo(float).eps * meta.get("scale", _scale(sys))
        bad = res > np.maximum(RESIDUAL_TOL * (1 + np.abs(vals)), floor)
        if np.any(bad):
            raise EigensolveError(
                f"residual certification failed: max residual {res.max():.3e} "
                f"for eigenvalues {vals[bad][:3]}"
            )
    return EigenResult(vals, vecs, res, meta)


def _scale(sys: HermitianSystem) -> float:
    """Rough operator norm (Gershgorin) used to scale residual tolerances."""
    if sys.diag is not None:
        e = np.abs(sys.offdiag)
        r = np.abs(sys.diag).copy()
        r[:-1] += e
        r[1:] += e
    elif sp.issparse(sys.matrix):
        r = np.asarray(abs(sys.matrix).sum(axis=1)).ravel()
    else:
        r = np.abs(sys.matrix).sum(axis=1)
    if sys.mass is not None:
        r = r / sys.mass
    return float(r.max()) if len(r) else 1.0


def eigh_dense(sys: HermitianSystem, k: int | None = None, vectors: bool = True,
               certify: bool = True) -> EigenResult:
    """All (or the ``k`` lowest) eigenpairs of a dense Hermitian system."""
    if sys.diag is not None:
        A = np.diag(sys.diag) + np.diag(sys.offdiag, 1) + np.diag(sys.offdiag, -1)
        sys = HermitianSystem(matrix=A, mass=sys.mass, meta=sys.meta)
    if sp.issparse(sys.matrix):
        sys = HermitianSystem(matrix=sys.matrix.toarray(), mass=sys.mass, meta=sys.meta)
    if sys.n > DENSE_CAP:
        raise EigensolveError(
            f"dense path capped at n={DENSE_CAP} (got {sys.n}); use eigh_tridiagonal or eigh_sparse"
        )
    A = np.asarray(sys.matrix)
    skew = np.max(np.abs(A - A.conj().T), initial=0.0)
    if skew > HERMITIAN_TOL * max(1.0, np.max(np.abs(A), initial=0.0)):
        raise EigensolveError(f"matrix is not Hermitian (max |A - A^H| = {skew:.3g})")
    if skew > 0:
        # rounding-level asymmetry (e.g. from a product U A U^H): average it out
        sys = HermitianSystem(matrix=0.5 * (A + A.conj().T), mass=sys.mass, meta=sys.meta)
    sym, d = symmetrize_mass(sys)
    B = np.asarray(sym.matrix)
    subset = None if k is None else (0, min(k, sys.n) - 1)
    if vectors:
        vals, vecs = sla.eigh(B, subset_by_index=subset, driver="evr" if subset else "evd")
    else:
        vals = sla.eigh(B, eigvals_only=True, subset_by_index=subset, driver="evr" if subset else "evd")
        vecs = None
    meta = {"n": sys.n, "path": "dense", "scale": _scale(sys), **sys.meta}
    return _finish(sys, vals, vecs, d, certify, meta)


def eigh_tridiagonal(sys: HermitianSystem, k: int = 1, vectors: bool = True,
                     certify: bool = True) -> EigenResult:
    """The ``k`` lowest eigenpairs of a real symmetric tridiagonal system.

    Eigenvalues come from Sturm-sequence bisection (to about machine epsilon
    times the Gershgorin radius), eigenvectors from inverse iteration.
    Zero off-diagonals simply split the matrix into blocks.
    """
    if sys.diag is None:
        raise EigensolveError("eigh_tridiagonal needs a tridiagonal system")
    sym, d = symmetrize_mass(sys)
    k = min(k, sys.n)
    vals_vecs = sla.eigh_tridiagonal(
        sym.diag, sym.offdiag, eigvals_only=not vectors, select="i",
        select_range=(0, k - 1), lapack_driver="stebz", tol=0.0,
    )
    vals, vecs = (vals_vecs if vectors else (vals_vecs, None))
    if vecs is not None:
        vals, vecs = _refine_tridiagonal(sym, vals, vecs)
        # fixed sign convention: first significant component positive
        idx = np.argmax(np.abs(vecs) > 1e-8 * np.abs(vecs).max(axis=0), axis=0)
        signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
        vecs = vecs * np.where(signs == 0, 1.0, signs)[None, :]
    meta = {"n": sys.n, "path": "tridiagonal", "scale": _scale(sys), **sys.meta}
    return _finish(sys, vals, vecs, d, certify, meta)


def _refine_tridiagonal(sym: HermitianSystem, vals, vecs):
    """One shifted inverse-iteration sweep followed by Rayleigh-Ritz.

    Stiff grids have ||A|| many orders above the wanted eigenvalues; this step
    pulls residuals from ~1e-15 ||A|| towards the roundoff floor of A v.
    """
    n = sym.n
    if n < 3:
        return vals, vecs
    ab = np.zeros((3, n))
    ab[0, 1:] = sym.offdiag
    ab[2, :-1] = sym.offdiag
    X = np.empty_like(vecs)
    for j, lam in enumerate(vals):
        ab[1] = sym.diag - lam
        try:
            X[:, j] = sla.solve_banded((1, 1), ab, vecs[:, j], check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            X[:, j] = vecs[:, j]
    if not np.all(np.isfinite(X)):
        return vals, vecs
    Q, _ = np.linalg.qr(X)
    AQ = sym.matvec(Q)
    theta, S = np.linalg.eigh(Q.T @ AQ)
    new_vecs = Q @ S
    old = np.linalg.norm(sym.matvec(vecs) - vecs * vals[None, :], axis=0).max()
    new = np.linalg.norm(AQ @ S - new_vecs * theta[None, :], axis=0).max()
    return (theta, new_vecs) if new < old else (vals, vecs)


def eigh_sparse(sys: HermitianSystem, k: int = 1, vectors: bool = True, certify: bool = True,
                maxiter: int = 20000, tol: float = 1e-13, sigma: float | None = None) -> EigenResult:
    """The ``k`` lowest eigenpairs of a large sparse Hermitian system.

    Lanczos (ARPACK) in shift-invert mode, started from the normalized all-ones
    vector. The shift defaults to just below the Gershgorin lower bound; a
    caller that knows a tighter lower bound on the spectrum should pass it as
    ``sigma`` (it must lie below the lowest eigenvalue).
    """
    sym, d = symmetrize_mass(sys)
    if sym.diag is not None:
        n = sym.n
        A = sp.diags([sym.offdiag, sym.diag, sym.offdiag], [-1, 0, 1], format="csc")
    else:
        A = sp.csc_matrix(sym.matrix)
        n = A.shape[0]
    diag = A.diagonal().real
    radius = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(diag)
    if sigma is None:
        sigma = float(np.min(diag - radius)) - 1.0
    v0 = np.ones(n, dtype=A.dtype) / np.sqrt(n)
    try:
        vals, vecs = spla.eigsh(A, k=min(k, n - 1), sigma=sigma, which="LM", v0=v0,
                                maxiter=maxiter, tol=tol)
    except spla.ArpackNoConvergence as exc:
        raise EigensolveError(
            f"Lanczos did not converge (n={n}, k={k}, {len(exc.eigenvalues)} pairs converged)"
        ) from exc
    order = np.argsort(vals)
    vals, vecs = vals[order].real, vecs[:, order]
    meta = {"n": sys.n, "path": "lanczos", "scale": _scale(sys), **sys.meta}
    out = _finish(sys, vals, vecs, d, certify, meta)
    if not vectors:
        out.eigenvectors = None
    return out


def solve(sys: HermitianSystem, k: int = 1, vectors: bool = True, certify: bool = True) -> EigenResult:
    """Dispatch to the dense, tridiagonal or Lanczos path."""
    if sys.kind == "tridiagonal":
        return eigh_tridiagonal(sys, k, vectors, certify)
    if sys.kind == "sparse" and sys.n > DENSE_CAP:
        return eigh_sparse(sys, k, vectors, certify)
    return eigh_dense(sys, k, vectors, certify)


def sturm_count(diag, offdiag, x) -> np.ndarray:
    """Number of eigenvalues below each shift in ``x`` (LDL^T inertia count)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    count = np.zeros(x.shape, dtype=int)
    q = diag[0] - x
    tiny = np.finfo(float).tiny
    for i in range(len(diag)):
        if i:
            q = diag[i] - x - offdiag[i - 1] ** 2 / q
        q = np.where(q == 0, -tiny, q)
        count += q < 0
    return count


def log_tridiagonal_eigvec(diag, offdiag, lam: float, match: int | None = None):
    """Log-magnitude and signs of a tridiagonal eigenvector by two-sided recurrence.

    The three-term recurrence is run from each end toward ``match`` (default:
    the minimum of ``diag``), where it grows, so components far out in the
    classically forbidden region keep their relative accuracy instead of
    sitting at the roundoff floor of an orthonormal solver. Values are
    returned as ``(log|v|, sign)`` with ``sum v^2 = 1``.
    """
    d = np.asarray(diag, dtype=float) - lam
    e = np.asarray(offdiag, dtype=float)
    n = len(d)
    if match is None:
        match = int(np.argmin(diag))
    match = int(np.clip(match, 1, n - 2))

    def sweep(dd, ee, stop):
        # ratios r_i = v_{i+1} / v_i starting from v_{-1} = 0
        logv = np.zeros(stop + 1)
        sgn = np.ones(stop + 1)
        r = -dd[0] / ee[0]
        for i in range(stop):
            logv[i + 1] = logv[i] + np.log(abs(r)) if r != 0 else -np.inf
            sgn[i + 1] = sgn[i] * np.sign(r) if r != 0 else sgn[i]
            if i + 1 < stop:
                r = -(dd[i + 1] + ee[i] / r) / ee[i + 1] if r != 0 else np.inf
        return logv, sgn

    left, lsg = sweep(d, e, match)
    right, rsg = sweep(d[::-1], e[::-1], n - 1 - match)
    right, rsg = right[::-1], rsg[::-1]
    shift = left[match] - right[0]
    flip = lsg[match] * rsg[0]
    logv = np.concatenate([left, right[1:] + shift])
    sgn = np.concatenate([lsg, rsg[1:] * flip])
    top = logv.max()
    norm = top + 0.5 * np.log(np.sum(np.exp(2 * (logv - top))))
    return logv - norm, sgn

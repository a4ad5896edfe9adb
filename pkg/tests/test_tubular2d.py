import math

import numpy as np
import pytest

from robin_spectra import model1d, tubular2d as tb
from robin_spectra.geometry import profile_from_function


def test_residuals_and_hermitian(disc):
    prof, met = disc
    spec = tb.TubularSpec(prof, 1e-2, met.beta0, b=1.0, n_s=32, n_tau=32)
    A = tb.assemble_tubular(spec).matrix
    assert abs(A - A.getH()).max() == 0
    res = tb.solve_tubular(spec, 2)
    assert np.all(res.residuals <= 1e-8)


def test_wall_monotone(disc):
    prof, met = disc
    dt = 0.05  # keeps h^(1/2) T kappa below 1/3
    # nested grids: same step, more nodes for the larger T
    small = tb.solve_tubular(tb.TubularSpec(prof, 1e-2, met.beta0, 1.0, n_s=16, n_tau=32, T=32 * dt), 1)
    large = tb.solve_tubular(tb.TubularSpec(prof, 1e-2, met.beta0, 1.0, n_s=16, n_tau=64, T=64 * dt), 1)
    assert small.eigenvalues[0] >= large.eigenvalues[0]


def test_translation_covariance(ellipse):
    prof, met = ellipse
    spec = tb.TubularSpec(prof, 1e-3, met.beta0, b=1.0, n_s=32, n_tau=24)
    a = tb.solve_tubular(spec, 2).eigenvalues
    shift = 5 * (prof.n // 32)
    b = tb.solve_tubular(tb.TubularSpec(prof.rotated(shift), 1e-3, met.beta0, 1.0, n_s=32, n_tau=24), 2).eigenvalues
    assert np.max(np.abs(a - b)) <= 1e-10


def test_transverse_localization(disc):
    prof, met = disc
    spec = tb.TubularSpec(prof, 1e-2, met.beta0, b=0.0, n_s=16, n_tau=64)
    res = tb.solve_tubular(spec, 1)
    sysm = tb.assemble_tubular(spec)
    v = np.abs(res.eigenvectors[:, 0]) ** 2 * sysm.mass
    tau = (spec.tmax / spec.n_tau) * np.tile(np.arange(spec.n_tau), spec.n_s)
    assert v[tau > 5].sum() / v.sum() < 1e-3


def test_separable_flat():
    L, h, T, nt, ns = math.pi, 1e-2, 10.0, 100, 32
    prof = profile_from_function(lambda s: 0 * s, L, 64)
    mu = tb.solve_tubular(tb.TubularSpec(prof, h, 0.5, 0.0, n_s=ns, n_tau=nt, T=T), 2).eigenvalues
    lam = model1d.solve_HBT(model1d.HalfLineSpec(T, nt), 1, "weighted").eigenvalues[0]
    ds = 2 * L / ns
    assert mu[0] == pytest.approx(lam, abs=1e-10)
    assert mu[1] == pytest.approx(lam + h * (2 - 2 * math.cos(ds)) / ds**2, abs=1e-10)


def test_iterative_matches_dense(disc):
    prof, met = disc
    spec = tb.TubularSpec(prof, 1e-2, met.beta0, b=1.0, n_s=16, n_tau=32)
    a = tb.solve_tubular(spec, 2).eigenvalues
    b = tb.solve_tubular(spec, 2, iterative=True).eigenvalues
    assert np.allclose(a, b, atol=1e-10)


def test_guards(ellipse):
    prof, met = ellipse
    with pytest.raises(tb.TubularError):
        tb.TubularSpec(prof, 0.1, met.beta0)
    with pytest.raises(tb.TubularError):
        tb.TubularSpec(prof, 1e-3, met.beta0, rho=0.3)
    with pytest.raises(tb.TubularError):
        tb.solve_tubular(tb.TubularSpec(prof, 1e-3, met.beta0, n_s=128, n_tau=64), 1)

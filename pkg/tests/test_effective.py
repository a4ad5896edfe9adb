import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robin_spectra import effective as ef
from robin_spectra.disc import disc_effective_lambda as disc_lambda
from robin_spectra.geometry import arc_length_reparametrize, preset


@pytest.fixture(scope="module")
def limacon():
    return arc_length_reparametrize(preset("limacon:0.3"), 1024)


@given(h=st.floats(1e-4, 5e-2), c=st.floats(0.1, 3.0), b=st.floats(0, 4))
def test_kinetic_monotone(ellipse, h, c, b):
    prof, met = ellipse
    kw = dict(h=h, b=b, c=c, alpha=0.5)
    lo = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, variant="bracket", sign=-1, **kw), k=3).eigenvalues
    mid = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, h=h, b=b, variant="full"), k=3).eigenvalues
    hi = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, variant="bracket", sign=1, **kw), k=3).eigenvalues
    assert np.all(lo <= mid + 1e-12) and np.all(mid <= hi + 1e-12)


@given(b=st.floats(0, 5), shift=st.integers(0, 3))
def test_flux_periodicity(ellipse, b, shift):
    prof, met = ellipse
    spec = ef.EffectiveSpec(prof, met.beta0, h=1e-2, b=b)
    ok, dev = ef.flux_shift_spectrum_check(spec, k=5, tol=1e-10) if shift == 1 else (True, 0.0)
    assert ok, dev
    p = ef.flux_period(prof.L, met.beta0)
    a = ef.solve_effective(spec, ef.FourierCutoff(64), 5).eigenvalues
    c = ef.solve_effective(spec.replace(b=b + shift * p), ef.FourierCutoff(64), 5).eigenvalues
    assert np.max(np.abs(a - c)) <= 1e-10


def test_reality(ellipse):
    prof, met = ellipse
    res = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, h=1e-3, b=1.3))
    assert res.eigenvalues.dtype.kind == "f"


@pytest.mark.parametrize("b", [0.0, 3.7])
def test_fourier_vs_fd_disc(disc, b):
    prof, met = disc
    spec = ef.EffectiveSpec(prof, met.beta0, h=1e-2, b=b, variant="full")
    a = ef.solve_effective(spec, k=3).eigenvalues
    f = ef.solve_effective_fd(spec, 4096, 3).eigenvalues
    assert np.max(np.abs(a - f)) <= 1e-6


def test_fourier_vs_fd_ellipse(ellipse):
    prof, met = ellipse
    spec = ef.EffectiveSpec(prof, met.beta0, h=1e-2, b=0.0, variant="full")
    a = ef.solve_effective(spec, k=3).eigenvalues
    f = ef.solve_effective_fd(spec, 4096, 3).eigenvalues
    assert np.max(np.abs(a - f)) <= 1e-6


@pytest.mark.parametrize("h", [1e-2, 1e-3])
def test_cutoff_converged(ellipse, disc, limacon, h):
    for prof, met in (ellipse, disc, limacon):
        spec = ef.EffectiveSpec(prof, met.beta0, h=h, b=1.0)
        M = ef.default_cutoff(spec).M
        a = ef.solve_effective(spec, ef.FourierCutoff(M), 3).eigenvalues
        c = ef.solve_effective(spec, ef.FourierCutoff(2 * M), 3).eigenvalues
        assert np.max(np.abs(a - c)) < 1e-10


@pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-4])
@pytest.mark.parametrize("b", [0.0, 1.0, 2.0, 3.7])
def test_disc_identity(disc, h, b):
    prof, met = disc
    spec = ef.EffectiveSpec(prof, met.beta0, h=h, b=b, variant="disc_effective")
    lam = ef.solve_effective(spec, k=3).eigenvalues
    assert np.max(np.abs(lam - disc_lambda(h, b, 3))) <= 1e-12


def test_gamma_form_equivalent(ellipse):
    prof, met = ellipse
    g = -20.0
    a = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, gamma=g, variant="gamma_form"), k=3).eigenvalues
    # gamma^{-2}(-d^2) - 1 + kappa/gamma with h = gamma^-2 is the semiclassical form
    b = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, h=g**-2, variant="semiclassical"), k=3).eigenvalues
    assert np.allclose(a, b, atol=1e-12)


def test_dirichlet_gauge(ellipse):
    prof, _ = ellipse
    a = ef.dirichlet_fluxfree(prof, 0.05, 4096, 3).eigenvalues
    b = ef.dirichlet_fluxfree(prof, 0.05, 4096, 3, flux=0.7).eigenvalues
    assert np.allclose(a, b, atol=1e-9)


def test_bracket_ordering_disc(disc):
    prof, met = disc
    minus = ef.EffectiveSpec(prof, met.beta0, h=1e-3, b=1.0, variant="bracket", sign=-1)
    plus = minus.replace(sign=1)
    lo = ef.solve_effective(minus, k=2).eigenvalues
    hi = ef.solve_effective(plus, k=2).eigenvalues
    assert np.all(lo <= hi)
    rep = ef.bracket_sandwich(minus, plus, 0.5 * (lo + hi))
    assert rep.ordered.all()


def test_validation(ellipse):
    prof, met = ellipse
    with pytest.raises(ef.EffectiveError):
        ef.EffectiveSpec(prof, met.beta0, h=2.0)
    with pytest.raises(ef.EffectiveError):
        ef.EffectiveSpec(prof, met.beta0, h=1e-2, variant="nope")
    with pytest.raises(ef.EffectiveError):
        ef.FourierCutoff(0)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robin_spectra import geometry as g


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_circle_beta0(R):
    prof, met = g.arc_length_reparametrize(g.preset(f"circle:{R}"), 256)
    assert met.beta0 == pytest.approx(R / 2, abs=1e-12)
    assert met.kappa_max == pytest.approx(1 / R, abs=1e-10)
    assert not met.assumption_A


@pytest.mark.parametrize("cid", ["circle:1", "ellipse:2:1", "ellipse:1.5:1", "limacon:0.3"])
def test_total_turning(cid):
    prof, _ = g.arc_length_reparametrize(g.preset(cid), 1024)
    assert abs(prof.total_turning() - 2 * math.pi) <= 1e-8


def test_ellipse_vertex(ellipse):
    prof, met = ellipse
    assert met.kappa_max == pytest.approx(2.0, abs=1e-9)
    assert met.kappa_pp == pytest.approx(-18.0, rel=1e-6)
    assert met.s_star == 0.0
    assert met.n_maxima == 2
    assert prof(0.0) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("cid", ["ellipse:2:1", "ellipse:1.5:1"])
def test_refinement_stable(cid):
    _, m1 = g.arc_length_reparametrize(g.preset(cid), 512)
    _, m2 = g.arc_length_reparametrize(g.preset(cid), 1024)
    assert abs(m1.kappa_max - m2.kappa_max) < 1e-6


def test_limacon_single_max():
    _, met = g.arc_length_reparametrize(g.preset("limacon:0.3"), 1024)
    assert met.n_maxima == 1 and met.assumption_A
    assert met.kappa_pp < 0


def test_bad_ids():
    with pytest.raises(g.GeometryError):
        g.preset("square:1")
    with pytest.raises(g.GeometryError):
        g.preset("ellipse:-1:1")


def test_csv_curve(tmp_path):
    t = np.linspace(0, 2 * np.pi, 401)
    path = tmp_path / "c.csv"
    np.savetxt(path, np.c_[2 * np.cos(t), np.sin(t)], delimiter=",", header="x1,x2", comments="")
    _, met = g.arc_length_reparametrize(g.resolve_curve(str(path)), 512)
    _, ref = g.arc_length_reparametrize(g.preset("ellipse:2:1"), 512)
    assert met.beta0 == pytest.approx(ref.beta0, rel=1e-8)


@given(shift=st.integers(0, 1023))
def test_agmon_distance_shape(ellipse, shift):
    prof, met = ellipse
    s = prof.s
    phi = g.agmon_distance(prof, s, met.kappa_max)
    assert np.all(phi >= 0)
    assert phi[np.argmin(np.abs(s))] == pytest.approx(0.0, abs=1e-12)
    # ellipse profile is even about the vertex: phi(s_j) = phi(-s_j), up to the
    # ~1e-8 accuracy of the arc-length resampling
    j = shift % (prof.n // 2)
    if j:
        assert phi[prof.n // 2 + j] == pytest.approx(phi[prof.n // 2 - j], abs=1e-8)


@given(a=st.floats(1.05, 3.0), b=st.floats(0.5, 1.0))
def test_ellipse_kappa_max(a, b):
    _, met = g.arc_length_reparametrize(g.preset(f"ellipse:{a}:{b}"), 1024)
    assert met.kappa_max == pytest.approx(a / b**2, rel=1e-7)
    assert met.beta0 > 0

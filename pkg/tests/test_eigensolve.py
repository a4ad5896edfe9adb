import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robin_spectra import eigensolve as es

finite = st.floats(-10, 10, allow_nan=False)


@given(st.integers(2, 512).flatmap(lambda n: st.tuples(arrays(float, n, elements=finite),
                                                       arrays(float, n - 1, elements=st.floats(-5, 5)))))
def test_bisection_matches_dense(dt):
    d, e = dt
    k = min(5, len(d))
    tri = es.eigh_tridiagonal(es.HermitianSystem(diag=d, offdiag=e), k, vectors=False)
    A = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    dense = es.eigh_dense(es.HermitianSystem(matrix=A), k, vectors=False)
    assert np.allclose(tri.eigenvalues, dense.eigenvalues, rtol=0, atol=1e-10 * (1 + np.abs(d).max() + 2 * np.abs(e).max()))


@given(n=st.integers(2, 40), seed=st.integers(0, 2**31 - 1))
def test_unitary_diagonal_conjugation(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = X + X.conj().T
    U = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    H2 = (U[:, None] * H) * U.conj()[None, :]
    a = es.eigh_dense(es.HermitianSystem(matrix=H)).eigenvalues
    b = es.eigh_dense(es.HermitianSystem(matrix=H2)).eigenvalues
    assert np.allclose(a, b, atol=1e-12 * max(1.0, np.abs(a).max()), rtol=0)


@given(n=st.integers(3, 60), seed=st.integers(0, 2**31 - 1))
def test_generalized_certified(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n))
    A = X + X.T
    m = rng.uniform(0.5, 2.0, n)
    res = es.eigh_dense(es.HermitianSystem(matrix=A, mass=m), 3)
    V = res.eigenvectors
    assert np.all(res.residuals <= es.RESIDUAL_TOL * (1 + np.abs(res.eigenvalues)))
    G = V.conj().T @ (m[:, None] * V)
    assert np.allclose(G, np.eye(3), atol=1e-10)
    ref = np.linalg.eigvalsh(A / np.sqrt(np.outer(m, m)))[:3]
    assert np.allclose(res.eigenvalues, ref, atol=1e-10)


def test_sparse_matches_dense():
    n = 400
    d = 2 + np.cos(np.arange(n))
    A = sp.diags([d, -np.ones(n - 1), -np.ones(n - 1)], [0, 1, -1], format="csr")
    s = es.eigh_sparse(es.HermitianSystem(matrix=A), 4)
    ref = np.linalg.eigvalsh(A.toarray())[:4]
    assert np.allclose(s.eigenvalues, ref, atol=1e-10)
    assert np.all(s.residuals <= 1e-8)


def test_deterministic():
    n = 300
    d = np.sin(np.arange(n)) * 3
    A = sp.diags([d, -np.ones(n - 1), -np.ones(n - 1)], [0, 1, -1], format="csr")
    a = es.eigh_sparse(es.HermitianSystem(matrix=A), 3).eigenvalues
    b = es.eigh_sparse(es.HermitianSystem(matrix=A), 3).eigenvalues
    assert a.tobytes() == b.tobytes()


def test_sturm_count():
    d = np.array([2.0, 2.0, 2.0])
    e = np.array([-1.0, -1.0])
    vals = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    assert es.sturm_count(d, e, vals[1] + 1e-9) == 2


def test_nonhermitian_rejected():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(es.EigensolveError):
        es.eigh_dense(es.HermitianSystem(matrix=A))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextacert import numerics as nm
from contextacert.errors import AsymmetricCirculant, NonFinite, NotPSD, NotSymmetric

from conftest import nst6_matrices

SQRT5 = math.sqrt(5.0)
U5 = np.array([SQRT5 / 5, (5 - SQRT5) / 10, 0.0, 0.0, (5 - SQRT5) / 10])


def test_eigh_trivial():
    assert np.allclose(nm.eigh(np.eye(4)).eigenvalues, 1.0)
    assert np.allclose(nm.eigh(np.diag([3.0, -1.0])).eigenvalues, [3.0, -1.0])


def test_eigh_circulant_example():
    lam = nm.eigh(nm.circulant(U5)).eigenvalues
    expected = [1.0, (SQRT5 - 1) / 2, (SQRT5 - 1) / 2, 0.0, 0.0]
    assert np.allclose(lam, expected, atol=1e-12)
    # rounded inputs reproduce the same spectrum to 1e-5
    rounded = nm.eigh(nm.circulant([0.44721, 0.27639, 0, 0, 0.27639])).eigenvalues
    assert np.allclose(rounded, expected, atol=1e-4)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_eigh_matches_lapack(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = a + a.T
    spec = nm.eigh(a)
    assert np.all(np.diff(spec.eigenvalues) <= 0)
    assert np.allclose(spec.eigenvalues, np.linalg.eigvalsh(a)[::-1], atol=1e-12)
    v = spec.eigenvectors
    assert np.allclose(v @ np.diag(spec.eigenvalues) @ v.T, a, atol=1e-12)


def test_eigh_rejects_bad_input():
    with pytest.raises(NotSymmetric):
        nm.eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NotSymmetric):
        nm.eigh(np.ones((2, 3)))
    with pytest.raises(NonFinite):
        nm.eigh(np.array([[np.nan]]))


def test_rank_examples(nst6_pair):
    x, z = nst6_pair
    assert nm.rank(np.zeros((3, 3))) == 0
    assert nm.rank(nm.symmetrize(x)) == 4
    assert nm.rank(nm.symmetrize(z)) == 3
    with pytest.raises(ValueError):
        nm.rank(np.eye(2), 0.0)


def test_gap_report():
    spec = nm.eigh(np.diag([2.0, 1e-9, 0.0]))
    report = spec.gap_report()
    assert spec.rank == 1
    assert report["smallest_kept"] == 2.0 and report["largest_dropped"] == 1e-9


def test_nullspace_examples():
    assert nm.nullspace(np.eye(3)).shape == (3, 0)
    basis = nm.nullspace(np.array([[1.0, -1.0]]))
    assert basis.shape == (2, 1)
    assert np.allclose(np.abs(basis[:, 0]), [1 / math.sqrt(2)] * 2)
    assert nm.nullspace(np.zeros((2, 3))).shape == (3, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 2**31 - 1))
def test_nullspace_dimension(rows, deficit, seed):
    rng = np.random.default_rng(seed)
    cols = rows + deficit
    a = rng.standard_normal((rows, cols))
    basis = nm.nullspace(a, 1e-9)
    assert basis.shape[1] == deficit
    assert np.allclose(a @ basis, 0.0, atol=1e-9)


def test_gram_factor_examples():
    assert np.allclose(np.abs(nm.gram_factor(np.eye(3))), np.eye(3))
    v = nm.gram_factor(np.ones((2, 2)))
    assert v.shape == (2, 1) and np.allclose(np.abs(v), 1.0)
    with pytest.raises(NotPSD):
        nm.gram_factor(np.diag([1.0, -1.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_gram_factor_roundtrip(n, r, seed):
    b = np.random.default_rng(seed).standard_normal((n, r))
    s = nm.symmetrize(b @ b.T)
    v = nm.gram_factor(s, 1e-9)
    assert v.shape[1] == min(n, r)
    assert np.allclose(v @ v.T, s, atol=1e-9)


def test_circulant_basics():
    assert np.array_equal(nm.circulant([1, 0, 0, 0, 0]), np.eye(5))
    assert np.allclose(nm.circulant_eigenvalues([1, 0, 0, 0, 0]), 1.0)
    with pytest.raises(AsymmetricCirculant):
        nm.circulant([1.0, 2.0, 3.0])


def test_circulant_zero_modes():
    lam = nm.circulant_eigenvalues(U5)
    assert np.flatnonzero(np.abs(lam) < 1e-12).tolist() == [2, 3]
    assert np.allclose(np.sort(lam), np.sort(nm.eigh(nm.circulant(U5)).eigenvalues), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6))
def test_circulant_eigenvalues_match_eigh(half):
    n = 2 * len(half) - 1
    u = np.array(half + half[1:][::-1])
    assert len(u) == n
    lam = np.sort(nm.circulant_eigenvalues(u))
    assert np.allclose(lam, np.linalg.eigvalsh(nm.circulant(u)), atol=1e-9)


def test_min_eigenvalue():
    assert nm.min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert nm.min_eigenvalue(np.diag([1.0, -2.0])) == pytest.approx(-2.0)


def test_matrix_json_roundtrip():
    x, _ = nst6_matrices()
    back = nm.matrix_from_json(nm.matrix_to_json(x))
    assert np.array_equal(back, x)
    with pytest.raises(ValueError):
        nm.matrix_from_json({"dim": 3, "rows": [[1.0]]})

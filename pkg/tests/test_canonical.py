import math

import numpy as np
import pytest

from contextacert import canonical as cn
from contextacert import exgraph as eg
from contextacert import numerics as nm
from contextacert import sdp
from contextacert.errors import BadParity, ConstructionInvalid, TooSmall

from conftest import antihole_theta_oracle, hole_theta_oracle

ODD = [5, 7, 9, 11, 13]


@pytest.mark.parametrize("n", ODD)
def test_theta_closed_forms(n):
    assert cn.hole_theta(n) == pytest.approx(hole_theta_oracle(n), rel=1e-14)
    assert cn.antihole_theta(n) == pytest.approx(antihole_theta_oracle(n), rel=1e-14)
    # vertex-transitive product law
    assert cn.hole_theta(n) * cn.antihole_theta(n) == pytest.approx(n, rel=1e-13)


def test_frozen_thetas():
    assert cn.hole_theta(5) == pytest.approx(math.sqrt(5), abs=1e-14)
    assert cn.antihole_theta(7) == pytest.approx(2.1099163, abs=1e-7)
    assert cn.hole_theta(7) == pytest.approx(3.3176672, abs=1e-7)


@pytest.mark.parametrize("n, exc", [(6, BadParity), (3, TooSmall), (4, BadParity)])
def test_bad_n(n, exc):
    with pytest.raises(exc):
        cn.antihole_vectors(n)
    with pytest.raises(exc):
        cn.hole_umbrella_vectors(n)


def test_non_integer_n():
    with pytest.raises(TypeError):
        cn.hole_theta(5.0)


@pytest.mark.parametrize("n", ODD)
def test_umbrella_vectors(n):
    ens = cn.hole_umbrella_vectors(n)
    assert ens.d == 3
    res = ens.residuals()
    assert res["edge"] < 1e-12 and res["norm"] < 1e-12
    assert ens.probabilities().sum() == pytest.approx(hole_theta_oracle(n), abs=1e-12)


def test_cycle_primal_gram_example():
    x = cn.cycle_primal_gram(7)
    assert x.shape == (8, 8)
    assert x[0, 0] == pytest.approx(1.0)
    # cos(pi/7) / (1 + cos(pi/7))
    assert x[1, 1] == pytest.approx(0.47395246, abs=1e-8)
    assert np.trace(x) - 1.0 == pytest.approx(hole_theta_oracle(7), abs=1e-12)


@pytest.mark.parametrize("n", ODD)
def test_antihole_dual_certificate(n):
    z = cn.antihole_dual(n)
    assert z[0, 0] == pytest.approx(antihole_theta_oracle(n), abs=1e-12)
    assert nm.min_eigenvalue(z) > -1e-12
    x = cn.antihole_primal_circulant(n)
    assert abs(np.sum(x * z)) < 1e-12
    assert nm.rank(x) + nm.rank(z) == n + 1


def test_circulant_vector_n5():
    u = cn.circulant_vector(5)
    assert np.allclose(u, [math.sqrt(5) / 5, (5 - math.sqrt(5)) / 10, 0, 0, (5 - math.sqrt(5)) / 10], atol=1e-14)


@pytest.mark.parametrize("n", ODD)
def test_circulant_spectrum(n):
    spec = cn.antihole_circulant_spectrum(n)
    assert np.allclose(spec["formula"], spec["direct"], atol=1e-13)
    assert np.allclose(np.sort(spec["formula"]), np.sort(spec["eigh"]), atol=1e-12)
    zeros = np.flatnonzero(np.abs(spec["formula"]) < 1e-12).tolist()
    assert zeros == [(n - 1) // 2, (n + 1) // 2]
    assert cn.antihole_min_dimension(n) == n - 2


@pytest.mark.parametrize("n", ODD)
def test_antihole_vectors_verify(n):
    ens = cn.antihole_vectors(n)
    assert ens.d == n - 2
    res = ens.residuals()
    assert res["edge"] < 1e-10 and res["norm"] < 1e-10
    assert ens.probabilities().sum() == pytest.approx(antihole_theta_oracle(n), abs=1e-8)
    assert np.allclose(ens.gram_matrix(), cn.antihole_primal_circulant(n), atol=1e-10)


def test_closed_form_formula_is_rejected():
    # the closed-form projector expression gives non-unit vectors; the fallback is used
    with pytest.raises(ConstructionInvalid):
        cn.antihole_vectors(7, fallback=None)
    ens = cn.antihole_vectors(7)
    assert ens.source == "solver_fallback"
    assert ens.notes


@pytest.mark.parametrize("n", [5, 7, 9])
def test_formula_with_doubled_coefficient_is_exact(n):
    # oracle observation: doubling the oscillating term reproduces the circulant
    c = math.cos(math.pi / n)
    th = antihole_theta_oracle(n)
    vecs = np.zeros((n, n - 2))
    for j in range(n):
        vecs[j, 0] = math.sqrt(th / n)
        for m in range(1, (n - 3) // 2 + 1):
            rad = (2.0 * c + 2.0 * (-1) ** (m + 1) * math.cos((m + 1) * math.pi / n)) / (n * c)
            t = (-1) ** (j * (m + 1)) * math.sqrt(rad)
            r = j * (m + 1) * math.pi / n
            vecs[j, 2 * m - 1] = t * math.cos(r)
            vecs[j, 2 * m] = t * math.sin(r)
    assert np.allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-12)
    g = eg.anticycle(n)
    assert max(abs(vecs[i - 1] @ vecs[j - 1]) for i, j in g.edges) < 1e-12


def test_fallbacks_agree():
    a = cn.antihole_vectors(5, fallback="circulant")
    b = cn.antihole_vectors(5)
    assert a.source == "circulant_fallback"
    assert np.allclose(a.gram_matrix(), b.gram_matrix(), atol=1e-6)
    with pytest.raises(ValueError):
        cn.antihole_vectors(5, fallback="magic")


def test_solver_primal_matches_circulant():
    x = sdp.solve_theta(eg.anticycle(5)).X
    assert np.max(np.abs(x - cn.antihole_primal_circulant(5))) < 1e-6


def test_ensemble_roundtrip():
    ens = cn.antihole_vectors(9)
    back = cn.CanonicalEnsemble.from_dict(ens.to_dict())
    assert back.n == 9 and back.family is cn.Family.ANTIHOLE
    assert np.allclose(back.projector_vectors, ens.projector_vectors)


def test_canonical_ensemble_dispatch():
    assert cn.canonical_ensemble(eg.cycle(7)).family is cn.Family.HOLE
    assert cn.canonical_ensemble(eg.anticycle(7)).family is cn.Family.ANTIHOLE
    with pytest.raises(ValueError):
        cn.canonical_ensemble(eg.counterexample6())

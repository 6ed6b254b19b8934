import math

import numpy as np
import pytest

from contextacert import exgraph as eg
from contextacert import numerics as nm
from contextacert import sdp
from contextacert.errors import MaxIterExceeded, NotHermitian
from contextacert.sdp import SdpProblem, SolverOptions, Status

from conftest import antihole_theta_oracle, hole_theta_oracle

SQRT5 = math.sqrt(5.0)


def test_theta_primal_dimensions():
    p = sdp.build_theta_primal(eg.cycle(5))
    assert (p.dim, p.m) == (6, 11)
    q = sdp.build_theta_primal(eg.counterexample6())
    assert (q.dim, q.m) == (7, 15)
    assert np.array_equal(p.C, np.diag([0, 1, 1, 1, 1, 1]))


def test_problem_validation():
    with pytest.raises(ValueError):
        SdpProblem(np.eye(2), [np.eye(3)], [1.0])
    with pytest.raises(ValueError):
        SdpProblem(np.eye(2), [np.eye(2)], [1.0, 2.0])


def test_solve_trivial():
    sol = sdp.solve(SdpProblem(np.eye(1), [np.eye(1)], [1.0]))
    assert sol.status is Status.SOLVED
    assert sol.primal_obj == pytest.approx(1.0, abs=1e-8)
    assert sol.dual_obj == pytest.approx(1.0, abs=1e-8)


def test_solve_reports_infeasible():
    # X_00 = 1 and X_00 = 2 at once
    sol = sdp.solve(SdpProblem(np.eye(1), [np.eye(1), np.eye(1)], [1.0, 2.0]))
    assert sol.status is Status.INFEASIBLE


def test_presolve_drops_duplicates():
    a = np.diag([1.0, 0.0])
    sol = sdp.solve(SdpProblem(-np.eye(2), [a, a, np.diag([0.0, 1.0])], [1.0, 1.0, 1.0]))
    assert sol.status is Status.SOLVED
    assert len(sol.dropped_constraints) == 1
    assert sol.primal_obj == pytest.approx(-2.0, abs=1e-7)


@pytest.mark.parametrize(
    "graph, expected",
    [
        (eg.cycle(5), SQRT5),
        (eg.cycle(7), hole_theta_oracle(7)),
        (eg.anticycle(7), antihole_theta_oracle(7)),
        (eg.counterexample6(), SQRT5),
        (eg.complete(4), 1.0),
        (eg.empty(3), 3.0),
    ],
    ids=["C5", "C7", "antiC7", "nst6", "K4", "E3"],
)
def test_solve_theta_values(graph, expected):
    sol = sdp.solve_theta(graph)
    assert sol.theta == pytest.approx(expected, abs=1e-6)
    res = sol.residuals()
    assert max(res.values()) < 1e-6
    assert abs(sol.primal_obj - sol.dual_obj) < 1e-6


def test_frozen_theta_values():
    # frozen from the closed forms, and numerically reproduced by the solver
    assert sdp.solve_theta(eg.anticycle(7)).theta == pytest.approx(2.1099163, abs=1e-6)
    assert sdp.solve_theta(eg.cycle(7)).theta == pytest.approx(3.3176672, abs=1e-6)


def test_theta_pair_structure():
    g = eg.cycle(5)
    sol = sdp.solve_theta(g)
    x, z = sol.X, sol.Z
    assert x[0, 0] == 1.0
    for i in range(1, 6):
        assert x[i, i] == x[0, i]
        assert z[i, i] == pytest.approx(-(2 * z[0, i] + 1), abs=1e-12)
    for i, j in g.edges:
        assert x[i, j] == 0.0
    for i, j in g.non_edges():
        assert z[i, j] == 0.0
    assert nm.min_eigenvalue(x) > -1e-8
    assert nm.min_eigenvalue(z) > -1e-8
    assert abs(np.sum(x * z)) < 1e-6


def test_uniqueness_across_starting_points():
    g = eg.anticycle(5)
    a = sdp.solve_theta(g, SolverOptions(init_scale=1.0)).X
    b = sdp.solve_theta(g, SolverOptions(init_scale=7.0)).X
    assert np.max(np.abs(a - b)) < 1e-5


def test_max_iter_raises():
    with pytest.raises(MaxIterExceeded):
        sdp.solve_theta(eg.cycle(5), SolverOptions(max_iter=2))


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(gap_tol=0.0)
    assert SolverOptions().to_dict()["min_centering"] == 0.3


def test_assemble_reduced_dual_roundtrip():
    g = eg.cycle(5)
    sol = sdp.solve_theta(g)
    z = sdp.assemble_reduced_dual(g, sol.y)
    assert np.max(np.abs(z - sol.Z)) < 1e-6


def test_realify_matrix_psd_equivalence():
    rng = np.random.default_rng(0)
    for _ in range(50):
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = b + b.conj().T
        lam = np.linalg.eigvalsh(h)
        big = np.linalg.eigvalsh(sdp.realify_matrix(h))
        assert np.allclose(np.sort(np.repeat(lam, 2)), big, atol=1e-10)


def test_realify_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        sdp.realify_matrix(np.array([[0, 1j], [1j, 0]]))
    with pytest.raises(NotHermitian):
        sdp.ComplexSdpProblem(np.array([[0, 1], [0, 0]]), [], [])


def test_realify_trivial_complex():
    p = sdp.ComplexSdpProblem(np.eye(1), [np.eye(1)], [1.0])
    sol = sdp.solve(sdp.realify(p))
    assert sol.primal_obj == pytest.approx(1.0, abs=1e-7)
    h = sdp.unrealify(sol.X)
    assert h.shape == (1, 1) and h[0, 0].real == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("graph, expected", [(eg.cycle(5), SQRT5), (eg.anticycle(7), antihole_theta_oracle(7))])
def test_realified_theta_matches_real(graph, expected):
    p = sdp.realify(sdp.complexify(sdp.build_theta_primal(graph)))
    sol = sdp.solve(p)
    assert sol.status is Status.SOLVED
    assert sol.primal_obj == pytest.approx(expected, abs=1e-6)
    h = sdp.unrealify(sol.X)
    assert np.max(np.abs(h.imag)) < 1e-5


def test_alternate_dual_unique_face():
    g = eg.anticycle(5)
    sol = sdp.solve_theta(g)
    assert sdp.alternate_dual(g, sol.Z, seed=0, x_star=sol.X) is None


def test_alternate_dual_triangle():
    g = eg.complete(3)
    sol = sdp.solve_theta(g)
    z = sdp.alternate_dual(g, sol.Z, seed=0, x_star=sol.X)
    if z is not None:
        assert z[0, 0] == pytest.approx(1.0, abs=1e-6)
        assert nm.min_eigenvalue(z) > -1e-6

import math

import numpy as np
import pytest

from contextacert import canonical as cn
from contextacert import certifier as ct
from contextacert import exgraph as eg
from contextacert import sdp
from contextacert.errors import ComplementarityGapTooLarge, InfeasibleDual

GOLDEN = (1 + math.sqrt(5)) / 2


def test_free_entry_layout():
    entries = ct.free_entries(eg.counterexample6())
    assert len(entries) == 13
    assert entries[:6] == [("diag", i) for i in range(1, 7)]
    assert entries[6:] == [("pair", 1, 2), ("pair", 1, 5), ("pair", 2, 3), ("pair", 3, 4),
                           ("pair", 3, 6), ("pair", 4, 5), ("pair", 5, 6)]


@pytest.mark.parametrize("n", [5, 7, 9, 11])
def test_antihole_dual_nondegenerate(n):
    report = ct.nondegeneracy_system(eg.anticycle(n), cn.antihole_dual(n))
    assert report.null_dim == 0
    assert report.system_cols == 2 * n


def test_counterexample_tangent_direction(nst6_pair):
    x, z = nst6_pair
    g = eg.counterexample6()
    report = ct.nondegeneracy_system(g, z)
    assert report.null_dim == 1
    m = report.coefficients[:, 0]
    m = m / m[12]
    assert m[11] == pytest.approx(-1.0, abs=1e-8)
    assert m[5] == pytest.approx(GOLDEN, abs=1e-8)
    # the direction keeps X* + tM feasible to first order
    tangent = report.basis[0]
    assert np.max(np.abs(tangent @ z)) < 1e-10
    for i, j in g.edges:
        assert tangent[i, j] == 0.0
    assert tangent[0, 0] == 0.0
    for i in range(1, 7):
        assert tangent[i, i] == tangent[0, i]


def test_counterexample_strict_complementarity(nst6_pair):
    x, z = nst6_pair
    holds, rx, rz = ct.strict_complementarity(x, z)
    assert (holds, rx, rz) == (True, 4, 3)


def test_strict_complementarity_rejects_non_optimal():
    with pytest.raises(ComplementarityGapTooLarge):
        ct.strict_complementarity(np.eye(3), np.zeros((3, 3)))
    with pytest.raises(ComplementarityGapTooLarge):
        ct.strict_complementarity(np.eye(3), np.eye(3))


def test_check_reduced_dual_rejects():
    with pytest.raises(InfeasibleDual):
        ct.check_reduced_dual(eg.cycle(5), np.eye(6))
    with pytest.raises(InfeasibleDual):
        ct.nondegeneracy_system(eg.cycle(5), np.eye(3))


def test_dual_nondegenerate_generic():
    g = eg.anticycle(5)
    p = sdp.build_theta_primal(g)
    assert ct.dual_nondegenerate(p, cn.antihole_dual(5)) == 0


@pytest.mark.parametrize(
    "graph, verdict",
    [
        (eg.anticycle(5), ct.Verdict.SELF_TESTABLE),
        (eg.anticycle(7), ct.Verdict.SELF_TESTABLE),
        (eg.cycle(5), ct.Verdict.SELF_TESTABLE),
        (eg.cycle(7), ct.Verdict.SELF_TESTABLE),
        (eg.counterexample6(), ct.Verdict.NOT_SELF_TESTABLE),
        (eg.complete(4), ct.Verdict.NOT_SELF_TESTABLE),
    ],
    ids=["antiC5", "antiC7", "C5", "C7", "nst6", "K4"],
)
def test_classify(graph, verdict):
    v = ct.classify(graph)
    assert v.verdict is verdict
    assert v.exit_code == {"SelfTestable": 0, "NotSelfTestable": 2}[verdict.value]


def test_classify_counterexample_details():
    v = ct.classify(eg.counterexample6())
    assert (v.rank_X, v.rank_Z, v.null_dim) == (4, 3, 1)
    assert v.strict_complementarity and v.overlaps_nonzero
    assert v.theta == pytest.approx(math.sqrt(5), abs=1e-6)
    assert v.nchv_bound == 2


def test_classify_empty_graph_note():
    v = ct.classify(eg.empty(3))
    assert v.verdict is ct.Verdict.SELF_TESTABLE
    assert ct.NO_GAP_NOTE in v.notes


def test_verdict_dict_is_serializable():
    import json

    d = ct.classify(eg.anticycle(5)).to_dict()
    assert json.loads(json.dumps(d))["verdict"] == "SelfTestable"
    assert set(d["tolerances"]) == {"gap_tol", "feas_tol", "rank_tol", "null_tol", "overlap_tol"}

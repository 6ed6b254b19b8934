"""Uniqueness analysis of theta optima and the self-testing verdict.

A graph is declared self-testing when its dual optimum is nondegenerate (so
the primal optimum is unique) and every state-projector overlap is nonzero.
It is declared not self-testing when strict complementarity holds but the dual
is degenerate, which forces a non-unique primal optimum.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from contextacert import __version__, exgraph, numerics, sdp
from contextacert.errors import ComplementarityGapTooLarge, InfeasibleDual

log = logging.getLogger(__name__)

NO_GAP_NOTE = "no classical-quantum gap"


class Verdict(str, enum.Enum):
    SELF_TESTABLE = "SelfTestable"
    NOT_SELF_TESTABLE = "NotSelfTestable"
    INCONCLUSIVE = "Inconclusive"

    @property
    def exit_code(self) -> int:
        return {"SelfTestable": 0, "NotSelfTestable": 2, "Inconclusive": 3}[self.value]


@dataclass
class NondegeneracyReport:
    """Solutions ``M`` of the tangent system ``M Z* = 0``.

    ``free_entries`` labels the unknowns: ``("diag", i)`` sets
    ``M_ii = M_0i = M_i0``; ``("pair", i, j)`` sets ``M_ij = M_ji`` for a non-edge.
    ``coefficients`` holds the nullspace basis in those unknowns (columns).
    """

    null_dim: int
    basis: list
    coefficients: np.ndarray
    free_entries: list
    system_rows: int
    system_cols: int
    residual: float
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "null_dim": self.null_dim,
            "system_rows": self.system_rows,
            "system_cols": self.system_cols,
            "residual": self.residual,
            "smallest_singular_values": [float(x) for x in self.singular_values[-3:]],
            "free_entries": [list(e) for e in self.free_entries],
            "basis": [numerics.matrix_to_json(m) for m in self.basis],
        }


def free_entries(g: exgraph.ExclusivityGraph) -> list:
    """Unknowns of the tangent system: diagonals 1..n, then non-edges in order."""
    return [("diag", i) for i in range(1, g.n + 1)] + [("pair", i, j) for i, j in g.non_edges()]


def _entry_matrix(n, entry):
    m = np.zeros((n + 1, n + 1))
    if entry[0] == "diag":
        i = entry[1]
        m[i, i] = m[0, i] = m[i, 0] = 1.0
    else:
        _, i, j = entry
        m[i, j] = m[j, i] = 1.0
    return m


def check_reduced_dual(g: exgraph.ExclusivityGraph, z, tol: float = 1e-6) -> float:
    """Max violation of reduced dual feasibility; raises InfeasibleDual above ``tol``."""
    z = np.asarray(z, dtype=float)
    n = g.n
    if z.shape != (n + 1, n + 1):
        raise InfeasibleDual(f"expected a {(n + 1, n + 1)} matrix, got {z.shape}")
    viol = float(np.max(np.abs(z - z.T)))
    viol = max([viol] + [abs(z[i, i] + 2.0 * z[0, i] + 1.0) for i in range(1, n + 1)])
    viol = max([viol] + [abs(z[i, j]) for i, j in g.non_edges()])
    viol = max(viol, -numerics.min_eigenvalue(numerics.symmetrize(z)))
    if viol > tol:
        raise InfeasibleDual(f"matrix violates reduced dual feasibility by {viol:.3e}")
    return viol


def nondegeneracy_system(g: exgraph.ExclusivityGraph, z_star, null_tol: float = 1e-6) -> NondegeneracyReport:
    """Nullspace of ``M -> M Z*`` over the tangent matrices of the theta SDP.

    ``null_dim == 0`` certifies that ``z_star`` is dual nondegenerate.

    Raises:
        InfeasibleDual: if ``z_star`` is not reduced-dual feasible within 1e-6.
    """
    check_reduced_dual(g, z_star)
    z = numerics.symmetrize(z_star)
    n = g.n
    entries = free_entries(g)
    cols = [(_entry_matrix(n, e) @ z).ravel() for e in entries]
    lmat = np.column_stack(cols)
    coeffs = numerics.nullspace(lmat, tol=null_tol)
    basis = [sum(c * _entry_matrix(n, e) for c, e in zip(col, entries)) for col in coeffs.T]
    residual = float(np.max(np.abs(lmat @ coeffs))) if coeffs.shape[1] else 0.0
    sv = np.sqrt(np.clip(numerics.eigh(numerics.symmetrize(lmat.T @ lmat)).eigenvalues, 0.0, None))
    return NondegeneracyReport(
        coeffs.shape[1], basis, coeffs, entries, lmat.shape[0], lmat.shape[1], residual, sv
    )


def strict_complementarity(x_star, z_star, tol: float = numerics.DEFAULT_RANK_TOL):
    """Return ``(holds, rank_X, rank_Z)`` for an optimal reduced pair.

    Both ``|tr(X Z)|`` and the objective gap ``|Z_00 - sum_{i>0} X_ii|`` must be
    at most ``1e-6 * N``; for feasible pairs the two coincide.

    Raises:
        ComplementarityGapTooLarge: if the pair is not optimal.
    """
    x = numerics.symmetrize(x_star)
    z = numerics.symmetrize(z_star)
    if x.shape != z.shape:
        raise ValueError("matrices must share a dimension")
    dim = x.shape[0]
    trace_gap = abs(float(np.sum(x * z)))
    obj_gap = abs(float(z[0, 0] - (np.trace(x) - x[0, 0])))
    if max(trace_gap, obj_gap) > 1e-6 * dim:
        raise ComplementarityGapTooLarge(f"tr(XZ) = {trace_gap:.3e}, objective gap {obj_gap:.3e}")
    rx = numerics.rank(x, tol)
    rz = numerics.rank(z, tol)
    return rx + rz == dim, rx, rz


def dual_nondegenerate(problem: sdp.SdpProblem, z, tol: float = 1e-6) -> int:
    """Dimension of ``{M sym : M Z = 0, <M, A_i> = 0 for all i}`` for a generic SDP.

    Zero means ``z`` is dual nondegenerate, hence the primal optimum is unique.
    """
    z = numerics.symmetrize(z)
    dim = z.shape[0]
    iu = np.triu_indices(dim)
    cols = []
    for a, b in zip(*iu):
        m = np.zeros((dim, dim))
        m[a, b] = m[b, a] = 1.0
        cols.append(np.concatenate([(m @ z).ravel(), [np.sum(m * c) for c in problem.A]]))
    return numerics.nullspace(np.column_stack(cols), tol=tol).shape[1]


@dataclass(frozen=True)
class ClassifyOptions:
    solver: sdp.SolverOptions = field(default_factory=sdp.SolverOptions)
    rank_tol: float = numerics.DEFAULT_RANK_TOL
    null_tol: float = 1e-6
    overlap_tol: float = 1e-6
    retries: int = 5
    seed: int = 0

    def tolerances(self) -> dict:
        return {
            "gap_tol": self.solver.gap_tol,
            "feas_tol": self.solver.feas_tol,
            "rank_tol": self.rank_tol,
            "null_tol": self.null_tol,
            "overlap_tol": self.overlap_tol,
        }


@dataclass
class CertificationVerdict:
    verdict: Verdict
    graph: exgraph.ExclusivityGraph
    theta: float
    nchv_bound: int
    rank_X: int
    rank_Z: int
    strict_complementarity: bool
    null_dim: int
    overlaps_nonzero: bool
    retries_used: int
    tolerances: dict
    notes: list = field(default_factory=list)
    seed: int = 0
    theta_solution: sdp.ThetaSolution | None = field(default=None, repr=False, compare=False)
    nondegeneracy: NondegeneracyReport | None = field(default=None, repr=False, compare=False)

    @property
    def exit_code(self) -> int:
        return self.verdict.exit_code

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "graph": {"name": self.graph.label(), **self.graph.to_dict()},
            "verdict": self.verdict.value,
            "theta": self.theta,
            "nchv_bound": self.nchv_bound,
            "rank_X": self.rank_X,
            "rank_Z": self.rank_Z,
            "strict_complementarity": self.strict_complementarity,
            "null_dim": self.null_dim,
            "overlaps_nonzero": self.overlaps_nonzero,
            "retries_used": self.retries_used,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "notes": list(self.notes),
        }


def classify(g: exgraph.ExclusivityGraph, opts: ClassifyOptions | None = None) -> CertificationVerdict:
    """Decide whether the canonical inequality of ``g`` self-tests its optimum.

    Raises:
        SdpError: solver failures propagate; no verdict is produced.
    """
    opts = opts or ClassifyOptions()
    sol = sdp.solve_theta(g, opts.solver)
    x, z = sol.X, sol.Z
    alpha = exgraph.independence_number(g)
    notes = []
    if sol.theta - alpha <= 1e-6:
        notes.append(NO_GAP_NOTE)
    overlaps = bool(np.min(np.diag(x)[1:]) > opts.overlap_tol)
    report = nondegeneracy_system(g, z, opts.null_tol)
    sc, rx, rz = strict_complementarity(x, z, opts.rank_tol)

    def verdict(v, rep, sc_, rz_, used):
        return CertificationVerdict(
            verdict=v, graph=g, theta=sol.theta, nchv_bound=alpha, rank_X=rx, rank_Z=rz_,
            strict_complementarity=sc_, null_dim=rep.null_dim, overlaps_nonzero=overlaps,
            retries_used=used, tolerances=opts.tolerances(), notes=notes, seed=opts.seed,
            theta_solution=sol, nondegeneracy=rep,
        )

    if report.null_dim == 0:
        if overlaps:
            return verdict(Verdict.SELF_TESTABLE, report, sc, rz, 0)
        notes.append("dual nondegenerate but a state-projector overlap is below overlap_tol")
        return verdict(Verdict.INCONCLUSIVE, report, sc, rz, 0)
    if sc:
        return verdict(Verdict.NOT_SELF_TESTABLE, report, sc, rz, 0)

    used = 0
    for attempt, z_alt in sdp.iter_alternate_duals(
        g, z, opts.seed, x_star=x, attempts=opts.retries, opts=opts.solver
    ):
        used = attempt + 1
        rep_alt = nondegeneracy_system(g, z_alt, opts.null_tol)
        sc_alt, _, rz_alt = strict_complementarity(x, z_alt, opts.rank_tol)
        if rep_alt.null_dim == 0 and overlaps:
            notes.append(f"certified with alternate dual from attempt {attempt}")
            return verdict(Verdict.SELF_TESTABLE, rep_alt, sc_alt, rz_alt, used)
        if sc_alt and rep_alt.null_dim > 0:
            notes.append(f"strict complementarity found with alternate dual from attempt {attempt}")
            return verdict(Verdict.NOT_SELF_TESTABLE, rep_alt, sc_alt, rz_alt, used)
    notes.append("degenerate dual without strict complementarity; alternate duals exhausted")
    return verdict(Verdict.INCONCLUSIVE, report, sc, rz, max(used, opts.retries))

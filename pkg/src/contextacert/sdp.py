"""Dense SDP solver and the Lovasz theta formulations built on it.

Standard form (maximization)::

    max <C, X>  s.t.  <A_i, X> = b_i,  X PSD
    min b^T y   s.t.  Z = sum_i y_i A_i - C PSD

The solver is a primal-dual path-following method with the Nesterov-Todd
scaling, a dense Cholesky factorization of the Schur complement, and
Mehrotra predictor-corrector steps. Problems here are tiny (side length a few
dozen), so everything is dense numpy.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from contextacert import numerics
from contextacert.errors import (
    DualRepairFailed,
    MaxIterExceeded,
    NotHermitian,
    NumericalBreakdown,
)
from contextacert.exgraph import ExclusivityGraph

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    SOLVED = "Solved"
    MAX_ITER = "MaxIter"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolverOptions:
    """Interior-point settings.

    ``init_scale`` multiplies the default starting scaling
    ``1 + max|b_i| + ||C||_F``; changing it gives an independent central-path
    start for uniqueness smoke tests.

    ``min_centering`` is a floor on the centering parameter. Keeping iterates
    near the central path makes the final pair accurate to O(mu) even on
    degenerate problems, where uncentered Mehrotra steps leave errors of order
    sqrt(mu) along the optimal face. Rank and nullspace decisions need that.
    """

    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    seed: int = 0
    init_scale: float = 1.0
    min_centering: float = 0.3

    def __post_init__(self):
        if not (self.gap_tol > 0 and self.feas_tol > 0 and self.init_scale > 0):
            raise ValueError("tolerances and init_scale must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 <= self.min_centering < 1.0:
            raise ValueError("min_centering must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "gap_tol": self.gap_tol,
            "feas_tol": self.feas_tol,
            "max_iter": self.max_iter,
            "seed": self.seed,
            "init_scale": self.init_scale,
            "min_centering": self.min_centering,
        }


@dataclass
class SdpProblem:
    C: np.ndarray
    A: list
    b: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=np.float64)
        self.A = [np.asarray(a, dtype=np.float64) for a in self.A]
        self.b = np.asarray(self.b, dtype=np.float64).ravel()
        n = self.C.shape[0]
        if self.C.shape != (n, n):
            raise ValueError("objective must be square")
        if not self.A:
            raise ValueError("constraint list must be non-empty")
        if len(self.A) != len(self.b):
            raise ValueError("need one right-hand side per constraint")
        for a in [self.C, *self.A]:
            if a.shape != (n, n):
                raise ValueError("all data matrices must share the same dimension")
            if not np.all(np.isfinite(a)):
                raise ValueError("non-finite problem data")
            if not np.allclose(a, a.T, rtol=0, atol=1e-14):
                raise ValueError("data matrices must be symmetric")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("non-finite right-hand side")

    @property
    def dim(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return len(self.A)

    def constraint_matrix(self) -> np.ndarray:
        return np.stack([a.ravel() for a in self.A])


@dataclass
class SdpSolution:
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    primal_obj: float
    dual_obj: float
    gap: float
    primal_residual: float
    dual_residual: float
    min_eig_X: float
    min_eig_Z: float
    status: Status
    iterations: int
    dropped_constraints: tuple = ()

    def diagnostics(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "primal_obj": self.primal_obj,
            "dual_obj": self.dual_obj,
            "gap": self.gap,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "min_eig_X": self.min_eig_X,
            "min_eig_Z": self.min_eig_Z,
            "dropped_constraints": list(self.dropped_constraints),
        }


# -- presolve ---------------------------------------------------------------

def _independent_rows(amat, b, tol=1e-9):
    """Greedy Gram-Schmidt selection of linearly independent constraint rows.

    Returns kept indices and the max inconsistency of dropped right-hand sides.
    """
    basis = []
    kept = []
    for i, row in enumerate(amat):
        r = row.copy()
        for q in basis:
            r -= (q @ r) * q
        for q in basis:  # second pass for stability
            r -= (q @ r) * q
        nr = np.linalg.norm(r)
        if nr > tol * max(1.0, np.linalg.norm(row)):
            basis.append(r / nr)
            kept.append(i)
    inconsistency = 0.0
    if len(kept) < len(amat):
        coef, *_ = np.linalg.lstsq(amat[kept].T, amat.T, rcond=None)
        predicted = coef.T @ b[kept]
        inconsistency = float(np.max(np.abs(predicted - b)))
    return kept, inconsistency


# -- interior point ---------------------------------------------------------

def _max_step(chol_lower, delta):
    """Largest alpha with ``L L^T + alpha * delta`` PSD (inf if unbounded)."""
    linv = np.linalg.inv(chol_lower)
    m = linv @ delta @ linv.T
    lam = np.linalg.eigvalsh(0.5 * (m + m.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def solve(p: SdpProblem, opts: SolverOptions | None = None) -> SdpSolution:
    """Solve a standard-form SDP by the NT predictor-corrector method.

    Linearly dependent constraints are removed first (their multipliers are
    reported as zero). The returned status is ``MaxIter`` when the iteration cap
    is reached; the best iterate is returned either way.

    Raises:
        NumericalBreakdown: when the Schur complement or an iterate loses
            positive definiteness beyond repair.
    """
    opts = opts or SolverOptions()
    n = p.dim
    amat_full = p.constraint_matrix()
    kept, inconsistency = _independent_rows(amat_full, p.b)
    dropped = tuple(i for i in range(p.m) if i not in set(kept))
    bscale = 1.0 + float(np.linalg.norm(p.b))
    if inconsistency > 1e-8 * bscale:
        log.warning("dependent constraints have inconsistent right-hand sides (%.3e)", inconsistency)
        nan = np.full((n, n), np.nan)
        return SdpSolution(nan, np.full(p.m, np.nan), nan, math.nan, math.nan, math.inf,
                           inconsistency, math.nan, math.nan, math.nan, Status.INFEASIBLE, 0, dropped)
    amat = amat_full[kept]
    b = p.b[kept]
    m = len(kept)
    cmin = -p.C  # internal minimization objective
    cnorm = 1.0 + float(np.linalg.norm(p.C))

    def a_op(x):
        return amat @ x.ravel()

    def at_op(y):
        return (y @ amat).reshape(n, n)

    xi = opts.init_scale * (1.0 + float(np.max(np.abs(b))) + float(np.linalg.norm(p.C)))
    x = xi * np.eye(n)
    z = xi * np.eye(n)
    y = np.zeros(m)  # internal multipliers: A^T y + Z = -C
    status = Status.MAX_ITER
    it = 0
    eye = np.eye(n)

    for it in range(opts.max_iter + 1):
        rp = b - a_op(x)
        rd = cmin - z - at_op(y)
        pobj = float(np.sum(p.C * x))
        dobj = -float(b @ y)
        comp = float(np.sum(x * z))
        gap = max(abs(comp), abs(pobj - dobj))
        pinf = float(np.linalg.norm(rp)) / bscale
        dinf = float(np.linalg.norm(rd)) / cnorm
        if gap <= opts.gap_tol and pinf <= opts.feas_tol and dinf <= opts.feas_tol:
            status = Status.SOLVED
            break
        if it == opts.max_iter:
            break
        if max(np.abs(x).max(), np.abs(y).max() if m else 0.0) > 1e12:
            status = Status.INFEASIBLE
            break
        try:
            lx = np.linalg.cholesky(x)
            lz = np.linalg.cholesky(z)
        except np.linalg.LinAlgError:
            raise NumericalBreakdown(f"iterate lost positive definiteness at iteration {it}") from None
        u, d, vt = np.linalg.svd(lz.T @ lx)
        g = lx @ vt.T / np.sqrt(d)  # G with G^-1 X G^-T = G^T Z G = diag(d)
        ginv = (np.sqrt(d)[:, None] * vt) @ np.linalg.inv(lx)
        w = g @ g.T
        waw = np.stack([(w @ a.reshape(n, n) @ w).ravel() for a in amat])
        schur = amat @ waw.T
        schur = 0.5 * (schur + schur.T)
        try:
            chol = np.linalg.cholesky(schur)
        except np.linalg.LinAlgError:
            try:
                chol = np.linalg.cholesky(schur + 1e-13 * np.trace(schur) / m * np.eye(m))
            except np.linalg.LinAlgError:
                raise NumericalBreakdown(f"Schur complement not positive definite at iteration {it}") from None

        wrdw = w @ rd @ w

        def direction(rc):
            rhs = rp - a_op(rc) + a_op(wrdw)
            dy = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            dz = rd - at_op(dy)
            dz = 0.5 * (dz + dz.T)
            dx = rc - w @ dz @ w
            return 0.5 * (dx + dx.T), dy, dz

        mu = comp / n
        dx, dy, dz = direction(-x)
        ap = min(1.0, _max_step(lx, dx))
        ad = min(1.0, _max_step(lz, dz))
        mu_aff = float(np.sum((x + ap * dx) * (z + ad * dz))) / n
        expon = max(1.0, 3.0 * min(ap, ad) ** 2)
        sigma = min(1.0, max(opts.min_centering, max(mu_aff / mu, 0.0) ** expon)) if mu > 0 else 0.0

        dxs = ginv @ dx @ ginv.T
        dzs = g.T @ dz @ g
        rhs_s = 2.0 * sigma * mu * eye - 2.0 * np.diag(d * d) - (dxs @ dzs + dzs @ dxs)
        s = rhs_s / (d[:, None] + d[None, :])
        rc = g @ s @ g.T
        dx, dy, dz = direction(0.5 * (rc + rc.T))

        gamma = 0.9 + 0.09 * min(ap, ad)
        ap = min(1.0, gamma * _max_step(lx, dx))
        ad = min(1.0, gamma * _max_step(lz, dz))
        x = x + ap * dx
        x = 0.5 * (x + x.T)
        y = y + ad * dy
        z = z + ad * dz
        z = 0.5 * (z + z.T)

    y_full = np.zeros(p.m)
    y_full[kept] = -y
    return SdpSolution(
        X=x,
        y=y_full,
        Z=z,
        primal_obj=pobj,
        dual_obj=dobj,
        gap=gap,
        primal_residual=pinf,
        dual_residual=dinf,
        min_eig_X=float(np.linalg.eigvalsh(x)[0]),
        min_eig_Z=float(np.linalg.eigvalsh(z)[0]),
        status=status,
        iterations=it,
        dropped_constraints=dropped,
    )


# -- Lovasz theta -----------------------------------------------------------

def _sym_unit(n, i, j):
    e = np.zeros((n, n))
    if i == j:
        e[i, i] = 1.0
    else:
        e[i, j] = e[j, i] = 0.5
    return e


def build_theta_primal(g: ExclusivityGraph) -> SdpProblem:
    """Theta primal on ``(1+n) x (1+n)`` matrices.

    Constraint order: ``X_00 = 1``; ``X_ii - X_0i = 0`` for ``i = 1..n``;
    ``X_ij = 0`` for each edge in ``g.edges`` order.
    """
    dim = g.n + 1
    c = np.diag([0.0] + [1.0] * g.n)
    mats = [_sym_unit(dim, 0, 0)]
    rhs = [1.0]
    for i in range(1, dim):
        mats.append(_sym_unit(dim, i, i) - _sym_unit(dim, 0, i))
        rhs.append(0.0)
    for i, j in g.edges:
        mats.append(_sym_unit(dim, i, j))
        rhs.append(0.0)
    return SdpProblem(c, mats, np.array(rhs), meta={"kind": "theta", "graph": g.to_dict()})


@dataclass
class ThetaSolution:
    """Optimal primal/dual pair for the theta SDP of ``graph``.

    ``Z`` is in the reduced dual form: ``Z_00 = theta``, ``Z_ii = -(2 Z_0i + 1)``,
    ``Z_ij = 0`` for non-adjacent ``i != j``.
    """

    graph: ExclusivityGraph
    theta: float
    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    solution: SdpSolution
    options: SolverOptions
    repair_shift: float

    @property
    def primal_obj(self):
        return self.solution.primal_obj

    @property
    def dual_obj(self):
        return float(self.Z[0, 0])

    def residuals(self) -> dict:
        """Max violations of the primal/dual structural constraints."""
        g = self.graph
        x, z = self.X, self.Z
        n = g.n
        prim = [abs(x[0, 0] - 1.0)]
        prim += [abs(x[i, i] - x[0, i]) for i in range(1, n + 1)]
        prim += [abs(x[i, j]) for i, j in g.edges]
        dual = [abs(z[i, i] + 2.0 * z[0, i] + 1.0) for i in range(1, n + 1)]
        dual += [abs(z[i, j]) for i, j in g.non_edges()]
        return {
            "primal": max(prim),
            "dual": max(dual) if dual else 0.0,
            "complementarity": float(abs(np.sum(x * z))),
        }

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "theta": self.theta,
            "X": numerics.matrix_to_json(self.X),
            "Z": numerics.matrix_to_json(self.Z),
            "residuals": self.residuals(),
            "repair_shift": self.repair_shift,
            "iterations": self.solution.iterations,
            "solver": self.solution.diagnostics(),
            "options": self.options.to_dict(),
        }


def assemble_reduced_dual(g: ExclusivityGraph, y) -> np.ndarray:
    """Reduced-form dual matrix ``sum y_i A_i - C`` from theta multipliers."""
    n = g.n
    z = np.zeros((n + 1, n + 1))
    z[0, 0] = y[0]
    for i in range(1, n + 1):
        z[i, i] = y[i] - 1.0
        z[0, i] = z[i, 0] = -0.5 * y[i]
    for k, (i, j) in enumerate(g.edges):
        z[i, j] = z[j, i] = 0.5 * y[1 + n + k]
    return z


def repair_reduced_dual(g: ExclusivityGraph, z, max_shift: float = 1e-6):
    """Symmetrize and zero structural zeros; refuse if anything moves > ``max_shift``."""
    z = np.asarray(z, dtype=np.float64)
    fixed = 0.5 * (z + z.T)
    for i, j in g.non_edges():
        fixed[i, j] = fixed[j, i] = 0.0
    for i in range(1, g.n + 1):
        fixed[i, i] = -(2.0 * fixed[0, i] + 1.0)
    shift = float(np.max(np.abs(fixed - z)))
    if shift > max_shift:
        raise DualRepairFailed(f"dual repair moved an entry by {shift:.3e} > {max_shift:.1e}")
    return fixed, shift


def _repair_primal(g, x, max_shift=1e-6):
    fixed = 0.5 * (x + x.T)
    fixed[0, 0] = 1.0
    for i in range(1, g.n + 1):
        avg = 0.5 * (fixed[i, i] + fixed[0, i])
        fixed[i, i] = fixed[0, i] = fixed[i, 0] = avg
    for i, j in g.edges:
        fixed[i, j] = fixed[j, i] = 0.0
    shift = float(np.max(np.abs(fixed - x)))
    if shift > max_shift:
        raise DualRepairFailed(f"primal repair moved an entry by {shift:.3e} > {max_shift:.1e}")
    return fixed, shift


def solve_theta(g: ExclusivityGraph, opts: SolverOptions | None = None) -> ThetaSolution:
    """Solve the theta SDP and return a structurally exact primal/dual pair.

    Raises:
        MaxIterExceeded: if the solver stops before meeting the tolerances.
        DualRepairFailed: if projecting onto the structural constraints would
            move any entry by more than 1e-6.
    """
    opts = opts or SolverOptions()
    sol = solve(build_theta_primal(g), opts)
    if sol.status is not Status.SOLVED:
        raise MaxIterExceeded(f"theta solve for {g.label()} ended with status {sol.status.value}", sol)
    x, xshift = _repair_primal(g, sol.X)
    z_from_y = assemble_reduced_dual(g, sol.y)
    # the multipliers and the PSD slack iterate must agree up to the dual residual
    mismatch = float(np.max(np.abs(z_from_y - sol.Z)))
    if mismatch > 1e-6:
        raise DualRepairFailed(f"dual multipliers disagree with slack iterate by {mismatch:.3e}")
    z, zshift = repair_reduced_dual(g, z_from_y)
    theta = float(np.trace(x) - x[0, 0])
    return ThetaSolution(g, theta, x, z, sol.y, sol, opts, max(xshift, zshift, mismatch))


# -- complex SDPs -------------------------------------------------------------

@dataclass
class ComplexSdpProblem:
    """``max <C, X>_C s.t. <A_i, X>_C = b_i`` over Hermitian PSD ``X``."""

    C: np.ndarray
    A: list
    b: np.ndarray

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=np.complex128)
        self.A = [np.asarray(a, dtype=np.complex128) for a in self.A]
        self.b = np.asarray(self.b, dtype=np.float64).ravel()
        for a in [self.C, *self.A]:
            if a.shape != self.C.shape or a.shape[0] != a.shape[1]:
                raise ValueError("data matrices must be square and share one dimension")
            if not np.allclose(a, a.conj().T, rtol=0, atol=1e-12):
                raise NotHermitian("complex SDP data must be Hermitian")

    @property
    def dim(self):
        return self.C.shape[0]


def complexify(p: SdpProblem) -> ComplexSdpProblem:
    return ComplexSdpProblem(p.C.astype(np.complex128), [a.astype(np.complex128) for a in p.A], p.b.copy())


def realify_matrix(h) -> np.ndarray:
    """``[[Re H, -Im H], [Im H, Re H]]``; PSD exactly when Hermitian ``H`` is."""
    h = np.asarray(h, dtype=np.complex128)
    if not np.allclose(h, h.conj().T, rtol=0, atol=1e-12):
        raise NotHermitian("matrix is not Hermitian")
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def realify(p: ComplexSdpProblem) -> SdpProblem:
    """Real SDP of doubled size equivalent to the complex SDP ``p``.

    Variable ``W = [[X, Y], [Y^T, Z]]``. Each complex constraint contributes
    the block-diagonal real-part constraint and the off-diagonal constraint
    ``<Re A_i, Y> = 0``; the block structure is enforced by ``X = Z`` and
    ``Y + Y^T = 0``. Dependent rows are removed later by the solver presolve.
    """
    if not isinstance(p, ComplexSdpProblem):
        raise TypeError("realify expects a ComplexSdpProblem")
    n = p.dim
    big = 2 * n
    c = 0.5 * realify_matrix(p.C)
    mats, rhs = [], []
    for a, bi in zip(p.A, p.b):
        mats.append(0.5 * realify_matrix(a))
        rhs.append(bi)
        off = np.zeros((big, big))
        off[:n, n:] = 0.5 * a.real
        off[n:, :n] = 0.5 * a.real
        mats.append(off)
        rhs.append(0.0)
    for i in range(n):
        for j in range(i, n):
            k = np.zeros((big, big))
            k[i, j] += 0.5
            k[j, i] += 0.5
            k[n + i, n + j] -= 0.5
            k[n + j, n + i] -= 0.5
            mats.append(k)
            rhs.append(0.0)
            s = np.zeros((big, big))
            s[i, n + j] += 0.5
            s[n + j, i] += 0.5
            s[j, n + i] += 0.5
            s[n + i, j] += 0.5
            mats.append(s)
            rhs.append(0.0)
    return SdpProblem(c, mats, np.array(rhs), meta={"kind": "realified", "complex_dim": n})


def unrealify(w) -> np.ndarray:
    """Recover the Hermitian matrix from a realified primal variable."""
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0] // 2
    re = 0.5 * (w[:n, :n] + w[n:, n:])
    im = 0.5 * (w[n:, :n] - w[:n, n:])
    return re + 1j * im


# -- searching the dual optimal face ----------------------------------------------

def _svec_basis(k):
    basis = []
    for a in range(k):
        for b in range(a, k):
            e = np.zeros((k, k))
            e[a, b] = e[b, a] = 1.0
            basis.append(e)
    return basis


def dual_face_parametrization(g: ExclusivityGraph, x_star, rank_tol=numerics.DEFAULT_RANK_TOL):
    """Linear description of the reduced dual optimal face.

    Every optimal reduced dual is ``Q W Q^T`` with ``Q`` an orthonormal basis of
    ``ker X*`` (for a maximal-rank primal optimum) and ``W`` PSD. Returns
    ``(Q, basis, L, c)`` where the reduced-dual linear constraints read
    ``L @ params = c`` with ``W = sum params_k basis_k``.
    """
    x_star = numerics.symmetrize(x_star)
    spec = numerics.eigh(x_star, rank_tol=rank_tol)
    q = spec.eigenvectors[:, spec.rank:]
    k = q.shape[1]
    basis = _svec_basis(k)
    images = [q @ e @ q.T for e in basis]
    rows, rhs = [], []
    for i, j in g.non_edges():
        rows.append([img[i, j] for img in images])
        rhs.append(0.0)
    for i in range(1, g.n + 1):
        rows.append([img[i, i] + 2.0 * img[0, i] for img in images])
        rhs.append(-1.0)
    lmat = np.array(rows, dtype=float).reshape(len(rows), len(basis))
    return q, basis, lmat, np.array(rhs)


def iter_alternate_duals(
    g: ExclusivityGraph,
    z_star,
    seed: int = 0,
    *,
    x_star=None,
    attempts: int = 5,
    opts: SolverOptions | None = None,
    min_distance: float = 1e-6,
):
    """Yield ``(attempt, Z')`` for optimal reduced duals distinct from ``z_star``.

    Each attempt maximizes a seeded random linear objective over the dual
    optimal face. Nothing is yielded when the face is a single point.
    """
    opts = opts or SolverOptions()
    if x_star is None:
        x_star = solve_theta(g, opts).X
    z_star = np.asarray(z_star, dtype=float)
    q, basis, lmat, c = dual_face_parametrization(g, x_star)
    if not basis:
        return
    w0, *_ = np.linalg.lstsq(lmat, c, rcond=None)
    if np.max(np.abs(lmat @ w0 - c)) > 1e-6:
        log.info("dual face of %s appears empty at this tolerance", g.label())
        return
    if numerics.nullspace(lmat, tol=1e-8).shape[1] == 0:
        return
    consistent = lmat @ w0
    k = q.shape[1]
    iu = np.triu_indices(k)
    mats = []
    for row in lmat:
        a = np.zeros((k, k))
        a[iu] = row
        a = 0.5 * (a + a.T)  # off-diagonal params count twice in <A, W>
        mats.append(a)
    inner = replace(opts, max_iter=min(opts.max_iter, 100))
    for attempt in range(attempts):
        rng = np.random.default_rng([seed, attempt])
        r = rng.standard_normal((k, k))
        r = 0.5 * (r + r.T)
        r /= np.linalg.norm(r)
        try:
            sol = solve(SdpProblem(r, mats, consistent), inner)
        except NumericalBreakdown:
            continue
        if sol.status is not Status.SOLVED:
            continue
        cand = q @ numerics.symmetrize(sol.X) @ q.T
        try:
            cand, _ = repair_reduced_dual(g, cand)
        except DualRepairFailed:
            continue
        if np.linalg.norm(cand - z_star) > min_distance:
            yield attempt, cand


def alternate_dual(g: ExclusivityGraph, z_star, seed: int = 0, **kwargs):
    """First optimal reduced dual found away from ``z_star``, or None."""
    for _, cand in iter_alternate_duals(g, z_star, seed, **kwargs):
        return cand
    return None

"""Simulated contextuality experiments on real rank-one realizations.

A realization is a unit state ``s`` and unit vectors ``u_i`` (projectors
``u_i u_i^T``) that are orthogonal along graph edges; event probabilities are
``<u_i, s>^2``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from contextacert import __version__, canonical, certifier, exgraph, numerics, sdp
from contextacert.errors import (
    DimensionMismatch,
    InvalidRealization,
    LengthMismatch,
    NotSelfTestable,
    RepairDiverged,
)
from contextacert.kernels import orthogonalize_pairs

EDGE_TOL = 1e-10
NORM_TOL = 1e-10
DEFAULT_LEVELS = (1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2)
FIT_WINDOW = (1e-6, 1e-2)


def _edge_pairs(g):
    return np.array([(i - 1, j - 1) for i, j in g.edges], dtype=np.int64).reshape(-1, 2)


@dataclass
class QuantumRealization:
    """State and projector vectors; rows of ``projectors`` are the ``u_i``."""

    state: np.ndarray
    projectors: np.ndarray
    graph: exgraph.ExclusivityGraph
    edge_tol: float = EDGE_TOL
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=float).ravel()
        self.projectors = np.atleast_2d(np.asarray(self.projectors, dtype=float))
        if self.projectors.shape != (self.graph.n, self.state.shape[0]):
            raise InvalidRealization(
                f"expected {self.graph.n} vectors of dimension {self.state.shape[0]}, got {self.projectors.shape}"
            )
        if self.validate:
            diag = check_realization(self, self.edge_tol)
            if not diag["passed"]:
                raise InvalidRealization(
                    f"norm deviation {diag['norm_deviation']:.2e}, edge residual {diag['edge_residual']:.2e}"
                )

    @property
    def d(self) -> int:
        return self.state.shape[0]

    @property
    def n(self) -> int:
        return self.graph.n

    @classmethod
    def from_ensemble(cls, ens: canonical.CanonicalEnsemble) -> "QuantumRealization":
        return cls(ens.state.copy(), ens.projector_vectors.copy(), ens.graph())

    def rotated(self, q) -> "QuantumRealization":
        """Apply an orthogonal matrix to every vector."""
        q = np.asarray(q, dtype=float)
        return QuantumRealization(q @ self.state, self.projectors @ q.T, self.graph, self.edge_tol)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "d": self.d,
            "state": self.state.tolist(),
            "projectors": self.projectors.tolist(),
        }


@dataclass(frozen=True)
class Behaviour:
    p: tuple

    def __post_init__(self):
        if any(not (-1e-12 <= x <= 1.0 + 1e-12) for x in self.p):
            raise ValueError("probabilities must lie in [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    def edge_violation(self, g: exgraph.ExclusivityGraph) -> float:
        """Largest ``p_i + p_j - 1`` over edges (non-positive when consistent)."""
        p = self.as_array()
        return max((p[i - 1] + p[j - 1] - 1.0 for i, j in g.edges), default=-1.0)


def check_realization(r: QuantumRealization, tol: float = EDGE_TOL) -> dict:
    """Norm and edge-orthogonality diagnostics; never raises."""
    norms = np.concatenate([[np.linalg.norm(r.state)], np.linalg.norm(r.projectors, axis=1)])
    norm_dev = float(np.max(np.abs(norms - 1.0)))
    pairs = _edge_pairs(r.graph)
    if len(pairs):
        edge = float(np.max(np.abs(np.einsum("ij,ij->i", r.projectors[pairs[:, 0]], r.projectors[pairs[:, 1]]))))
    else:
        edge = 0.0
    return {"edge_residual": edge, "norm_deviation": norm_dev, "passed": edge <= tol and norm_dev <= NORM_TOL}


def behaviour(r: QuantumRealization) -> Behaviour:
    """Event probabilities ``<u_i, s>^2``.

    Raises:
        InvalidRealization: if ``r`` fails its invariants.
    """
    diag = check_realization(r, r.edge_tol)
    if not diag["passed"]:
        raise InvalidRealization(f"invalid realization: {diag}")
    p = np.clip((r.projectors @ r.state) ** 2, 0.0, 1.0)
    return Behaviour(tuple(float(x) for x in p))


def violation(p: Behaviour, w: exgraph.WeightVector | None = None) -> float:
    """Weighted sum ``sum_i w_i p_i`` (all-ones weights by default)."""
    arr = p.as_array()
    if w is None:
        return float(arr.sum())
    weights = w.as_array()
    if len(weights) != len(arr):
        raise LengthMismatch(f"{len(weights)} weights for {len(arr)} events")
    return float(weights @ arr)


def _random_rotation_of(v, angle, rng):
    w = rng.standard_normal(v.shape[0])
    w -= (w @ v) * v
    nw = np.linalg.norm(w)
    if nw < 1e-300:
        return v.copy()
    return math.cos(angle) * v + math.sin(angle) * (w / nw)


def perturb(r: QuantumRealization, level: float, seed) -> QuantumRealization:
    """Rotate every vector by a random angle in ``[0, level]``, then restore edge orthogonality.

    Raises:
        ValueError: if ``level`` is outside ``[0, 0.1]``.
        RepairDiverged: if the pairwise repair does not reach 1e-12 in 100 sweeps.
    """
    if not 0.0 <= level <= 0.1:
        raise ValueError(f"perturbation level must lie in [0, 0.1], got {level}")
    rng = np.random.default_rng(seed)
    state = _random_rotation_of(r.state, rng.uniform(0.0, level), rng)
    state /= np.linalg.norm(state)
    vecs = np.array([_random_rotation_of(v, rng.uniform(0.0, level), rng) for v in r.projectors])
    vecs /= np.linalg.norm(vecs, axis=1)[:, None]
    vecs, sweeps, residual = orthogonalize_pairs(vecs, _edge_pairs(r.graph), 1e-12, 100)
    if sweeps < 0:
        raise RepairDiverged(f"edge repair stalled at residual {residual:.2e}")
    return QuantumRealization(state, vecs, r.graph, r.edge_tol)


def _sign_fixed_rows(r: QuantumRealization, d: int) -> np.ndarray:
    rows = np.vstack([r.state, r.projectors])
    overlaps = r.projectors @ r.state
    rows[1:][overlaps < 0] *= -1.0
    if rows.shape[1] < d:
        rows = np.hstack([rows, np.zeros((rows.shape[0], d - rows.shape[1]))])
    return rows


def align(r_ref: QuantumRealization, r_test: QuantumRealization):
    """Best orthogonal map from ``r_ref`` onto ``r_test`` and the worst projector distance.

    The smaller realization is zero-padded to the larger dimension. Returns
    ``(V, distance)`` with ``distance = max_k ||V P_k V^T - P'_k||_F`` over the
    state and all event projectors.

    Raises:
        DimensionMismatch: if the realizations have different numbers of events.
    """
    if r_ref.n != r_test.n:
        raise DimensionMismatch(f"{r_ref.n} events versus {r_test.n}")
    d = max(r_ref.d, r_test.d)
    a = _sign_fixed_rows(r_ref, d)
    b = _sign_fixed_rows(r_test, d)
    u, _, vt = np.linalg.svd(b.T @ a)
    v = u @ vt
    mapped = a @ v.T
    dist = 0.0
    for x, y in zip(mapped, b):
        dist = max(dist, float(np.linalg.norm(np.outer(x, x) - np.outer(y, y))))
    return v, dist


def random_realization(g: exgraph.ExclusivityGraph, seed, d: int | None = None) -> QuantumRealization:
    """Random valid realization: each vector is orthogonalized against earlier neighbours.

    The default dimension ``d = n`` always leaves room for the constraints.
    """
    d = g.n if d is None else d
    rng = np.random.default_rng(seed)
    state = rng.standard_normal(d)
    state /= np.linalg.norm(state)
    vecs = np.zeros((g.n, d))
    adj = g.adjacency()
    for i in range(g.n):
        v = rng.standard_normal(d)
        earlier = [j for j in range(i) if adj[i, j]]
        if earlier:
            q, _ = np.linalg.qr(vecs[earlier].T)
            for _ in range(2):
                v -= q @ (q.T @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            raise InvalidRealization(f"dimension {d} too small for vertex {i + 1}")
        vecs[i] = v / nv
    return QuantumRealization(state, vecs, g)


def reference_realization(g: exgraph.ExclusivityGraph, opts: sdp.SolverOptions | None = None) -> QuantumRealization:
    """Canonical realization: closed form for holes and anti-holes, else from the theta optimum."""
    try:
        return QuantumRealization.from_ensemble(canonical.canonical_ensemble(g))
    except ValueError:
        pass
    sol = sdp.solve_theta(g, opts)
    rows = numerics.gram_factor(sol.X)
    state = rows[0] / np.linalg.norm(rows[0])
    norms = np.linalg.norm(rows[1:], axis=1)
    if np.any(norms < 1e-8):
        raise InvalidRealization("an event has zero probability at the optimum")
    vecs = rows[1:] / norms[:, None]
    vecs, _, _ = orthogonalize_pairs(vecs, _edge_pairs(g), 1e-12, 100)
    return QuantumRealization(state, vecs, g, edge_tol=1e-8)


# -- robustness ----------------------------------------------------------------

@dataclass
class SweepResult:
    graph: str
    theta: float
    seed: int
    rows: list
    slope: float | None
    constant: float | None
    fitted_points: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["level", "trial", "epsilon", "distance"])
        for row in self.rows:
            writer.writerow([repr(row["level"]), row["trial"], repr(row["epsilon"]), repr(row["distance"])])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "graph": self.graph,
            "theta": self.theta,
            "seed": self.seed,
            "slope": self.slope,
            "constant": self.constant,
            "fitted_points": self.fitted_points,
            "fit_window": list(FIT_WINDOW),
            "rows": self.rows,
        }


def fit_exponent(eps, dist, window=FIT_WINDOW):
    """Least-squares fit ``log dist = r log eps + log C`` over ``eps`` in ``window``."""
    eps = np.asarray(eps, dtype=float)
    dist = np.asarray(dist, dtype=float)
    mask = (eps >= window[0]) & (eps <= window[1]) & (dist > 0)
    if mask.sum() < 2 or np.ptp(np.log(eps[mask])) == 0:
        return None, None, int(mask.sum())
    slope, intercept = np.polyfit(np.log(eps[mask]), np.log(dist[mask]), 1)
    return float(slope), float(math.exp(intercept)), int(mask.sum())


def robustness_sweep(
    g: exgraph.ExclusivityGraph,
    levels=DEFAULT_LEVELS,
    trials: int = 20,
    seed: int = 0,
    *,
    check_verdict: bool = True,
) -> SweepResult:
    """Distance to the canonical realization versus violation deficit.

    Each (level, trial) cell uses its own generator seeded by
    ``(seed, level index, trial)``, so cells are independent and reproducible.

    Raises:
        NotSelfTestable: if ``g`` is not certified self-testable.
    """
    if check_verdict:
        verdict = certifier.classify(g)
        if verdict.verdict is not certifier.Verdict.SELF_TESTABLE:
            raise NotSelfTestable(f"{g.label()} is {verdict.verdict.value}; robustness sweep refused")
    ref = reference_realization(g)
    theta = violation(behaviour(ref))
    rows = []
    for li, level in enumerate(levels):
        for t in range(trials):
            ss = np.random.SeedSequence([seed, li, t])
            pert = perturb(ref, float(level), ss)
            eps = max(theta - violation(behaviour(pert)), 0.0)
            _, dist = align(ref, pert)
            rows.append({"level": float(level), "trial": t, "epsilon": eps, "distance": dist})
    slope, const, npts = fit_exponent([r["epsilon"] for r in rows], [r["distance"] for r in rows])
    return SweepResult(g.label(), theta, seed, rows, slope, const, npts)


# -- certification protocol -------------------------------------------------------

class DeviceKind(str, enum.Enum):
    HONEST = "honest"
    DEPOLARIZING = "depolarizing"
    CLASSICAL = "classical"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DeviceModel:
    """Black-box device. ``assignment`` is a 0/1 tuple for classical devices
    (default: indicator of a maximum independent set)."""

    kind: DeviceKind
    shots_per_event: int = 100_000
    seed: int = 0
    eta: float = 0.0
    assignment: tuple | None = None
    realization: QuantumRealization | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DeviceKind(self.kind))
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.shots_per_event < 1:
            raise ValueError("shots_per_event must be positive")
        if self.kind is DeviceKind.CUSTOM and self.realization is None:
            raise ValueError("custom devices need a realization")

    def true_probabilities(self, g: exgraph.ExclusivityGraph, ref: QuantumRealization) -> np.ndarray:
        if self.kind is DeviceKind.HONEST:
            return behaviour(ref).as_array()
        if self.kind is DeviceKind.DEPOLARIZING:
            return (1.0 - self.eta) * behaviour(ref).as_array() + self.eta / ref.d
        if self.kind is DeviceKind.CUSTOM:
            if self.realization.graph != g:
                raise ValueError("custom realization is for a different graph")
            return behaviour(self.realization).as_array()
        assignment = self.assignment
        if assignment is None:
            chosen = set(exgraph.maximum_independent_set(g))
            assignment = tuple(1 if v in chosen else 0 for v in range(1, g.n + 1))
        if len(assignment) != g.n or any(a not in (0, 1) for a in assignment):
            raise ValueError("classical assignment must be a 0/1 vector with one entry per event")
        if not exgraph.is_independent_set(g, [v + 1 for v, a in enumerate(assignment) if a]):
            raise ValueError("classical assignment must be an independent set")
        return np.asarray(assignment, dtype=float)


@dataclass
class CertificationReport:
    graph: str
    theta: float
    nchv_bound: int
    device: dict
    p_hat: list
    half_width: float
    observed_sum: float
    delta: float
    threshold: float
    accept: bool
    shots: int
    seed: int
    confidence: float

    def to_dict(self) -> dict:
        return {"version": __version__, **{k: getattr(self, k) for k in self.__dataclass_fields__}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def hoeffding_delta(n: int, shots: int, confidence: float) -> float:
    """Union-bound Hoeffding radius for the sum of ``n`` estimated frequencies."""
    return n * math.sqrt(math.log(2.0 * n / (1.0 - confidence)) / (2.0 * shots))


def run_certification(
    g: exgraph.ExclusivityGraph,
    device: DeviceModel,
    confidence: float = 0.99,
    *,
    check_verdict: bool = True,
    reference: QuantumRealization | None = None,
) -> CertificationReport:
    """Sample every event, estimate frequencies and accept iff ``S >= theta - delta``.

    Raises:
        NotSelfTestable: if ``g`` is not certified self-testable.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    if check_verdict:
        verdict = certifier.classify(g)
        if verdict.verdict is not certifier.Verdict.SELF_TESTABLE:
            raise NotSelfTestable(f"{g.label()} is {verdict.verdict.value}; certification refused")
    ref = reference if reference is not None else reference_realization(g)
    theta = violation(behaviour(ref))
    p_true = np.clip(device.true_probabilities(g, ref), 0.0, 1.0)
    rng = np.random.default_rng(device.seed)
    counts = rng.binomial(device.shots_per_event, p_true)
    p_hat = counts / device.shots_per_event
    s = float(p_hat.sum())
    delta = hoeffding_delta(g.n, device.shots_per_event, confidence)
    dev = {"kind": device.kind.value, "eta": device.eta, "seed": device.seed}
    if device.assignment is not None:
        dev["assignment"] = list(device.assignment)
    return CertificationReport(
        graph=g.label(),
        theta=theta,
        nchv_bound=exgraph.independence_number(g),
        device=dev,
        p_hat=[float(x) for x in p_hat],
        half_width=delta / g.n,
        observed_sum=s,
        delta=delta,
        threshold=theta - delta,
        accept=s >= theta - delta,
        shots=device.shots_per_event,
        seed=device.seed,
        confidence=confidence,
    )

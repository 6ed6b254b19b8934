"""Closed-form optimal configurations for odd holes and anti-holes.

Events are indexed 1..n in graphs; closed-form formulas index projectors
j = 0..n-1 and we map j to event j+1. Gram matrices always use subnormalized
vectors ``<u_i, s> u_i`` so that diagonal entries are probabilities.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from contextacert import exgraph, numerics
from contextacert.errors import BadParity, ConstructionInvalid, TooSmall
from contextacert.kernels import orthogonalize_pairs

log = logging.getLogger(__name__)

EDGE_TOL = 1e-10
NORM_TOL = 1e-10
SUM_TOL = 1e-8

_warned = set()


class Family(str, enum.Enum):
    HOLE = "Hole"
    ANTIHOLE = "AntiHole"


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError("n must be an integer")
    if n % 2 == 0:
        raise BadParity(f"n must be odd, got {n}")
    if n < 5:
        raise TooSmall(f"n must be at least 5, got {n}")
    return int(n)


def hole_theta(n: int) -> float:
    """Theta of the odd cycle ``C_n``: ``n cos(pi/n) / (1 + cos(pi/n))``."""
    n = _check_n(n)
    c = math.cos(math.pi / n)
    return n * c / (1.0 + c)


def antihole_theta(n: int) -> float:
    """Theta of the odd anti-cycle: ``(1 + cos(pi/n)) / cos(pi/n)``."""
    n = _check_n(n)
    c = math.cos(math.pi / n)
    return (1.0 + c) / c


@dataclass
class CanonicalEnsemble:
    """State and unit projector vectors of a canonical optimal realization.

    ``source`` records how the vectors were obtained: ``closed_form`` when the
    formula passed verification, otherwise the name of the fallback used.
    """

    n: int
    family: Family
    state: np.ndarray
    projector_vectors: np.ndarray
    theta: float
    source: str = "closed_form"
    notes: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.state.shape[0]

    def graph(self) -> exgraph.ExclusivityGraph:
        return exgraph.cycle(self.n) if self.family is Family.HOLE else exgraph.anticycle(self.n)

    def probabilities(self) -> np.ndarray:
        return (self.projector_vectors @ self.state) ** 2

    def subnormalized(self) -> np.ndarray:
        """Rows ``s, <u_1,s> u_1, ..., <u_n,s> u_n``."""
        overlaps = self.projector_vectors @ self.state
        return np.vstack([self.state, overlaps[:, None] * self.projector_vectors])

    def gram_matrix(self) -> np.ndarray:
        return numerics.gram(self.subnormalized())

    def residuals(self) -> dict:
        v = self.projector_vectors
        g = v @ v.T
        edges = self.graph().edges
        return {
            "state_norm": abs(float(np.linalg.norm(self.state)) - 1.0),
            "norm": float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))),
            "edge": max(abs(float(g[i - 1, j - 1])) for i, j in edges),
            "sum_rule": abs(float(self.probabilities().sum()) - self.theta),
        }

    def verify(self, edge_tol=EDGE_TOL, norm_tol=NORM_TOL, sum_tol=SUM_TOL):
        """Raise ConstructionInvalid unless every ensemble invariant holds."""
        res = self.residuals()
        if max(res["state_norm"], res["norm"]) > norm_tol:
            raise ConstructionInvalid(f"{self.family.value} n={self.n}: vectors not unit (dev {max(res['state_norm'], res['norm']):.2e})")
        if res["edge"] > edge_tol:
            raise ConstructionInvalid(f"{self.family.value} n={self.n}: edge inner product {res['edge']:.2e}")
        if res["sum_rule"] > sum_tol:
            raise ConstructionInvalid(f"{self.family.value} n={self.n}: probabilities sum off by {res['sum_rule']:.2e}")
        return res

    def to_dict(self) -> dict:
        def vec(v):
            return [float(f"{x:.17g}") for x in v]

        return {
            "n": self.n,
            "family": self.family.value,
            "d": self.d,
            "state": vec(self.state),
            "vectors": [vec(v) for v in self.projector_vectors],
            "theta": self.theta,
            "source": self.source,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, obj) -> "CanonicalEnsemble":
        return cls(
            n=int(obj["n"]),
            family=Family(obj["family"]),
            state=np.asarray(obj["state"], dtype=float),
            projector_vectors=np.asarray(obj["vectors"], dtype=float),
            theta=float(obj["theta"]),
            source=obj.get("source", "closed_form"),
            notes=list(obj.get("notes", [])),
        )


# -- holes -------------------------------------------------------------------

def hole_umbrella_vectors(n: int) -> CanonicalEnsemble:
    """Umbrella configuration in R^3 for the odd cycle ``C_n``.

    Spokes ``(cos a, sin a cos phi_j, sin a sin phi_j)`` with
    ``phi_j = j pi (n-1)/n``, so consecutive spokes are a half-turn minus
    ``pi/n`` apart and ``cos^2 a = cos(pi/n) / (1 + cos(pi/n))`` makes them
    orthogonal.
    """
    n = _check_n(n)
    c = math.cos(math.pi / n)
    cos_a = math.sqrt(c / (1.0 + c))
    sin_a = math.sqrt(1.0 / (1.0 + c))
    phi = np.arange(n) * math.pi * (n - 1) / n
    vecs = np.column_stack([np.full(n, cos_a), sin_a * np.cos(phi), sin_a * np.sin(phi)])
    ens = CanonicalEnsemble(n, Family.HOLE, np.array([1.0, 0.0, 0.0]), vecs, hole_theta(n))
    ens.verify(edge_tol=1e-12)
    return ens


def cycle_primal_gram(n: int) -> np.ndarray:
    """Optimal primal matrix for ``C_n`` from the subnormalized umbrella vectors."""
    return hole_umbrella_vectors(n).gram_matrix()


def antihole_dual(n: int) -> np.ndarray:
    """Closed-form dual optimum for the anti-cycle: ``theta_bar * Gram(-v_0, v_1..v_n)``.

    Raises:
        ConstructionInvalid: if the result is not a reduced dual feasible matrix.
    """
    n = _check_n(n)
    rows = hole_umbrella_vectors(n).subnormalized()
    rows[0] = -rows[0]
    z = antihole_theta(n) * numerics.gram(rows)
    z = numerics.symmetrize(z)
    g = exgraph.anticycle(n)
    worst = max(abs(z[i, i] + 2.0 * z[0, i] + 1.0) for i in range(1, n + 1))
    worst = max([worst] + [abs(z[i, j]) for i, j in g.non_edges()])
    if worst > 1e-10:
        raise ConstructionInvalid(f"anti-hole dual violates its linear constraints by {worst:.2e}")
    if numerics.min_eigenvalue(z) < -1e-10:
        raise ConstructionInvalid("anti-hole dual is not PSD")
    return z


def circulant_vector(n: int) -> np.ndarray:
    """First row of the lower-right circulant block of the anti-hole primal optimum."""
    n = _check_n(n)
    th = hole_theta(n)
    u = np.zeros(n)
    u[0] = antihole_theta(n) / n
    u[1] = u[-1] = (n - th) / (2.0 * th * th)
    return u


def antihole_primal_circulant(n: int) -> np.ndarray:
    """Bordered circulant primal optimum for the anti-cycle ``~C_n``."""
    n = _check_n(n)
    x = np.zeros((n + 1, n + 1))
    x[0, 0] = 1.0
    x[0, 1:] = x[1:, 0] = antihole_theta(n) / n
    x[1:, 1:] = numerics.circulant(circulant_vector(n))
    return x


def antihole_circulant_spectrum(n: int) -> dict:
    """Eigenvalues of the circulant block, by closed form and by direct evaluation.

    The closed form is ``1/theta + ((n - theta)/theta^2) cos(2 pi j / n)`` with
    ``theta`` the cycle theta; it vanishes exactly at ``j = (n +- 1)/2``.
    """
    n = _check_n(n)
    th = hole_theta(n)
    j = np.arange(n)
    formula = 1.0 / th + ((n - th) / th**2) * np.cos(2.0 * np.pi * j / n)
    direct = numerics.circulant_eigenvalues(circulant_vector(n))
    spectrum = numerics.eigh(numerics.circulant(circulant_vector(n))).eigenvalues
    return {"formula": formula, "direct": direct, "eigh": spectrum}


def antihole_min_dimension(n: int, tol: float = 1e-10) -> int:
    """Rank of the anti-hole optimum's circulant block, always ``n - 2``."""
    lam = antihole_circulant_spectrum(n)["formula"]
    return int(np.sum(np.abs(lam) > tol))


# -- anti-holes --------------------------------------------------------------

def _antihole_formula_vectors(n):
    c = math.cos(math.pi / n)
    th = antihole_theta(n)
    vecs = np.zeros((n, n - 2))
    for j in range(n):
        vecs[j, 0] = math.sqrt(th / n)
        for m in range(1, (n - 3) // 2 + 1):
            rad = (2.0 * c + (-1) ** (m + 1) * math.cos((m + 1) * math.pi / n)) / (n * c)
            t = (-1) ** (j * (m + 1)) * math.sqrt(rad)
            r = j * (m + 1) * math.pi / n
            vecs[j, 2 * m - 1] = t * math.cos(r)
            vecs[j, 2 * m] = t * math.sin(r)
    return vecs


def _householder_to_e0(s):
    """Orthogonal matrix mapping unit vector ``s`` to ``e_0``."""
    d = len(s)
    e0 = np.zeros(d)
    e0[0] = 1.0
    w = s - e0
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        return np.eye(d)
    w /= nw
    return np.eye(d) - 2.0 * np.outer(w, w)


def ensemble_from_gram(x, family: Family, theta: float, source: str) -> CanonicalEnsemble:
    """Unit-vector ensemble from a subnormalized Gram matrix, with state ``e_0``.

    Edge orthogonality is polished with the pairwise repair kernel.
    """
    n = x.shape[0] - 1
    rows = numerics.gram_factor(numerics.symmetrize(x))
    state = rows[0] / np.linalg.norm(rows[0])
    h = _householder_to_e0(state)
    rows = rows @ h.T
    vecs = rows[1:] / np.linalg.norm(rows[1:], axis=1)[:, None]
    g = exgraph.cycle(n) if family is Family.HOLE else exgraph.anticycle(n)
    pairs = np.array([(i - 1, j - 1) for i, j in g.edges], dtype=np.int64)
    vecs, _, _ = orthogonalize_pairs(vecs, pairs, 1e-14, 100)
    state = np.zeros(rows.shape[1])
    state[0] = 1.0
    return CanonicalEnsemble(n, family, state, vecs, theta, source=source)


def antihole_vectors(n: int, fallback: str | None = "solver") -> CanonicalEnsemble:
    """Anti-hole realization in dimension ``n - 2`` with the state ``e_0``.

    The closed-form projector formula is evaluated and verified first. When
    verification fails, the ensemble is rebuilt from a Gram factorization of
    the primal optimum: a fresh solver run (``fallback="solver"``) or the
    bordered circulant (``fallback="circulant"``). The discrepancy is logged
    and recorded in ``notes``.

    Raises:
        BadParity: for even ``n``.
        ConstructionInvalid: if the formula fails and ``fallback`` is None, or
            the fallback itself fails verification.
    """
    n = _check_n(n)
    th = antihole_theta(n)
    state = np.zeros(n - 2)
    state[0] = 1.0
    ens = CanonicalEnsemble(n, Family.ANTIHOLE, state, _antihole_formula_vectors(n), th)
    try:
        ens.verify()
        return ens
    except ConstructionInvalid as exc:
        if fallback is None:
            raise
        reason = str(exc)
    if fallback == "circulant":
        x = antihole_primal_circulant(n)
    elif fallback == "solver":
        from contextacert.sdp import SolverOptions, solve_theta

        x = solve_theta(exgraph.anticycle(n), SolverOptions(gap_tol=1e-11, feas_tol=1e-11)).X
    else:
        raise ValueError(f"unknown fallback {fallback!r}")
    if n not in _warned:
        _warned.add(n)
        log.warning("closed-form anti-hole vectors failed verification (%s); using %s fallback", reason, fallback)
    out = ensemble_from_gram(x, Family.ANTIHOLE, th, source=f"{fallback}_fallback")
    out.notes.append(f"closed-form projector formula rejected: {reason}")
    if out.d != n - 2:
        raise ConstructionInvalid(f"fallback ensemble has dimension {out.d}, expected {n - 2}")
    out.verify()
    return out


def canonical_ensemble(g: exgraph.ExclusivityGraph, **kwargs) -> CanonicalEnsemble:
    """Canonical ensemble for a graph equal to ``C_n`` or ``~C_n`` (n odd >= 5)."""
    n = g.n
    if n >= 5 and n % 2 == 1:
        if g == exgraph.cycle(n):
            return hole_umbrella_vectors(n)
        if g == exgraph.anticycle(n):
            return antihole_vectors(n, **kwargs)
    raise ValueError(f"no canonical ensemble for {g.label()}")

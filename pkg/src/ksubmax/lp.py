"""Per-iteration distribution LP of the derandomized greedy.

Variables are ``p[s, i]`` (support index ``s``, part ``i``), flattened as
``s * k + (i - 1)``.  For every part ``l`` the *ratio constraint*

    sum_s Pr[s] * ((1 - 1/k) * sum_i p[s, i] * y[s, i] + p[s, l] * y[s, l])
        >= sum_s Pr[s] * y[s, l]

must hold, each ``p[s, :]`` lies on the probability simplex, and an
extreme point of that polytope is found with phase one of the two-phase
simplex method under Bland's pivot rule.

Constraint indices used in ``tight_set``: ratio constraints ``0..k-1``,
simplex equalities ``k..k+m-1``, sign constraints ``k+m+v`` for variable ``v``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import PropertyReport
from .exceptions import InstanceError, LPInfeasibleError, NumericalError

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
SNAP_TOL = 1e-12
MAX_PIVOTS = 100_000

__all__ = [
    "ExtremeLP",
    "BasicSolution",
    "assemble",
    "feasible_witness",
    "find_extreme_point",
    "verify_basic",
    "tight_constraints",
    "dump_lp",
    "load_lp",
]


@dataclass(frozen=True, eq=False)
class ExtremeLP:
    probs: np.ndarray
    gains: np.ndarray
    k: int

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def n_vars(self) -> int:
        return self.m * self.k

    def ratio_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """``(G, b)`` with the ratio constraints written as ``G @ p >= b``."""
        m, k = self.m, self.k
        c = 1.0 - 1.0 / k
        weighted = self.probs[:, None] * self.gains
        G = np.zeros((k, m * k))
        for l in range(k):
            row = c * weighted
            row[:, l] += weighted[:, l]
            G[l] = row.ravel()
        return G, weighted.sum(axis=0)

    def simplex_rows(self) -> np.ndarray:
        m, k = self.m, self.k
        E = np.zeros((m, m * k))
        for s in range(m):
            E[s, s * k:(s + 1) * k] = 1.0
        return E

    def residuals(self, p) -> dict:
        """Largest violation of each constraint group at point ``p`` (shape ``m x k``)."""
        flat = np.asarray(p, dtype=float).ravel()
        G, b = self.ratio_rows()
        return {
            "ratio": float(max(0.0, np.max(b - G @ flat))),
            "simplex": float(np.max(np.abs(self.simplex_rows() @ flat - 1.0))),
            "sign": float(max(0.0, -np.min(flat))),
        }

    def residual(self, p) -> float:
        return max(self.residuals(p).values())

    def to_json(self) -> dict:
        return {"k": self.k, "probs": self.probs.tolist(), "gains": self.gains.tolist()}

    @classmethod
    def from_json(cls, doc) -> "ExtremeLP":
        return assemble(doc["probs"], doc["gains"], k=doc["k"])


@dataclass(frozen=True, eq=False)
class BasicSolution:
    values: np.ndarray
    tight_set: tuple[int, ...]
    support_size: int
    residual: float
    basis: tuple[int, ...] | None = None
    pivots: int = 0

    def __eq__(self, other):
        return (
            isinstance(other, BasicSolution)
            and np.array_equal(self.values, other.values)
            and self.tight_set == other.tight_set
            and self.basis == other.basis
        )


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def assemble(support, gains, k: int | None = None) -> ExtremeLP:
    """Build the LP for one iteration.

    ``support`` is a ``WeightedSupport`` or a sequence of probabilities and
    ``gains[s][i-1]`` is the marginal gain of part ``i`` at support vector ``s``.
    """
    probs = getattr(support, "probs", support)
    probs = np.asarray(probs, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 2 or gains.shape[0] != len(probs):
        raise InstanceError(f"gains shape {gains.shape} does not match {len(probs)} support vectors")
    k = gains.shape[1] if k is None else int(k)
    if gains.shape[1] != k or k < 1:
        raise InstanceError(f"gains have {gains.shape[1]} columns, expected k={k}")
    if len(probs) == 0 or abs(probs.sum() - 1.0) > FEAS_TOL or (probs < 0).any():
        raise InstanceError("support probabilities must be nonnegative and sum to 1")
    if (gains < 0).any():
        raise InstanceError("gains must be nonnegative (monotone input)")
    return ExtremeLP(_readonly(probs), _readonly(gains), k)


def feasible_witness(lp: ExtremeLP, exact: bool = False) -> np.ndarray:
    """Per-vector randomized-greedy probabilities ``p_i ∝ y_i ** (k - 1)``.

    Falls back to part 1 when every gain is zero.  With ``exact=True`` the
    entries are Fractions (object array).
    """
    t = lp.k - 1
    out = []
    for row in lp.gains:
        powers = [Fraction(y) ** t if exact else float(y) ** t for y in row]
        beta = sum(powers)
        if beta != 0:
            out.append([w / beta for w in powers])
        else:
            out.append([1] + [0] * (lp.k - 1))
    return np.array(out, dtype=object if exact else float)


def tight_constraints(lp: ExtremeLP, p, tol: float = FEAS_TOL, snap: float = SNAP_TOL):
    """Indices of constraints tight at ``p`` and the matrix of their rows."""
    flat = np.asarray(p, dtype=float).ravel()
    G, b = lp.ratio_rows()
    E = lp.simplex_rows()
    idx, rows = [], []
    for l in range(lp.k):
        if abs(G[l] @ flat - b[l]) <= tol:
            idx.append(l)
            rows.append(G[l])
    for s in range(lp.m):
        idx.append(lp.k + s)
        rows.append(E[s])
    eye = np.eye(lp.n_vars)
    for v in range(lp.n_vars):
        if abs(flat[v]) <= snap:
            idx.append(lp.k + lp.m + v)
            rows.append(eye[v])
    return tuple(idx), np.array(rows).reshape(len(rows), lp.n_vars)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _phase_one(lp: ExtremeLP):
    m, k = lp.m, lp.k
    nv = m * k
    G, b = lp.ratio_rows()
    E = lp.simplex_rows()
    R = k + m
    N = nv + k  # structural columns: p then surplus
    A = np.zeros((R, N))
    rhs = np.zeros(R)
    for l in range(k):
        scale = np.max(np.abs(G[l])) or 1.0
        A[l, :nv] = G[l] / scale
        A[l, nv + l] = -1.0
        rhs[l] = b[l] / scale
    A[k:, :nv] = E
    rhs[k:] = 1.0
    T = np.zeros((R + 1, N + R + 1))
    T[:R, :N] = A
    T[:R, N:N + R] = np.eye(R)
    T[:R, -1] = rhs
    T[R, :N] = -A.sum(axis=0)
    T[R, -1] = -rhs.sum()
    basis = list(range(N, N + R))

    pivots = 0
    while True:
        entering = next((j for j in range(N) if T[R, j] < -PIVOT_TOL), None)
        if entering is None:
            break
        col = T[:R, entering]
        best, best_ratio = None, None
        for r in range(R):
            if col[r] > PIVOT_TOL:
                ratio = T[r, -1] / col[r]
                if (
                    best is None
                    or ratio < best_ratio - PIVOT_TOL
                    or (abs(ratio - best_ratio) <= PIVOT_TOL and basis[r] < basis[best])
                ):
                    best, best_ratio = r, ratio
        if best is None:
            raise NumericalError("phase one reported an unbounded direction")
        _pivot(T, best, entering)
        basis[best] = entering
        pivots += 1
        if pivots > MAX_PIVOTS:
            raise NumericalError(f"phase one exceeded {MAX_PIVOTS} pivots")

    infeasibility = -T[R, -1]
    if infeasibility > FEAS_TOL * max(1.0, rhs.sum()):
        raise LPInfeasibleError(f"ratio constraints infeasible (phase-one value {infeasibility:.3e})")

    # drive zero-level artificials out of the basis
    for r in range(R):
        if basis[r] >= N:
            j = next(
                (j for j in range(N) if j not in basis and abs(T[r, j]) > PIVOT_TOL), None
            )
            if j is not None:
                _pivot(T, r, j)
                basis[r] = j
                pivots += 1

    x = np.zeros(N)
    for r, j in enumerate(basis):
        if j < N:
            x[j] = T[r, -1]
    return x[:nv], tuple(basis), pivots


def find_extreme_point(lp: ExtremeLP) -> BasicSolution:
    """Basic feasible solution of the iteration LP (deterministic, Bland's rule).

    Raises ``LPInfeasibleError`` if phase one cannot reach zero, which cannot
    happen for nonnegative gains, and ``NumericalError`` if the result is
    outside the 1e-9 residual tolerance.
    """
    m, k = lp.m, lp.k
    if not lp.gains.any():
        p = np.zeros((m, k))
        p[:, 0] = 1.0
        basis, pivots = None, 0
    else:
        flat, basis, pivots = _phase_one(lp)
        if (flat < -FEAS_TOL).any():
            raise NumericalError("negative basic variable", lp.residuals(flat.reshape(m, k)))
        flat[np.abs(flat) < SNAP_TOL] = 0.0
        flat = np.maximum(flat, 0.0)
        p = flat.reshape(m, k)
    residuals = lp.residuals(p)
    residual = max(residuals.values())
    if residual > FEAS_TOL:
        raise NumericalError(f"extreme point residual {residual:.3e} above tolerance", residuals)
    p.setflags(write=False)
    tight, _ = tight_constraints(lp, p)
    return BasicSolution(
        values=p,
        tight_set=tight,
        support_size=int(np.count_nonzero(p > SNAP_TOL)),
        residual=residual,
        basis=basis,
        pivots=pivots,
    )


def verify_basic(lp: ExtremeLP, sol) -> PropertyReport:
    """Re-check feasibility, tight-constraint rank ``>= km`` and support ``<= m + k``.

    ``sol`` may be a ``BasicSolution`` or a bare ``m x k`` array.
    """
    p = np.asarray(getattr(sol, "values", sol), dtype=float)
    residual = lp.residual(p)
    tight, rows = tight_constraints(lp, p)
    rank = int(np.linalg.matrix_rank(rows)) if len(rows) else 0
    support = int(np.count_nonzero(p > SNAP_TOL))
    detail = {"residual": residual, "rank": rank, "n_vars": lp.n_vars,
              "support_size": support, "support_bound": lp.m + lp.k}
    witness = None
    if residual > FEAS_TOL:
        witness = ("infeasible", residual)
    elif rank < lp.n_vars:
        witness = ("rank", rank, lp.n_vars)
    elif support > lp.m + lp.k:
        witness = ("support", support, lp.m + lp.k)
    return PropertyReport(witness is None, witness, lp.k + lp.m + lp.n_vars,
                          "basic_feasible", detail)


def dump_lp(lp: ExtremeLP, path=None) -> str:
    text = json.dumps(lp.to_json())
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_lp(path) -> ExtremeLP:
    return ExtremeLP.from_json(json.loads(Path(path).read_text()))

"""Greedy maximization of monotone k-submodular functions.

``randomized_greedy`` draws each element's part with probability
proportional to ``gain ** (k - 1)``.  ``deterministic_greedy`` replaces the
coin flips by an explicit distribution over partial solutions: after each
element, an extreme point of a small LP decides how every support vector
splits, so the support grows by at most ``k`` per step, and the best final
vector is returned.  Both reach ``k / (2k - 1)`` of the optimum on monotone
input (in expectation for the randomized one).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    GroundSet,
    KVector,
    ValueOracle,
    all_vectors,
    assign,
    project_optimal,
    zero_vector,
)
from .exceptions import InstanceError, InternalInvariantError, SupportOverflowError
from .instances import CountingOracle
from .lp import SNAP_TOL, BasicSolution, ExtremeLP, assemble, find_extreme_point
from .validation import FLOAT_TOL, check_budget, check_kvector, check_permutation, is_exact

__all__ = [
    "AlgorithmConfig",
    "WeightedSupport",
    "RunReport",
    "StepCertificate",
    "greedy_probabilities",
    "randomized_greedy",
    "exact_expectation",
    "deterministic_greedy",
    "brute_force_opt",
    "fill_unassigned",
    "query_bound",
    "approximation_ratio",
    "step_certificate",
    "certificate_check",
    "replay_certificates",
]


def approximation_ratio(k: int) -> Fraction:
    return Fraction(k, 2 * k - 1)


def query_bound(n: int, k: int) -> int:
    """``sum_{j=1..n} k * (j*k + 1)``, the oracle-query bound of the derandomized greedy."""
    return k * (k * n * (n + 1) // 2 + n)


@dataclass(frozen=True)
class AlgorithmConfig:
    """Parameters shared by both greedy variants.

    ``element_order`` lists ground positions (or element names) in processing
    order; ``None`` keeps input order.  ``seed`` only affects the randomized
    variant.
    """

    k: int
    element_order: tuple | None = None
    seed: int | None = None

    @property
    def c(self) -> Fraction:
        return Fraction(self.k - 1, self.k)

    @property
    def t(self) -> int:
        return self.k - 1

    def order(self, ground: GroundSet) -> tuple[int, ...]:
        if self.k != ground.k:
            raise InstanceError(f"config is for k={self.k}, ground set has k={ground.k}")
        order = self.element_order
        if order is not None:
            order = [ground.index(e) if isinstance(e, str) else e for e in order]
        return check_permutation(order, ground.n)


def _config(ground, config):
    return AlgorithmConfig(ground.k) if config is None else config


@dataclass(frozen=True)
class WeightedSupport:
    """A finite distribution over partial solutions, with memoized values."""

    probs: tuple[float, ...]
    vectors: tuple[KVector, ...]
    values: tuple = ()
    iteration: int = 0

    def __len__(self):
        return len(self.vectors)

    @property
    def entries(self) -> list[tuple[float, KVector]]:
        return list(zip(self.probs, self.vectors))

    def expectation(self, f: ValueOracle | None = None) -> float:
        values = self.values if f is None else [f(s) for s in self.vectors]
        return float(sum(p * float(v) for p, v in zip(self.probs, values)))

    def check(self, order: Sequence[int], k: int) -> None:
        """Assert the structural invariants after ``iteration`` steps."""
        j = self.iteration
        if abs(sum(self.probs) - 1.0) > FLOAT_TOL or min(self.probs) <= 0:
            raise InternalInvariantError(f"D_{j} is not a probability distribution")
        if len(set(self.vectors)) != len(self.vectors):
            raise InternalInvariantError(f"D_{j} has duplicate vectors")
        if len(self) > j * k + 1:
            raise SupportOverflowError(f"|D_{j}| = {len(self)} exceeds {j * k + 1}")
        assigned = set(order[:j])
        for s in self.vectors:
            if any((s[e] != 0) != (e in assigned) for e in range(len(s))):
                raise InternalInvariantError(f"{s} does not assign exactly the first {j} elements")


@dataclass
class RunReport:
    algorithm: str
    solution: KVector
    value: object
    total_queries: int
    trace: list[dict] = field(default_factory=list)
    order: tuple[int, ...] = ()
    supports: list[WeightedSupport] = field(default_factory=list)
    lps: list[ExtremeLP] = field(default_factory=list)
    lp_solutions: list[BasicSolution] = field(default_factory=list)

    def to_dict(self, ground: GroundSet | None = None) -> dict:
        solution = ground.mapping(self.solution) if ground else list(self.solution)
        return {
            "algorithm": self.algorithm,
            "solution": solution,
            "value": _number(self.value),
            "total_queries": self.total_queries,
            "trace": self.trace,
        }


def _number(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    if isinstance(v, (np.integer, np.floating)):
        return v.item()
    return v


def greedy_probabilities(gains: Sequence, t: int) -> list:
    """``p_i = y_i ** t / sum_j y_j ** t``, or all mass on part 1 if the sum is zero.

    Exact (Fraction) when the gains are exact.
    """
    exact = is_exact(gains)
    powers = [Fraction(y) ** t if exact else float(y) ** t for y in gains]
    beta = sum(powers)
    if beta == 0:
        return [1] + [0] * (len(gains) - 1)
    return [w / beta for w in powers]


def randomized_greedy(f: ValueOracle, ground: GroundSet, config: AlgorithmConfig | None = None) -> RunReport:
    config = _config(ground, config)
    order = config.order(ground)
    k = ground.k
    cf = CountingOracle(f)
    rng = random.Random(config.seed)
    s = zero_vector(ground.n)
    fs = cf(s)
    trace = []
    for j, e in enumerate(order, 1):
        children = [cf(assign(s, e, i)) for i in range(1, k + 1)]
        probs = greedy_probabilities([v - fs for v in children], config.t)
        u, acc, choice = rng.random(), 0.0, k
        for i, p in enumerate(probs, 1):
            acc += float(p)
            if u < acc:
                choice = i
                break
        # float rounding can leave u >= acc; fall back to the last part with mass
        if float(probs[choice - 1]) == 0:
            choice = max(i for i, p in enumerate(probs, 1) if p > 0)
        s, fs = assign(s, e, choice), children[choice - 1]
        trace.append({
            "j": j,
            "support": 1,
            "queries": cf.query_count,
            "lp_residual": 0.0,
            "min_certificate_margin": None,
        })
    return RunReport("randomized", s, fs, cf.query_count, trace, order)


def exact_expectation(
    f: ValueOracle,
    ground: GroundSet,
    config: AlgorithmConfig | None = None,
    budget: int = 10**6,
):
    """Expected value of ``randomized_greedy`` by expanding all ``k ** n`` outcomes.

    Returns a Fraction when the oracle's values are exact, otherwise a float.
    """
    config = _config(ground, config)
    order = config.order(ground)
    k = ground.k
    check_budget(k ** ground.n, budget, "outcome tree")

    def expand(s, fs, depth):
        if depth == len(order):
            return fs
        e = order[depth]
        children = [f(assign(s, e, i)) for i in range(1, k + 1)]
        probs = greedy_probabilities([v - fs for v in children], config.t)
        return sum(
            p * expand(assign(s, e, i), children[i - 1], depth + 1)
            for i, p in enumerate(probs, 1)
            if p
        )

    s = zero_vector(ground.n)
    result = expand(s, f(s), 0)
    return Fraction(result) if isinstance(result, int) else result


def _best(vectors, values):
    # largest value, ties to the lexicographically smallest vector
    idx = min(range(len(vectors)), key=lambda a: (-values[a], vectors[a]))
    return vectors[idx], values[idx]


def deterministic_greedy(
    f: ValueOracle,
    ground: GroundSet,
    config: AlgorithmConfig | None = None,
    optimum: KVector | None = None,
) -> RunReport:
    """Derandomized greedy; returns the best vector in the final distribution.

    When ``optimum`` (a fully assigned maximizer) is given, every step's
    certificate margin is recorded in the trace.  Certificate evaluations
    are not counted as queries.
    """
    config = _config(ground, config)
    order = config.order(ground)
    k = ground.k
    if optimum is not None:
        optimum = check_kvector(optimum, k, ground.n)
    cf = CountingOracle(f)
    s0 = zero_vector(ground.n)
    support = WeightedSupport((1.0,), (s0,), (cf(s0),), 0)
    report = RunReport("deterministic", s0, support.values[0], 0, order=order, supports=[support])

    for j, e in enumerate(order, 1):
        m = len(support)
        children = [[cf(assign(s, e, i)) for i in range(1, k + 1)] for s in support.vectors]
        gains = np.array(
            [[float(v - fs) for v in row] for row, fs in zip(children, support.values)]
        )
        if gains.min(initial=0.0) < -FLOAT_TOL:
            raise InternalInvariantError(
                f"negative marginal gain {gains.min():.3g} at element {ground.elements[e]}: "
                "input is not monotone"
            )
        gains = np.maximum(gains, 0.0)
        lp = assemble(support.probs, gains, k)
        try:
            sol = find_extreme_point(lp)
        except InternalInvariantError as exc:
            exc.lp = lp
            raise
        if sol.support_size > m + k:
            raise SupportOverflowError(f"LP support {sol.support_size} exceeds m + k = {m + k}")

        probs, vectors, values = [], [], []
        for a, s in enumerate(support.vectors):
            for i in range(1, k + 1):
                p = sol.values[a, i - 1]
                if p > SNAP_TOL:
                    probs.append(support.probs[a] * p)
                    vectors.append(assign(s, e, i))
                    values.append(children[a][i - 1])
        total = sum(probs)
        new = WeightedSupport(tuple(p / total for p in probs), tuple(vectors), tuple(values), j)
        if len(new) > m + k:
            raise SupportOverflowError(f"|D_{j}| = {len(new)} exceeds |D_{j - 1}| + k = {m + k}")
        new.check(order, k)

        margin = None
        if optimum is not None:
            margin = step_certificate(f, optimum, support, new, sol, j, order).margin
        report.trace.append({
            "j": j,
            "support": len(new),
            "queries": cf.query_count,
            "lp_residual": sol.residual,
            "min_certificate_margin": margin,
        })
        report.lps.append(lp)
        report.lp_solutions.append(sol)
        report.supports.append(new)
        support = new

    report.solution, report.value = _best(support.vectors, support.values)
    report.total_queries = cf.query_count
    return report


def brute_force_opt(f: ValueOracle, ground: GroundSet, budget: int = 10**7) -> tuple[KVector, object]:
    """Exact maximizer over all of ``{0..k}^n``; lexicographically smallest among ties."""
    check_budget((ground.k + 1) ** ground.n, budget, "brute force")
    best, best_value = None, None
    for x in all_vectors(ground.n, ground.k):
        v = f(x)
        if best is None or v > best_value:
            best, best_value = x, v
    return best, best_value


def fill_unassigned(x: Sequence[int], part: int = 1) -> KVector:
    """Assign every free element to ``part``; never decreases a monotone ``f``."""
    return tuple(v or part for v in x)


@dataclass(frozen=True)
class StepCertificate:
    """Slack of the per-step inequalities behind the ratio guarantee.

    ``value_gain`` is ``E_{D_j}[f] - E_{D_{j-1}}[f]`` and ``optimum_loss`` is
    ``E_{D_{j-1}}[f(o[s])] - E_{D_j}[f(o[s'])]``; ``margin`` is the smallest
    slack among all checked inequalities (equalities count as ``-|error|``).
    """

    j: int
    margin: float
    value_gain: float
    optimum_loss: float
    slacks: dict


def step_certificate(
    f: ValueOracle,
    o: KVector,
    before: WeightedSupport,
    after: WeightedSupport,
    lp_solution,
    j: int,
    order: Sequence[int] | None = None,
) -> StepCertificate:
    n = len(o)
    order = check_permutation(order, n)
    if 0 in o:
        raise InstanceError("certificate needs a fully assigned optimum; see fill_unassigned")
    p = np.asarray(getattr(lp_solution, "values", lp_solution), dtype=float)
    k = p.shape[1]
    c = 1.0 - 1.0 / k
    e = order[j - 1]
    star = o[e]

    dominance = []  # a[i*] - a[i] <= y[i*] per support vector and part
    identity = []  # f(o[s]) - f(o[s_{e,i}]) == a[i*] - a[i]
    lp_gain = exchange_lhs = loss_bound = 0.0
    before_f = before_o = 0.0
    for a_idx, (pr, s) in enumerate(zip(before.probs, before.vectors)):
        fs = float(f(s))
        y = [float(f(assign(s, e, i))) - fs for i in range(1, k + 1)]
        os_ = project_optimal(o, s)
        r = assign(os_, e, 0)
        fr = float(f(r))
        a = [float(f(assign(r, e, i))) - fr for i in range(1, k + 1)]
        fos = float(f(os_))
        for i in range(1, k + 1):
            drop = a[star - 1] - a[i - 1]
            dominance.append(y[star - 1] - drop)
            moved = fos - float(f(project_optimal(o, assign(s, e, i))))
            identity.append(-abs(moved - drop))
        row = p[a_idx]
        lp_gain += pr * sum(row[i] * y[i] for i in range(k))
        exchange_lhs += pr * sum(row[i] * (a[star - 1] - a[i]) for i in range(k))
        loss_bound += pr * (1.0 - row[star - 1]) * y[star - 1]
        before_f += pr * fs
        before_o += pr * fos

    after_f = sum(pr * float(f(s)) for pr, s in zip(after.probs, after.vectors))
    after_o = sum(pr * float(f(project_optimal(o, s))) for pr, s in zip(after.probs, after.vectors))
    gain = after_f - before_f
    loss = before_o - after_o
    slacks = {
        "dominance": min(dominance),
        "identity": min(identity),
        "exchange": c * lp_gain - exchange_lhs,
        "gain_identity": -abs(gain - lp_gain),
        "loss_bound": loss_bound - loss,
        "step": c * gain - loss,
    }
    slacks = {name: float(v) for name, v in slacks.items()}
    return StepCertificate(j, min(slacks.values()) + 0.0, float(gain), float(loss), slacks)


def certificate_check(f, o, support_before, support_after, lp_solution, j, order=None) -> float:
    """Minimum slack of the per-step certificate; ``>= -1e-9`` on valid runs."""
    return step_certificate(f, o, support_before, support_after, lp_solution, j, order).margin


def replay_certificates(f: ValueOracle, report: RunReport, o: KVector) -> list[StepCertificate]:
    """Certificates for every iteration of a deterministic run."""
    return [
        step_certificate(f, o, report.supports[j - 1], report.supports[j],
                         report.lp_solutions[j - 1], j, report.order)
        for j in range(1, len(report.supports))
    ]

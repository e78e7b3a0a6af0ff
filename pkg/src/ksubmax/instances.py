"""Monotone k-submodular function families, random instances and JSON I/O.

Three families are provided:

``assignment_modular``
    ``f(x) = sum of w(e, x(e))`` over assigned elements.
``separable_coverage``
    each part ``i`` has its own weighting of a shared universe; element ``e``
    covers ``S_e`` and ``f`` sums, per part, the weight of everything covered
    by the elements placed in that part.
``table``
    an explicit value for every vector of ``{0, ..., k}^n``.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .core import (
    GroundSet,
    KVector,
    TableOracle,
    ValueOracle,
    all_vectors,
    check_k_submodular,
    check_monotone,
)
from .exceptions import BudgetExceededError, InstanceError
from .validation import check_budget, check_kvector, check_nonnegative

FAMILIES = ("assignment_modular", "separable_coverage", "table")
DEFAULT_REJECTION_BUDGET = 10**4
TABLE_VALUE_MAX = 100

__all__ = [
    "FAMILIES",
    "Instance",
    "AssignmentModularOracle",
    "SeparableCoverageOracle",
    "CountingOracle",
    "build_assignment_modular",
    "build_separable_coverage",
    "build_table",
    "random_monotone_instance",
    "random_table",
    "wrap_counting",
    "reset_count",
    "instance_to_json",
    "instance_from_json",
    "load_instance",
    "dump_instance",
]


class AssignmentModularOracle:
    def __init__(self, weights: Sequence[Sequence]):
        self.weights = [list(row) for row in weights]

    def __call__(self, x: KVector):
        total = 0
        for e, part in enumerate(x):
            if part:
                total += self.weights[e][part - 1]
        return total


class SeparableCoverageOracle:
    """``f(X_1..X_k) = sum_i w_i(union of S_e for e in X_i)``."""

    def __init__(self, cover_sets: Sequence[Iterable[int]], topic_weights: Sequence[Sequence]):
        self.cover_sets = [frozenset(s) for s in cover_sets]
        self.topic_weights = [list(w) for w in topic_weights]

    def __call__(self, x: KVector):
        covered = [set() for _ in self.topic_weights]
        for e, part in enumerate(x):
            if part:
                covered[part - 1] |= self.cover_sets[e]
        return sum(
            sum(w[u] for u in sorted(c)) for w, c in zip(self.topic_weights, covered)
        )


class _SupportCoverageOracle:
    # weighted coverage of the support, blind to which part an element is in
    def __init__(self, cover_sets, weights):
        self.cover_sets = [frozenset(s) for s in cover_sets]
        self.weights = list(weights)

    def __call__(self, x):
        covered = set()
        for e, part in enumerate(x):
            if part:
                covered |= self.cover_sets[e]
        return sum(self.weights[u] for u in covered)


class CountingOracle:
    """Value-transparent wrapper counting evaluations of ``inner``.

    The counter is guarded by a lock so concurrent evaluation keeps it exact.
    """

    def __init__(self, inner: ValueOracle):
        self.inner = inner
        self.query_count = 0
        self._lock = threading.Lock()

    def __call__(self, x):
        with self._lock:
            self.query_count += 1
        return self.inner(x)

    def reset(self) -> None:
        with self._lock:
            self.query_count = 0


def wrap_counting(oracle: ValueOracle) -> CountingOracle:
    return CountingOracle(oracle)


def reset_count(oracle: CountingOracle) -> None:
    oracle.reset()


@dataclass
class Instance:
    """A ground set, a value oracle and the family description that built it.

    ``spec`` holds the family-specific JSON fields, so that
    ``instance_to_json`` can reproduce the input file.
    """

    ground: GroundSet
    oracle: ValueOracle
    family: str
    spec: dict
    metadata: dict = field(default_factory=dict)
    validated: bool = False

    @property
    def n(self) -> int:
        return self.ground.n

    @property
    def k(self) -> int:
        return self.ground.k

    def __call__(self, x):
        return self.oracle(x)

    def to_table(self, budget: int = 10**7) -> TableOracle:
        if isinstance(self.oracle, TableOracle):
            return self.oracle
        return TableOracle.from_oracle(self.oracle, self.n, self.k, budget)

    def validate(self, budget: int = 10**8) -> bool:
        """Run the monotonicity and k-submodularity checkers; sets ``validated``."""
        table = self.to_table()
        self.validated = bool(
            check_monotone(table, budget).holds and check_k_submodular(table, budget).holds
        )
        return self.validated


def _as_number(v, what):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceError(f"{what} must be a number, got {v!r}")
    return v


def build_assignment_modular(
    weights: Mapping, ground: GroundSet | None = None, k: int | None = None
) -> Instance:
    """Build ``f(x) = sum_e w(e, x(e))``.

    ``weights`` maps ``(element, part)`` to a weight, or maps each element to
    its list of ``k`` weights.  Missing ``(element, part)`` pairs weigh zero.
    """
    if weights and all(isinstance(key, tuple) for key in weights):
        elements = list(dict.fromkeys(str(e) for e, _ in weights))
        k = k or max(int(i) for _, i in weights)
        table = {(str(e), int(i)): w for (e, i), w in weights.items()}
    else:
        elements = [str(e) for e in weights]
        rows = {str(e): list(ws) for e, ws in weights.items()}
        k = k or max(len(r) for r in rows.values())
        table = {(e, i + 1): w for e, r in rows.items() for i, w in enumerate(r)}
    if ground is None:
        ground = GroundSet(tuple(elements), k)
    matrix = [[0] * ground.k for _ in range(ground.n)]
    for (e, i), w in table.items():
        if not 1 <= i <= ground.k:
            raise InstanceError(f"part {i} outside 1..{ground.k}")
        check_nonnegative(_as_number(w, "weight"), f"weight of ({e}, {i})")
        matrix[ground.index(e)][i - 1] = w
    spec = {"weights": {e: list(row) for e, row in zip(ground.elements, matrix)}}
    return Instance(ground, AssignmentModularOracle(matrix), "assignment_modular", spec,
                    validated=True)


def build_separable_coverage(
    cover_sets: Mapping[str, Iterable[str]],
    topic_weights: Sequence[Mapping[str, Any]],
    ground: GroundSet | None = None,
) -> Instance:
    """Build a per-part weighted coverage function.

    ``topic_weights[i]`` weighs the universe for part ``i + 1``; all maps must
    share one key set, which defines the universe.
    """
    if not topic_weights:
        raise InstanceError("need at least one part")
    universe = list(topic_weights[0])
    for w in topic_weights:
        if set(w) != set(universe):
            raise InstanceError("topic weight maps must share the same universe")
        for u, v in w.items():
            check_nonnegative(_as_number(v, "topic weight"), f"weight of {u!r}")
    if ground is None:
        ground = GroundSet(tuple(cover_sets), len(topic_weights))
    if ground.k != len(topic_weights):
        raise InstanceError(f"{len(topic_weights)} topic weight maps for k={ground.k}")
    position = {u: idx for idx, u in enumerate(universe)}
    covers = [frozenset() for _ in range(ground.n)]
    for e, members in cover_sets.items():
        members = list(members)
        unknown = [u for u in members if u not in position]
        if unknown:
            raise InstanceError(f"cover set of {e!r} uses unknown universe elements {unknown}")
        covers[ground.index(e)] = frozenset(position[u] for u in members)
    weights = [[w[u] for u in universe] for w in topic_weights]
    spec = {
        "cover_sets": {e: sorted(universe[u] for u in covers[idx])
                       for idx, e in enumerate(ground.elements)},
        "topic_weights": [dict(w) for w in topic_weights],
    }
    return Instance(ground, SeparableCoverageOracle(covers, weights), "separable_coverage",
                    spec, validated=True)


def build_table(values, ground: GroundSet, validate: bool = False) -> Instance:
    """Table instance; ``values`` maps vectors (tuples or ``"1,0,2"`` keys) to numbers."""
    if isinstance(values, Mapping):
        parsed = {}
        for key, v in values.items():
            x = _parse_key(key) if isinstance(key, str) else key
            parsed[check_kvector(x, ground.k, ground.n)] = _as_number(v, "table value")
        table = TableOracle(ground.n, ground.k, parsed)
    else:
        table = TableOracle(ground.n, ground.k, [_as_number(v, "table value") for v in values])
    if table(tuple([0] * ground.n)) < 0:
        raise InstanceError("table value of the zero vector must be nonnegative")
    spec = {"values": {_format_key(x): v for x, v in table.items()}}
    inst = Instance(ground, table, "table", spec)
    if validate:
        inst.validate()
    return inst


def _parse_key(key: str) -> KVector:
    try:
        return tuple(int(p) for p in key.split(","))
    except ValueError:
        raise InstanceError(f"bad table key {key!r}") from None


def _format_key(x: Sequence[int]) -> str:
    return ",".join(str(v) for v in x)


# -- random instances ---------------------------------------------------------


def _elements(n):
    return tuple(f"e{j}" for j in range(n))


def _random_covers(rng, n, universe_size, max_size=3):
    return [
        sorted(rng.sample(range(universe_size), rng.randint(1, min(max_size, universe_size))))
        for _ in range(n)
    ]


def _random_modular(rng, n, k):
    weights = {f"e{j}": [rng.randint(0, 10) for _ in range(k)] for j in range(n)}
    return build_assignment_modular(weights, GroundSet(_elements(n), k))


def _random_coverage(rng, n, k):
    universe = [f"u{u}" for u in range(rng.randint(n, 2 * n + 2))]
    covers = _random_covers(rng, n, len(universe))
    cover_sets = {f"e{j}": [universe[u] for u in c] for j, c in enumerate(covers)}
    topic_weights = [{u: rng.randint(0, 5) for u in universe} for _ in range(k)]
    return build_separable_coverage(cover_sets, topic_weights, GroundSet(_elements(n), k))


def _random_table_values(rng, n, k):
    # nonnegative integer mix of the modular, separable and support-coverage families
    universe_size = n + 2
    modular = AssignmentModularOracle([[rng.randint(0, 3) for _ in range(k)] for _ in range(n)])
    separable = SeparableCoverageOracle(
        _random_covers(rng, n, universe_size, 2),
        [[rng.randint(0, 3) for _ in range(universe_size)] for _ in range(k)],
    )
    support = _SupportCoverageOracle(
        _random_covers(rng, n, universe_size, 2),
        [rng.randint(0, 3) for _ in range(universe_size)],
    )
    return [modular(x) + separable(x) + support(x) for x in all_vectors(n, k)]


def _passes(table: TableOracle) -> bool:
    return check_monotone(table).holds and check_k_submodular(table).holds


def _random_valid_table(rng, n, k, rejection_budget, perturbations=2):
    check_budget((k + 1) ** (2 * n), 10**8, "table validation")
    for _ in range(rejection_budget):
        values = _random_table_values(rng, n, k)
        if max(values) > TABLE_VALUE_MAX:
            continue
        table = TableOracle(n, k, values)
        if not _passes(table):
            continue
        # local moves keep the sample off the constructive families
        for _ in range(perturbations):
            trial = list(table.values)
            pos = rng.randrange(1, len(trial))
            trial[pos] += rng.choice((-1, 1))
            if 0 <= trial[pos] <= TABLE_VALUE_MAX:
                candidate = TableOracle(n, k, trial)
                if _passes(candidate):
                    table = candidate
        return table
    raise BudgetExceededError(f"no valid table found within {rejection_budget} samples")


def random_monotone_instance(
    seed: int,
    n: int,
    k: int,
    family_mix: str | Sequence[str] = "assignment_modular",
    rejection_budget: int = DEFAULT_REJECTION_BUDGET,
) -> Instance:
    """Deterministic random monotone k-submodular instance.

    ``family_mix`` is a family name or a sequence of names to draw from.
    Table instances are sampled until both monotonicity and k-submodularity
    checks pass, and then carry ``validated=True``.
    """
    rng = random.Random(f"{seed}:{n}:{k}")
    if isinstance(family_mix, str):
        family = family_mix
    else:
        family = rng.choice(list(family_mix))
    if family not in FAMILIES:
        raise InstanceError(f"unknown family {family!r}")
    if family == "assignment_modular":
        inst = _random_modular(rng, n, k)
    elif family == "separable_coverage":
        inst = _random_coverage(rng, n, k)
    else:
        table = _random_valid_table(rng, n, k, rejection_budget)
        inst = build_table(table.values, GroundSet(_elements(n), k))
        inst.validated = True
    inst.metadata = {"seed": seed, "family": family}
    return inst


def random_table(seed: int, n: int, k: int, low: int = 0, high: int = TABLE_VALUE_MAX) -> TableOracle:
    """Arbitrary integer table with ``f(0) = 0``; usually not k-submodular."""
    rng = random.Random(f"table:{seed}:{n}:{k}")
    values = [rng.randint(low, high) for _ in range((k + 1) ** n)]
    values[0] = 0
    return TableOracle(n, k, values)


# -- JSON ---------------------------------------------------------------------


def instance_to_json(inst: Instance) -> dict:
    return {
        "k": inst.k,
        "ground": list(inst.ground.elements),
        "function": {"type": inst.family, **inst.spec},
    }


def instance_from_json(doc: Mapping) -> Instance:
    try:
        k = doc["k"]
        ground = GroundSet(tuple(doc["ground"]), k)
        fn = doc["function"]
        family = fn["type"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: missing {exc}") from None
    if isinstance(k, bool) or not isinstance(k, int):
        raise InstanceError(f"k must be an integer, got {k!r}")
    try:
        if family == "assignment_modular":
            weights = fn["weights"]
            for e, row in weights.items():
                if len(row) != k:
                    raise InstanceError(f"element {e!r} needs {k} weights, got {len(row)}")
            return build_assignment_modular(weights, ground)
        if family == "separable_coverage":
            return build_separable_coverage(fn["cover_sets"], fn["topic_weights"], ground)
        if family == "table":
            return build_table(fn["values"], ground)
    except KeyError as exc:
        raise InstanceError(f"malformed {family} function: missing {exc}") from None
    raise InstanceError(f"unknown function type {family!r}")


def dump_instance(inst: Instance, path=None) -> str:
    text = json.dumps(instance_to_json(inst), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_instance(path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from None
    return instance_from_json(doc)

"""Assignment vectors over ``{0, ..., k}^V`` and exhaustive k-submodularity checks.

A solution is a tuple of ints, one per ground element, where ``0`` means
"unassigned" and ``i >= 1`` puts the element in part ``i``.  All lattice
operations are componentwise on these tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Sequence

import numpy as np

from .exceptions import InstanceError, InternalInvariantError
from .validation import (
    FLOAT_TOL,
    check_budget,
    check_kvector,
    check_part,
    check_same_length,
    is_exact,
)

KVector = tuple[int, ...]
ValueOracle = Callable[[KVector], Any]

DEFAULT_CHECK_BUDGET = 10**8

__all__ = [
    "KVector",
    "ValueOracle",
    "GroundSet",
    "TableOracle",
    "PropertyReport",
    "zero_vector",
    "assign",
    "all_vectors",
    "meet",
    "join",
    "leq",
    "marginal_gain",
    "marginal_profile",
    "project_optimal",
    "check_k_submodular",
    "check_orthant_submodular",
    "check_pairwise_monotone",
    "check_monotone",
    "check_nonnegative",
]


@dataclass(frozen=True)
class GroundSet:
    """Ordered ground set ``V`` together with the number of parts ``k``.

    The element order fixed here is the default processing order
    ``e(1), ..., e(n)`` of the greedy algorithms.
    """

    elements: tuple[str, ...]
    k: int

    def __post_init__(self):
        elements = tuple(str(e) for e in self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise InstanceError("ground set must be nonempty")
        if len(set(elements)) != len(elements):
            raise InstanceError(f"duplicate element identifiers in {elements}")
        if int(self.k) < 1:
            raise InstanceError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return len(self.elements)

    def index(self, element: str) -> int:
        try:
            return self.elements.index(element)
        except ValueError:
            raise InstanceError(f"unknown element {element!r}") from None

    def vector(self, mapping: Mapping[str, int]) -> KVector:
        """Build a vector from ``{element: part}``; missing elements stay unassigned."""
        x = [0] * self.n
        for e, part in mapping.items():
            x[self.index(e)] = check_part(part, self.k)
        return tuple(x)

    def mapping(self, x: Sequence[int]) -> dict[str, int]:
        x = check_kvector(x, self.k, self.n)
        return {e: v for e, v in zip(self.elements, x)}


def zero_vector(n: int) -> KVector:
    return (0,) * n


def assign(x: KVector, e: int, i: int) -> KVector:
    """Return ``x`` with coordinate ``e`` set to ``i``."""
    return x[:e] + (i,) + x[e + 1:]


def all_vectors(n: int, k: int) -> Iterator[KVector]:
    """Every vector of ``{0, ..., k}^n`` in lexicographic order."""
    return itertools.product(range(k + 1), repeat=n)


def meet(x: Sequence[int], y: Sequence[int]) -> KVector:
    check_same_length(x, y)
    return tuple(a if a == b else 0 for a, b in zip(x, y))


def join(x: Sequence[int], y: Sequence[int]) -> KVector:
    check_same_length(x, y)
    out = []
    for a, b in zip(x, y):
        if b == 0 or b == a:
            out.append(a)
        elif a == 0:
            out.append(b)
        else:
            out.append(0)
    return tuple(out)


def leq(x: Sequence[int], y: Sequence[int]) -> bool:
    """Partial order: every part of ``x`` is contained in the same part of ``y``."""
    check_same_length(x, y)
    return all(a == 0 or a == b for a, b in zip(x, y))


def marginal_gain(f: ValueOracle, x: KVector, e: int, i: int, fx=None):
    """Gain of putting unassigned element ``e`` into part ``i`` of ``x``.

    Pass ``fx = f(x)`` when it is already known to save one oracle query.
    """
    if x[e] != 0:
        raise InstanceError(f"element {e} is already assigned to part {x[e]}")
    if i < 1:
        raise InstanceError(f"part must be >= 1, got {i}")
    if fx is None:
        fx = f(x)
    return f(assign(x, e, i)) - fx


def marginal_profile(f: ValueOracle, x: KVector, e: int, k: int, fx=None) -> list:
    """All ``k`` gains ``[gain(e, 1), ..., gain(e, k)]``; ``k`` or ``k + 1`` queries."""
    if fx is None:
        fx = f(x)
    return [marginal_gain(f, x, e, i, fx) for i in range(1, k + 1)]


def project_optimal(o: Sequence[int], s: Sequence[int]) -> KVector:
    """``(o join s) join s``: ``s`` wherever ``s`` is assigned, ``o`` elsewhere."""
    return join(join(o, s), s)


class TableOracle:
    """Value oracle backed by an explicit table over all of ``{0, ..., k}^n``.

    ``values`` is either a mapping from vectors to values or a sequence in
    lexicographic vector order.
    """

    def __init__(self, n: int, k: int, values):
        self.n = int(n)
        self.k = int(k)
        size = (self.k + 1) ** self.n
        if isinstance(values, Mapping):
            table = [None] * size
            for x, v in values.items():
                x = check_kvector(x, self.k, self.n)
                table[self._code(x)] = v
            missing = [i for i, v in enumerate(table) if v is None]
            if missing:
                raise InstanceError(f"table is missing {len(missing)} of {size} vectors")
        else:
            table = list(values)
            if len(table) != size:
                raise InstanceError(f"table has {len(table)} entries, expected {size}")
        self.values = table

    def _code(self, x: Sequence[int]) -> int:
        code = 0
        for v in x:
            code = code * (self.k + 1) + v
        return code

    def __call__(self, x: Sequence[int]):
        return self.values[self._code(x)]

    def items(self) -> Iterator[tuple[KVector, Any]]:
        return zip(all_vectors(self.n, self.k), self.values)

    @classmethod
    def from_oracle(cls, f: ValueOracle, n: int, k: int, budget: int = 10**7) -> "TableOracle":
        check_budget((k + 1) ** n, budget, "tabulation")
        return cls(n, k, [f(x) for x in all_vectors(n, k)])

    def __eq__(self, other):
        return (
            isinstance(other, TableOracle)
            and (self.n, self.k, self.values) == (other.n, other.k, other.values)
        )

    def __repr__(self):
        return f"TableOracle(n={self.n}, k={self.k})"


@dataclass
class PropertyReport:
    """Outcome of an exhaustive property check.

    ``witness`` is ``None`` exactly when ``holds`` is true.
    """

    holds: bool
    witness: tuple | None = None
    checks_performed: int = 0
    property: str = ""
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "holds": self.holds,
            "witness": _jsonable(self.witness),
            "checks_performed": self.checks_performed,
            **({"detail": _jsonable(self.detail)} if self.detail else {}),
        }


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (tuple, list)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)


# -- vectorized enumeration ---------------------------------------------------


class _Enumeration:
    """Digit matrix and value array for a table, in code (lexicographic) order."""

    def __init__(self, table: TableOracle, budget: int):
        if not isinstance(table, TableOracle):
            raise InstanceError("property checkers need a TableOracle; use TableOracle.from_oracle")
        n, k = table.n, table.k
        check_budget((k + 1) ** (2 * n), budget, "exhaustive pair check")
        self.n, self.k = n, k
        self.N = (k + 1) ** n
        self.powers = np.array([(k + 1) ** (n - 1 - d) for d in range(n)], dtype=np.int64)
        self.digits = np.array(list(all_vectors(n, k)), dtype=np.int64).reshape(self.N, n)
        self.exact = is_exact(table.values)
        if self.exact and all(isinstance(v, int) for v in table.values):
            self.vals = np.array(table.values, dtype=np.int64)
        elif self.exact:
            self.vals = np.array(table.values, dtype=object)
        else:
            self.vals = np.array(table.values, dtype=np.float64)
        self.tol = 0 if self.exact else FLOAT_TOL
        self.table = table

    def vector(self, code: int) -> KVector:
        return tuple(int(v) for v in self.digits[code])

    def deltas(self):
        """``delta[x, e, i-1]`` and a validity mask (``x(e) == 0``)."""
        N, n, k = self.N, self.n, self.k
        free = self.digits == 0
        delta = np.zeros((N, n, k), dtype=self.vals.dtype)
        codes = np.arange(N)
        for e in range(n):
            rows = codes[free[:, e]]
            for i in range(1, k + 1):
                delta[rows, e, i - 1] = self.vals[rows + i * self.powers[e]] - self.vals[rows]
        return delta, free

    def chunks(self, width: int):
        rows = max(1, (1 << 22) // max(1, width * self.n))
        for start in range(0, self.N, rows):
            yield start, min(self.N, start + rows)

    def leq_block(self, lo: int, hi: int) -> np.ndarray:
        dx = self.digits[lo:hi, None, :]
        dy = self.digits[None, :, :]
        return np.all((dx == 0) | (dx == dy), axis=2)


def _less(a, b, tol) -> np.ndarray:
    """Elementwise ``a < b - tol`` that works on object arrays too."""
    out = (a - b) < -tol if tol else (a < b)
    return np.asarray(out, dtype=bool)


def _replayed(holds_fn: Callable[[], bool], name: str, witness) -> None:
    if holds_fn():
        raise InternalInvariantError(f"{name} witness {witness} does not replay as a violation")


def check_k_submodular(table: TableOracle, budget: int = DEFAULT_CHECK_BUDGET) -> PropertyReport:
    """Check ``f(x) + f(y) >= f(x meet y) + f(x join y)`` over all ordered pairs."""
    en = _Enumeration(table, budget)
    tol = en.tol
    for lo, hi in en.chunks(en.N):
        dx = en.digits[lo:hi, None, :]
        dy = en.digits[None, :, :]
        m = np.where(dx == dy, dx, 0)
        j = np.where((dy == 0) | (dy == dx), dx, np.where(dx == 0, dy, 0))
        mc = m @ en.powers
        jc = j @ en.powers
        lhs = en.vals[lo:hi, None] + en.vals[None, :]
        rhs = en.vals[mc] + en.vals[jc]
        bad = _less(lhs, rhs, tol)
        if bad.any():
            a, b = np.argwhere(bad)[0]
            x, y = en.vector(lo + a), en.vector(b)
            f = table
            _replayed(
                lambda: f(x) + f(y) >= f(meet(x, y)) + f(join(x, y)) - tol,
                "k-submodularity",
                (x, y),
            )
            return PropertyReport(False, (x, y), en.N * en.N, "k_submodular")
    return PropertyReport(True, None, en.N * en.N, "k_submodular")


def check_orthant_submodular(table: TableOracle, budget: int = DEFAULT_CHECK_BUDGET) -> PropertyReport:
    """Check that gains do not increase along the partial order.

    For every ``x <= y``, element ``e`` unassigned in ``y`` and part ``i``:
    ``gain(x, e, i) >= gain(y, e, i)``.  Witness is ``(x, y, e, i)``.
    """
    en = _Enumeration(table, budget)
    delta, free = en.deltas()
    tol, performed = en.tol, 0
    for lo, hi in en.chunks(en.N):
        order = en.leq_block(lo, hi)
        for e in range(en.n):
            pairs = order & free[None, :, e]
            count = int(pairs.sum())
            if not count:
                continue
            for i in range(1, en.k + 1):
                performed += count
                gx = delta[lo:hi, e, i - 1][:, None]
                gy = delta[:, e, i - 1][None, :]
                bad = pairs & _less(gx, gy, tol)
                if bad.any():
                    a, b = np.argwhere(bad)[0]
                    x, y = en.vector(lo + a), en.vector(b)
                    f = table
                    _replayed(
                        lambda: leq(x, y) and marginal_gain(f, x, e, i)
                        >= marginal_gain(f, y, e, i) - tol,
                        "orthant submodularity",
                        (x, y, e, i),
                    )
                    return PropertyReport(False, (x, y, e, i), performed, "orthant_submodular")
    return PropertyReport(True, None, performed, "orthant_submodular")


def check_pairwise_monotone(table: TableOracle, budget: int = DEFAULT_CHECK_BUDGET) -> PropertyReport:
    """Check ``gain(x, e, i) + gain(x, e, j) >= 0`` for distinct parts ``i, j``.

    Witness is ``(x, e, i, j)``.
    """
    en = _Enumeration(table, budget)
    delta, free = en.deltas()
    tol, performed = en.tol, 0
    for e in range(en.n):
        rows = np.flatnonzero(free[:, e])
        for i, j in itertools.combinations(range(1, en.k + 1), 2):
            performed += len(rows)
            total = delta[rows, e, i - 1] + delta[rows, e, j - 1]
            bad = _less(total, np.zeros_like(total), tol)
            if bad.any():
                x = en.vector(rows[np.flatnonzero(bad)[0]])
                f = table
                _replayed(
                    lambda: marginal_gain(f, x, e, i) + marginal_gain(f, x, e, j) >= -tol,
                    "pairwise monotonicity",
                    (x, e, i, j),
                )
                return PropertyReport(False, (x, e, i, j), performed, "pairwise_monotone")
    return PropertyReport(True, None, performed, "pairwise_monotone")


def check_monotone(table: TableOracle, budget: int = DEFAULT_CHECK_BUDGET) -> PropertyReport:
    """Check ``f(x) <= f(y)`` for every comparable pair ``x <= y``."""
    en = _Enumeration(table, budget)
    tol, performed = en.tol, 0
    for lo, hi in en.chunks(en.N):
        order = en.leq_block(lo, hi)
        performed += int(order.sum())
        bad = order & _less(en.vals[None, :], en.vals[lo:hi, None], tol)
        if bad.any():
            a, b = np.argwhere(bad)[0]
            x, y = en.vector(lo + a), en.vector(b)
            f = table
            _replayed(lambda: f(x) <= f(y) + tol, "monotonicity", (x, y))
            return PropertyReport(False, (x, y), performed, "monotone")
    return PropertyReport(True, None, performed, "monotone")


def check_nonnegative(table: TableOracle) -> PropertyReport:
    tol = 0 if is_exact(table.values) else FLOAT_TOL
    for count, (x, v) in enumerate(table.items(), 1):
        if v < -tol:
            return PropertyReport(False, (x,), count, "nonnegative")
    return PropertyReport(True, None, len(table.values), "nonnegative")

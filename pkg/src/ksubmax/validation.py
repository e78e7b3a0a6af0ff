"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Iterable, Sequence

from .exceptions import BudgetExceededError, InstanceError

__all__ = [
    "check_kvector",
    "check_same_length",
    "check_permutation",
    "check_budget",
    "check_part",
    "check_nonnegative",
    "is_exact",
    "value_tolerance",
    "check_problem",
]

FLOAT_TOL = 1e-9


def check_kvector(x: Iterable[int], k: int, n: int | None = None) -> tuple[int, ...]:
    """Return ``x`` as a tuple after checking every entry lies in ``{0, ..., k}``."""
    try:
        vec = tuple(int(v) for v in x)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"not an assignment vector: {x!r}") from exc
    if n is not None and len(vec) != n:
        raise InstanceError(f"vector has length {len(vec)}, expected {n}")
    for v in vec:
        if not 0 <= v <= k:
            raise InstanceError(f"entry {v} outside 0..{k} in {vec}")
    return vec


def check_same_length(x: Sequence[int], y: Sequence[int]) -> None:
    if len(x) != len(y):
        raise InstanceError(f"dimension mismatch: {len(x)} != {len(y)}")


def check_part(i: int, k: int) -> int:
    if not 1 <= i <= k:
        raise InstanceError(f"part {i} outside 1..{k}")
    return int(i)


def check_permutation(order: Sequence[int] | None, n: int) -> tuple[int, ...]:
    """Validate an element order given as positions; ``None`` means input order."""
    if order is None:
        return tuple(range(n))
    order = tuple(int(e) for e in order)
    if sorted(order) != list(range(n)):
        raise InstanceError(f"element order {order} is not a permutation of 0..{n - 1}")
    return order


def check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise BudgetExceededError(f"{what} needs {count} evaluations, budget is {budget}")


def check_nonnegative(value, what: str) -> None:
    if value < 0:
        raise InstanceError(f"{what} must be nonnegative, got {value}")


def is_exact(values: Iterable) -> bool:
    """True when every value is an integer or a Fraction (exact comparison applies)."""
    return all(
        isinstance(v, (numbers.Integral, Fraction)) and not isinstance(v, bool)
        for v in values
    )


def value_tolerance(values: Iterable) -> float:
    return 0.0 if is_exact(values) else FLOAT_TOL


def check_problem(X, ground=None):
    """Split an estimator input into ``(oracle, ground)``.

    ``X`` is either an ``Instance`` (anything with ``oracle`` and ``ground``)
    or a bare callable, in which case ``ground`` is required.
    """
    if hasattr(X, "oracle") and hasattr(X, "ground"):
        if ground is not None and ground != X.ground:
            raise InstanceError("ground set given twice and the two disagree")
        return X.oracle, X.ground
    if not callable(X):
        raise InstanceError(f"expected an Instance or a value oracle, got {type(X).__name__}")
    if ground is None:
        raise InstanceError("a bare value oracle needs an explicit ground set")
    return X, ground

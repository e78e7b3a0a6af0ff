import itertools

import pytest

from ksubmax.algorithms import brute_force_opt, deterministic_greedy, fill_unassigned
from ksubmax.instances import FAMILIES, random_monotone_instance

SUITE_N = (2, 3, 4, 5)
SUITE_K = (1, 2, 3)
SUITE_SEEDS = range(9)


# Reference lattice on explicit set families (X_1, ..., X_k), kept
# deliberately separate from the componentwise vector implementation.
def to_sets(x, k):
    return tuple(frozenset(e for e, v in enumerate(x) if v == i) for i in range(1, k + 1))


def from_sets(sets, n):
    x = [0] * n
    for i, part in enumerate(sets, 1):
        for e in part:
            assert x[e] == 0, "parts must be disjoint"
            x[e] = i
    return tuple(x)


def set_meet(x, y, k):
    X, Y = to_sets(x, k), to_sets(y, k)
    return from_sets([X[i] & Y[i] for i in range(k)], len(x))


def set_join(x, y, k):
    X, Y = to_sets(x, k), to_sets(y, k)
    out = []
    for i in range(k):
        others = frozenset().union(*(X[l] | Y[l] for l in range(k) if l != i))
        out.append((X[i] | Y[i]) - others)
    return from_sets(out, len(x))


def set_leq(x, y, k):
    X, Y = to_sets(x, k), to_sets(y, k)
    return all(X[i] <= Y[i] for i in range(k))


def vectors(n, k):
    return list(itertools.product(range(k + 1), repeat=n))


class SuiteCase:
    def __init__(self, n, k, family, seed):
        self.n, self.k, self.family, self.seed = n, k, family, seed
        self.instance = random_monotone_instance(seed, n, k, family)
        self.f = self.instance.oracle
        self.ground = self.instance.ground
        self.opt_vector, self.opt = brute_force_opt(self.f, self.ground)
        self.total_opt = fill_unassigned(self.opt_vector)
        self.report = deterministic_greedy(self.f, self.ground)

    def __repr__(self):
        return f"{self.family}(n={self.n}, k={self.k}, seed={self.seed})"


@pytest.fixture(scope="session")
def suite():
    return [
        SuiteCase(n, k, family, seed)
        for n in SUITE_N
        for k in SUITE_K
        for family in FAMILIES
        for seed in SUITE_SEEDS
    ]


@pytest.fixture(scope="session")
def small_suite(suite):
    return [case for case in suite if case.n <= 3]

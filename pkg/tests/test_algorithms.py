import itertools
from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ksubmax.algorithms import (
    AlgorithmConfig,
    approximation_ratio,
    brute_force_opt,
    certificate_check,
    deterministic_greedy,
    exact_expectation,
    fill_unassigned,
    greedy_probabilities,
    query_bound,
    randomized_greedy,
    replay_certificates,
)
from ksubmax.core import GroundSet, TableOracle
from ksubmax.estimators import DeterministicGreedyMaximizer, RandomizedGreedyMaximizer
from ksubmax.exceptions import BudgetExceededError, InstanceError, InternalInvariantError
from ksubmax.instances import (
    build_assignment_modular,
    build_separable_coverage,
    random_monotone_instance,
)
from ksubmax.lp import verify_basic


@pytest.fixture
def single():
    return build_assignment_modular({"a": [1, 3]})


def path_probability_expectation(f, n, k):
    """E[f] by summing over complete assignments, probability = product of step choices."""
    total = Fraction(0)
    for z in itertools.product(range(1, k + 1), repeat=n):
        prob = Fraction(1)
        s = [0] * n
        for e in range(n):
            base = f(tuple(s))
            gains = []
            for i in range(1, k + 1):
                s[e] = i
                gains.append(Fraction(f(tuple(s)) - base))
            s[e] = 0
            weights = [g ** (k - 1) for g in gains]
            beta = sum(weights)
            p = weights[z[e] - 1] / beta if beta else Fraction(int(z[e] == 1))
            prob *= p
            s[e] = z[e]
            if not prob:
                break
        total += prob * f(tuple(z))
    return total


class TestConfig:
    def test_parameters(self):
        cfg = AlgorithmConfig(3)
        assert cfg.c == Fraction(2, 3)
        assert cfg.t == 2

    def test_order_resolution(self):
        g = GroundSet(("a", "b", "c"), 2)
        assert AlgorithmConfig(2, ("c", "a", "b")).order(g) == (2, 0, 1)
        assert AlgorithmConfig(2, (1, 2, 0)).order(g) == (1, 2, 0)
        with pytest.raises(InstanceError):
            AlgorithmConfig(2, (0, 0, 1)).order(g)
        with pytest.raises(InstanceError):
            AlgorithmConfig(3).order(g)

    def test_query_bound(self):
        assert query_bound(3, 2) == 30
        assert query_bound(3, 2) == sum(2 * (j * 2 + 1) for j in range(1, 4))
        for n in range(1, 7):
            for k in range(1, 5):
                assert query_bound(n, k) == sum(k * (j * k + 1) for j in range(1, n + 1))


class TestRandomized:
    def test_probabilities(self):
        assert greedy_probabilities([1, 3], 1) == [Fraction(1, 4), Fraction(3, 4)]
        assert greedy_probabilities([0, 0, 0], 2) == [1, 0, 0]
        assert greedy_probabilities([2, 0], 0) == [Fraction(1, 2), Fraction(1, 2)]
        assert greedy_probabilities([1.0, 3.0], 1) == [0.25, 0.75]

    def test_empirical_frequency(self, single):
        picks = [randomized_greedy(single.oracle, single.ground, AlgorithmConfig(2, seed=s)).solution
                 for s in range(4000)]
        frac = sum(x == (2,) for x in picks) / len(picks)
        assert abs(frac - 0.75) < 5 * np.sqrt(0.75 * 0.25 / 4000)

    def test_zero_gains_pick_part_one(self):
        g = GroundSet(("a", "b", "c"), 3)
        for seed in range(20):
            report = randomized_greedy(lambda x: 0, g, AlgorithmConfig(3, seed=seed))
            assert report.solution == (1, 1, 1)

    def test_seed_determinism_and_queries(self):
        inst = random_monotone_instance(1, 5, 3, "separable_coverage")
        cfg = AlgorithmConfig(3, seed=7)
        a = randomized_greedy(inst.oracle, inst.ground, cfg)
        b = randomized_greedy(inst.oracle, inst.ground, cfg)
        assert a.to_dict(inst.ground) == b.to_dict(inst.ground)
        assert a.total_queries == 3 * 5 + 1
        assert a.value == inst(a.solution)
        assert 0 not in a.solution


class TestExactExpectation:
    def test_single_element(self, single):
        e = exact_expectation(single.oracle, single.ground)
        assert e == Fraction(5, 2)
        assert e / 3 >= approximation_ratio(2)

    def test_equal_weights(self):
        inst = build_assignment_modular({e: [4, 4, 4] for e in "abcd"})
        assert exact_expectation(inst.oracle, inst.ground) == 16

    @pytest.mark.parametrize("family", ["assignment_modular", "separable_coverage", "table"])
    @pytest.mark.parametrize("n,k", [(2, 2), (3, 3), (4, 2), (3, 1)])
    def test_matches_path_enumeration(self, family, n, k):
        inst = random_monotone_instance(4, n, k, family)
        assert exact_expectation(inst.oracle, inst.ground) == path_probability_expectation(
            inst.oracle, n, k
        )

    def test_monte_carlo_agrees(self):
        inst = random_monotone_instance(9, 4, 3, "separable_coverage")
        exact = float(exact_expectation(inst.oracle, inst.ground))
        samples = [randomized_greedy(inst.oracle, inst.ground, AlgorithmConfig(3, seed=s)).value
                   for s in range(3000)]
        sem = np.std(samples) / np.sqrt(len(samples))
        assert abs(np.mean(samples) - exact) <= 5 * sem + 1e-12

    def test_float_instance(self):
        inst = build_assignment_modular({"a": [1.5, 0.5], "b": [0.25, 2.0]})
        e = exact_expectation(inst.oracle, inst.ground)
        assert isinstance(e, float)
        assert e == pytest.approx(1.5 * 0.75 + 0.5 * 0.25 + 0.25 * (1 / 9) + 2.0 * (8 / 9))

    def test_budget(self):
        inst = random_monotone_instance(0, 6, 3)
        with pytest.raises(BudgetExceededError):
            exact_expectation(inst.oracle, inst.ground, budget=100)


class TestBruteForce:
    def test_modular(self):
        inst = build_assignment_modular({("a", 1): 1, ("a", 2): 2, ("b", 1): 3, ("b", 2): 1})
        assert brute_force_opt(inst.oracle, inst.ground) == ((2, 1), 5)

    def test_zero_function(self):
        assert brute_force_opt(lambda x: 0, GroundSet(("a", "b"), 3)) == ((0, 0), 0)

    def test_coverage(self):
        inst = build_separable_coverage(
            {"a": ["u1", "u2"], "b": ["u2", "u3"]}, [{"u1": 1, "u2": 1, "u3": 1}] * 2
        )
        x, v = brute_force_opt(inst.oracle, inst.ground)
        assert v == 4 and x in ((1, 2), (2, 1))
        assert x == (1, 2)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            brute_force_opt(lambda x: 0, GroundSet(tuple("abcdef"), 3), budget=1000)


class TestDeterministic:
    def test_single_element(self, single):
        report = deterministic_greedy(single.oracle, single.ground)
        assert report.value == 3
        assert report.solution == (2,)
        probs = dict(zip(report.supports[1].vectors, report.supports[1].probs))
        assert probs[(2,)] >= 5 / 8 - 1e-12

    def test_k1_takes_everything(self):
        inst = random_monotone_instance(2, 4, 1, "separable_coverage")
        report = deterministic_greedy(inst.oracle, inst.ground)
        _, opt = brute_force_opt(inst.oracle, inst.ground)
        assert report.value == opt
        assert 2 * report.value >= opt

    def test_constant_function_ties(self):
        g = GroundSet(("a", "b", "c"), 2)
        report = deterministic_greedy(lambda x: 7, g)
        assert report.solution == (1, 1, 1)
        assert [len(s) for s in report.supports] == [1, 1, 1, 1]

    def test_lexicographic_tie_break(self):
        # both parts equally good for every element
        inst = build_assignment_modular({e: [2, 2] for e in "abc"})
        report = deterministic_greedy(inst.oracle, inst.ground)
        best = max(report.supports[-1].values)
        ties = sorted(s for s, v in zip(report.supports[-1].vectors, report.supports[-1].values)
                      if v == best)
        assert report.solution == ties[0]

    @pytest.mark.parametrize("seed", range(6))
    def test_guarantee_and_invariants(self, seed):
        for family in ("assignment_modular", "separable_coverage", "table"):
            n, k = 4, 1 + seed % 3
            inst = random_monotone_instance(seed, n, k, family)
            report = deterministic_greedy(inst.oracle, inst.ground)
            _, opt = brute_force_opt(inst.oracle, inst.ground)
            assert Fraction(report.value) >= approximation_ratio(k) * opt
            assert report.value == inst(report.solution)
            assert report.total_queries <= query_bound(n, k)
            for j, (prev, cur) in enumerate(zip(report.supports, report.supports[1:]), 1):
                assert len(cur) <= len(prev) + k
                assert len(cur) <= j * k + 1
                assert abs(sum(cur.probs) - 1) <= 1e-9
                assert cur.expectation() >= prev.expectation() - 1e-9
            for lp, sol in zip(report.lps, report.lp_solutions):
                assert verify_basic(lp, sol).holds

    def test_query_count_formula(self):
        inst = random_monotone_instance(3, 5, 3, "separable_coverage")
        report = deterministic_greedy(inst.oracle, inst.ground)
        expected = 1 + sum(3 * len(s) for s in report.supports[:-1])
        assert report.total_queries == expected
        assert [r["queries"] for r in report.trace][-1] == expected

    def test_element_order(self):
        inst = random_monotone_instance(5, 4, 2, "table")
        rev = AlgorithmConfig(2, tuple(reversed(inst.ground.elements)))
        report = deterministic_greedy(inst.oracle, inst.ground, rev)
        assert report.order == (3, 2, 1, 0)
        # after one step only the last element is assigned
        assert all(s[3] and not any(s[:3]) for s in report.supports[1].vectors)
        _, opt = brute_force_opt(inst.oracle, inst.ground)
        assert Fraction(report.value) >= approximation_ratio(2) * opt

    def test_determinism(self):
        inst = random_monotone_instance(8, 5, 3, "table")
        a = deterministic_greedy(inst.oracle, inst.ground)
        b = deterministic_greedy(inst.oracle, inst.ground)
        assert a.to_dict(inst.ground) == b.to_dict(inst.ground)
        assert [s.vectors for s in a.supports] == [s.vectors for s in b.supports]

    def test_non_monotone_input_is_internal_error(self):
        table = TableOracle(1, 2, {(0,): 5, (1,): 3, (2,): 6})
        with pytest.raises(InternalInvariantError):
            deterministic_greedy(table, GroundSet(("a",), 2))

    def test_trace_records(self):
        inst = random_monotone_instance(0, 3, 2, "separable_coverage")
        o, _ = brute_force_opt(inst.oracle, inst.ground)
        report = deterministic_greedy(inst.oracle, inst.ground, optimum=fill_unassigned(o))
        assert [set(r) for r in report.trace] == [
            {"j", "support", "queries", "lp_residual", "min_certificate_margin"}
        ] * 3
        assert all(r["min_certificate_margin"] >= -1e-9 for r in report.trace)


class TestCertificates:
    @pytest.mark.parametrize("seed", range(4))
    def test_margins_and_telescoping(self, seed):
        for family in ("assignment_modular", "separable_coverage", "table"):
            k = 1 + seed % 3
            inst = random_monotone_instance(seed, 4, k, family)
            f = inst.oracle
            o = fill_unassigned(brute_force_opt(f, inst.ground)[0])
            report = deterministic_greedy(f, inst.ground)
            certs = replay_certificates(f, report, o)
            assert min(c.margin for c in certs) >= -1e-9
            c = 1 - 1 / k
            step_gaps = [c * s.value_gain - s.optimum_loss for s in certs]
            final = report.supports[-1].expectation()
            f0 = f(tuple([0] * 4))
            # the per-step gaps telescope into the global inequality
            assert sum(step_gaps) == pytest.approx(c * (final - f0) - (f(o) - final), abs=1e-9)
            assert f(o) <= (2 - 1 / k) * final - c * f0 + 1e-9

    def test_detects_violation(self):
        # monotone but supermodular: only (1, 1) has value
        f = TableOracle(2, 2, {x: int(x == (1, 1)) for x in itertools.product(range(3), repeat=2)})
        g = GroundSet(("a", "b"), 2)
        report = deterministic_greedy(f, g)
        margin = certificate_check(f, (1, 1), report.supports[0], report.supports[1],
                                   report.lp_solutions[0], 1)
        assert margin == pytest.approx(-1.0)

    def test_requires_total_optimum(self, single):
        report = deterministic_greedy(single.oracle, single.ground)
        with pytest.raises(InstanceError):
            certificate_check(single.oracle, (0,), report.supports[0], report.supports[1],
                              report.lp_solutions[0], 1)


class TestEstimators:
    def test_params_and_clone(self):
        est = DeterministicGreedyMaximizer(element_order=("b", "a"), certify=True)
        assert est.get_params() == {"element_order": ("b", "a"), "certify": True}
        twin = clone(est)
        assert twin.get_params() == est.get_params() and twin is not est
        est.set_params(certify=False)
        assert est.certify is False

    def test_fit_attributes(self):
        inst = random_monotone_instance(1, 4, 2, "separable_coverage")
        est = DeterministicGreedyMaximizer(certify=True).fit(inst)
        assert est.value_ == inst(est.solution_)
        assert est.n_queries_ <= query_bound(4, 2)
        assert est.support_sizes_[0] == 1
        assert est.predict() == inst.ground.mapping(est.solution_)
        assert est.score(inst) >= float(approximation_ratio(2))
        assert all(r["min_certificate_margin"] >= -1e-9 for r in est.report_.trace)

    def test_bare_oracle_needs_ground(self):
        inst = random_monotone_instance(1, 3, 2)
        with pytest.raises(InstanceError):
            DeterministicGreedyMaximizer().fit(inst.oracle)
        x = DeterministicGreedyMaximizer().fit_predict(inst.oracle, inst.ground)
        assert len(x) == 3

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            RandomizedGreedyMaximizer().predict()

    def test_randomized_estimator(self):
        inst = random_monotone_instance(2, 4, 3, "table")
        a = RandomizedGreedyMaximizer(random_state=3).fit(inst)
        b = RandomizedGreedyMaximizer(random_state=3).fit(inst)
        assert a.solution_ == b.solution_
        assert a.n_queries_ == 3 * 4 + 1
        assert a.expected_value(inst) == exact_expectation(inst.oracle, inst.ground)

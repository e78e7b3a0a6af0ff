"""Acceptance criteria, one test each; run with ``-s`` to see the PASS/FAIL lines."""

import json
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from ksubmax.algorithms import (
    AlgorithmConfig,
    approximation_ratio,
    deterministic_greedy,
    exact_expectation,
    query_bound,
    randomized_greedy,
    replay_certificates,
)
from ksubmax.cli import main
from ksubmax.core import TableOracle, check_k_submodular, check_orthant_submodular, check_pairwise_monotone
from ksubmax.instances import dump_instance, random_monotone_instance, random_table
from ksubmax.lp import feasible_witness, verify_basic


def report_line(number, name, ok, detail=""):
    print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))


def exact(v):
    return v if isinstance(v, Fraction) else Fraction(v)


def test_suite_size(suite):
    assert len(suite) >= 300


def test_c1_deterministic_ratio(suite):
    start = time.perf_counter()
    failures = [
        case for case in suite
        if exact(case.report.value) < approximation_ratio(case.k) * exact(case.opt)
    ]
    worst = min(exact(c.report.value) / exact(c.opt) for c in suite if c.opt)
    elapsed = time.perf_counter() - start
    ok = not failures
    report_line(1, "deterministic value >= k/(2k-1) * OPT", ok,
                f"{len(suite)} instances, worst ratio {float(worst):.4f}")
    assert ok, failures[:5]
    assert elapsed < 60


def test_c2_randomized_expectation(suite):
    start = time.perf_counter()
    checked, failures = 0, []
    for case in suite:
        if case.k ** case.n > 10**5:
            continue
        checked += 1
        mean = exact(exact_expectation(case.f, case.ground))
        if mean < approximation_ratio(case.k) * exact(case.opt):
            failures.append(case)
    elapsed = time.perf_counter() - start
    ok = not failures and checked > 0
    report_line(2, "E[randomized] >= k/(2k-1) * OPT (exact)", ok, f"{checked} instances, {elapsed:.1f}s")
    assert ok, failures[:5]
    assert elapsed < 120


def test_c3_query_bound(suite):
    over = [c for c in suite if c.report.total_queries > query_bound(c.n, c.k)]
    # the counter must also agree with the closed form 1 + sum_j k |D_{j-1}|
    mismatched = [
        c for c in suite
        if c.report.total_queries != 1 + sum(c.k * len(s) for s in c.report.supports[:-1])
    ]
    ok = not over and not mismatched
    report_line(3, "queries <= k(k n(n+1)/2 + n)", ok)
    assert ok, (over[:5], mismatched[:5])


def test_c4_support_bounds(suite):
    bad = []
    for c in suite:
        sizes = [len(s) for s in c.report.supports]
        for j in range(1, len(sizes)):
            if sizes[j] > j * c.k + 1 or sizes[j] > sizes[j - 1] + c.k:
                bad.append((c, j))
        for lp, sol in zip(c.report.lps, c.report.lp_solutions):
            if sol.support_size > lp.m + lp.k:
                bad.append((c, "lp"))
    ok = not bad
    report_line(4, "|D_j| <= jk+1, |D_j| <= |D_{j-1}|+k, LP support <= m+k", ok)
    assert ok, bad[:5]


def characterization_tables(count=200, seed=0):
    rng = random.Random(seed)
    tables = []
    for idx in range(count):
        n, k = rng.randint(1, 3), rng.randint(1, 3)
        kind = idx % 3
        if kind == 0:
            tables.append(random_monotone_instance(idx, n, k, "table").to_table())
        elif kind == 1:
            tables.append(random_table(idx, n, k))
        else:
            base = random_monotone_instance(idx, n, k, "table").to_table()
            values = list(base.values)
            pos = rng.randrange(1, len(values))
            values[pos] += rng.choice((-5, 5))
            tables.append(TableOracle(n, k, values))
    return tables


def test_c5_characterization():
    agree, outcomes = 0, set()
    tables = characterization_tables()
    for table in tables:
        lhs = check_k_submodular(table).holds
        rhs = check_orthant_submodular(table).holds and check_pairwise_monotone(table).holds
        agree += lhs == rhs
        outcomes.add(lhs)
    ok = agree == len(tables) and outcomes == {True, False}
    report_line(5, "k-submodular <=> orthant submodular and pairwise monotone", ok,
                f"{agree}/{len(tables)} agree, outcomes {sorted(outcomes)}")
    assert ok


def test_c6_certificates(suite):
    worst, count = np.inf, 0
    for c in suite:
        for cert in replay_certificates(c.f, c.report, c.total_opt):
            worst = min(worst, cert.margin)
            count += 1
    ok = worst >= -1e-9
    report_line(6, "per-step certificate slack >= -1e-9", ok, f"{count} steps, min slack {worst:.3g}")
    assert ok


def test_c7_lp_extreme_points(suite):
    bad, witness_worst, count = [], 0.0, 0
    for c in suite:
        for lp, sol in zip(c.report.lps, c.report.lp_solutions):
            count += 1
            rep = verify_basic(lp, sol)
            if not rep.holds:
                bad.append((c, rep.witness))
            witness_worst = max(witness_worst, lp.residual(feasible_witness(lp)))
    ok = not bad and witness_worst <= 1e-9
    report_line(7, "LP solutions are basic feasible; closed-form witness feasible", ok,
                f"{count} LPs, worst witness residual {witness_worst:.3g}")
    assert ok, bad[:5]


def test_c8_determinism(small_suite, tmp_path, capsys):
    ok = True
    for c in small_suite:
        again = deterministic_greedy(c.f, c.ground)
        ok &= json.dumps(again.to_dict()) == json.dumps(c.report.to_dict())
        for seed in (0, 7):
            a = randomized_greedy(c.f, c.ground, AlgorithmConfig(c.k, seed=seed))
            b = randomized_greedy(c.f, c.ground, AlgorithmConfig(c.k, seed=seed))
            ok &= json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    path = tmp_path / "inst.json"
    dump_instance(small_suite[-1].instance, path)
    outputs = []
    for algo in ("det", "rand", "rand"):
        for _ in range(2):
            args = ["solve", "--instance", str(path), "--algorithm", algo, "--seed", "7"]
            outputs.append((main(args), capsys.readouterr().out))
    for a, b in zip(outputs[::2], outputs[1::2]):
        ok &= a == b and a[0] == 0
    report_line(8, "repeated runs are byte-identical", ok)
    assert ok


def test_c9_k_equals_one(suite):
    cases = [c for c in suite if c.k == 1]
    bad = [c for c in cases if 2 * exact(c.report.value) < exact(c.opt)]
    ok = not bad and cases
    report_line(9, "k = 1: deterministic value >= OPT/2", bool(ok), f"{len(cases)} instances")
    assert ok, bad[:5]


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_ratio_constant(k):
    assert approximation_ratio(k) == Fraction(k, 2 * k - 1)

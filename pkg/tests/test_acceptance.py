"""Acceptance criteria 1-9.  Each prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""

import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from partopt.energy import EnergyFunction, Verdict, autarky_to_constraint, join, meet
from partopt.expansion import (
    TruncationRule,
    check_truncation_bound,
    check_truncation_ordering,
    delta,
    move_energy,
    run_expansion,
    truncate,
    verify_fixed_point_dominance,
)
from partopt.flow import minimize_submodular
from partopt.kovtun import improved_run, one_vs_all_all_labels, one_vs_all_runs
from partopt.lp import (
    barwedge,
    check_relax_submodular,
    local_polytope_violations,
    optimal_support,
    phi,
    random_relaxed_labeling,
    roof_dual_autarky,
    solve_lp,
    verify_weak_lp_autarky,
    veebar,
)
from partopt.oracle import check_persistency, enumerate_minimizers
from partopt.problem_io import GeneratorSpec, generate, parse, serialize, write_instance

FIXTURES = Path(__file__).parent / "fixtures"
pytestmark = pytest.mark.slow


def _labeling(rng, space):
    return tuple(int(v) for v in rng.integers(0, space.label_count, space.node_count))


def _kovtun_instances():
    rng = np.random.default_rng(2002)
    return [generate(GeneratorSpec(int(rng.integers(4, 7)), 3, 0.6, 10, "random", 5000 + i)) for i in range(200)]


def criterion_1():
    rng = np.random.default_rng(1)
    bad = 0
    for i in range(500):
        spec = GeneratorSpec(int(rng.integers(1, 7)), int(rng.integers(1, 5)), 0.6, 10, "submodular", 1000 + i)
        f = generate(spec)
        sol = minimize_submodular(f)
        ms = enumerate_minimizers(f)
        bad += (sol.value, sol.x_lowest, sol.x_highest) != (ms.value, ms.meet, ms.join)
    return bad == 0, f"500 submodular instances, {bad} mismatches"


def criterion_2():
    bad = emitted = 0
    for f in _kovtun_instances():
        constraint, autarkies = one_vs_all_all_labels(f)
        checks = [constraint] + [autarky_to_constraint(a) for a in autarkies]
        emitted += sum(len(a.fixed_nodes()) for a in autarkies)
        bad += sum(check_persistency(f, c) != Verdict.STRONG for c in checks)
    return bad == 0, f"200 instances, {emitted} fixed assignments, {bad} violations"


def criterion_3():
    bad_lp = bad_support = bad_value = 0
    for f in _kovtun_instances():
        constraint, autarkies = one_vs_all_all_labels(f)
        bad_lp += sum(not verify_weak_lp_autarky(f, a).holds for a in autarkies)
        pruned = [(s, i) for s in range(f.space.node_count) for i in range(f.space.label_count)
                  if i not in constraint.allowed[s]]
        sol = solve_lp(f)
        support = optimal_support(f, sol)
        bad_support += sum(bool(support[s, i]) for s, i in pruned)
        bad_value += solve_lp(f, forbidden=pruned).value != sol.value
    ok = bad_lp == bad_support == bad_value == 0
    return ok, f"200 instances: {bad_lp} LP-autarky failures, {bad_support} pruned pairs in support, {bad_value} value changes"


def criterion_4():
    rng = np.random.default_rng(4)
    bad = 0
    for i in range(1000):
        f = generate(GeneratorSpec(int(rng.integers(2, 6)), int(rng.integers(2, 5)), 0.6, 5, "random", 4000 + i))
        sp = f.space
        mu, y, x = random_relaxed_labeling(sp, rng), _labeling(rng, sp), _labeling(rng, sp)
        bad += bool(local_polytope_violations(sp, barwedge(sp, mu, y)))
        bad += bool(local_polytope_violations(sp, veebar(sp, mu, y)))
        bad += barwedge(sp, phi(sp, x), y) != phi(sp, meet(x, y))
        bad += veebar(sp, phi(sp, x), y) != phi(sp, join(x, y))
    return bad == 0, f"1000 (mu, y) pairs, {bad} violations"


def criterion_5():
    rng = np.random.default_rng(5)
    bad = 0
    for i in range(500):
        f = generate(GeneratorSpec(int(rng.integers(2, 6)), int(rng.integers(2, 5)), 0.6, 10, "submodular", 6000 + i))
        bad += not check_relax_submodular(f, random_relaxed_labeling(f.space, rng), _labeling(rng, f.space))
    potts = EnergyFunction.from_tables([[0] * 3] * 2, [(0, 1)], [1 - np.eye(3, dtype=np.int64)])
    counter = not check_relax_submodular(potts, phi(potts.space, (0, 2)), (1, 1))
    return bad == 0 and counter, f"500 triples, {bad} violations; Potts counterexample found: {counter}"


def _non_submodular_move(rng, seed):
    while True:
        f = generate(GeneratorSpec(int(rng.integers(2, 9)), 3, 0.6, 10, "random", seed))
        seed += 100_000
        g = move_energy(f, _labeling(rng, f.space), int(rng.integers(0, 3)))
        if any(delta(g, e) > 0 for e in range(f.space.edge_count)):
            return g


def criterion_6():
    rng = np.random.default_rng(6)
    bad = 0
    for i in range(500):
        g = _non_submodular_move(rng, 7000 + i)
        rule = TruncationRule.random(rng, g.g.space.edge_count)
        t = truncate(g, rule)
        bad += any(delta(t, e) > 0 for e in range(g.g.space.edge_count))
        bad += not check_truncation_bound(g, rule)
    bad_order = 0
    for i in range(100):
        g = _non_submodular_move(rng, 9000 + i)
        rule = TruncationRule.random(rng, g.g.space.edge_count)
        bad_order += not check_truncation_ordering(g, TruncationRule(rule.alpha, 0), rule)
        bad_order += not check_truncation_ordering(g, rule, TruncationRule(0, 1))
    return bad == bad_order == 0, f"500 truncations, {bad} violations; 100 rule pairs, {bad_order} ordering violations"


def criterion_7():
    rng = np.random.default_rng(7)
    bad = runs_checked = 0
    for i in range(200):
        f = generate(GeneratorSpec(4, 3, 0.7, 10, "metric", 11000 + i))
        runs = one_vs_all_runs(f)
        rules = [TruncationRule(0, 1)] + [TruncationRule.random(rng, f.space.edge_count) for _ in range(5)]
        for rule in rules:
            res = run_expansion(f, _labeling(rng, f.space), rule)
            bad += not res.fixed_point
            for r in runs:
                runs_checked += 1
                bad += not verify_fixed_point_dominance(f, res.x, r.autarky, r.ordering)
    return bad == 0, f"200 metric instances, {runs_checked} fixed-point checks, {bad} violations"


def criterion_8():
    bad_roof = bad_improved = bad_oracle = gained = 0
    for i in range(200):
        f = generate(GeneratorSpec(2 + i % 7, 2, 0.6, 10, "two-label", 13000 + i))
        constraint, autarkies = one_vs_all_all_labels(f)
        ova = set(constraint.fixed_nodes())
        roof = roof_dual_autarky(f)
        bad_roof += not ova <= set(roof.fixed_nodes())
        improved = [improved_run(f, k) for k in range(2)]
        base = one_vs_all_runs(f)
        for r, b in zip(improved, base):
            bad_improved += not set(b.fixed_nodes) <= set(r.fixed_nodes)
            gained += len(r.fixed_nodes) - len(b.fixed_nodes)
        checks = [constraint, autarky_to_constraint(roof)] + [autarky_to_constraint(r.original_autarky()) for r in improved]
        bad_oracle += sum(check_persistency(f, c) != Verdict.STRONG for c in checks)
    ok = bad_roof == bad_improved == bad_oracle == 0
    return ok, (f"200 two-label instances: roof-dual misses {bad_roof}, improved misses {bad_improved}, "
                f"oracle rejects {bad_oracle}; improved gained {gained} fixes")


def criterion_9():
    fixtures = sorted(FIXTURES.glob("*.pem"))
    bad_trip = sum(parse(serialize(parse(p.read_text(encoding="utf-8")))) != parse(p.read_text(encoding="utf-8"))
                   for p in fixtures)
    bad_pipe = 0
    cmd = [sys.executable, "-m", "partopt"]
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(50):
            path = Path(tmp) / f"i{i}.pem"
            write_instance(generate(GeneratorSpec(4 + i % 3, 3, 0.6, 10, "random", 15000 + i)), str(path))
            kov = subprocess.Popen(cmd + ["kovtun", str(path), "--json"], stdout=subprocess.PIPE)
            ver = subprocess.run(cmd + ["verify-autarky", str(path), "--from-report", "-"],
                                 stdin=kov.stdout, capture_output=True)
            kov.stdout.close()
            bad_pipe += (kov.wait() != 0) + (ver.returncode != 0)
    ok = bad_trip == bad_pipe == 0
    return ok, f"{len(fixtures)} fixtures round-tripped, {bad_trip} mismatches; 50 piped runs, {bad_pipe} non-zero exits"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def _report(n, fn):
    start = time.perf_counter()
    ok, detail = fn()
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail}) [{time.perf_counter() - start:.1f}s]"
    return ok, line


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, line = _report(n, CRITERIA[n - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_report(n, fn) for n, fn in enumerate(CRITERIA, start=1)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)

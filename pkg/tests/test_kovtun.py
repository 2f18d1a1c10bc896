import numpy as np
import pytest
from hypothesis import given, strategies as st

from partopt.energy import (
    Autarky,
    EnergyFunction,
    Ordering,
    Verdict,
    apply_ordering,
    is_submodular,
    meet,
)
from partopt.flow import minimize_submodular
from partopt.kovtun import (
    check_sufficient_conditions,
    improved_one_vs_all,
    improved_run,
    one_vs_all,
    one_vs_all_all_labels,
    one_vs_all_auxiliary,
    one_vs_all_coefficients,
    one_vs_all_ordering,
    one_vs_all_runs,
    sequential_kovtun,
    sequential_run,
    solve_one_vs_all,
)
from partopt.oracle import check_autarky_definition, check_persistency, enumerate_minimizers
from partopt.problem_io import read_instance

from conftest import instances, potts, zero_energy

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"
SIMPLE_TABLE = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=object)


def single_edge(table, k=3):
    return EnergyFunction.from_tables([[0] * k, [0] * k], [(0, 1)], [table])


class TestSufficientConditions:
    def test_zero_h_is_weak(self):
        h = zero_energy(3, 3, [(0, 1)])
        check = check_sufficient_conditions(h, [{0, 2}] * 3)
        assert check.verdict == Verdict.WEAK and check.witness[0] == "c"

    def test_strict_unary(self):
        h = EnergyFunction.from_tables([[0, -1]])
        assert check_sufficient_conditions(h, [{1}]).verdict == Verdict.STRONG

    def test_fails_with_witness(self):
        h = EnergyFunction.from_tables([[0, 1]])
        assert check_sufficient_conditions(h, [{1}]).witness == ("a", 0, 0, 1)

    def test_pairwise_failure(self):
        h = EnergyFunction.from_tables([[0, 0], [0, 0]], [(0, 1)], [[[0, 0], [0, 1]]])
        check = check_sufficient_conditions(h, [{1}, {1}])
        assert check.verdict == Verdict.NOT and check.witness[0] == "b"

    @given(instances(nodes=(2, 5), labels=(2, 4)), st.data())
    def test_one_vs_all_h_at_least_weak(self, f, data):
        target = data.draw(st.integers(0, f.space.top))
        _, aux = one_vs_all_auxiliary(f, target)
        assert check_sufficient_conditions(aux.h, aux.K).verdict >= Verdict.WEAK


class TestAuxiliary:
    def test_hand_coefficients(self):
        assert one_vs_all_coefficients(SIMPLE_TABLE) == (0, 1, 1, -1)
        assert one_vs_all_coefficients(SIMPLE_TABLE, cap=False) == (0, 1, 1, -1)

    def test_zero_table(self):
        assert one_vs_all_coefficients(np.zeros((3, 3), dtype=object)) == (0, 0, 0, 0)

    def test_hand_g_is_submodular(self):
        f = single_edge(SIMPLE_TABLE)
        pi, aux = one_vs_all_auxiliary(f, 2)
        assert pi == Ordering.identity(f.space)
        assert is_submodular(aux.g)
        assert aux.g.pairwise[0].tolist() == [[-1, -1, 1], [-1, -1, 1], [1, 1, 0]]

    def test_ordering_tie_break(self):
        f = EnergyFunction.from_tables([[4, 2, 2, 0]])
        # target 3 goes on top; labels 1 and 2 tie, the smaller index takes 0
        assert one_vs_all_ordering(f, 3).perm == ((1, 0, 2, 3),)

    @given(instances(nodes=(1, 5), labels=(2, 4)), st.data())
    def test_decomposition(self, f, data):
        target = data.draw(st.integers(0, f.space.top))
        pi, aux = one_vs_all_auxiliary(f, target)
        fp = apply_ordering(f, pi)
        assert aux.g + aux.h == fp
        assert is_submodular(aux.g)
        assert all(k == {0, f.space.top} for k in aux.K)
        for e in range(f.space.edge_count):
            a, b, c, d = aux.table.edge(e)
            assert d <= b + c - a
        assert aux.g.unary.tolist() == fp.unary.tolist()
        assert pi.perm[0][target] == f.space.top


class TestSolve:
    def test_dominant_target(self):
        f = EnergyFunction.from_tables([[0, 0, -9]] * 3, [(0, 1), (1, 2)], [np.zeros((3, 3))] * 2)
        _, aux = one_vs_all_auxiliary(f, 2)
        assert solve_one_vs_all(aux) == (2, 2, 2)

    def test_zero(self):
        _, aux = one_vs_all_auxiliary(zero_energy(3, 3, [(0, 1)]), 1)
        assert solve_one_vs_all(aux) == (0, 0, 0)

    @given(instances(nodes=(2, 4), labels=(2, 3)), st.data())
    def test_lowest_minimizer_of_g(self, f, data):
        target = data.draw(st.integers(0, f.space.top))
        _, aux = one_vs_all_auxiliary(f, target)
        x_min = solve_one_vs_all(aux)
        assert x_min == enumerate_minimizers(aux.g).meet
        assert set(x_min) <= {0, f.space.top}

    @given(instances(nodes=(2, 5), labels=(2, 3)), st.data())
    def test_strong_autarky_end_to_end(self, f, data):
        r = one_vs_all(f, data.draw(st.integers(0, f.space.top)))
        fp = apply_ordering(f, r.ordering)
        assert check_autarky_definition(r.aux.g, r.autarky).verdict == Verdict.STRONG
        assert check_autarky_definition(r.aux.h, r.autarky).verdict >= Verdict.WEAK
        assert check_autarky_definition(fp, r.autarky).verdict == Verdict.STRONG


class TestAllLabels:
    def test_diagonal_dominant(self):
        f = read_instance(str(FIXTURES / "diagonal_dominant.pem"))
        c, auts = one_vs_all_all_labels(f)
        assert c.as_lists() == [[0], [1], [2], [0]]
        assert check_persistency(f, c) == Verdict.STRONG
        assert len(auts) == 3

    def test_zero(self):
        c, auts = one_vs_all_all_labels(zero_energy(3, 3, [(0, 1)]))
        assert c.fixed_nodes() == {}
        assert all(a.fixed_nodes() == {} for a in auts)

    @given(instances(nodes=(4, 4), labels=(3, 3)))
    def test_strong_persistency(self, f):
        c, auts = one_vs_all_all_labels(f)
        assert check_persistency(f, c) == Verdict.STRONG
        for a in auts:
            assert check_autarky_definition(f, a).verdict == Verdict.STRONG

    def test_threads_match(self):
        f = read_instance(str(FIXTURES / "random.pem"))
        assert one_vs_all_all_labels(f, workers=3) == one_vs_all_all_labels(f)

    @given(st.integers(0, 2**32 - 1))
    def test_relabeling_equivariant(self, seed):
        rng = np.random.default_rng(seed)
        n, k = 4, 3
        unary = np.array([rng.choice(40, k, replace=False) - 20 for _ in range(n)])
        edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
        tables = [rng.integers(-6, 7, size=(k, k)) for _ in edges]
        f = EnergyFunction.from_tables(unary, edges, tables)
        sigma = rng.permutation(k)
        g = apply_ordering(f, Ordering((tuple(int(v) for v in sigma),) * n))
        c_f, _ = one_vs_all_all_labels(f)
        c_g, _ = one_vs_all_all_labels(g)
        assert c_g.allowed == tuple(frozenset(int(sigma[i]) for i in ks) for ks in c_f.allowed)


class TestSequential:
    def test_submodular_first_pass(self):
        f = read_instance(str(FIXTURES / "submodular.pem"))
        r = sequential_run(f)
        assert r.aux.g == f
        assert r.autarky.x_min == minimize_submodular(f).x_lowest

    def test_zero_vacuous(self):
        a = sequential_kovtun(zero_energy(3, 3, [(0, 1)]))
        assert a.x_min == (0, 0, 0) and a.x_max == (2, 2, 2)

    @given(instances(nodes=(2, 5), labels=(2, 3)), st.data())
    def test_oracle_strong(self, f, data):
        pi = one_vs_all_ordering(f, data.draw(st.integers(0, f.space.top)))
        r = sequential_run(f, pi)
        fp = apply_ordering(f, pi)
        assert r.aux.g + r.aux.h == fp and is_submodular(r.aux.g)
        assert check_sufficient_conditions(r.aux.h, r.aux.K).verdict >= Verdict.WEAK
        assert all(v in k for v, k in zip(r.autarky.x_min, r.aux.K))
        assert check_autarky_definition(fp, r.autarky).verdict == Verdict.STRONG

    def test_potts_three_labels(self, potts3):
        f = potts3.replace(unary=np.array([[0, 5, 5], [5, 5, 0]], dtype=object))
        r = sequential_run(f)
        assert check_autarky_definition(f, r.autarky).verdict == Verdict.STRONG


class TestImproved:
    def test_cap_inactive(self):
        f = single_edge(SIMPLE_TABLE)
        a, b = improved_one_vs_all(f, 2), one_vs_all(f, 2).original_autarky()
        assert (a.x_min, a.x_max) == (b.x_min, b.x_max)

    @given(instances(nodes=(2, 6), labels=(2, 3)), st.data())
    def test_superset_and_sound(self, f, data):
        k = data.draw(st.integers(0, f.space.top))
        base, r = one_vs_all(f, k), improved_run(f, k)
        assert set(base.fixed_nodes) <= set(r.fixed_nodes)
        a = improved_one_vs_all(f, k)
        assert check_autarky_definition(f, a).verdict == Verdict.STRONG

    def test_two_label_gain(self):
        f = read_instance(str(FIXTURES / "two_label.pem"))
        assert one_vs_all(f, 1).fixed_labels() == {1: 1}
        full = {0: 0, 1: 1, 2: 1, 3: 0, 4: 0, 5: 1, 6: 0}
        assert improved_run(f, 0).fixed_labels() == improved_run(f, 1).fixed_labels() == full
        assert enumerate_minimizers(f).minimizers == ((0, 1, 1, 0, 0, 1, 0),)

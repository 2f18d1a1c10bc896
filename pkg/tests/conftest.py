from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from partopt.energy import EnergyFunction, LabelSpace
from partopt.problem_io import GeneratorSpec, generate

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def potts(k: int, w=1) -> np.ndarray:
    return w * (1 - np.eye(k, dtype=np.int64))


@pytest.fixture
def ising():
    # f_1=(0,5), f_2=(3,0), edge costs 2 on disagreement; unique optimum (0,1) at 2
    return EnergyFunction.from_tables([[0, 5], [3, 0]], [(0, 1)], [[[0, 2], [2, 0]]])


@pytest.fixture
def potts3():
    return EnergyFunction.from_tables([[0, 0, 0], [0, 0, 0]], [(0, 1)], [potts(3)])


@pytest.fixture
def two_node_metric():
    return EnergyFunction.from_tables([[0, 10], [10, 0]], [(0, 1)], [potts(2)])


@pytest.fixture
def frustrated_triangle():
    agree = [[1, 0], [0, 1]]
    return EnergyFunction.from_tables([[0, 0]] * 3, [(0, 1), (1, 2), (0, 2)], [agree] * 3)


def zero_energy(n: int, k: int, edges=()) -> EnergyFunction:
    return EnergyFunction.zeros(LabelSpace(n, k, tuple(edges)))


def instances(structure="random", nodes=(2, 5), labels=(2, 3), density=0.6):
    """Hypothesis strategy over seeded generator instances."""
    return st.builds(
        lambda n, k, seed: generate(GeneratorSpec(n, k, density, 6, structure, seed)),
        st.integers(*nodes), st.integers(*labels), st.integers(0, 2**32 - 1),
    )


def rational_instances(nodes=(1, 4), labels=(1, 3)):
    """Small instances with non-integer rational costs."""
    frac = st.fractions(min_value=-5, max_value=5, max_denominator=6)

    @st.composite
    def build(draw):
        n = draw(st.integers(*nodes))
        k = draw(st.integers(*labels))
        pairs = [(s, t) for s in range(n) for t in range(n) if s != t]
        edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=4)) if pairs else []
        unary = [[draw(frac) for _ in range(k)] for _ in range(n)]
        tables = [[[draw(frac) for _ in range(k)] for _ in range(k)] for _ in edges]
        return EnergyFunction.from_tables(unary, edges, tables, draw(frac))

    return build()


F = Fraction

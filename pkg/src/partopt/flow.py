"""Exact max-flow / min-cut and minimization of submodular pairwise energies.

A multi-label submodular energy is reduced to a cut problem with one boolean
per (node, level): ``y[s, a] = [x_s >= a]`` for ``a = 1..L``.  The lowest and
highest minimizers come from the minimal and maximal minimum cuts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .energy import Autarky, EnergyFunction, Strength, is_submodular, second_differences


class NotSubmodularError(ValueError):
    def __init__(self, witness):
        super().__init__(f"energy is not submodular; violating edge/pair: {witness}")
        self.witness = witness


class FlowNetwork:
    """Directed network on nodes ``0..n-1`` with rational capacities."""

    def __init__(self, node_count: int, source: int, sink: int):
        if source == sink:
            raise ValueError("source and sink must differ")
        if not (0 <= source < node_count and 0 <= sink < node_count):
            raise ValueError("source/sink out of range")
        self.node_count = node_count
        self.source = source
        self.sink = sink
        self.arcs: list[tuple[int, int, Fraction]] = []

    def add_arc(self, u: int, v: int, capacity) -> None:
        capacity = Fraction(capacity)
        if capacity < 0:
            raise ValueError(f"negative capacity on arc {u}->{v}")
        if capacity and u != v:
            self.arcs.append((u, v, capacity))

    def cut_capacity(self, source_side) -> Fraction:
        side = set(source_side)
        return sum((c for u, v, c in self.arcs if u in side and v not in side), Fraction(0))


@dataclass(frozen=True)
class CutSolution:
    flow_value: Fraction
    min_source_side: frozenset
    max_source_side: frozenset


def max_flow(net: FlowNetwork) -> CutSolution:
    """Shortest augmenting paths (Edmonds-Karp) on exact capacities."""
    n = net.node_count
    residual = [dict() for _ in range(n)]
    for u, v, c in net.arcs:
        residual[u][v] = residual[u].get(v, 0) + c
        residual[v].setdefault(u, 0)

    s, t = net.source, net.sink
    total = Fraction(0)
    while True:
        parent = {s: None}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for v, c in residual[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(residual[u][v] for u, v in path)
        for u, v in path:
            residual[u][v] -= push
            residual[v][u] += push
        total += push

    # minimal source side: reachable from s in the residual graph
    reach = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v, c in residual[u].items():
            if c > 0 and v not in reach:
                reach.add(v)
                queue.append(v)
    # maximal source side: everything that cannot reach t
    to_sink = {t}
    queue = deque([t])
    while queue:
        v = queue.popleft()
        for u in residual[v]:
            if u not in to_sink and residual[u].get(v, 0) > 0:
                to_sink.add(u)
                queue.append(u)
    maximal = frozenset(range(n)) - to_sink
    return CutSolution(total, frozenset(reach), maximal)


@dataclass(frozen=True)
class SubmodularSolution:
    value: Fraction
    x_lowest: tuple
    x_highest: tuple
    flow_value: Fraction
    offset: Fraction  # value = flow_value + offset


def _build_network(f: EnergyFunction):
    sp = f.space
    L = sp.top
    n = sp.node_count

    def var(s, a):
        return s * L + (a - 1)

    source, sink = n * L, n * L + 1
    net = FlowNetwork(n * L + 2, source, sink)
    offset = f.constant
    coeff = [[Fraction(0)] * (L + 1) for _ in range(n)]  # linear term on y[s, a]
    quad = []

    for s in range(n):
        row = f.unary[s]
        offset += row[0]
        for a in range(1, L + 1):
            coeff[s][a] += row[a] - row[a - 1]
    for e, (s, t) in enumerate(sp.edges):
        tab = f.pairwise[e]
        offset += tab[0, 0]
        for a in range(1, L + 1):
            coeff[s][a] += tab[a, 0] - tab[a - 1, 0]
            coeff[t][a] += tab[0, a] - tab[0, a - 1]
        D = second_differences(tab)
        for a in range(1, L + 1):
            for b in range(1, L + 1):
                d = D[a - 1, b - 1]
                if d:
                    # d*y_a*y_b = d*y_a + (-d)*y_a*(1 - y_b), with -d >= 0
                    coeff[s][a] += d
                    quad.append((var(s, a), var(t, b), -d))

    for u, v, c in quad:
        net.add_arc(u, v, c)
    for s in range(n):
        for a in range(1, L + 1):
            c = coeff[s][a]
            if c > 0:
                net.add_arc(var(s, a), sink, c)
            elif c < 0:
                offset += c
                net.add_arc(source, var(s, a), -c)

    # uncuttable arcs enforcing y[s, a+1] <= y[s, a]
    big = 1 + sum((c for _, _, c in net.arcs), Fraction(0))
    for s in range(n):
        for a in range(1, L):
            net.add_arc(var(s, a + 1), var(s, a), big)
    return net, offset, var


def minimize_submodular(f: EnergyFunction) -> SubmodularSolution:
    """Minimum value plus the lowest and highest minimizers of a submodular f."""
    check = is_submodular(f)
    if not check:
        raise NotSubmodularError(check.witness)
    sp = f.space
    if sp.top == 0:
        value = f.constant + sum(f.unary[:, 0]) + sum(f.pairwise[:, 0, 0])
        z = sp.zeros()
        return SubmodularSolution(value, z, z, Fraction(0), value)

    net, offset, var = _build_network(f)
    cut = max_flow(net)

    def decode(side):
        return tuple(sum(1 for a in range(1, sp.top + 1) if var(s, a) in side)
                     for s in range(sp.node_count))

    lo, hi = decode(cut.min_source_side), decode(cut.max_source_side)
    return SubmodularSolution(cut.flow_value + offset, lo, hi, cut.flow_value, offset)


def strong_autarky_from_minimizers(f: EnergyFunction) -> Autarky:
    sol = minimize_submodular(f)
    return Autarky(sol.x_lowest, sol.x_highest, Strength.STRONG, "submodular-minimizers")

"""LP relaxation over the local polytope and LP-autarkies.

A relaxed labeling ``mu`` puts weights on node labels and edge label pairs;
it is normalized per node and edge marginals agree with node weights.  All
LPs are solved exactly by :func:`partopt.simplex.linprog_exact`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .energy import (
    Autarky,
    EnergyFunction,
    LabelSpace,
    Strength,
    fraction_array,
)
from .simplex import linprog_exact

PROJECTION = "projection"  # (mu veebar x_min) barwedge x_max, collapses to (x v x_min) ^ x_max
LITERAL = "literal"  # (mu barwedge x_min) veebar x_max, operator order as typeset

_ZERO = Fraction(0)


@dataclass(frozen=True, eq=False)
class RelaxedLabeling:
    node: np.ndarray  # (n, K)
    edge: np.ndarray  # (m, K, K)

    def __eq__(self, other):
        if not isinstance(other, RelaxedLabeling):
            return NotImplemented
        return np.array_equal(self.node, other.node) and np.array_equal(self.edge, other.edge)

    def __hash__(self):
        return hash((tuple(self.node.flat), tuple(self.edge.flat)))

    def __add__(self, other):
        return RelaxedLabeling(self.node + other.node, self.edge + other.edge)

    def scale(self, alpha) -> "RelaxedLabeling":
        alpha = Fraction(alpha)
        return RelaxedLabeling(self.node * alpha, self.edge * alpha)

    def is_integral(self) -> bool:
        return all(v in (0, 1) for v in self.node.flat)

    def flat(self) -> list:
        return list(self.node.flat) + list(self.edge.flat)


def _labeling_array(shape):
    return np.full(shape, _ZERO, dtype=object)


def phi(space: LabelSpace, x) -> RelaxedLabeling:
    """Indicator relaxed labeling of an integer labeling x."""
    x = space.check_labeling(x)
    k = space.label_count
    node = _labeling_array((space.node_count, k))
    edge = _labeling_array((space.edge_count, k, k))
    for s, v in enumerate(x):
        node[s, v] = Fraction(1)
    for e, (s, t) in enumerate(space.edges):
        edge[e, x[s], x[t]] = Fraction(1)
    return RelaxedLabeling(node, edge)


def inner(f: EnergyFunction, mu: RelaxedLabeling) -> Fraction:
    """<f, mu> including the constant term (mu_0 = 1)."""
    total = f.constant + sum((a * b for a, b in zip(f.unary.flat, mu.node.flat)), _ZERO)
    return total + sum((a * b for a, b in zip(f.pairwise.flat, mu.edge.flat)), _ZERO)


def local_polytope_violations(space: LabelSpace, mu: RelaxedLabeling) -> list:
    """Human-readable list of violated local-polytope constraints (empty if mu is in it)."""
    out = []
    k = space.label_count
    if mu.node.shape != (space.node_count, k) or mu.edge.shape != (space.edge_count, k, k):
        return ["shape mismatch"]
    if any(v < 0 for v in mu.node.flat) or any(v < 0 for v in mu.edge.flat):
        out.append("negative weight")
    for s in range(space.node_count):
        if sum(mu.node[s]) != 1:
            out.append(f"node {s} not normalized")
    for e, (s, t) in enumerate(space.edges):
        tab = mu.edge[e]
        if sum(tab.flat) != 1:
            out.append(f"edge {e} not normalized")
        for i in range(k):
            if sum(tab[i, :]) != mu.node[s, i]:
                out.append(f"edge {e} row marginal {i} != node {s}")
            if sum(tab[:, i]) != mu.node[t, i]:
                out.append(f"edge {e} column marginal {i} != node {t}")
    return out


def in_local_polytope(space: LabelSpace, mu: RelaxedLabeling) -> bool:
    return not local_polytope_violations(space, mu)


def _psum(a) -> Fraction:
    return sum(a.flat, _ZERO)


def barwedge(space: LabelSpace, mu: RelaxedLabeling, y) -> RelaxedLabeling:
    """Move all weight above y down onto y (relaxed counterpart of x ^ y)."""
    y = space.check_labeling(y)
    node = _labeling_array(mu.node.shape)
    for s, ys in enumerate(y):
        node[s, :ys] = mu.node[s, :ys]
        node[s, ys] = _psum(mu.node[s, ys:])
    edge = _labeling_array(mu.edge.shape)
    for e, (s, t) in enumerate(space.edges):
        a, b = y[s], y[t]
        src, dst = mu.edge[e], edge[e]
        dst[:a, :b] = src[:a, :b]
        for j in range(b):
            dst[a, j] = _psum(src[a:, j])
        for i in range(a):
            dst[i, b] = _psum(src[i, b:])
        dst[a, b] = _psum(src[a:, b:])
    return RelaxedLabeling(node, edge)


def veebar(space: LabelSpace, mu: RelaxedLabeling, y) -> RelaxedLabeling:
    """Move all weight below y up onto y (relaxed counterpart of x v y)."""
    y = space.check_labeling(y)
    node = _labeling_array(mu.node.shape)
    for s, ys in enumerate(y):
        node[s, ys + 1:] = mu.node[s, ys + 1:]
        node[s, ys] = _psum(mu.node[s, :ys + 1])
    edge = _labeling_array(mu.edge.shape)
    for e, (s, t) in enumerate(space.edges):
        a, b = y[s], y[t]
        src, dst = mu.edge[e], edge[e]
        dst[a + 1:, b + 1:] = src[a + 1:, b + 1:]
        for j in range(b + 1, space.label_count):
            dst[a, j] = _psum(src[:a + 1, j])
        for i in range(a + 1, space.label_count):
            dst[i, b] = _psum(src[i, :b + 1])
        dst[a, b] = _psum(src[:a + 1, :b + 1])
    return RelaxedLabeling(node, edge)


@dataclass(frozen=True)
class AutarkyMap:
    """The linear map on relaxed labelings induced by (x_min, x_max)."""

    space: LabelSpace
    x_min: tuple
    x_max: tuple
    pairing: str = PROJECTION

    def __post_init__(self):
        if self.pairing not in (PROJECTION, LITERAL):
            raise ValueError(f"unknown pairing {self.pairing!r}")

    def __call__(self, mu: RelaxedLabeling) -> RelaxedLabeling:
        if self.pairing == PROJECTION:
            return barwedge(self.space, veebar(self.space, mu, self.x_min), self.x_max)
        return veebar(self.space, barwedge(self.space, mu, self.x_min), self.x_max)

    def label_map(self, s: int) -> list:
        """Where label i of node s is sent; the map is a push-forward of this."""
        lo, hi = self.x_min[s], self.x_max[s]
        if self.pairing == PROJECTION:
            return [min(max(i, lo), hi) for i in range(self.space.label_count)]
        return [max(min(i, lo), hi) for i in range(self.space.label_count)]

    def is_identity(self) -> bool:
        return all(self.label_map(s) == list(range(self.space.label_count))
                   for s in range(self.space.node_count))

    def pullback(self, f: EnergyFunction) -> EnergyFunction:
        """Energy h with <h, mu> = <f, A mu> for every mu."""
        maps = [np.array(self.label_map(s)) for s in range(self.space.node_count)]
        unary = np.array([f.unary[s][maps[s]] for s in range(self.space.node_count)], dtype=object)
        pairwise = np.empty_like(f.pairwise)
        for e, (s, t) in enumerate(self.space.edges):
            pairwise[e] = f.pairwise[e][np.ix_(maps[s], maps[t])]
        return EnergyFunction(self.space, f.constant, unary, pairwise)


def autarky_map(space: LabelSpace, x_min, x_max, pairing: str = PROJECTION) -> AutarkyMap:
    return AutarkyMap(space, space.check_labeling(x_min), space.check_labeling(x_max), pairing)


def apply_map(A: AutarkyMap, mu: RelaxedLabeling) -> RelaxedLabeling:
    return A(mu)


# -- LP machinery ------------------------------------------------------------

@lru_cache(maxsize=64)
def _constraints(space: LabelSpace):
    """Equality system of the local polytope over (node | edge) variables."""
    n, k, m = space.node_count, space.label_count, space.edge_count
    nvars = n * k + m * k * k
    rows = []

    def node_col(s, i):
        return s * k + i

    def edge_col(e, i, j):
        return n * k + e * k * k + i * k + j

    for s in range(n):
        r = [0] * nvars
        for i in range(k):
            r[node_col(s, i)] = 1
        rows.append(r)
    for e, (s, t) in enumerate(space.edges):
        for i in range(k):
            r = [0] * nvars
            for j in range(k):
                r[edge_col(e, i, j)] = 1
            r[node_col(s, i)] = -1
            rows.append(r)
        for j in range(k):
            r = [0] * nvars
            for i in range(k):
                r[edge_col(e, i, j)] = 1
            r[node_col(t, j)] = -1
            rows.append(r)
    rhs = [1] * n + [0] * (len(rows) - n)
    return tuple(tuple(r) for r in rows), tuple(rhs), nvars


def _cost_vector(f: EnergyFunction) -> list:
    return list(f.unary.flat) + list(f.pairwise.flat)


def _unflatten(space: LabelSpace, x) -> RelaxedLabeling:
    n, k, m = space.node_count, space.label_count, space.edge_count
    node = fraction_array(np.array(x[:n * k], dtype=object).reshape(n, k))
    edge = fraction_array(np.array(x[n * k:], dtype=object).reshape(m, k, k))
    return RelaxedLabeling(node, edge)


def _solve(space, cost, extra_eq=(), extra_rhs=(), maximize=False):
    rows, rhs, _ = _constraints(space)
    res = linprog_exact(cost, list(rows) + list(extra_eq), list(rhs) + list(extra_rhs),
                        maximize=maximize)
    if not res.optimal:  # the local polytope is a nonempty polytope
        raise RuntimeError(f"local polytope LP returned {res.status}")
    return res


@dataclass(frozen=True)
class LpSolution:
    value: Fraction
    mu: RelaxedLabeling
    basis: tuple
    reduced_costs: tuple  # per LP column; node columns first

    def node_reduced_costs(self, space: LabelSpace) -> np.ndarray:
        n, k = space.node_count, space.label_count
        return np.array(self.reduced_costs[:n * k], dtype=object).reshape(n, k)


def solve_lp(f: EnergyFunction, forbidden=()) -> LpSolution:
    """min <f, mu> over the local polytope; ``forbidden`` (s, i) pairs get mu_{s,i} = 0."""
    sp = f.space
    _, _, nvars = _constraints(sp)
    extra = []
    for s, i in forbidden:
        r = [0] * nvars
        r[s * sp.label_count + i] = 1
        extra.append(r)
    res = _solve(sp, _cost_vector(f), extra, [0] * len(extra))
    return LpSolution(res.value + f.constant, _unflatten(sp, res.x), res.basis, res.reduced_costs)


@dataclass(frozen=True)
class LpAutarkyCheck:
    holds: bool
    value: Fraction  # min over the local polytope of <f, mu - A mu>
    certificate: RelaxedLabeling | None = None  # minimizing mu when the check fails


def _gap_energy(f: EnergyFunction, A: AutarkyMap) -> EnergyFunction:
    return f - A.pullback(f)


def verify_weak_lp_autarky(f: EnergyFunction, a: Autarky, pairing: str = PROJECTION) -> LpAutarkyCheck:
    """Decide <f, A mu> <= <f, mu> for all mu in the local polytope by one LP."""
    A = autarky_map(f.space, a.x_min, a.x_max, pairing)
    if A.is_identity():
        return LpAutarkyCheck(True, _ZERO)
    gap = _gap_energy(f, A)
    res = _solve(f.space, _cost_vector(gap))
    if res.value >= 0:
        return LpAutarkyCheck(True, res.value)
    return LpAutarkyCheck(False, res.value, _unflatten(f.space, res.x))


def verify_strong_lp_autarky(f: EnergyFunction, a: Autarky) -> bool:
    """Strong iff every mu with <f, mu - A mu> = 0 is a fixed point of A.

    A mu = mu exactly when no node weight lies outside [x_min, x_max], so we
    maximize that outside weight over the zero-gap face; strong iff it is 0.
    """
    weak = verify_weak_lp_autarky(f, a)
    if not weak.holds:
        return False
    sp = f.space
    A = autarky_map(sp, a.x_min, a.x_max)
    if A.is_identity():
        return True
    gap = _cost_vector(_gap_energy(f, A))
    _, _, nvars = _constraints(sp)
    outside = [0] * nvars
    for s in range(sp.node_count):
        for i in range(sp.label_count):
            if not a.x_min[s] <= i <= a.x_max[s]:
                outside[s * sp.label_count + i] = 1
    res = _solve(sp, outside, [gap], [0], maximize=True)
    return res.value == 0


def check_relax_submodular(f: EnergyFunction, mu: RelaxedLabeling, y) -> bool:
    """<mu,f> + <phi(y),f> >= <mu barwedge y, f> + <mu veebar y, f>."""
    sp = f.space
    lhs = inner(f, mu) + inner(f, phi(sp, y))
    rhs = inner(f, barwedge(sp, mu, y)) + inner(f, veebar(sp, mu, y))
    return lhs >= rhs


def optimal_support(f: EnergyFunction, solution: LpSolution | None = None) -> np.ndarray:
    """Boolean (n, K) array: True where some LP optimum puts weight on (s, i).

    Positive reduced cost of the first optimum rules a pair out; the remaining
    undecided pairs are probed by maximizing their total weight over the
    optimal face until that maximum is zero.
    """
    sp = f.space
    n, k = sp.node_count, sp.label_count
    sol = solution or solve_lp(f)
    support = np.array([[v > 0 for v in row] for row in sol.mu.node], dtype=bool)
    ruled_out = np.array([[v > 0 for v in row] for row in sol.node_reduced_costs(sp)], dtype=bool)
    unknown = ~support & ~ruled_out
    cost = _cost_vector(f)
    _, _, nvars = _constraints(sp)
    while unknown.any():
        obj = [0] * nvars
        for s, i in zip(*np.nonzero(unknown)):
            obj[s * k + i] = 1
        res = _solve(sp, obj, [cost], [sol.value - f.constant], maximize=True)
        if res.value == 0:
            break
        found = np.array(res.x[:n * k], dtype=object).reshape(n, k)
        support |= np.array([[v > 0 for v in row] for row in found], dtype=bool)
        unknown &= ~support
    return support


def roof_dual_autarky(f: EnergyFunction, support: np.ndarray | None = None) -> Autarky:
    """Strong autarky of a two-label problem read off the LP optimal face."""
    if f.space.label_count != 2:
        raise ValueError("roof_dual_autarky needs a two-label energy")
    support = optimal_support(f) if support is None else support
    lo = tuple(int(np.nonzero(row)[0].min()) for row in support)
    hi = tuple(int(np.nonzero(row)[0].max()) for row in support)
    return Autarky(lo, hi, Strength.STRONG, "roof-dual")


def random_relaxed_labeling(space: LabelSpace, rng, vertices: int = 5,
                            mix_uniform: bool = True) -> RelaxedLabeling:
    """Convex combination of random indicator vertices, optionally mixed with the uniform point."""
    count = int(rng.integers(1, vertices + 1))
    weights = [Fraction(int(w)) for w in rng.integers(1, 10, size=count)]
    mu = None
    for w in weights:
        x = tuple(int(v) for v in rng.integers(0, space.label_count, size=space.node_count))
        term = phi(space, x).scale(w)
        mu = term if mu is None else mu + term
    total = sum(weights)
    mu = mu.scale(Fraction(1) / total)
    if mix_uniform and rng.random() < 0.5:
        k = space.label_count
        uniform = RelaxedLabeling(
            np.full((space.node_count, k), Fraction(1, k), dtype=object),
            np.full((space.edge_count, k, k), Fraction(1, k * k), dtype=object),
        )
        lam = Fraction(int(rng.integers(1, 10)), 10)
        mu = mu.scale(1 - lam) + uniform.scale(lam)
    return mu


def project_relaxed(space: LabelSpace, a: Autarky, mu: RelaxedLabeling) -> RelaxedLabeling:
    return autarky_map(space, a.x_min, a.x_max)(mu)


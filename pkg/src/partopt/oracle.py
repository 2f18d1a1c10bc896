"""Brute-force ground truth for small instances.

Everything here enumerates all (L+1)^|V| labelings. Energies are evaluated
on integer-scaled tables so that the enumeration is vectorized yet exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .energy import Autarky, DomainConstraint, EnergyFunction, LabelSpace, Verdict

DEFAULT_BUDGET = 2_000_000
_CHUNK = 1 << 16


class BudgetExceeded(RuntimeError):
    pass


def _check_budget(space: LabelSpace, budget: int):
    if space.size() > budget:
        raise BudgetExceeded(f"{space.size()} labelings exceed the oracle budget {budget}")


def labeling_block(space: LabelSpace, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the mixed-radix enumeration; node 0 varies slowest."""
    idx = np.arange(start, stop, dtype=np.int64)
    k, n = space.label_count, space.node_count
    out = np.empty((stop - start, n), dtype=np.int64)
    for s in range(n - 1, -1, -1):
        out[:, s] = idx % k
        idx //= k
    return out


class ScaledEnergy:
    """Integer-scaled copy of f for vectorized exact evaluation."""

    def __init__(self, f: EnergyFunction):
        self.f = f
        self.scale, self.constant, self.unary, self.pairwise = f.integer_tables()

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        rows = np.arange(self.f.space.node_count)
        total = np.full(X.shape[0], self.constant, dtype=self.unary.dtype)
        total = total + self.unary[rows, X].sum(axis=1)
        for e, (s, t) in enumerate(self.f.space.edges):
            total = total + self.pairwise[e][X[:, s], X[:, t]]
        return total

    def to_fraction(self, v) -> Fraction:
        return Fraction(int(v), self.scale)


def iter_energies(f: EnergyFunction, budget: int = DEFAULT_BUDGET):
    """Yield (labelings, scaled energies) blocks covering every labeling."""
    _check_budget(f.space, budget)
    scaled = ScaledEnergy(f)
    total = f.space.size()
    for start in range(0, total, _CHUNK):
        X = labeling_block(f.space, start, min(total, start + _CHUNK))
        yield X, scaled(X), scaled


@dataclass(frozen=True)
class MinimizerSet:
    value: Fraction
    minimizers: tuple  # tuple of labelings, lexicographic order
    meet: tuple
    join: tuple

    def __contains__(self, x):
        return tuple(x) in set(self.minimizers)


def enumerate_minimizers(f: EnergyFunction, budget: int = DEFAULT_BUDGET) -> MinimizerSet:
    best = None
    found = []
    scaled = None
    for X, E, scaled in iter_energies(f, budget):
        m = E.min()
        if best is None or m < best:
            best, found = m, []
        if m == best:
            found.append(X[E == best])
    rows = np.concatenate(found)
    mins = tuple(tuple(int(v) for v in r) for r in rows)
    return MinimizerSet(scaled.to_fraction(best), mins,
                        tuple(int(v) for v in rows.min(axis=0)),
                        tuple(int(v) for v in rows.max(axis=0)))


@dataclass(frozen=True)
class AutarkyVerdict:
    verdict: Verdict
    counterexample: tuple | None = None  # violating x (NOT) or non-strict moved x (WEAK)


def check_autarky_definition(f: EnergyFunction, a: Autarky,
                             budget: int = DEFAULT_BUDGET) -> AutarkyVerdict:
    """Check f((x v x_min) ^ x_max) <= f(x) for every x; strong needs < when x moves."""
    lo = np.array(a.x_min, dtype=np.int64)
    hi = np.array(a.x_max, dtype=np.int64)
    tie = None
    for X, E, scaled in iter_energies(f, budget):
        P = np.minimum(np.maximum(X, lo), hi)
        EP = scaled(P)
        bad = np.nonzero(EP > E)[0]
        if bad.size:
            return AutarkyVerdict(Verdict.NOT, tuple(int(v) for v in X[bad[0]]))
        if tie is None:
            moved = np.any(P != X, axis=1)
            ties = np.nonzero(moved & (EP == E))[0]
            if ties.size:
                tie = tuple(int(v) for v in X[ties[0]])
    if tie is not None:
        return AutarkyVerdict(Verdict.WEAK, tie)
    return AutarkyVerdict(Verdict.STRONG)


def check_persistency(f: EnergyFunction, c: DomainConstraint,
                      budget: int = DEFAULT_BUDGET) -> Verdict:
    """STRONG if every minimizer obeys c, WEAK if some does, NOT otherwise."""
    mins = enumerate_minimizers(f, budget).minimizers
    inside = [c.contains(x) for x in mins]
    if all(inside):
        return Verdict.STRONG
    return Verdict.WEAK if any(inside) else Verdict.NOT


def brute_force_minimum(f: EnergyFunction, budget: int = DEFAULT_BUDGET):
    """Value and lexicographically first minimizer."""
    ms = enumerate_minimizers(f, budget)
    return ms.value, ms.minimizers[0]

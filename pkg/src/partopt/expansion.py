"""Expansion moves with truncated move energies."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .energy import Autarky, EnergyFunction, LabelSpace, Ordering, apply_ordering_labeling, to_fraction
from .flow import minimize_submodular
from .oracle import DEFAULT_BUDGET, iter_energies


@dataclass(frozen=True)
class MoveEnergy:
    """Binary energy g(z) = f(x with z_s = 1 nodes switched to k)."""

    g: EnergyFunction
    x: tuple
    k: int

    def __call__(self, z) -> Fraction:
        return self.g(z)

    def apply(self, z) -> tuple:
        return apply_move(self.x, self.k, z)


def apply_move(x, k: int, z) -> tuple:
    return tuple(k if zs else xs for xs, zs in zip(x, z))


@dataclass(frozen=True)
class TruncationRule:
    """Per-edge (alpha, beta); scalars apply to every edge."""

    alpha: object = 0
    beta: object = 1

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            conv = tuple(to_fraction(a) for a in v) if isinstance(v, (tuple, list)) else to_fraction(v)
            object.__setattr__(self, name, conv)
        a, b = self.alpha, self.beta
        if isinstance(a, tuple) and isinstance(b, tuple) and len(a) != len(b):
            raise ValueError("per-edge alpha and beta differ in length")
        lengths = [len(v) for v in (a, b) if isinstance(v, tuple)]
        for e in range(lengths[0] if lengths else 1):
            ae, be = self._at(a, e), self._at(b, e)
            if ae < 0 or be < 0 or ae + be > 1:
                raise ValueError(f"truncation parameters out of range: alpha={ae}, beta={be}")

    @staticmethod
    def _at(v, e):
        return v[e] if isinstance(v, tuple) else v

    def params(self, e: int) -> tuple:
        return self._at(self.alpha, e), self._at(self.beta, e)

    @classmethod
    def random(cls, rng, edge_count: int, denominator: int = 12) -> "TruncationRule":
        """Random rational per-edge parameters on a grid of step 1/denominator."""
        a = rng.integers(0, denominator + 1, size=edge_count)
        b = np.array([rng.integers(0, denominator - ai + 1) for ai in a], dtype=np.int64)
        return cls(tuple(Fraction(int(v), denominator) for v in a),
                   tuple(Fraction(int(v), denominator) for v in b))


DEFAULT_RULE = TruncationRule(0, 1)


def move_energy(f: EnergyFunction, x, k: int) -> MoveEnergy:
    sp = f.space
    x = sp.check_labeling(x)
    if not 0 <= k <= sp.top:
        raise ValueError(f"label {k} out of range")
    unary = [[f.unary[s, xs], f.unary[s, k]] for s, xs in enumerate(x)]
    pairwise = np.empty((sp.edge_count, 2, 2), dtype=object)
    for e, (s, t) in enumerate(sp.edges):
        tab = f.pairwise[e]
        pairwise[e] = [[tab[x[s], x[t]], tab[x[s], k]], [tab[k, x[t]], tab[k, k]]]
    g = EnergyFunction(LabelSpace(sp.node_count, 2, sp.edges), f.constant, unary, pairwise)
    return MoveEnergy(g, x, k)


def delta(g: MoveEnergy | EnergyFunction | np.ndarray, e: int | None = None) -> Fraction:
    """g(1,1) + g(0,0) - g(0,1) - g(1,0) of one edge (or of a bare 2x2 table)."""
    if isinstance(g, MoveEnergy):
        g = g.g
    tab = g.pairwise[e] if isinstance(g, EnergyFunction) else np.asarray(g, dtype=object).reshape(2, 2)
    return tab[1, 1] + tab[0, 0] - tab[0, 1] - tab[1, 0]


def truncate_table(tab, alpha, beta) -> np.ndarray:
    tab = np.asarray(tab, dtype=object).reshape(2, 2)
    d = delta(tab)
    if d <= 0:  # zero counts as submodular
        return tab.copy()
    out = tab.copy()
    out[0, 0] = tab[0, 0] - beta * d
    out[0, 1] = tab[0, 1] + alpha * d
    out[1, 0] = tab[1, 0] + (1 - alpha - beta) * d
    return out


def truncate(g: MoveEnergy, rule: TruncationRule = DEFAULT_RULE) -> MoveEnergy:
    pairwise = np.empty_like(g.g.pairwise)
    for e in range(g.g.space.edge_count):
        pairwise[e] = truncate_table(g.g.pairwise[e], *rule.params(e))
    return MoveEnergy(g.g.replace(pairwise=pairwise), g.x, g.k)


def expansion_step(f: EnergyFunction, x, k: int, rule: TruncationRule = DEFAULT_RULE):
    """One k-expansion.  Returns ``(x', improved)``; ties are rejected."""
    mv = move_energy(f, x, k)
    trunc = truncate(mv, rule) if any(delta(mv, e) > 0 for e in range(f.space.edge_count)) else mv
    z = minimize_submodular(trunc.g).x_lowest
    zero = (0,) * len(z)
    if mv(z) < mv(zero):
        return mv.apply(z), True
    return mv.x, False


class TraceStep(NamedTuple):
    sweep: int
    label: int
    improved: bool
    energy: Fraction


class ExpansionResult(NamedTuple):
    x: tuple
    fixed_point: bool
    trace: tuple


def run_expansion(f: EnergyFunction, x0, rule: TruncationRule = DEFAULT_RULE,
                  max_sweeps: int = 100) -> ExpansionResult:
    """Sweep k = 0..L until a whole sweep changes nothing."""
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")
    x = f.space.check_labeling(x0)
    trace = []
    for sweep in range(max_sweeps):
        changed = False
        for k in range(f.space.label_count):
            x, improved = expansion_step(f, x, k, rule)
            changed |= improved
            trace.append(TraceStep(sweep, k, improved, f(x)))
        if not changed:
            return ExpansionResult(x, True, tuple(trace))
    return ExpansionResult(x, False, tuple(trace))


def increments_dominated(lower: EnergyFunction, upper: EnergyFunction,
                         budget: int = DEFAULT_BUDGET) -> bool:
    """lower(z) - lower(0) <= upper(z) - upper(0) for every z."""
    d = lower - upper
    at_zero = None
    for _, E, _ in iter_energies(d, budget):
        if at_zero is None:
            at_zero = E[0]  # first enumerated labeling is all-0
        if E.max() > at_zero:
            return False
    return True


def check_truncation_ordering(g: MoveEnergy, rule1: TruncationRule, rule2: TruncationRule) -> bool:
    """Increments of the rule1 truncation never exceed those of rule2."""
    return increments_dominated(truncate(g, rule1).g, truncate(g, rule2).g)


def check_truncation_bound(g: MoveEnergy, rule: TruncationRule) -> bool:
    """g(z) - g(0) <= g'(z) - g'(0): truncation never overstates an improvement."""
    return increments_dominated(g.g, truncate(g, rule).g)


@dataclass(frozen=True)
class DominanceCheck:
    holds: bool
    node: int | None = None  # first node where x falls below x_min

    def __bool__(self):
        return self.holds


def verify_fixed_point_dominance(f: EnergyFunction, x_fixed, a: Autarky,
                                 ordering: Ordering | None = None) -> DominanceCheck:
    """x_fixed >= a.x_min, comparing in the label order of ``ordering``."""
    x = f.space.check_labeling(x_fixed)
    if ordering is not None:
        x = apply_ordering_labeling(x, ordering)
    for s, (xs, lo) in enumerate(zip(x, a.x_min)):
        if xs < lo:
            return DominanceCheck(False, s)
    return DominanceCheck(True)

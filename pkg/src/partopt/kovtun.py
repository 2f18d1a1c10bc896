"""Strong autarkies from auxiliary submodular problems.

For ``f = g + h`` with ``g`` submodular and ``h`` satisfying the sufficient
conditions on label sets ``K_s``, the pair (lowest minimizer of g, all-top)
is a strong autarky of f.  Two constructions of g are provided: one-vs-all
(closed form per edge, one target label at a time) and the sequential
construction (per-edge LP, growing K until the lowest minimizer stays
inside it).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .energy import (
    Autarky,
    DomainConstraint,
    EnergyFunction,
    LabelSpace,
    Ordering,
    Strength,
    Verdict,
    apply_ordering,
    fix_labels,
    is_submodular,
    join_autarkies,
    second_differences,
)
from .flow import minimize_submodular
from .lp import roof_dual_autarky, verify_strong_lp_autarky
from .simplex import linprog_exact


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class AuxiliaryDecomposition:
    g: EnergyFunction
    h: EnergyFunction
    K: tuple  # per node frozenset of labels
    table: "OneVsAllTable | None" = None

    def check(self, f: EnergyFunction) -> bool:
        return self.g + self.h == f


@dataclass(frozen=True)
class OneVsAllTable:
    a: tuple
    b: tuple
    c: tuple
    d: tuple

    def edge(self, e: int):
        return self.a[e], self.b[e], self.c[e], self.d[e]


@dataclass(frozen=True)
class ConditionCheck:
    verdict: Verdict  # NOT when (a) or (b) fails, WEAK when only (c) fails
    witness: tuple | None = None


def check_sufficient_conditions(h: EnergyFunction, K) -> ConditionCheck:
    """Check that (y, all-top) is an autarky of h for every y with y_s in K_s.

    (a) h_s(x v k) <= h_s(x),  (b) h_st(x v k) <= h_st(x) for k in K_st,
    (c) h_s(k) < h_s(x) whenever x < k in K_s (makes it strong).
    Witnesses are ``(condition, node_or_edge, x, k)``.
    """
    sp = h.space
    labels = range(sp.label_count)
    K = [frozenset(k) for k in K]
    for s in range(sp.node_count):
        for x, k in itertools.product(labels, sorted(K[s])):
            if h.unary[s, max(x, k)] > h.unary[s, x]:
                return ConditionCheck(Verdict.NOT, ("a", s, x, k))
    for e, (s, t) in enumerate(sp.edges):
        tab = h.pairwise[e]
        for (i, j), (ki, kj) in itertools.product(itertools.product(labels, labels),
                                                  itertools.product(sorted(K[s]), sorted(K[t]))):
            if tab[max(i, ki), max(j, kj)] > tab[i, j]:
                return ConditionCheck(Verdict.NOT, ("b", (s, t), (i, j), (ki, kj)))
    for s in range(sp.node_count):
        for k in sorted(K[s]):
            for x in range(k):
                if not h.unary[s, k] < h.unary[s, x]:
                    return ConditionCheck(Verdict.WEAK, ("c", s, x, k))
    return ConditionCheck(Verdict.STRONG)


# -- one-vs-all ----------------------------------------------------------------

def one_vs_all_ordering(f: EnergyFunction, target: int) -> Ordering:
    """Send ``target`` to the top label and the cheapest other label to 0.

    Ties for the cheapest label go to the smallest original index; remaining
    labels keep their relative order.
    """
    sp = f.space
    L = sp.top
    if not 0 <= target <= L:
        raise ValueError(f"target label {target} out of range")
    perm = []
    for s in range(sp.node_count):
        others = [i for i in range(L + 1) if i != target]
        best = min(others, key=lambda i: (f.unary[s, i], i))
        p = [0] * (L + 1)
        p[target] = L
        p[best] = 0
        for new, old in enumerate((i for i in others if i != best), start=1):
            p[old] = new
        perm.append(tuple(p))
    return Ordering(tuple(perm))


def one_vs_all_coefficients(table: np.ndarray, cap: bool = True):
    """(a, b, c, d) of one edge table, already ordered so the target is on top.

    With ``cap=False`` the ``b + c - a`` bound on d is dropped, which may leave
    the reduced two-label problem non-submodular.
    """
    L = table.shape[0] - 1
    a = table[L, L]
    b = min(table[L, j] for j in range(L))
    c = min(table[i, L] for i in range(L))
    inner = min(table[i, j] + min(b - table[L, j], c - table[i, L])
                for i in range(L) for j in range(L))
    d = min(b + c - a, inner) if cap else inner
    return a, b, c, d


def one_vs_all_auxiliary(f: EnergyFunction, target: int, cap: bool = True):
    """Return ``(ordering, AuxiliaryDecomposition)`` for one target label."""
    sp = f.space
    if sp.label_count < 2:
        raise ValueError("one-vs-all needs at least two labels")
    pi = one_vs_all_ordering(f, target)
    fp = apply_ordering(f, pi)
    L = sp.top
    coeffs = [one_vs_all_coefficients(tab, cap) for tab in fp.pairwise]
    pairwise = np.empty_like(fp.pairwise)
    for e, (a, b, c, d) in enumerate(coeffs):
        tab = np.full((L + 1, L + 1), d, dtype=object)
        tab[L, :L] = b
        tab[:L, L] = c
        tab[L, L] = a
        pairwise[e] = tab
    g = fp.replace(pairwise=pairwise)
    K = (frozenset({0, L}),) * sp.node_count
    table = OneVsAllTable(*(tuple(col) for col in zip(*coeffs))) if coeffs else OneVsAllTable((), (), (), ())
    return pi, AuxiliaryDecomposition(g, fp - g, K, table)


def two_label_reduction(aux: AuxiliaryDecomposition) -> EnergyFunction:
    """The equivalent problem on labels {0, L}: label 1 stands for L."""
    g = aux.g
    sp = g.space
    L = sp.top
    unary = [[g.unary[s, 0], g.unary[s, L]] for s in range(sp.node_count)]
    pairwise = []
    for e in range(sp.edge_count):
        a, b, c, d = aux.table.edge(e)
        pairwise.append([[d, c], [b, a]])
    space2 = LabelSpace(sp.node_count, 2, sp.edges)
    return EnergyFunction(space2, g.constant, unary,
                          pairwise if pairwise else np.empty((0, 2, 2), dtype=object))


def solve_one_vs_all(aux: AuxiliaryDecomposition) -> tuple:
    """Lowest minimizer of the one-vs-all auxiliary g; every entry is 0 or L."""
    L = aux.g.space.top
    z = minimize_submodular(two_label_reduction(aux)).x_lowest
    x_min = tuple(L * v for v in z)
    if any(v not in (0, L) for v in x_min):
        raise ConstructionError(f"lowest minimizer {x_min} left K = {{0, L}}")
    return x_min


@dataclass(frozen=True)
class KovtunResult:
    """One auxiliary-problem run; ``autarky`` lives in the reordered label space."""

    method: str
    ordering: Ordering
    aux: AuxiliaryDecomposition
    autarky: Autarky
    target: int | None = None
    iterations: int = 1

    @property
    def fixed_nodes(self) -> tuple:
        return tuple(sorted(self.autarky.fixed_nodes()))

    def fixed_labels(self) -> dict:
        """Fixed nodes and their labels in the original order."""
        inv = self.ordering.inverse().perm
        return {s: inv[s][v] for s, v in self.autarky.fixed_nodes().items()}

    def original_constraint(self) -> DomainConstraint:
        """K_s = labels whose reordered index lies in [x_min_s, x_max_s]."""
        inv = self.ordering.inverse().perm
        allowed = tuple(frozenset(inv[s][i] for i in range(lo, hi + 1))
                        for s, (lo, hi) in enumerate(zip(self.autarky.x_min, self.autarky.x_max)))
        return DomainConstraint(allowed, Strength.STRONG)

    def original_autarky(self) -> Autarky:
        """Same projection written in the original label order.

        Only defined when every node is either pinned or free: the projection
        is then a partial assignment, which does not depend on the order.
        """
        sp = self.aux.g.space
        a = self.autarky
        if any(lo != hi and (lo, hi) != (0, sp.top) for lo, hi in zip(a.x_min, a.x_max)):
            raise ValueError("autarky has intermediate bounds; no interval form in the original order")
        fixed = fix_labels(sp, self.fixed_labels())
        return Autarky(fixed.x_min, fixed.x_max, Strength.STRONG, a.provenance)


def one_vs_all(f: EnergyFunction, target: int) -> KovtunResult:
    pi, aux = one_vs_all_auxiliary(f, target)
    x_min = solve_one_vs_all(aux)
    a = Autarky(x_min, f.space.tops(), Strength.STRONG, f"one-vs-all[{target}]")
    return KovtunResult("one-vs-all", pi, aux, a, target)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def constraint_from_results(space: LabelSpace, results) -> DomainConstraint:
    """Intersection of the per-run constraints, in the original label order."""
    constraint = DomainConstraint.full(space)
    for r in results:
        constraint = constraint.intersect(r.original_constraint())
    return constraint


def join_results(space: LabelSpace, results) -> Autarky:
    """Join of the partial-assignment autarkies of runs whose x_min lies in {0, L}."""
    joined = Autarky.identity(space)
    for r in results:
        if all(lo == hi or (lo, hi) == (0, space.top) for lo, hi in zip(r.autarky.x_min, r.autarky.x_max)):
            joined = join_autarkies(joined, r.original_autarky())
    return joined


def one_vs_all_runs(f: EnergyFunction, workers: int = 1) -> list:
    return _map(lambda k: one_vs_all(f, k), range(f.space.label_count), workers)


def one_vs_all_all_labels(f: EnergyFunction, workers: int = 1):
    """Run one-vs-all for every target label.

    Returns ``(DomainConstraint, [Autarky, ...])``: the intersected constraint
    and one partial-assignment autarky per label, both in the original order.
    """
    results = one_vs_all_runs(f, workers)
    return constraint_from_results(f.space, results), [r.original_autarky() for r in results]


# -- improved one-vs-all ---------------------------------------------------------

def improved_run(f: EnergyFunction, target: int) -> KovtunResult:
    """One-vs-all with the uncapped d and a roof-dual read-out.

    Without the cap the two-label problem may be non-submodular, so its
    strong autarky comes from the roof dual.  When h vanishes (always the
    case for two labels) that autarky is one of f itself and is joined in
    whole.  Otherwise h only satisfies one-sided conditions, so the nodes the
    roof dual pins at L are kept only if the pair (z, 1) passes the exact
    strong LP-autarky test.  Either way the plain one-vs-all autarky is joined
    in, so the result never fixes fewer nodes.
    """
    base = one_vs_all(f, target)
    pi, aux = one_vs_all_auxiliary(f, target, cap=False)
    g2 = two_label_reduction(aux)
    rd = roof_dual_autarky(g2)
    sp = f.space
    L = sp.top
    lift = lambda z: tuple(L * v for v in z)
    if aux.h == EnergyFunction.zeros(sp):
        extra = Autarky(lift(rd.x_min), lift(rd.x_max), Strength.STRONG, "roof-dual")
    else:
        z = rd.x_min
        extra = Autarky.identity(sp)
        if any(z) and verify_strong_lp_autarky(g2, Autarky(z, (1,) * len(z))):
            extra = Autarky(lift(z), sp.tops(), Strength.STRONG, "roof-dual")
    a = join_autarkies(base.autarky, extra)
    a = Autarky(a.x_min, a.x_max, Strength.STRONG, f"improved-one-vs-all[{target}]")
    return KovtunResult("improved-one-vs-all", pi, aux, a, target)


def improved_one_vs_all(f: EnergyFunction, target: int) -> Autarky:
    """Partial-assignment autarky (original label order) of :func:`improved_run`."""
    return improved_run(f, target).original_autarky()


def improved_runs(f: EnergyFunction, workers: int = 1) -> list:
    return _map(lambda k: improved_run(f, k), range(f.space.label_count), workers)


# -- sequential construction -----------------------------------------------------
def _auxiliary_edge(table: np.ndarray, Ks, Kt) -> np.ndarray:
    """Closest (L1) submodular g_st with h = f - g meeting condition (b) on Ks x Kt."""
    k = table.shape[0]
    if not any(v > 0 for v in second_differences(table).flat):
        return table  # g = f, h = 0 satisfies everything
    nv = k * k
    pairs = list(itertools.product(range(k), range(k)))
    idx = {p: n for n, p in enumerate(pairs)}
    rows, rhs = [], []
    # g = f + u - w with u, w >= 0; second differences of g must be <= 0
    D = second_differences(table)
    for a in range(1, k):
        for b in range(1, k):
            r = [0] * (2 * nv)
            for (i, j), sgn in (((a, b), 1), ((a - 1, b), -1), ((a, b - 1), -1), ((a - 1, b - 1), 1)):
                r[idx[i, j]] += sgn
                r[nv + idx[i, j]] -= sgn
            rows.append(r)
            rhs.append(-D[a - 1, b - 1])
    # h = w - u must not increase when raising to any (ki, kj) in Ks x Kt
    seen = set()
    for x in pairs:
        for kk in itertools.product(sorted(Ks), sorted(Kt)):
            y = (max(x[0], kk[0]), max(x[1], kk[1]))
            if y == x or (x, y) in seen:
                continue
            seen.add((x, y))
            r = [0] * (2 * nv)
            r[nv + idx[y]] += 1
            r[idx[y]] -= 1
            r[nv + idx[x]] -= 1
            r[idx[x]] += 1
            rows.append(r)
            rhs.append(0)
    res = linprog_exact([1] * (2 * nv), A_ub=rows, b_ub=rhs)
    if not res.optimal:
        raise ConstructionError(f"auxiliary edge LP is {res.status}")
    g = np.empty((k, k), dtype=object)
    for (i, j), n in idx.items():
        g[i, j] = table[i, j] + res.x[n] - res.x[nv + n]
    return g


def sequential_auxiliary(fp: EnergyFunction, K) -> AuxiliaryDecomposition:
    """g with g_s = f_s and per-edge tables from :func:`_auxiliary_edge` (f already reordered)."""
    sp = fp.space
    pairwise = np.empty_like(fp.pairwise)
    for e, (s, t) in enumerate(sp.edges):
        pairwise[e] = _auxiliary_edge(fp.pairwise[e], K[s], K[t])
    g = fp.replace(pairwise=pairwise)
    return AuxiliaryDecomposition(g, fp - g, tuple(frozenset(k) for k in K))


def sequential_run(f: EnergyFunction, pi: Ordering | None = None,
                   max_iterations: int | None = None) -> KovtunResult:
    """Grow K by the lowest minimizer of g until that minimizer lies inside K.

    An infeasible edge LP aborts the loop with the vacuous autarky (all-0, all-L).
    """
    sp = f.space
    pi = pi or Ordering.identity(sp)
    fp = apply_ordering(f, pi)
    K = [frozenset() for _ in range(sp.node_count)]
    limit = max_iterations or sp.node_count * sp.label_count + 1
    aux = AuxiliaryDecomposition(fp, fp - fp, tuple(K))
    for it in range(1, limit + 1):
        try:
            aux = sequential_auxiliary(fp, K)
        except ConstructionError:
            break
        if not is_submodular(aux.g):
            raise ConstructionError("sequential construction produced a non-submodular g")
        x_min = minimize_submodular(aux.g).x_lowest
        if all(v in k for v, k in zip(x_min, K)):
            a = Autarky(x_min, sp.tops(), Strength.STRONG, "sequential")
            return KovtunResult("sequential", pi, aux, a, None, it)
        K = [k | {v} for k, v in zip(K, x_min)]
    return KovtunResult("sequential", pi, aux, Autarky(sp.zeros(), sp.tops(), Strength.STRONG, "sequential"),
                        None, 0)


def sequential_kovtun(f: EnergyFunction, pi: Ordering | None = None) -> Autarky:
    """(x_min, all-L) in the label order given by ``pi``."""
    return sequential_run(f, pi).autarky


def sequential_runs(f: EnergyFunction, workers: int = 1) -> list:
    """Sequential construction under each one-vs-all ordering."""
    def run(k):
        r = sequential_run(f, one_vs_all_ordering(f, k))
        return KovtunResult(r.method, r.ordering, r.aux, r.autarky, k, r.iterations)

    return _map(run, range(f.space.label_count), workers)

"""Exact rational two-phase primal simplex.

Solves ``min c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0`` on a dense
tableau of ``gmpy2.mpq`` entries.  Pricing is Dantzig's rule while the
objective moves; after a degenerate pivot it falls back to Bland's rule until
the next non-degenerate pivot, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction | None = None
    x: tuple | None = None  # structural variables only
    basis: tuple = ()  # basic structural/slack column per surviving row
    reduced_costs: tuple | None = None  # structural columns, sign w.r.t. minimization
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _matrix(rows, ncols):
    if rows is None or len(rows) == 0:
        return np.empty((0, ncols), dtype=object)
    A = np.empty((len(rows), ncols), dtype=object)
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise ValueError("constraint row has wrong length")
        for j, v in enumerate(row):
            A[i, j] = _q(v)
    return A


class _Tableau:
    def __init__(self, T, basis):
        self.T = T  # last row = objective (reduced costs | -z), last column = rhs
        self.basis = basis
        self.pivots = 0

    @property
    def m(self):
        return self.T.shape[0] - 1

    def pivot(self, r, q):
        T = self.T
        piv = T[r, q]
        nz = np.nonzero(T[r])[0]
        if piv != 1:
            T[r, nz] = T[r, nz] / piv
        rows = np.nonzero(T[:, q])[0]
        rows = rows[rows != r]
        if rows.size:
            T[np.ix_(rows, nz)] = T[np.ix_(rows, nz)] - np.outer(T[rows, q], T[r, nz])
        self.basis[r] = q
        self.pivots += 1

    def run(self, allowed: np.ndarray) -> str:
        T = self.T
        bland = False
        while True:
            d = T[-1, :-1]
            cand = np.nonzero(allowed & np.array([v < 0 for v in d], dtype=bool))[0]
            if cand.size == 0:
                return OPTIMAL
            if bland:
                q = int(cand[0])
            else:
                vals = d[cand]
                q = int(cand[min(range(len(cand)), key=lambda i: (vals[i], cand[i]))])
            col = T[:-1, q]
            best, r = None, -1
            for i in np.nonzero([v > 0 for v in col])[0]:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                    best, r = ratio, int(i)
            if r < 0:
                return UNBOUNDED
            bland = best == 0
            self.pivot(r, q)


def linprog_exact(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, *, maximize=False) -> LPResult:
    n = len(c)
    cost = np.array([_q(v) for v in c], dtype=object)
    if maximize:
        cost = -cost
    Ae, Au = _matrix(A_eq, n), _matrix(A_ub, n)
    be = [_q(v) for v in (b_eq if b_eq is not None else [])]
    bu = [_q(v) for v in (b_ub if b_ub is not None else [])]
    if len(be) != Ae.shape[0] or len(bu) != Au.shape[0]:
        raise ValueError("right-hand side length does not match constraints")

    me, mu = Ae.shape[0], Au.shape[0]
    m = me + mu
    n_struct = n + mu  # structural + slack columns
    # rows needing an artificial: all equalities, and <= rows with negative rhs
    art_rows = list(range(me)) + [me + i for i in range(mu) if bu[i] < 0]
    n_art = len(art_rows)
    width = n_struct + n_art + 1
    zero = mpq(0)
    T = np.full((m + 1, width), zero, dtype=object)
    T[:me, :n] = Ae
    T[me:m, :n] = Au
    for i in range(mu):
        T[me + i, n + i] = mpq(1)
    rhs = be + bu
    T[:m, -1] = rhs
    for i in range(m):
        if rhs[i] < 0:
            T[i, :-1] = -T[i, :-1]
            T[i, -1] = -T[i, -1]
    basis = [0] * m
    for i in range(mu):
        basis[me + i] = n + i
    for a, i in enumerate(art_rows):
        T[i, n_struct + a] = mpq(1)
        basis[i] = n_struct + a
    tab = _Tableau(T, basis)

    # phase I: minimize the sum of artificials
    if n_art:
        T[-1, :] = zero
        for i in art_rows:
            T[-1, :n_struct] = T[-1, :n_struct] - T[i, :n_struct]
            T[-1, -1] = T[-1, -1] - T[i, -1]
        allowed = np.ones(width - 1, dtype=bool)
        tab.run(allowed)
        if T[-1, -1] != 0:
            return LPResult(INFEASIBLE, pivots=tab.pivots)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= n_struct:
                nz = [j for j in range(n_struct) if T[i, j] != 0]
                if not nz:
                    continue
                tab.pivot(i, nz[0])
            keep.append(i)
        T = T[keep + [m]][:, list(range(n_struct)) + [width - 1]]
        tab.T = T
        tab.basis = [tab.basis[i] for i in keep]
    else:
        T = T[:, list(range(n_struct)) + [width - 1]]
        tab.T = T

    # phase II
    full_cost = np.concatenate([cost, np.full(mu, zero, dtype=object)])
    cb = np.array([full_cost[j] for j in tab.basis], dtype=object)
    obj = np.empty(n_struct + 1, dtype=object)
    body = T[:-1]
    for j in range(n_struct + 1):
        acc = sum((cb[i] * body[i, j] for i in range(len(cb)) if body[i, j] != 0), zero)
        obj[j] = (full_cost[j] if j < n_struct else zero) - acc
    T[-1] = obj
    status = tab.run(np.ones(n_struct, dtype=bool))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=tab.pivots)

    x = [zero] * n_struct
    for i, j in enumerate(tab.basis):
        x[j] = T[i, -1]
    value = -T[-1, -1]
    if maximize:
        value = -value
    return LPResult(
        OPTIMAL,
        _frac(value),
        tuple(_frac(v) for v in x[:n]),
        tuple(tab.basis),
        tuple(_frac(v) for v in T[-1, :n]),
        tab.pivots,
    )

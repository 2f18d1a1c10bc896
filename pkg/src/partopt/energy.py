"""Pairwise energies, labelings and autarkies.

An energy over a graph ``(V, E)`` with ``L + 1`` labels per node is

    f(x) = f_0 + sum_s f_s(x_s) + sum_{st} f_st(x_s, x_t)

All tables hold :class:`fractions.Fraction` values in numpy object arrays so
that every comparison made downstream is exact.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Labeling = tuple  # tuple[int, ...], one label index per node


class Strength(str, enum.Enum):
    WEAK = "weak"
    STRONG = "strong"


class Verdict(enum.IntEnum):
    """Ordered verdict used by the checkers: NOT < WEAK < STRONG."""

    NOT = 0
    WEAK = 1
    STRONG = 2

    def __str__(self):
        return self.name.lower()


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite energy value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.replace("−", "-").strip())
    try:
        return Fraction(value)
    except TypeError:
        # gmpy2.mpq and friends
        return Fraction(int(value.numerator), int(value.denominator))


def fraction_array(values, shape=None) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"expected table of shape {tuple(shape)}, got {arr.shape}")
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LabelSpace:
    node_count: int
    label_count: int
    edges: tuple = ()

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if self.label_count < 1:
            raise ValueError("label_count must be positive")
        edges = tuple((int(s), int(t)) for s, t in self.edges)
        seen = set()
        for s, t in edges:
            if s == t:
                raise ValueError(f"self-loop edge ({s}, {t})")
            if not (0 <= s < self.node_count and 0 <= t < self.node_count):
                raise ValueError(f"edge ({s}, {t}) out of range")
            if (s, t) in seen:
                raise ValueError(f"duplicate edge ({s}, {t})")
            seen.add((s, t))
        object.__setattr__(self, "edges", edges)

    @property
    def top(self) -> int:
        """The largest label index L."""
        return self.label_count - 1

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def size(self) -> int:
        """Number of labelings, (L+1)^|V|."""
        return self.label_count ** self.node_count

    def check_labeling(self, x: Sequence[int]) -> Labeling:
        x = tuple(int(v) for v in x)
        if len(x) != self.node_count:
            raise ValueError(f"labeling has {len(x)} entries, expected {self.node_count}")
        for v in x:
            if not 0 <= v < self.label_count:
                raise ValueError(f"label {v} out of range 0..{self.top}")
        return x

    def zeros(self) -> Labeling:
        return (0,) * self.node_count

    def tops(self) -> Labeling:
        return (self.top,) * self.node_count


class EnergyFunction:
    """Immutable pairwise energy with exact rational tables.

    ``unary`` has shape ``(n, L+1)`` and ``pairwise`` has shape
    ``(m, L+1, L+1)`` where row ``i`` of an edge table is the label of the
    edge's first node.
    """

    __slots__ = ("space", "constant", "unary", "pairwise")

    def __init__(self, space: LabelSpace, constant, unary, pairwise):
        k = space.label_count
        self.space = space
        self.constant = to_fraction(constant)
        self.unary = _frozen(fraction_array(unary, (space.node_count, k)))
        if space.edge_count == 0 and np.size(pairwise) == 0:
            pairwise = np.empty((0, k, k), dtype=object)
        self.pairwise = _frozen(fraction_array(pairwise, (space.edge_count, k, k)))

    @classmethod
    def from_tables(cls, unary, edges=(), pairwise=(), constant=0):
        unary = np.asarray(unary, dtype=object)
        if unary.ndim != 2:
            raise ValueError("unary must be a 2-d table (nodes x labels)")
        space = LabelSpace(unary.shape[0], unary.shape[1], tuple(edges))
        return cls(space, constant, unary, list(pairwise))

    @classmethod
    def zeros(cls, space: LabelSpace):
        k = space.label_count
        return cls(space, 0, np.zeros((space.node_count, k), dtype=int),
                   np.zeros((space.edge_count, k, k), dtype=int))

    def replace(self, *, constant=None, unary=None, pairwise=None) -> "EnergyFunction":
        return EnergyFunction(
            self.space,
            self.constant if constant is None else constant,
            self.unary if unary is None else unary,
            self.pairwise if pairwise is None else pairwise,
        )

    def edge_index(self, s: int, t: int) -> int:
        return self.space.edges.index((s, t))

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    def __add__(self, other: "EnergyFunction") -> "EnergyFunction":
        _same_space(self, other)
        return EnergyFunction(self.space, self.constant + other.constant,
                              self.unary + other.unary, self.pairwise + other.pairwise)

    def __sub__(self, other: "EnergyFunction") -> "EnergyFunction":
        _same_space(self, other)
        return EnergyFunction(self.space, self.constant - other.constant,
                              self.unary - other.unary, self.pairwise - other.pairwise)

    def __eq__(self, other):
        if not isinstance(other, EnergyFunction):
            return NotImplemented
        return (self.space == other.space and self.constant == other.constant
                and np.array_equal(self.unary, other.unary)
                and np.array_equal(self.pairwise, other.pairwise))

    def __hash__(self):
        return hash((self.space, self.constant, tuple(self.unary.flat), tuple(self.pairwise.flat)))

    def __repr__(self):
        sp = self.space
        return (f"EnergyFunction(nodes={sp.node_count}, labels={sp.label_count}, "
                f"edges={sp.edge_count})")

    def integer_tables(self):
        """Return ``(scale, constant, unary, pairwise)`` scaled to integers.

        ``scale`` is the lcm of all denominators, so ``scale * f(x)`` is an
        integer for every labeling. Arrays are int64 when the total magnitude
        fits comfortably, Python-int object arrays otherwise.
        """
        values = [self.constant, *self.unary.flat, *self.pairwise.flat]
        scale = 1
        for v in values:
            scale = math.lcm(scale, v.denominator)
        bound = sum(abs(v) for v in values) * scale
        dtype = np.int64 if bound < 2 ** 62 else object

        def conv(a):
            return np.array([int(v * scale) for v in a.flat], dtype=object).reshape(a.shape).astype(dtype)

        return scale, int(self.constant * scale), conv(self.unary), conv(self.pairwise)


def _same_space(f: EnergyFunction, g: EnergyFunction):
    if f.space != g.space:
        raise ValueError("energies live on different label spaces")


def evaluate(f: EnergyFunction, x) -> Fraction:
    x = f.space.check_labeling(x)
    total = f.constant
    for s, v in enumerate(x):
        total += f.unary[s, v]
    for e, (s, t) in enumerate(f.space.edges):
        total += f.pairwise[e, x[s], x[t]]
    return total


def meet(x, y) -> Labeling:
    if len(x) != len(y):
        raise ValueError("labelings differ in length")
    return tuple(min(a, b) for a, b in zip(x, y))


def join(x, y) -> Labeling:
    if len(x) != len(y):
        raise ValueError("labelings differ in length")
    return tuple(max(a, b) for a, b in zip(x, y))


def leq(x, y) -> bool:
    """Component-wise order x <= y."""
    return all(a <= b for a, b in zip(x, y))


@dataclass(frozen=True)
class Autarky:
    x_min: Labeling
    x_max: Labeling
    strength: Strength = Strength.STRONG
    provenance: str = ""

    def __post_init__(self):
        x_min = tuple(int(v) for v in self.x_min)
        x_max = tuple(int(v) for v in self.x_max)
        if len(x_min) != len(x_max):
            raise ValueError("x_min and x_max differ in length")
        if not leq(x_min, x_max):
            raise ValueError(f"x_min {x_min} is not below x_max {x_max}")
        object.__setattr__(self, "x_min", x_min)
        object.__setattr__(self, "x_max", x_max)
        object.__setattr__(self, "strength", Strength(self.strength))

    @classmethod
    def identity(cls, space: LabelSpace, strength=Strength.STRONG, provenance="identity"):
        return cls(space.zeros(), space.tops(), strength, provenance)

    def fixed_nodes(self) -> dict:
        return {s: a for s, (a, b) in enumerate(zip(self.x_min, self.x_max)) if a == b}

    def is_identity(self, space: LabelSpace) -> bool:
        return self.x_min == space.zeros() and self.x_max == space.tops()


def project_through(a: Autarky, x) -> Labeling:
    """(x v x_min) ^ x_max."""
    if len(x) != len(a.x_min):
        raise ValueError("labeling and autarky differ in length")
    return meet(join(x, a.x_min), a.x_max)


def join_autarkies(a: Autarky, b: Autarky) -> Autarky:
    """Join of two strong autarkies: (a.x_min v b.x_min, a.x_max ^ b.x_max)."""
    if a.strength is not Strength.STRONG or b.strength is not Strength.STRONG:
        raise ValueError("only strong autarkies can be joined")
    lo, hi = join(a.x_min, b.x_min), meet(a.x_max, b.x_max)
    if not leq(lo, hi):
        raise ValueError(f"contradictory autarkies: joined x_min {lo} exceeds x_max {hi}")
    prov = "+".join(p for p in (a.provenance, b.provenance) if p)
    return Autarky(lo, hi, Strength.STRONG, prov)


@dataclass(frozen=True)
class DomainConstraint:
    allowed: tuple  # per node frozenset of labels
    strength: Strength = Strength.STRONG

    def __post_init__(self):
        allowed = tuple(frozenset(int(v) for v in k) for k in self.allowed)
        for s, k in enumerate(allowed):
            if not k:
                raise ValueError(f"empty label set at node {s}")
        object.__setattr__(self, "allowed", allowed)
        object.__setattr__(self, "strength", Strength(self.strength))

    @classmethod
    def full(cls, space: LabelSpace, strength=Strength.STRONG):
        labels = frozenset(range(space.label_count))
        return cls((labels,) * space.node_count, strength)

    def contains(self, x) -> bool:
        return all(v in k for v, k in zip(x, self.allowed))

    def fixed_nodes(self) -> dict:
        return {s: next(iter(k)) for s, k in enumerate(self.allowed) if len(k) == 1}

    def intersect(self, other: "DomainConstraint") -> "DomainConstraint":
        if len(self.allowed) != len(other.allowed):
            raise ValueError("constraints differ in length")
        both = tuple(a & b for a, b in zip(self.allowed, other.allowed))
        for s, k in enumerate(both):
            if not k:
                raise ValueError(f"contradictory constraints at node {s}")
        weakest = Strength.STRONG if (self.strength is Strength.STRONG
                                      and other.strength is Strength.STRONG) else Strength.WEAK
        return DomainConstraint(both, weakest)

    def as_lists(self) -> list:
        return [sorted(k) for k in self.allowed]


def autarky_to_constraint(a: Autarky) -> DomainConstraint:
    return DomainConstraint(tuple(range(lo, hi + 1) for lo, hi in zip(a.x_min, a.x_max)), a.strength)


@dataclass(frozen=True)
class SubmodularityCheck:
    holds: bool
    witness: tuple | None = None  # (edge, x_st, y_st)

    def __bool__(self):
        return self.holds


def is_submodular(f: EnergyFunction) -> SubmodularityCheck:
    """Check f_st(x)+f_st(y) >= f_st(x^y)+f_st(x v y) on every edge.

    It suffices to check adjacent 2x2 minors; on failure the witness is the
    violating pair ``((i, j+1), (i+1, j))``.
    """
    for e, table in enumerate(f.pairwise):
        k = table.shape[0]
        for i in range(k - 1):
            for j in range(k - 1):
                if table[i + 1, j + 1] + table[i, j] > table[i + 1, j] + table[i, j + 1]:
                    return SubmodularityCheck(False, (f.space.edges[e], (i, j + 1), (i + 1, j)))
    return SubmodularityCheck(True)


def second_differences(table: np.ndarray) -> np.ndarray:
    """D(a, b) = t(a,b) - t(a-1,b) - t(a,b-1) + t(a-1,b-1) for a, b >= 1."""
    return table[1:, 1:] - table[:-1, 1:] - table[1:, :-1] + table[:-1, :-1]


def is_metric(f: EnergyFunction) -> bool:
    k = f.space.label_count
    for table in f.pairwise:
        for i in range(k):
            for j in range(k):
                v = table[i, j]
                if v < 0 or (v == 0) != (i == j) or v != table[j, i]:
                    return False
                for m in range(k):
                    if table[i, m] > table[i, j] + table[j, m]:
                        return False
    return True


@dataclass(frozen=True)
class Ordering:
    """Per-node relabeling; ``perm[s][i]`` is the new index of label ``i``."""

    perm: tuple = field(default=())

    def __post_init__(self):
        perm = tuple(tuple(int(v) for v in p) for p in self.perm)
        for s, p in enumerate(perm):
            if sorted(p) != list(range(len(p))):
                raise ValueError(f"ordering at node {s} is not a permutation: {p}")
        object.__setattr__(self, "perm", perm)

    @classmethod
    def identity(cls, space: LabelSpace):
        return cls((tuple(range(space.label_count)),) * space.node_count)

    def inverse(self) -> "Ordering":
        inv = []
        for p in self.perm:
            q = [0] * len(p)
            for i, v in enumerate(p):
                q[v] = i
            inv.append(tuple(q))
        return Ordering(tuple(inv))

    def _check(self, space: LabelSpace):
        if len(self.perm) != space.node_count or any(len(p) != space.label_count for p in self.perm):
            raise ValueError("ordering does not match the label space")


def apply_ordering(f: EnergyFunction, pi: Ordering) -> EnergyFunction:
    pi._check(f.space)
    perm = [np.array(p) for p in pi.perm]
    unary = np.empty_like(f.unary)
    for s in range(f.space.node_count):
        unary[s, perm[s]] = f.unary[s]
    pairwise = np.empty_like(f.pairwise)
    for e, (s, t) in enumerate(f.space.edges):
        pairwise[e][np.ix_(perm[s], perm[t])] = f.pairwise[e]
    return EnergyFunction(f.space, f.constant, unary, pairwise)


def apply_ordering_labeling(x, pi: Ordering) -> Labeling:
    return tuple(pi.perm[s][v] for s, v in enumerate(x))


def fix_labels(space: LabelSpace, fixed: dict) -> Autarky:
    """The interval autarky that pins ``fixed`` nodes and leaves the rest free."""
    lo = [fixed.get(s, 0) for s in range(space.node_count)]
    hi = [fixed.get(s, space.top) for s in range(space.node_count)]
    return Autarky(tuple(lo), tuple(hi))


def all_labelings(space: LabelSpace) -> Iterable[Labeling]:
    return itertools.product(range(space.label_count), repeat=space.node_count)

"""PEM1 instance files, JSON reports and seeded random instance generators.

PEM1 layout (whitespace separated, ``#`` comments)::

    PEM1
    <node_count> <label_count> <edge_count>
    <f_0>
    <f_s(0) ... f_s(L)>            # one line per node
    <s> <t>                        # per edge, followed by
    <f_st(i, 0) ... f_st(i, L)>    # L+1 rows, row i = label of s
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .energy import EnergyFunction, LabelSpace

_RATIONAL = re.compile(r"^[+\-−]?\d+(/\d+)?$")

REPORT_KEYS = (
    "instance", "method", "derived_constraint", "autarky", "lp_value",
    "energy_value", "fixed_point", "oracle_verdict", "wall_time_ms",
)


class PEM1Error(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _rational(token: str, line: int) -> Fraction:
    if not _RATIONAL.match(token):
        raise PEM1Error(f"not a rational number: {token!r}", line)
    token = token.replace("−", "-")
    num, _, den = token.partition("/")
    if den and int(den) == 0:
        raise PEM1Error(f"zero denominator in {token!r}", line)
    return Fraction(int(num), int(den) if den else 1)


def _integer(token: str, line: int) -> int:
    if not re.match(r"^\d+$", token):
        raise PEM1Error(f"expected a non-negative integer, got {token!r}", line)
    return int(token)


def parse(text: str) -> EnergyFunction:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            lines.append((no, tokens))
    it = iter(lines)

    def take(what):
        try:
            return next(it)
        except StopIteration:
            last = lines[-1][0] if lines else 0
            raise PEM1Error(f"unexpected end of file, expected {what}", last + 1) from None

    no, tokens = take("header")
    if tokens != ["PEM1"]:
        raise PEM1Error("missing PEM1 header", no)
    no, tokens = take("sizes")
    if len(tokens) != 3:
        raise PEM1Error("expected 'node_count label_count edge_count'", no)
    n, k, m = (_integer(t, no) for t in tokens)
    if n < 1 or k < 1:
        raise PEM1Error("node_count and label_count must be positive", no)
    no, tokens = take("constant")
    if len(tokens) != 1:
        raise PEM1Error("expected a single constant term", no)
    constant = _rational(tokens[0], no)

    def row(what):
        no, tokens = take(what)
        if len(tokens) != k:
            raise PEM1Error(f"expected {k} values for {what}, got {len(tokens)}", no)
        return [_rational(t, no) for t in tokens]

    unary = [row(f"unary of node {s}") for s in range(n)]
    edges, pairwise, seen = [], [], set()
    for e in range(m):
        no, tokens = take(f"edge {e}")
        if len(tokens) != 2:
            raise PEM1Error("expected edge line 's t'", no)
        s, t = (_integer(v, no) for v in tokens)
        if s == t:
            raise PEM1Error(f"self-loop edge {s} {t}", no)
        if s >= n or t >= n:
            raise PEM1Error(f"edge {s} {t} references a node >= {n}", no)
        if (s, t) in seen:
            raise PEM1Error(f"duplicate edge {s} {t}", no)
        seen.add((s, t))
        edges.append((s, t))
        pairwise.append([row(f"row {i} of edge {s} {t}") for i in range(k)])
    extra = next(it, None)
    if extra is not None:
        raise PEM1Error("trailing content after last edge", extra[0])

    space = LabelSpace(n, k, tuple(edges))
    return EnergyFunction(space, constant, unary,
                          pairwise if m else np.empty((0, k, k), dtype=object))


def format_rational(v) -> str:
    return str(Fraction(v))


def serialize(f: EnergyFunction) -> str:
    sp = f.space
    out = ["PEM1", f"{sp.node_count} {sp.label_count} {sp.edge_count}", format_rational(f.constant)]
    out += [" ".join(map(format_rational, r)) for r in f.unary]
    for (s, t), table in zip(sp.edges, f.pairwise):
        out.append(f"{s} {t}")
        out += [" ".join(map(format_rational, r)) for r in table]
    return "\n".join(out) + "\n"


def read_instance(path: str) -> EnergyFunction:
    if path == "-":
        import sys

        return parse(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write_instance(f: EnergyFunction, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(f))


# -- reports ---------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, frozenset, set)):
        items = sorted(v) if isinstance(v, (frozenset, set)) else v
        return [_jsonable(x) for x in items]
    if isinstance(v, np.integer):
        return int(v)
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):  # str enums
        return v.value
    return v


def make_report(**fields) -> dict:
    """Report dict with every schema key present (``None`` when not applicable)."""
    report = {key: None for key in REPORT_KEYS}
    report.update(fields)
    return _jsonable(report)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)


# -- generators ------------------------------------------------------------

STRUCTURES = ("random", "potts", "metric", "submodular", "two-label")


@dataclass(frozen=True)
class GeneratorSpec:
    node_count: int
    label_count: int
    edge_density: float = 0.5
    value_range: int = 10
    structure: str = "random"
    seed: int = 0

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}; choose from {STRUCTURES}")
        if self.node_count < 1 or self.label_count < 1:
            raise ValueError("node_count and label_count must be positive")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ValueError("edge_density must lie in [0, 1]")
        if self.value_range < 1:
            raise ValueError("value_range must be positive")
        if self.structure == "metric" and self.label_count < 2:
            raise ValueError("a metric instance needs at least two labels")
        if self.structure == "two-label" and self.label_count != 2:
            raise ValueError("structure 'two-label' requires label_count == 2")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _random_metric(rng, k: int, hi: int) -> np.ndarray:
    """Shortest-path closure of random positive symmetric weights."""
    w = rng.integers(1, hi + 1, size=(k, k))
    d = np.minimum(w, w.T)
    np.fill_diagonal(d, 0)
    for m in range(k):
        d = np.minimum(d, d[:, [m]] + d[[m], :])
    return d


def _random_submodular(rng, k: int, r: int) -> np.ndarray:
    """u(i) + v(j) + sum_{a,b>=1} c_ab [i>=a][j>=b] with c_ab <= 0."""
    u = rng.integers(-r, r + 1, size=k)
    v = rng.integers(-r, r + 1, size=k)
    c = -rng.integers(0, r + 1, size=(k - 1, k - 1))
    table = u[:, None] + v[None, :]
    inter = np.zeros((k, k), dtype=np.int64)
    inter[1:, 1:] = c.cumsum(axis=0).cumsum(axis=1)
    return table + inter


def generate(spec: GeneratorSpec) -> EnergyFunction:
    rng = np.random.default_rng(spec.seed)
    n, k, r = spec.node_count, spec.label_count, spec.value_range
    edges = [(s, t) for s in range(n) for t in range(s + 1, n) if rng.random() < spec.edge_density]
    unary = rng.integers(-r, r + 1, size=(n, k))
    tables = []
    for _ in edges:
        if spec.structure in ("random", "two-label"):
            tables.append(rng.integers(-r, r + 1, size=(k, k)))
        elif spec.structure == "potts":
            w = rng.integers(1, r + 1)
            tables.append(w * (1 - np.eye(k, dtype=np.int64)))
        elif spec.structure == "metric":
            tables.append(_random_metric(rng, k, r))
        else:
            tables.append(_random_submodular(rng, k, r))
    space = LabelSpace(n, k, tuple(edges))
    pairwise = np.array(tables, dtype=np.int64).reshape(len(edges), k, k)
    return EnergyFunction(space, 0, unary, pairwise)


def random_labeling(space: LabelSpace, rng) -> tuple:
    return tuple(int(v) for v in rng.integers(0, space.label_count, size=space.node_count))

"""Command-line front end.

Exit codes: 0 ok or verified, 1 refuted, 2 input error, 3 precondition violated.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import expansion, kovtun, lp
from .energy import Autarky, Verdict
from .flow import NotSubmodularError, minimize_submodular
from .oracle import DEFAULT_BUDGET, BudgetExceeded, check_autarky_definition, check_persistency, enumerate_minimizers
from .problem_io import PEM1Error, make_report, read_instance, report_json

OK, REFUTED, INPUT_ERROR, PRECONDITION = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = INPUT_ERROR):
        super().__init__(message)
        self.code = code


def parse_labeling(text: str, n: int) -> tuple:
    try:
        x = tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise CliError(f"malformed labeling {text!r}") from None
    if len(x) != n:
        raise CliError(f"labeling {text!r} has {len(x)} entries, expected {n}")
    return x


def _within_budget(f, args) -> bool:
    return f.space.size() <= args.oracle_budget


def _verify_default(f, args) -> bool:
    return _within_budget(f, args) if args.verify is None else args.verify


def _autarky_dict(a: Autarky) -> dict:
    return {"x_min": list(a.x_min), "x_max": list(a.x_max), "strength": a.strength.value}


# -- subcommands ----------------------------------------------------------------

def cmd_solve(f, args) -> tuple[dict, int]:
    fields = {}
    if args.method == "bruteforce":
        ms = enumerate_minimizers(f, args.oracle_budget)
        fields = dict(energy_value=ms.value, labeling=ms.minimizers[0],
                      minimizer_count=len(ms.minimizers))
    elif args.method == "submodular-cut":
        sol = minimize_submodular(f)
        fields = dict(energy_value=sol.value, labeling=sol.x_lowest,
                      x_lowest=sol.x_lowest, x_highest=sol.x_highest)
    elif args.method == "lp":
        sol = lp.solve_lp(f)
        fields = dict(lp_value=sol.value, integral=sol.mu.is_integral(),
                      node_marginals=sol.mu.node.tolist())
        if sol.mu.is_integral():
            x = tuple(int(np.nonzero(row)[0][0]) for row in sol.mu.node)
            fields.update(labeling=x, energy_value=f(x))
    else:
        res = expansion.run_expansion(f, f.space.zeros(), _rule(f, args), args.max_sweeps)
        fields = dict(energy_value=f(res.x), labeling=res.x, fixed_point=res.fixed_point)
    return fields, OK


def _kovtun_runs(f, args) -> list:
    if args.order == "identity":
        if args.method != "sequential":
            raise CliError("--order identity only applies to --method sequential")
        return [kovtun.sequential_run(f)]
    labels = range(f.space.label_count) if args.target is None else [args.target]
    if args.method == "one-vs-all":
        fn = lambda k: kovtun.one_vs_all(f, k)
    elif args.method == "improved":
        fn = lambda k: kovtun.improved_run(f, k)
    else:
        def fn(k):
            r = kovtun.sequential_run(f, kovtun.one_vs_all_ordering(f, k))
            return kovtun.KovtunResult(r.method, r.ordering, r.aux, r.autarky, k, r.iterations)
    return kovtun._map(fn, list(labels), args.threads)


def cmd_kovtun(f, args) -> tuple[dict, int]:
    if f.space.label_count < 2:
        raise CliError("kovtun needs at least two labels", PRECONDITION)
    if args.target is not None and not 0 <= args.target <= f.space.top:
        raise CliError(f"target label {args.target} out of range")
    runs = _kovtun_runs(f, args)
    constraint = kovtun.constraint_from_results(f.space, runs)
    joined = kovtun.join_results(f.space, runs)
    per_label = [{
        "target": r.target,
        "x_min": list(r.autarky.x_min),
        "x_max": list(r.autarky.x_max),
        "fixed": {str(s): v for s, v in sorted(r.fixed_labels().items())},
        "iterations": r.iterations,
    } for r in runs]
    fields = dict(derived_constraint=constraint.as_lists(), autarky=_autarky_dict(joined),
                  per_label=per_label, fixed=dict(sorted(constraint.fixed_nodes().items())))
    code = OK
    if _verify_default(f, args):
        v = check_persistency(f, constraint, args.oracle_budget)
        d = check_autarky_definition(f, joined, args.oracle_budget)
        fields.update(oracle_verdict=str(min(v, d.verdict)),
                      lp_autarky=lp.verify_weak_lp_autarky(f, joined).holds)
        if v < Verdict.STRONG or d.verdict < Verdict.STRONG:
            code = REFUTED
    return fields, code


def cmd_lp(f, args) -> tuple[dict, int]:
    sol = lp.solve_lp(f)
    support = lp.optimal_support(f, sol)
    fields = dict(lp_value=sol.value, integral=sol.mu.is_integral(),
                  node_marginals=sol.mu.node.tolist(),
                  support=[[int(i) for i in np.nonzero(row)[0]] for row in support])
    if f.space.label_count == 2:
        rd = lp.roof_dual_autarky(f, support)
        fields.update(autarky=_autarky_dict(rd), derived_constraint=[sorted(set(range(rd.x_min[s], rd.x_max[s] + 1)))
                                                                     for s in range(f.space.node_count)])
    return fields, OK


def _pair_from_report(path: str) -> tuple:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
        data = json.loads(text)
        a = data["autarky"]
        return a["x_min"], a["x_max"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot read autarky from report {path!r}: {exc}") from None


def cmd_verify_autarky(f, args) -> tuple[dict, int]:
    n = f.space.node_count
    if args.from_report is not None:
        lo, hi = _pair_from_report(args.from_report)
        lo, hi = parse_labeling(" ".join(map(str, lo)), n), parse_labeling(" ".join(map(str, hi)), n)
    elif args.x_min is not None and args.x_max is not None:
        lo, hi = parse_labeling(args.x_min, n), parse_labeling(args.x_max, n)
    else:
        raise CliError("give --x-min and --x-max, or --from-report")
    try:
        f.space.check_labeling(lo)
        f.space.check_labeling(hi)
        a = Autarky(lo, hi)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    weak = lp.verify_weak_lp_autarky(f, a)
    strong = weak.holds and lp.verify_strong_lp_autarky(f, a)
    lp_verdict = "strong" if strong else "weak" if weak.holds else "not"
    fields = dict(autarky={"x_min": list(lo), "x_max": list(hi), "strength": lp_verdict},
                  lp_autarky=lp_verdict, lp_value=weak.value)
    if weak.certificate is not None:
        fields["certificate"] = {"node": weak.certificate.node.tolist(),
                                 "edge": weak.certificate.edge.tolist()}
    verified = weak.holds
    if _verify_default(f, args):
        d = check_autarky_definition(f, a, args.oracle_budget)
        fields["oracle_verdict"] = str(d.verdict)
        if d.verdict == Verdict.NOT:
            fields["counterexample"] = d.counterexample
        verified = d.verdict > Verdict.NOT
    fields["verified"] = verified
    return fields, OK if verified else REFUTED


def _rule(f, args) -> expansion.TruncationRule:
    try:
        return expansion.TruncationRule(args.alpha, args.beta)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_expand(f, args) -> tuple[dict, int]:
    rule = _rule(f, args)
    if args.x0 == "random":
        x0 = tuple(int(v) for v in np.random.default_rng(args.seed).integers(0, f.space.label_count, f.space.node_count))
    elif args.x0 is not None:
        x0 = parse_labeling(args.x0, f.space.node_count)
        try:
            f.space.check_labeling(x0)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    else:
        x0 = f.space.zeros()
    if args.max_sweeps < 0:
        raise CliError("--max-sweeps must be non-negative")
    if args.max_sweeps == 0:
        res = expansion.ExpansionResult(x0, False, ())
    else:
        res = expansion.run_expansion(f, x0, rule, args.max_sweeps)
    fields = dict(labeling=res.x, energy_value=f(res.x), fixed_point=res.fixed_point,
                  trace=[{"sweep": t.sweep, "label": t.label, "improved": t.improved, "energy": t.energy}
                         for t in res.trace])
    code = OK
    if args.against_kovtun:
        if f.space.label_count < 2:
            raise CliError("--against-kovtun needs at least two labels", PRECONDITION)
        checks = []
        for r in kovtun.one_vs_all_runs(f, args.threads):
            c = expansion.verify_fixed_point_dominance(f, res.x, r.autarky, r.ordering)
            checks.append({"target": r.target, "holds": c.holds, "node": c.node})
        fields["dominance"] = checks
        if res.fixed_point and not all(c["holds"] for c in checks):
            code = REFUTED
    return fields, code


def cmd_oracle(f, args) -> tuple[dict, int]:
    ms = enumerate_minimizers(f, args.oracle_budget)
    shown = ms.minimizers[: args.limit]
    return dict(energy_value=ms.value, minimizers=shown, minimizer_count=len(ms.minimizers),
                meet=ms.meet, join=ms.join), OK


COMMANDS = {
    "solve": cmd_solve,
    "kovtun": cmd_kovtun,
    "lp": cmd_lp,
    "verify-autarky": cmd_verify_autarky,
    "expand": cmd_expand,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("instance", help="PEM1 file, or - for standard input")
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--oracle-budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--seed", type=int, default=0)

    verify = argparse.ArgumentParser(add_help=False)
    verify.add_argument("--verify", dest="verify", action="store_true", default=None,
                        help="check results by enumeration (default: when within the oracle budget)")
    verify.add_argument("--no-verify", dest="verify", action="store_false")

    trunc = argparse.ArgumentParser(add_help=False)
    trunc.add_argument("--alpha", default="0")
    trunc.add_argument("--beta", default="1")
    trunc.add_argument("--max-sweeps", type=int, default=100)

    p = argparse.ArgumentParser(prog="partopt", description="Partial optimality for pairwise energies.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common, trunc], help="minimize the energy")
    s.add_argument("--method", choices=["bruteforce", "submodular-cut", "lp", "expansion"], default="bruteforce")

    s = sub.add_parser("kovtun", parents=[common, verify], help="strong autarkies from auxiliary problems")
    s.add_argument("--method", choices=["one-vs-all", "sequential", "improved"], default="one-vs-all")
    s.add_argument("--target", type=int, default=None, help="single target label (default: all)")
    s.add_argument("--order", choices=["one-vs-all", "identity"], default="one-vs-all",
                   help="label orderings for the sequential method")

    sub.add_parser("lp", parents=[common], help="solve the local polytope relaxation")

    s = sub.add_parser("verify-autarky", parents=[common, verify], help="check an (x_min, x_max) pair")
    s.add_argument("--x-min")
    s.add_argument("--x-max")
    s.add_argument("--from-report", help="JSON report with an autarky field, or - for standard input")

    s = sub.add_parser("expand", parents=[common, trunc], help="expansion moves to a fixed point")
    s.add_argument("--x0", help="start labeling, 'random', or all-0 by default")
    s.add_argument("--against-kovtun", action="store_true")

    s = sub.add_parser("oracle", parents=[common], help="enumerate all minimizers")
    s.add_argument("--limit", type=int, default=50, help="minimizers to list")
    return p


def _human(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if value is None or key in ("trace", "node_marginals", "certificate"):
            continue
        lines.append(f"{key}: {json.dumps(value)}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify-autarky" and args.instance == "-" and args.from_report == "-":
        print("error: instance and report cannot both come from standard input", file=sys.stderr)
        return INPUT_ERROR
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return INPUT_ERROR
    start = time.perf_counter()
    try:
        f = read_instance(args.instance)
        fields, code = COMMANDS[args.command](f, args)
    except (PEM1Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NotSubmodularError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"witness: edge {exc.witness[0]}, x={exc.witness[1]}, y={exc.witness[2]}", file=sys.stderr)
        return PRECONDITION
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PRECONDITION
    method = getattr(args, "method", None) or args.command
    report = make_report(instance=args.instance, method=method,
                         wall_time_ms=round((time.perf_counter() - start) * 1000, 3), **fields)
    print(report_json(report) if args.json else _human(report))
    return code


if __name__ == "__main__":
    sys.exit(main())

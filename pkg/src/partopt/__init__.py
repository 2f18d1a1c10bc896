"""Partial optimality for pairwise energies with exact rational arithmetic."""

from .energy import (
    Autarky,
    DomainConstraint,
    EnergyFunction,
    LabelSpace,
    Ordering,
    Strength,
    Verdict,
    apply_ordering,
    is_submodular,
    join_autarkies,
)
from .expansion import TruncationRule, expansion_step, run_expansion
from .flow import minimize_submodular
from .kovtun import improved_one_vs_all, one_vs_all_all_labels, sequential_kovtun
from .lp import optimal_support, roof_dual_autarky, solve_lp, verify_strong_lp_autarky, verify_weak_lp_autarky
from .oracle import check_autarky_definition, check_persistency, enumerate_minimizers
from .problem_io import GeneratorSpec, generate, parse, serialize

__version__ = "0.1.0"

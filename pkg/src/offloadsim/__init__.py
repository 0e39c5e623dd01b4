"""Operator-side utility maximization for offloading cellular users to a third-party WiFi AP."""

from .exact import OracleSizeError, SolverResult, best_subset_no_sic, solve_exhaustive
from .model import (
    Assignment,
    ScenarioRealization,
    SicMode,
    SystemParams,
    UtilityBreakdown,
    sum_rate_no_sic,
    sum_rate_sic,
    utility,
)
from .no_sic import PrefixSearchResult, one_one_association, prefix_best, solve_no_sic
from .scenario import (
    GeneratorConfig,
    NakagamiM,
    PathLoss,
    Rayleigh,
    derive_trial_seed,
    dump_scenario,
    generate,
    load_scenario,
    scenario_from_positions,
)
from .sic_both import (
    KktCertificate,
    RelaxedSolution,
    distributed_assign,
    optimal_threshold,
    round_to_assignment,
    solve_relaxation,
    solve_relaxation_pga,
    solve_sic_both,
)
from .sic_one_side import GeometricDiagnostic, lemma52_diagnostic, solve_sic_one_side

__version__ = "0.1.0"

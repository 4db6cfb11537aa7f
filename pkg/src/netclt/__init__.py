"""Final-size analysis for SIR epidemics and percolation on
configuration-model random graphs: an exact count-based jump-chain
simulator, closed-form asymptotic means and variances, and independent
oracles (quadrature, exact enumeration, fluid ODEs) tying them together.
"""

from .distributions import (
    ConstantPeriod,
    CustomPeriod,
    DegreeDistribution,
    ExponentialPeriod,
    InfectiousPeriod,
    ReducedPgf,
    ZeroOrInfinityPeriod,
    build_constant,
    build_geometric,
    build_poisson,
    build_power_cutoff,
    from_pmf,
    parse_degree_spec,
    parse_period_spec,
    period_matched_to_transmission,
    pgf_derivative,
    sample_transmission_count,
    transmission_params,
)
from .epidemic import (
    EnsembleResult,
    EpidemicSetup,
    InitialCondition,
    SimulationOutcome,
    classify_major,
    initialize,
    run_ensemble,
    run_final_size,
    step,
)
from .graphs import (
    MultiGraph,
    bond_percolate,
    largest_component,
    mr_degree_sequence,
    nsw_degree_sequence,
    pair_half_edges,
    site_percolate,
)
from .oracle import (
    enumerate_final_size,
    fluid_consistency_check,
    site_variance_by_quadrature,
    variance_by_quadrature,
)
from .theory import (
    NearCriticalError,
    SubcriticalError,
    TheoryError,
    TheoryResult,
    basic_reproduction_number,
    critical_transmission,
    epidemic_theory_major,
    epidemic_theory_positive,
    giant_component_theory,
    major_outbreak_prob,
    percolation_theory,
    solve_z,
)

__version__ = "0.1.0"
